#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "isoperi/curves.hpp"
#include "isoperi/errors.hpp"
#include "isoperi/forms.hpp"

namespace isoperi {

// Signed projected areas V_I, one per axis plane, stored for i < j.
struct MultiVolume {
    int n = 0;
    std::map<AxisPlane, double> values;

    double value(const AxisPlane& p) const {
        auto it = values.find(p);
        return it == values.end() ? 0.0 : it->second;
    }
};

// Two-sided enclosure of the spanning volume: lower <= v(S) <= upper.
struct VolumeBracket {
    double lower = 0.0;
    double upper = 0.0;
};

inline double length(const DiscreteCurve& c) {
    const int N = c.size();
    double L = 0.0;
    for (int k = 0; k < N; ++k)
        L += (c.vertices.row((k + 1) % N) - c.vertices.row(k)).norm();
    return L;
}

// Exact gradient of length in vertex coordinates: at vertex k it is
// unit(x_k - x_{k-1}) - unit(x_{k+1} - x_k); the negative weak mean curvature
// integrated against vertex hat functions.
inline VertexField length_gradient(const DiscreteCurve& c) {
    const int N = c.size();
    VertexField g = VertexField::Zero(N, c.n);
    for (int k = 0; k < N; ++k) {
        const int k1 = (k + 1) % N;
        Eigen::RowVectorXd e = c.vertices.row(k1) - c.vertices.row(k);
        e /= e.norm();
        g.row(k) -= e;
        g.row(k1) += e;
    }
    return g;
}

// Shoelace signed area of the projection onto plane (i, j).
inline double shoelace(const DiscreteCurve& c, const AxisPlane& p) {
    const int N = c.size();
    double v = 0.0;
    for (int k = 0; k < N; ++k) {
        const int k1 = (k + 1) % N;
        v += c.vertices(k, p.i) * c.vertices(k1, p.j) -
             c.vertices(k, p.j) * c.vertices(k1, p.i);
    }
    return 0.5 * v;
}

inline MultiVolume multi_volume(const DiscreteCurve& c) {
    MultiVolume mv;
    mv.n = c.n;
    for (const auto& p : all_planes(c.n)) mv.values[p] = shoelace(c, p);
    return mv;
}

// Periodic-trapezoid evaluation of V_ij = 1/2 ∮ (x_i x_j' - x_j x_i') ds with
// analytic derivatives; exact to roundoff for trigonometric curves once the
// node count exceeds the integrand bandwidth (N > 4*max_frequency suffices).
inline MultiVolume multi_volume(const FourierCurve& c, int nodes) {
    c.validate();
    if (nodes < 3 || nodes < 4 * c.max_frequency())
        throw InputError("multi_volume: node count undersamples the curve");
    MultiVolume mv;
    mv.n = c.n;
    for (const auto& p : all_planes(c.n)) mv.values[p] = 0.0;
    const double h = 2.0 * std::numbers::pi / nodes;
    for (int k = 0; k < nodes; ++k) {
        const double s = h * k;
        const Vec x = c.position(s);
        const Vec d = c.derivative(s);
        for (auto& [p, v] : mv.values) v += x(p.i) * d(p.j) - x(p.j) * d(p.i);
    }
    for (auto& [p, v] : mv.values) v *= 0.5 * h;
    return mv;
}

// Exact gradient of each V_ij in vertex coordinates:
//   dV_ij/dx_i^k =  1/2 (x_j^{k+1} - x_j^{k-1})
//   dV_ij/dx_j^k = -1/2 (x_i^{k+1} - x_i^{k-1})
inline VertexField multi_volume_jacobian(const DiscreteCurve& c, const AxisPlane& p) {
    const int N = c.size();
    VertexField g = VertexField::Zero(N, c.n);
    for (int k = 0; k < N; ++k) {
        const int kp = (k + 1) % N;
        const int km = (k + N - 1) % N;
        g(k, p.i) = 0.5 * (c.vertices(kp, p.j) - c.vertices(km, p.j));
        g(k, p.j) = -0.5 * (c.vertices(kp, p.i) - c.vertices(km, p.i));
    }
    return g;
}

inline std::map<AxisPlane, VertexField> multi_volume_jacobian(const DiscreteCurve& c) {
    std::map<AxisPlane, VertexField> out;
    for (const auto& p : all_planes(c.n)) out[p] = multi_volume_jacobian(c, p);
    return out;
}

inline double omega_volume(const DiscreteCurve& c, const ConstantTwoForm& omega) {
    if (omega.n != c.n) throw InputError("omega_volume: dimension mismatch");
    double v = 0.0;
    for (const auto& [p, coeff] : omega.coeffs) v += coeff * shoelace(c, p);
    return v;
}

inline double omega_volume(const FourierCurve& c, const ConstantTwoForm& omega, int nodes) {
    if (omega.n != c.n) throw InputError("omega_volume: dimension mismatch");
    const MultiVolume mv = multi_volume(c, nodes);
    double v = 0.0;
    for (const auto& [p, coeff] : omega.coeffs) v += coeff * mv.value(p);
    return v;
}

struct StationarityFit {
    ConstantTwoForm form;    // best-fit constant 2-form Omega*
    double residual = 0.0;   // |G - sum Omega_I J_I| / |G|, relative
    bool degenerate = false; // normal equations rank-deficient (minimum-norm fit)
};

inline Eigen::VectorXd flatten(const VertexField& f) {
    Eigen::VectorXd v(f.size());
    for (int k = 0; k < f.rows(); ++k)
        v.segment(k * f.cols(), f.cols()) = f.row(k).transpose();
    return v;
}

inline VertexField unflatten(const Eigen::VectorXd& v, int N, int n) {
    VertexField f(N, n);
    for (int k = 0; k < N; ++k) f.row(k) = v.segment(k * n, n).transpose();
    return f;
}

// Least-squares fit of the weak stationarity identity: finds the constant
// 2-form whose interior-product field best explains the length gradient.
// A near-zero residual certifies first-order stationarity for multi-volume.
inline StationarityFit stationarity_fit(
    const DiscreteCurve& c,
    const std::optional<std::vector<AxisPlane>>& restriction = std::nullopt) {
    const std::vector<AxisPlane> planes = restriction ? *restriction : all_planes(c.n);
    if (planes.empty()) throw InputError("stationarity_fit: empty plane restriction");
    for (const auto& p : planes)
        if (p.j >= c.n) throw InputError("stationarity_fit: plane out of range");

    const Eigen::VectorXd g = flatten(length_gradient(c));
    Mat a(g.size(), static_cast<int>(planes.size()));
    for (size_t idx = 0; idx < planes.size(); ++idx)
        a.col(static_cast<int>(idx)) = flatten(multi_volume_jacobian(c, planes[idx]));

    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double rank_tol = 1e-12 * svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > rank_tol) ++rank;

    // JacobiSVD::solve already returns the minimum-norm least-squares solution
    // once small singular values are treated as zero.
    svd.setThreshold(1e-12);
    const Vec coeffs = svd.solve(g);

    StationarityFit fit;
    fit.form = ConstantTwoForm(c.n);
    for (size_t idx = 0; idx < planes.size(); ++idx)
        fit.form.coeffs[planes[idx]] = coeffs(static_cast<int>(idx));
    fit.residual = (g - a * coeffs).norm() / g.norm();
    fit.degenerate = rank < static_cast<int>(planes.size());
    return fit;
}

// Area of a bivector spanned by a and b: |a ^ b| = sqrt(|a|^2 |b|^2 - (a.b)^2).
inline double wedge_area(const Vec& a, const Vec& b) {
    const double s = a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b);
    return std::sqrt(std::max(0.0, s));
}

inline double cone_area(const DiscreteCurve& c, const Vec& apex) {
    const int N = c.size();
    double area = 0.0;
    for (int k = 0; k < N; ++k) {
        const Vec a = c.vertices.row(k).transpose() - apex;
        const Vec b = c.vertices.row((k + 1) % N).transpose() - apex;
        area += 0.5 * wedge_area(a, b);
    }
    return area;
}

// Lower bound: largest projected area over the axis planes and over the
// principal plane of the curve's second-moment tensor (projection never
// increases area). Upper bound: smallest cone over the curve among candidate
// apexes (vertex centroid and every vertex).
inline VolumeBracket spanning_volume_bracket(const DiscreteCurve& c) {
    const int N = c.size();
    double lower = 0.0;
    for (const auto& p : all_planes(c.n))
        lower = std::max(lower, std::abs(shoelace(c, p)));

    // Projected area onto the top-two principal axes of the centered cloud.
    const Eigen::RowVectorXd mean = c.vertices.colwise().mean();
    const Mat centered = c.vertices.rowwise() - mean;
    Eigen::SelfAdjointEigenSolver<Mat> es(centered.transpose() * centered);
    if (es.info() == Eigen::Success && c.n >= 2) {
        const Vec u = es.eigenvectors().col(c.n - 1);
        const Vec v = es.eigenvectors().col(c.n - 2);
        double area = 0.0;
        for (int k = 0; k < N; ++k) {
            const int k1 = (k + 1) % N;
            const double ui = centered.row(k).dot(u), vi = centered.row(k).dot(v);
            const double uj = centered.row(k1).dot(u), vj = centered.row(k1).dot(v);
            area += ui * vj - vi * uj;
        }
        lower = std::max(lower, std::abs(0.5 * area));
    }

    const Vec centroid = mean.transpose();
    double upper = cone_area(c, centroid);
    for (int k = 0; k < N; ++k)
        upper = std::min(upper, cone_area(c, c.vertices.row(k).transpose()));

    return VolumeBracket{lower, upper};
}

// H0 = length / (2 v): the constant mean-curvature magnitude a spanning
// surface of volume v would impose.
inline double h_zero(const DiscreteCurve& c, double v) {
    if (!(v > 0.0)) throw InputError("h_zero: volume must be positive");
    return length(c) / (2.0 * v);
}

// Bracket version: the H0 range induced by a volume bracket.
inline std::pair<double, double> h_zero(const DiscreteCurve& c, const VolumeBracket& b) {
    if (!(b.lower > 0.0)) throw InputError("h_zero: bracket lower bound must be positive");
    return {h_zero(c, b.upper), h_zero(c, b.lower)};
}

} // namespace isoperi
