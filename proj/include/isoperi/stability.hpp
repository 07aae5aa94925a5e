#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "isoperi/curves.hpp"
#include "isoperi/errors.hpp"
#include "isoperi/functionals.hpp"
#include "isoperi/optimizer.hpp"

namespace isoperi {

enum class StabilityVerdict { stable, unstable, marginal };

inline std::string to_string(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::stable: return "stable";
        case StabilityVerdict::unstable: return "unstable";
        default: return "marginal";
    }
}

struct SpectrumReport {
    std::vector<double> eigenvalues; // ascending, constraint tangent space minus rigid motions
    double min_eigenvalue = 0.0;
    StabilityVerdict verdict = StabilityVerdict::marginal;
    double marginal_band = 0.0;      // |min_eigenvalue| <= band  =>  marginal
    int deflated_constraint_rows = 0;
    int deflated_translations = 0;
    int deflated_rotations = 0;
    int deflation_rank = 0;          // rank of the combined deflation basis
    int tangential_mode_count = 0;   // flagged reparametrization-like modes (kept in spectrum)
    std::vector<int> tangential_mode_indices;
    double fd_asymmetry = 0.0;       // relative asymmetry of the FD Hessian before symmetrizing
};

struct SpectrumConfig {
    double tol_g = 1e-4;            // stationarity precondition: residual <= 10*tol_g
    double fd_step_factor = 1e-5;   // FD step = factor * mean edge length
    // Marginal band = factor * spectral radius. The FD eigenvalue noise floor
    // sits near 1e-9 * radius, so 1e-8 separates real near-zero modes from
    // noise without swallowing the O(h^3) reparametrization eigenvalues.
    double marginal_factor = 1e-8;
    double tangent_cos = std::cos(10.0 * std::numbers::pi / 180.0);
    double tangent_vertex_fraction = 0.9;
};

namespace detail {

inline Vec fit_multipliers(const Eigen::VectorXd& gf, const Mat& j, double& rel_residual) {
    const Mat jjt = j * j.transpose();
    const Vec lambda = jjt.ldlt().solve(j * gf);
    rel_residual = (gf - j.transpose() * lambda).norm() / gf.norm();
    return lambda;
}

inline Eigen::VectorXd lagrangian_gradient(const DiscreteCurve& c, const ConstraintSet& cs,
                                           const Vec& lambda) {
    return flatten(length_gradient(c)) - cs.jacobian(c).transpose() * lambda;
}

// Vertex fields generating rigid motions: n translations and C(n,2) rotations.
inline std::vector<Eigen::VectorXd> rigid_motion_fields(const DiscreteCurve& c) {
    const int N = c.size(), n = c.n;
    std::vector<Eigen::VectorXd> fields;
    for (int d = 0; d < n; ++d) {
        VertexField f = VertexField::Zero(N, n);
        f.col(d).setOnes();
        fields.push_back(flatten(f));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            VertexField f = VertexField::Zero(N, n);
            f.col(i) = -c.vertices.col(j);
            f.col(j) = c.vertices.col(i);
            fields.push_back(flatten(f));
        }
    return fields;
}

// Unit central-difference tangents at vertices.
inline VertexField vertex_tangents(const DiscreteCurve& c) {
    const int N = c.size();
    VertexField t(N, c.n);
    for (int k = 0; k < N; ++k) {
        Eigen::RowVectorXd d =
            c.vertices.row((k + 1) % N) - c.vertices.row((k + N - 1) % N);
        t.row(k) = d / d.norm();
    }
    return t;
}

} // namespace detail

// Spectrum of the Lagrangian Hessian restricted to the constraint tangent
// space with rigid motions deflated. The Hessian is assembled by central
// finite differences of the analytic Lagrangian gradient at the fitted
// multipliers; reparametrization-like (tangential) eigenmodes are flagged in
// the report but kept in the spectrum and the verdict.
inline SpectrumReport constrained_hessian_spectrum(const DiscreteCurve& c,
                                                   const ConstraintSet& cs,
                                                   const SpectrumConfig& config = {}) {
    const int N = c.size(), n = c.n, dim = N * n;

    const Eigen::VectorXd gf = flatten(length_gradient(c));
    const Mat j = cs.jacobian(c);
    double fit_residual = 0.0;
    const Vec lambda = detail::fit_multipliers(gf, j, fit_residual);
    if (fit_residual > 10.0 * config.tol_g)
        throw InputError("constrained_hessian_spectrum: curve is not first-order "
                         "stationary for the constraints (fit residual " +
                         std::to_string(fit_residual) + ")");

    const double mean_edge = length(c) / N;
    const double h = config.fd_step_factor * mean_edge;

    Mat hess(dim, dim);
    DiscreteCurve work = c;
    for (int a = 0; a < dim; ++a) {
        const int vk = a / n, vd = a % n;
        const double saved = work.vertices(vk, vd);
        work.vertices(vk, vd) = saved + h;
        const Eigen::VectorXd gp = detail::lagrangian_gradient(work, cs, lambda);
        work.vertices(vk, vd) = saved - h;
        const Eigen::VectorXd gm = detail::lagrangian_gradient(work, cs, lambda);
        work.vertices(vk, vd) = saved;
        hess.col(a) = (gp - gm) / (2.0 * h);
    }

    const double hnorm = hess.norm();
    const double asym = (hess - hess.transpose()).norm() / (hnorm > 0.0 ? hnorm : 1.0);
    if (asym > 1e-4)
        throw NumericalError("constrained_hessian_spectrum: FD Hessian asymmetry " +
                             std::to_string(asym) + " exceeds 1e-4");
    hess = 0.5 * (hess + hess.transpose()).eval();

    // Deflation basis: constraint rows + rigid motions.
    const auto rigid = detail::rigid_motion_fields(c);
    const int m = cs.rows();
    Mat basis(dim, m + static_cast<int>(rigid.size()));
    for (int i = 0; i < m; ++i) basis.col(i) = j.row(i).transpose();
    for (size_t i = 0; i < rigid.size(); ++i)
        basis.col(m + static_cast<int>(i)) = rigid[i];

    Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeThinU);
    const double rank_tol = 1e-10 * svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > rank_tol) ++rank;
    const Mat range = svd.matrixU().leftCols(rank);

    // Orthogonal complement via the full Q factor of the range basis.
    Eigen::HouseholderQR<Mat> qr(range);
    const Mat qfull = qr.householderQ() * Mat::Identity(dim, dim);
    const Mat comp = qfull.rightCols(dim - rank);

    const Mat projected = comp.transpose() * hess * comp;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (projected + projected.transpose()));
    if (es.info() != Eigen::Success)
        throw NumericalError("constrained_hessian_spectrum: eigensolver failed");

    SpectrumReport rep;
    rep.eigenvalues.assign(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    rep.min_eigenvalue = rep.eigenvalues.front();
    rep.fd_asymmetry = asym;
    rep.deflated_constraint_rows = m;
    rep.deflated_translations = n;
    rep.deflated_rotations = n * (n - 1) / 2;
    rep.deflation_rank = rank;

    const double spectral_radius =
        std::max(std::abs(rep.eigenvalues.front()), std::abs(rep.eigenvalues.back()));
    rep.marginal_band = config.marginal_factor * spectral_radius;
    if (std::abs(rep.min_eigenvalue) <= rep.marginal_band)
        rep.verdict = StabilityVerdict::marginal;
    else
        rep.verdict = rep.min_eigenvalue < 0.0 ? StabilityVerdict::unstable
                                               : StabilityVerdict::stable;

    // Flag reparametrization-like modes: vertex vectors near the local tangent
    // line on most vertices carrying significant weight.
    const VertexField tangents = detail::vertex_tangents(c);
    for (int idx = 0; idx < static_cast<int>(rep.eigenvalues.size()); ++idx) {
        const Eigen::VectorXd mode = comp * es.eigenvectors().col(idx);
        const VertexField field = unflatten(mode, N, n);
        const Vec norms = field.rowwise().norm();
        const double significant = 0.1 * norms.maxCoeff();
        int total = 0, aligned = 0;
        for (int k = 0; k < N; ++k) {
            if (norms(k) < significant) continue;
            ++total;
            const double cosang =
                std::abs(field.row(k).dot(tangents.row(k))) / norms(k);
            if (cosang >= config.tangent_cos) ++aligned;
        }
        if (total > 0 && aligned >= config.tangent_vertex_fraction * total) {
            rep.tangential_mode_indices.push_back(idx);
            ++rep.tangential_mode_count;
        }
    }
    return rep;
}

struct DirectionalSecondVariation {
    Vec dv_first_order;   // first-order constraint derivatives along v
    double d2_length = 0.0;
};

// First-order constraint rates along v plus the second derivative of length
// along the constraint-restored variation through c + t v (central second
// difference, step 1e-4, one Richardson extrapolation). Restoring the
// constraints is what allows a negative value: the unconstrained straight-line
// length is convex in t.
inline DirectionalSecondVariation directional_second_variation(const DiscreteCurve& c,
                                                               const VertexField& v,
                                                               const ConstraintSet& cs,
                                                               double tol_g = 1e-4) {
    if (v.rows() != c.size() || v.cols() != c.n)
        throw InputError("directional_second_variation: field shape mismatch");

    const Eigen::VectorXd gf = flatten(length_gradient(c));
    const Mat j = cs.jacobian(c);
    double fit_residual = 0.0;
    detail::fit_multipliers(gf, j, fit_residual);
    if (fit_residual > 10.0 * tol_g)
        throw InputError("directional_second_variation: curve is not first-order "
                         "stationary for the constraints");

    DirectionalSecondVariation out;
    out.dv_first_order = j * flatten(v);

    constexpr double kStep = 1e-4;
    constexpr double kProjectionTol = 1e-12;
    auto restored_length = [&](double t) {
        DiscreteCurve moved = c;
        moved.vertices += t * v;
        auto projected = detail::try_project(moved, cs, kProjectionTol, 80);
        if (!projected)
            throw NumericalError("directional_second_variation: constraint restoration "
                                 "failed at t = " + std::to_string(t));
        return length(*projected);
    };

    const double l0 = restored_length(0.0);
    const double d_h = (restored_length(kStep) - 2.0 * l0 + restored_length(-kStep)) /
                       (kStep * kStep);
    const double half = kStep / 2.0;
    const double d_h2 =
        (restored_length(half) - 2.0 * l0 + restored_length(-half)) / (half * half);
    out.d2_length = (4.0 * d_h2 - d_h) / 3.0;
    return out;
}

} // namespace isoperi
