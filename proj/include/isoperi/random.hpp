#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "isoperi/curves.hpp"
#include "isoperi/errors.hpp"

namespace isoperi {

// Deterministic random source: fixed engine plus explicit variate transforms,
// so identical seeds give identical streams on every standard library.
class Rng {
public:
    explicit Rng(unsigned long seed) : engine_(seed) {}

    double uniform() { // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { // Box-Muller, one variate per call
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Star polygon in R^2: vertex k at angle 2*pi*k/N with radius drawn uniformly
// from [radius_lo, radius_hi].
inline DiscreteCurve star_polygon(int n_vertices, double radius_lo, double radius_hi,
                                  Rng& rng) {
    if (n_vertices < 3) throw InputError("star_polygon: need at least 3 vertices");
    if (!(0.0 < radius_lo && radius_lo <= radius_hi))
        throw InputError("star_polygon: need 0 < radius_lo <= radius_hi");
    Mat verts(n_vertices, 2);
    for (int k = 0; k < n_vertices; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / n_vertices;
        const double r = rng.uniform(radius_lo, radius_hi);
        verts(k, 0) = r * std::cos(theta);
        verts(k, 1) = r * std::sin(theta);
    }
    return DiscreteCurve(2, std::move(verts));
}

// Radial rescaling of an existing planar curve to random radii in
// [radius_lo, radius_hi] about its vertex centroid.
inline DiscreteCurve star_perturb(const DiscreteCurve& c, double radius_lo, double radius_hi,
                                  Rng& rng) {
    if (c.n != 2) throw InputError("star_perturb: only defined for planar curves");
    const Eigen::RowVectorXd center = c.vertices.colwise().mean();
    Mat verts = c.vertices;
    for (int k = 0; k < c.size(); ++k) {
        Eigen::RowVectorXd d = c.vertices.row(k) - center;
        const double norm = d.norm();
        if (norm == 0.0) throw InputError("star_perturb: vertex at centroid");
        verts.row(k) = center + d / norm * rng.uniform(radius_lo, radius_hi);
    }
    return DiscreteCurve(2, std::move(verts));
}

inline DiscreteCurve gaussian_perturb(const DiscreteCurve& c, double sigma, Rng& rng) {
    if (!(sigma >= 0.0)) throw InputError("gaussian_perturb: sigma must be >= 0");
    Mat verts = c.vertices;
    for (int k = 0; k < c.size(); ++k)
        for (int d = 0; d < c.n; ++d) verts(k, d) += sigma * rng.normal();
    return DiscreteCurve(c.n, std::move(verts));
}

// Haar-ish random rotation: QR of a Gaussian matrix with the determinant
// fixed to +1.
inline Mat random_rotation(int n, Rng& rng) {
    if (n < 2) throw InputError("random_rotation: dimension must be >= 2");
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i)
        if (r(i, i) < 0.0) q.col(i) *= -1.0;
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

} // namespace isoperi
