// Independent reference implementations used to cross-check the library.
// Everything here recomputes quantities from first principles with different
// algorithms (finite differences, composite Simpson, Gram determinants,
// random sampling) so a shared bug between library and test is unlikely.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "isoperi/curves.hpp"
#include "isoperi/forms.hpp"
#include "isoperi/random.hpp"

namespace oracle {

using isoperi::AxisPlane;
using isoperi::ConstantTwoForm;
using isoperi::DiscreteCurve;
using isoperi::FourierCurve;
using isoperi::Mat;
using isoperi::Rng;
using isoperi::Vec;

// Central-difference gradient of a scalar function of a flat vector.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    Vec g(x.size());
    Vec xp = x;
    for (int k = 0; k < x.size(); ++k) {
        const double saved = xp(k);
        xp(k) = saved + h;
        const double fp = f(xp);
        xp(k) = saved - h;
        const double fm = f(xp);
        xp(k) = saved;
        g(k) = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Signed area of the projection of a Fourier loop onto an axis plane,
// computed by composite Simpson quadrature of (1/2)(x_i x_j' - x_j x_i')
// with trig terms evaluated directly from the coefficient list.
inline double simpson_projected_area(const FourierCurve& c, const AxisPlane& p,
                                     int intervals = 4096) {
    const auto integrand = [&](double s) {
        double xi = c.a0(p.i), xj = c.a0(p.j), di = 0.0, dj = 0.0;
        for (const auto& t : c.terms) {
            const double cs = t.a * std::cos(t.w * s);
            const double sn = t.a * std::sin(t.w * s);
            if (t.plane.i == p.i) xi += cs;
            if (t.plane.i == p.j) xj += cs;
            if (t.plane.j == p.i) xi += sn;
            if (t.plane.j == p.j) xj += sn;
            if (t.plane.i == p.i) di += -t.w * sn;
            if (t.plane.i == p.j) dj += -t.w * sn;
            if (t.plane.j == p.i) di += t.w * cs;
            if (t.plane.j == p.j) dj += t.w * cs;
        }
        return 0.5 * (xi * dj - xj * di);
    };
    const int m = intervals + (intervals % 2); // Simpson needs an even count
    const double h = 2.0 * M_PI / m;
    double sum = integrand(0.0) + integrand(2.0 * M_PI);
    for (int k = 1; k < m; ++k) sum += (k % 2 ? 4.0 : 2.0) * integrand(k * h);
    return sum * h / 3.0;
}

// Triangle area from the Gram determinant (works in any dimension).
inline double triangle_area_gram(const Vec& a, const Vec& b, const Vec& c) {
    const Vec u = b - a, v = c - a;
    const double g = u.squaredNorm() * v.squaredNorm() - u.dot(v) * u.dot(v);
    return 0.5 * std::sqrt(std::max(0.0, g));
}

// Total area of the triangle fan from an apex over the polygon's edges.
inline double cone_area_gram(const DiscreteCurve& c, const Vec& apex) {
    const int N = c.size();
    double total = 0.0;
    for (int k = 0; k < N; ++k)
        total += triangle_area_gram(apex, c.vertices.row(k).transpose(),
                                    c.vertices.row((k + 1) % N).transpose());
    return total;
}

// Largest |form(u, v)| over random orthonormal pairs. A lower bound on the
// comass that converges toward it as the sample count grows.
inline double sampled_comass(const ConstantTwoForm& omega, int pairs, Rng& rng) {
    const Mat a = skew_matrix(omega);
    double best = 0.0;
    for (int s = 0; s < pairs; ++s) {
        Vec u(omega.n), v(omega.n);
        for (int k = 0; k < omega.n; ++k) {
            u(k) = rng.normal();
            v(k) = rng.normal();
        }
        u.normalize();
        v -= v.dot(u) * u;
        const double nv = v.norm();
        if (nv < 1e-12) continue;
        v /= nv;
        best = std::max(best, std::abs(u.dot(a * v)));
    }
    return best;
}

// Polygon length by direct summation.
inline double polygon_length(const DiscreteCurve& c) {
    const int N = c.size();
    double total = 0.0;
    for (int k = 0; k < N; ++k)
        total += (c.vertices.row((k + 1) % N) - c.vertices.row(k)).norm();
    return total;
}

// Signed projected area of a polygon by the direct cross-product sum.
inline double polygon_projected_area(const DiscreteCurve& c, const AxisPlane& p) {
    const int N = c.size();
    double total = 0.0;
    for (int k = 0; k < N; ++k) {
        const int k1 = (k + 1) % N;
        total += c.vertices(k, p.i) * c.vertices(k1, p.j) -
                 c.vertices(k, p.j) * c.vertices(k1, p.i);
    }
    return 0.5 * total;
}

} // namespace oracle
