#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isoperi/errors.hpp"
#include "isoperi/forms.hpp"

namespace isoperi {

// Closed polygon in R^n: row k of `vertices` is vertex x_k; vertex N-1
// connects back to vertex 0.
struct DiscreteCurve {
    int n = 0;
    Mat vertices; // N x n

    DiscreteCurve() = default;
    DiscreteCurve(int n_, Mat verts) : n(n_), vertices(std::move(verts)) {
        validate();
    }

    int size() const { return static_cast<int>(vertices.rows()); }

    void validate() const {
        if (n < 2) throw InputError("DiscreteCurve: ambient dimension must be >= 2");
        if (vertices.cols() != n)
            throw InputError("DiscreteCurve: vertex width " +
                             std::to_string(vertices.cols()) +
                             " does not match dimension " + std::to_string(n));
        const int N = size();
        if (N < 3) throw InputError("DiscreteCurve: need at least 3 vertices");
        if (!vertices.allFinite()) throw InputError("DiscreteCurve: non-finite coordinate");
        for (int k = 0; k < N; ++k) {
            const int k1 = (k + 1) % N;
            if ((vertices.row(k1) - vertices.row(k)).norm() == 0.0)
                throw InputError("DiscreteCurve: zero-length edge at vertex " +
                                 std::to_string(k));
        }
    }
};

// Per-vertex vector field on a DiscreteCurve (variations, gradients).
using VertexField = Mat; // N x n

// Trigonometric closed curve: a0 + sum_j a_j (cos(w_j s) e_p + sin(w_j s) e_q),
// frequencies strictly increasing, planes disjoint, amplitudes positive.
struct FourierCurve {
    struct Term {
        int w = 1;        // positive integer frequency
        double a = 1.0;   // positive amplitude
        AxisPlane plane;  // ordered axis pair carrying the rotation
    };

    int n = 0;
    Vec a0;
    std::vector<Term> terms;

    FourierCurve() = default;
    FourierCurve(int n_, Vec a0_, std::vector<Term> terms_)
        : n(n_), a0(std::move(a0_)), terms(std::move(terms_)) {
        validate();
    }

    void validate() const {
        if (n < 2) throw InputError("FourierCurve: dimension must be >= 2");
        if (a0.size() != n) throw InputError("FourierCurve: a0 dimension mismatch");
        if (!a0.allFinite()) throw InputError("FourierCurve: non-finite a0");
        if (terms.empty()) throw InputError("FourierCurve: needs at least one term");
        std::vector<bool> used(static_cast<size_t>(n), false);
        int prev_w = 0;
        for (const auto& t : terms) {
            if (t.w <= prev_w)
                throw InputError("FourierCurve: frequencies must be strictly increasing");
            prev_w = t.w;
            if (!(t.a > 0.0) || !std::isfinite(t.a))
                throw InputError("FourierCurve: amplitudes must be positive");
            if (t.plane.j >= n)
                throw InputError("FourierCurve: term plane (" + t.plane.key() +
                                 ") out of range");
            if (used[static_cast<size_t>(t.plane.i)] || used[static_cast<size_t>(t.plane.j)])
                throw InputError("FourierCurve: term planes must be disjoint axis pairs");
            used[static_cast<size_t>(t.plane.i)] = used[static_cast<size_t>(t.plane.j)] = true;
        }
    }

    int max_frequency() const {
        int m = 0;
        for (const auto& t : terms) m = std::max(m, t.w);
        return m;
    }

    Vec position(double s) const {
        Vec x = a0;
        for (const auto& t : terms) {
            x(t.plane.i) += t.a * std::cos(t.w * s);
            x(t.plane.j) += t.a * std::sin(t.w * s);
        }
        return x;
    }

    Vec derivative(double s) const {
        Vec x = Vec::Zero(n);
        for (const auto& t : terms) {
            x(t.plane.i) -= t.a * t.w * std::sin(t.w * s);
            x(t.plane.j) += t.a * t.w * std::cos(t.w * s);
        }
        return x;
    }

    Vec second_derivative(double s) const {
        Vec x = Vec::Zero(n);
        for (const auto& t : terms) {
            x(t.plane.i) -= t.a * t.w * t.w * std::cos(t.w * s);
            x(t.plane.j) -= t.a * t.w * t.w * std::sin(t.w * s);
        }
        return x;
    }
};

// Samples C(2*pi*k/N), k = 0..N-1. Requires N >= 3 and N >= 4*max_frequency
// (resolution floor below which the polygon misrepresents the curve).
inline DiscreteCurve sample_fourier(const FourierCurve& c, int N) {
    c.validate();
    if (N < 3 || N < 4 * c.max_frequency())
        throw InputError("sample_fourier: " + std::to_string(N) +
                         " vertices undersample max frequency " +
                         std::to_string(c.max_frequency()) +
                         " (need N >= 4*max_frequency and N >= 3)");
    Mat verts(N, c.n);
    for (int k = 0; k < N; ++k)
        verts.row(k) = c.position(2.0 * std::numbers::pi * k / N).transpose();
    return DiscreteCurve(c.n, std::move(verts));
}

// Unit direction of edge k (from vertex k to vertex k+1), one per edge.
inline std::vector<Vec> edge_tangents(const DiscreteCurve& c) {
    const int N = c.size();
    std::vector<Vec> t;
    t.reserve(static_cast<size_t>(N));
    for (int k = 0; k < N; ++k) {
        Vec e = (c.vertices.row((k + 1) % N) - c.vertices.row(k)).transpose();
        t.push_back(e / e.norm());
    }
    return t;
}

// Curvature vector kappa(s): normal component of C''(s) divided by |C'(s)|^2.
// For this curve family C'' is already orthogonal to C', so the projection is
// a roundoff-level correction.
inline Vec analytic_curvature(const FourierCurve& c, double s) {
    c.validate();
    const Vec d1 = c.derivative(s);
    const Vec d2 = c.second_derivative(s);
    const double speed2 = d1.squaredNorm();
    const Vec normal = d2 - (d2.dot(d1) / speed2) * d1;
    return normal / speed2;
}

} // namespace isoperi
