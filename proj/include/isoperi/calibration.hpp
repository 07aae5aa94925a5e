#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isoperi/curves.hpp"
#include "isoperi/errors.hpp"
#include "isoperi/forms.hpp"

namespace isoperi {

// Multivariate polynomial stored as exponent-vector -> coefficient.
struct Polynomial {
    int n = 0;
    std::map<std::vector<int>, double> monomials;

    Polynomial() = default;
    explicit Polynomial(int n_) : n(n_) {
        if (n < 1) throw InputError("Polynomial: dimension must be >= 1");
    }

    void add_monomial(const std::vector<int>& exponents, double coeff) {
        if (static_cast<int>(exponents.size()) != n)
            throw InputError("Polynomial: exponent vector length mismatch");
        for (int e : exponents)
            if (e < 0) throw InputError("Polynomial: negative exponent");
        if (!std::isfinite(coeff)) throw InputError("Polynomial: non-finite coefficient");
        if (coeff == 0.0) return;
        auto [it, inserted] = monomials.emplace(exponents, coeff);
        if (!inserted) {
            it->second += coeff;
            if (it->second == 0.0) monomials.erase(it);
        }
    }

    int degree() const {
        int d = -1; // degree of the zero polynomial, by convention below constants
        for (const auto& [e, c] : monomials)
            d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
        return d;
    }

    bool is_constant() const { return degree() <= 0; }

    double constant_value() const {
        if (!is_constant()) throw InputError("Polynomial: not constant");
        return monomials.empty() ? 0.0 : monomials.begin()->second;
    }

    double evaluate(const Vec& x) const {
        if (x.size() != n) throw InputError("Polynomial: evaluation point dimension mismatch");
        double v = 0.0;
        for (const auto& [e, c] : monomials) {
            double term = c;
            for (int d = 0; d < n; ++d)
                for (int p = 0; p < e[static_cast<size_t>(d)]; ++p) term *= x(d);
            v += term;
        }
        return v;
    }

    Polynomial derivative(int var) const {
        if (var < 0 || var >= n) throw InputError("Polynomial: derivative variable out of range");
        Polynomial out(n);
        for (const auto& [e, c] : monomials) {
            const int p = e[static_cast<size_t>(var)];
            if (p == 0) continue;
            std::vector<int> de = e;
            de[static_cast<size_t>(var)] = p - 1;
            out.add_monomial(de, c * p);
        }
        return out;
    }

    Polynomial operator-(const Polynomial& o) const {
        if (o.n != n) throw InputError("Polynomial: dimension mismatch");
        Polynomial out = *this;
        for (const auto& [e, c] : o.monomials) out.add_monomial(e, -c);
        return out;
    }
};

// 1-form with polynomial coefficients: omega = sum_i p_i(x) dx_i, total degree <= 4.
struct PolynomialOneForm {
    int n = 0;
    std::vector<Polynomial> components;

    PolynomialOneForm() = default;
    explicit PolynomialOneForm(int n_) : n(n_) {
        if (n < 2) throw InputError("PolynomialOneForm: dimension must be >= 2");
        components.assign(static_cast<size_t>(n), Polynomial(n));
    }

    void validate() const {
        if (static_cast<int>(components.size()) != n)
            throw InputError("PolynomialOneForm: component count mismatch");
        for (const auto& p : components) {
            if (p.n != n) throw InputError("PolynomialOneForm: component dimension mismatch");
            if (p.degree() > 4)
                throw InputError("PolynomialOneForm: degree exceeds the supported bound 4");
        }
    }

    // Covector at x.
    Vec evaluate(const Vec& x) const {
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = components[static_cast<size_t>(i)].evaluate(x);
        return v;
    }
};

struct ExteriorDerivative {
    int n = 0;
    std::map<AxisPlane, Polynomial> entries; // (d omega)_ij = d p_j / d x_i - d p_i / d x_j
    bool is_constant = false;
    ConstantTwoForm constant_part;           // populated when is_constant
};

inline ExteriorDerivative exterior_derivative(const PolynomialOneForm& omega) {
    omega.validate();
    ExteriorDerivative out;
    out.n = omega.n;
    out.is_constant = true;
    out.constant_part = ConstantTwoForm(omega.n);
    for (const auto& p : all_planes(omega.n)) {
        Polynomial entry = omega.components[static_cast<size_t>(p.j)].derivative(p.i) -
                           omega.components[static_cast<size_t>(p.i)].derivative(p.j);
        if (!entry.is_constant()) out.is_constant = false;
        out.entries[p] = std::move(entry);
    }
    if (out.is_constant)
        for (const auto& [p, poly] : out.entries) {
            const double v = poly.constant_value();
            if (v != 0.0) out.constant_part.coeffs[p] = v;
        }
    else
        out.constant_part = ConstantTwoForm(omega.n);
    return out;
}

// Axis-aligned box, optionally intersected with a ball (grid sampling rejects
// points outside the ball).
struct Region {
    Vec lo, hi;
    std::optional<std::pair<Vec, double>> ball; // (center, radius)

    Region() = default;
    Region(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) { validate(); }

    int dim() const { return static_cast<int>(lo.size()); }

    void validate() const {
        if (lo.size() != hi.size() || lo.size() == 0)
            throw InputError("Region: box bounds dimension mismatch");
        for (int d = 0; d < lo.size(); ++d)
            if (!(lo(d) < hi(d))) throw InputError("Region: box must have positive extent");
        if (ball) {
            if (ball->first.size() != lo.size())
                throw InputError("Region: ball center dimension mismatch");
            if (!(ball->second > 0.0)) throw InputError("Region: ball radius must be positive");
        }
    }

    bool contains(const Vec& x, double slack = 1e-9) const {
        if (x.size() != lo.size()) return false;
        for (int d = 0; d < lo.size(); ++d)
            if (x(d) < lo(d) - slack || x(d) > hi(d) + slack) return false;
        if (ball && (x - ball->first).norm() > ball->second + slack) return false;
        return true;
    }
};

struct Certificate {
    double comass_margin = 0.0;   // 1 - max sampled |omega| over the region
    double tangency_defect = 0.0; // max |1 - omega(T)| over curve tangent samples
    bool valid = false;
    int grid_samples_per_axis = 0;
    long grid_points_evaluated = 0;
    double tol = 0.0;
    // Honesty label: the verification is sampled, not a proof.
    std::string statement =
        "sampled certificate: bounds checked on a finite grid and at curve samples";
};

// Checks the two calibration inequalities by sampling: |omega| <= 1 on a grid
// over the region (plus the curve vertices), and omega(T) = 1 along the curve,
// with T the unit central-difference tangent at each vertex. A valid
// certificate supports (at sampling resolution) that the curve minimizes
// length among region-contained curves of equal omega-volume.
inline Certificate verify_certificate(const PolynomialOneForm& omega, const Region& region,
                                      const DiscreteCurve& c, int samples_per_axis = 101,
                                      double tol = 1e-6) {
    omega.validate();
    region.validate();
    if (omega.n != c.n || region.dim() != c.n)
        throw InputError("verify_certificate: dimension mismatch");
    if (samples_per_axis < 2)
        throw InputError("verify_certificate: need at least 2 samples per axis");
    double total = 1.0;
    for (int d = 0; d < c.n; ++d) total *= samples_per_axis;
    if (total > 1e7)
        throw InputError("verify_certificate: grid too large; reduce samples per axis");

    const int N = c.size();
    for (int k = 0; k < N; ++k)
        if (!region.contains(c.vertices.row(k).transpose()))
            throw InputError("verify_certificate: curve leaves the region at vertex " +
                             std::to_string(k));

    Certificate cert;
    cert.grid_samples_per_axis = samples_per_axis;
    cert.tol = tol;

    double max_norm = 0.0;
    Vec x(c.n);
    std::vector<int> idx(static_cast<size_t>(c.n), 0);
    const long npts = static_cast<long>(total);
    for (long flat = 0; flat < npts; ++flat) {
        long rem = flat;
        for (int d = 0; d < c.n; ++d) {
            idx[static_cast<size_t>(d)] = static_cast<int>(rem % samples_per_axis);
            rem /= samples_per_axis;
        }
        for (int d = 0; d < c.n; ++d)
            x(d) = region.lo(d) + (region.hi(d) - region.lo(d)) *
                                      idx[static_cast<size_t>(d)] / (samples_per_axis - 1);
        if (region.ball && (x - region.ball->first).norm() > region.ball->second) continue;
        ++cert.grid_points_evaluated;
        max_norm = std::max(max_norm, omega.evaluate(x).norm());
    }
    for (int k = 0; k < N; ++k)
        max_norm = std::max(max_norm, omega.evaluate(c.vertices.row(k).transpose()).norm());
    cert.comass_margin = 1.0 - max_norm;

    double defect = 0.0;
    for (int k = 0; k < N; ++k) {
        Vec t = (c.vertices.row((k + 1) % N) - c.vertices.row((k + N - 1) % N)).transpose();
        t /= t.norm();
        const Vec w = omega.evaluate(c.vertices.row(k).transpose());
        defect = std::max(defect, std::abs(1.0 - w.dot(t)));
    }
    cert.tangency_defect = defect;

    cert.valid = cert.comass_margin >= -tol && cert.tangency_defect <= tol;
    return cert;
}

// Midpoint-rule line integral of a polynomial 1-form over a closed polygon.
// For the canonical primitives (scaled shoelace integrands) this reproduces
// the projected signed areas exactly.
inline double one_form_integral(const PolynomialOneForm& omega, const DiscreteCurve& c) {
    omega.validate();
    if (omega.n != c.n) throw InputError("one_form_integral: dimension mismatch");
    const int N = c.size();
    double total = 0.0;
    for (int k = 0; k < N; ++k) {
        const int k1 = (k + 1) % N;
        const Vec mid = 0.5 * (c.vertices.row(k) + c.vertices.row(k1)).transpose();
        const Vec edge = (c.vertices.row(k1) - c.vertices.row(k)).transpose();
        total += omega.evaluate(mid).dot(edge);
    }
    return total;
}

} // namespace isoperi
