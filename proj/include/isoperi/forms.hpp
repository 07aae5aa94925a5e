#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "isoperi/errors.hpp"

namespace isoperi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Ordered axis pair (i, j) with 0 <= i < j, indexing a coordinate 2-plane.
struct AxisPlane {
    int i = 0;
    int j = 1;

    AxisPlane() = default;
    AxisPlane(int i_, int j_) : i(i_), j(j_) {
        if (i < 0 || j <= i)
            throw InputError("AxisPlane requires 0 <= i < j, got (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
    }

    bool operator<(const AxisPlane& o) const {
        return i != o.i ? i < o.i : j < o.j;
    }
    bool operator==(const AxisPlane& o) const { return i == o.i && j == o.j; }

    std::string key() const { return std::to_string(i) + "," + std::to_string(j); }
};

inline std::vector<AxisPlane> all_planes(int n) {
    std::vector<AxisPlane> ps;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) ps.emplace_back(i, j);
    return ps;
}

// Constant-coefficient 2-form on R^n, stored sparsely by axis plane; absent
// planes carry coefficient zero.
struct ConstantTwoForm {
    int n = 0;
    std::map<AxisPlane, double> coeffs;

    ConstantTwoForm() = default;
    explicit ConstantTwoForm(int n_) : n(n_) {
        if (n < 2) throw InputError("ConstantTwoForm needs ambient dimension >= 2");
    }
    ConstantTwoForm(int n_, std::map<AxisPlane, double> c) : ConstantTwoForm(n_) {
        for (const auto& [p, v] : c) {
            if (p.j >= n)
                throw InputError("plane (" + p.key() + ") out of range for dimension " +
                                 std::to_string(n));
            if (!std::isfinite(v)) throw InputError("non-finite form coefficient");
        }
        coeffs = std::move(c);
    }

    double coeff(const AxisPlane& p) const {
        auto it = coeffs.find(p);
        return it == coeffs.end() ? 0.0 : it->second;
    }
    void set(const AxisPlane& p, double v) {
        if (p.j >= n) throw InputError("plane (" + p.key() + ") out of range");
        if (!std::isfinite(v)) throw InputError("non-finite form coefficient");
        coeffs[p] = v;
    }
};

// Skew-symmetric coefficient matrix A with A(i,j) = Omega_ij for i < j.
inline Mat skew_matrix(const ConstantTwoForm& omega) {
    Mat a = Mat::Zero(omega.n, omega.n);
    for (const auto& [p, v] : omega.coeffs) {
        a(p.i, p.j) = v;
        a(p.j, p.i) = -v;
    }
    return a;
}

// Evaluation of the form on a bivector: Omega(u ^ v) = u^T A v.
inline double apply_form(const ConstantTwoForm& omega, const Vec& u, const Vec& v) {
    if (u.size() != omega.n || v.size() != omega.n)
        throw InputError("apply_form: vector dimension mismatch");
    return u.dot(skew_matrix(omega) * v);
}

// Covector c with c(v) = Omega(T ^ v); componentwise c_k = Omega(T ^ e_k),
// i.e. c = A^T T for the skew coefficient matrix A.
inline Vec interior_product(const ConstantTwoForm& omega, const Vec& t) {
    if (t.size() != omega.n)
        throw InputError("interior_product: vector has dimension " +
                         std::to_string(t.size()) + ", form lives in R^" +
                         std::to_string(omega.n));
    return skew_matrix(omega).transpose() * t;
}

// Largest value of Omega(u ^ v) over orthonormal pairs = largest singular
// value of the skew coefficient matrix.
inline double comass(const ConstantTwoForm& omega) {
    if (omega.coeffs.empty()) return 0.0;
    Eigen::JacobiSVD<Mat> svd(skew_matrix(omega));
    return svd.singularValues()(0);
}

// Induced action of an ambient rotation R on 2-form coefficients: A' = R A R^T.
inline ConstantTwoForm rotate_form(const ConstantTwoForm& omega, const Mat& r) {
    if (r.rows() != omega.n || r.cols() != omega.n)
        throw InputError("rotate_form: rotation dimension mismatch");
    Mat a = r * skew_matrix(omega) * r.transpose();
    ConstantTwoForm out(omega.n);
    for (int i = 0; i < omega.n; ++i)
        for (int j = i + 1; j < omega.n; ++j)
            if (a(i, j) != 0.0) out.coeffs[AxisPlane(i, j)] = a(i, j);
    return out;
}

inline ConstantTwoForm scale_form(const ConstantTwoForm& omega, double s) {
    ConstantTwoForm out(omega.n);
    for (const auto& [p, v] : omega.coeffs) out.coeffs[p] = s * v;
    return out;
}

} // namespace isoperi
