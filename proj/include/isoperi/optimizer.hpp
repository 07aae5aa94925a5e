#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "isoperi/curves.hpp"
#include "isoperi/errors.hpp"
#include "isoperi/forms.hpp"
#include "isoperi/functionals.hpp"

namespace isoperi {

// Either a list of prescribed axis-plane areas or a single prescribed
// omega-volume for a constant 2-form.
struct ConstraintSet {
    struct Multi {
        std::vector<std::pair<AxisPlane, double>> targets;
    };
    struct Omega {
        ConstantTwoForm form;
        double target = 0.0;
    };

    std::variant<Multi, Omega> kind;

    static ConstraintSet multi(std::vector<std::pair<AxisPlane, double>> targets) {
        if (targets.empty())
            throw InputError("ConstraintSet: at least one constraint required");
        std::set<AxisPlane> seen;
        for (const auto& [p, t] : targets) {
            if (!std::isfinite(t)) throw InputError("ConstraintSet: non-finite target");
            if (!seen.insert(p).second)
                throw InputError("ConstraintSet: duplicate plane (" + p.key() + ")");
        }
        ConstraintSet cs;
        cs.kind = Multi{std::move(targets)};
        return cs;
    }

    static ConstraintSet omega(ConstantTwoForm form, double target) {
        if (!std::isfinite(target)) throw InputError("ConstraintSet: non-finite target");
        if (form.coeffs.empty())
            throw InputError("ConstraintSet: omega constraint needs a nonzero form");
        ConstraintSet cs;
        cs.kind = Omega{std::move(form), target};
        return cs;
    }

    int rows() const {
        if (const auto* m = std::get_if<Multi>(&kind))
            return static_cast<int>(m->targets.size());
        return 1;
    }

    // Human-readable identity of each constraint row, used in error reports.
    std::vector<std::string> row_labels() const {
        std::vector<std::string> out;
        if (const auto* m = std::get_if<Multi>(&kind)) {
            for (const auto& [p, t] : m->targets) out.push_back(p.key());
        } else {
            const auto& om = std::get<Omega>(kind);
            std::string label = "omega:";
            for (const auto& [p, v] : om.form.coeffs) label += " " + p.key();
            out.push_back(label);
        }
        return out;
    }

    Vec evaluate(const DiscreteCurve& c) const {
        Vec r(rows());
        if (const auto* m = std::get_if<Multi>(&kind)) {
            for (size_t i = 0; i < m->targets.size(); ++i)
                r(static_cast<int>(i)) =
                    shoelace(c, m->targets[i].first) - m->targets[i].second;
        } else {
            const auto& om = std::get<Omega>(kind);
            r(0) = omega_volume(c, om.form) - om.target;
        }
        return r;
    }

    // Rows are flattened vertex-gradient fields of each constraint functional.
    Mat jacobian(const DiscreteCurve& c) const {
        Mat j(rows(), c.size() * c.n);
        if (const auto* m = std::get_if<Multi>(&kind)) {
            for (size_t i = 0; i < m->targets.size(); ++i)
                j.row(static_cast<int>(i)) =
                    flatten(multi_volume_jacobian(c, m->targets[i].first)).transpose();
        } else {
            const auto& om = std::get<Omega>(kind);
            VertexField f = VertexField::Zero(c.size(), c.n);
            for (const auto& [p, coeff] : om.form.coeffs)
                f += coeff * multi_volume_jacobian(c, p);
            j.row(0) = flatten(f).transpose();
        }
        return j;
    }

    // Lagrange multiplier coefficients assembled into a constant 2-form. For
    // multi constraints `lambda` has one entry per plane; for an omega
    // constraint it is the scalar multiplying the constraint form.
    ConstantTwoForm multipliers_as_form(const Vec& lambda, int n) const {
        ConstantTwoForm out(n);
        if (const auto* m = std::get_if<Multi>(&kind)) {
            for (size_t i = 0; i < m->targets.size(); ++i)
                out.coeffs[m->targets[i].first] = lambda(static_cast<int>(i));
        } else {
            const auto& om = std::get<Omega>(kind);
            for (const auto& [p, v] : om.form.coeffs) out.coeffs[p] = lambda(0) * v;
        }
        return out;
    }
};

namespace detail {

// Throws DegeneracyError naming the implicated constraint rows when the
// Jacobian loses row rank.
inline void check_row_rank(const Mat& j, const ConstraintSet& cs) {
    const int m = static_cast<int>(j.rows());
    const auto labels = cs.row_labels();
    std::vector<std::string> zero_rows;
    double max_row_norm = 0.0;
    for (int i = 0; i < m; ++i) max_row_norm = std::max(max_row_norm, j.row(i).norm());
    for (int i = 0; i < m; ++i)
        if (j.row(i).norm() <= 1e-12 * std::max(1.0, max_row_norm))
            zero_rows.push_back(labels[static_cast<size_t>(i)]);
    if (!zero_rows.empty())
        throw DegeneracyError("constraint Jacobian has vanishing rows", zero_rows);

    const Mat jjt = j * j.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(jjt);
    const Vec ev = es.eigenvalues();
    if (ev(0) <= 1e-20 * ev(m - 1)) {
        // Rows form a dependent set; implicate those with weight in the kernel.
        const Vec null_vec = es.eigenvectors().col(0);
        std::vector<std::string> dep;
        for (int i = 0; i < m; ++i)
            if (std::abs(null_vec(i)) > 0.1 * null_vec.cwiseAbs().maxCoeff())
                dep.push_back(labels[static_cast<size_t>(i)]);
        throw DegeneracyError("constraint Jacobian rows are linearly dependent", dep);
    }
}

// Newton iteration on the constraint equations, moving only along the
// Jacobian row space. Returns nullopt on non-convergence within max_newton.
inline std::optional<DiscreteCurve> try_project(const DiscreteCurve& c,
                                                const ConstraintSet& cs, double tol,
                                                int max_newton = 50) {
    DiscreteCurve cur = c;
    for (int it = 0; it < max_newton; ++it) {
        const Vec g = cs.evaluate(cur);
        if (g.cwiseAbs().maxCoeff() <= tol) return cur;
        const Mat j = cs.jacobian(cur);
        check_row_rank(j, cs);
        const Mat jjt = j * j.transpose();
        const Vec dl = jjt.ldlt().solve(-g);
        const Eigen::VectorXd step = j.transpose() * dl;
        cur.vertices += unflatten(step, cur.size(), cur.n);
    }
    return std::nullopt;
}

} // namespace detail

// Restores the constraint manifold from a nearby curve. Throws
// DegeneracyError on rank-deficient Jacobians and NumericalError if Newton
// fails to reach tolerance in 50 iterations.
inline DiscreteCurve project_to_constraints(const DiscreteCurve& c,
                                            const ConstraintSet& cs, double tol) {
    if (!(tol > 0.0)) throw InputError("project_to_constraints: tolerance must be positive");
    auto out = detail::try_project(c, cs, tol);
    if (!out)
        throw NumericalError("project_to_constraints: Newton iteration did not reach "
                             "tolerance in 50 steps");
    return *out;
}

enum class StepPolicy { lbfgs, gradient };

struct OptimizationConfig {
    double tol_c = 1e-8;       // max constraint violation at convergence
    double tol_g = 1e-4;       // relative projected-gradient norm at convergence
    int max_iter = 20000;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    double initial_step = 0.0; // 0 -> 1/N (scale-aware default)
    StepPolicy step_policy = StepPolicy::lbfgs;
    int lbfgs_memory = 10;
    unsigned long seed = 0;    // consumed by callers that generate random starts
};

struct OptimizationReport {
    DiscreteCurve final_curve;
    ConstantTwoForm multipliers;
    double constraint_violation = 0.0;
    double relative_length_gradient_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<double, double>> trace; // (length, violation) per iteration
};

// Length descent on the constraint manifold: direction restricted to the
// kernel of the constraint Jacobian, Armijo backtracking on the Newton
// re-projected candidate, multipliers recovered from the final least-squares
// solve. step_policy::lbfgs accelerates the same loop with a limited-memory
// inverse-curvature model (the direction is still tangent to the manifold);
// step_policy::gradient takes the raw projected gradient with a fixed trial
// step of initial_step.
inline OptimizationReport minimize_length(const DiscreteCurve& c0, const ConstraintSet& cs,
                                          const OptimizationConfig& config = {}) {
    if (!(config.tol_c > 0.0) || !(config.tol_g > 0.0))
        throw InputError("minimize_length: tolerances must be positive");
    if (config.max_iter < 0) throw InputError("minimize_length: max_iter must be >= 0");

    DiscreteCurve x = project_to_constraints(c0, cs, config.tol_c);
    const int N = x.size();
    const int dim = N * x.n;
    const double a0 = config.initial_step > 0.0 ? config.initial_step : 1.0 / N;

    OptimizationReport rep;
    rep.trace.reserve(static_cast<size_t>(config.max_iter) + 1);

    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs; // (s, y)
    Eigen::VectorXd x_prev, g_prev;
    bool have_prev = false;

    Vec lambda = Vec::Zero(cs.rows());
    double kkt = 0.0, viol = 0.0;

    auto eval_state = [&](const DiscreteCurve& cur, Eigen::VectorXd& gf,
                          Eigen::VectorXd& g, Mat& j) {
        gf = flatten(length_gradient(cur));
        j = cs.jacobian(cur);
        const Mat jjt = j * j.transpose();
        lambda = jjt.ldlt().solve(j * gf);
        g = gf - j.transpose() * lambda;
        kkt = g.norm() / gf.norm();
        viol = cs.evaluate(cur).cwiseAbs().maxCoeff();
    };

    int it = 0;
    for (; it < config.max_iter; ++it) {
        Eigen::VectorXd gf, g;
        Mat j;
        eval_state(x, gf, g, j);
        const double cur_len = length(x);
        rep.trace.emplace_back(cur_len, viol);
        if (kkt <= config.tol_g && viol <= config.tol_c) {
            rep.converged = true;
            break;
        }

        if (config.step_policy == StepPolicy::lbfgs && have_prev) {
            const Eigen::VectorXd s = flatten(x.vertices) - x_prev;
            const Eigen::VectorXd y = g - g_prev;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                pairs.emplace_back(s, y);
                while (static_cast<int>(pairs.size()) > config.lbfgs_memory)
                    pairs.pop_front();
            }
        }
        x_prev = flatten(x.vertices);
        g_prev = g;
        have_prev = true;

        Eigen::VectorXd d(dim);
        double slope = 0.0, alpha0 = 1.0;
        auto steepest = [&]() {
            if (config.step_policy == StepPolicy::lbfgs) {
                d = -(a0 / g.norm()) * g;
                alpha0 = 1.0;
            } else {
                d = -g;
                alpha0 = a0;
            }
            slope = gf.dot(d);
        };

        if (config.step_policy == StepPolicy::lbfgs && !pairs.empty()) {
            // Two-loop recursion for the inverse-curvature model.
            Eigen::VectorXd q = g;
            std::vector<double> alpha_mem(pairs.size());
            for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
                const auto& [s, y] = pairs[static_cast<size_t>(i)];
                const double rho = 1.0 / s.dot(y);
                alpha_mem[static_cast<size_t>(i)] = rho * s.dot(q);
                q -= alpha_mem[static_cast<size_t>(i)] * y;
            }
            const auto& [s_last, y_last] = pairs.back();
            q *= s_last.dot(y_last) / y_last.squaredNorm();
            for (size_t i = 0; i < pairs.size(); ++i) {
                const auto& [s, y] = pairs[i];
                const double rho = 1.0 / s.dot(y);
                const double beta = rho * y.dot(q);
                q += (alpha_mem[i] - beta) * s;
            }
            // Restrict the model direction to the constraint tangent space.
            const Mat jjt = j * j.transpose();
            q -= j.transpose() * jjt.ldlt().solve(j * q);
            d = -q;
            slope = gf.dot(d);
            if (slope >= -1e-14 * gf.norm() * d.norm()) {
                pairs.clear();
                steepest();
            }
        } else {
            steepest();
        }

        const Eigen::VectorXd x_flat = flatten(x.vertices);
        double alpha = alpha0;
        bool accepted = false;
        DiscreteCurve cand;
        for (int bt = 0; bt < 40; ++bt) {
            DiscreteCurve trial = x;
            trial.vertices = unflatten(x_flat + alpha * d, N, x.n);
            auto projected = detail::try_project(trial, cs, config.tol_c);
            if (projected && std::isfinite(length(*projected)) &&
                length(*projected) <= cur_len + config.armijo_c * alpha * slope) {
                cand = std::move(*projected);
                accepted = true;
                break;
            }
            alpha *= config.backtrack;
        }
        if (!accepted) {
            if (config.step_policy == StepPolicy::lbfgs && !pairs.empty()) {
                pairs.clear();
                continue;
            }
            break; // stalled; final state below decides the converged flag
        }
        x = std::move(cand);
    }

    {
        Eigen::VectorXd gf, g;
        Mat j;
        eval_state(x, gf, g, j);
        if (static_cast<int>(rep.trace.size()) == it)
            rep.trace.emplace_back(length(x), viol);
        rep.converged = kkt <= config.tol_g && viol <= config.tol_c;
    }

    rep.final_curve = x;
    rep.multipliers = cs.multipliers_as_form(lambda, x.n);
    rep.constraint_violation = viol;
    rep.relative_length_gradient_residual = kkt;
    rep.iterations = it;
    return rep;
}

} // namespace isoperi
