#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isoperi/calibration.hpp"
#include "isoperi/curves.hpp"
#include "isoperi/errors.hpp"
#include "isoperi/forms.hpp"
#include "isoperi/functionals.hpp"
#include "isoperi/optimizer.hpp"
#include "isoperi/stability.hpp"

namespace isoperi {

using json = nlohmann::json;

// ---------- generic helpers ----------

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
}

// Atomic write: dump to a sibling temp file, then rename, so failed runs never
// leave partial outputs.
inline void save_json_file(const std::string& path, const json& j) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw InputError("cannot write file: " + tmp.string());
        out << j.dump(2) << "\n";
        if (!out) throw InputError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline void save_text_file(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw InputError("cannot write file: " + tmp.string());
        out << text;
        if (!out) throw InputError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace io_detail {

template <typename T>
T require(const json& j, const std::string& key, const std::string& what) {
    if (!j.contains(key)) throw InputError(what + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(what + ": bad value for '" + key + "': " + e.what());
    }
}

inline Vec to_vec(const json& j, const std::string& what) {
    if (!j.is_array()) throw InputError(what + ": expected an array");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError(what + ": expected numbers");
        v(static_cast<int>(i)) = j[i].get<double>();
    }
    return v;
}

inline json from_vec(const Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

} // namespace io_detail

// ---------- curves ----------

inline json to_json(const DiscreteCurve& c) {
    json verts = json::array();
    for (int k = 0; k < c.size(); ++k)
        verts.push_back(io_detail::from_vec(c.vertices.row(k).transpose()));
    return json{{"n", c.n}, {"vertices", verts}};
}

inline DiscreteCurve curve_from_json(const json& j) {
    const int n = io_detail::require<int>(j, "n", "curve");
    if (!j.contains("vertices") || !j.at("vertices").is_array())
        throw InputError("curve: missing 'vertices' array");
    const auto& verts = j.at("vertices");
    Mat m(verts.size(), n);
    for (size_t k = 0; k < verts.size(); ++k) {
        const Vec row = io_detail::to_vec(verts[k], "curve vertex");
        if (row.size() != n) throw InputError("curve: vertex dimension mismatch");
        m.row(static_cast<int>(k)) = row.transpose();
    }
    return DiscreteCurve(n, std::move(m));
}

inline json to_json(const FourierCurve& c) {
    json terms = json::array();
    for (const auto& t : c.terms)
        terms.push_back(json{{"w", t.w}, {"a", t.a}, {"plane", {t.plane.i, t.plane.j}}});
    return json{{"n", c.n}, {"a0", io_detail::from_vec(c.a0)}, {"terms", terms}};
}

inline FourierCurve fourier_from_json(const json& j) {
    const int n = io_detail::require<int>(j, "n", "fourier curve");
    Vec a0 = Vec::Zero(n);
    if (j.contains("a0")) a0 = io_detail::to_vec(j.at("a0"), "fourier curve a0");
    if (!j.contains("terms") || !j.at("terms").is_array())
        throw InputError("fourier curve: missing 'terms' array");
    std::vector<FourierCurve::Term> terms;
    for (const auto& tj : j.at("terms")) {
        FourierCurve::Term t;
        t.w = io_detail::require<int>(tj, "w", "fourier term");
        t.a = io_detail::require<double>(tj, "a", "fourier term");
        const Vec p = io_detail::to_vec(tj.at("plane"), "fourier term plane");
        if (p.size() != 2) throw InputError("fourier term: plane must have two axes");
        t.plane = AxisPlane(static_cast<int>(p(0)), static_cast<int>(p(1)));
        terms.push_back(t);
    }
    return FourierCurve(n, std::move(a0), std::move(terms));
}

// ---------- forms ----------

inline json to_json(const ConstantTwoForm& f) {
    json entries = json::array();
    for (const auto& [p, v] : f.coeffs)
        entries.push_back(json{{"i", p.i}, {"j", p.j}, {"coeff", v}});
    return json{{"n", f.n}, {"entries", entries}};
}

inline ConstantTwoForm form_from_json(const json& j) {
    const int n = io_detail::require<int>(j, "n", "form");
    ConstantTwoForm f(n);
    if (j.contains("entries")) {
        if (!j.at("entries").is_array()) throw InputError("form: 'entries' must be an array");
        for (const auto& e : j.at("entries")) {
            const int i = io_detail::require<int>(e, "i", "form entry");
            const int jj = io_detail::require<int>(e, "j", "form entry");
            const double v = io_detail::require<double>(e, "coeff", "form entry");
            f.set(AxisPlane(i, jj), v);
        }
    }
    return f;
}

// ---------- functionals ----------

inline json to_json(const MultiVolume& mv) {
    json values = json::object();
    for (const auto& [p, v] : mv.values) values[p.key()] = v;
    return json{{"n", mv.n}, {"values", values}};
}

inline json to_json(const VolumeBracket& b) {
    return json{{"lower", b.lower}, {"upper", b.upper}};
}

// ---------- calibration ----------

inline json to_json(const PolynomialOneForm& f) {
    json monomials = json::array();
    for (int i = 0; i < f.n; ++i)
        for (const auto& [e, c] : f.components[static_cast<size_t>(i)].monomials) {
            json ej = json::array();
            for (int x : e) ej.push_back(x);
            monomials.push_back(json{{"component", i}, {"exponents", ej}, {"coeff", c}});
        }
    return json{{"n", f.n}, {"monomials", monomials}};
}

inline PolynomialOneForm one_form_from_json(const json& j) {
    const int n = io_detail::require<int>(j, "n", "polynomial 1-form");
    PolynomialOneForm f(n);
    if (!j.contains("monomials") || !j.at("monomials").is_array())
        throw InputError("polynomial 1-form: missing 'monomials' array");
    for (const auto& m : j.at("monomials")) {
        const int comp = io_detail::require<int>(m, "component", "monomial");
        if (comp < 0 || comp >= n) throw InputError("monomial: component out of range");
        const Vec ev = io_detail::to_vec(m.at("exponents"), "monomial exponents");
        if (ev.size() != n) throw InputError("monomial: exponents length mismatch");
        std::vector<int> e(static_cast<size_t>(n));
        for (int d = 0; d < n; ++d) e[static_cast<size_t>(d)] = static_cast<int>(ev(d));
        f.components[static_cast<size_t>(comp)].add_monomial(
            e, io_detail::require<double>(m, "coeff", "monomial"));
    }
    f.validate();
    return f;
}

inline json to_json(const Region& r) {
    json j{{"box", {{"lo", io_detail::from_vec(r.lo)}, {"hi", io_detail::from_vec(r.hi)}}}};
    if (r.ball)
        j["ball"] = {{"center", io_detail::from_vec(r.ball->first)},
                     {"radius", r.ball->second}};
    return j;
}

inline Region region_from_json(const json& j) {
    if (!j.contains("box")) throw InputError("region: missing 'box'");
    const auto& box = j.at("box");
    Region r(io_detail::to_vec(box.at("lo"), "region box lo"),
             io_detail::to_vec(box.at("hi"), "region box hi"));
    if (j.contains("ball")) {
        const auto& ball = j.at("ball");
        r.ball = {io_detail::to_vec(ball.at("center"), "region ball center"),
                  io_detail::require<double>(ball, "radius", "region ball")};
        r.validate();
    }
    return r;
}

inline json to_json(const Certificate& cert) {
    return json{{"comass_margin", cert.comass_margin},
                {"tangency_defect", cert.tangency_defect},
                {"valid", cert.valid},
                {"grid_samples_per_axis", cert.grid_samples_per_axis},
                {"grid_points_evaluated", cert.grid_points_evaluated},
                {"tol", cert.tol},
                {"statement", cert.statement}};
}

// ---------- optimizer ----------

inline json to_json(const OptimizationConfig& c) {
    return json{{"tol_c", c.tol_c},
                {"tol_g", c.tol_g},
                {"max_iter", c.max_iter},
                {"armijo_c", c.armijo_c},
                {"backtrack", c.backtrack},
                {"initial_step", c.initial_step},
                {"step_policy", c.step_policy == StepPolicy::lbfgs ? "lbfgs" : "gradient"},
                {"lbfgs_memory", c.lbfgs_memory},
                {"seed", c.seed}};
}

inline OptimizationConfig config_from_json(const json& j) {
    OptimizationConfig c;
    if (j.contains("tol_c")) c.tol_c = j.at("tol_c").get<double>();
    if (j.contains("tol_g")) c.tol_g = j.at("tol_g").get<double>();
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
    if (j.contains("armijo_c")) c.armijo_c = j.at("armijo_c").get<double>();
    if (j.contains("backtrack")) c.backtrack = j.at("backtrack").get<double>();
    if (j.contains("initial_step")) c.initial_step = j.at("initial_step").get<double>();
    if (j.contains("lbfgs_memory")) c.lbfgs_memory = j.at("lbfgs_memory").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<unsigned long>();
    if (j.contains("step_policy")) {
        const std::string p = j.at("step_policy").get<std::string>();
        if (p == "lbfgs")
            c.step_policy = StepPolicy::lbfgs;
        else if (p == "gradient")
            c.step_policy = StepPolicy::gradient;
        else
            throw InputError("config: unknown step_policy '" + p + "'");
    }
    return c;
}

// Constraint block: {"multi": [{"plane": [i,j], "target": t}, ...]} or
// {"omega": {"form": {...}, "target": t}}.
inline ConstraintSet constraints_from_json(const json& j) {
    if (j.contains("multi")) {
        std::vector<std::pair<AxisPlane, double>> targets;
        for (const auto& e : j.at("multi")) {
            const Vec p = io_detail::to_vec(e.at("plane"), "constraint plane");
            if (p.size() != 2) throw InputError("constraint plane must have two axes");
            targets.emplace_back(AxisPlane(static_cast<int>(p(0)), static_cast<int>(p(1))),
                                 io_detail::require<double>(e, "target", "constraint"));
        }
        return ConstraintSet::multi(std::move(targets));
    }
    if (j.contains("omega")) {
        const auto& o = j.at("omega");
        return ConstraintSet::omega(form_from_json(o.at("form")),
                                    io_detail::require<double>(o, "target", "omega constraint"));
    }
    throw InputError("constraints: expected 'multi' or 'omega'");
}

inline json to_json(const ConstraintSet& cs) {
    if (const auto* m = std::get_if<ConstraintSet::Multi>(&cs.kind)) {
        json arr = json::array();
        for (const auto& [p, t] : m->targets)
            arr.push_back(json{{"plane", {p.i, p.j}}, {"target", t}});
        return json{{"multi", arr}};
    }
    const auto& om = std::get<ConstraintSet::Omega>(cs.kind);
    return json{{"omega", {{"form", to_json(om.form)}, {"target", om.target}}}};
}

inline json to_json(const OptimizationReport& r, bool include_trace = true) {
    json j{{"final_curve", to_json(r.final_curve)},
           {"multipliers", to_json(r.multipliers)},
           {"constraint_violation", r.constraint_violation},
           {"relative_length_gradient_residual", r.relative_length_gradient_residual},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"final_length", length(r.final_curve)}};
    if (include_trace) {
        json t = json::array();
        for (const auto& [len, viol] : r.trace) t.push_back(json::array({len, viol}));
        j["trace"] = t;
    }
    return j;
}

// ---------- stability ----------

inline json to_json(const SpectrumReport& r) {
    json eig = json::array();
    for (double v : r.eigenvalues) eig.push_back(v);
    json tang = json::array();
    for (int i : r.tangential_mode_indices) tang.push_back(i);
    return json{{"eigenvalues", eig},
                {"min_eigenvalue", r.min_eigenvalue},
                {"verdict", to_string(r.verdict)},
                {"marginal_band", r.marginal_band},
                {"deflated_mode_counts",
                 {{"constraint_rows", r.deflated_constraint_rows},
                  {"translations", r.deflated_translations},
                  {"rotations", r.deflated_rotations},
                  {"rank", r.deflation_rank}}},
                {"tangential_mode_count", r.tangential_mode_count},
                {"tangential_mode_indices", tang},
                {"fd_asymmetry", r.fd_asymmetry}};
}

} // namespace isoperi
