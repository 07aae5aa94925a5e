#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isoperi/isoperi.hpp"

namespace fs = std::filesystem;
using namespace isoperi;

namespace {

struct ScenarioContext {
    json scenario;
    fs::path scenario_dir;
    fs::path out_dir;
    unsigned long seed = 0;
};

fs::path resolve_input(const ScenarioContext& ctx, const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : ctx.scenario_dir / p;
}

fs::path resolve_output(const ScenarioContext& ctx, const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : ctx.out_dir / p;
}

// Loads the scenario's curve: either a discrete curve file ("curve") or a
// Fourier curve file ("fourier") sampled at "samples" vertices.
struct CurveInput {
    DiscreteCurve curve;
    std::optional<FourierCurve> fourier;
    int samples = 0;
};

CurveInput load_curve_input(const ScenarioContext& ctx) {
    const json& s = ctx.scenario;
    if (s.contains("curve") && s.contains("fourier"))
        throw InputError("scenario: give either 'curve' or 'fourier', not both");
    if (s.contains("curve")) {
        CurveInput in;
        in.curve = curve_from_json(
            load_json_file(resolve_input(ctx, s.at("curve").get<std::string>()).string()));
        return in;
    }
    if (s.contains("fourier")) {
        CurveInput in;
        in.fourier = fourier_from_json(
            load_json_file(resolve_input(ctx, s.at("fourier").get<std::string>()).string()));
        if (!s.contains("samples"))
            throw InputError("scenario: 'fourier' input needs 'samples'");
        in.samples = s.at("samples").get<int>();
        in.curve = sample_fourier(*in.fourier, in.samples);
        return in;
    }
    throw InputError("scenario: missing 'curve' or 'fourier' input");
}

// Constraint block with "current" targets resolved against the given curve.
ConstraintSet load_constraints(const ScenarioContext& ctx, const DiscreteCurve& c) {
    const json& s = ctx.scenario;
    if (!s.contains("constraints")) throw InputError("scenario: missing 'constraints'");
    json block = s.at("constraints");
    if (block.contains("multi")) {
        for (auto& e : block.at("multi")) {
            if (e.contains("target") && e.at("target").is_string()) {
                if (e.at("target").get<std::string>() != "current")
                    throw InputError("constraint target: expected a number or \"current\"");
                const Vec p = io_detail::to_vec(e.at("plane"), "constraint plane");
                e["target"] = shoelace(c, AxisPlane(static_cast<int>(p(0)),
                                                    static_cast<int>(p(1))));
            }
        }
    } else if (block.contains("omega")) {
        auto& o = block.at("omega");
        if (o.contains("form") && o.at("form").is_string())
            o["form"] = load_json_file(
                resolve_input(ctx, o.at("form").get<std::string>()).string());
        if (o.contains("target") && o.at("target").is_string()) {
            if (o.at("target").get<std::string>() != "current")
                throw InputError("constraint target: expected a number or \"current\"");
            o["target"] = omega_volume(c, form_from_json(o.at("form")));
        }
    }
    return constraints_from_json(block);
}

DiscreteCurve apply_start(const ScenarioContext& ctx, const DiscreteCurve& c, Rng& rng) {
    const json& s = ctx.scenario;
    if (!s.contains("start")) return c;
    const json& st = s.at("start");
    if (st.contains("star")) {
        const auto& sp = st.at("star");
        return star_perturb(c, sp.at("lo").get<double>(), sp.at("hi").get<double>(), rng);
    }
    if (st.contains("gaussian_sigma"))
        return gaussian_perturb(c, st.at("gaussian_sigma").get<double>(), rng);
    throw InputError("scenario start: expected 'star' or 'gaussian_sigma'");
}

std::string output_name(const ScenarioContext& ctx, const std::string& fallback) {
    if (ctx.scenario.contains("output"))
        return ctx.scenario.at("output").get<std::string>();
    return fallback;
}

// ---------- subcommands ----------

int run_eval(const ScenarioContext& ctx) {
    CurveInput in = load_curve_input(ctx);
    json report;
    report["length"] = length(in.curve);
    if (in.fourier)
        report["multi_volume"] = to_json(multi_volume(*in.fourier, in.samples));
    else
        report["multi_volume"] = to_json(multi_volume(in.curve));
    report["spanning_volume_bracket"] = to_json(spanning_volume_bracket(in.curve));
    const StationarityFit fit = stationarity_fit(in.curve);
    report["stationarity"] = json{{"form", to_json(fit.form)},
                                  {"residual", fit.residual},
                                  {"degenerate", fit.degenerate}};
    if (ctx.scenario.contains("form")) {
        const ConstantTwoForm omega = form_from_json(load_json_file(
            resolve_input(ctx, ctx.scenario.at("form").get<std::string>()).string()));
        report["omega_volume"] = omega_volume(in.curve, omega);
        report["comass"] = comass(omega);
    }
    if (ctx.scenario.contains("volume"))
        report["h_zero"] = h_zero(in.curve, ctx.scenario.at("volume").get<double>());
    save_json_file(resolve_output(ctx, output_name(ctx, "eval_report.json")).string(), report);
    return 0;
}

int run_minimize(const ScenarioContext& ctx) {
    CurveInput in = load_curve_input(ctx);
    Rng rng(ctx.seed);
    const ConstraintSet cs = load_constraints(ctx, in.curve);
    const DiscreteCurve start = apply_start(ctx, in.curve, rng);
    OptimizationConfig config;
    if (ctx.scenario.contains("config")) config = config_from_json(ctx.scenario.at("config"));
    config.seed = ctx.seed;

    const OptimizationReport rep = minimize_length(start, cs, config);

    const bool include_trace = !ctx.scenario.contains("trace") ||
                               ctx.scenario.at("trace").get<bool>();
    json report = to_json(rep, include_trace);
    report["config"] = to_json(config);
    report["constraints"] = to_json(cs);
    save_json_file(resolve_output(ctx, output_name(ctx, "minimize_report.json")).string(),
                   report);

    if (ctx.scenario.contains("trace_csv")) {
        std::ostringstream csv;
        csv << "iteration,length,violation\n";
        for (size_t i = 0; i < rep.trace.size(); ++i)
            csv << i << "," << json(rep.trace[i].first).dump() << ","
                << json(rep.trace[i].second).dump() << "\n";
        save_text_file(
            resolve_output(ctx, ctx.scenario.at("trace_csv").get<std::string>()).string(),
            csv.str());
    }
    return 0;
}

int run_spectrum(const ScenarioContext& ctx) {
    CurveInput in = load_curve_input(ctx);
    const ConstraintSet cs = load_constraints(ctx, in.curve);
    SpectrumConfig config;
    if (ctx.scenario.contains("tol_g")) config.tol_g = ctx.scenario.at("tol_g").get<double>();
    const SpectrumReport rep = constrained_hessian_spectrum(in.curve, cs, config);
    json report = to_json(rep);
    report["constraints"] = to_json(cs);
    report["n_vertices"] = in.curve.size();
    save_json_file(resolve_output(ctx, output_name(ctx, "spectrum_report.json")).string(),
                   report);
    return 0;
}

int run_calibrate(const ScenarioContext& ctx) {
    CurveInput in = load_curve_input(ctx);
    const json& s = ctx.scenario;
    if (!s.contains("one_form")) throw InputError("scenario: missing 'one_form'");
    json form_json = s.at("one_form");
    if (form_json.is_string())
        form_json = load_json_file(resolve_input(ctx, form_json.get<std::string>()).string());
    const PolynomialOneForm omega = one_form_from_json(form_json);
    if (!s.contains("region")) throw InputError("scenario: missing 'region'");
    const Region region = region_from_json(s.at("region"));
    const int samples =
        s.contains("samples_per_axis") ? s.at("samples_per_axis").get<int>() : 101;
    const double tol = s.contains("tol") ? s.at("tol").get<double>() : 1e-6;

    const Certificate cert = verify_certificate(omega, region, in.curve, samples, tol);
    const ExteriorDerivative d = exterior_derivative(omega);

    json report = to_json(cert);
    report["region"] = to_json(region);
    report["d_omega_constant"] = d.is_constant;
    if (d.is_constant) report["d_omega"] = to_json(d.constant_part);
    report["one_form_integral"] = one_form_integral(omega, in.curve);
    save_json_file(resolve_output(ctx, output_name(ctx, "calibrate_report.json")).string(),
                   report);
    return 0;
}

int run_sweep(const ScenarioContext& ctx) {
    CurveInput in = load_curve_input(ctx);
    const json& s = ctx.scenario;
    if (!s.contains("form")) throw InputError("sweep scenario: missing 'form'");
    json form_json = s.at("form");
    if (form_json.is_string())
        form_json = load_json_file(resolve_input(ctx, form_json.get<std::string>()).string());
    const ConstantTwoForm omega = form_from_json(form_json);
    if (!s.contains("targets")) throw InputError("sweep scenario: missing 'targets'");
    std::vector<double> targets;
    for (const auto& t : s.at("targets")) targets.push_back(t.get<double>());
    for (size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] > 0.0)) throw InputError("sweep targets must be positive");
        if (i > 0 && targets[i] < targets[i - 1])
            throw InputError("sweep targets must be sorted ascending");
    }
    const bool warm_start = !s.contains("warm_start") || s.at("warm_start").get<bool>();
    OptimizationConfig config;
    if (s.contains("config")) config = config_from_json(s.at("config"));
    config.seed = ctx.seed;

    auto scaled_to_target = [&](const DiscreteCurve& c, double target) {
        const double cur = omega_volume(c, omega);
        if (cur == 0.0 || (cur > 0.0) != (target > 0.0))
            throw NumericalError("sweep: cannot scale a curve of omega-volume " +
                                 std::to_string(cur) + " to target " +
                                 std::to_string(target));
        DiscreteCurve out = c;
        out.vertices *= std::sqrt(target / cur);
        return out;
    };

    json rows = json::array();
    std::ostringstream csv;
    csv << "target_volume,length,converged,iterations,residual\n";
    std::optional<DiscreteCurve> previous;
    for (double target : targets) {
        json row{{"target_volume", target}};
        try {
            const DiscreteCurve base = (warm_start && previous) ? *previous : in.curve;
            const DiscreteCurve start = scaled_to_target(base, target);
            const OptimizationReport rep =
                minimize_length(start, ConstraintSet::omega(omega, target), config);
            row["length"] = length(rep.final_curve);
            row["converged"] = rep.converged;
            row["iterations"] = rep.iterations;
            row["residual"] = rep.relative_length_gradient_residual;
            if (rep.converged) previous = rep.final_curve;
            csv << json(target).dump() << "," << json(row["length"]).dump() << ","
                << (rep.converged ? "true" : "false") << "," << rep.iterations << ","
                << json(row["residual"]).dump() << "\n";
        } catch (const NumericalError& e) {
            row["length"] = nullptr;
            row["converged"] = false;
            row["iterations"] = 0;
            row["residual"] = nullptr;
            row["error"] = e.what();
            previous.reset();
            csv << json(target).dump() << ",,false,0,\n";
        }
        rows.push_back(row);
    }

    json report{{"form", to_json(omega)}, {"warm_start", warm_start}, {"rows", rows}};
    save_json_file(resolve_output(ctx, output_name(ctx, "sweep_report.json")).string(),
                   report);
    const std::string csv_name =
        s.contains("csv") ? s.at("csv").get<std::string>() : "sweep_profile.csv";
    save_text_file(resolve_output(ctx, csv_name).string(), csv.str());
    return 0;
}

int dispatch(const std::string& command, const std::string& scenario_path,
             const std::string& out_dir, std::optional<unsigned long> seed_flag) {
    if (!fs::exists(scenario_path))
        throw InputError("scenario file does not exist: " + scenario_path);
    ScenarioContext ctx;
    ctx.scenario = load_json_file(scenario_path);
    ctx.scenario_dir = fs::path(scenario_path).parent_path();
    ctx.out_dir = out_dir.empty() ? fs::current_path() : fs::path(out_dir);

    if (ctx.scenario.contains("command")) {
        const std::string declared = ctx.scenario.at("command").get<std::string>();
        if (declared != command)
            throw InputError("scenario declares command '" + declared +
                             "' but was invoked as '" + command + "'");
    }
    ctx.seed = ctx.scenario.contains("seed")
                   ? ctx.scenario.at("seed").get<unsigned long>()
                   : 0;
    if (seed_flag) ctx.seed = *seed_flag;

    if (command == "eval") return run_eval(ctx);
    if (command == "minimize") return run_minimize(ctx);
    if (command == "spectrum") return run_spectrum(ctx);
    if (command == "calibrate") return run_calibrate(ctx);
    if (command == "sweep") return run_sweep(ctx);
    throw InputError("unknown command: " + command);
}

void print_error(const std::string& type, const std::string& message,
                 const std::vector<std::string>& planes = {}) {
    json err{{"error", {{"type", type}, {"message", message}}}};
    if (!planes.empty()) {
        json p = json::array();
        for (const auto& s : planes) p.push_back(s);
        err["error"]["planes"] = p;
    }
    std::cerr << err.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"isoperi: length minimization and volume functionals for closed curves"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    std::optional<unsigned long> seed_flag;

    for (const std::string name : {"eval", "minimize", "spectrum", "calibrate", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", out_dir, "output directory (default: current directory)");
        sub->add_option("--seed", seed_flag, "random seed (overrides the scenario's)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::ostringstream msg;
        msg << e.what();
        print_error("input", msg.str());
        return 2;
    }

    try {
        return dispatch(app.get_subcommands().front()->get_name(), scenario_path, out_dir,
                        seed_flag);
    } catch (const DegeneracyError& e) {
        print_error("degeneracy", e.what(), e.deficient_planes);
        return 3;
    } catch (const InputError& e) {
        print_error("input", e.what());
        return 2;
    } catch (const NumericalError& e) {
        print_error("numerical", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 3;
    }
}
