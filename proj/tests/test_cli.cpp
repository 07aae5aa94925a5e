#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "isoperi/io.hpp"

using namespace isoperi;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("isoperi_cli_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run_cli(const std::string& args, const fs::path& stderr_file = {}) {
    std::string cmd = std::string(ISOPERI_BIN) + " " + args;
    if (!stderr_file.empty()) cmd += " 2>" + stderr_file.string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string scenario(const std::string& name) {
    return (fs::path(SCENARIO_DIR) / name).string();
}

size_t count_files(const fs::path& dir) {
    size_t n = 0;
    for (auto it = fs::directory_iterator(dir); it != fs::directory_iterator(); ++it) ++n;
    return n;
}

} // namespace

TEST_CASE("eval reports the invariants of the double loop") {
    TempDir tmp("eval");
    const int rc = run_cli("eval --scenario " + scenario("eval_double.json") + " --out " +
                           tmp.path.string());
    REQUIRE(rc == 0);
    const json rep = load_json_file((tmp.path / "eval_report.json").string());
    CHECK(rep.at("length").get<double>() ==
          Approx(2.0 * M_PI * std::sqrt(5.0)).epsilon(1e-3));
    CHECK(rep.at("multi_volume").at("values").at("0,1").get<double>() ==
          Approx(M_PI).margin(1e-12));
    CHECK(rep.at("multi_volume").at("values").at("2,3").get<double>() ==
          Approx(2.0 * M_PI).margin(1e-12));
    CHECK(rep.at("stationarity").at("residual").get<double>() <= 1e-10);
    CHECK(rep.at("omega_volume").get<double>() ==
          Approx(M_PI * std::sqrt(5.0)).epsilon(1e-3));
    CHECK(rep.at("comass").get<double>() == Approx(2.0 / std::sqrt(5.0)).margin(1e-12));
    const auto& bracket = rep.at("spanning_volume_bracket");
    CHECK(bracket.at("lower").get<double>() <= bracket.at("upper").get<double>());
}

TEST_CASE("minimize converges to the circle from a random star") {
    TempDir tmp("minimize");
    const int rc = run_cli("minimize --scenario " + scenario("minimize_circle.json") +
                           " --out " + tmp.path.string());
    REQUIRE(rc == 0);
    const json rep = load_json_file((tmp.path / "minimize_report.json").string());
    CHECK(rep.at("converged").get<bool>());
    CHECK(std::abs(rep.at("final_length").get<double>() - 2.0 * M_PI) / (2.0 * M_PI) <=
          0.01);
    CHECK(rep.at("constraint_violation").get<double>() <= 1e-8);
}

TEST_CASE("fixed-trial gradient policy holds the double loop under six plane constraints") {
    TempDir tmp("minimize_six");
    const int rc = run_cli("minimize --scenario " + scenario("minimize_double_six.json") +
                           " --out " + tmp.path.string());
    REQUIRE(rc == 0);
    const json rep = load_json_file((tmp.path / "minimize_six_report.json").string());
    // The double loop is a saddle: the fixed-trial policy keeps the curve on it
    // to high accuracy but its stationarity residual plateaus near 1e-3, so the
    // run exhausts the iteration budget instead of formally converging.
    CHECK_FALSE(rep.at("converged").get<bool>());
    CHECK(rep.at("iterations").get<int>() == 20000);
    CHECK(rep.at("constraint_violation").get<double>() <= 1e-8);
    CHECK(rep.at("relative_length_gradient_residual").get<double>() <= 1e-2);
    const double goal = 2.0 * M_PI * std::sqrt(5.0);
    CHECK(std::abs(rep.at("final_length").get<double>() - goal) / goal <= 1e-3);
}

TEST_CASE("spectrum certifies the circle as stable") {
    TempDir tmp("spectrum_circle");
    const int rc = run_cli("spectrum --scenario " + scenario("spectrum_circle.json") +
                           " --out " + tmp.path.string());
    REQUIRE(rc == 0);
    const json rep = load_json_file((tmp.path / "spectrum_circle_report.json").string());
    CHECK(rep.at("verdict").get<std::string>() == "stable");
    CHECK(rep.at("min_eigenvalue").get<double>() > 0.0);
}

TEST_CASE("reports are byte-identical across reruns with the same seed") {
    TempDir a("rerun_a"), b("rerun_b"), c("rerun_c");
    const std::string base =
        "minimize --scenario " + scenario("minimize_circle.json") + " --seed 7 --out ";
    REQUIRE(run_cli(base + a.path.string()) == 0);
    REQUIRE(run_cli(base + b.path.string()) == 0);
    CHECK(slurp(a.path / "minimize_report.json") == slurp(b.path / "minimize_report.json"));

    // a different seed perturbs the start and must be allowed to differ
    REQUIRE(run_cli("minimize --scenario " + scenario("minimize_circle.json") +
                    " --seed 8 --out " + c.path.string()) == 0);
    const json ra = load_json_file((a.path / "minimize_report.json").string());
    const json rc = load_json_file((c.path / "minimize_report.json").string());
    CHECK(ra.at("converged").get<bool>());
    CHECK(rc.at("converged").get<bool>());
}

TEST_CASE("missing scenario file exits 2 without partial outputs") {
    TempDir tmp("missing");
    const fs::path err = tmp.path / "stderr.txt";
    const int rc = run_cli("eval --scenario /nonexistent/sc.json --out " +
                           (tmp.path / "out").string(),
                           err);
    CHECK(rc == 2);
    const json msg = json::parse(slurp(err));
    CHECK(msg.at("error").at("type") == "input");
    CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("scenario referencing a missing input exits 2 without partial outputs") {
    TempDir tmp("badref");
    const fs::path sc = tmp.path / "sc.json";
    save_json_file(sc.string(),
                   json{{"command", "eval"}, {"curve", "nope.json"}, {"samples", 64}});
    const fs::path out = tmp.path / "out";
    fs::create_directories(out);
    const int rc = run_cli("eval --scenario " + sc.string() + " --out " + out.string());
    CHECK(rc == 2);
    CHECK(count_files(out) == 0);
}

TEST_CASE("declared command must match the invoked subcommand") {
    TempDir tmp("mismatch");
    const fs::path err = tmp.path / "stderr.txt";
    const int rc = run_cli("eval --scenario " + scenario("minimize_circle.json") +
                           " --out " + tmp.path.string(),
                           err);
    CHECK(rc == 2);
    CHECK(json::parse(slurp(err)).at("error").at("type") == "input");
}

TEST_CASE("unknown flags exit 2 with a JSON error") {
    TempDir tmp("flags");
    const fs::path err = tmp.path / "stderr.txt";
    const int rc = run_cli("eval --scenario x.json --frobnicate", err);
    CHECK(rc == 2);
    CHECK(json::parse(slurp(err)).contains("error"));
}

TEST_CASE("spectrum scenario labels the double loop unstable") {
    TempDir tmp("spectrum");
    const int rc = run_cli("spectrum --scenario " + scenario("spectrum_double_omega.json") +
                           " --out " + tmp.path.string());
    REQUIRE(rc == 0);
    const json rep = load_json_file((tmp.path / "spectrum_report.json").string());
    CHECK(rep.at("verdict") == "unstable");
    CHECK(rep.at("min_eigenvalue").get<double>() < 0.0);
}

TEST_CASE("calibrate scenarios verify and then refute the disc certificate") {
    TempDir tmp("calibrate");
    REQUIRE(run_cli("calibrate --scenario " + scenario("calibrate_disc.json") + " --out " +
                    tmp.path.string()) == 0);
    const json ok = load_json_file((tmp.path / "calibrate_report.json").string());
    CHECK(ok.at("valid").get<bool>());
    CHECK(ok.at("d_omega_constant").get<bool>());

    REQUIRE(run_cli("calibrate --scenario " + scenario("calibrate_disc_enlarged.json") +
                    " --out " + tmp.path.string()) == 0);
    const json bad = load_json_file((tmp.path / "calibrate_enlarged_report.json").string());
    CHECK_FALSE(bad.at("valid").get<bool>());
}

TEST_CASE("sweep writes the profile CSV with one row per target") {
    TempDir tmp("sweep");
    REQUIRE(run_cli("sweep --scenario " + scenario("sweep_circle.json") + " --out " +
                    tmp.path.string()) == 0);
    const std::string csv = slurp(tmp.path / "sweep_profile.csv");
    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "target_volume,length,converged,iterations,residual");
    int rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
    const json rep = load_json_file((tmp.path / "sweep_report.json").string());
    for (const auto& row : rep.at("rows")) {
        CHECK(row.at("converged").get<bool>());
        const double v = row.at("target_volume").get<double>();
        const double l = row.at("length").get<double>();
        CHECK(std::abs(l - 2.0 * std::sqrt(M_PI * v)) / (2.0 * std::sqrt(M_PI * v)) <= 0.01);
    }
}

TEST_CASE("sweep with no targets writes a header-only CSV and exits 0") {
    TempDir tmp("sweep_empty");
    REQUIRE(run_cli("sweep --scenario " + scenario("sweep_empty.json") + " --out " +
                    tmp.path.string()) == 0);
    CHECK(slurp(tmp.path / "sweep_profile.csv") ==
          "target_volume,length,converged,iterations,residual\n");
    const json rep = load_json_file((tmp.path / "sweep_report.json").string());
    CHECK(rep.at("rows").empty());
}
