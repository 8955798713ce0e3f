#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eps/experiment.hpp"
#include "json.hpp"

using namespace eps;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("eps_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int line_count(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

ObservableRecord sample_record(double t) {
    ObservableRecord rec;
    rec.t = t;
    rec.mean_p = {0.1 * t, -0.05};
    rec.mean_qdot = {1.0 / 3.0, 0.7 * t};
    rec.norm = {1.0, 1e-17};
    rec.sigma_instant = {0.5, -0.5};
    return rec;
}

// small, fast configuration exercising the full pipeline
ExperimentConfig tiny_config(const fs::path& out_dir) {
    ExperimentConfig c;
    c.grid = {-10.0, 10.0, -10.0, 10.0, 32, 32};
    c.drive.e0 = {1e-4, 0.0};
    c.propagator.dt = 1e-2;
    c.propagator.t_final = 0.5;
    c.propagator.record_every = 5;
    c.gauges = {GaugeTag::a_gauge};
    c.window_start = 0.2;
    c.output_dir = out_dir.string();
    return c;
}

int run_cli(const std::string& args) {
    const char* bin = std::getenv("EPSIM_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("key-value parsing") {
    const std::string text =
        "# comment\n"
        "\n"
        "medium.alpha = 2.0\n"
        "gauges = a,phi   # trailing comment\n";
    const auto entries = parse_key_values(text);
    CHECK(entries.at("medium.alpha") == "2.0");
    CHECK(entries.at("gauges") == "a,phi");
    CHECK(entries.size() == 2);

    CHECK_THROWS_AS(parse_key_values("medium.alpha = 1\nmedium.alpha = 2\n"),
                    std::invalid_argument);
    try {
        parse_key_values("medium.alpha = 1\nnot a pair\n");
        FAIL("expected malformed line to throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    auto merged = parse_key_values("medium.alpha = 1\n");
    apply_override(merged, "medium.alpha=3.5");
    apply_override(merged, "grid.n_q=64");
    CHECK(merged.at("medium.alpha") == "3.5");
    CHECK(merged.at("grid.n_q") == "64");
    CHECK_THROWS_AS(apply_override(merged, "no_equals_sign"), std::invalid_argument);
}

TEST_CASE("entries map onto the config with key-level diagnostics") {
    std::map<std::string, std::string> entries{
        {"medium.alpha", "2.0"},     {"medium.m", "0.5"},
        {"drive.omega", "1.5"},      {"drive.mode", "real_cosine"},
        {"drive.e0_re", "0.3"},      {"drive.e0_im", "-0.1"},
        {"grid.n_q", "64"},          {"grid.n_p", "32"},
        {"propagator.dt", "0.005"},  {"propagator.t_final", "8"},
        {"propagator.scheme", "strang"},
        {"gauges", "phi"},           {"window.start", "auto"},
        {"window.end", "7.5"},       {"tolerances.sigma_rel", "2e-3"},
        {"output.dir", "results"},   {"seed", "42"},
    };
    const ExperimentConfig c = config_from_entries(entries);
    CHECK(c.medium.alpha == 2.0);
    CHECK(c.medium.m == 0.5);
    CHECK(c.drive.mode == DriveMode::real_cosine);
    CHECK(c.drive.e0 == cplx{0.3, -0.1});
    CHECK(c.grid.n_q == 64);
    CHECK(c.grid.n_p == 32);
    CHECK(!c.scheme_auto);
    CHECK(c.propagator.scheme == Scheme::strang);
    REQUIRE(c.gauges.size() == 1);
    CHECK(c.gauges[0] == GaugeTag::phi_gauge);
    CHECK(c.window_start < 0.0);
    CHECK(c.window_end == 7.5);
    CHECK(c.window() == std::pair{2.5, 7.5});
    CHECK(c.tolerances.sigma_rel == 2e-3);
    CHECK(c.output_dir == "results");
    CHECK(c.seed == 42);
    CHECK(c.scheme_for(GaugeTag::phi_gauge) == Scheme::strang);

    try {
        config_from_entries({{"grid.bogus", "1"}});
        FAIL("expected unknown key to throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("unknown config key 'grid.bogus'") !=
              std::string::npos);
    }
    try {
        config_from_entries({{"grid.n_q", "many"}});
        FAIL("expected bad value to throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("grid.n_q") != std::string::npos);
    }
    CHECK_THROWS_AS(config_from_entries({{"gauges", "a,a"}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_entries({{"drive.mode", "square"}}), std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent setups") {
    ExperimentConfig c = tiny_config(fs::temp_directory_path());
    CHECK_NOTHROW(c.validate());
    CHECK(c.scheme_for(GaugeTag::a_gauge) == Scheme::exact_diagonal);
    CHECK(c.scheme_for(GaugeTag::phi_gauge) == Scheme::strang);

    ExperimentConfig bad = c;
    bad.gauges.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = c;
    bad.scheme_auto = false;
    bad.propagator.scheme = Scheme::exact_diagonal;
    bad.gauges = {GaugeTag::a_gauge, GaugeTag::phi_gauge};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = c;
    bad.window_start = 0.5;  // empty window [0.5, 0.5)
    try {
        bad.validate();
        FAIL("expected empty window to throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("averaging window") != std::string::npos);
    }

    bad = c;
    bad.window_end = 2.0 * c.propagator.t_final;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = c;
    bad.tolerances.norm_drift = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = c;
    bad.output_dir.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("config file loading with overrides") {
    const fs::path dir = scratch_dir("cfg");
    const fs::path cfg = dir / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "medium.alpha = 1.5\n"
            << "gauges = a\n"
            << "window.start = 3\n";
    }
    const ExperimentConfig c = load_config(cfg.string(), {"medium.alpha=2.5", "seed=7"});
    CHECK(c.medium.alpha == 2.5);
    CHECK(c.seed == 7);
    CHECK(c.window_start == 3.0);

    CHECK_THROWS_AS(load_config((dir / "absent.cfg").string()), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("csv contract") {
    const fs::path dir = scratch_dir("csv");

    const std::vector<ObservableRecord> one{sample_record(0.0)};
    const fs::path single = dir / "one.csv";
    emit_csv(one, single.string());
    const std::string text = read_file(single);
    CHECK(line_count(text) == 2);
    CHECK(text.rfind("t,re_mean_p,im_mean_p,re_mean_qdot,im_mean_qdot,re_norm,im_norm,"
                     "re_sigma,im_sigma\n", 0) == 0);
    CHECK(text.back() == '\n');
    CHECK(text.find("\n0,") != std::string::npos);  // t = 0 row
    CHECK(text.find(",1,") != std::string::npos);   // re_norm = 1

    std::vector<ObservableRecord> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(sample_record(0.1 * i));
    const fs::path multi = dir / "ten.csv";
    emit_csv(ten, multi.string());
    const std::string body = read_file(multi);
    CHECK(line_count(body) == 11);

    // parse-back: every numeric field round-trips bit-exactly
    std::istringstream lines(body);
    std::string line;
    std::getline(lines, line);  // header
    for (const ObservableRecord& rec : ten) {
        REQUIRE(std::getline(lines, line));
        const double expect[9] = {rec.t,
                                  rec.mean_p.real(),    rec.mean_p.imag(),
                                  rec.mean_qdot.real(), rec.mean_qdot.imag(),
                                  rec.norm.real(),      rec.norm.imag(),
                                  rec.sigma_instant.real(), rec.sigma_instant.imag()};
        const char* cursor = line.c_str();
        for (int f = 0; f < 9; ++f) {
            char* end = nullptr;
            const double got = std::strtod(cursor, &end);
            CHECK(got == expect[f]);
            cursor = (*end == ',') ? end + 1 : end;
        }
    }

    CHECK_THROWS_AS(emit_csv({}, (dir / "empty.csv").string()), std::invalid_argument);
    try {
        emit_csv(one, (dir / "no_such_dir" / "x.csv").string());
        FAIL("expected unwritable path to throw");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("no_such_dir") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("single-gauge run produces a full report") {
    const fs::path dir = scratch_dir("single");
    const ExperimentConfig config = tiny_config(dir);
    const ExperimentReport report = run_experiment(config);

    REQUIRE(report.runs.size() == 1);
    const GaugeRunResult& run = report.runs[0];
    CHECK(run.gauge == GaugeTag::a_gauge);
    CHECK(run.scheme == Scheme::exact_diagonal);
    CHECK(run.n_records == 11);
    REQUIRE(run.conductivity.has_value());
    CHECK(run.conductivity->relative_error < 1e-3);
    CHECK(run.sigma_ok);
    CHECK(run.norm_ok);
    CHECK(report.ok);
    CHECK(!report.cross_gauge.has_value());
    CHECK(fs::exists(run.csv_path));

    const auto j = nlohmann::json::parse(render_report(report, false));
    CHECK(j.at("schema_version") == 1);
    CHECK(j.at("config").at("grid").at("n_q") == 32);
    CHECK(j.at("config").at("propagator").at("scheme") == "auto");
    CHECK(j.at("config").at("window").at("start") == 0.2);
    CHECK(j.at("gauges").size() == 1);
    const auto& ga = j.at("gauges").at("a");
    CHECK(ga.at("scheme") == "exact_diagonal");
    CHECK(ga.at("records") == 11);
    CHECK(ga.at("conductivity").contains("sigma"));
    CHECK(ga.at("conductivity").contains("relative_error"));
    CHECK(ga.at("checks").at("sigma") == true);
    CHECK(!ga.contains("runtime_s"));
    CHECK(!j.contains("timing"));
    CHECK(j.at("checks_passed") == true);

    const auto timed = nlohmann::json::parse(render_report(report, true));
    CHECK(timed.at("timing").contains("total_s"));
    CHECK(timed.at("gauges").at("a").contains("runtime_s"));

    const fs::path out = dir / "report.json";
    emit_report(report, out.string());
    const auto round = nlohmann::json::parse(read_file(out));
    CHECK(round.at("schema_version") == 1);
    fs::remove_all(dir);
}

TEST_CASE("dual-gauge run compares gauges and is deterministic") {
    const fs::path dir = scratch_dir("dual");
    ExperimentConfig config = tiny_config(dir);
    // n_p = 64 keeps the packet's momentum spectrum inside the Nyquist band;
    // at 32 the clipped tail feeds ~1e-5 moment errors into the phi-gauge impulses
    config.grid = {-10.0, 10.0, -10.0, 10.0, 64, 64};
    config.gauges = {GaugeTag::a_gauge, GaugeTag::phi_gauge};
    config.propagator.t_final = 0.4;
    config.window_start = 0.15;

    const ExperimentReport first = run_experiment(config);
    REQUIRE(first.runs.size() == 2);
    REQUIRE(first.cross_gauge.has_value());
    CHECK(first.cross_gauge->delta_sigma_rel <= config.tolerances.cross_gauge_rel);
    CHECK(first.cross_gauge->modulus_residual <= config.tolerances.modulus_rel);
    CHECK(first.cross_gauge->compare_time == 0.4);  // min(1/alpha, t_final)
    CHECK(first.cross_gauge->ok);
    CHECK(first.ok);

    const auto j = nlohmann::json::parse(render_report(first, false));
    CHECK(j.at("gauges").size() == 2);
    CHECK(j.at("cross_gauge").contains("delta_sigma_rel"));

    const std::string csv_a = read_file(first.runs[0].csv_path);
    const std::string csv_phi = read_file(first.runs[1].csv_path);
    const std::string body = render_report(first, false);

    const ExperimentReport second = run_experiment(config);
    CHECK(read_file(second.runs[0].csv_path) == csv_a);
    CHECK(read_file(second.runs[1].csv_path) == csv_phi);
    CHECK(render_report(second, false) == body);
    fs::remove_all(dir);
}

TEST_CASE("diagnostics-only and zero-drive runs succeed without conductivity") {
    const fs::path dir = scratch_dir("diag");
    ExperimentConfig frozen = tiny_config(dir / "frozen");
    frozen.propagator.t_final = 0.0;
    frozen.gauges = {GaugeTag::a_gauge, GaugeTag::phi_gauge};
    const ExperimentReport rep0 = run_experiment(frozen);
    CHECK(rep0.ok);
    CHECK(!rep0.cross_gauge.has_value());
    for (const GaugeRunResult& run : rep0.runs) {
        CHECK(!run.conductivity.has_value());
        CHECK(run.n_records == 1);
        CHECK(run.sigma_ok);
    }
    const auto j0 = nlohmann::json::parse(render_report(rep0, false));
    CHECK(j0.at("gauges").at("a").at("conductivity").is_null());

    ExperimentConfig quiet = tiny_config(dir / "quiet");
    quiet.drive.e0 = {0.0, 0.0};
    quiet.propagator.t_final = 0.2;
    quiet.window_start = 0.05;
    const ExperimentReport rep1 = run_experiment(quiet);
    CHECK(rep1.ok);
    REQUIRE(rep1.runs.size() == 1);
    CHECK(!rep1.runs[0].conductivity.has_value());
    bool warned = false;
    for (const std::string& w : rep1.runs[0].warnings)
        warned = warned || w.find("drive amplitude is zero") != std::string::npos;
    CHECK(warned);
    fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
    if (!std::getenv("EPSIM_BIN")) return;  // library-only invocation

    const fs::path dir = scratch_dir("cli");
    const fs::path cfg = dir / "tiny.cfg";
    {
        std::ofstream out(cfg);
        out << "grid.n_q = 32\n"
            << "grid.n_p = 32\n"
            << "drive.e0_re = 1e-4\n"
            << "propagator.dt = 1e-2\n"
            << "propagator.t_final = 0.3\n"
            << "propagator.record_every = 5\n"
            << "gauges = a\n"
            << "window.start = 0.1\n"
            << "output.dir = " << (dir / "out").string() << "\n";
    }

    CHECK(run_cli("run " + cfg.string() + " --quiet") == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(fs::exists(dir / "out" / "trajectory_a.csv"));

    // stride 0.05 leaves no record inside (0.26, 0.29): the check must fail
    CHECK(run_cli("run " + cfg.string() + " --quiet --override window.start=0.26 "
                  "--override window.end=0.29") == 1);

    CHECK(run_cli("run " + (dir / "absent.cfg").string() + " --quiet") == 2);
    CHECK(run_cli("run " + cfg.string() + " --quiet --override bogus.key=1") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("--help") == 0);
    fs::remove_all(dir);
}
