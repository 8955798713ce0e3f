#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eps/experiment.hpp"

namespace {

std::string fmt_complex(eps::cplx z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8g%+.8gi", z.real(), z.imag());
    return buf;
}

void print_summary(const eps::ExperimentReport& report, const std::string& report_path) {
    for (const eps::GaugeRunResult& run : report.runs) {
        std::printf("gauge %-3s  ", eps::to_string(run.gauge).c_str());
        if (run.conductivity) {
            const eps::ConductivityResult& c = *run.conductivity;
            std::printf("sigma = %s  (theory %s, rel err %.3g)  ",
                        fmt_complex(c.sigma).c_str(), fmt_complex(c.sigma_theory).c_str(),
                        c.relative_error);
        } else {
            std::printf("diagnostics only  norm = %s  ",
                        fmt_complex(run.initial.norm).c_str());
        }
        std::printf("norm drift %.3g  [%s]\n", run.norm_drift,
                    run.sigma_ok && run.norm_ok ? "ok" : "FAIL");
        for (const std::string& w : run.warnings) std::printf("  warning: %s\n", w.c_str());
        if (run.conductivity)
            for (const std::string& w : run.conductivity->warnings)
                std::printf("  warning: %s\n", w.c_str());
    }
    if (report.cross_gauge) {
        const eps::CrossGaugeResult& c = *report.cross_gauge;
        std::printf("cross-gauge  delta_sigma_rel = %.3g  modulus residual = %.3g at t = %g  "
                    "[%s]\n",
                    c.delta_sigma_rel, c.modulus_residual, c.compare_time,
                    c.ok ? "ok" : "FAIL");
    }
    std::printf("report: %s\n", report_path.c_str());
    std::printf("checks: %s\n", report.ok ? "PASS" : "FAIL");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extended-phase-space conductivity experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "flat key = value config file")->required();
    run->add_option("--override", overrides,
                    "key=value setting applied after the file (repeatable)");
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");
    run->add_flag("--quiet", quiet, "suppress the summary; files and exit status only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        std::vector<std::string> merged = overrides;
        if (!out_dir.empty()) merged.push_back("output.dir=" + out_dir);
        const eps::ExperimentConfig config = eps::load_config(config_path, merged);
        const eps::ExperimentReport report = eps::run_experiment(config);
        const std::string report_path =
            (std::filesystem::path(config.output_dir) / "report.json").string();
        eps::emit_report(report, report_path);
        if (!quiet) print_summary(report, report_path);
        return report.ok ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
