#include "eps/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace eps {

void ToleranceSpec::validate() const {
    if (!(sigma_rel > 0.0)) throw std::invalid_argument("tolerances.sigma_rel must be > 0");
    if (!(cross_gauge_rel > 0.0))
        throw std::invalid_argument("tolerances.cross_gauge_rel must be > 0");
    if (!(modulus_rel > 0.0)) throw std::invalid_argument("tolerances.modulus_rel must be > 0");
    if (!(norm_drift > 0.0)) throw std::invalid_argument("tolerances.norm_drift must be > 0");
}

std::pair<double, double> ExperimentConfig::window() const {
    double w0 = window_start;
    double w1 = window_end;
    if (w0 < 0.0) w0 = medium.alpha > 0.0 ? 5.0 / medium.alpha : 0.0;
    if (w1 < 0.0) w1 = propagator.t_final;
    return {w0, w1};
}

Scheme ExperimentConfig::scheme_for(GaugeTag gauge) const {
    if (!scheme_auto) return propagator.scheme;
    return gauge == GaugeTag::a_gauge ? Scheme::exact_diagonal : Scheme::strang;
}

void ExperimentConfig::validate() const {
    constants.validate();
    medium.validate();
    drive.validate();
    grid.validate();
    packet.validate();
    propagator.validate();
    tolerances.validate();
    if (gauges.empty())
        throw std::invalid_argument("gauges: select at least one of {a, phi}");
    for (size_t i = 0; i < gauges.size(); ++i)
        for (size_t j = i + 1; j < gauges.size(); ++j)
            if (gauges[i] == gauges[j])
                throw std::invalid_argument("gauges: gauge '" + to_string(gauges[i]) +
                                            "' listed twice");
    if (!scheme_auto && propagator.scheme == Scheme::exact_diagonal)
        for (GaugeTag g : gauges)
            if (g == GaugeTag::phi_gauge)
                throw std::invalid_argument(
                    "propagator.scheme: exact_diagonal cannot step gauge phi; use auto or "
                    "strang");
    if (output_dir.empty()) throw std::invalid_argument("output.dir must be nonempty");
    if (propagator.t_final > 0.0) {
        const auto [w0, w1] = window();
        if (!(w0 >= 0.0)) throw std::invalid_argument("window.start must be >= 0");
        if (w1 > propagator.t_final)
            throw std::invalid_argument("window.end must not exceed propagator.t_final");
        if (!(w0 < w1)) {
            std::ostringstream msg;
            msg << "averaging window [" << w0 << ", " << w1
                << ") is empty; raise propagator.t_final or adjust window.start";
            throw std::invalid_argument(msg.str());
        }
    }
}

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key '" + key + "': expected a real number, got '" + s +
                                "'");
}

long parse_integer(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + s +
                                "'");
}

int parse_int(const std::string& key, const std::string& s) {
    const long v = parse_integer(key, s);
    if (v < INT_MIN || v > INT_MAX)
        throw std::invalid_argument("config key '" + key + "': value out of range");
    return static_cast<int>(v);
}

// "auto" or a nonnegative time.
double parse_window_edge(const std::string& key, const std::string& s) {
    if (s == "auto") return -1.0;
    const double v = parse_real(key, s);
    if (!(v >= 0.0))
        throw std::invalid_argument("config key '" + key + "': expected 'auto' or a time >= 0");
    return v;
}

std::vector<GaugeTag> parse_gauges(const std::string& key, const std::string& s) {
    std::vector<GaugeTag> out;
    std::istringstream in(s);
    std::string token;
    while (std::getline(in, token, ',')) {
        token = trim(token);
        GaugeTag g;
        if (token == "a")
            g = GaugeTag::a_gauge;
        else if (token == "phi")
            g = GaugeTag::phi_gauge;
        else
            throw std::invalid_argument("config key '" + key +
                                        "': expected a comma-separated subset of {a, phi}, got '" +
                                        token + "'");
        if (std::find(out.begin(), out.end(), g) != out.end())
            throw std::invalid_argument("config key '" + key + "': gauge '" + token +
                                        "' listed twice");
        out.push_back(g);
    }
    if (out.empty())
        throw std::invalid_argument("config key '" + key + "': select at least one of {a, phi}");
    return out;
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::exact_diagonal: return "exact_diagonal";
        case Scheme::strang: return "strang";
        case Scheme::generic_series: return "generic_series";
    }
    return "?";
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "config line " << lineno << ": expected key = value, got '" << line << "'";
            throw std::invalid_argument(msg.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream msg;
            msg << "config line " << lineno << ": empty key";
            throw std::invalid_argument(msg.str());
        }
        if (!out.emplace(key, value).second)
            throw std::invalid_argument("duplicate config key '" + key + "'");
    }
    return out;
}

void apply_override(std::map<std::string, std::string>& entries, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must be key=value, got '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty())
        throw std::invalid_argument("override must be key=value, got '" + assignment + "'");
    entries[key] = trim(assignment.substr(eq + 1));
}

ExperimentConfig config_from_entries(const std::map<std::string, std::string>& entries) {
    ExperimentConfig c;
    for (const auto& [key, value] : entries) {
        if (key == "medium.m")
            c.medium.m = parse_real(key, value);
        else if (key == "medium.e_charge")
            c.medium.e_charge = parse_real(key, value);
        else if (key == "medium.alpha")
            c.medium.alpha = parse_real(key, value);
        else if (key == "medium.n_particles")
            c.medium.n_particles = parse_int(key, value);
        else if (key == "drive.e0_re")
            c.drive.e0 = cplx{parse_real(key, value), c.drive.e0.imag()};
        else if (key == "drive.e0_im")
            c.drive.e0 = cplx{c.drive.e0.real(), parse_real(key, value)};
        else if (key == "drive.omega")
            c.drive.omega = parse_real(key, value);
        else if (key == "drive.mode") {
            if (value == "phasor")
                c.drive.mode = DriveMode::phasor;
            else if (value == "real_cosine")
                c.drive.mode = DriveMode::real_cosine;
            else
                throw std::invalid_argument(
                    "config key 'drive.mode': expected phasor or real_cosine, got '" + value +
                    "'");
        } else if (key == "constants.hbar")
            c.constants.hbar = parse_real(key, value);
        else if (key == "constants.c")
            c.constants.c = parse_real(key, value);
        else if (key == "grid.q_min")
            c.grid.q_min = parse_real(key, value);
        else if (key == "grid.q_max")
            c.grid.q_max = parse_real(key, value);
        else if (key == "grid.p_min")
            c.grid.p_min = parse_real(key, value);
        else if (key == "grid.p_max")
            c.grid.p_max = parse_real(key, value);
        else if (key == "grid.n_q")
            c.grid.n_q = parse_int(key, value);
        else if (key == "grid.n_p")
            c.grid.n_p = parse_int(key, value);
        else if (key == "packet.q0")
            c.packet.q0 = parse_real(key, value);
        else if (key == "packet.p0")
            c.packet.p0 = parse_real(key, value);
        else if (key == "packet.s_q")
            c.packet.s_q = parse_real(key, value);
        else if (key == "packet.s_p")
            c.packet.s_p = parse_real(key, value);
        else if (key == "propagator.dt")
            c.propagator.dt = parse_real(key, value);
        else if (key == "propagator.t_final")
            c.propagator.t_final = parse_real(key, value);
        else if (key == "propagator.record_every")
            c.propagator.record_every = parse_int(key, value);
        else if (key == "propagator.scheme") {
            if (value == "auto") {
                c.scheme_auto = true;
            } else if (value == "exact_diagonal") {
                c.scheme_auto = false;
                c.propagator.scheme = Scheme::exact_diagonal;
            } else if (value == "strang") {
                c.scheme_auto = false;
                c.propagator.scheme = Scheme::strang;
            } else if (value == "generic_series") {
                c.scheme_auto = false;
                c.propagator.scheme = Scheme::generic_series;
            } else {
                throw std::invalid_argument(
                    "config key 'propagator.scheme': expected auto, exact_diagonal, strang or "
                    "generic_series, got '" +
                    value + "'");
            }
        } else if (key == "gauges")
            c.gauges = parse_gauges(key, value);
        else if (key == "window.start")
            c.window_start = parse_window_edge(key, value);
        else if (key == "window.end")
            c.window_end = parse_window_edge(key, value);
        else if (key == "tolerances.sigma_rel")
            c.tolerances.sigma_rel = parse_real(key, value);
        else if (key == "tolerances.cross_gauge_rel")
            c.tolerances.cross_gauge_rel = parse_real(key, value);
        else if (key == "tolerances.modulus_rel")
            c.tolerances.modulus_rel = parse_real(key, value);
        else if (key == "tolerances.norm_drift")
            c.tolerances.norm_drift = parse_real(key, value);
        else if (key == "output.dir")
            c.output_dir = value;
        else if (key == "seed")
            c.seed = parse_integer(key, value);
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    std::map<std::string, std::string> entries = parse_key_values(text.str());
    for (const std::string& assignment : overrides) apply_override(entries, assignment);
    return config_from_entries(entries);
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

const GaugeRunResult* find_run(const std::vector<GaugeRunResult>& runs, GaugeTag gauge) {
    for (const GaugeRunResult& r : runs)
        if (r.gauge == gauge) return &r;
    return nullptr;
}

}  // namespace

void emit_csv(const std::vector<ObservableRecord>& trajectory, const std::string& path) {
    if (trajectory.empty()) throw std::invalid_argument("emit_csv: trajectory is empty");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "t,re_mean_p,im_mean_p,re_mean_qdot,im_mean_qdot,re_norm,im_norm,re_sigma,im_sigma\n";
    for (const ObservableRecord& r : trajectory) {
        out << format_double(r.t) << ',' << format_double(r.mean_p.real()) << ','
            << format_double(r.mean_p.imag()) << ',' << format_double(r.mean_qdot.real()) << ','
            << format_double(r.mean_qdot.imag()) << ',' << format_double(r.norm.real()) << ','
            << format_double(r.norm.imag()) << ',' << format_double(r.sigma_instant.real())
            << ',' << format_double(r.sigma_instant.imag()) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto wall0 = std::chrono::steady_clock::now();

    ExperimentReport report;
    report.config = config;

    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + config.output_dir +
                                 "': " + ec.message());

    const auto grid = make_grid(config.grid);
    const StateFunction chi0 = sample_packet(grid, config.packet);
    const bool evolved = config.propagator.t_final > 0.0;
    const bool has_drive = std::abs(config.drive.e0) > 0.0;
    const auto window = config.window();

    std::vector<std::pair<GaugeTag, StateFunction>> finals;
    for (GaugeTag gauge : config.gauges) {
        const auto t0 = std::chrono::steady_clock::now();
        GaugeRunResult run;
        run.gauge = gauge;
        run.scheme = config.scheme_for(gauge);
        PropagatorConfig pc = config.propagator;
        pc.scheme = run.scheme;
        Trajectory traj =
            propagate(chi0, pc, gauge, config.medium, config.drive, config.constants);
        run.initial = traj.records.front();
        run.final_record = traj.records.back();
        run.n_records = traj.records.size();
        run.norm_drift = traj.norm_drift;
        run.norm_ok = run.norm_drift <= config.tolerances.norm_drift;
        if (evolved && has_drive) {
            run.conductivity = conductivity(traj.records, config.medium, config.drive, window);
            run.sigma_ok = run.conductivity->relative_error <= config.tolerances.sigma_rel;
        } else if (!has_drive) {
            run.warnings.push_back("drive amplitude is zero; conductivity skipped");
        }
        run.csv_path = join_path(config.output_dir, "trajectory_" + to_string(gauge) + ".csv");
        emit_csv(traj.records, run.csv_path);
        finals.emplace_back(gauge, std::move(traj.final_state));
        run.runtime_s = seconds_since(t0);
        report.runs.push_back(std::move(run));
    }

    const GaugeRunResult* run_a = find_run(report.runs, GaugeTag::a_gauge);
    const GaugeRunResult* run_phi = find_run(report.runs, GaugeTag::phi_gauge);
    if (evolved && run_a && run_phi) {
        CrossGaugeResult cross;
        if (run_a->conductivity && run_phi->conductivity) {
            const cplx sa = run_a->conductivity->sigma;
            cross.delta_sigma_rel = std::abs(sa - run_phi->conductivity->sigma) / std::abs(sa);
        }

        // compare moduli where the transient is still alive; reuse the final
        // states when the run already ends there
        const double alpha = config.medium.alpha;
        double t_eq = config.propagator.t_final;
        if (alpha > 0.0) t_eq = std::min(t_eq, 1.0 / alpha);
        StateFunction state_a, state_phi;
        if (t_eq == config.propagator.t_final) {
            for (auto& [gauge, state] : finals) {
                if (gauge == GaugeTag::a_gauge) state_a = state;
                if (gauge == GaugeTag::phi_gauge) state_phi = state;
            }
        } else {
            PropagatorConfig pc = config.propagator;
            pc.t_final = t_eq;
            pc.record_every =
                std::max(1, static_cast<int>(std::llround(t_eq / pc.dt)));
            pc.scheme = config.scheme_for(GaugeTag::a_gauge);
            state_a = propagate(chi0, pc, GaugeTag::a_gauge, config.medium, config.drive,
                                config.constants)
                          .final_state;
            pc.scheme = config.scheme_for(GaugeTag::phi_gauge);
            state_phi = propagate(chi0, pc, GaugeTag::phi_gauge, config.medium, config.drive,
                                  config.constants)
                            .final_state;
        }
        const CharacteristicMap map{GaugeTag::phi_gauge, config.medium, config.drive};
        const StateFunction resampled =
            translate_p(state_phi, -config.medium.e_charge * map.I(t_eq));
        double residual = 0.0;
        for (size_t i = 0; i < state_a.values.size(); ++i)
            residual = std::max(residual, std::abs(std::abs(resampled.values[i]) -
                                                   std::abs(state_a.values[i])));
        const double scale = max_abs(state_a);
        cross.modulus_residual = scale > 0.0 ? residual / scale : 0.0;
        cross.compare_time = t_eq;
        cross.ok = cross.delta_sigma_rel <= config.tolerances.cross_gauge_rel &&
                   cross.modulus_residual <= config.tolerances.modulus_rel;
        report.cross_gauge = cross;
    }

    bool ok = true;
    for (const GaugeRunResult& run : report.runs) ok = ok && run.sigma_ok && run.norm_ok;
    if (report.cross_gauge) ok = ok && report.cross_gauge->ok;
    report.ok = ok;
    report.total_runtime_s = seconds_since(wall0);
    return report;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json cval(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json record_json(const ObservableRecord& r) {
    ordered_json j;
    j["t"] = r.t;
    j["mean_p"] = cval(r.mean_p);
    j["mean_qdot"] = cval(r.mean_qdot);
    j["norm"] = cval(r.norm);
    j["sigma_instant"] = cval(r.sigma_instant);
    return j;
}

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json j;
    j["medium"] = {{"m", c.medium.m},
                   {"e_charge", c.medium.e_charge},
                   {"alpha", c.medium.alpha},
                   {"n_particles", c.medium.n_particles}};
    j["drive"] = {{"e0", cval(c.drive.e0)},
                  {"omega", c.drive.omega},
                  {"mode", c.drive.mode == DriveMode::phasor ? "phasor" : "real_cosine"}};
    j["constants"] = {{"hbar", c.constants.hbar}, {"c", c.constants.c}};
    j["grid"] = {{"q_min", c.grid.q_min}, {"q_max", c.grid.q_max}, {"p_min", c.grid.p_min},
                 {"p_max", c.grid.p_max}, {"n_q", c.grid.n_q},     {"n_p", c.grid.n_p}};
    j["packet"] = {{"q0", c.packet.q0},
                   {"p0", c.packet.p0},
                   {"s_q", c.packet.s_q},
                   {"s_p", c.packet.s_p}};
    j["propagator"] = {{"dt", c.propagator.dt},
                       {"t_final", c.propagator.t_final},
                       {"record_every", c.propagator.record_every},
                       {"scheme", c.scheme_auto ? "auto" : scheme_name(c.propagator.scheme)}};
    ordered_json gauges = ordered_json::array();
    for (GaugeTag g : c.gauges) gauges.push_back(to_string(g));
    j["gauges"] = gauges;
    j["window"] = {{"start", c.window_start < 0.0 ? ordered_json("auto")
                                                  : ordered_json(c.window_start)},
                   {"end", c.window_end < 0.0 ? ordered_json("auto")
                                              : ordered_json(c.window_end)}};
    j["tolerances"] = {{"sigma_rel", c.tolerances.sigma_rel},
                       {"cross_gauge_rel", c.tolerances.cross_gauge_rel},
                       {"modulus_rel", c.tolerances.modulus_rel},
                       {"norm_drift", c.tolerances.norm_drift}};
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j;
}

ordered_json run_json(const GaugeRunResult& run, bool include_timing) {
    ordered_json j;
    j["scheme"] = scheme_name(run.scheme);
    j["records"] = run.n_records;
    j["csv"] = run.csv_path;
    j["initial"] = record_json(run.initial);
    j["final"] = record_json(run.final_record);
    j["norm_drift"] = run.norm_drift;
    if (run.conductivity) {
        const ConductivityResult& c = *run.conductivity;
        ordered_json jc;
        jc["sigma"] = cval(c.sigma);
        jc["sigma_theory"] = cval(c.sigma_theory);
        jc["relative_error"] = c.relative_error;
        jc["transient_window"] =
            ordered_json::array({c.transient_window.first, c.transient_window.second});
        jc["transient_amplitude"] = cval(c.transient_amplitude);
        jc["warnings"] = c.warnings;
        j["conductivity"] = jc;
    } else {
        j["conductivity"] = nullptr;
    }
    j["warnings"] = run.warnings;
    j["checks"] = {{"sigma", run.sigma_ok}, {"norm_drift", run.norm_ok}};
    if (include_timing) j["runtime_s"] = run.runtime_s;
    return j;
}

}  // namespace

std::string render_report(const ExperimentReport& report, bool include_timing) {
    ordered_json j;
    j["schema_version"] = 1;
    j["config"] = config_json(report.config);
    ordered_json gauges = ordered_json::object();
    for (const GaugeRunResult& run : report.runs)
        gauges[to_string(run.gauge)] = run_json(run, include_timing);
    j["gauges"] = gauges;
    if (report.cross_gauge) {
        const CrossGaugeResult& c = *report.cross_gauge;
        j["cross_gauge"] = {{"delta_sigma_rel", c.delta_sigma_rel},
                            {"modulus_residual", c.modulus_residual},
                            {"compare_time", c.compare_time},
                            {"check", c.ok}};
    }
    j["checks_passed"] = report.ok;
    if (include_timing) j["timing"] = {{"total_s", report.total_runtime_s}};
    return j.dump(2) + "\n";
}

void emit_report(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << render_report(report);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace eps
