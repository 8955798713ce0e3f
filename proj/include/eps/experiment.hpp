#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eps/analytic.hpp"
#include "eps/evolution.hpp"
#include "eps/observables.hpp"

namespace eps {

struct ToleranceSpec {
    double sigma_rel = 1e-3;        // per-gauge |sigma - theory| / |theory|
    double cross_gauge_rel = 1e-6;  // |sigma_a - sigma_phi| / |sigma_a|
    double modulus_rel = 1e-7;      // cross-gauge pointwise modulus residual
    double norm_drift = 1e-12;      // max relative drift of <1>

    void validate() const;
};

struct ExperimentConfig {
    ChargedParticleMedium medium;
    DriveSpec drive;
    PhysicalConstants constants;
    GridSpec grid;
    GaussianPacket packet;
    PropagatorConfig propagator;  // scheme honored only when !scheme_auto
    bool scheme_auto = true;      // exact_diagonal for gauge a, strang for gauge phi
    std::vector<GaugeTag> gauges{GaugeTag::a_gauge, GaugeTag::phi_gauge};
    double window_start = -1.0;  // < 0: auto = 5/alpha (0 when alpha = 0)
    double window_end = -1.0;    // < 0: auto = t_final
    ToleranceSpec tolerances;
    std::string output_dir = ".";
    long seed = 0;

    void validate() const;
    std::pair<double, double> window() const;
    Scheme scheme_for(GaugeTag gauge) const;
};

// Flat key = value lines; '#' starts a comment; blank lines ignored.
// Duplicate keys and malformed lines are errors.
std::map<std::string, std::string> parse_key_values(const std::string& text);

// "key=value" merged onto the entry map (inserting or replacing).
void apply_override(std::map<std::string, std::string>& entries, const std::string& assignment);

// Maps entries onto a default-constructed config. Unknown keys and
// unparseable values are rejected with the offending key in the message.
ExperimentConfig config_from_entries(const std::map<std::string, std::string>& entries);

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

struct GaugeRunResult {
    GaugeTag gauge = GaugeTag::a_gauge;
    Scheme scheme = Scheme::exact_diagonal;
    std::optional<ConductivityResult> conductivity;  // absent when t_final = 0 or E0 = 0
    ObservableRecord initial;
    ObservableRecord final_record;
    double norm_drift = 0.0;
    std::size_t n_records = 0;
    std::string csv_path;
    std::vector<std::string> warnings;
    bool sigma_ok = true;
    bool norm_ok = true;
    double runtime_s = 0.0;
};

struct CrossGaugeResult {
    double delta_sigma_rel = 0.0;
    // sup |  |chi_phi(p + e I, q)| - |chi_a(p, q)|  | / sup |chi_a| at
    // compare_time, the phi state resampled through the composite
    // characteristic map (a pure momentum translation by the impulse e I).
    double modulus_residual = 0.0;
    double compare_time = 0.0;
    bool ok = true;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<GaugeRunResult> runs;
    std::optional<CrossGaugeResult> cross_gauge;
    bool ok = true;
    double total_runtime_s = 0.0;
};

// Propagates the packet in every selected gauge, extracts the conductivity
// against the steady-state value, writes trajectory_<gauge>.csv files into
// output_dir, and fills the cross-gauge block when both gauges ran.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Header t,re_mean_p,im_mean_p,re_mean_qdot,im_mean_qdot,re_norm,im_norm,
// re_sigma,im_sigma; one row per record; %.17g round-trip floats.
void emit_csv(const std::vector<ObservableRecord>& trajectory, const std::string& path);

// Versioned key-value tree as JSON text; include_timing = false drops the
// wall-clock fields so the rest is byte-stable for a fixed config.
std::string render_report(const ExperimentReport& report, bool include_timing = true);

void emit_report(const ExperimentReport& report, const std::string& path);

}  // namespace eps
