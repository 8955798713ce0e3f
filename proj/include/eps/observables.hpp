#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eps/analytic.hpp"
#include "eps/grid.hpp"
#include "eps/types.hpp"

namespace eps {

// Averaging rule over the conjugated state: <O> = integral of O chi* dp dq.
// Appends a message to *warning when the normalization <1> has drifted by
// more than 1e-8.
cplx average(const std::function<cplx(double p, double q)>& o, const StateFunction& chi,
             std::string* warning = nullptr);

// Distribution moment without conjugation: integral of O chi dp dq. For the
// complex phasor drive the state is the analytic continuation of a real
// distribution, and trajectory observables (mean_p, mean_q, sigma) are the
// moments of that continuation; both rules coincide for real states.
cplx moment(const std::function<cplx(double p, double q)>& o, const StateFunction& chi);

// First moments normalized by <1>.
cplx mean_p(const StateFunction& chi);
cplx mean_q(const StateFunction& chi);

// <qdot> = exp(-alpha t)/m * (canonical momentum + drive impulse of the
// gauge); both gauges give exp(-alpha t) (p0 + e I(t))/m for a packet.
cplx mean_qdot(const StateFunction& chi, double t, const ChargedParticleMedium& medium,
               const DriveSpec& drive, const CharacteristicMap& map);

struct ObservableRecord {
    double t = 0.0;
    cplx mean_p{0.0, 0.0};
    cplx mean_qdot{0.0, 0.0};
    cplx norm{0.0, 0.0};
    cplx sigma_instant{0.0, 0.0};  // N e <qdot> / E(t); 0 when E(t) = 0
};

ObservableRecord make_record(const StateFunction& chi, double t,
                             const ChargedParticleMedium& medium, const DriveSpec& drive,
                             const CharacteristicMap& map);

struct ConductivityResult {
    cplx sigma{0.0, 0.0};
    cplx sigma_theory{0.0, 0.0};
    std::pair<double, double> transient_window{0.0, 0.0};
    double relative_error = 0.0;
    cplx transient_amplitude{0.0, 0.0};  // fitted coefficient of exp(-(alpha+i omega) t)
    std::vector<std::string> warnings;
};

// Decomposes sigma_instant over the window into steady + transient on the
// exact basis {1, exp(-(alpha + i omega) t)} by least squares; the steady
// coefficient is sigma. Falls back to the plain window mean when the
// transient regressor is numerically degenerate.
ConductivityResult conductivity(const std::vector<ObservableRecord>& records,
                                const ChargedParticleMedium& medium, const DriveSpec& drive,
                                std::pair<double, double> window);

// Secondary extraction for the real-drive mode: projects N e <qdot> onto
// exp(i omega t) over the window (use an integer number of periods).
cplx lockin_conductivity(const std::vector<ObservableRecord>& records,
                         const ChargedParticleMedium& medium, const DriveSpec& drive,
                         std::pair<double, double> window);

}  // namespace eps
