#pragma once

#include <functional>
#include <vector>

#include "eps/hamiltonians.hpp"
#include "eps/observables.hpp"

namespace eps {

enum class Scheme { exact_diagonal, strang, generic_series };

struct PropagatorConfig {
    double dt = 1e-3;
    double t_final = 10.0;
    int record_every = 10;
    Scheme scheme = Scheme::exact_diagonal;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("propagator.dt must be > 0");
        if (!(t_final >= 0.0)) throw std::invalid_argument("propagator.t_final must be >= 0");
        if (record_every < 1)
            throw std::invalid_argument("propagator.record_every must be >= 1");
    }
};

// Exact step for the drift-free-in-p gauge: diagonal in (p, k_q), the phase
// carrying the closed-form time integrals of the generator over [t, t+dt].
// Exact for any dt; composition over subintervals telescopes.
StateFunction step_a_gauge(const StateFunction& chi, double t, double dt,
                           const ChargedParticleMedium& medium, const DriveSpec& drive,
                           const PhysicalConstants& constants);

// Strang composition: half p-advection, full q-sector phase, half p-advection,
// every factor using exact time integrals; O(dt^3) splitting error per step.
StateFunction step_phi_gauge(const StateFunction& chi, double t, double dt,
                             const ChargedParticleMedium& medium, const DriveSpec& drive,
                             const PhysicalConstants& constants);

// Classical RK4 on the spectral application of an arbitrary term list; guards
// against unstable steps via max |generator| dt <= 2.8. Only order 4 is
// implemented.
StateFunction generic_series_step(const StateFunction& chi, double t, double dt,
                                  const ExtendedHamiltonianOp& op,
                                  const PhysicalConstants& constants, int order = 4);

using StateCallback = std::function<void(const StateFunction& chi, int step)>;

struct Trajectory {
    std::vector<ObservableRecord> records;
    StateFunction final_state;
    double norm_drift = 0.0;  // max relative change of <1> across records
};

// Steps chi0 to t_final recording observables every record_every steps (t = 0
// and the final step always included). The callback, when given, sees the
// recorded states. Aborts with diagnostics when the state stops being finite.
Trajectory propagate(const StateFunction& chi0, const PropagatorConfig& config, GaugeTag gauge,
                     const ChargedParticleMedium& medium, const DriveSpec& drive,
                     const PhysicalConstants& constants, const StateCallback& on_record = {});

}  // namespace eps
