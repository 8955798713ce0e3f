#include "eps/evolution.hpp"

#include <cmath>
#include <sstream>

namespace eps {

namespace {

// chi_hat(p, k_q) *= exp(-i k [ (hbar k / 2m) du + (du/m) p + dwa ]) on the
// row-spectral field. Exponentials refreshed every 16 wavenumbers to keep the
// power recurrence at machine accuracy.
void apply_q_sector_phase(std::vector<cplx>& spec, const Grid& g, double m, double hbar,
                          double du, cplx dwa) {
    const int nq = g.nq(), np = g.np();
    const double c2 = hbar * du / (2.0 * m);
    std::vector<cplx> e2(nq);
    for (int iq = 0; iq < nq; ++iq) {
        const double k = g.kq(iq);
        e2[iq] = std::exp(cplx{0.0, -k * k * c2});
    }
    const double kbase = g.kq(1);
    for (int ip = 0; ip < np; ++ip) {
        const cplx c1 = (du / m) * g.p(ip) + dwa;
        const cplx z = -I_UNIT * (kbase * c1);
        const cplx r = std::exp(z);
        cplx* row = spec.data() + static_cast<size_t>(ip) * nq;
        cplx f{1.0, 0.0};
        for (int s = 0; s < nq / 2; ++s) {
            if (s % 16 == 0) f = s == 0 ? cplx{1.0, 0.0} : std::exp(z * static_cast<double>(s));
            row[s] *= f * e2[s];
            f *= r;
        }
        for (int iq = nq / 2; iq < nq; ++iq) {
            const int s = iq - nq;
            if ((iq - nq / 2) % 16 == 0) f = std::exp(z * static_cast<double>(s));
            row[iq] *= f * e2[iq];
            f *= r;
        }
    }
}

}  // namespace

StateFunction step_a_gauge(const StateFunction& chi, double t, double dt,
                           const ChargedParticleMedium& medium, const DriveSpec& drive,
                           const PhysicalConstants& constants) {
    const CharacteristicMap map{GaugeTag::a_gauge, medium, drive};
    StateFunction out = chi;
    const double du = map.u(t + dt) - map.u(t);
    const cplx dwa = map.w_a(t + dt) - map.w_a(t);
    fft_rows_q(*out.grid, out.values, false);
    apply_q_sector_phase(out.values, *out.grid, medium.m, constants.hbar, du, dwa);
    fft_rows_q(*out.grid, out.values, true);
    out.time = t + dt;
    return out;
}

StateFunction step_phi_gauge(const StateFunction& chi, double t, double dt,
                             const ChargedParticleMedium& medium, const DriveSpec& drive,
                             const PhysicalConstants& constants) {
    const CharacteristicMap map{GaugeTag::phi_gauge, medium, drive};
    const double e = medium.e_charge;
    StateFunction out = chi;
    const Grid& g = *out.grid;
    translate_p_values(g, out.values, e * (map.I(t + 0.5 * dt) - map.I(t)));
    const double du = map.u(t + dt) - map.u(t);
    fft_rows_q(g, out.values, false);
    apply_q_sector_phase(out.values, g, medium.m, constants.hbar, du, cplx{0.0, 0.0});
    fft_rows_q(g, out.values, true);
    translate_p_values(g, out.values, e * (map.I(t + dt) - map.I(t + 0.5 * dt)));
    out.time = t + dt;
    return out;
}

namespace {

double operator_magnitude(const ExtendedHamiltonianOp& op, const Grid& g, double t,
                          double hbar) {
    const double kq_max = std::abs(g.kq(g.nq() / 2));
    const double kp_max = std::abs(g.kp(g.np() / 2));
    double total = 0.0;
    for (const OperatorTerm& term : op.terms) {
        double cmax = 0.0;
        for (int ip = 0; ip < g.np(); ++ip)
            for (int iq = 0; iq < g.nq(); ++iq)
                cmax = std::max(cmax, std::abs(term.coeff(g.p(ip), g.q(iq), t)));
        total += cmax * std::pow(kq_max, term.dq_order) * std::pow(kp_max, term.dp_order);
    }
    return total / hbar;
}

StateFunction scaled_op(const ExtendedHamiltonianOp& op, const StateFunction& s, double t,
                        double hbar) {
    StateFunction d = apply_operator(op, s, t);
    const cplx scale = -I_UNIT / hbar;
    for (cplx& v : d.values) v *= scale;
    return d;
}

StateFunction axpy(const StateFunction& x, double a, const StateFunction& y) {
    StateFunction out = x;
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += a * y.values[i];
    return out;
}

}  // namespace

StateFunction generic_series_step(const StateFunction& chi, double t, double dt,
                                  const ExtendedHamiltonianOp& op,
                                  const PhysicalConstants& constants, int order) {
    if (order != 4)
        throw std::invalid_argument("generic_series_step implements order 4 only");
    const double bound = operator_magnitude(op, *chi.grid, t + 0.5 * dt, constants.hbar) * dt;
    if (bound > 2.8) {
        std::ostringstream msg;
        msg << "unstable step: max |generator| dt = " << bound << " > 2.8; reduce dt";
        throw std::invalid_argument(msg.str());
    }
    const double hbar = constants.hbar;
    const StateFunction k1 = scaled_op(op, chi, t, hbar);
    const StateFunction k2 = scaled_op(op, axpy(chi, 0.5 * dt, k1), t + 0.5 * dt, hbar);
    const StateFunction k3 = scaled_op(op, axpy(chi, 0.5 * dt, k2), t + 0.5 * dt, hbar);
    const StateFunction k4 = scaled_op(op, axpy(chi, dt, k3), t + dt, hbar);
    StateFunction out = chi;
    const double w = dt / 6.0;
    for (size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += w * (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] +
                              k4.values[i]);
    out.time = t + dt;
    return out;
}

namespace {

struct Recorder {
    const ChargedParticleMedium& medium;
    const DriveSpec& drive;
    const CharacteristicMap& map;
    const StateCallback& callback;
    Trajectory& out;

    void operator()(const StateFunction& chi, int step, double t) {
        if (!all_finite(chi)) {
            const cplx n = integrate_phase_space(chi);
            std::ostringstream msg;
            msg << "propagation produced non-finite values at step " << step << ", t = " << t
                << ", max |chi| = " << max_abs(chi) << ", <1> = (" << n.real() << ", "
                << n.imag() << ")";
            throw std::runtime_error(msg.str());
        }
        out.records.push_back(make_record(chi, t, medium, drive, map));
        if (callback) callback(chi, step);
    }
};

ExtendedHamiltonianOp build_gauge_operator(GaugeTag gauge, const ChargedParticleMedium& medium,
                                           const DriveSpec& drive,
                                           const PhysicalConstants& constants) {
    const GaugePotentials pots = gauge == GaugeTag::a_gauge
                                     ? a_gauge_potentials(medium, drive, constants)
                                     : phi_gauge_potentials(drive);
    return extend_hamiltonian(build_kanai(medium, pots, constants), constants);
}

}  // namespace

Trajectory propagate(const StateFunction& chi0, const PropagatorConfig& config, GaugeTag gauge,
                     const ChargedParticleMedium& medium, const DriveSpec& drive,
                     const PhysicalConstants& constants, const StateCallback& on_record) {
    config.validate();
    medium.validate();
    drive.validate();
    constants.validate();
    if (!chi0.grid) throw std::invalid_argument("propagate: state has no grid");

    Scheme scheme = config.scheme;
    if (scheme == Scheme::exact_diagonal && gauge == GaugeTag::phi_gauge)
        throw std::invalid_argument(
            "exact_diagonal applies only to the a-gauge; use strang for the phi-gauge");

    const int n = config.t_final == 0.0
                      ? 0
                      : static_cast<int>(std::llround(config.t_final / config.dt));
    const double dt = config.dt;
    const CharacteristicMap map{gauge, medium, drive};

    Trajectory traj;
    Recorder record{medium, drive, map, on_record, traj};
    record(chi0, 0, 0.0);
    traj.final_state = chi0;

    const auto boundary = [&](int step) {
        return step % config.record_every == 0 || step == n;
    };

    if (n > 0 && scheme == Scheme::generic_series) {
        const ExtendedHamiltonianOp op = build_gauge_operator(gauge, medium, drive, constants);
        StateFunction state = chi0;
        for (int step = 1; step <= n; ++step) {
            state = generic_series_step(state, (step - 1) * dt, dt, op, constants);
            if (boundary(step)) record(state, step, step * dt);
        }
        traj.final_state = std::move(state);
    } else if (n > 0 && gauge == GaugeTag::a_gauge) {
        // the whole run is diagonal in (p, k_q); stay spectral between records
        StateFunction state = chi0;
        std::vector<cplx> spec = chi0.values;
        const Grid& g = *chi0.grid;
        fft_rows_q(g, spec, false);
        for (int step = 1; step <= n; ++step) {
            const double t0 = (step - 1) * dt, t1 = step * dt;
            const double du = map.u(t1) - map.u(t0);
            const cplx dwa = map.w_a(t1) - map.w_a(t0);
            apply_q_sector_phase(spec, g, medium.m, constants.hbar, du, dwa);
            if (boundary(step)) {
                state.values = spec;
                fft_rows_q(g, state.values, true);
                state.time = t1;
                record(state, step, t1);
            }
        }
        traj.final_state = std::move(state);
    } else if (n > 0) {
        // strang with the interior half-advections merged; records close the
        // pending half exactly where a plain per-step composition would
        StateFunction state = chi0;
        const Grid& g = *chi0.grid;
        const double e = medium.e_charge;
        const auto impulse = [&](double ta, double tb) { return e * (map.I(tb) - map.I(ta)); };
        translate_p_values(g, state.values, impulse(0.0, 0.5 * dt));
        for (int step = 1; step <= n; ++step) {
            const double t0 = (step - 1) * dt, t1 = step * dt;
            const double du = map.u(t1) - map.u(t0);
            fft_rows_q(g, state.values, false);
            apply_q_sector_phase(state.values, g, medium.m, constants.hbar, du,
                                 cplx{0.0, 0.0});
            fft_rows_q(g, state.values, true);
            if (boundary(step)) {
                translate_p_values(g, state.values, impulse(t1 - 0.5 * dt, t1));
                state.time = t1;
                record(state, step, t1);
                if (step < n) translate_p_values(g, state.values, impulse(t1, t1 + 0.5 * dt));
            } else {
                translate_p_values(g, state.values, impulse(t1 - 0.5 * dt, t1 + 0.5 * dt));
            }
        }
        traj.final_state = std::move(state);
    }

    double drift = 0.0;
    const cplx n0 = traj.records.front().norm;
    for (const ObservableRecord& rec : traj.records)
        drift = std::max(drift, std::abs(rec.norm - n0));
    traj.norm_drift = drift / std::abs(n0);
    return traj;
}

}  // namespace eps
