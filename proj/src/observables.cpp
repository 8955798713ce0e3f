#include "eps/observables.hpp"

#include <cmath>
#include <sstream>

namespace eps {

cplx average(const std::function<cplx(double, double)>& o, const StateFunction& chi,
             std::string* warning) {
    const cplx one = std::conj(integrate_phase_space(chi));
    if (warning && std::abs(one - 1.0) > 1e-8) {
        std::ostringstream msg;
        msg << "normalization drift: |<1> - 1| = " << std::abs(one - 1.0);
        *warning = msg.str();
    }
    StateFunction conj_chi = chi;
    for (cplx& v : conj_chi.values) v = std::conj(v);
    return integrate_phase_space(conj_chi, o);
}

cplx moment(const std::function<cplx(double, double)>& o, const StateFunction& chi) {
    return integrate_phase_space(chi, o);
}

cplx mean_p(const StateFunction& chi) {
    const cplx n = integrate_phase_space(chi);
    return moment([](double p, double) { return cplx{p, 0.0}; }, chi) / n;
}

cplx mean_q(const StateFunction& chi) {
    const cplx n = integrate_phase_space(chi);
    return moment([](double, double q) { return cplx{q, 0.0}; }, chi) / n;
}

cplx mean_qdot(const StateFunction& chi, double t, const ChargedParticleMedium& medium,
               const DriveSpec& drive, const CharacteristicMap& map) {
    (void)drive;
    const double decay = std::exp(-medium.alpha * t);
    const cplx pbar = mean_p(chi);
    if (map.gauge == GaugeTag::a_gauge)
        return decay / medium.m * (pbar + medium.e_charge * map.I(t));
    return decay / medium.m * pbar;  // canonical momentum already carries e I(t)
}

ObservableRecord make_record(const StateFunction& chi, double t,
                             const ChargedParticleMedium& medium, const DriveSpec& drive,
                             const CharacteristicMap& map) {
    ObservableRecord rec;
    rec.t = t;
    rec.norm = integrate_phase_space(chi);
    rec.mean_p = moment([](double p, double) { return cplx{p, 0.0}; }, chi) / rec.norm;
    const double decay = std::exp(-medium.alpha * t);
    rec.mean_qdot = map.gauge == GaugeTag::a_gauge
                        ? decay / medium.m * (rec.mean_p + medium.e_charge * map.I(t))
                        : decay / medium.m * rec.mean_p;
    const cplx e_field = drive.field(t);
    rec.sigma_instant = std::abs(e_field) > 0.0
                            ? medium.n_particles * medium.e_charge * rec.mean_qdot / e_field
                            : cplx{0.0, 0.0};
    return rec;
}

ConductivityResult conductivity(const std::vector<ObservableRecord>& records,
                                const ChargedParticleMedium& medium, const DriveSpec& drive,
                                std::pair<double, double> window) {
    ConductivityResult res;
    res.sigma_theory = steady_state_conductivity(medium, drive);
    res.transient_window = window;

    if (medium.alpha > 0.0 && window.first < 5.0 / medium.alpha - 1e-12) {
        std::ostringstream msg;
        msg << "window starts before transient decay: residual envelope exp(-alpha t) = "
            << std::exp(-medium.alpha * window.first) << " at t = " << window.first;
        res.warnings.push_back(msg.str());
    }

    // sigma_instant(t) = sigma + c exp(-(alpha + i omega) t) after Eq. of motion;
    // least squares for (sigma, c) on that exact basis.
    const cplx rate{-medium.alpha, -drive.omega};
    size_t n = 0;
    cplx sb{0.0, 0.0}, sr{0.0, 0.0};
    double sbb = 0.0;
    cplx sbr{0.0, 0.0};
    for (const ObservableRecord& rec : records) {
        if (rec.t < window.first || rec.t > window.second) continue;
        if (std::abs(drive.field(rec.t)) == 0.0) continue;
        const cplx b = std::exp(rate * rec.t);
        ++n;
        sb += b;
        sr += rec.sigma_instant;
        sbb += std::norm(b);
        sbr += std::conj(b) * rec.sigma_instant;
    }
    if (n == 0) {
        res.warnings.push_back("no records inside the averaging window");
        res.relative_error = 1.0;
        return res;
    }
    const double dn = static_cast<double>(n);
    const double det_scale = dn * sbb;
    const cplx det = dn * sbb - sb * std::conj(sb);
    if (sbb < 1e-28 * dn || std::abs(det) < 1e-12 * det_scale) {
        res.sigma = sr / dn;  // transient numerically gone; plain mean
    } else {
        res.sigma = (sbb * sr - sb * sbr) / det;
        res.transient_amplitude = (dn * sbr - std::conj(sb) * sr) / det;
    }
    res.relative_error = std::abs(res.sigma - res.sigma_theory) / std::abs(res.sigma_theory);
    return res;
}

cplx lockin_conductivity(const std::vector<ObservableRecord>& records,
                         const ChargedParticleMedium& medium, const DriveSpec& drive,
                         std::pair<double, double> window) {
    // trapezoid projection of N e <qdot> onto exp(i omega t), normalized by E0/2
    // (the positive-frequency half of the real drive)
    std::vector<const ObservableRecord*> in;
    for (const ObservableRecord& rec : records)
        if (rec.t >= window.first && rec.t <= window.second) in.push_back(&rec);
    if (in.size() < 2) throw std::invalid_argument("lock-in window needs at least two records");
    cplx acc{0.0, 0.0};
    for (size_t i = 0; i + 1 < in.size(); ++i) {
        const double dt = in[i + 1]->t - in[i]->t;
        const cplx f0 = in[i]->mean_qdot * std::exp(-I_UNIT * (drive.omega * in[i]->t));
        const cplx f1 = in[i + 1]->mean_qdot * std::exp(-I_UNIT * (drive.omega * in[i + 1]->t));
        acc += 0.5 * dt * (f0 + f1);
    }
    const double span = in.back()->t - in.front()->t;
    const cplx amplitude = 2.0 * acc / span;  // complex qdot amplitude at +omega
    return medium.n_particles * medium.e_charge * amplitude / drive.e0;
}

}  // namespace eps
