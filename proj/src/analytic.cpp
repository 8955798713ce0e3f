#include "eps/analytic.hpp"

#include <cmath>
#include <numbers>

namespace eps {

cplx cexpm1(cplx z) {
    if (std::abs(z) >= 0.5) return std::exp(z) - 1.0;
    cplx term = z, sum = z;
    for (int n = 2; n <= 24; ++n) {
        term *= z / static_cast<double>(n);
        sum += term;
    }
    return sum;
}

cplx exp_integral(cplx z, double t) {
    const cplx x = z * t;
    if (std::abs(x) < 1e-14) return {t, 0.0};
    return cexpm1(x) / z;
}

namespace {

// int_0^t s^k exp(b s) ds for k in {1, 2, 3}; series for small |b t|,
// downward-stable recursion M_k = (t^k e^{bt} - k M_{k-1}) / b otherwise.
cplx exp_moment(cplx b, double t, int k) {
    const cplx x = b * t;
    if (std::abs(x) <= 0.5) {
        cplx sum{0.0, 0.0};
        cplx xi{1.0, 0.0};  // x^i / i!
        for (int i = 0; i <= 30; ++i) {
            sum += xi / static_cast<double>(k + i + 1);
            xi *= x / static_cast<double>(i + 1);
        }
        return sum * std::pow(t, k + 1);
    }
    const cplx ebt = std::exp(x);
    cplx m = cexpm1(x) / b;  // M_0
    double tk = 1.0;
    for (int j = 1; j <= k; ++j) {
        tk *= t;
        m = (tk * ebt - static_cast<double>(j) * m) / b;
    }
    return m;
}

}  // namespace

cplx exp_pair_integral(cplx a, cplx b, double t) {
    const cplx d = a - b;
    if (std::abs(d) * std::abs(t) >= 1e-4)
        return (exp_integral(a, t) - exp_integral(b, t)) / d;
    // (e^{as} - e^{bs})/(a-b) = sum_j d^j s^{j+1} e^{bs} / (j+1)!
    return exp_moment(b, t, 1) + d * (exp_moment(b, t, 2) / 2.0 + d * exp_moment(b, t, 3) / 6.0);
}

namespace {

cplx adaptive_step(const std::function<cplx(double)>& f, double a, double b, cplx fa, cplx fm,
                   cplx fb, cplx whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const cplx flm = f(lm), frm = f(rm);
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

cplx integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                        double rel_tol) {
    if (a == b) return {0.0, 0.0};
    const double m = 0.5 * (a + b);
    const cplx fa = f(a), fm = f(m), fb = f(b);
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // magnitude scan keeps the tolerance sane when the endpoints and midpoint
    // all sit near zeros of the integrand
    double fmax = std::max({std::abs(fa), std::abs(fm), std::abs(fb)});
    for (int i = 1; i < 8; i += 2) fmax = std::max(fmax, std::abs(f(a + (b - a) * i / 8.0)));
    const double scale = std::max({std::abs(whole), std::abs(b - a) * fmax, 1e-300});
    return adaptive_step(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48);
}

double CharacteristicMap::u(double t) const {
    return exp_integral(cplx{-medium.alpha, 0.0}, t).real();
}

cplx CharacteristicMap::I(double t) const {
    const cplx zp{medium.alpha, drive.omega};
    if (drive.mode == DriveMode::phasor) return drive.e0 * exp_integral(zp, t);
    const cplx zm{medium.alpha, -drive.omega};
    return 0.5 * (drive.e0 * exp_integral(zp, t) + std::conj(drive.e0) * exp_integral(zm, t));
}

cplx CharacteristicMap::w_a(double t) const {
    const double em = medium.e_charge / medium.m;
    const cplx iw{0.0, drive.omega};
    const cplx ma{-medium.alpha, 0.0};
    if (drive.mode == DriveMode::phasor) return em * drive.e0 * exp_pair_integral(iw, ma, t);
    return 0.5 * em *
           (drive.e0 * exp_pair_integral(iw, ma, t) +
            std::conj(drive.e0) * exp_pair_integral(-iw, ma, t));
}

cplx CharacteristicMap::w_phi(double t) const {
    return (medium.e_charge / medium.m) * u(t) * I(t) - w_a(t);
}

cplx CharacteristicMap::xi(double p, double q, double t) const {
    const cplx drift = gauge == GaugeTag::a_gauge ? -w_a(t) : w_phi(t);
    return q - (p / medium.m) * u(t) + drift;
}

cplx CharacteristicMap::eta(double p, double t) const {
    if (gauge == GaugeTag::a_gauge) return {p, 0.0};
    return p - medium.e_charge * I(t);
}

double CharacteristicMap::u_quadrature(double t) const {
    const double a = medium.alpha;
    return integrate_adaptive([a](double s) { return cplx{std::exp(-a * s), 0.0}; }, 0.0, t)
        .real();
}

cplx CharacteristicMap::I_quadrature(double t) const {
    const double a = medium.alpha;
    const DriveSpec d = drive;
    return integrate_adaptive([a, d](double s) { return std::exp(a * s) * d.field(s); }, 0.0, t);
}

cplx CharacteristicMap::w_a_quadrature(double t) const {
    const double a = medium.alpha;
    return (medium.e_charge / medium.m) *
           integrate_adaptive(
               [this, a](double s) { return std::exp(-a * s) * I_quadrature(s); }, 0.0, t);
}

cplx CharacteristicMap::w_phi_quadrature(double t) const {
    const double a = medium.alpha;
    const DriveSpec d = drive;
    return (medium.e_charge / medium.m) *
           integrate_adaptive(
               [this, a, d](double s) { return std::exp(a * s) * d.field(s) * u_quadrature(s); },
               0.0, t);
}

cplx xi(double q, double p, double t, const CharacteristicMap& map) { return map.xi(p, q, t); }

cplx eta(double p, double t, const CharacteristicMap& map) { return map.eta(p, t); }

cplx plane_wave_solution(const PlaneWaveSolution& sol, double q, double p, double t,
                         const CharacteristicMap& map, const ChargedParticleMedium& medium,
                         const PhysicalConstants& constants) {
    const double k = sol.k;
    const double hk2 = constants.hbar * k * k / (2.0 * medium.m);
    cplx phase;
    if (medium.alpha < 1e-12) {
        phase = -I_UNIT * hk2 * t;
    } else {
        phase = I_UNIT * hk2 * std::exp(-medium.alpha * t) / medium.alpha;
    }
    const cplx x = map.xi(p, q, t);
    return sol.c_plus * std::exp(I_UNIT * k * x + phase) +
           sol.c_minus * std::exp(-I_UNIT * k * x + phase);
}

ClassicalPoint classical_trajectory(double q0, double p0, double t, GaugeTag gauge,
                                    const CharacteristicMap& map) {
    ClassicalPoint pt;
    pt.q = q0 + (p0 / map.medium.m) * map.u(t) + map.w_a(t);
    pt.p = gauge == GaugeTag::a_gauge ? cplx{p0, 0.0}
                                      : p0 + map.medium.e_charge * map.I(t);
    return pt;
}

cplx steady_state_conductivity(const ChargedParticleMedium& medium, const DriveSpec& drive) {
    if (medium.alpha == 0.0 && drive.omega == 0.0)
        throw std::invalid_argument("undamped DC limit diverges: alpha = omega = 0");
    const double ne2 = medium.n_particles * medium.e_charge * medium.e_charge;
    return ne2 / (medium.m * cplx{medium.alpha, drive.omega});
}

StateFunction sample_packet(std::shared_ptr<const Grid> grid, const GaussianPacket& packet) {
    packet.validate();
    const double norm = 1.0 / (2.0 * std::numbers::pi * packet.s_q * packet.s_p);
    const double q0 = packet.q0, p0 = packet.p0;
    const double cq = 1.0 / (2.0 * packet.s_q * packet.s_q);
    const double cp = 1.0 / (2.0 * packet.s_p * packet.s_p);
    StateFunction chi = sample(std::move(grid), [=](double p, double q) {
        const double dq = q - q0, dp = p - p0;
        return cplx{norm * std::exp(-cq * dq * dq - cp * dp * dp), 0.0};
    });
    chi.time = 0.0;
    return chi;
}

cplx packet_solution(const GaussianPacket& packet, const CharacteristicMap& map,
                     const PhysicalConstants& constants, double p, double q, double t) {
    const cplx spread =
        packet.s_q * packet.s_q + I_UNIT * constants.hbar * map.u(t) / map.medium.m;
    const cplx dxi = map.xi(p, q, t) - packet.q0;
    const cplx deta = map.eta(p, t) - packet.p0;
    const double norm = 1.0 / (2.0 * std::numbers::pi * packet.s_q * packet.s_p);
    return norm * (packet.s_q / std::sqrt(spread)) * std::exp(-dxi * dxi / (2.0 * spread)) *
           std::exp(-deta * deta / (2.0 * packet.s_p * packet.s_p));
}

}  // namespace eps
