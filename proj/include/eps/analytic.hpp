#pragma once

#include <functional>
#include <utility>

#include "eps/grid.hpp"
#include "eps/types.hpp"

namespace eps {

// exp(z) - 1, series-stable near z = 0.
cplx cexpm1(cplx z);

// int_0^t exp(z s) ds, continuous through z = 0.
cplx exp_integral(cplx z, double t);

// int_0^t (exp(a s) - exp(b s)) / (a - b) ds, continuous through a = b.
cplx exp_pair_integral(cplx a, cplx b, double t);

// Adaptive Simpson quadrature on [a, b], complex integrand.
cplx integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                        double rel_tol = 1e-10);

// Time-dependent change of variables that freezes the drift of the evolution
// equation in either gauge:
//   u(t)    = int_0^t exp(-alpha s) ds
//   I(t)    = int_0^t exp(alpha s) E(s) ds        (canonical impulse / charge)
//   w_a(t)  = (e/m) int_0^t exp(-alpha s) I(s) ds (physical drive displacement)
//   w_phi(t)= (e/m) int_0^t exp(alpha s) E(s) u(s) ds
// Identity: w_a + w_phi = (e/m) u I, used for the closed form of w_phi.
struct CharacteristicMap {
    GaugeTag gauge = GaugeTag::a_gauge;
    ChargedParticleMedium medium;
    DriveSpec drive;

    double u(double t) const;
    cplx I(double t) const;
    cplx w_a(double t) const;
    cplx w_phi(double t) const;

    // Gauge-dispatched labels: xi is the comoving position, eta the conserved
    // momentum; both reduce to (q, p) at t = 0.
    cplx xi(double p, double q, double t) const;
    cplx eta(double p, double t) const;

    // Independent quadrature evaluations of the same integrals (test oracles).
    double u_quadrature(double t) const;
    cplx I_quadrature(double t) const;
    cplx w_a_quadrature(double t) const;
    cplx w_phi_quadrature(double t) const;
};

cplx xi(double q, double p, double t, const CharacteristicMap& map);
cplx eta(double p, double t, const CharacteristicMap& map);

struct PlaneWaveSolution {
    double k = 1.0;
    cplx c_plus{0.5, 0.0};
    cplx c_minus{0.5, 0.0};
};

// chi(p,q,t) = c+ exp(+ik xi) P(t) + c- exp(-ik xi) P(t) with the global
// phase P = exp(i hbar k^2 exp(-alpha t) / (2 m alpha)); the undamped branch
// (alpha < 1e-12) uses P = exp(-i hbar k^2 t / (2m)).
cplx plane_wave_solution(const PlaneWaveSolution& sol, double q, double p, double t,
                         const CharacteristicMap& map, const ChargedParticleMedium& medium,
                         const PhysicalConstants& constants);

struct ClassicalPoint {
    cplx q;
    cplx p;  // canonical momentum of the requested gauge
};

// q(t) = q0 + (p0/m) u(t) + w_a(t) in both gauges; the canonical momentum is
// constant in the vector-potential gauge and p0 + e I(t) in the scalar gauge.
ClassicalPoint classical_trajectory(double q0, double p0, double t, GaugeTag gauge,
                                    const CharacteristicMap& map);

// N e^2 / (m (alpha + i omega)); rejects the undamped DC limit.
cplx steady_state_conductivity(const ChargedParticleMedium& medium, const DriveSpec& drive);

struct GaussianPacket {
    double q0 = 0.0;
    double p0 = 0.0;
    double s_q = 1.0;
    double s_p = 1.0;

    void validate() const {
        if (!(s_q > 0.0)) throw std::invalid_argument("packet.s_q must be > 0");
        if (!(s_p > 0.0)) throw std::invalid_argument("packet.s_p must be > 0");
    }
};

// Real positive packet normalized so the phase-space integral of chi is 1.
StateFunction sample_packet(std::shared_ptr<const Grid> grid, const GaussianPacket& packet);

// Exact evolution of sample_packet data under either gauge: a spreading
// Gaussian in the comoving label, S(t) = s_q^2 + i hbar u(t)/m.
cplx packet_solution(const GaussianPacket& packet, const CharacteristicMap& map,
                     const PhysicalConstants& constants, double p, double q, double t);

}  // namespace eps
