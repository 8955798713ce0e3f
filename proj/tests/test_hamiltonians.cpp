#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "eps/analytic.hpp"
#include "eps/grid.hpp"
#include "eps/hamiltonians.hpp"

using namespace eps;

namespace {

ChargedParticleMedium medium_with(double m, double e, double alpha) {
    ChargedParticleMedium med;
    med.m = m;
    med.e_charge = e;
    med.alpha = alpha;
    return med;
}

DriveSpec drive_with(cplx e0, double omega, DriveMode mode = DriveMode::phasor) {
    DriveSpec d;
    d.e0 = e0;
    d.omega = omega;
    d.mode = mode;
    return d;
}

GaugePotentials no_potentials() {
    GaugePotentials pots;
    pots.tag = PotentialTag::custom;
    return pots;
}

std::set<std::pair<int, int>> term_orders(const ExtendedHamiltonianOp& op) {
    std::set<std::pair<int, int>> s;
    for (const auto& t : op.terms) s.insert({t.dq_order, t.dp_order});
    return s;
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

const cplx kI1{1.3780246135473637, 0.9093306736314786};  // int_0^1 e^s e^{is} ds

}  // namespace

TEST_CASE("free particle generator has exactly two terms") {
    PhysicalConstants consts;
    const double m = 1.5;
    const auto h = build_kanai(medium_with(m, 1.0, 0.0), no_potentials(), consts);
    const auto op = extend_hamiltonian(h, consts);

    CHECK(op.terms.size() == 2);
    CHECK(term_orders(op) == std::set<std::pair<int, int>>{{1, 0}, {2, 0}});
    CHECK(op.max_dq() == 2);
    CHECK(op.max_dp() == 0);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 6; ++trial) {
        const double p = u(rng), q = u(rng), t = std::abs(u(rng));
        CHECK(close(term_coeff(op, 1, 0, p, q, t), -I_UNIT * p / m, 1e-15));
        CHECK(close(term_coeff(op, 2, 0, p, q, t), cplx{-1.0 / (2.0 * m), 0.0}, 1e-15));
        CHECK(close(term_coeff(op, 0, 0, p, q, t), cplx{0.0, 0.0}, 0.0));
        CHECK(close(term_coeff(op, 0, 1, p, q, t), cplx{0.0, 0.0}, 0.0));
    }
}

TEST_CASE("vector-potential gauge generator term list") {
    PhysicalConstants consts;
    consts.hbar = 0.7;
    consts.c = 1.3;
    const auto med = medium_with(0.5, 2.0, 1.0);
    const auto drive = drive_with({1.0, 0.0}, 1.0);
    const auto op =
        extend_hamiltonian(build_kanai(med, a_gauge_potentials(med, drive, consts), consts), consts);

    CHECK(op.terms.size() == 2);
    CHECK(term_orders(op) == std::set<std::pair<int, int>>{{1, 0}, {2, 0}});

    CharacteristicMap map{GaugeTag::a_gauge, med, drive};
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 8; ++trial) {
        const double p = u(rng), q = u(rng), t = 0.5 * std::abs(u(rng));
        const double damp = std::exp(-med.alpha * t);
        const cplx drift = -I_UNIT * consts.hbar * damp / med.m * (p + med.e_charge * map.I(t));
        CHECK(close(term_coeff(op, 1, 0, p, q, t), drift, 1e-14));
        CHECK(close(term_coeff(op, 2, 0, p, q, t),
                    cplx{-consts.hbar * consts.hbar * damp / (2.0 * med.m), 0.0}, 1e-15));
        CHECK(close(term_coeff(op, 0, 1, p, q, t), cplx{0.0, 0.0}, 0.0));
        CHECK(close(term_coeff(op, 0, 0, p, q, t), cplx{0.0, 0.0}, 0.0));
    }
}

TEST_CASE("scalar-potential gauge generator picks up the force term") {
    PhysicalConstants consts;
    consts.hbar = 0.7;
    const auto med = medium_with(0.5, 2.0, 1.0);
    const auto drive = drive_with({0.8, -0.3}, 1.4);
    const auto op =
        extend_hamiltonian(build_kanai(med, phi_gauge_potentials(drive), consts), consts);

    CHECK(op.terms.size() == 3);
    CHECK(term_orders(op) == std::set<std::pair<int, int>>{{1, 0}, {2, 0}, {0, 1}});
    CHECK(op.max_dq() == 2);
    CHECK(op.max_dp() == 1);

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 8; ++trial) {
        const double p = u(rng), q = u(rng), t = 0.5 * std::abs(u(rng));
        const double damp = std::exp(-med.alpha * t);
        CHECK(close(term_coeff(op, 1, 0, p, q, t), -I_UNIT * consts.hbar * damp * p / med.m,
                    1e-15));
        CHECK(close(term_coeff(op, 2, 0, p, q, t),
                    cplx{-consts.hbar * consts.hbar * damp / (2.0 * med.m), 0.0}, 1e-15));
        const cplx force = -I_UNIT * consts.hbar * std::exp(med.alpha * t) * med.e_charge *
                           drive.field(t);
        CHECK(close(term_coeff(op, 0, 1, p, q, t), force, 1e-14));
        CHECK(close(term_coeff(op, 0, 0, p, q, t), cplx{0.0, 0.0}, 0.0));
    }
}

TEST_CASE("real-cosine drive enters the force term through its real part") {
    PhysicalConstants consts;
    const auto med = medium_with(1.0, 1.0, 0.5);
    const auto drive = drive_with({1.0, 0.0}, 2.0, DriveMode::real_cosine);
    const auto op =
        extend_hamiltonian(build_kanai(med, phi_gauge_potentials(drive), consts), consts);
    const double t = 0.9;
    const cplx expected = -I_UNIT * std::exp(med.alpha * t) * std::cos(drive.omega * t);
    CHECK(close(term_coeff(op, 0, 1, 0.0, 0.0, t), expected, 1e-15));
}

TEST_CASE("damped hamiltonian classical values") {
    PhysicalConstants consts;
    const auto med = medium_with(1.0, 1.0, 1.0);
    const auto drive = drive_with({1.0, 0.0}, 1.0);

    const auto h_free = build_kanai(medium_with(2.0, 1.0, 0.0), no_potentials(), consts);
    CHECK(close(h_free.eval(0.6, -1.0, 3.0), cplx{0.6 * 0.6 / 4.0, 0.0}, 1e-16));

    const auto h_a = build_kanai(med, a_gauge_potentials(med, drive, consts), consts);
    const cplx shifted = 0.3 + kI1;
    CHECK(close(h_a.eval(0.3, 2.0, 1.0), std::exp(-1.0) * shifted * shifted / 2.0, 1e-14));

    const auto h_phi = build_kanai(med, phi_gauge_potentials(drive), consts);
    const cplx expected = std::exp(-1.0) * 0.3 * 0.3 / 2.0 -
                          std::exp(1.0) * 2.0 * drive.field(1.0);
    CHECK(close(h_phi.eval(0.3, 2.0, 1.0), expected, 1e-14));
}

TEST_CASE("vector potential accumulates the drive history") {
    PhysicalConstants consts;
    const auto med = medium_with(1.0, 1.0, 1.0);
    const auto drive = drive_with({1.0, 0.0}, 1.0);
    CHECK(std::abs(vector_potential(0.0, med, drive, consts)) == 0.0);
    CHECK(close(vector_potential(1.0, med, drive, consts), -kI1, 1e-14));

    // static drive: I(t) = (e^{alpha t} - 1)/alpha
    PhysicalConstants consts2;
    consts2.c = 2.0;
    const auto dc = drive_with({1.0, 0.0}, 0.0);
    CHECK(close(vector_potential(1.0, med, dc, consts2), cplx{-2.0 * (std::exp(1.0) - 1.0), 0.0},
                1e-13));
}

TEST_CASE("potential structure is enforced by tag") {
    PhysicalConstants consts;
    const auto med = medium_with(1.0, 1.0, 1.0);
    const auto drive = drive_with({1.0, 0.0}, 1.0);

    const auto pa = a_gauge_potentials(med, drive, consts);
    CHECK(!pa.phi);
    CHECK(close(pa.a(0.0, 1.0), -consts.c * kI1, 1e-14));
    CHECK(close(pa.a(3.5, 1.0), pa.a(-2.0, 1.0), 0.0));

    const auto pp = phi_gauge_potentials(drive);
    CHECK(!pp.a);
    CHECK(close(pp.phi(1.5, 0.7), -1.5 * drive.field(0.7), 1e-15));
    CHECK(close(pp.dphi_dq(0.0, 0.7), -drive.field(0.7), 1e-15));

    GaugePotentials bad_a;
    bad_a.tag = PotentialTag::a_gauge;
    bad_a.phi = [](double, double) { return cplx{1.0, 0.0}; };
    CHECK_THROWS_AS(bad_a.validate(), std::invalid_argument);

    GaugePotentials bad_phi;
    bad_phi.tag = PotentialTag::phi_gauge;
    bad_phi.a = [](double, double) { return cplx{1.0, 0.0}; };
    CHECK_THROWS_AS(bad_phi.validate(), std::invalid_argument);

    GaugePotentials curved;
    curved.tag = PotentialTag::phi_gauge;
    curved.phi = [](double q, double) { return cplx{q * q, 0.0}; };
    CHECK_THROWS_AS(curved.validate(), std::invalid_argument);

    curved.tag = PotentialTag::custom;
    CHECK_NOTHROW(curved.validate());
}

TEST_CASE("generator is linear in the hamiltonian") {
    PhysicalConstants consts;

    ClassicalHamiltonian kinetic;
    kinetic.pcoeff[2].value = [](double, double) { return cplx{0.25, 0.0}; };

    ClassicalHamiltonian potential;
    potential.pcoeff[0].value = [](double q, double t) { return cplx{q * std::sin(t), 0.0}; };
    potential.pcoeff[0].dq = [](double, double t) { return cplx{std::sin(t), 0.0}; };

    ClassicalHamiltonian combined;
    combined.pcoeff[2] = kinetic.pcoeff[2];
    combined.pcoeff[0] = potential.pcoeff[0];

    const auto op1 = extend_hamiltonian(kinetic, consts);
    const auto op2 = extend_hamiltonian(potential, consts);
    const auto op12 = extend_hamiltonian(combined, consts);

    std::mt19937 rng(47);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double p = u(rng), q = u(rng), t = std::abs(u(rng));
        for (auto [a, b] : {std::pair{1, 0}, {2, 0}, {0, 1}, {0, 2}, {0, 0}}) {
            const cplx lhs = term_coeff(op12, a, b, p, q, t);
            const cplx rhs = term_coeff(op1, a, b, p, q, t) + term_coeff(op2, a, b, p, q, t);
            CHECK(close(lhs, rhs, 1e-15));
        }
    }
}

TEST_CASE("plane wave is a pointwise eigenrow of the generator") {
    PhysicalConstants consts;
    const auto med = medium_with(1.0, 1.0, 0.0);
    auto grid = make_grid({0.0, 2.0 * M_PI, 0.0, 2.0 * M_PI, 32, 32});
    StateFunction chi = make_state(grid);
    for (int ip = 0; ip < 32; ++ip)
        for (int iq = 0; iq < 32; ++iq)
            chi.at(ip, iq) = std::exp(I_UNIT * (2.0 * grid->q(iq) + 3.0 * grid->p(ip)));

    const auto op_free =
        extend_hamiltonian(build_kanai(med, no_potentials(), consts), consts);
    const StateFunction out = apply_operator(op_free, chi, 0.0);
    // (1,0): -i hbar p/m (i k_q); (2,0): -hbar^2/2m (i k_q)^2, k_q = 2
    double worst = 0.0;
    for (int ip = 0; ip < 32; ++ip) {
        const cplx eig = cplx{2.0 * grid->p(ip) + 2.0, 0.0};
        for (int iq = 0; iq < 32; ++iq)
            worst = std::max(worst, std::abs(out.at(ip, iq) - eig * chi.at(ip, iq)));
    }
    CHECK(worst < 1e-11);

    const auto drive = drive_with({1.0, 0.0}, 1.0);
    const auto med_damped = medium_with(1.0, 1.0, 1.0);
    const auto op_phi = extend_hamiltonian(
        build_kanai(med_damped, phi_gauge_potentials(drive), consts), consts);
    const double t = 0.4;
    const StateFunction out_phi = apply_operator(op_phi, chi, t);
    const double damp = std::exp(-t);
    worst = 0.0;
    for (int ip = 0; ip < 32; ++ip) {
        const cplx eig = damp * (2.0 * grid->p(ip) + 2.0) +
                         3.0 * std::exp(t) * drive.field(t);
        for (int iq = 0; iq < 32; ++iq)
            worst = std::max(worst, std::abs(out_phi.at(ip, iq) - eig * chi.at(ip, iq)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("operator application matches manual term composition") {
    PhysicalConstants consts;
    const auto med = medium_with(0.8, 1.5, 0.6);
    const auto drive = drive_with({0.5, 0.2}, 1.1);
    const auto op =
        extend_hamiltonian(build_kanai(med, phi_gauge_potentials(drive), consts), consts);

    auto grid = make_grid({-8.0, 8.0, -8.0, 8.0, 32, 32});
    StateFunction chi = make_state(grid);
    for (int ip = 0; ip < 32; ++ip)
        for (int iq = 0; iq < 32; ++iq) {
            const double q = grid->q(iq), p = grid->p(ip);
            chi.at(ip, iq) = std::exp(-0.5 * (q * q + p * p)) * std::exp(I_UNIT * (0.3 * q));
        }

    const double t = 0.7;
    const StateFunction fast = apply_operator(op, chi, t);

    StateFunction manual = make_state(grid);
    for (const OperatorTerm& term : op.terms) {
        StateFunction d = chi;
        if (term.dp_order > 0) d = d_dp(d, term.dp_order);
        if (term.dq_order > 0) d = d_dq(d, term.dq_order);
        for (int ip = 0; ip < 32; ++ip)
            for (int iq = 0; iq < 32; ++iq)
                manual.at(ip, iq) += term.coeff(grid->p(ip), grid->q(iq), t) * d.at(ip, iq);
    }

    double worst = 0.0;
    for (int ip = 0; ip < 32; ++ip)
        for (int iq = 0; iq < 32; ++iq)
            worst = std::max(worst, std::abs(fast.at(ip, iq) - manual.at(ip, iq)));
    CHECK(worst < 1e-13 * max_abs(chi));
}
