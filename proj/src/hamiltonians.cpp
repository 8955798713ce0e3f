#include "eps/hamiltonians.hpp"

#include <cmath>
#include <map>

namespace eps {

namespace {

constexpr double kSampleT[] = {0.0, 0.3, 1.7};
constexpr double kSampleQ[] = {-2.0, 0.0, 1.0, 3.5};

cplx eval_or_zero(const FieldFn& f, double q, double t) { return f ? f(q, t) : cplx{0.0, 0.0}; }

}  // namespace

void GaugePotentials::validate() const {
    if (tag == PotentialTag::custom) return;
    for (double t : kSampleT) {
        if (tag == PotentialTag::a_gauge) {
            for (double q : kSampleQ) {
                if (std::abs(eval_or_zero(phi, q, t)) > 1e-12)
                    throw std::invalid_argument("a_gauge potentials require phi = 0");
                if (std::abs(eval_or_zero(a, q, t) - eval_or_zero(a, 0.0, t)) > 1e-12)
                    throw std::invalid_argument("a_gauge potentials require q-independent A");
            }
        } else {
            for (double q : kSampleQ) {
                if (std::abs(eval_or_zero(a, q, t)) > 1e-12)
                    throw std::invalid_argument("phi_gauge potentials require A = 0");
            }
            // second q-difference of a q-linear phi vanishes
            const cplx d2 = eval_or_zero(phi, 2.0, t) - 2.0 * eval_or_zero(phi, 1.0, t) +
                            eval_or_zero(phi, 0.0, t);
            if (std::abs(d2) > 1e-10)
                throw std::invalid_argument("phi_gauge potentials require phi linear in q");
        }
    }
}

GaugePotentials a_gauge_potentials(const ChargedParticleMedium& medium, const DriveSpec& drive,
                                   const PhysicalConstants& constants) {
    GaugePotentials pots;
    pots.tag = PotentialTag::a_gauge;
    pots.a = [medium, drive, constants](double, double t) {
        return vector_potential(t, medium, drive, constants);
    };
    pots.phi = nullptr;
    pots.dphi_dq = nullptr;
    pots.validate();
    return pots;
}

GaugePotentials phi_gauge_potentials(const DriveSpec& drive) {
    GaugePotentials pots;
    pots.tag = PotentialTag::phi_gauge;
    pots.a = nullptr;
    pots.phi = [drive](double q, double t) { return -q * drive.field(t); };
    pots.dphi_dq = [drive](double, double t) { return -drive.field(t); };
    pots.validate();
    return pots;
}

cplx ClassicalHamiltonian::eval(double p, double q, double t) const {
    cplx v{0.0, 0.0};
    double pk = 1.0;
    for (int k = 0; k <= 2; ++k) {
        if (pcoeff[k].value) v += pcoeff[k].value(q, t) * pk;
        pk *= p;
    }
    return v;
}

int ExtendedHamiltonianOp::max_dq() const {
    int m = 0;
    for (const auto& t : terms) m = std::max(m, t.dq_order);
    return m;
}

int ExtendedHamiltonianOp::max_dp() const {
    int m = 0;
    for (const auto& t : terms) m = std::max(m, t.dp_order);
    return m;
}

ExtendedHamiltonianOp extend_hamiltonian(const ClassicalHamiltonian& h,
                                         const PhysicalConstants& constants) {
    const double hbar = constants.hbar;
    ExtendedHamiltonianOp op;

    // q-sector: (-i hbar)^n / n! * d^nH/dp^n, n = 1, 2
    if (h.has(1) || h.has(2)) {
        const CoefficientFn c1 = h.pcoeff[1], c2 = h.pcoeff[2];
        op.terms.push_back(
            {1, 0, [c1, c2, hbar](double p, double q, double t) {
                 cplx dh{0.0, 0.0};
                 if (c1.value) dh += c1.value(q, t);
                 if (c2.value) dh += 2.0 * p * c2.value(q, t);
                 return -I_UNIT * hbar * dh;
             }});
    }
    if (h.has(2)) {
        const CoefficientFn c2 = h.pcoeff[2];
        op.terms.push_back({2, 0, [c2, hbar](double, double q, double t) {
                                return -hbar * hbar * c2.value(q, t);
                            }});
    }

    // p-sector: -(-i hbar)^n / n! * d^nH/dq^n, n = 1, 2
    if (h.has_dq(0) || h.has_dq(1) || h.has_dq(2)) {
        const auto c = h.pcoeff;
        op.terms.push_back(
            {0, 1, [c, hbar](double p, double q, double t) {
                 cplx dh{0.0, 0.0};
                 double pk = 1.0;
                 for (int k = 0; k <= 2; ++k) {
                     if (c[k].dq) dh += c[k].dq(q, t) * pk;
                     pk *= p;
                 }
                 return I_UNIT * hbar * dh;
             }});
    }
    if (h.has_dq2(0) || h.has_dq2(1) || h.has_dq2(2)) {
        const auto c = h.pcoeff;
        op.terms.push_back(
            {0, 2, [c, hbar](double p, double q, double t) {
                 cplx dh{0.0, 0.0};
                 double pk = 1.0;
                 for (int k = 0; k <= 2; ++k) {
                     if (c[k].dq2) dh += c[k].dq2(q, t) * pk;
                     pk *= p;
                 }
                 return 0.5 * hbar * hbar * dh;
             }});
    }
    return op;
}

ClassicalHamiltonian build_kanai(const ChargedParticleMedium& medium,
                                 const GaugePotentials& potentials,
                                 const PhysicalConstants& constants) {
    potentials.validate();
    const double alpha = medium.alpha, m = medium.m, e = medium.e_charge;
    const double ec = e / constants.c;
    const FieldFn a = potentials.a, phi = potentials.phi, dphi = potentials.dphi_dq;

    ClassicalHamiltonian h;
    h.pcoeff[2].value = [alpha, m](double, double t) {
        return cplx{std::exp(-alpha * t) / (2.0 * m), 0.0};
    };
    if (a) {
        h.pcoeff[1].value = [alpha, m, ec, a](double q, double t) {
            return -std::exp(-alpha * t) / m * ec * a(q, t);
        };
    }
    if (a || phi) {
        h.pcoeff[0].value = [alpha, m, e, ec, a, phi](double q, double t) {
            cplx v{0.0, 0.0};
            if (a) {
                const cplx av = a(q, t);
                v += std::exp(-alpha * t) / (2.0 * m) * ec * ec * av * av;
            }
            if (phi) v += std::exp(alpha * t) * e * phi(q, t);
            return v;
        };
    }
    if (dphi) {
        h.pcoeff[0].dq = [alpha, e, dphi](double q, double t) {
            return std::exp(alpha * t) * e * dphi(q, t);
        };
    }
    return h;
}

cplx vector_potential(double t, const ChargedParticleMedium& medium, const DriveSpec& drive,
                      const PhysicalConstants& constants) {
    CharacteristicMap map{GaugeTag::a_gauge, medium, drive};
    return -constants.c * map.I(t);
}

StateFunction apply_operator(const ExtendedHamiltonianOp& op, const StateFunction& chi,
                             double t) {
    const Grid& g = *chi.grid;
    StateFunction out = make_state(chi.grid);
    out.time = chi.time;

    // cache spectral derivatives by (a, b)
    std::map<std::pair<int, int>, StateFunction> derivs;
    for (const OperatorTerm& term : op.terms) {
        const auto key = std::make_pair(term.dq_order, term.dp_order);
        auto it = derivs.find(key);
        if (it == derivs.end()) {
            StateFunction d = chi;
            if (term.dp_order > 0) d = d_dp(d, term.dp_order);
            if (term.dq_order > 0) d = d_dq(d, term.dq_order);
            it = derivs.emplace(key, std::move(d)).first;
        }
        const StateFunction& d = it->second;
        for (int ip = 0; ip < g.np(); ++ip) {
            const double p = g.p(ip);
            for (int iq = 0; iq < g.nq(); ++iq)
                out.at(ip, iq) += term.coeff(p, g.q(iq), t) * d.at(ip, iq);
        }
    }
    return out;
}

cplx term_coeff(const ExtendedHamiltonianOp& op, int dq_order, int dp_order, double p, double q,
                double t) {
    cplx sum{0.0, 0.0};
    for (const OperatorTerm& term : op.terms)
        if (term.dq_order == dq_order && term.dp_order == dp_order) sum += term.coeff(p, q, t);
    return sum;
}

}  // namespace eps
