#pragma once

#include <array>
#include <functional>
#include <vector>

#include "eps/analytic.hpp"
#include "eps/grid.hpp"
#include "eps/types.hpp"

namespace eps {

using CoeffFn = std::function<cplx(double p, double q, double t)>;
using FieldFn = std::function<cplx(double q, double t)>;

// Potential pair generating the drive field. a_gauge: phi = 0, A = A(t);
// phi_gauge: A = 0, phi linear in q; custom: any supported combination.
enum class PotentialTag { a_gauge, phi_gauge, custom };

struct GaugePotentials {
    FieldFn a;        // vector potential A(q,t); q-independent in this family
    FieldFn phi;      // scalar potential phi(q,t)
    FieldFn dphi_dq;  // analytic q-gradient of phi (null means 0)
    PotentialTag tag = PotentialTag::custom;

    // Spot-checks the tag's structural constraints on a few sample points.
    void validate() const;
};

GaugePotentials a_gauge_potentials(const ChargedParticleMedium& medium, const DriveSpec& drive,
                                   const PhysicalConstants& constants);
GaugePotentials phi_gauge_potentials(const DriveSpec& drive);

// One p-power coefficient c(q,t) with its analytic q-derivatives.
struct CoefficientFn {
    FieldFn value;  // null means identically 0
    FieldFn dq;
    FieldFn dq2;
};

// H(p,q,t) = sum_k pcoeff[k](q,t) p^k, quadratic in p, q-derivatives
// terminating at second order.
struct ClassicalHamiltonian {
    std::array<CoefficientFn, 3> pcoeff;

    cplx eval(double p, double q, double t) const;
    bool has(int k) const { return static_cast<bool>(pcoeff[k].value); }
    bool has_dq(int k) const { return static_cast<bool>(pcoeff[k].dq); }
    bool has_dq2(int k) const { return static_cast<bool>(pcoeff[k].dq2); }
};

// One term coeff(p,q,t) * d^a/dq^a d^b/dp^b of the extended generator.
struct OperatorTerm {
    int dq_order = 0;
    int dp_order = 0;
    CoeffFn coeff;
};

inline constexpr int kExactSeries = -1;

struct ExtendedHamiltonianOp {
    std::vector<OperatorTerm> terms;
    int truncation_order = kExactSeries;  // kExactSeries when the list is exact

    int max_dq() const;
    int max_dp() const;
};

// Difference form H(p + pi_q, q) - H(p, q + pi_p) expanded into the finite
// Taylor term list: q-sector terms carry (-i hbar)^n/n! d^nH/dp^n, p-sector
// terms carry -(-i hbar)^n/n! d^nH/dq^n.
ExtendedHamiltonianOp extend_hamiltonian(const ClassicalHamiltonian& h,
                                         const PhysicalConstants& constants);

// H = exp(-alpha t)/(2m) [p - (e/c)A]^2 + exp(alpha t) e phi.
ClassicalHamiltonian build_kanai(const ChargedParticleMedium& medium,
                                 const GaugePotentials& potentials,
                                 const PhysicalConstants& constants);

// A(t) = -c I(t), I(t) = int_0^t exp(alpha s) E(s) ds.
cplx vector_potential(double t, const ChargedParticleMedium& medium, const DriveSpec& drive,
                      const PhysicalConstants& constants);

// Applies the term list spectrally: sum coeff(p,q,t) d^a_q d^b_p chi.
StateFunction apply_operator(const ExtendedHamiltonianOp& op, const StateFunction& chi,
                             double t);

// Sum of coefficients of all terms with the given derivative orders,
// evaluated at (p,q,t); robust to term ordering and splitting.
cplx term_coeff(const ExtendedHamiltonianOp& op, int dq_order, int dp_order, double p, double q,
                double t);

}  // namespace eps
