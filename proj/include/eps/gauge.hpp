#pragma once

#include <functional>

#include "eps/grid.hpp"
#include "eps/hamiltonians.hpp"
#include "eps/types.hpp"

namespace eps {

using RealFieldFn = std::function<double(double x, double t)>;

// Separable gauge pair f(q,t), g(p,t) with analytic derivatives. Second
// derivatives are optional; when absent they are taken by central differences
// of the supplied gradients (only the operator transform needs them).
struct GaugeFunctions {
    RealFieldFn f;      // (q, t)
    RealFieldFn df_dq;
    RealFieldFn df_dt;
    RealFieldFn d2f_dq2;  // optional
    RealFieldFn g;      // (p, t)
    RealFieldFn dg_dp;
    RealFieldFn dg_dt;
    RealFieldFn d2g_dp2;  // optional

    bool is_identity = false;

    static GaugeFunctions identity();

    double f_qq(double q, double t) const;
    double g_pp(double p, double t) const;
};

// Validates the supplied gradients against central differences (tol 1e-8 on
// unit-scale probes) and returns the pair; throws on mismatch or null fields.
GaugeFunctions make_gauge_functions(GaugeFunctions gf);

// chi'(p,q,t) = exp(-i e/(hbar c) [f(q,t) - g(p,t)]) chi(p,q,t) at t = chi.time.
StateFunction apply_gauge(const StateFunction& chi, const GaugeFunctions& gf,
                          const PhysicalConstants& constants, double charge);

// Rewrites the term list under the canonical shift pi_q -> pi_q - (e/c) df_dq,
// pi_p -> pi_p + (e/c) dg_dp, and appends the -(e/c)(df_dt - dg_dt) scalar.
// The paired state map is apply_gauge with (-f, -g).
ExtendedHamiltonianOp transform_hamiltonian(const ExtendedHamiltonianOp& op,
                                            const GaugeFunctions& gf,
                                            const PhysicalConstants& constants, double charge);

struct EpsPoint {
    double p = 0.0;
    double q = 0.0;
    double pi_p = 0.0;
    double pi_q = 0.0;
};

// Classical counterpart of the gauge map: shifts only the extended momenta.
EpsPoint canonical_shift(const EpsPoint& point, const GaugeFunctions& gf, double t,
                         const PhysicalConstants& constants, double charge);

}  // namespace eps
