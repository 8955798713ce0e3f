#include "eps/gauge.hpp"

#include <cmath>

namespace eps {

namespace {

double central_diff(const RealFieldFn& f, double x, double t, bool in_x) {
    const double h = 1e-5 * std::max(1.0, std::abs(in_x ? x : t));
    if (in_x) return (f(x + h, t) - f(x - h, t)) / (2.0 * h);
    return (f(x, t + h) - f(x, t - h)) / (2.0 * h);
}

void check_gradient(const RealFieldFn& f, const RealFieldFn& df, bool in_x, const char* what) {
    constexpr double probes_x[] = {-1.1, 0.37, 2.3};
    constexpr double probes_t[] = {0.0, 0.53, 1.4};
    for (double x : probes_x) {
        for (double t : probes_t) {
            const double fd = central_diff(f, x, t, in_x);
            const double an = df(x, t);
            if (std::abs(an - fd) > 1e-8 * std::max(1.0, std::abs(an)))
                throw std::invalid_argument(std::string("gauge gradient mismatch: ") + what);
        }
    }
}

}  // namespace

GaugeFunctions GaugeFunctions::identity() {
    GaugeFunctions gf;
    auto zero = [](double, double) { return 0.0; };
    gf.f = gf.df_dq = gf.df_dt = gf.d2f_dq2 = zero;
    gf.g = gf.dg_dp = gf.dg_dt = gf.d2g_dp2 = zero;
    gf.is_identity = true;
    return gf;
}

double GaugeFunctions::f_qq(double q, double t) const {
    if (d2f_dq2) return d2f_dq2(q, t);
    return central_diff(df_dq, q, t, true);
}

double GaugeFunctions::g_pp(double p, double t) const {
    if (d2g_dp2) return d2g_dp2(p, t);
    return central_diff(dg_dp, p, t, true);
}

GaugeFunctions make_gauge_functions(GaugeFunctions gf) {
    if (!gf.f || !gf.df_dq || !gf.df_dt || !gf.g || !gf.dg_dp || !gf.dg_dt)
        throw std::invalid_argument("gauge functions require f, g and their derivatives");
    check_gradient(gf.f, gf.df_dq, true, "df_dq");
    check_gradient(gf.f, gf.df_dt, false, "df_dt");
    check_gradient(gf.g, gf.dg_dp, true, "dg_dp");
    check_gradient(gf.g, gf.dg_dt, false, "dg_dt");
    if (gf.d2f_dq2) check_gradient(gf.df_dq, gf.d2f_dq2, true, "d2f_dq2");
    if (gf.d2g_dp2) check_gradient(gf.dg_dp, gf.d2g_dp2, true, "d2g_dp2");
    return gf;
}

StateFunction apply_gauge(const StateFunction& chi, const GaugeFunctions& gf,
                          const PhysicalConstants& constants, double charge) {
    const Grid& g = *chi.grid;
    const double kappa = charge / (constants.hbar * constants.c);
    const double t = chi.time;
    StateFunction out = chi;
    std::vector<double> fq(g.nq());
    for (int iq = 0; iq < g.nq(); ++iq) fq[iq] = gf.f(g.q(iq), t);
    for (int ip = 0; ip < g.np(); ++ip) {
        const double gp = gf.g(g.p(ip), t);
        for (int iq = 0; iq < g.nq(); ++iq)
            out.at(ip, iq) *= std::exp(-I_UNIT * (kappa * (fq[iq] - gp)));
    }
    return out;
}

namespace {

struct Piece {
    int order;
    std::function<cplx(double x, double t)> mul;  // null means 1
};

std::vector<Piece> sector_pieces(int n, const RealFieldFn& grad,
                                 const std::function<double(double, double)>& grad2,
                                 double kappa, double sign) {
    // (d_x + i s kappa G)^n expanded, G = grad(x,t), s = sign
    std::vector<Piece> out;
    if (n == 0) {
        out.push_back({0, nullptr});
    } else if (n == 1) {
        out.push_back({1, nullptr});
        out.push_back({0, [grad, kappa, sign](double x, double t) {
                           return I_UNIT * (sign * kappa * grad(x, t));
                       }});
    } else if (n == 2) {
        out.push_back({2, nullptr});
        out.push_back({1, [grad, kappa, sign](double x, double t) {
                           return 2.0 * I_UNIT * (sign * kappa * grad(x, t));
                       }});
        out.push_back({0, [grad, grad2, kappa, sign](double x, double t) {
                           const double gv = grad(x, t);
                           return I_UNIT * (sign * kappa * grad2(x, t)) -
                                  kappa * kappa * gv * gv;
                       }});
    } else {
        throw std::invalid_argument("gauge transform supports derivative orders <= 2");
    }
    return out;
}

}  // namespace

ExtendedHamiltonianOp transform_hamiltonian(const ExtendedHamiltonianOp& op,
                                            const GaugeFunctions& gf,
                                            const PhysicalConstants& constants, double charge) {
    if (gf.is_identity) return op;
    const double kappa = charge / (constants.hbar * constants.c);
    const double ec = charge / constants.c;

    const auto f_qq = [gf](double q, double t) { return gf.f_qq(q, t); };
    const auto g_pp = [gf](double p, double t) { return gf.g_pp(p, t); };

    ExtendedHamiltonianOp out;
    out.truncation_order = op.truncation_order;
    for (const OperatorTerm& term : op.terms) {
        const auto qp = sector_pieces(term.dq_order, gf.df_dq, f_qq, kappa, -1.0);
        const auto pp = sector_pieces(term.dp_order, gf.dg_dp, g_pp, kappa, +1.0);
        for (const Piece& a : qp) {
            for (const Piece& b : pp) {
                const CoeffFn base = term.coeff;
                const auto qmul = a.mul, pmul = b.mul;
                out.terms.push_back(
                    {a.order, b.order, [base, qmul, pmul](double p, double q, double t) {
                         cplx v = base(p, q, t);
                         if (qmul) v *= qmul(q, t);
                         if (pmul) v *= pmul(p, t);
                         return v;
                     }});
            }
        }
    }
    const RealFieldFn ft = gf.df_dt, gt = gf.dg_dt;
    out.terms.push_back({0, 0, [ft, gt, ec](double p, double q, double t) {
                             return cplx{-ec * (ft(q, t) - gt(p, t)), 0.0};
                         }});
    return out;
}

EpsPoint canonical_shift(const EpsPoint& point, const GaugeFunctions& gf, double t,
                         const PhysicalConstants& constants, double charge) {
    const double ec = charge / constants.c;
    EpsPoint out = point;
    out.pi_q = point.pi_q - ec * gf.df_dq(point.q, t);
    out.pi_p = point.pi_p + ec * gf.dg_dp(point.p, t);
    return out;
}

}  // namespace eps
