#include "eps/grid.hpp"

#include <cmath>
#include <numbers>

namespace eps {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> make_wavenumbers(int n, double length) {
    std::vector<double> k(n);
    const double base = 2.0 * std::numbers::pi / length;
    for (int i = 0; i < n; ++i) {
        const int s = i < n / 2 ? i : i - n;
        k[i] = base * s;
    }
    return k;
}

}  // namespace

void GridSpec::validate() const {
    if (!(q_max > q_min)) throw std::invalid_argument("grid.q_max must exceed grid.q_min");
    if (!(p_max > p_min)) throw std::invalid_argument("grid.p_max must exceed grid.p_min");
    if (n_q < 8 || !power_of_two(n_q))
        throw std::invalid_argument("grid.n_q must be a power of two, n_q >= 8");
    if (n_p < 8 || !power_of_two(n_p))
        throw std::invalid_argument("grid.n_p must be a power of two, n_p >= 8");
}

Grid::Plan Grid::make_plan(int n) {
    Plan plan;
    plan.n = n;
    plan.rev.resize(n);
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 1, v = i; b < n; b <<= 1, v >>= 1) r = (r << 1) | (v & 1);
        plan.rev[i] = r;
    }
    plan.w_fwd.resize(n / 2);
    plan.w_inv.resize(n / 2);
    for (int j = 0; j < n / 2; ++j) {
        const double ang = -2.0 * std::numbers::pi * j / n;
        plan.w_fwd[j] = {std::cos(ang), std::sin(ang)};
        plan.w_inv[j] = std::conj(plan.w_fwd[j]);
    }
    return plan;
}

void Grid::fft(cplx* buf, const Plan& plan, bool inverse) {
    const int n = plan.n;
    for (int i = 0; i < n; ++i)
        if (i < plan.rev[i]) std::swap(buf[i], buf[plan.rev[i]]);
    const std::vector<cplx>& w = inverse ? plan.w_inv : plan.w_fwd;
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len / 2;
        const int stride = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < half; ++j) {
                const cplx v = buf[i + j + half] * w[static_cast<size_t>(j) * stride];
                const cplx u = buf[i + j];
                buf[i + j] = u + v;
                buf[i + j + half] = u - v;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / n;
        for (int i = 0; i < n; ++i) buf[i] *= s;
    }
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    kq_ = make_wavenumbers(spec_.n_q, spec_.lq());
    kp_ = make_wavenumbers(spec_.n_p, spec_.lp());
    planq_ = make_plan(spec_.n_q);
    planp_ = make_plan(spec_.n_p);
}

std::shared_ptr<const Grid> make_grid(const GridSpec& spec) {
    return std::make_shared<const Grid>(spec);
}

StateFunction make_state(std::shared_ptr<const Grid> grid) {
    StateFunction s;
    s.values.assign(static_cast<size_t>(grid->np()) * grid->nq(), cplx{0.0, 0.0});
    s.grid = std::move(grid);
    return s;
}

StateFunction sample(std::shared_ptr<const Grid> grid,
                     const std::function<cplx(double, double)>& f) {
    StateFunction s = make_state(std::move(grid));
    const Grid& g = *s.grid;
    for (int ip = 0; ip < g.np(); ++ip) {
        const double p = g.p(ip);
        for (int iq = 0; iq < g.nq(); ++iq) s.at(ip, iq) = f(p, g.q(iq));
    }
    return s;
}

void fft_rows_q(const Grid& g, std::vector<cplx>& values, bool inverse) {
    for (int ip = 0; ip < g.np(); ++ip)
        g.fft_q(values.data() + static_cast<size_t>(ip) * g.nq(), inverse);
}

void fft_cols_p(const Grid& g, std::vector<cplx>& values, bool inverse) {
    const int nq = g.nq(), np = g.np();
    std::vector<cplx> col(np);
    for (int iq = 0; iq < nq; ++iq) {
        for (int ip = 0; ip < np; ++ip) col[ip] = values[static_cast<size_t>(ip) * nq + iq];
        g.fft_p(col.data(), inverse);
        for (int ip = 0; ip < np; ++ip) values[static_cast<size_t>(ip) * nq + iq] = col[ip];
    }
}

void translate_p_values(const Grid& g, std::vector<cplx>& values, cplx delta) {
    if (delta == cplx{0.0, 0.0}) return;
    fft_cols_p(g, values, false);
    const int nq = g.nq(), np = g.np();
    for (int ip = 0; ip < np; ++ip) {
        const cplx f = std::exp(cplx{0.0, -1.0} * g.kp(ip) * delta);
        cplx* row = values.data() + static_cast<size_t>(ip) * nq;
        for (int iq = 0; iq < nq; ++iq) row[iq] *= f;
    }
    fft_cols_p(g, values, true);
}

StateFunction translate_p(const StateFunction& chi, cplx delta) {
    StateFunction out = chi;
    translate_p_values(*out.grid, out.values, delta);
    return out;
}

namespace {

// (i k)^order with the Nyquist bin zeroed for odd orders, where the
// signed wavenumber has no consistent sign.
cplx deriv_factor(double k, int order, bool nyquist) {
    if (nyquist && (order % 2 != 0)) return {0.0, 0.0};
    return std::pow(cplx{0.0, k}, order);
}

}  // namespace

StateFunction d_dq(const StateFunction& chi, int order) {
    if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
    const Grid& g = *chi.grid;
    StateFunction out = chi;
    fft_rows_q(g, out.values, false);
    std::vector<cplx> fac(g.nq());
    for (int i = 0; i < g.nq(); ++i) fac[i] = deriv_factor(g.kq(i), order, i == g.nq() / 2);
    for (int ip = 0; ip < g.np(); ++ip)
        for (int iq = 0; iq < g.nq(); ++iq) out.at(ip, iq) *= fac[iq];
    fft_rows_q(g, out.values, true);
    return out;
}

StateFunction d_dp(const StateFunction& chi, int order) {
    if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
    const Grid& g = *chi.grid;
    StateFunction out = chi;
    fft_cols_p(g, out.values, false);
    std::vector<cplx> fac(g.np());
    for (int i = 0; i < g.np(); ++i) fac[i] = deriv_factor(g.kp(i), order, i == g.np() / 2);
    for (int ip = 0; ip < g.np(); ++ip) {
        const cplx f = fac[ip];
        for (int iq = 0; iq < g.nq(); ++iq) out.at(ip, iq) *= f;
    }
    fft_cols_p(g, out.values, true);
    return out;
}

namespace {

cplx kahan_sum(const std::vector<cplx>& v) {
    cplx sum{0.0, 0.0}, comp{0.0, 0.0};
    for (const cplx& x : v) {
        const cplx y = x - comp;
        const cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

cplx integrate_phase_space(const StateFunction& chi) {
    return kahan_sum(chi.values) * (chi.grid->dp() * chi.grid->dq());
}

cplx integrate_phase_space(const StateFunction& chi,
                           const std::function<cplx(double, double)>& weight) {
    const Grid& g = *chi.grid;
    std::vector<cplx> w(chi.values.size());
    for (int ip = 0; ip < g.np(); ++ip) {
        const double p = g.p(ip);
        for (int iq = 0; iq < g.nq(); ++iq)
            w[static_cast<size_t>(ip) * g.nq() + iq] = weight(p, g.q(iq)) * chi.at(ip, iq);
    }
    return kahan_sum(w) * (g.dp() * g.dq());
}

double max_abs(const StateFunction& chi) {
    double m = 0.0;
    for (const cplx& x : chi.values) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(const StateFunction& chi) {
    for (const cplx& x : chi.values)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

}  // namespace eps
