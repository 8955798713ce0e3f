#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "eps/types.hpp"

namespace eps {

// Periodic phase-space box [q_min,q_max) x [p_min,p_max), power-of-two sizes.
struct GridSpec {
    double q_min = -10.0;
    double q_max = 10.0;
    double p_min = -10.0;
    double p_max = 10.0;
    int n_q = 256;
    int n_p = 256;

    double lq() const { return q_max - q_min; }
    double lp() const { return p_max - p_min; }
    double dq() const { return lq() / n_q; }
    double dp() const { return lp() / n_p; }
    void validate() const;
};

// Immutable grid with precomputed transform tables.
// Wavenumbers are FFT-ordered: k[i] = 2*pi*s/L, s = i for i < n/2, i - n after.
class Grid {
  public:
    explicit Grid(const GridSpec& spec);

    int nq() const { return spec_.n_q; }
    int np() const { return spec_.n_p; }
    double dq() const { return spec_.dq(); }
    double dp() const { return spec_.dp(); }
    double q(int i) const { return spec_.q_min + i * dq(); }
    double p(int i) const { return spec_.p_min + i * dp(); }
    double kq(int i) const { return kq_[i]; }
    double kp(int i) const { return kp_[i]; }
    const GridSpec& spec() const { return spec_; }

    // In-place length-nq / length-np transforms on contiguous buffers.
    // Forward: X[k] = sum_j x[j] exp(-2*pi*i*j*k/n); inverse carries the 1/n.
    void fft_q(cplx* buf, bool inverse) const { fft(buf, planq_, inverse); }
    void fft_p(cplx* buf, bool inverse) const { fft(buf, planp_, inverse); }

  private:
    struct Plan {
        int n = 0;
        std::vector<int> rev;
        std::vector<cplx> w_fwd;  // exp(-2*pi*i*j/n), j < n/2
        std::vector<cplx> w_inv;
    };
    static Plan make_plan(int n);
    static void fft(cplx* buf, const Plan& plan, bool inverse);

    GridSpec spec_;
    std::vector<double> kq_, kp_;
    Plan planq_, planp_;
};

std::shared_ptr<const Grid> make_grid(const GridSpec& spec);

// chi sampled on the grid, row-major: values[ip * nq + iq].
struct StateFunction {
    std::shared_ptr<const Grid> grid;
    std::vector<cplx> values;
    double time = 0.0;

    cplx& at(int ip, int iq) { return values[static_cast<size_t>(ip) * grid->nq() + iq]; }
    const cplx& at(int ip, int iq) const {
        return values[static_cast<size_t>(ip) * grid->nq() + iq];
    }
};

StateFunction make_state(std::shared_ptr<const Grid> grid);
StateFunction sample(std::shared_ptr<const Grid> grid,
                     const std::function<cplx(double p, double q)>& f);

// Spectral partial derivatives; odd orders zero the Nyquist bin.
StateFunction d_dq(const StateFunction& chi, int order = 1);
StateFunction d_dp(const StateFunction& chi, int order = 1);

// Full q-axis (row) and p-axis (column) transforms of a whole field.
void fft_rows_q(const Grid& g, std::vector<cplx>& values, bool inverse);
void fft_cols_p(const Grid& g, std::vector<cplx>& values, bool inverse);

// Spectral translation along p: out(p, q) = in(p - delta, q). A complex
// delta continues the state analytically off the real p-axis.
void translate_p_values(const Grid& g, std::vector<cplx>& values, cplx delta);
StateFunction translate_p(const StateFunction& chi, cplx delta);

// Rectangle rule, exact for smooth periodic integrands. Fixed summation order.
cplx integrate_phase_space(const StateFunction& chi);
cplx integrate_phase_space(const StateFunction& chi,
                           const std::function<cplx(double p, double q)>& weight);

double max_abs(const StateFunction& chi);
bool all_finite(const StateFunction& chi);

}  // namespace eps
