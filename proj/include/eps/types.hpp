#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace eps {

using cplx = std::complex<double>;

inline constexpr cplx I_UNIT{0.0, 1.0};

struct PhysicalConstants {
    double hbar = 1.0;
    double c = 1.0;

    void validate() const {
        if (!(hbar > 0.0)) throw std::invalid_argument("constants.hbar must be > 0");
        if (!(c > 0.0)) throw std::invalid_argument("constants.c must be > 0");
    }
};

// Damped carrier medium: classically m q'' + m alpha q' = force.
struct ChargedParticleMedium {
    double m = 1.0;
    double e_charge = 1.0;
    double alpha = 1.0;    // friction rate, >= 0
    int n_particles = 1;   // carriers contributing to the current

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("medium.m must be > 0");
        if (e_charge == 0.0) throw std::invalid_argument("medium.e_charge must be nonzero");
        if (!(alpha >= 0.0)) throw std::invalid_argument("medium.alpha must be >= 0");
        if (n_particles < 1) throw std::invalid_argument("medium.n_particles must be >= 1");
    }
};

enum class DriveMode {
    phasor,      // E(t) = E0 exp(i omega t), complex analytic signal
    real_cosine  // E(t) = Re(E0 exp(i omega t))
};

struct DriveSpec {
    cplx e0{1.0, 0.0};
    double omega = 1.0;
    DriveMode mode = DriveMode::phasor;

    cplx field(double t) const {
        const cplx ph = e0 * std::exp(I_UNIT * (omega * t));
        return mode == DriveMode::phasor ? ph : cplx{ph.real(), 0.0};
    }

    void validate() const {
        if (!(omega >= 0.0)) throw std::invalid_argument("drive.omega must be >= 0");
    }
};

enum class GaugeTag { a_gauge, phi_gauge };

inline std::string to_string(GaugeTag g) { return g == GaugeTag::a_gauge ? "a" : "phi"; }

}  // namespace eps
