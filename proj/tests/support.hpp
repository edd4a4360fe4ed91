// Shared fixtures for the test executables.

#pragma once

#include "cptpsa/atomic_model.hpp"

#include <random>

namespace cptpsa::testing {

// Metastable helium cell of the experiment: OD 4.5, W/2pi = 0.9 GHz,
// Delta/2pi = 2.29 GHz, 6 cm, Gamma0/2pi = 1.6 MHz.
inline MediumParams helium_cell(double zeta_over_gamma_raman = 1e3, double omega_c = kTwoPi * 10e6) {
    MediumParams p;
    p.delta = kTwoPi * 2.29e9;
    p.doppler_w = kTwoPi * 0.9e9;
    p.gamma_opt = p.doppler_w;
    p.gamma_d2 = kTwoPi * 23e6;
    p.gamma0 = kTwoPi * 1.6e6;
    p.length = 0.06;
    p.eta = MediumParams::eta_for_optical_depth(4.5, p.gamma_opt, p.length);
    p.gamma_raman = omega_c * omega_c / p.gamma_opt / zeta_over_gamma_raman;
    return p;
}

// Random operating point in units where the rates are of order one, so
// that explicit time integration reaches the steady state in a few
// thousand steps.
struct ScaledPoint {
    MediumParams medium;
    FieldState fields;
    double zeeman_nu = 0.0;
};

inline ScaledPoint random_scaled_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    ScaledPoint s;
    s.medium.gamma_opt = in(1.0, 3.0);
    s.medium.doppler_w = s.medium.gamma_opt;
    s.medium.gamma_d2 = in(0.5, 2.0);
    s.medium.gamma0 = in(0.2, 1.0);
    s.medium.gamma_raman = in(0.02, 0.3);
    s.medium.delta = in(3.0, 12.0);
    s.medium.length = 1.0;
    s.medium.eta = 1.0;
    const double omega_c = in(0.5, 2.0);
    s.fields = FieldState::from_phase(omega_c, in(0.01, 0.3) * omega_c, in(0.0, kTwoPi));
    s.zeeman_nu = in(-0.2, 0.2);
    return s;
}

} // namespace cptpsa::testing
