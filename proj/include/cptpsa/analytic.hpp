// Closed-form reduced model of the CPT-enabled amplifier in
// the regime nu << zeta << Gamma << Delta, |Omega_p| << |Omega_c|.
//
// The probe evolves through a 2x2 map on (Omega_p, Omega_p*) parametrised by
// mu = 4 eta L / (3 Delta), the nonlinear phase the D2 line imprints on the
// coupling field over the cell.

#pragma once

#include "cptpsa/atomic_model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace cptpsa {

double mu_from_medium(const MediumParams& params);

// Map (Omega_p, Omega_p*)(0) -> (Omega_p, Omega_p*)(L). The optional
// unimodular `prefactor` carries dispersive propagation; it multiplies both rows.
struct TransferMatrix {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    Complex prefactor{1.0, 0.0};

    Eigen::Matrix2cd full() const { return prefactor * m; }
    Complex determinant() const { return full().determinant(); }
    Eigen::Vector2d singular_values() const;

    // M[1][0] = conj(M[0][1]) and M[1][1] = conj(M[0][0]) on the bare matrix.
    double conjugation_asymmetry() const;

    // Output probe for input probe omega_p (first component of M (Omega_p, Omega_p*)).
    Complex apply(Complex omega_p) const;

    // |output / input|^2 for an input whose phase is theta, i.e. the vector (e^{i theta}, e^{-i theta}).
    double gain(double theta) const;
};

// ((1 + i mu) e^{i mu},  i mu e^{i mu}; -i mu e^{-i mu}, (1 - i mu) e^{-i mu})
TransferMatrix transfer_matrix(double mu);

struct GainExtrema {
    double g_max = 1.0;
    double theta_max = 0.0;
    double g_min = 1.0;
    double theta_min = 0.0;
};

// G_MAX = 1 + 2 mu (mu + sqrt(1 + mu^2)) = 1 / G_MIN, Theta_MAX = atan(1/mu) / 2,
// Theta_MIN = Theta_MAX - pi/2. Throws std::domain_error for mu < 0.
GainExtrema gain_extrema(double mu);

// G(Theta) = |(1 + i mu) e^{i Theta} + i mu e^{-i Theta}|^2
double gain(double theta, double mu);

// Phase of the output probe relative to the output coupling field: the e^{i mu}
// carried by both fields cancels, leaving arg((1 + i mu) e^{i Theta} + i mu e^{-i Theta}).
double output_phase(double theta, double mu);

// ---------------------------------------------------------------------------
// Fitting mu to phase scans
// ---------------------------------------------------------------------------

struct PhaseScanData {
    std::vector<double> theta_in;
    std::vector<double> gain;
    std::optional<std::vector<double>> theta_out;
};

struct FitOptions {
    // Reject fits whose gain RMS residual exceeds this fraction of the mean gain.
    double max_relative_rms = 0.1;
    double phase_weight = 1.0; // rad^-2
    bool fit_phase_offset = true;
};

struct FitResult {
    double mu = 0.0;
    double theta_offset = 0.0; // data Theta + offset = model Theta, wrapped to (-pi/2, pi/2]
    double rms = 0.0;          // RMS of all weighted residuals
    double gain_rms = 0.0;     // RMS of the gain residuals alone
    int evaluations = 0;
};

// Levenberg-Marquardt over (mu >= 0, Theta offset), multi-started.
// Throws FitFailure when the data are too few or the residual is too large.
FitResult fit_mu(const PhaseScanData& data, const FitOptions& options = {});

// ---------------------------------------------------------------------------
// Spectral response and dark-state polariton
// ---------------------------------------------------------------------------

// f(x) = 1 / (1 - i x)
Complex lineshape(double x);

// v_g = c / (1 + 2 eta c / |Omega_c|^2)
double group_velocity(double eta, double omega_c_abs);

// tan alpha = sqrt(2 eta c) / |Omega_c|
double mixing_angle(double eta, double omega_c_abs);

struct SpectralParams {
    double zeta = 0.0;  // Omega_c^2 / Gamma (rad/s)
    double nu = 0.0;    // detuning from the coupling frequency (rad/s)
    double vg = kSpeedOfLight;
    double alpha = 0.0;

    static SpectralParams from_medium(const MediumParams& params, double omega_c_abs, double nu);

    // Throws ConfigError unless zeta > 0, 0 <= alpha < pi/2 and vg = c cos^2 alpha.
    void validate() const;

    // nu << zeta with "<<" meaning a ratio of at least `factor`.
    bool in_cpt_band(double factor = 10.0) const { return std::abs(nu) * factor <= zeta; }
};

struct SpectralTransfer {
    // e^{-i nu L / v_g} M(mu): the solution with f(nu/zeta) set to 1.
    TransferMatrix leading;
    // i (mu / L) f(nu/zeta)^2, the local FWM coefficient of the unsolved equation.
    Complex local_gain_coefficient;
    // nu / beta with 1 / beta = (1 + (c / v_g - 1) f(nu/zeta)) / c, in rad/m.
    Complex dispersion;
    double group_delay = 0.0; // L / v_g (s); the prefactor phase slope is -group_delay
    bool regime_ok = true;    // nu << zeta
};

SpectralTransfer spectral_transfer(double nu, double mu, double zeta, double vg, double length);

// P = cos(alpha) e^{-i mu_density z} Omega_p - sqrt(2 eta c) i sin(alpha) rho_{-g+g}
Complex dsp_transform(Complex omega_p, Complex coherence, double alpha, double z, double mu_density, double eta);

// e^{-i nu L / v_g} ((1 + i mu) e^{i mu}, -i mu e^{i mu}; i mu e^{-i mu}, (1 - i mu) e^{-i mu})
TransferMatrix dsp_transfer_matrix(double mu, double nu, double vg, double length);

} // namespace cptpsa
