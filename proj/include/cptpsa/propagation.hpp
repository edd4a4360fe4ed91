// Maxwell propagation of the coupling and probe envelopes
// through the cell, with the atoms adiabatically following their local
// steady state (d/dt = 0 in the Bloch equations).
//
//   d Omega^{+-} / dz = i eta ( +-rho_{0_2,-+1_g}/sqrt3 +- sqrt2 rho_{+-2_2,+-1_g} - rho_{0_1,-+1_g} )
//
// The z march is fourth-order Runge-Kutta; the grid is doubled until the
// transmitted intensities change by less than the grid tolerance.

#pragma once

#include "cptpsa/analytic.hpp"
#include "cptpsa/atomic_model.hpp"
#include "cptpsa/bloch_solver.hpp"
#include "cptpsa/scan_result.hpp"

#include <Eigen/Dense>

#include <vector>

namespace cptpsa {

struct PropagationGrid {
    enum class Scheme { kRungeKutta4 };

    int n_steps = 32; // starting number of z slices (>= 16)
    double length = 0.0; // m
    Scheme scheme = Scheme::kRungeKutta4;
    double tolerance = 1e-3; // relative change accepted between successive refinements
    int max_refinements = 6;

    void validate() const;
    static PropagationGrid for_medium(const MediumParams& params, int n_steps = 32);
};

// Right-hand side dOmega^{+-}/dz for a given local density matrix.
CircularComponents field_derivative(const Matrix6& rho, double eta, bool include_d2 = true);

struct ZSlice {
    double z = 0.0;
    Complex omega_c;
    Complex omega_p;
    double coupling_intensity = 1.0; // |Omega_c(z)|^2 / |Omega_c(0)|^2
    double probe_intensity = 1.0;    // |Omega_p(z)|^2 / |Omega_p(0)|^2 (0 when there is no probe)
    double relative_phase = 0.0;     // Theta(z)
    double coupling_phase = 0.0;     // arg Omega_c(z) - arg Omega_c(0)
    double dark_population = 0.0;
};

struct ZProfile {
    std::vector<ZSlice> slices;
    int n_steps = 0; // grid actually used after refinement

    const ZSlice& input() const { return slices.front(); }
    const ZSlice& output() const { return slices.back(); }
    double probe_gain() const { return output().probe_intensity; }
    double coupling_transmission() const { return output().coupling_intensity; }
};

struct PropagationOptions {
    bool include_d2 = true;
    double zeeman_nu = 0.0;
    bool record_profile = true; // false keeps only input and output slices
};

// Degenerate (delta = 0) propagation of the full nonlinear problem: both
// envelopes evolve self-consistently, no expansion in Omega_p / Omega_c.
// Throws ConvergenceFailure when refinement does not settle.
ZProfile propagate_degenerate(const FieldState& fields_in, const MediumParams& params, const PropagationGrid& grid,
                              const PropagationOptions& options = {});

inline ZProfile propagate_degenerate(const FieldState& fields_in, const MediumParams& params,
                                     const PropagationGrid& grid, bool include_d2) {
    PropagationOptions o;
    o.include_d2 = include_d2;
    return propagate_degenerate(fields_in, params, grid, o);
}

// ---------------------------------------------------------------------------
// Phase scans
// ---------------------------------------------------------------------------

// Extrema of a pi- or 2pi-periodic sampled curve, refined by a parabola
// through the extremal sample and its two cyclic neighbours.
GainExtrema find_extrema(const std::vector<double>& theta, const std::vector<double>& gain);

struct PhaseScan {
    // columns: theta, gain, output_phase, coupling_transmission, dark_population_out
    ScanResult table;
    GainExtrema extrema;
};

// Propagates n_theta equally spaced input phases in [0, 2pi). The probe
// modulus and coupling are taken from `fields_in`; its phase is overwritten.
PhaseScan scan_phase(const FieldState& fields_in, const MediumParams& params, const PropagationGrid& grid,
                     int n_theta, bool include_d2 = true, int threads = 1);

// Standard deviation of the output phase about its mean, over input phases
// further than `exclusion` from theta_min (mod pi). Theta and Theta + pi are
// the same operating point with the probe sign flipped, so deviations are
// taken modulo pi and the mean is the axial mean (half the argument of the
// average of e^{2 i Theta_out}).
double output_phase_spread(const std::vector<double>& theta_in, const std::vector<double>& theta_out,
                           double theta_min, double exclusion);

// ---------------------------------------------------------------------------
// Sidebands
// ---------------------------------------------------------------------------

// Linear map of the probe sidebands through the cell at detuning delta:
//   Omega_s(L)  = ss * Omega_s(0) + si * conj(Omega_i(0))
//   conj(Omega_i(L)) = is * Omega_s(0) + ii * conj(Omega_i(0))
// The coupling is propagated self-consistently from the zeroth-order atoms.
struct SidebandTransfer {
    double delta = 0.0;
    Complex ss, si, is, ii;
    Complex coupling_in;
    Complex coupling_out;
    int n_steps = 0;

    // Signal out for given signal / idler inputs.
    Complex signal_out(Complex omega_s, Complex omega_i) const { return ss * omega_s + si * std::conj(omega_i); }
    Complex idler_out(Complex omega_s, Complex omega_i) const {
        return std::conj(is * omega_s + ii * std::conj(omega_i));
    }

    // Signal intensity gain with no input idler.
    double pia_gain() const { return std::norm(ss); }
    // Signal gain with equal signal and idler at relative phase Theta.
    double psa_gain(double theta) const;
    double psa_gain_max() const;
    double psa_gain_min() const;
};

SidebandTransfer sideband_transfer(Complex omega_c, double delta, const MediumParams& params,
                                   const PropagationGrid& grid, bool include_d2 = true);

struct SidebandRun {
    Complex signal_in, idler_in;
    Complex signal_out, idler_out;
    double signal_gain = 1.0;
    double idler_gain = 1.0; // |Omega_i(L)|^2 / |Omega_s(0)|^2 when the idler input is zero
    SidebandTransfer transfer;
};

// Propagates the signal/idler pair carried by `fields_in.sidebands`. With
// idler_on = false the input idler is forced to zero (phase-insensitive mode).
SidebandRun propagate_sidebands(const FieldState& fields_in, const MediumParams& params,
                                const PropagationGrid& grid, bool idler_on, bool include_d2 = true);

// Sweep over detunings. Columns: delta, pia_gain, psa_gain_max, psa_gain_min,
// idler_generated, signal_phase. With n_theta > 0 a second table holds
// (delta, theta, psa_gain).
struct SidebandScan {
    ScanResult spectrum;
    ScanResult phase_table;
};

SidebandScan scan_sidebands(Complex omega_c, const std::vector<double>& deltas, const MediumParams& params,
                            const PropagationGrid& grid, int n_theta = 0, bool include_d2 = true, int threads = 1);

// ---------------------------------------------------------------------------
// CPT resonance
// ---------------------------------------------------------------------------

// Coupling-only transmission vs Zeeman shift. Columns: zeeman_nu,
// two_photon_detuning, transmission, dark_population_in.
ScanResult cpt_resonance(Complex omega_c, const MediumParams& params, const PropagationGrid& grid,
                         const std::vector<double>& nu_b, bool include_d2 = true, int threads = 1);

// Full width at half maximum of a single peak sampled on a monotone axis,
// measured above the smallest sample (linear interpolation between samples).
// Returns NaN when the half-maximum crossings are not bracketed.
double peak_fwhm(const std::vector<double>& x, const std::vector<double>& y);

} // namespace cptpsa
