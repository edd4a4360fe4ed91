#include "cptpsa/analytic.hpp"

#include "cptpsa/errors.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace cptpsa {

namespace {

const Complex kI(0.0, 1.0);

// Response of the (Omega_p, Omega_p*) row to an input at phase theta.
Complex probe_row(double theta, double mu) {
    return (1.0 + kI * mu) * std::polar(1.0, theta) + kI * mu * std::polar(1.0, -theta);
}

double wrap_2pi(double x) {
    return std::remainder(x, kTwoPi);
}

// Residuals of the gain (and optionally phase) model for parameters (p, offset),
// with mu = |p| so the search is unconstrained.
struct ScanFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const PhaseScanData* data = nullptr;
    double phase_weight = 1.0;
    bool fit_offset = true;
    int n_values = 0;

    int inputs() const { return fit_offset ? 2 : 1; }
    int values() const { return n_values; }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const double mu = std::abs(x(0));
        const double offset = fit_offset ? x(1) : 0.0;
        const std::size_t n = data->theta_in.size();
        const double w = std::sqrt(phase_weight);
        for (std::size_t k = 0; k < n; ++k) {
            const double th = data->theta_in[k] + offset;
            f(static_cast<Eigen::Index>(k)) = gain(th, mu) - data->gain[k];
            if (data->theta_out) {
                const double model = output_phase(th, mu) - offset;
                f(static_cast<Eigen::Index>(n + k)) = w * wrap_2pi(model - (*data->theta_out)[k]);
            }
        }
        return 0;
    }
};

} // namespace

double mu_from_medium(const MediumParams& params) {
    return 4.0 * params.eta * params.length / (3.0 * params.delta);
}

// ---------------------------------------------------------------------------

Eigen::Vector2d TransferMatrix::singular_values() const {
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(full());
    return svd.singularValues();
}

double TransferMatrix::conjugation_asymmetry() const {
    return std::max(std::abs(m(1, 0) - std::conj(m(0, 1))), std::abs(m(1, 1) - std::conj(m(0, 0))));
}

Complex TransferMatrix::apply(Complex omega_p) const {
    const Eigen::Matrix2cd f = full();
    return f(0, 0) * omega_p + f(0, 1) * std::conj(omega_p);
}

double TransferMatrix::gain(double theta) const {
    return std::norm(apply(std::polar(1.0, theta)));
}

TransferMatrix transfer_matrix(double mu) {
    const Complex e = std::polar(1.0, mu);
    const Complex ec = std::conj(e);
    TransferMatrix t;
    t.m << (1.0 + kI * mu) * e, kI * mu * e, -kI * mu * ec, (1.0 - kI * mu) * ec;
    return t;
}

GainExtrema gain_extrema(double mu) {
    if (!(mu >= 0.0)) {
        throw std::domain_error("gain_extrema: mu must be >= 0");
    }
    GainExtrema e;
    e.g_max = 1.0 + 2.0 * mu * (mu + std::sqrt(1.0 + mu * mu));
    e.g_min = 1.0 / e.g_max;
    // atan2 gives atan(1/mu) without dividing by zero at mu = 0
    e.theta_max = 0.5 * std::atan2(1.0, mu);
    e.theta_min = e.theta_max - 0.5 * kPi;
    return e;
}

double gain(double theta, double mu) {
    return std::norm(probe_row(theta, mu));
}

double output_phase(double theta, double mu) {
    return std::arg(probe_row(theta, mu));
}

// ---------------------------------------------------------------------------

FitResult fit_mu(const PhaseScanData& data, const FitOptions& options) {
    const std::size_t n = data.theta_in.size();
    if (data.gain.size() != n || (data.theta_out && data.theta_out->size() != n)) {
        throw FitFailure("fit_mu: theta, gain and phase columns differ in length");
    }
    std::set<double> distinct;
    for (double t : data.theta_in) distinct.insert(std::remainder(t, kPi));
    if (distinct.size() < 5) {
        throw FitFailure("fit_mu: need at least 5 distinct input phases, got " + std::to_string(distinct.size()));
    }

    ScanFunctor functor;
    functor.data = &data;
    functor.phase_weight = options.phase_weight;
    functor.fit_offset = options.fit_phase_offset;
    functor.n_values = static_cast<int>(data.theta_out ? 2 * n : n);

    Eigen::NumericalDiff<ScanFunctor, Eigen::Central> diff(functor);
    Eigen::VectorXd fvec(functor.n_values);

    FitResult best;
    best.rms = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    const double mu_starts[] = {0.1, 0.5, 1.0, 2.0, 4.0, 8.0};
    const double offset_starts[] = {0.0, 0.25 * kPi, 0.5 * kPi, 0.75 * kPi};
    const int n_offsets = options.fit_phase_offset ? 4 : 1;
    for (double mu0 : mu_starts) {
        for (int j = 0; j < n_offsets; ++j) {
            Eigen::VectorXd x(functor.inputs());
            x(0) = mu0;
            if (options.fit_phase_offset) x(1) = offset_starts[j];
            Eigen::LevenbergMarquardt<decltype(diff)> lm(diff);
            lm.parameters.xtol = 1e-14;
            lm.parameters.ftol = 1e-14;
            lm.parameters.maxfev = 2000;
            lm.minimize(x);
            evaluations += static_cast<int>(lm.nfev);
            functor(x, fvec);
            const double rms = std::sqrt(fvec.squaredNorm() / functor.n_values);
            if (rms < best.rms) {
                best.rms = rms;
                best.mu = std::abs(x(0));
                best.theta_offset = options.fit_phase_offset ? x(1) : 0.0;
                best.gain_rms = std::sqrt(fvec.head(static_cast<Eigen::Index>(n)).squaredNorm() / n);
            }
        }
    }
    best.evaluations = evaluations;
    // The model is pi-periodic in the offset; report the representative in (-pi/2, pi/2].
    best.theta_offset = -std::remainder(-best.theta_offset, kPi);

    double mean_gain = 0.0;
    for (double g : data.gain) mean_gain += g;
    mean_gain /= static_cast<double>(n);
    if (!(best.gain_rms <= options.max_relative_rms * mean_gain)) {
        throw FitFailure("fit_mu: gain RMS residual " + std::to_string(best.gain_rms) + " exceeds " +
                         std::to_string(options.max_relative_rms) + " x mean gain " + std::to_string(mean_gain) +
                         " (data not described by the reduced model)");
    }
    return best;
}

// ---------------------------------------------------------------------------

Complex lineshape(double x) {
    return 1.0 / (1.0 - kI * x);
}

double group_velocity(double eta, double omega_c_abs) {
    return kSpeedOfLight / (1.0 + 2.0 * eta * kSpeedOfLight / (omega_c_abs * omega_c_abs));
}

double mixing_angle(double eta, double omega_c_abs) {
    return std::atan2(std::sqrt(2.0 * eta * kSpeedOfLight), omega_c_abs);
}

SpectralParams SpectralParams::from_medium(const MediumParams& params, double omega_c_abs, double nu) {
    SpectralParams s;
    s.zeta = omega_c_abs * omega_c_abs / params.gamma_opt;
    s.nu = nu;
    s.vg = group_velocity(params.eta, omega_c_abs);
    s.alpha = mixing_angle(params.eta, omega_c_abs);
    return s;
}

void SpectralParams::validate() const {
    if (!(zeta > 0.0) || !std::isfinite(zeta)) throw ConfigError("spectral.zeta must be > 0");
    if (!(alpha >= 0.0 && alpha < 0.5 * kPi)) throw ConfigError("spectral.alpha must lie in [0, pi/2)");
    const double c2 = std::cos(alpha) * std::cos(alpha);
    if (std::abs(vg - kSpeedOfLight * c2) > 1e-12 * kSpeedOfLight) {
        throw ConfigError("spectral.vg must equal c cos^2(alpha)");
    }
}

SpectralTransfer spectral_transfer(double nu, double mu, double zeta, double vg, double length) {
    SpectralTransfer s;
    s.leading = transfer_matrix(mu);
    s.leading.prefactor = std::polar(1.0, -nu * length / vg);
    const Complex f = lineshape(nu / zeta);
    s.local_gain_coefficient = kI * (mu / length) * f * f;
    s.dispersion = nu * (1.0 + (kSpeedOfLight / vg - 1.0) * f) / kSpeedOfLight;
    s.group_delay = length / vg;
    s.regime_ok = std::abs(nu) * 10.0 <= zeta;
    return s;
}

Complex dsp_transform(Complex omega_p, Complex coherence, double alpha, double z, double mu_density, double eta) {
    return std::cos(alpha) * std::polar(1.0, -mu_density * z) * omega_p -
           std::sqrt(2.0 * eta * kSpeedOfLight) * kI * std::sin(alpha) * coherence;
}

TransferMatrix dsp_transfer_matrix(double mu, double nu, double vg, double length) {
    const Complex e = std::polar(1.0, mu);
    const Complex ec = std::conj(e);
    TransferMatrix t;
    t.m << (1.0 + kI * mu) * e, -kI * mu * e, kI * mu * ec, (1.0 - kI * mu) * ec;
    t.prefactor = std::polar(1.0, -nu * length / vg);
    return t;
}

} // namespace cptpsa
