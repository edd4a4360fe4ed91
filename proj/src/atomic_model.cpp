#include "cptpsa/atomic_model.hpp"

#include "cptpsa/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cptpsa {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_finite_nonnegative(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ConfigError(std::string("medium.") + name + " must be finite and >= 0");
    }
}

// Squared Clebsch-Gordan factor of the upper -> ground dipole coupling.
double cg_squared(int upper, int ground) {
    constexpr double d2_zero = LevelScheme::cg_d2_zero * LevelScheme::cg_d2_zero;
    constexpr double d2_stretched = LevelScheme::cg_d2_stretched * LevelScheme::cg_d2_stretched;
    switch (upper) {
    case kUpperD1:
        return LevelScheme::cg_d1 * LevelScheme::cg_d1;
    case kUpperD2Zero:
        return d2_zero;
    case kUpperD2Minus:
        return ground == kGroundMinus ? d2_stretched : 0.0;
    case kUpperD2Plus:
        return ground == kGroundPlus ? d2_stretched : 0.0;
    default:
        return 0.0;
    }
}

} // namespace

// ---------------------------------------------------------------------------

std::string RegimeReport::describe() const {
    if (ok()) {
        return "nu << zeta << Gamma << Delta holds";
    }
    std::ostringstream out;
    out << "analytic regime violated (factor " << factor << "):";
    if (!nu_ok) out << " nu !<< zeta";
    if (!zeta_ok) out << " zeta !<< Gamma";
    if (!gamma_ok) out << " Gamma !<< Delta";
    return out.str();
}

void MediumParams::validate() const {
    require_finite_nonnegative(eta, "eta");
    require_finite_nonnegative(gamma_opt, "gamma_opt");
    require_finite_nonnegative(gamma0, "gamma0");
    require_finite_nonnegative(gamma_raman, "gamma_raman");
    require_finite_nonnegative(doppler_w, "doppler_w");
    if (gamma_d2) {
        require_finite_nonnegative(*gamma_d2, "gamma_d2");
    }
    if (!std::isfinite(delta) || delta == 0.0) {
        throw ConfigError("medium.delta must be finite and non-zero");
    }
    if (!std::isfinite(length) || length <= 0.0) {
        throw ConfigError("medium.length must be finite and > 0");
    }
}

RegimeReport MediumParams::regime(double zeta, double nu, double factor) const {
    RegimeReport r;
    r.factor = factor;
    r.nu_ok = std::abs(nu) * factor <= zeta;
    r.zeta_ok = zeta * factor <= gamma_opt;
    r.gamma_ok = gamma_opt * factor <= std::abs(delta);
    return r;
}

// ---------------------------------------------------------------------------

CircularComponents to_circular(Complex omega_c, Complex omega_p) {
    const Complex ip = Complex(0.0, 1.0) * omega_p;
    return {(omega_c + ip) * kInvSqrt2, (omega_c - ip) * kInvSqrt2};
}

std::pair<Complex, Complex> from_circular(CircularComponents c) {
    const Complex omega_c = (c.plus + c.minus) * kInvSqrt2;
    const Complex omega_p = (c.plus - c.minus) * kInvSqrt2 * Complex(0.0, -1.0);
    return {omega_c, omega_p};
}

double FieldState::relative_phase() const {
    return std::arg(Complex(0.0, 1.0) * omega_p * std::conj(omega_c));
}

double FieldState::probe_ratio() const {
    const double c = std::abs(omega_c);
    return c > 0.0 ? std::abs(omega_p) / c : std::numeric_limits<double>::infinity();
}

FieldState FieldState::from_phase(double omega_c, double probe, double theta) {
    // i Omega_p = probe e^{i theta}  =>  Omega_p = -i probe e^{i theta}
    FieldState f;
    f.omega_c = omega_c;
    f.omega_p = Complex(0.0, -1.0) * std::polar(probe, theta);
    return f;
}

// ---------------------------------------------------------------------------

DensityMatrix6 DensityMatrix6::pure(const Eigen::Matrix<Complex, 6, 1>& state) {
    const Eigen::Matrix<Complex, 6, 1> psi = state / state.norm();
    return DensityMatrix6(psi * psi.adjoint());
}

DensityMatrix6 DensityMatrix6::ground_mixture() {
    Matrix6 m = Matrix6::Zero();
    m(kGroundMinus, kGroundMinus) = 0.5;
    m(kGroundPlus, kGroundPlus) = 0.5;
    return DensityMatrix6(m);
}

double DensityMatrix6::hermiticity_error() const {
    const double n = rho.norm();
    return n > 0.0 ? (rho - rho.adjoint()).norm() / n : 0.0;
}

double DensityMatrix6::min_eigenvalue() const {
    const Matrix6 h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix6> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

bool DensityMatrix6::is_valid(double herm_tol, double trace_tol, double pos_tol) const {
    return hermiticity_error() <= herm_tol && std::abs(trace() - 1.0) <= trace_tol && min_eigenvalue() >= -pos_tol;
}

double DensityMatrix6::dark_population() const {
    // <-|rho|-> with |-> = (|+1> - |-1>)/sqrt(2)
    const Complex v = 0.5 * (rho(kGroundPlus, kGroundPlus) + rho(kGroundMinus, kGroundMinus) -
                             rho(kGroundPlus, kGroundMinus) - rho(kGroundMinus, kGroundPlus));
    return v.real();
}

double DensityMatrix6::excited_population() const {
    return (rho(kUpperD1, kUpperD1) + rho(kUpperD2Zero, kUpperD2Zero) + rho(kUpperD2Minus, kUpperD2Minus) +
            rho(kUpperD2Plus, kUpperD2Plus))
        .real();
}

// ---------------------------------------------------------------------------

Matrix6 coupling_matrix(Complex direct_plus, Complex direct_minus, Complex conj_plus, Complex conj_minus,
                        bool include_d2) {
    constexpr double a = LevelScheme::cg_d2_zero;
    constexpr double b = LevelScheme::cg_d2_stretched;
    Matrix6 h = Matrix6::Zero();

    // D1 Lambda system
    h(kUpperD1, kGroundMinus) = LevelScheme::cg_d1 * direct_plus;
    h(kUpperD1, kGroundPlus) = LevelScheme::cg_d1 * direct_minus;
    h(kGroundMinus, kUpperD1) = LevelScheme::cg_d1 * conj_plus;
    h(kGroundPlus, kUpperD1) = LevelScheme::cg_d1 * conj_minus;

    if (include_d2) {
        h(kGroundMinus, kUpperD2Zero) = -a * conj_plus;
        h(kGroundMinus, kUpperD2Minus) = b * conj_minus;
        h(kGroundPlus, kUpperD2Zero) = a * conj_minus;
        h(kGroundPlus, kUpperD2Plus) = -b * conj_plus;

        h(kUpperD2Zero, kGroundMinus) = -a * direct_plus;
        h(kUpperD2Zero, kGroundPlus) = a * direct_minus;
        h(kUpperD2Minus, kGroundMinus) = b * direct_minus;
        h(kUpperD2Plus, kGroundPlus) = -b * direct_plus;
    }
    return h;
}

Matrix6 build_hamiltonian(CircularComponents fields, const MediumParams& params, double zeeman_nu, bool include_d2) {
    Matrix6 h =
        coupling_matrix(fields.plus, fields.minus, std::conj(fields.plus), std::conj(fields.minus), include_d2);
    if (include_d2) {
        h(kUpperD2Zero, kUpperD2Zero) = params.delta;
        h(kUpperD2Minus, kUpperD2Minus) = params.delta;
        h(kUpperD2Plus, kUpperD2Plus) = params.delta;
    }
    h(kGroundMinus, kGroundMinus) = -zeeman_nu;
    h(kGroundPlus, kGroundPlus) = zeeman_nu;
    return h;
}

Matrix6 build_hamiltonian(const FieldState& fields, const MediumParams& params, double zeeman_nu, bool include_d2) {
    return build_hamiltonian(fields.circular(), params, zeeman_nu, include_d2);
}

// ---------------------------------------------------------------------------

Relaxation::Relaxation(const MediumParams& params)
    : gamma_d1_(params.gamma_opt), gamma_d2_(params.d2_coherence_rate()), gamma0_(params.gamma0),
      gamma_raman_(params.gamma_raman) {}

double Relaxation::branching(int upper, int ground) {
    if (!LevelScheme::is_upper(upper) || !LevelScheme::is_ground(ground)) {
        return 0.0;
    }
    const double total = cg_squared(upper, kGroundMinus) + cg_squared(upper, kGroundPlus);
    return cg_squared(upper, ground) / total;
}

Matrix6 Relaxation::apply(const Matrix6& rho) const {
    static constexpr std::array<int, 4> upper{kUpperD1, kUpperD2Zero, kUpperD2Minus, kUpperD2Plus};
    static constexpr std::array<int, 2> ground{kGroundMinus, kGroundPlus};

    Matrix6 out = Matrix6::Zero();

    for (int e : upper) {
        out(e, e) -= gamma0_ * rho(e, e);
        for (int g : ground) {
            out(g, g) += gamma0_ * branching(e, g) * rho(e, e);
        }
        for (int f : upper) {
            if (f != e) out(e, f) -= gamma0_ * rho(e, f);
        }
        const double rate = LevelScheme::is_d2(e) ? gamma_d2_ : gamma_d1_;
        for (int g : ground) {
            out(e, g) -= rate * rho(e, g);
            out(g, e) -= rate * rho(g, e);
        }
    }

    const Complex half_ground = 0.5 * (rho(kGroundMinus, kGroundMinus) + rho(kGroundPlus, kGroundPlus));
    for (int a : ground) {
        for (int b : ground) {
            out(a, b) -= gamma_raman_ * (rho(a, b) - (a == b ? half_ground : Complex(0.0)));
        }
    }
    return out;
}

Eigen::MatrixXcd Relaxation::superoperator() const {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(36, 36);
    for (int j = 0; j < kNumLevels; ++j) {
        for (int i = 0; i < kNumLevels; ++i) {
            Matrix6 unit = Matrix6::Zero();
            unit(i, j) = 1.0;
            const Matrix6 image = apply(unit);
            s.col(i + kNumLevels * j) = Eigen::Map<const Eigen::VectorXcd>(image.data(), 36);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

const Matrix6& dark_bright_unitary() {
    static const Matrix6 u = [] {
        Matrix6 m = Matrix6::Zero();
        m(kUpperD1, 0) = 1.0;
        // |->_g = (|+1> - |-1>)/sqrt2, |+>_g = (|+1> + |-1>)/sqrt2
        m(kGroundMinus, 1) = -kInvSqrt2;
        m(kGroundPlus, 1) = kInvSqrt2;
        m(kGroundMinus, 2) = kInvSqrt2;
        m(kGroundPlus, 2) = kInvSqrt2;
        m(kUpperD2Zero, 3) = 1.0;
        m(kUpperD2Minus, 4) = -kInvSqrt2;
        m(kUpperD2Plus, 4) = kInvSqrt2;
        m(kUpperD2Minus, 5) = kInvSqrt2;
        m(kUpperD2Plus, 5) = kInvSqrt2;
        return m;
    }();
    return u;
}

Matrix6 to_dark_bright(const Matrix6& matrix) {
    const Matrix6& u = dark_bright_unitary();
    return u.adjoint() * matrix * u;
}

} // namespace cptpsa
