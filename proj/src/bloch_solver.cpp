#include "cptpsa/bloch_solver.hpp"

#include "cptpsa/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace cptpsa {

namespace {

constexpr int kDim = 36;
constexpr double kInvSqrt2 = 0.70710678118654752440;
const Complex kI(0.0, 1.0);

// Reciprocal condition estimate below which a bordered system is singular.
constexpr double kSingularRcond = 1e-13;

Eigen::MatrixXcd commutator_superoperator(const Matrix6& h) {
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(kNumLevels, kNumLevels);
    Eigen::MatrixXcd out(kDim, kDim);
    // -i (I kron H - H^T kron I)
    for (int j = 0; j < kNumLevels; ++j) {
        for (int l = 0; l < kNumLevels; ++l) {
            const Complex htl = h(l, j); // (H^T)(j, l)
            for (int i = 0; i < kNumLevels; ++i) {
                for (int k = 0; k < kNumLevels; ++k) {
                    Complex v = (j == l ? h(i, k) : Complex(0.0)) - (i == k ? htl : Complex(0.0));
                    out(i + kNumLevels * j, k + kNumLevels * l) = -kI * v;
                }
            }
        }
    }
    return out;
}

// Copy of `m` with row 0 (the |0>_1 population equation, a diagonal row and
// therefore redundant given trace conservation) replaced by a scaled trace row.
Eigen::MatrixXcd bordered(const Eigen::MatrixXcd& m, double scale) {
    Eigen::MatrixXcd a = m;
    a.row(0) = scale * Liouvillian::trace_functional();
    return a;
}

double magnitude_scale(const Eigen::MatrixXcd& m) {
    const double s = m.cwiseAbs().maxCoeff();
    return s > 0.0 ? s : 1.0;
}

} // namespace

Vector36 vectorize(const Matrix6& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), kDim);
}

Matrix6 unvectorize(const Vector36& v) {
    return Eigen::Map<const Matrix6>(v.data());
}

// ---------------------------------------------------------------------------

Liouvillian::Liouvillian(const Matrix6& hamiltonian, const Relaxation& relaxation)
    : Liouvillian(hamiltonian, relaxation.superoperator()) {}

Liouvillian::Liouvillian(const Matrix6& hamiltonian, const Eigen::MatrixXcd& relaxation_superoperator)
    : m_(commutator_superoperator(hamiltonian) + relaxation_superoperator) {}

Eigen::RowVectorXcd Liouvillian::trace_functional() {
    Eigen::RowVectorXcd t = Eigen::RowVectorXcd::Zero(kDim);
    for (int i = 0; i < kNumLevels; ++i) {
        t(i + kNumLevels * i) = 1.0;
    }
    return t;
}

// ---------------------------------------------------------------------------

DensityMatrix6 steady_state(const Liouvillian& liouvillian) {
    const Eigen::MatrixXcd& m = liouvillian.matrix();
    const double scale = magnitude_scale(m);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(bordered(m, scale));
    if (!(lu.rcond() > kSingularRcond)) {
        throw SingularSystem("steady_state: Liouvillian null space is not one-dimensional (rcond " +
                             std::to_string(lu.rcond()) + ")");
    }
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(kDim);
    rhs(0) = scale;
    Matrix6 rho = unvectorize(lu.solve(rhs));
    // Remove the rounding-level anti-Hermitian part.
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return DensityMatrix6(rho);
}

DensityMatrix6 steady_state(const Matrix6& hamiltonian, const Relaxation& relaxation) {
    return steady_state(Liouvillian(hamiltonian, relaxation));
}

double steady_state_residual(const Liouvillian& liouvillian, const DensityMatrix6& rho) {
    const Eigen::MatrixXcd& m = liouvillian.matrix();
    return (m * vectorize(rho.rho)).norm() / m.norm();
}

// ---------------------------------------------------------------------------

DensityMatrix6 evolve(const DensityMatrix6& rho0, const Liouvillian& liouvillian, double t_final,
                      const EvolveOptions& options) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<Complex>;

    if (t_final < 0.0) {
        throw StepFailure("evolve: t_final must be >= 0");
    }
    if (t_final == 0.0) {
        return rho0;
    }

    const Eigen::MatrixXcd& m = liouvillian.matrix();
    auto rhs = [&m](const State& x, State& dxdt, double /*t*/) {
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), kDim);
        Eigen::Map<Eigen::VectorXcd> dv(dxdt.data(), kDim);
        dv.noalias() = m * xv;
    };

    const Vector36 v0 = vectorize(rho0.rho);
    State x(v0.data(), v0.data() + kDim);

    auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());

    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    double dt = options.initial_step > 0.0 ? options.initial_step : (norm > 0.0 ? 0.1 / norm : t_final);
    dt = std::min(dt, t_final);
    const double min_step = options.min_step_fraction * t_final;

    double t = 0.0;
    long steps = 0;
    while (t < t_final) {
        const double remaining = t_final - t;
        const bool last = dt >= remaining;
        double trial = last ? remaining : dt;
        const double t_before = t;
        const odeint::controlled_step_result res = stepper.try_step(rhs, x, t, trial);
        if (res == odeint::success) {
            if (last) t = t_final; // guard against round-off leaving a sliver
            if (!last || trial > dt) dt = trial;
        } else {
            dt = trial;
            if (dt < min_step) {
                throw StepFailure("evolve: step size underflow at t = " + std::to_string(t_before) +
                                  " (problem too stiff for the explicit integrator; use steady_state)");
            }
        }
        if (++steps > options.max_steps) {
            throw StepFailure("evolve: exceeded " + std::to_string(options.max_steps) + " steps");
        }
    }

    Eigen::Map<const Eigen::VectorXcd> xv(x.data(), kDim);
    return DensityMatrix6(unvectorize(xv));
}

DensityMatrix6 evolve(const DensityMatrix6& rho0, const Matrix6& hamiltonian, const Relaxation& relaxation,
                      double t_final, const EvolveOptions& options) {
    return evolve(rho0, Liouvillian(hamiltonian, relaxation), t_final, options);
}

// ---------------------------------------------------------------------------

SidebandDrive SidebandDrive::from_probe(Complex omega_s, Complex omega_i) {
    // Omega^{+-} carries +- i Omega_p / sqrt(2)
    SidebandDrive d;
    d.up_plus = kI * omega_s * kInvSqrt2;
    d.up_minus = -kI * omega_s * kInvSqrt2;
    d.down_plus = kI * omega_i * kInvSqrt2;
    d.down_minus = -kI * omega_i * kInvSqrt2;
    return d;
}

Complex SidebandDrive::signal() const {
    return (up_plus - up_minus) * kInvSqrt2 * (-kI);
}

Complex SidebandDrive::idler() const {
    return (down_plus - down_minus) * kInvSqrt2 * (-kI);
}

std::pair<Matrix6, Matrix6> sideband_hamiltonians(const SidebandDrive& d, bool include_d2) {
    // Conjugated slots of the e^{+i delta t} component collect the conjugate of
    // the e^{-i delta t} amplitudes, and vice versa.
    Matrix6 v_plus =
        coupling_matrix(d.up_plus, d.up_minus, std::conj(d.down_plus), std::conj(d.down_minus), include_d2);
    Matrix6 v_minus =
        coupling_matrix(d.down_plus, d.down_minus, std::conj(d.up_plus), std::conj(d.up_minus), include_d2);
    return {v_plus, v_minus};
}

SidebandSolver::SidebandSolver(const Liouvillian& liouvillian, const DensityMatrix6& rho_ss, double delta,
                               bool include_d2)
    : rho_ss_(rho_ss), delta_(delta), include_d2_(include_d2) {
    const Eigen::MatrixXcd& m = liouvillian.matrix();
    const double scale = magnitude_scale(m);
    const Eigen::MatrixXcd shift = kI * delta * Eigen::MatrixXcd::Identity(kDim, kDim);
    lu_plus_.compute(bordered(m - shift, scale));
    lu_minus_.compute(bordered(m + shift, scale));
    if (!(lu_plus_.rcond() > kSingularRcond) || !(lu_minus_.rcond() > kSingularRcond)) {
        throw SingularSystem("sideband_response: (M -+ i delta) is singular at delta = " + std::to_string(delta));
    }
}

Matrix6 SidebandSolver::solve_shifted(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, const Matrix6& v) const {
    const Matrix6& rho = rho_ss_.rho;
    const Matrix6 source = kI * (v * rho - rho * v);
    Eigen::VectorXcd rhs = vectorize(source);
    rhs(0) = 0.0; // first-order correction is traceless
    return unvectorize(lu.solve(rhs));
}

Matrix6 SidebandSolver::solve_plus(const Matrix6& v_plus) const {
    return solve_shifted(lu_plus_, v_plus);
}

Matrix6 SidebandSolver::solve_minus(const Matrix6& v_minus) const {
    return solve_shifted(lu_minus_, v_minus);
}

SidebandResponse SidebandSolver::solve(const SidebandDrive& drive) const {
    const auto [v_plus, v_minus] = sideband_hamiltonians(drive, include_d2_);
    return {solve_plus(v_plus), solve_minus(v_minus)};
}

SidebandResponse sideband_response(const DensityMatrix6& rho_ss, const FieldState& fields,
                                   const MediumParams& params, double zeeman_nu, bool include_d2) {
    if (!fields.sidebands) {
        throw ConfigError("sideband_response: field state carries no sidebands");
    }
    const Sidebands& sb = *fields.sidebands;
    const Matrix6 h = build_hamiltonian(to_circular(fields.omega_c, 0.0), params, zeeman_nu, include_d2);
    const Liouvillian m(h, Relaxation(params));
    SidebandSolver solver(m, rho_ss, sb.delta_split, include_d2);
    return solver.solve(SidebandDrive::from_probe(sb.omega_s, sb.omega_i));
}

} // namespace cptpsa
