// Steady states, time evolution and first-order sideband
// response of the optical Bloch equations d rho/dt = -i[H, rho] + L(rho).
//
// Vectorization is column-major: vec(rho)[i + 6 j] = rho(i, j), so that
// vec(A rho B) = (B^T kron A) vec(rho).

#pragma once

#include "cptpsa/atomic_model.hpp"

#include <Eigen/Dense>

namespace cptpsa {

using Vector36 = Eigen::VectorXcd;

Vector36 vectorize(const Matrix6& rho);
Matrix6 unvectorize(const Vector36& v);

class Liouvillian {
  public:
    // M = -i (I kron H - H^T kron I) + L
    Liouvillian(const Matrix6& hamiltonian, const Relaxation& relaxation);
    Liouvillian(const Matrix6& hamiltonian, const Eigen::MatrixXcd& relaxation_superoperator);

    const Eigen::MatrixXcd& matrix() const { return m_; }
    Matrix6 apply(const Matrix6& rho) const { return unvectorize(m_ * vectorize(rho)); }

    // Row vector t with t . vec(rho) = Tr(rho).
    static Eigen::RowVectorXcd trace_functional();

  private:
    Eigen::MatrixXcd m_;
};

// Null vector of M normalised to unit trace. One diagonal row of M is replaced
// by the trace constraint. Throws SingularSystem when the null space is not
// one-dimensional.
DensityMatrix6 steady_state(const Liouvillian& liouvillian);
DensityMatrix6 steady_state(const Matrix6& hamiltonian, const Relaxation& relaxation);

// Residual ||M vec(rho)|| / ||M||.
double steady_state_residual(const Liouvillian& liouvillian, const DensityMatrix6& rho);

struct EvolveOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double initial_step = 0.0; // 0 picks one from ||M||
    long max_steps = 50'000'000;
    double min_step_fraction = 1e-14; // smallest admissible step, relative to t_final
};

// Adaptive Dormand-Prince integration of vec(rho)' = M vec(rho) up to t_final.
// Throws StepFailure when the controller cannot meet the tolerance.
DensityMatrix6 evolve(const DensityMatrix6& rho0, const Liouvillian& liouvillian, double t_final,
                      const EvolveOptions& options = {});
DensityMatrix6 evolve(const DensityMatrix6& rho0, const Matrix6& hamiltonian, const Relaxation& relaxation,
                      double t_final, const EvolveOptions& options = {});

// ---------------------------------------------------------------------------
// First-order sideband response
// ---------------------------------------------------------------------------

// Modulation of the two circular components around their static values:
//   Omega^{+-}(t) = Omega^{+-}_0 + up_{+-} e^{+i delta t} + down_{+-} e^{-i delta t}.
struct SidebandDrive {
    Complex up_plus;
    Complex up_minus;
    Complex down_plus;
    Complex down_minus;

    // Probe-polarised signal at e^{+i delta t} and idler at e^{-i delta t}.
    static SidebandDrive from_probe(Complex omega_s, Complex omega_i);

    // Signal / idler read back from the probe polarization of a drive.
    Complex signal() const;
    Complex idler() const;
};

// Fourier components of rho(t) = rho_ss + sigma_plus e^{+i delta t} + sigma_minus e^{-i delta t}
// to first order in the drive. Hermiticity of rho(t) implies sigma_minus = sigma_plus^dag.
struct SidebandResponse {
    Matrix6 sigma_plus;
    Matrix6 sigma_minus;
};

// Hamiltonian Fourier components V_{+-} of the drive (V_minus = V_plus^dag).
std::pair<Matrix6, Matrix6> sideband_hamiltonians(const SidebandDrive& drive, bool include_d2 = true);

// Factorises (M -+ i delta) once, with a trace-zero row, so that many drives
// can be solved at one operating point. delta = 0 is allowed.
class SidebandSolver {
  public:
    SidebandSolver(const Liouvillian& liouvillian, const DensityMatrix6& rho_ss, double delta,
                   bool include_d2 = true);

    // (M - i delta) vec(sigma_plus) = vec(i [V_plus, rho_ss]),
    // (M + i delta) vec(sigma_minus) = vec(i [V_minus, rho_ss]).
    SidebandResponse solve(const SidebandDrive& drive) const;

    // Only the e^{+i delta t} component (the one the signal drives).
    Matrix6 solve_plus(const Matrix6& v_plus) const;
    Matrix6 solve_minus(const Matrix6& v_minus) const;

    double delta() const { return delta_; }
    bool include_d2() const { return include_d2_; }
    const DensityMatrix6& rho_ss() const { return rho_ss_; }

  private:
    Matrix6 solve_shifted(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, const Matrix6& v) const;

    DensityMatrix6 rho_ss_;
    double delta_;
    bool include_d2_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_plus_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_minus_;
};

// Convenience wrapper: the drive is the probe-polarised signal/idler pair
// carried by `fields.sidebands`. Throws SingularSystem when (M -+ i delta)
// is singular.
SidebandResponse sideband_response(const DensityMatrix6& rho_ss, const FieldState& fields,
                                   const MediumParams& params, double zeeman_nu = 0.0, bool include_d2 = true);

} // namespace cptpsa
