// Six-level metastable helium-4 scheme: level ordering,
// interaction Hamiltonian, relaxation, and the polarization / dark-bright
// basis changes.
//
// Units: every frequency is an angular frequency in rad/s (hbar = 1), lengths
// in metres. The Hamiltonian enters the Bloch equations as
//     d rho / dt = -i [H, rho] + L(rho).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cptpsa {

using Complex = std::complex<double>;
using Matrix6 = Eigen::Matrix<Complex, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0; // m/s

// ---------------------------------------------------------------------------
// Level scheme
// ---------------------------------------------------------------------------

// Index order of the atomic basis. Position 0 is the D1 upper level
// |2^3P_1, m=0>, positions 1-2 the ground Zeeman states |2^3S_1, m=-1/+1>,
// positions 3-5 the D2 upper levels |2^3P_2, m=0,-2,+2>.
enum Level : int {
    kUpperD1 = 0,     // |0>_1
    kGroundMinus = 1, // |-1>_g
    kGroundPlus = 2,  // |+1>_g
    kUpperD2Zero = 3, // |0>_2
    kUpperD2Minus = 4, // |-2>_2
    kUpperD2Plus = 5, // |+2>_2
};

inline constexpr int kNumLevels = 6;

struct LevelScheme {
    static constexpr std::array<std::string_view, kNumLevels> basis_labels{
        "|0>_1", "|-1>_g", "|+1>_g", "|0>_2", "|-2>_2", "|+2>_2"};

    // Clebsch-Gordan factors multiplying the circular Rabi frequencies.
    static constexpr double cg_d1 = 1.0;
    static constexpr double cg_d2_zero = 0.57735026918962576451; // 1/sqrt(3)
    static constexpr double cg_d2_stretched = 1.41421356237309504880; // sqrt(2)

    static constexpr bool is_ground(int level) { return level == kGroundMinus || level == kGroundPlus; }
    static constexpr bool is_upper(int level) { return !is_ground(level); }
    static constexpr bool is_d2(int level) { return level >= kUpperD2Zero; }
};

// ---------------------------------------------------------------------------
// Medium
// ---------------------------------------------------------------------------

// Which inequalities of nu << zeta << Gamma << Delta fail for a given factor.
struct RegimeReport {
    bool nu_ok = true;
    bool zeta_ok = true;
    bool gamma_ok = true;
    double factor = 10.0;

    bool ok() const { return nu_ok && zeta_ok && gamma_ok; }
    std::string describe() const;
};

struct MediumParams {
    double eta = 0.0;         // atom-field coupling (rad s^-1 m^-1)
    double delta = 0.0;       // D2 detuning Delta (rad/s)
    double gamma_opt = 0.0;   // optical coherence decay Gamma, D1 line (rad/s)
    double gamma0 = 0.0;      // spontaneous emission rate Gamma0 (rad/s)
    double gamma_raman = 0.0; // Raman coherence decay gamma_R (rad/s)
    double doppler_w = 0.0;   // Doppler width W (rad/s)
    double length = 0.0;      // cell length L (m)
    // Optical coherence decay on the far-detuned D2 line. Unset means the
    // same rate as the D1 line.
    std::optional<double> gamma_d2;

    // Throws ConfigError naming the offending field.
    void validate() const;

    double d2_coherence_rate() const { return gamma_d2.value_or(gamma_opt); }

    // OD = 2 eta L / Gamma with Gamma the D1 coherence decay.
    double optical_depth() const { return 2.0 * eta * length / gamma_opt; }

    // eta giving the requested optical depth for the current gamma_opt and length.
    static double eta_for_optical_depth(double od, double gamma_opt, double length) {
        return od * gamma_opt / (2.0 * length);
    }

    // Checks nu << zeta << Gamma << Delta with "<<" meaning a ratio of at least `factor`.
    RegimeReport regime(double zeta, double nu = 0.0, double factor = 10.0) const;
};

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

struct CircularComponents {
    Complex plus;  // Omega^+ (sigma+)
    Complex minus; // Omega^- (sigma-)
};

// Omega^{+-} = (Omega_c +- i Omega_p) / sqrt(2)
CircularComponents to_circular(Complex omega_c, Complex omega_p);

// Inverse of to_circular: returns {Omega_c, Omega_p}.
std::pair<Complex, Complex> from_circular(CircularComponents c);

// Signal / idler pair for the non-degenerate configuration. The probe
// envelope is Omega_p(t) = omega_s e^{+i delta t} + omega_i e^{-i delta t}.
struct Sidebands {
    Complex omega_s;
    Complex omega_i;
    double delta_split = 0.0; // delta (rad/s)
};

struct FieldState {
    Complex omega_c;
    Complex omega_p;
    std::optional<Sidebands> sidebands;

    CircularComponents circular() const { return to_circular(omega_c, omega_p); }

    // Relative phase Theta = arg(i Omega_p) - arg(Omega_c), wrapped to (-pi, pi].
    // The i makes Theta the phase of the probe's contribution to Omega^+,
    // which is the convention in which the PSA transfer matrix is written.
    double relative_phase() const;

    // |Omega_p| / |Omega_c| (the full simulator does not require it to be small).
    double probe_ratio() const;

    // Coupling of real amplitude `omega_c` and probe of modulus `probe`
    // at relative phase `theta` (same convention as relative_phase()).
    static FieldState from_phase(double omega_c, double probe, double theta);
};

// ---------------------------------------------------------------------------
// Density matrix
// ---------------------------------------------------------------------------

struct DensityMatrix6 {
    Matrix6 rho = Matrix6::Zero();

    DensityMatrix6() = default;
    explicit DensityMatrix6(const Matrix6& m) : rho(m) {}

    static DensityMatrix6 pure(const Eigen::Matrix<Complex, 6, 1>& state);
    static DensityMatrix6 ground_mixture(); // (|-1><-1| + |+1><+1|) / 2

    Complex trace() const { return rho.trace(); }
    double hermiticity_error() const; // ||rho - rho^dag||_F / ||rho||_F
    double min_eigenvalue() const;

    // Hermitian to `herm_tol`, unit trace to `trace_tol`, eigenvalues >= -pos_tol.
    bool is_valid(double herm_tol = 1e-12, double trace_tol = 1e-12, double pos_tol = 1e-10) const;

    // Population of the coupling-field dark state |->_g = (|+1>_g - |-1>_g)/sqrt(2).
    // A linearly polarised coupling drives both circular components with the
    // same phase, so this state does not depend on the coupling phase.
    double dark_population() const;

    double excited_population() const;
};

// ---------------------------------------------------------------------------
// Hamiltonian and relaxation
// ---------------------------------------------------------------------------

// Light-atom coupling block of the Hamiltonian with independent values for
// the slots where Omega^{+-} appears directly (`direct_*`) and where it
// appears conjugated (`conj_*`, already conjugated by the caller).
// With direct = (W+, W-) and conj = (W+*, W-*) this is the Hermitian coupling
// matrix; with other choices it is the Fourier component of a modulated drive.
Matrix6 coupling_matrix(Complex direct_plus, Complex direct_minus, Complex conj_plus, Complex conj_minus,
                        bool include_d2 = true);

// Full Hamiltonian: couplings plus Delta on the D2 upper levels and the Zeeman
// shift -nu_B on |-1>_g, +nu_B on |+1>_g (two-photon detuning 2 nu_B).
// With include_d2 = false the D2 rows and columns are zeroed entirely.
Matrix6 build_hamiltonian(CircularComponents fields, const MediumParams& params, double zeeman_nu = 0.0,
                          bool include_d2 = true);
Matrix6 build_hamiltonian(const FieldState& fields, const MediumParams& params, double zeeman_nu = 0.0,
                          bool include_d2 = true);

// Relaxation superoperator L(rho):
//  * each upper level decays at Gamma0 into the ground states it is
//    dipole-coupled to, branched by the squared Clebsch-Gordan factors;
//  * ground-upper coherences decay at Gamma (D1) or gamma_d2 (D2);
//  * upper-upper coherences decay at Gamma0;
//  * the ground manifold depolarises towards Tr(rho_g) I / 2 at gamma_R.
class Relaxation {
  public:
    explicit Relaxation(const MediumParams& params);

    Matrix6 apply(const Matrix6& rho) const;

    // 36x36 matrix of the map in column-major vectorization.
    Eigen::MatrixXcd superoperator() const;

    // Fraction of the decay of `upper` that lands in `ground`.
    static double branching(int upper, int ground);

    double gamma_d1() const { return gamma_d1_; }
    double gamma_d2() const { return gamma_d2_; }
    double gamma0() const { return gamma0_; }
    double gamma_raman() const { return gamma_raman_; }

  private:
    double gamma_d1_;
    double gamma_d2_;
    double gamma0_;
    double gamma_raman_;
};

inline Relaxation build_relaxation(const MediumParams& params) { return Relaxation(params); }

// ---------------------------------------------------------------------------
// Dark / bright basis
// ---------------------------------------------------------------------------

// Unitary whose columns are the basis B_s = {|0>_1, |->_g, |+>_g, |0>_2, |->_2, |+>_2}
// written in B_at, with |+->_g = (|+1>_g +- |-1>_g)/sqrt(2) and likewise for
// |+-2>_2. It is real symmetric and squares to the identity.
const Matrix6& dark_bright_unitary();

// U^dag A U: re-expresses an operator given in B_at in the basis B_s.
Matrix6 to_dark_bright(const Matrix6& matrix);

} // namespace cptpsa
