#include "cptpsa/propagation.hpp"

#include "cptpsa/errors.hpp"
#include "cptpsa/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

namespace cptpsa {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt3 = 0.57735026918962576451;
constexpr double kSqrt2 = 1.41421356237309504880;
const Complex kI(0.0, 1.0);

// Source term S^{+-}(rho) such that dOmega^{+-}/dz = i eta S^{+-}(rho).
// `transposed` reads rho(j, i) instead of rho(i, j), which is what the
// conjugated idler equation needs when rho is a first-order Fourier component.
CircularComponents source_terms(const Matrix6& r, bool include_d2, bool transposed = false) {
    auto at = [&](int i, int j) { return transposed ? r(j, i) : r(i, j); };
    Complex plus = -at(kUpperD1, kGroundMinus);
    Complex minus = -at(kUpperD1, kGroundPlus);
    if (include_d2) {
        plus += at(kUpperD2Zero, kGroundMinus) * kInvSqrt3 + kSqrt2 * at(kUpperD2Plus, kGroundPlus);
        minus += -at(kUpperD2Zero, kGroundPlus) * kInvSqrt3 - kSqrt2 * at(kUpperD2Minus, kGroundMinus);
    }
    return {plus, minus};
}

// Atomic steady state for given circular fields, reusing one relaxation
// superoperator for the whole march.
class LocalMedium {
  public:
    LocalMedium(const MediumParams& params, double zeeman_nu, bool include_d2)
        : params_(params), relaxation_(Relaxation(params).superoperator()), nu_(zeeman_nu), d2_(include_d2) {}

    Liouvillian liouvillian(CircularComponents c) const {
        return Liouvillian(build_hamiltonian(c, params_, nu_, d2_), relaxation_);
    }

    DensityMatrix6 steady(CircularComponents c) const { return steady_state(liouvillian(c)); }

    const MediumParams& params() const { return params_; }
    bool include_d2() const { return d2_; }

  private:
    const MediumParams& params_;
    Eigen::MatrixXcd relaxation_;
    double nu_;
    bool d2_;
};

using Circ2 = Eigen::Vector2cd;

Circ2 as_vec(CircularComponents c) {
    return Circ2(c.plus, c.minus);
}

CircularComponents as_circ(const Circ2& v) {
    return {v(0), v(1)};
}

double relative_change(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

ZSlice make_slice(double z, Complex omega_c, Complex omega_p, const FieldState& in, const DensityMatrix6& rho) {
    ZSlice s;
    s.z = z;
    s.omega_c = omega_c;
    s.omega_p = omega_p;
    const double ic = std::norm(in.omega_c);
    const double ip = std::norm(in.omega_p);
    s.coupling_intensity = ic > 0.0 ? std::norm(omega_c) / ic : 0.0;
    s.probe_intensity = ip > 0.0 ? std::norm(omega_p) / ip : 0.0;
    FieldState f;
    f.omega_c = omega_c;
    f.omega_p = omega_p;
    s.relative_phase = f.relative_phase();
    s.coupling_phase = (std::abs(in.omega_c) > 0.0 && std::abs(omega_c) > 0.0)
                           ? std::arg(omega_c * std::conj(in.omega_c))
                           : 0.0;
    s.dark_population = rho.dark_population();
    return s;
}

ZProfile march_degenerate(const FieldState& in, const LocalMedium& medium, double length, int n,
                          bool record) {
    const double eta = medium.params().eta;
    const double dz = length / n;
    auto deriv = [&](const Circ2& y, DensityMatrix6* rho_out) {
        DensityMatrix6 rho = medium.steady(as_circ(y));
        if (rho_out) *rho_out = rho;
        return Circ2(kI * eta * as_vec(source_terms(rho.rho, medium.include_d2())));
    };

    ZProfile profile;
    profile.n_steps = n;
    profile.slices.reserve(record ? n + 1 : 2);

    // March the change d of the circular fields; the fields at z are the
    // inputs plus from_circular(d).
    const Circ2 y0 = as_vec(in.circular());
    Circ2 d = Circ2::Zero();
    auto fields_at = [&](const Circ2& change) {
        const auto [dc, dp] = from_circular(as_circ(change));
        return std::pair{in.omega_c + dc, in.omega_p + dp};
    };
    for (int step = 0; step < n; ++step) {
        DensityMatrix6 rho;
        const Circ2 k1 = deriv(y0 + d, &rho);
        if (step == 0) {
            profile.slices.push_back(make_slice(0.0, in.omega_c, in.omega_p, in, rho));
        } else if (record) {
            const auto [c, p] = fields_at(d);
            profile.slices.push_back(make_slice(step * dz, c, p, in, rho));
        }
        const Circ2 k2 = deriv(y0 + d + 0.5 * dz * k1, nullptr);
        const Circ2 k3 = deriv(y0 + d + 0.5 * dz * k2, nullptr);
        const Circ2 k4 = deriv(y0 + d + dz * k3, nullptr);
        d += dz / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const auto [c, p] = fields_at(d);
    const DensityMatrix6 rho_out = medium.steady(as_circ(y0 + d));
    profile.slices.push_back(make_slice(length, c, p, in, rho_out));
    return profile;
}

// Shared grid-doubling loop. `run(n)` returns a pair of positive observables
// that must settle to the grid tolerance.
template <class Result, class Run, class Observe>
Result refine(const PropagationGrid& grid, Run&& run, Observe&& observe, const char* what) {
    int n = grid.n_steps;
    Result coarse = run(n);
    for (int level = 0; level < grid.max_refinements; ++level) {
        n *= 2;
        Result fine = run(n);
        const auto a = observe(coarse);
        const auto b = observe(fine);
        double change = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) change = std::max(change, relative_change(a[k], b[k]));
        if (!std::isfinite(change)) {
            throw ConvergenceFailure(std::string(what) + ": non-finite field encountered at " + std::to_string(n) +
                                     " steps");
        }
        if (change < grid.tolerance) return fine;
        coarse = std::move(fine);
    }
    throw ConvergenceFailure(std::string(what) + ": output still changing after " +
                             std::to_string(grid.max_refinements) + " grid doublings (" + std::to_string(n) +
                             " steps); the grid is too coarse or the regime is violated");
}

} // namespace

// ---------------------------------------------------------------------------

void PropagationGrid::validate() const {
    if (n_steps < 16) throw ConfigError("grid.n_steps must be >= 16");
    if (!std::isfinite(length) || length <= 0.0) throw ConfigError("grid.length must be finite and > 0");
    if (!(tolerance > 0.0)) throw ConfigError("grid.tolerance must be > 0");
    if (max_refinements < 1) throw ConfigError("grid.max_refinements must be >= 1");
}

PropagationGrid PropagationGrid::for_medium(const MediumParams& params, int n_steps) {
    PropagationGrid g;
    g.length = params.length;
    g.n_steps = n_steps;
    return g;
}

CircularComponents field_derivative(const Matrix6& rho, double eta, bool include_d2) {
    const CircularComponents s = source_terms(rho, include_d2);
    return {kI * eta * s.plus, kI * eta * s.minus};
}

ZProfile propagate_degenerate(const FieldState& fields_in, const MediumParams& params, const PropagationGrid& grid,
                              const PropagationOptions& options) {
    params.validate();
    grid.validate();
    if (fields_in.sidebands && fields_in.sidebands->delta_split != 0.0) {
        throw ConfigError("propagate_degenerate: requires delta = 0");
    }
    const LocalMedium medium(params, options.zeeman_nu, options.include_d2);
    if (params.eta == 0.0) {
        return march_degenerate(fields_in, medium, grid.length, grid.n_steps, options.record_profile);
    }
    return refine<ZProfile>(
        grid, [&](int n) { return march_degenerate(fields_in, medium, grid.length, n, options.record_profile); },
        [](const ZProfile& p) { return std::array<double, 2>{p.probe_gain(), p.coupling_transmission()}; },
        "propagate_degenerate");
}

// ---------------------------------------------------------------------------

GainExtrema find_extrema(const std::vector<double>& theta, const std::vector<double>& gain) {
    const std::size_t n = gain.size();
    if (n < 3 || theta.size() != n) {
        throw std::invalid_argument("find_extrema: need at least 3 matching samples");
    }
    const double h = theta[1] - theta[0];

    auto refine_at = [&](std::size_t k) {
        const double gm = gain[(k + n - 1) % n];
        const double g0 = gain[k];
        const double gp = gain[(k + 1) % n];
        const double curvature = gm - 2.0 * g0 + gp;
        double offset = 0.0;
        double value = g0;
        if (curvature != 0.0) {
            offset = std::clamp(0.5 * (gm - gp) / curvature, -0.5, 0.5);
            value = g0 - 0.25 * (gm - gp) * offset;
        }
        return std::pair{theta[k] + offset * h, value};
    };

    const auto kmax = static_cast<std::size_t>(std::max_element(gain.begin(), gain.end()) - gain.begin());
    const auto kmin = static_cast<std::size_t>(std::min_element(gain.begin(), gain.end()) - gain.begin());
    GainExtrema e;
    std::tie(e.theta_max, e.g_max) = refine_at(kmax);
    std::tie(e.theta_min, e.g_min) = refine_at(kmin);
    // The gain is pi-periodic; report representatives in [0, pi).
    e.theta_max = std::fmod(std::fmod(e.theta_max, kPi) + kPi, kPi);
    e.theta_min = std::fmod(std::fmod(e.theta_min, kPi) + kPi, kPi);
    return e;
}

PhaseScan scan_phase(const FieldState& fields_in, const MediumParams& params, const PropagationGrid& grid,
                     int n_theta, bool include_d2, int threads) {
    if (n_theta < 8) throw ConfigError("scan_phase: n_theta must be >= 8");
    const double probe = std::abs(fields_in.omega_p);
    const Complex coupling_phase = std::abs(fields_in.omega_c) > 0.0
                                       ? fields_in.omega_c / std::abs(fields_in.omega_c)
                                       : Complex(1.0);

    std::vector<double> theta(n_theta);
    std::vector<ZSlice> out(n_theta);
    PropagationOptions opts;
    opts.include_d2 = include_d2;
    opts.record_profile = false;
    parallel_for(static_cast<std::size_t>(n_theta), threads, [&](std::size_t k) {
        theta[k] = kTwoPi * static_cast<double>(k) / n_theta;
        FieldState f;
        f.omega_c = fields_in.omega_c;
        f.omega_p = -kI * std::polar(probe, theta[k]) * coupling_phase;
        out[k] = propagate_degenerate(f, params, grid, opts).output();
    });

    PhaseScan scan;
    scan.table = ScanResult({"theta", "gain", "output_phase", "coupling_transmission", "dark_population_out"});
    std::vector<double> gains(n_theta);
    for (int k = 0; k < n_theta; ++k) {
        gains[k] = out[k].probe_intensity;
        scan.table.add_row(
            {theta[k], gains[k], out[k].relative_phase, out[k].coupling_intensity, out[k].dark_population});
    }
    scan.extrema = find_extrema(theta, gains);
    return scan;
}

double output_phase_spread(const std::vector<double>& theta_in, const std::vector<double>& theta_out,
                           double theta_min, double exclusion) {
    std::vector<double> kept;
    Complex axis(0.0);
    for (std::size_t k = 0; k < theta_in.size(); ++k) {
        // distance to theta_min on the pi-periodic circle
        const double d = std::abs(std::remainder(theta_in[k] - theta_min, kPi));
        if (d <= exclusion) continue;
        kept.push_back(theta_out[k]);
        axis += std::polar(1.0, 2.0 * theta_out[k]);
    }
    if (kept.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double mean = 0.5 * std::arg(axis);
    double sum_sq = 0.0;
    for (double t : kept) {
        const double dev = std::remainder(t - mean, kPi);
        sum_sq += dev * dev;
    }
    return std::sqrt(sum_sq / static_cast<double>(kept.size()));
}

// ---------------------------------------------------------------------------
// Sidebands
// ---------------------------------------------------------------------------

namespace {

using Matrix4 = Eigen::Matrix4cd;

// The first-order state y = (up+, up-, conj down+, conj down-) evolves
// linearly, dy/dz = A(z) y, with A set by the local zeroth-order atoms.
Matrix4 sideband_generator(const LocalMedium& medium, const Circ2& carrier, double delta) {
    const Liouvillian m = medium.liouvillian(as_circ(carrier));
    const DensityMatrix6 rho = steady_state(m);
    const SidebandSolver solver(m, rho, delta, medium.include_d2());
    const double eta = medium.params().eta;
    Matrix4 a;
    for (int k = 0; k < 4; ++k) {
        Eigen::Vector4cd e = Eigen::Vector4cd::Zero();
        e(k) = 1.0;
        const Matrix6 v_plus = coupling_matrix(e(0), e(1), e(2), e(3), medium.include_d2());
        const Matrix6 sigma = solver.solve_plus(v_plus);
        // sigma_minus = sigma_plus^dag, so conj of its source reads sigma_plus transposed
        const CircularComponents up = source_terms(sigma, medium.include_d2());
        const CircularComponents down_conj = source_terms(sigma, medium.include_d2(), true);
        a(0, k) = kI * eta * up.plus;
        a(1, k) = kI * eta * up.minus;
        a(2, k) = -kI * eta * down_conj.plus;
        a(3, k) = -kI * eta * down_conj.minus;
    }
    return a;
}

// (Omega_s, conj Omega_i) -> y
Eigen::Matrix<Complex, 4, 2> sideband_input_map() {
    Eigen::Matrix<Complex, 4, 2> q = Eigen::Matrix<Complex, 4, 2>::Zero();
    q(0, 0) = kI * kInvSqrt2;
    q(1, 0) = -kI * kInvSqrt2;
    q(2, 1) = -kI * kInvSqrt2;
    q(3, 1) = kI * kInvSqrt2;
    return q;
}

// y -> (Omega_s, conj Omega_i): the probe-polarised projection
Eigen::Matrix<Complex, 2, 4> sideband_output_map() {
    Eigen::Matrix<Complex, 2, 4> p = Eigen::Matrix<Complex, 2, 4>::Zero();
    p(0, 0) = -kI * kInvSqrt2;
    p(0, 1) = kI * kInvSqrt2;
    p(1, 2) = kI * kInvSqrt2;
    p(1, 3) = -kI * kInvSqrt2;
    return p;
}

SidebandTransfer march_sidebands(Complex omega_c, double delta, const LocalMedium& medium, double length, int n) {
    const double eta = medium.params().eta;
    const double dz = length / n;

    struct State {
        Circ2 carrier;
        Matrix4 phi;
    };
    auto deriv = [&](const State& s) {
        const Liouvillian m = medium.liouvillian(as_circ(s.carrier));
        const DensityMatrix6 rho = steady_state(m);
        State d;
        d.carrier = kI * eta * as_vec(source_terms(rho.rho, medium.include_d2()));
        d.phi = sideband_generator(medium, s.carrier, delta) * s.phi;
        return d;
    };
    auto axpy = [](const State& s, double h, const State& k) {
        return State{s.carrier + h * k.carrier, s.phi + h * k.phi};
    };

    State s{as_vec(to_circular(omega_c, 0.0)), Matrix4::Identity()};
    for (int step = 0; step < n; ++step) {
        const State k1 = deriv(s);
        const State k2 = deriv(axpy(s, 0.5 * dz, k1));
        const State k3 = deriv(axpy(s, 0.5 * dz, k2));
        const State k4 = deriv(axpy(s, dz, k3));
        s.carrier += dz / 6.0 * (k1.carrier + 2.0 * k2.carrier + 2.0 * k3.carrier + k4.carrier);
        s.phi += dz / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    }

    const Eigen::Matrix2cd t = sideband_output_map() * s.phi * sideband_input_map();
    SidebandTransfer tr;
    tr.delta = delta;
    tr.ss = t(0, 0);
    tr.si = t(0, 1);
    tr.is = t(1, 0);
    tr.ii = t(1, 1);
    tr.coupling_in = omega_c;
    tr.coupling_out = from_circular(as_circ(s.carrier)).first;
    tr.n_steps = n;
    return tr;
}

} // namespace

double SidebandTransfer::psa_gain(double theta) const {
    // Omega_s = Omega_i = a e^{i phi} with i Omega_p at phase Theta from the coupling
    const double phi = theta - 0.5 * kPi + std::arg(coupling_in);
    return std::norm(ss + si * std::polar(1.0, -2.0 * phi));
}

double SidebandTransfer::psa_gain_max() const {
    const double a = std::abs(ss) + std::abs(si);
    return a * a;
}

double SidebandTransfer::psa_gain_min() const {
    const double a = std::abs(ss) - std::abs(si);
    return a * a;
}

SidebandTransfer sideband_transfer(Complex omega_c, double delta, const MediumParams& params,
                                   const PropagationGrid& grid, bool include_d2) {
    params.validate();
    grid.validate();
    const LocalMedium medium(params, 0.0, include_d2);
    if (params.eta == 0.0) {
        return march_sidebands(omega_c, delta, medium, grid.length, grid.n_steps);
    }
    return refine<SidebandTransfer>(
        grid, [&](int n) { return march_sidebands(omega_c, delta, medium, grid.length, n); },
        [](const SidebandTransfer& t) {
            return std::array<double, 3>{std::norm(t.ss), t.psa_gain_max(), std::norm(t.coupling_out)};
        },
        "sideband_transfer");
}

SidebandRun propagate_sidebands(const FieldState& fields_in, const MediumParams& params,
                                const PropagationGrid& grid, bool idler_on, bool include_d2) {
    if (!fields_in.sidebands) {
        throw ConfigError("propagate_sidebands: field state carries no sidebands");
    }
    const Sidebands& sb = *fields_in.sidebands;
    SidebandRun run;
    run.transfer = sideband_transfer(fields_in.omega_c, sb.delta_split, params, grid, include_d2);
    run.signal_in = sb.omega_s;
    run.idler_in = idler_on ? sb.omega_i : Complex(0.0);
    run.signal_out = run.transfer.signal_out(run.signal_in, run.idler_in);
    run.idler_out = run.transfer.idler_out(run.signal_in, run.idler_in);
    const double is = std::norm(run.signal_in);
    const double ii = std::norm(run.idler_in);
    run.signal_gain = is > 0.0 ? std::norm(run.signal_out) / is : 0.0;
    const double idler_ref = ii > 0.0 ? ii : is;
    run.idler_gain = idler_ref > 0.0 ? std::norm(run.idler_out) / idler_ref : 0.0;
    return run;
}

SidebandScan scan_sidebands(Complex omega_c, const std::vector<double>& deltas, const MediumParams& params,
                            const PropagationGrid& grid, int n_theta, bool include_d2, int threads) {
    std::vector<SidebandTransfer> t(deltas.size());
    parallel_for(deltas.size(), threads,
                 [&](std::size_t k) { t[k] = sideband_transfer(omega_c, deltas[k], params, grid, include_d2); });

    SidebandScan scan;
    scan.spectrum =
        ScanResult({"delta", "pia_gain", "psa_gain_max", "psa_gain_min", "idler_generated", "signal_phase"});
    scan.phase_table = ScanResult({"delta", "theta", "psa_gain"});
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const SidebandTransfer& tr = t[k];
        scan.spectrum.add_row({deltas[k], tr.pia_gain(), tr.psa_gain_max(), tr.psa_gain_min(), std::norm(tr.is),
                               std::arg(tr.ss * std::conj(tr.coupling_out) * tr.coupling_in)});
        for (int j = 0; j < n_theta; ++j) {
            const double theta = kTwoPi * j / n_theta;
            scan.phase_table.add_row({deltas[k], theta, tr.psa_gain(theta)});
        }
    }
    return scan;
}

// ---------------------------------------------------------------------------

ScanResult cpt_resonance(Complex omega_c, const MediumParams& params, const PropagationGrid& grid,
                         const std::vector<double>& nu_b, bool include_d2, int threads) {
    std::vector<ZProfile> out(nu_b.size());
    parallel_for(nu_b.size(), threads, [&](std::size_t k) {
        FieldState f;
        f.omega_c = omega_c;
        PropagationOptions o;
        o.include_d2 = include_d2;
        o.zeeman_nu = nu_b[k];
        o.record_profile = false;
        out[k] = propagate_degenerate(f, params, grid, o);
    });
    ScanResult r({"zeeman_nu", "two_photon_detuning", "transmission", "dark_population_in"});
    for (std::size_t k = 0; k < nu_b.size(); ++k) {
        r.add_row({nu_b[k], 2.0 * nu_b[k], out[k].coupling_transmission(), out[k].input().dark_population});
    }
    return r;
}

double peak_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = y.size();
    if (n < 3 || x.size() != n) return std::numeric_limits<double>::quiet_NaN();
    const auto kmax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double base = *std::min_element(y.begin(), y.end());
    const double half = base + 0.5 * (y[kmax] - base);
    auto cross = [&](std::size_t a, std::size_t b) {
        return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    };
    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = kmax; k > 0; --k) {
        if (y[k - 1] <= half) {
            left = cross(k - 1, k);
            break;
        }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = kmax; k + 1 < n; ++k) {
        if (y[k + 1] <= half) {
            right = cross(k, k + 1);
            break;
        }
    }
    return std::abs(right - left);
}

} // namespace cptpsa
