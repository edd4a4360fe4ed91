#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cptpsa/analytic.hpp"
#include "cptpsa/errors.hpp"
#include "support.hpp"

#include <random>

using namespace cptpsa;

namespace {

double wrap(double x, double period) {
    return std::remainder(x, period);
}

} // namespace

TEST_CASE("mu from the medium") {
    MediumParams p = testing::helium_cell();
    CHECK(mu_from_medium(p) == doctest::Approx(1.179).epsilon(1e-3 / 1.179));
    const double mu = mu_from_medium(p);
    p.length *= 2.0;
    CHECK(mu_from_medium(p) == doctest::Approx(2.0 * mu));
    p.eta = 0.0;
    CHECK(mu_from_medium(p) == 0.0);
}

TEST_CASE("transfer matrix") {
    CHECK((transfer_matrix(0.0).full() - Eigen::Matrix2cd::Identity()).norm() == 0.0);
    const TransferMatrix m = transfer_matrix(1.18);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-14);
    CHECK(m.conjugation_asymmetry() < 1e-15);
    // Input vector (1, 1) is Theta = 0.
    CHECK(m.gain(0.0) == doctest::Approx(gain(0.0, 1.18)).epsilon(1e-14));
    CHECK(std::norm(m.apply(1.0)) == doctest::Approx(gain(0.0, 1.18)).epsilon(1e-14));
}

TEST_CASE("gain extrema") {
    const GainExtrema e0 = gain_extrema(0.0);
    CHECK(e0.g_max == 1.0);
    CHECK(e0.g_min == 1.0);
    CHECK(e0.theta_max == doctest::Approx(kPi / 4));
    CHECK(e0.theta_min == doctest::Approx(-kPi / 4));

    const GainExtrema e = gain_extrema(1.18);
    CHECK(e.g_max == doctest::Approx(7.435).epsilon(1e-3 / 7.435));
    CHECK(10.0 * std::log10(e.g_max) == doctest::Approx(8.71).epsilon(0.005 / 8.71));
    CHECK(e.theta_max == doctest::Approx(0.3515).epsilon(1e-4 / 0.3515));
    CHECK(gain(e.theta_max, 1.18) == doctest::Approx(e.g_max).epsilon(1e-14));
    CHECK(gain(e.theta_min, 1.18) == doctest::Approx(e.g_min).epsilon(1e-12));

    CHECK_THROWS_AS(gain_extrema(-0.1), std::domain_error);
}

TEST_CASE("symplectic identities over random mu") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    double worst_det = 0.0, worst_prod = 0.0, worst_gap = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double mu = u(rng);
        worst_det = std::max(worst_det, std::abs(transfer_matrix(mu).determinant() - 1.0));
        const GainExtrema e = gain_extrema(mu);
        worst_prod = std::max(worst_prod, std::abs(e.g_max * e.g_min - 1.0));
        worst_gap = std::max(worst_gap, std::abs(e.theta_max - e.theta_min - kPi / 2));
    }
    CHECK(worst_det < 1e-12);
    CHECK(worst_prod < 1e-12);
    CHECK(worst_gap == 0.0);
}

TEST_CASE("argmax of gain on a dense grid") {
    for (double mu : {0.1, 0.5, 1.18, 3.0, 8.0}) {
        const int n = 10000;
        int best = 0;
        double gbest = -1.0;
        for (int k = 0; k < n; ++k) {
            const double g = gain(kPi * k / n, mu);
            if (g > gbest) {
                gbest = g;
                best = k;
            }
        }
        const GainExtrema e = gain_extrema(mu);
        CAPTURE(mu);
        CHECK(std::abs(wrap(kPi * best / n - e.theta_max, kPi)) <= kPi / n);
        CHECK(gbest <= e.g_max * (1.0 + 1e-14));
    }
}

TEST_CASE("G_MAX increases with mu") {
    double prev = 0.0;
    for (double mu = 0.0; mu <= 10.0; mu += 0.01) {
        const double g = gain_extrema(mu).g_max;
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("gain and phase without coupling nonlinearity") {
    for (double theta : {-2.0, 0.0, 0.4, 2.9}) {
        CHECK(gain(theta, 0.0) == doctest::Approx(1.0));
        CHECK(output_phase(theta, 0.0) == doctest::Approx(theta));
    }
}

TEST_CASE("gain is pi-periodic and averages to 1 + 2 mu^2") {
    for (double mu : {0.3, 1.18, 2.5}) {
        const int n = 4096;
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += gain(kTwoPi * k / n, mu);
        CHECK(sum / n == doctest::Approx(1.0 + 2.0 * mu * mu).epsilon(1e-12));
        CHECK(gain(0.3 + kPi, mu) == doctest::Approx(gain(0.3, mu)));
    }
}

TEST_CASE("fit recovers mu from clean synthetic data") {
    PhaseScanData d;
    for (int k = 0; k < 32; ++k) {
        const double th = kTwoPi * k / 32;
        d.theta_in.push_back(th);
        d.gain.push_back(gain(th, 1.18));
    }
    const FitResult r = fit_mu(d);
    CHECK(std::abs(r.mu - 1.18) < 1e-6);
    CHECK(std::abs(r.theta_offset) < 1e-6);

    // An offset in the data's Theta origin is absorbed by the nuisance parameter.
    PhaseScanData shifted = d;
    std::vector<double> out;
    for (std::size_t k = 0; k < d.theta_in.size(); ++k) {
        shifted.gain[k] = gain(d.theta_in[k] + 0.4, 1.18);
        out.push_back(output_phase(d.theta_in[k] + 0.4, 1.18) - 0.4);
    }
    shifted.theta_out = out;
    const FitResult rs = fit_mu(shifted);
    CHECK(std::abs(rs.mu - 1.18) < 1e-6);
    CHECK(rs.theta_offset == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("fit tolerates 5% multiplicative noise") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> noise(0.0, 0.05);
    PhaseScanData d;
    for (int k = 0; k < 64; ++k) {
        const double th = kTwoPi * k / 64;
        d.theta_in.push_back(th);
        d.gain.push_back(gain(th, 1.18) * (1.0 + noise(rng)));
    }
    const FitResult r = fit_mu(d);
    CHECK(std::abs(r.mu - 1.18) / 1.18 < 0.05);
}

TEST_CASE("fit rejects too few points and non-model data") {
    PhaseScanData few;
    for (int k = 0; k < 4; ++k) {
        few.theta_in.push_back(k * 0.5);
        few.gain.push_back(1.0);
    }
    CHECK_THROWS_AS(fit_mu(few), FitFailure);

    PhaseScanData bumpy;
    for (int k = 0; k < 32; ++k) {
        const double th = kTwoPi * k / 32;
        bumpy.theta_in.push_back(th);
        bumpy.gain.push_back(3.0 + 2.0 * std::cos(3.0 * th));
    }
    CHECK_THROWS_AS(fit_mu(bumpy), FitFailure);
}

TEST_CASE("lineshape, group velocity and mixing angle") {
    CHECK(std::norm(lineshape(1.0)) == doctest::Approx(0.5));
    CHECK(lineshape(0.0) == Complex(1.0, 0.0));
    const MediumParams p = testing::helium_cell();
    const double oc = kTwoPi * 10e6;
    const double vg = group_velocity(p.eta, oc);
    const double a = mixing_angle(p.eta, oc);
    CHECK(std::abs(vg - kSpeedOfLight * std::cos(a) * std::cos(a)) <= 1e-12 * vg);
    CHECK(mixing_angle(0.0, oc) == 0.0);

    const SpectralParams sp = SpectralParams::from_medium(p, oc, 0.0);
    CHECK_NOTHROW(sp.validate());
    CHECK(sp.zeta == doctest::Approx(oc * oc / p.gamma_opt));
    SpectralParams bad = sp;
    bad.zeta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("spectral transfer") {
    const double mu = 1.18, zeta = 7e5, vg = 50.0, L = 0.06;
    const SpectralTransfer s0 = spectral_transfer(0.0, mu, zeta, vg, L);
    CHECK((s0.leading.full() - transfer_matrix(mu).full()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(s0.local_gain_coefficient == Complex(0.0, mu / L));

    // The prefactor phase falls linearly with slope -L / v_g.
    const double h = 100.0; // keeps nu L / v_g well inside (-pi, pi)
    const SpectralTransfer sp = spectral_transfer(h, mu, zeta, vg, L);
    const SpectralTransfer sm = spectral_transfer(-h, mu, zeta, vg, L);
    const double slope = wrap(std::arg(sp.leading.prefactor) - std::arg(sm.leading.prefactor), kTwoPi) / (2 * h);
    CHECK(slope == doctest::Approx(-L / vg).epsilon(1e-9));
    CHECK(sp.group_delay == doctest::Approx(L / vg));
    CHECK(std::abs(sp.leading.prefactor) == doctest::Approx(1.0));

    CHECK(sp.regime_ok);
    CHECK_FALSE(spectral_transfer(zeta, mu, zeta, vg, L).regime_ok);
    const SpectralTransfer edge = spectral_transfer(zeta, mu, zeta, vg, L);
    CHECK(std::abs(edge.local_gain_coefficient) == doctest::Approx(0.5 * mu / L));
}

TEST_CASE("dark-state polariton") {
    const Complex p(0.3, -0.1), rho(0.02, 0.05);
    CHECK(std::abs(dsp_transform(p, rho, 0.0, 0.0, 1.0, 2.0) - p) < 1e-15);
    const double z = 0.02, md = 20.0;
    CHECK(std::abs(dsp_transform(p, rho, 0.0, z, md, 2.0) - std::exp(Complex(0.0, -md * z)) * p) < 1e-15);
    const Complex atomic = dsp_transform(p, rho, kPi / 2, z, md, 2.0);
    const Complex expect = Complex(0.0, -std::sqrt(4.0 * kSpeedOfLight)) * rho;
    CHECK(std::abs(atomic - expect) < 1e-12 * std::abs(expect));

    for (double mu : {0.5, 1.18, 3.0}) {
        const Eigen::Vector2d ref = transfer_matrix(mu).singular_values();
        for (double nu : {-7e4, -1e3, 0.0, 2e4, 7e4}) {
            const TransferMatrix d = dsp_transfer_matrix(mu, nu, 50.0, 0.06);
            CHECK((d.singular_values() - ref).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(std::abs(d.determinant()) == doctest::Approx(1.0));
        }
        // Maximum amplitude gain of the polariton equals G_MAX.
        CHECK(ref(0) * ref(0) == doctest::Approx(gain_extrema(mu).g_max).epsilon(1e-12));
    }
}
