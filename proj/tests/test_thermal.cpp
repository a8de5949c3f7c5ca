#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mims/thermal.hpp"

using namespace mims;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CavityGeometry reference_geometry() {
    CavityGeometry g;
    g.length = 5e-3;
    g.wavelength = 514e-9;
    g.mode_index = mode_index_for_wavelength(g.length, g.wavelength);
    g.end_mirror_transmissivity = 1e-5;
    g.input_power_d = 1e-3;
    g.input_power_s = 1e-3;
    return g;
}

MiddleMirror reference_mirror() {
    MiddleMirror m;
    m.mass = 1e-9;
    m.omega_m = 2.0 * constants::pi * 2500.0;
    m.transmissivity = 1e-4;
    m.equilibrium_position = 5.14e-8;
    m.damping = 2e-11;
    m.temperature = 0.1;
    return m;
}

// e^{A t} for A = [[0, 1/m], [-m chi^2, -gamma]] in the underdamped case,
// via e^{-gamma t/2} (cos wt I + sin(wt)/w (A + gamma/2 I)), w^2 = chi^2 - gamma^2/4.
Eigen::Matrix2d analytic_drift(double mass, double chi_sq, double gamma, double t) {
    Eigen::Matrix2d a;
    a << 0.0, 1.0 / mass, -mass * chi_sq, -gamma;
    const double w = std::sqrt(chi_sq - 0.25 * gamma * gamma);
    const Eigen::Matrix2d shifted = a + 0.5 * gamma * Eigen::Matrix2d::Identity();
    return std::exp(-0.5 * gamma * t) *
           (std::cos(w * t) * Eigen::Matrix2d::Identity() + std::sin(w * t) / w * shifted);
}

}  // namespace

TEST_CASE("bose occupation") {
    SECTION("one quantum at the log-2 point") {
        CHECK_THAT(bose_occupation(std::log(2.0), 1.0, Units::natural()), WithinRel(1.0, 1e-14));
    }
    SECTION("zero temperature gives exactly zero") {
        CHECK(bose_occupation(1.0, 0.0) == 0.0);
        CHECK(bose_occupation(2.0 * constants::pi * 2500.0, 0.0) == 0.0);
    }
    SECTION("reference point, 2.5 kHz mirror at 100 mK") {
        const double n = bose_occupation(2.0 * constants::pi * 2500.0, 0.1);
        CHECK_THAT(n, WithinRel(833464.2654438829, 1e-12));  // mpmath
    }
    SECTION("classical limit n x -> 1") {
        const double x = 1e-6;
        const double n = bose_occupation(x, 1.0, Units::natural());
        CHECK_THAT(n * x, WithinRel(1.0, 1e-5));
        CHECK_THAT(n, WithinRel(1.0 / x - 0.5, 1e-6));
    }
    SECTION("invalid inputs") {
        CHECK_THROWS_AS(bose_occupation(1.0, -0.1), ValidationError);
        CHECK_THROWS_AS(bose_occupation(0.0, 1.0), ValidationError);
        CHECK_THROWS_AS(bath_from_occupation(-1.0), ValidationError);
    }
    SECTION("occupation-only bath hides the temperature") {
        const ThermalBath b = bath_from_occupation(0.5);
        CHECK(b.n_thermal == 0.5);
        CHECK(std::isnan(b.temperature));
    }
}

TEST_CASE("stationary position variance") {
    SECTION("natural-unit ground state in the stiffened potential") {
        const DerivedCouplings k = couplings_from_rates(0.0, 1.5, 1.0);  // chi_sq = 4
        const double v = stationary_position_variance(k, bath_from_occupation(0.0), 1.0, 0.1,
                                                      Units::natural());
        CHECK(v == 0.125);  // omega_m / (2 chi_sq)
    }
    SECTION("reference cavity at 100 mK") {
        const DerivedCouplings k =
            derive_couplings(reference_geometry(), reference_mirror(), {-1, +1});
        const ThermalBath bath = thermal_bath(k.omega_m, 0.1);
        const double v = stationary_position_variance(k, bath, 1e-9, 2e-11);
        CHECK_THAT(v, WithinRel(2.1163050120997275e-28, 1e-12));  // mpmath
    }
    SECTION("consistency with the uncertainty ratio") {
        const DerivedCouplings k = couplings_from_rates(0.0, 2.0, 3.0);
        const ThermalBath bath = bath_from_occupation(0.7);
        const double v = stationary_position_variance(k, bath, 1.0, 0.2, Units::natural());
        const double zero_point = 1.0 / (2.0 * k.omega_m);  // hbar/2m omega, natural units
        const UncertaintyRatio r = uncertainty_ratio(k, bath, Units::natural());
        CHECK_THAT(v / zero_point, WithinRel(r.ratio * r.ratio, 1e-14));
    }
    SECTION("requires damping and a bound potential") {
        const DerivedCouplings k = couplings_from_rates(0.0, 1.5, 1.0);
        CHECK_THROWS_AS(
            stationary_position_variance(k, bath_from_occupation(0.0), 1.0, 0.0, Units::natural()),
            ValidationError);
        const DerivedCouplings inverted = couplings_from_rates(0.0, -1.0, 1.0);
        CHECK_THROWS_AS(stationary_position_variance(inverted, bath_from_occupation(0.0), 1.0, 0.1,
                                                     Units::natural()),
                        RegimeError);
    }
    SECTION("high-temperature reference variance") {
        CHECK(high_temperature_position_variance(1.0, 1.0, 2.0, Units::natural()) == 2.0);
        const double v = high_temperature_position_variance(1e-9, 2.0 * constants::pi * 2500.0, 0.1);
        CHECK_THAT(v, WithinRel(1.380649e-24 / (1e-9 * std::pow(2.0 * constants::pi * 2500.0, 2)),
                                1e-14));
    }
}

TEST_CASE("uncertainty ratio") {
    SECTION("vacuum with no squeezing sits at the zero-point spread") {
        const DerivedCouplings k = couplings_from_rates(0.0, 0.0, 1.0);
        const UncertaintyRatio r = uncertainty_ratio(k, bath_from_occupation(0.0), Units::natural());
        CHECK(r.ratio == 1.0);
        CHECK(r.db_amplitude == 0.0);
        CHECK(r.db_variance == 0.0);
        CHECK(std::isnan(r.high_t_high_squeeze));
    }
    SECTION("pure squeezing halves the spread at chi = 2 omega_m") {
        const DerivedCouplings k = couplings_from_rates(0.0, 1.5, 1.0);
        const UncertaintyRatio r = uncertainty_ratio(k, bath_from_occupation(0.0), Units::natural());
        CHECK(r.ratio == 0.5);
        CHECK_THAT(r.db_amplitude, WithinRel(10.0 * std::log10(2.0), 1e-14));
    }
    SECTION("decibel conventions") {
        // ratio e^-4 and ratio 0.15, the two standing reference levels
        const DerivedCouplings deep = couplings_from_rates(0.0, 0.5 * (std::exp(8.0) - 1.0), 1.0);
        const UncertaintyRatio r4 = uncertainty_ratio(deep, bath_from_occupation(0.0), Units::natural());
        CHECK_THAT(r4.ratio, WithinRel(std::exp(-4.0), 1e-13));
        CHECK_THAT(r4.db_amplitude, WithinRel(17.371779276130074, 1e-12));  // mpmath

        const DerivedCouplings mild =
            couplings_from_rates(0.0, 0.5 * (1.0 / 0.0225 - 1.0), 1.0);
        const UncertaintyRatio r15 = uncertainty_ratio(mild, bath_from_occupation(0.0), Units::natural());
        CHECK_THAT(r15.ratio, WithinRel(0.15, 1e-13));
        CHECK_THAT(r15.db_amplitude, WithinRel(8.2390874094431883, 1e-12));  // mpmath

        CHECK(r4.db_variance == 2.0 * r4.db_amplitude);
        CHECK(r15.db_variance == 2.0 * r15.db_amplitude);
    }
    SECTION("reference cavity is thermally dominated") {
        const DerivedCouplings k =
            derive_couplings(reference_geometry(), reference_mirror(), {-1, +1});
        const ThermalBath bath = thermal_bath(k.omega_m, 0.1);
        const UncertaintyRatio r = uncertainty_ratio(k, bath);
        CHECK_THAT(r.ratio, WithinRel(7.9401002576529436, 1e-12));  // mpmath
        CHECK(r.db_amplitude < 0.0);  // spread above the zero-point level
        // high-temperature, high-squeeze closed form agrees to ~2e-5 here
        CHECK_THAT(r.high_t_high_squeeze, WithinRel(r.ratio, 1e-4));
        CHECK_THAT(r.high_t_high_squeeze,
                   WithinRel(std::sqrt(1.380649e-23 * 0.1 / (1.054571817e-34 * k.c_s)), 1e-14));
    }
    SECTION("monotone in the occupation") {
        const DerivedCouplings k = couplings_from_rates(0.0, 1.5, 1.0);
        double prev = 0.0;
        for (double n : {0.0, 0.5, 2.0, 100.0}) {
            const double cur = uncertainty_ratio(k, bath_from_occupation(n), Units::natural()).ratio;
            CHECK(cur > prev);
            prev = cur;
        }
    }
    SECTION("bound regime only") {
        const DerivedCouplings inverted = couplings_from_rates(0.0, -1.0, 1.0);
        CHECK_THROWS_AS(uncertainty_ratio(inverted, bath_from_occupation(0.0), Units::natural()),
                        RegimeError);
    }
}

TEST_CASE("langevin configuration") {
    const ThermalBath bath = bath_from_occupation(1.0);
    const LangevinConfig c = make_langevin_config(2.0, 0.5, 3.0, bath, 11, 0.01, 4, Units::natural());
    CHECK(c.damping_gamma == 0.25);
    CHECK(c.noise_strength == 0.5 * 3.0 * 3.0);  // D hbar omega (2n+1), hbar = 1
    CHECK(c.seed == 11);
    CHECK(c.n_trajectories == 4);
    CHECK_THROWS_AS(make_langevin_config(0.0, 0.5, 3.0, bath, 11, 0.01, 4, Units::natural()),
                    ValidationError);
    CHECK_THROWS_AS(make_langevin_config(2.0, 0.5, 3.0, bath, 11, 0.0, 4, Units::natural()),
                    ValidationError);
}

TEST_CASE("exact one-step update") {
    const DerivedCouplings k = couplings_from_rates(0.0, 1.5, 1.0);  // chi_sq = 4

    SECTION("drift matches the closed-form damped rotation") {
        LangevinConfig c;
        c.damping_gamma = 0.8;
        c.noise_strength = 0.0;
        c.dt = 0.05;
        c.n_trajectories = 1;
        const ExactStepper s(k, 1.0, c);
        const Eigen::Matrix2d ref = analytic_drift(1.0, 4.0, 0.8, 0.05);
        CHECK((s.drift - ref).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((s.noise).cwiseAbs().maxCoeff() == 0.0);
        CHECK_THAT(s.drift.determinant(), WithinRel(std::exp(-0.8 * 0.05), 1e-12));
    }
    SECTION("noise covariance matches direct quadrature") {
        LangevinConfig c;
        c.damping_gamma = 0.8;
        c.noise_strength = 1.7;
        c.dt = 0.05;
        c.n_trajectories = 1;
        const double mass = 1.3;
        const ExactStepper s(k, mass, c);
        // Simpson integration of e^{A u} diag(0,S) e^{A^T u} over the step
        const int panels = 200;
        const double h = c.dt / panels;
        Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
        for (int i = 0; i <= panels; ++i) {
            const Eigen::Matrix2d e = analytic_drift(mass, 4.0, 0.8, i * h);
            const double weight = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            q += weight * c.noise_strength * e.col(1) * e.col(1).transpose();
        }
        q *= h / 3.0;
        const Eigen::Matrix2d from_stepper = s.noise * s.noise.transpose();
        CHECK((from_stepper - q).cwiseAbs().maxCoeff() < 1e-10 * q.cwiseAbs().maxCoeff());
    }
    SECTION("analytic stationary covariance is a fixed point") {
        // Sigma = diag(<q^2>, <p^2>) with <q^2> the stationary variance and
        // <p^2> = S / (2 gamma); invariance F Sigma F^T + Q = Sigma ties the
        // discretization to the Lyapunov solution of the continuous SDE.
        const double mass = 1.3, damping = 0.481;
        const ThermalBath bath = bath_from_occupation(1.2);
        const LangevinConfig c =
            make_langevin_config(mass, damping, k.omega_m, bath, 1, 0.03, 1, Units::natural());
        const ExactStepper s(k, mass, c);
        Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
        sigma(0, 0) = stationary_position_variance(k, bath, mass, damping, Units::natural());
        sigma(1, 1) = c.noise_strength / (2.0 * c.damping_gamma);
        const Eigen::Matrix2d next =
            s.drift * sigma * s.drift.transpose() + s.noise * s.noise.transpose();
        CHECK((next - sigma).cwiseAbs().maxCoeff() < 1e-12 * sigma.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("langevin trajectories") {
    const DerivedCouplings k = couplings_from_rates(0.0, 0.4, 1.0);  // chi_sq = 1.8

    SECTION("deterministic replay") {
        const LangevinConfig c = make_langevin_config(1.0, 0.05, 1.0, bath_from_occupation(0.5),
                                                      99, 0.02, 8, Units::natural());
        const TrajectoryEnsemble a = langevin_trajectories(c, k, 1.0, 5.0);
        const TrajectoryEnsemble b = langevin_trajectories(c, k, 1.0, 5.0);
        CHECK((a.q - b.q).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.p - b.p).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.empirical_var_q == b.empirical_var_q);
    }
    SECTION("trajectory streams do not depend on the batch size") {
        LangevinConfig c = make_langevin_config(1.0, 0.05, 1.0, bath_from_occupation(0.5), 99,
                                                0.02, 2, Units::natural());
        const TrajectoryEnsemble small = langevin_trajectories(c, k, 1.0, 5.0);
        c.n_trajectories = 5;
        const TrajectoryEnsemble big = langevin_trajectories(c, k, 1.0, 5.0);
        CHECK((big.q.topRows(2) - small.q).cwiseAbs().maxCoeff() == 0.0);
        CHECK((big.p.topRows(2) - small.p).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("silent bath keeps the mirror parked") {
        const LangevinConfig c = make_langevin_config(1.0, 0.05, 1.0, bath_from_occupation(0.0),
                                                      1, 0.02, 3, Units::natural());
        LangevinConfig silent = c;
        silent.noise_strength = 0.0;
        const TrajectoryEnsemble out = langevin_trajectories(silent, k, 1.0, 5.0);
        CHECK(out.q.cwiseAbs().maxCoeff() == 0.0);
        CHECK(out.p.cwiseAbs().maxCoeff() == 0.0);
        CHECK(out.empirical_var_q == 0.0);
    }
    SECTION("recording grid") {
        const LangevinConfig c = make_langevin_config(1.0, 0.05, 1.0, bath_from_occupation(0.5),
                                                      99, 0.02, 1, Units::natural());
        const TrajectoryEnsemble out = langevin_trajectories(c, k, 1.0, 5.0, 11);
        REQUIRE(out.times.size() >= 2);
        for (std::size_t i = 1; i < out.times.size(); ++i) CHECK(out.times[i] > out.times[i - 1]);
        CHECK_THAT(out.times.back(), WithinRel(5.0, 1e-9));  // ceil to a whole step
        CHECK(out.q.cols() == static_cast<Eigen::Index>(out.times.size()));
    }
    SECTION("guards") {
        LangevinConfig c = make_langevin_config(1.0, 0.05, 1.0, bath_from_occupation(0.5), 99,
                                                0.5, 1, Units::natural());
        CHECK_THROWS_AS(langevin_trajectories(c, k, 1.0, 5.0), StepSizeError);
        c.dt = 0.02;
        const DerivedCouplings inverted = couplings_from_rates(0.0, -1.0, 1.0);
        CHECK_THROWS_AS(langevin_trajectories(c, inverted, 1.0, 5.0), RegimeError);
    }
    SECTION("ensemble variance reaches the stationary value") {
        const ThermalBath bath = bath_from_occupation(0.5);
        const LangevinConfig c =
            make_langevin_config(1.0, 0.05, 1.0, bath, 20260814, 0.02, 2000, Units::natural());
        const TrajectoryEnsemble out = langevin_trajectories(c, k, 1.0, 100.0, 21);
        const double target = stationary_position_variance(k, bath, 1.0, 0.05, Units::natural());
        CHECK_THAT(out.empirical_var_q, WithinRel(target, 0.05));
        CHECK(std::abs(out.empirical_mean_q) < 0.1);
        // transient: the ensemble starts from a point, so early spread is low
        const double early =
            (out.q.col(0).array() - out.q.col(0).mean()).square().sum() / (c.n_trajectories - 1);
        CHECK(early < out.empirical_var_q);
    }
}

TEST_CASE("noise spectrum is flat at the configured intensity") {
    const std::vector<double> omega = {0.5, 3.0, 10.0, 25.0};

    SECTION("levels sit on S within the estimator spread") {
        const SpectrumCheck s = noise_spectrum_check(2.0, 0.1, omega, 4000, 256, 5);
        CHECK(s.expected_level == 2.0);
        REQUIRE(s.level.size() == omega.size());
        for (double l : s.level) CHECK_THAT(l, WithinRel(2.0, 0.03));
    }
    SECTION("quadrupling the intensity scales every level exactly") {
        const SpectrumCheck base = noise_spectrum_check(2.0, 0.1, omega, 50, 64, 5);
        const SpectrumCheck loud = noise_spectrum_check(8.0, 0.1, omega, 50, 64, 5);
        for (std::size_t i = 0; i < omega.size(); ++i) {
            CHECK(loud.level[i] == 4.0 * base.level[i]);
        }
    }
    SECTION("zero intensity yields zero levels") {
        const SpectrumCheck s = noise_spectrum_check(0.0, 0.1, omega, 10, 64, 5);
        for (double l : s.level) CHECK(l == 0.0);
    }
}
