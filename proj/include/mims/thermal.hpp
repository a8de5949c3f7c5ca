#pragma once

/**
 * Thermal environment of the mirror: occupation of the bath, stationary
 * statistics of the damped mirror in the effective potential, and a
 * stochastic cross-check through Langevin trajectories
 *   dq = (p/m) dt,
 *   dp = (-m chi^2 q - gamma p) dt + eps(t) dt,   gamma = D_m / m,
 * with white noise <eps(t) eps(t')> = S delta(t - t'),
 *   S = D_m hbar omega_m (2 n_T + 1),
 * the unique intensity whose stationary Lyapunov solution gives
 *   <dq^2> = (2 n_T + 1) hbar omega_m / (2 m chi^2).
 *
 * Trajectories use the exact discretization of the linear SDE: drift via the
 * matrix exponential and the Gaussian increment drawn with its exact
 * covariance (Van Loan block-exponential construction), so the update is
 * unbiased for any step size; the step-size gate below only guards time
 * resolution of the recorded paths.
 */

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mims/constants.hpp"
#include "mims/errors.hpp"
#include "mims/system_model.hpp"

namespace mims {

struct ThermalBath {
    double temperature = 0.0;  // K; NaN when the bath is specified by occupation alone
    double n_thermal = 0.0;    // mean bath occupation at omega_m
};

/// Bose occupation n_T = 1 / (exp(hbar omega / k_B T) - 1); 0 at T = 0.
inline double bose_occupation(double omega_m, double temperature, const Units& units = Units::si()) {
    detail::require(omega_m > 0.0, "omega_m must be positive");
    detail::require(std::isfinite(temperature) && temperature >= 0.0,
                    "temperature must be non-negative");
    if (temperature == 0.0) return 0.0;
    const double x = units.hbar * omega_m / (units.k_b * temperature);
    return 1.0 / std::expm1(x);
}

inline ThermalBath thermal_bath(double omega_m, double temperature,
                                const Units& units = Units::si()) {
    return {temperature, bose_occupation(omega_m, temperature, units)};
}

inline ThermalBath bath_from_occupation(double n_thermal) {
    detail::require(std::isfinite(n_thermal) && n_thermal >= 0.0,
                    "n_thermal must be non-negative");
    return {std::numeric_limits<double>::quiet_NaN(), n_thermal};
}

/**
 * Stationary position variance (2 n_T + 1) hbar omega_m / (2 m chi_sq).
 * Requires the bound regime and nonzero damping (stationarity needs a
 * dissipation channel, although the value itself is damping independent).
 */
inline double stationary_position_variance(const DerivedCouplings& k, const ThermalBath& bath,
                                           double mass, double damping,
                                           const Units& units = Units::si()) {
    if (k.regime != Regime::BoundOscillator) {
        throw RegimeError("stationary variance requires the bound-oscillator regime; C_S = " +
                          std::to_string(k.c_s));
    }
    detail::require(mass > 0.0, "mass must be positive");
    detail::require(damping > 0.0, "stationarity requires positive damping");
    return (2.0 * bath.n_thermal + 1.0) * units.hbar * k.omega_m / (2.0 * mass * k.chi_sq);
}

/// High-temperature, softened-potential reference k_B T / (m omega_m^2).
inline double high_temperature_position_variance(double mass, double omega_m, double temperature,
                                                 const Units& units = Units::si()) {
    detail::require(mass > 0.0 && omega_m > 0.0, "mass and omega_m must be positive");
    return units.k_b * temperature / (mass * omega_m * omega_m);
}

struct UncertaintyRatio {
    double ratio = 1.0;            // sqrt(<dq^2> / (hbar / 2 m omega_m))
    double db_amplitude = 0.0;     // -10 log10(ratio)
    double db_variance = 0.0;      // -10 log10(ratio^2), exactly twice db_amplitude
    // sqrt(k_B T_e / hbar C_S); NaN when no physical temperature is known
    // or C_S <= 0.
    double high_t_high_squeeze = std::numeric_limits<double>::quiet_NaN();
};

/**
 * Position spread relative to the bare zero-point spread,
 *   R = sqrt((2 n_T + 1) omega_m / (omega_m + 2 C_S)),
 * with both decibel conventions attached. R < 1 means squeezing below the
 * zero-point level.
 */
inline UncertaintyRatio uncertainty_ratio(const DerivedCouplings& k, const ThermalBath& bath,
                                          const Units& units = Units::si()) {
    if (k.regime != Regime::BoundOscillator) {
        throw RegimeError("uncertainty ratio requires the bound-oscillator regime; C_S = " +
                          std::to_string(k.c_s));
    }
    UncertaintyRatio r;
    r.ratio = std::sqrt((2.0 * bath.n_thermal + 1.0) * k.omega_m / (k.omega_m + 2.0 * k.c_s));
    const double l = std::log10(r.ratio);
    r.db_amplitude = -10.0 * l;
    r.db_variance = -20.0 * l;
    if (std::isfinite(bath.temperature) && bath.temperature > 0.0 && k.c_s > 0.0) {
        r.high_t_high_squeeze = std::sqrt(units.k_b * bath.temperature / (units.hbar * k.c_s));
    }
    return r;
}

// ----------------------------------------------------------------- Langevin

struct LangevinConfig {
    double damping_gamma = 0.0;   // gamma = D_m / m, 1/s
    double noise_strength = 0.0;  // S = D_m hbar omega_m (2 n_T + 1)
    std::uint64_t seed = 1;
    double dt = 0.0;              // s
    int n_trajectories = 0;
};

inline LangevinConfig make_langevin_config(double mass, double damping, double omega_m,
                                           const ThermalBath& bath, std::uint64_t seed, double dt,
                                           int n_trajectories, const Units& units = Units::si()) {
    detail::require(mass > 0.0, "mass must be positive");
    detail::require(damping >= 0.0, "damping must be non-negative");
    detail::require(dt > 0.0, "dt must be positive");
    detail::require(n_trajectories >= 1, "n_trajectories must be at least 1");
    LangevinConfig c;
    c.damping_gamma = damping / mass;
    c.noise_strength = damping * units.hbar * omega_m * (2.0 * bath.n_thermal + 1.0);
    c.seed = seed;
    c.dt = dt;
    c.n_trajectories = n_trajectories;
    return c;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stream seed for one trajectory; depends only on (seed, index), so the
// ensemble is bit-identical under any execution order.
inline std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x9E3779B97F4A7C15ull));
}

// Box-Muller over the standardized mt19937_64 stream; avoids the
// implementation-defined std::normal_distribution sequence.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // 1 - u1 in (0, 1]
        const double a = constants::two_pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  // [0, 1)

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace detail

/**
 * One-step exact update x -> F x + L z, z ~ N(0, I), for the linear SDE with
 * drift A = [[0, 1/m], [-m chi_sq, -gamma]] and diffusion diag(0, S):
 * F = exp(A dt) and L L^T = integral of exp(A s) diag(0,S) exp(A^T s) ds over
 * one step, both from the Van Loan block exponential.
 */
struct ExactStepper {
    Eigen::Matrix2d drift;  // F
    Eigen::Matrix2d noise;  // L, lower triangular

    ExactStepper(const DerivedCouplings& k, double mass, const LangevinConfig& config) {
        Eigen::Matrix2d a;
        a << 0.0, 1.0 / mass, -mass * k.chi_sq, -config.damping_gamma;
        Eigen::Matrix4d block = Eigen::Matrix4d::Zero();
        block.topLeftCorner<2, 2>() = a;
        block(1, 3) = config.noise_strength;  // diffusion enters the p row only
        block.bottomRightCorner<2, 2>() = -a.transpose();
        const Eigen::Matrix4d e = (block * config.dt).exp();
        drift = e.topLeftCorner<2, 2>();
        Eigen::Matrix2d q = e.topRightCorner<2, 2>() * drift.transpose();
        q = 0.5 * (q + q.transpose()).eval();
        // hand-rolled 2x2 Cholesky; clamps the roundoff-negative corner that
        // can appear when the noise is many orders below the drift scale
        noise = Eigen::Matrix2d::Zero();
        if (config.noise_strength > 0.0) {
            const double l11 = std::sqrt(std::max(q(0, 0), 0.0));
            noise(0, 0) = l11;
            if (l11 > 0.0) {
                noise(1, 0) = q(1, 0) / l11;
                noise(1, 1) = std::sqrt(std::max(q(1, 1) - noise(1, 0) * noise(1, 0), 0.0));
            } else {
                noise(1, 1) = std::sqrt(std::max(q(1, 1), 0.0));
            }
        }
    }
};

struct TrajectoryEnsemble {
    std::vector<double> times;  // recorded times; last entry is the final step
    Eigen::MatrixXd q;          // n_trajectories x times.size()
    Eigen::MatrixXd p;
    double empirical_mean_q = 0.0;
    double empirical_var_q = 0.0;  // unbiased ensemble variance at the final time
};

/**
 * Ensemble of exact-update trajectories from (q, p) = (0, 0). Recorded at
 * roughly n_snapshots evenly strided step times plus the final step.
 * Deterministic for a fixed seed under any trajectory execution order.
 * Throws StepSizeError unless dt < 0.01 min(2 pi / chi, 1 / gamma).
 */
inline TrajectoryEnsemble langevin_trajectories(const LangevinConfig& config,
                                                const DerivedCouplings& k, double mass,
                                                double t_final, int n_snapshots = 33) {
    if (k.regime != Regime::BoundOscillator) {
        throw RegimeError("langevin trajectories require the bound-oscillator regime; C_S = " +
                          std::to_string(k.c_s));
    }
    detail::require(mass > 0.0, "mass must be positive");
    detail::require(t_final > 0.0, "t_final must be positive");
    detail::require(config.dt > 0.0, "dt must be positive");
    detail::require(config.n_trajectories >= 1, "n_trajectories must be at least 1");
    detail::require(n_snapshots >= 2, "need at least two snapshots");

    double resolution = constants::two_pi / std::sqrt(k.chi_sq);
    if (config.damping_gamma > 0.0)
        resolution = std::min(resolution, 1.0 / config.damping_gamma);
    if (!(config.dt < 0.01 * resolution)) {
        throw StepSizeError("dt = " + std::to_string(config.dt) +
                            " does not resolve the dynamics; require dt < " +
                            std::to_string(0.01 * resolution));
    }

    const auto n_steps = static_cast<long>(std::ceil(t_final / config.dt));
    const long stride = std::max(1L, n_steps / (n_snapshots - 1));
    std::vector<long> record_steps;
    for (long s = stride; s < n_steps; s += stride) record_steps.push_back(s);
    record_steps.push_back(n_steps);

    const ExactStepper stepper(k, mass, config);

    TrajectoryEnsemble out;
    out.times.reserve(record_steps.size());
    for (long s : record_steps) out.times.push_back(static_cast<double>(s) * config.dt);
    out.q.resize(config.n_trajectories, static_cast<Eigen::Index>(record_steps.size()));
    out.p.resize(config.n_trajectories, static_cast<Eigen::Index>(record_steps.size()));

    for (int traj = 0; traj < config.n_trajectories; ++traj) {
        detail::GaussianSampler noise(detail::trajectory_seed(config.seed, traj));
        Eigen::Vector2d x = Eigen::Vector2d::Zero();
        std::size_t next_record = 0;
        for (long s = 1; s <= n_steps; ++s) {
            const Eigen::Vector2d z(noise.next(), noise.next());
            x = stepper.drift * x + stepper.noise * z;
            if (next_record < record_steps.size() && s == record_steps[next_record]) {
                out.q(traj, static_cast<Eigen::Index>(next_record)) = x(0);
                out.p(traj, static_cast<Eigen::Index>(next_record)) = x(1);
                ++next_record;
            }
        }
    }

    const auto last = static_cast<Eigen::Index>(record_steps.size()) - 1;
    const double mean = out.q.col(last).mean();
    out.empirical_mean_q = mean;
    if (config.n_trajectories > 1) {
        out.empirical_var_q =
            (out.q.col(last).array() - mean).square().sum() / (config.n_trajectories - 1);
    }
    return out;
}

// ----------------------------------------------------------------- spectrum

struct SpectrumCheck {
    std::vector<double> omega;
    std::vector<double> level;     // Bartlett-averaged periodogram per frequency
    double expected_level = 0.0;   // the white-noise intensity S
};

/**
 * Consistency check of the noise convention: draws the discrete white-noise
 * sequence eps_k ~ N(0, S/dt) and Bartlett-averages the periodogram
 *   P(omega) = dt |sum_k eps_k exp(-i omega k dt)|^2 / L
 * over segments. For white noise the expected level is S at every frequency,
 * flat up to the 1/sqrt(n_segments) estimator spread.
 */
inline SpectrumCheck noise_spectrum_check(double noise_strength, double dt,
                                          std::span<const double> omega_grid,
                                          int n_segments = 2000, int segment_length = 256,
                                          std::uint64_t seed = 1) {
    detail::require(noise_strength >= 0.0, "noise strength must be non-negative");
    detail::require(dt > 0.0, "dt must be positive");
    detail::require(n_segments >= 1 && segment_length >= 8, "segmentation too small");
    SpectrumCheck out;
    out.omega.assign(omega_grid.begin(), omega_grid.end());
    out.level.assign(omega_grid.size(), 0.0);
    out.expected_level = noise_strength;
    if (noise_strength == 0.0) return out;

    const double sigma = std::sqrt(noise_strength / dt);
    detail::GaussianSampler sampler(detail::splitmix64(seed));
    std::vector<double> eps(static_cast<std::size_t>(segment_length));
    for (int seg = 0; seg < n_segments; ++seg) {
        for (auto& e : eps) e = sigma * sampler.next();
        for (std::size_t j = 0; j < out.omega.size(); ++j) {
            // Goertzel-style accumulation of the DFT at one frequency
            const double phi = out.omega[j] * dt;
            const double cp = std::cos(phi), sp = std::sin(phi);
            double cr = 1.0, ci = 0.0;  // exp(-i phi k), advanced per sample
            double re = 0.0, im = 0.0;
            for (double e : eps) {
                re += e * cr;
                im -= e * ci;
                const double nr = cr * cp - ci * sp;
                ci = cr * sp + ci * cp;
                cr = nr;
            }
            out.level[j] += dt * (re * re + im * im) / segment_length;
        }
    }
    for (auto& l : out.level) l /= n_segments;
    return out;
}

}  // namespace mims
