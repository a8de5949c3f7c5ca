#pragma once

/**
 * Optical system model for a two-mode cavity with a partially transmissive
 * mirror suspended at its midpoint. One driven mode couples to the mirror
 * position linearly through its damping channel (dissipative coupling, rate
 * xi_D per photon), the other couples to the squared position (dispersive
 * coupling, rate xi_S per photon). This header derives the per-photon
 * coupling rates, the shifted mode frequencies, the intracavity photon
 * numbers and the semiclassical drive/squeeze rates C_D, C_S consumed by the
 * evolution modules.
 */

#include <cmath>
#include <limits>
#include <string>

#include "mims/constants.hpp"
#include "mims/errors.hpp"

namespace mims {

struct CavityGeometry {
    double length = 0.0;                     // L, m
    int mode_index = 0;                      // n, longitudinal index
    double wavelength = 0.0;                 // lambda, m (documentation of the mode)
    double end_mirror_transmissivity = 0.0;  // T_end, in (0, 1)
    double input_power_d = 0.0;              // W, drive of the dissipatively coupled mode
    double input_power_s = 0.0;              // W, drive of the dispersively coupled mode
};

struct MiddleMirror {
    double mass = 0.0;                  // m, kg
    double omega_m = 0.0;               // mechanical frequency, rad/s
    double transmissivity = 0.0;        // T, in (0, 1)
    double equilibrium_position = 0.0;  // q0, m, measured from the cavity midpoint
    double damping = 0.0;               // D_m, kg/s
    double temperature = 0.0;           // T_e, K
};

// Branch selectors for the mode frequencies; also the signs of xi_D and xi_S.
struct CouplingSigns {
    int sign_d = -1;
    int sign_s = +1;
};

// Per-mode rates fixed by the empty-cavity geometry alone.
struct BaseRates {
    double omega_n = 0.0;  // n pi c / L, rad/s
    double xi = 0.0;       // omega_n / L, rad/(s m)
    double k_n = 0.0;      // omega_n / c, rad/m
    double tau = 0.0;      // 2 L / c, s (cavity round-trip time)
};

enum class Regime {
    BoundOscillator,    // chi_sq > 0
    FreeParticle,       // C_S within the critical band around -omega_m/2
    InvertedOscillator  // chi_sq < 0
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::BoundOscillator: return "bound_oscillator";
        case Regime::FreeParticle: return "free_particle";
        case Regime::InvertedOscillator: return "inverted_oscillator";
    }
    return "unknown";
}

/**
 * Everything derived from (geometry, mirror, signs). The semiclassical rates
 * c_d, c_s, c_r and chi_sq are the contract consumed by the evolution and
 * thermal modules; the optical fields document the derivation chain. For
 * couplings built directly from rates (natural-units runs) the optical
 * fields are NaN.
 *
 * Invariants: c_r = c_s + omega_m exactly as stored;
 *             chi_sq = omega_m * (omega_m + 2 c_s).
 */
struct DerivedCouplings {
    double xi_d = std::numeric_limits<double>::quiet_NaN();
    double xi_s = std::numeric_limits<double>::quiet_NaN();
    double omega_d = std::numeric_limits<double>::quiet_NaN();
    double omega_s = std::numeric_limits<double>::quiet_NaN();
    double n_alpha = std::numeric_limits<double>::quiet_NaN();
    double n_beta = std::numeric_limits<double>::quiet_NaN();
    double c_d = 0.0;      // rad/s, drive rate
    double c_s = 0.0;      // rad/s, squeeze rate
    double c_r = 0.0;      // rad/s, c_s + omega_m
    double omega_m = 0.0;  // rad/s
    double chi_sq = 0.0;   // rad^2/s^2, effective squared frequency
    Regime regime = Regime::BoundOscillator;

    // Effective oscillation frequency; only meaningful in the bound regime.
    double chi() const {
        if (chi_sq <= 0.0) throw RegimeError("chi is undefined for chi_sq <= 0");
        return std::sqrt(chi_sq);
    }
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace detail

inline void validate(const CavityGeometry& g) {
    using detail::require;
    require(detail::finite(g.length) && g.length > 0.0, "cavity length must be positive");
    require(g.mode_index >= 1, "mode_index must be a positive integer");
    require(detail::finite(g.wavelength) && g.wavelength > 0.0, "wavelength must be positive");
    require(detail::finite(g.end_mirror_transmissivity) && g.end_mirror_transmissivity > 0.0 &&
                g.end_mirror_transmissivity < 1.0,
            "end_mirror_transmissivity must lie in (0, 1)");
    require(detail::finite(g.input_power_d) && g.input_power_d >= 0.0,
            "input_power_d must be non-negative");
    require(detail::finite(g.input_power_s) && g.input_power_s >= 0.0,
            "input_power_s must be non-negative");
}

inline void validate(const MiddleMirror& m) {
    using detail::require;
    require(detail::finite(m.mass) && m.mass > 0.0, "mirror mass must be positive");
    require(detail::finite(m.omega_m) && m.omega_m > 0.0, "omega_m must be positive");
    require(detail::finite(m.transmissivity) && m.transmissivity > 0.0 &&
                m.transmissivity < 1.0,
            "mirror transmissivity must lie in (0, 1)");
    require(detail::finite(m.equilibrium_position), "equilibrium_position must be finite");
    require(detail::finite(m.damping) && m.damping >= 0.0, "damping must be non-negative");
    require(detail::finite(m.temperature) && m.temperature >= 0.0,
            "temperature must be non-negative");
}

inline void validate(const CouplingSigns& s) {
    detail::require(s.sign_d == 1 || s.sign_d == -1, "sign_d must be +1 or -1");
    detail::require(s.sign_s == 1 || s.sign_s == -1, "sign_s must be +1 or -1");
}

// Longitudinal index whose resonance n pi c / L sits closest to 2 pi c / lambda.
inline int mode_index_for_wavelength(double length, double wavelength) {
    detail::require(length > 0.0 && wavelength > 0.0,
                    "length and wavelength must be positive");
    double n = std::round(2.0 * length / wavelength);
    detail::require(n >= 1.0 && n < 2.1e9, "wavelength does not select a valid mode index");
    return static_cast<int>(n);
}

inline BaseRates base_rates(const CavityGeometry& g) {
    validate(g);
    BaseRates r;
    r.omega_n = g.mode_index * constants::pi * constants::speed_of_light / g.length;
    r.xi = r.omega_n / g.length;
    r.k_n = r.omega_n / constants::speed_of_light;
    r.tau = 2.0 * g.length / constants::speed_of_light;
    return r;
}

/**
 * Per-photon dissipative coupling rate
 *   xi_D = sign_d * sin(2 k_n q0) * xi / sqrt(1/(1-T) - cos^2(2 k_n q0)).
 * Periodic in q0 with period pi/k_n; vanishes as T -> 1.
 */
inline double dissipative_coupling(const BaseRates& rates, const MiddleMirror& mirror,
                                   int sign_d) {
    validate(mirror);
    detail::require(sign_d == 1 || sign_d == -1, "sign_d must be +1 or -1");
    const double theta = 2.0 * rates.k_n * mirror.equilibrium_position;
    const double c = std::cos(theta);
    const double denom = 1.0 / (1.0 - mirror.transmissivity) - c * c;
    // Below this floor the subtraction has no significant bits left.
    constexpr double kDenomFloor = 1e-14;
    if (!(denom > kDenomFloor)) {
        throw DegenerateCouplingError(
            "dissipative coupling denominator " + std::to_string(denom) +
            " below numerical floor; mirror placement is degenerate");
    }
    return sign_d * std::sin(theta) * rates.xi / std::sqrt(denom);
}

/**
 * Per-photon dispersive coupling rate
 *   xi_S = sign_s * (tau xi^2 / 2) * sqrt((1-T)/T),
 * monotonically decreasing in |.| as the mirror becomes more transparent.
 */
inline double dispersive_coupling(const BaseRates& rates, const MiddleMirror& mirror,
                                  int sign_s) {
    validate(mirror);
    detail::require(sign_s == 1 || sign_s == -1, "sign_s must be +1 or -1");
    const double t = mirror.transmissivity;
    return sign_s * 0.5 * rates.tau * rates.xi * rates.xi * std::sqrt((1.0 - t) / t);
}

struct ModeFrequencies {
    double omega_d = 0.0;
    double omega_s = 0.0;
};

/**
 * Frequencies of the two driven modes for the selected coupling branches.
 * sign_s < 0 leaves omega_s = omega_n untouched (bit-exact); the positive
 * branches acquire shifts of order 1/tau.
 */
inline ModeFrequencies mode_frequencies(const BaseRates& rates, const MiddleMirror& mirror,
                                        const CouplingSigns& signs) {
    validate(mirror);
    validate(signs);
    const double theta = 2.0 * rates.k_n * mirror.equilibrium_position;
    const double root = std::sqrt(1.0 - mirror.transmissivity);
    ModeFrequencies f;
    if (signs.sign_d < 0) {
        f.omega_d =
            rates.omega_n - (std::asin(root) - std::asin(root * std::cos(theta))) / rates.tau;
    } else {
        f.omega_d = rates.omega_n + constants::pi / rates.tau -
                    (std::asin(root) + std::asin(root * std::cos(theta))) / rates.tau;
    }
    if (signs.sign_s < 0) {
        f.omega_s = rates.omega_n;
    } else {
        f.omega_s = rates.omega_n + 2.0 * std::acos(root) / rates.tau;
    }
    return f;
}

/**
 * Steady-state photon number of a driven mode,
 *   n = 4 P / (hbar omega kappa_cav),  kappa_cav = c T_end / (2 L).
 * Linear in the input power.
 */
inline double intracavity_photon_number(const CavityGeometry& g, double input_power,
                                        double mode_frequency) {
    validate(g);
    detail::require(detail::finite(input_power) && input_power >= 0.0,
                    "input power must be non-negative");
    detail::require(detail::finite(mode_frequency) && mode_frequency > 0.0,
                    "mode frequency must be positive");
    const double kappa_cav =
        constants::speed_of_light * g.end_mirror_transmissivity / (2.0 * g.length);
    return 4.0 * input_power / (constants::hbar * mode_frequency * kappa_cav);
}

// Classification includes a tolerance band around the critical point
// C_S = -omega_m/2 where chi_sq crosses zero.
inline constexpr double kFreeParticleBand = 1e-9;

inline Regime classify_regime(double c_s, double omega_m) {
    detail::require(omega_m > 0.0, "omega_m must be positive");
    if (std::abs(c_s + 0.5 * omega_m) <= kFreeParticleBand * omega_m)
        return Regime::FreeParticle;
    return omega_m * (omega_m + 2.0 * c_s) > 0.0 ? Regime::BoundOscillator
                                                 : Regime::InvertedOscillator;
}

// Semiclassical rates given directly (natural units hbar = m = 1); the
// optical fields stay NaN.
inline DerivedCouplings couplings_from_rates(double c_d, double c_s, double omega_m) {
    detail::require(detail::finite(c_d) && detail::finite(c_s), "rates must be finite");
    detail::require(detail::finite(omega_m) && omega_m > 0.0, "omega_m must be positive");
    DerivedCouplings k;
    k.c_d = c_d;
    k.c_s = c_s;
    k.c_r = c_s + omega_m;
    k.omega_m = omega_m;
    k.chi_sq = omega_m * (omega_m + 2.0 * c_s);
    k.regime = classify_regime(c_s, omega_m);
    return k;
}

/**
 * Full derivation chain from geometry to semiclassical rates:
 *   C_D = xi_D n_alpha sqrt(hbar / (2 m omega_m)),
 *   C_S = hbar xi_S n_beta / (m omega_m),
 *   C_R = C_S + omega_m,  chi_sq = omega_m (omega_m + 2 C_S).
 */
inline DerivedCouplings derive_couplings(const CavityGeometry& g, const MiddleMirror& mirror,
                                         const CouplingSigns& signs) {
    validate(g);
    validate(mirror);
    validate(signs);
    const BaseRates rates = base_rates(g);
    DerivedCouplings k;
    k.xi_d = dissipative_coupling(rates, mirror, signs.sign_d);
    k.xi_s = dispersive_coupling(rates, mirror, signs.sign_s);
    const ModeFrequencies freq = mode_frequencies(rates, mirror, signs);
    k.omega_d = freq.omega_d;
    k.omega_s = freq.omega_s;
    k.n_alpha = intracavity_photon_number(g, g.input_power_d, freq.omega_d);
    k.n_beta = intracavity_photon_number(g, g.input_power_s, freq.omega_s);
    const double zpf = std::sqrt(constants::hbar / (2.0 * mirror.mass * mirror.omega_m));
    k.c_d = k.xi_d * k.n_alpha * zpf;
    k.c_s = constants::hbar * k.xi_s * k.n_beta / (mirror.mass * mirror.omega_m);
    k.c_r = k.c_s + mirror.omega_m;
    k.omega_m = mirror.omega_m;
    k.chi_sq = mirror.omega_m * (mirror.omega_m + 2.0 * k.c_s);
    k.regime = classify_regime(k.c_s, mirror.omega_m);
    return k;
}

}  // namespace mims
