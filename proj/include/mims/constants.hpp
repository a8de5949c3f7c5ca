#pragma once

#include <numbers>

namespace mims::constants {

inline constexpr double speed_of_light = 299792458.0;   // m/s, exact by definition
inline constexpr double hbar = 1.054571817e-34;         // J s, CODATA 2018
inline constexpr double boltzmann = 1.380649e-23;       // J/K, exact by definition
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace mims::constants

namespace mims {

// hbar and k_B as used by the thermal formulas; natural() selects the
// hbar = m = omega_m = 1 convention used by toy configurations.
struct Units {
    double hbar = constants::hbar;
    double k_b = constants::boltzmann;

    static constexpr Units si() { return {constants::hbar, constants::boltzmann}; }
    static constexpr Units natural() { return {1.0, 1.0}; }
};

}  // namespace mims
