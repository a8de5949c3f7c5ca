#pragma once

/**
 * Run configuration: a flat `key = value` document with `#` comments.
 *
 * Values are typed scalars. Dimensioned quantities carry an explicit unit
 * suffix ("mass = 1 ug") and angular frequencies additionally require either
 * rad/s or an explicit 2pi* prefix on a plain-frequency unit
 * ("omega_m = 2pi*2.5 kHz"); a bare Hz value is rejected as ambiguous.
 * With `natural_units = true` the document switches to the dimensionless
 * parameter set (hbar = 1, mass = 1) and unit suffixes become errors.
 *
 * serialize_config() emits the normalized form (canonical key order, SI base
 * units, 17 significant digits); parsing it back is the identity.
 */

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mims/constants.hpp"
#include "mims/errors.hpp"
#include "mims/system_model.hpp"
#include "mims/thermal.hpp"

namespace mims {

enum class OutputFormat { Csv, Json };

inline std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

struct RunConfig {
    bool natural_units = false;

    // physical mode
    CavityGeometry geometry;
    MiddleMirror mirror;
    CouplingSigns signs;

    // natural-units mode (hbar = 1, mass = 1)
    double natural_omega_m = std::numeric_limits<double>::quiet_NaN();
    double natural_c_d = std::numeric_limits<double>::quiet_NaN();
    double natural_c_s = std::numeric_limits<double>::quiet_NaN();
    double n_thermal = 0.0;
    double damping_gamma = 0.0;

    // time grid
    double t_start = 0.0;
    double t_end = std::numeric_limits<double>::quiet_NaN();
    int n_points = 200;

    // oracle ladder
    std::vector<int> fock_levels = {8, 16, 32, 64, 80};

    // stochastic settings
    std::uint64_t seed = 1;
    double dt = std::numeric_limits<double>::quiet_NaN();
    int n_trajectories = 0;

    // output
    OutputFormat format = OutputFormat::Csv;
    std::string output_dir = ".";

    Units units() const { return natural_units ? Units::natural() : Units::si(); }
    double mass() const { return natural_units ? 1.0 : mirror.mass; }
    double omega_m() const { return natural_units ? natural_omega_m : mirror.omega_m; }
    double damping() const { return natural_units ? damping_gamma : mirror.damping; }

    DerivedCouplings derive() const {
        if (natural_units) return couplings_from_rates(natural_c_d, natural_c_s, natural_omega_m);
        return derive_couplings(geometry, mirror, signs);
    }

    ThermalBath bath() const {
        if (natural_units) return bath_from_occupation(n_thermal);
        return thermal_bath(mirror.omega_m, mirror.temperature, units());
    }
};

namespace detail {

enum class Dimension {
    Scalar,       // dimensionless floating point
    Length,
    Mass,
    Time,
    AngularFrequency,
    Power,
    Temperature,
    Damping,      // kg/s
};

struct UnitEntry {
    std::string_view token;
    Dimension dimension;
    double factor;
    bool needs_two_pi;  // plain-frequency units are only meaningful with 2pi*
};

inline constexpr std::array<UnitEntry, 26> kUnits = {{
    {"m", Dimension::Length, 1.0, false},
    {"mm", Dimension::Length, 1e-3, false},
    {"um", Dimension::Length, 1e-6, false},
    {"nm", Dimension::Length, 1e-9, false},
    {"pm", Dimension::Length, 1e-12, false},
    {"kg", Dimension::Mass, 1.0, false},
    {"g", Dimension::Mass, 1e-3, false},
    {"mg", Dimension::Mass, 1e-6, false},
    {"ug", Dimension::Mass, 1e-9, false},
    {"ng", Dimension::Mass, 1e-12, false},
    {"s", Dimension::Time, 1.0, false},
    {"ms", Dimension::Time, 1e-3, false},
    {"us", Dimension::Time, 1e-6, false},
    {"ns", Dimension::Time, 1e-9, false},
    {"rad/s", Dimension::AngularFrequency, 1.0, false},
    {"Hz", Dimension::AngularFrequency, 1.0, true},
    {"kHz", Dimension::AngularFrequency, 1e3, true},
    {"MHz", Dimension::AngularFrequency, 1e6, true},
    {"GHz", Dimension::AngularFrequency, 1e9, true},
    {"W", Dimension::Power, 1.0, false},
    {"mW", Dimension::Power, 1e-3, false},
    {"uW", Dimension::Power, 1e-6, false},
    {"nW", Dimension::Power, 1e-9, false},
    {"K", Dimension::Temperature, 1.0, false},
    {"mK", Dimension::Temperature, 1e-3, false},
    {"kg/s", Dimension::Damping, 1.0, false},
}};

// damping quoted as mass x frequency (1 ug*Hz = 1e-9 kg/s)
inline constexpr std::array<UnitEntry, 3> kDampingProducts = {{
    {"ug*Hz", Dimension::Damping, 1e-9, false},
    {"ng*Hz", Dimension::Damping, 1e-12, false},
    {"mg*Hz", Dimension::Damping, 1e-6, false},
}};

inline const UnitEntry* find_unit(std::string_view token) {
    for (const auto& u : kUnits)
        if (u.token == token) return &u;
    for (const auto& u : kDampingProducts)
        if (u.token == token) return &u;
    return nullptr;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Scalar: return "dimensionless";
        case Dimension::Length: return "length";
        case Dimension::Mass: return "mass";
        case Dimension::Time: return "time";
        case Dimension::AngularFrequency: return "angular frequency";
        case Dimension::Power: return "power";
        case Dimension::Temperature: return "temperature";
        case Dimension::Damping: return "damping";
    }
    return "unknown";
}

struct RawValue {
    std::string key;
    std::string text;  // value text, trimmed
    int line = 0;
    int column = 0;  // 1-based column of the value text
};

/// Parses ["2pi*"] number [unit] into SI, enforcing the key's dimension.
inline double parse_quantity(const RawValue& raw, Dimension dimension, bool natural) {
    std::string_view text = trim(raw.text);
    double prefix = 1.0;
    if (text.substr(0, 4) == "2pi*") {
        prefix = constants::two_pi;
        text.remove_prefix(4);
        text = trim(text);
    }
    if (text.empty()) throw ParseError("missing numeric value", raw.line, raw.column);

    const std::string number_text(text);
    char* end = nullptr;
    const double magnitude = std::strtod(number_text.c_str(), &end);
    if (end == number_text.c_str()) {
        throw ParseError("expected a number for key '" + raw.key + "'", raw.line, raw.column);
    }
    if (!std::isfinite(magnitude)) {
        throw ValidationError("key '" + raw.key + "' must be finite");
    }
    const std::string_view unit_text = trim(std::string_view(end));

    if (unit_text.empty()) {
        if (!natural && dimension != Dimension::Scalar) {
            throw ValidationError("key '" + raw.key + "' requires a " +
                                  dimension_name(dimension) +
                                  " unit suffix (natural_units is off)");
        }
        return prefix * magnitude;
    }

    if (natural) {
        throw ValidationError("key '" + raw.key + "' carries a unit suffix '" +
                              std::string(unit_text) + "' but natural_units is on");
    }
    if (dimension == Dimension::Scalar) {
        throw ValidationError("key '" + raw.key + "' is dimensionless; unexpected suffix '" +
                              std::string(unit_text) + "'");
    }
    const UnitEntry* unit = find_unit(unit_text);
    if (unit == nullptr) {
        throw ParseError("unknown unit '" + std::string(unit_text) + "'", raw.line, raw.column);
    }
    if (unit->dimension != dimension) {
        throw ValidationError("key '" + raw.key + "' expects a " + dimension_name(dimension) +
                              " unit, got '" + std::string(unit_text) + "' (" +
                              dimension_name(unit->dimension) + ")");
    }
    if (unit->needs_two_pi && prefix == 1.0) {
        throw ValidationError("key '" + raw.key + "': plain " + std::string(unit_text) +
                              " is ambiguous for an angular frequency; write 2pi*... " +
                              std::string(unit_text) + " or ... rad/s");
    }
    return prefix * magnitude * unit->factor;
}

inline long long parse_integer(const RawValue& raw) {
    const std::string text(trim(raw.text));
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0') {
        throw ParseError("expected an integer for key '" + raw.key + "'", raw.line, raw.column);
    }
    return v;
}

inline std::uint64_t parse_unsigned(const RawValue& raw) {
    const std::string text(trim(raw.text));
    if (text.empty() || text[0] == '-') {
        throw ParseError("expected an unsigned integer for key '" + raw.key + "'", raw.line,
                         raw.column);
    }
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0') {
        throw ParseError("expected an unsigned integer for key '" + raw.key + "'", raw.line,
                         raw.column);
    }
    return v;
}

inline bool parse_bool(const RawValue& raw) {
    const std::string_view text = trim(raw.text);
    if (text == "true") return true;
    if (text == "false") return false;
    throw ParseError("expected true or false for key '" + raw.key + "'", raw.line, raw.column);
}

inline int parse_sign(const RawValue& raw) {
    const std::string_view text = trim(raw.text);
    if (text == "+1" || text == "1") return 1;
    if (text == "-1") return -1;
    throw ParseError("expected +1 or -1 for key '" + raw.key + "'", raw.line, raw.column);
}

inline std::vector<int> parse_int_list(const RawValue& raw) {
    std::vector<int> out;
    std::string_view text = trim(raw.text);
    while (!text.empty()) {
        const std::size_t comma = text.find(',');
        const std::string item(trim(text.substr(0, comma)));
        if (item.empty()) {
            throw ParseError("empty entry in list for key '" + raw.key + "'", raw.line,
                             raw.column);
        }
        char* end = nullptr;
        const long v = std::strtol(item.c_str(), &end, 10);
        if (end == item.c_str() || *end != '\0') {
            throw ParseError("expected integers for key '" + raw.key + "'", raw.line, raw.column);
        }
        out.push_back(static_cast<int>(v));
        if (comma == std::string_view::npos) break;
        text = text.substr(comma + 1);
    }
    if (out.empty()) {
        throw ParseError("empty list for key '" + raw.key + "'", raw.line, raw.column);
    }
    return out;
}

inline constexpr std::array<std::string_view, 10> kCommonKeys = {
    "natural_units", "t_start", "t_end",   "n_points", "fock_levels",
    "seed",          "dt",      "n_trajectories", "format", "output_dir"};

inline constexpr std::array<std::string_view, 13> kPhysicalKeys = {
    "length",       "wavelength", "end_mirror_transmissivity", "power_d", "power_s",
    "mass",         "omega_m",    "transmissivity",            "equilibrium_position",
    "damping",      "temperature", "sign_d",                   "sign_s"};

inline constexpr std::array<std::string_view, 5> kNaturalKeys = {"omega_m", "c_d", "c_s",
                                                                 "n_thermal", "damping_gamma"};

template <std::size_t N>
inline bool contains(const std::array<std::string_view, N>& keys, std::string_view key) {
    for (auto k : keys)
        if (k == key) return true;
    return false;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using detail::Dimension;
    using detail::RawValue;

    std::map<std::string, RawValue> entries;
    int line_no = 0;
    std::size_t pos = 0;
    bool saw_content = false;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                     : eol - pos);
        ++line_no;
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;

        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (detail::trim(line).empty()) continue;
        saw_content = true;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected 'key = value'", line_no,
                             static_cast<int>(line.size()) + 1);
        }
        const std::string key(detail::trim(std::string_view(line).substr(0, eq)));
        if (key.empty()) throw ParseError("missing key before '='", line_no, 1);
        for (char ch : key) {
            if (std::isalnum(static_cast<unsigned char>(ch)) == 0 && ch != '_') {
                throw ParseError("malformed key '" + key + "'", line_no, 1);
            }
        }
        std::size_t value_begin = eq + 1;
        while (value_begin < line.size() &&
               std::isspace(static_cast<unsigned char>(line[value_begin]))) {
            ++value_begin;
        }
        RawValue raw;
        raw.key = key;
        raw.text = std::string(detail::trim(std::string_view(line).substr(eq + 1)));
        raw.line = line_no;
        raw.column = static_cast<int>(value_begin) + 1;
        if (raw.text.empty()) throw ParseError("missing value for key '" + key + "'",
                                               line_no, raw.column);
        if (!entries.emplace(key, raw).second) {
            throw ValidationError("duplicate key '" + key + "'");
        }
    }
    if (!saw_content) throw ParseError("configuration is empty", 1, 1);

    RunConfig config;
    if (auto it = entries.find("natural_units"); it != entries.end()) {
        config.natural_units = detail::parse_bool(it->second);
    }
    const bool natural = config.natural_units;

    for (const auto& [key, raw] : entries) {
        const bool known = detail::contains(detail::kCommonKeys, key) ||
                           (natural ? detail::contains(detail::kNaturalKeys, key)
                                    : detail::contains(detail::kPhysicalKeys, key));
        if (!known) {
            if (detail::contains(detail::kNaturalKeys, key) ||
                detail::contains(detail::kPhysicalKeys, key)) {
                throw ValidationError("key '" + key + "' is not allowed with natural_units = " +
                                      (natural ? std::string("true") : std::string("false")));
            }
            throw ValidationError("unknown key '" + key + "'");
        }
    }

    auto quantity = [&](std::string_view key, Dimension dim, bool required,
                        double fallback) -> double {
        const auto it = entries.find(std::string(key));
        if (it == entries.end()) {
            if (required) throw ValidationError("missing required key '" + std::string(key) + "'");
            return fallback;
        }
        return detail::parse_quantity(it->second, dim, natural);
    };

    if (natural) {
        config.natural_omega_m = quantity("omega_m", Dimension::Scalar, true, 0.0);
        config.natural_c_d = quantity("c_d", Dimension::Scalar, true, 0.0);
        config.natural_c_s = quantity("c_s", Dimension::Scalar, true, 0.0);
        config.n_thermal = quantity("n_thermal", Dimension::Scalar, false, 0.0);
        config.damping_gamma = quantity("damping_gamma", Dimension::Scalar, false, 0.0);
        detail::require(config.natural_omega_m > 0.0, "omega_m must be positive");
        detail::require(config.n_thermal >= 0.0, "n_thermal must be non-negative");
        detail::require(config.damping_gamma >= 0.0, "damping_gamma must be non-negative");
    } else {
        config.geometry.length = quantity("length", Dimension::Length, true, 0.0);
        config.geometry.wavelength = quantity("wavelength", Dimension::Length, true, 0.0);
        config.geometry.end_mirror_transmissivity =
            quantity("end_mirror_transmissivity", Dimension::Scalar, true, 0.0);
        config.geometry.input_power_d = quantity("power_d", Dimension::Power, true, 0.0);
        config.geometry.input_power_s = quantity("power_s", Dimension::Power, true, 0.0);
        config.mirror.mass = quantity("mass", Dimension::Mass, true, 0.0);
        config.mirror.omega_m = quantity("omega_m", Dimension::AngularFrequency, true, 0.0);
        config.mirror.transmissivity = quantity("transmissivity", Dimension::Scalar, true, 0.0);
        config.mirror.equilibrium_position =
            quantity("equilibrium_position", Dimension::Length, true, 0.0);
        config.mirror.damping = quantity("damping", Dimension::Damping, true, 0.0);
        config.mirror.temperature = quantity("temperature", Dimension::Temperature, true, 0.0);
        const auto sign_entry = [&](const char* key) -> const detail::RawValue& {
            const auto it = entries.find(key);
            if (it == entries.end()) {
                throw ValidationError("missing required key '" + std::string(key) + "'");
            }
            return it->second;
        };
        config.signs.sign_d = detail::parse_sign(sign_entry("sign_d"));
        config.signs.sign_s = detail::parse_sign(sign_entry("sign_s"));
        config.geometry.mode_index =
            mode_index_for_wavelength(config.geometry.length, config.geometry.wavelength);
        validate(config.geometry);
        validate(config.mirror);
        validate(config.signs);
    }

    config.t_start = quantity("t_start", Dimension::Time, false, 0.0);
    config.t_end = quantity("t_end", Dimension::Time, true, 0.0);
    detail::require(config.t_start >= 0.0, "t_start must be non-negative");
    detail::require(config.t_end > config.t_start, "t_end must exceed t_start");

    if (auto it = entries.find("n_points"); it != entries.end()) {
        const long long v = detail::parse_integer(it->second);
        detail::require(v >= 2 && v <= 10'000'000, "n_points must be in [2, 1e7]");
        config.n_points = static_cast<int>(v);
    }
    if (auto it = entries.find("fock_levels"); it != entries.end()) {
        config.fock_levels = detail::parse_int_list(it->second);
        for (int n : config.fock_levels) {
            detail::require(n >= 4 && n <= 4096, "fock_levels entries must be in [4, 4096]");
        }
    }
    if (auto it = entries.find("seed"); it != entries.end()) {
        config.seed = detail::parse_unsigned(it->second);
    }
    if (auto it = entries.find("dt"); it != entries.end()) {
        config.dt = detail::parse_quantity(it->second, Dimension::Time, natural);
        detail::require(config.dt > 0.0, "dt must be positive");
    }
    if (auto it = entries.find("n_trajectories"); it != entries.end()) {
        const long long v = detail::parse_integer(it->second);
        detail::require(v >= 0 && v <= 100'000'000, "n_trajectories must be in [0, 1e8]");
        config.n_trajectories = static_cast<int>(v);
    }
    if (auto it = entries.find("format"); it != entries.end()) {
        const std::string_view f = detail::trim(it->second.text);
        if (f == "csv") {
            config.format = OutputFormat::Csv;
        } else if (f == "json") {
            config.format = OutputFormat::Json;
        } else {
            throw ValidationError("format must be csv or json");
        }
    }
    if (auto it = entries.find("output_dir"); it != entries.end()) {
        config.output_dir = std::string(detail::trim(it->second.text));
        detail::require(!config.output_dir.empty(), "output_dir must not be empty");
    }
    if (config.n_trajectories > 0) {
        detail::require(std::isfinite(config.dt), "n_trajectories > 0 requires dt");
    }
    return config;
}

namespace detail {

inline std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Normal form: canonical key order, SI base units, full precision.
/// parse_config(serialize_config(c)) reproduces c bit for bit.
inline std::string serialize_config(const RunConfig& config) {
    using detail::full_precision;
    std::string out;
    auto emit = [&out](std::string_view key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    emit("natural_units", config.natural_units ? "true" : "false");
    if (config.natural_units) {
        emit("omega_m", full_precision(config.natural_omega_m));
        emit("c_d", full_precision(config.natural_c_d));
        emit("c_s", full_precision(config.natural_c_s));
        emit("n_thermal", full_precision(config.n_thermal));
        emit("damping_gamma", full_precision(config.damping_gamma));
    } else {
        emit("length", full_precision(config.geometry.length) + " m");
        emit("wavelength", full_precision(config.geometry.wavelength) + " m");
        emit("end_mirror_transmissivity",
             full_precision(config.geometry.end_mirror_transmissivity));
        emit("power_d", full_precision(config.geometry.input_power_d) + " W");
        emit("power_s", full_precision(config.geometry.input_power_s) + " W");
        emit("mass", full_precision(config.mirror.mass) + " kg");
        emit("omega_m", full_precision(config.mirror.omega_m) + " rad/s");
        emit("transmissivity", full_precision(config.mirror.transmissivity));
        emit("equilibrium_position",
             full_precision(config.mirror.equilibrium_position) + " m");
        emit("damping", full_precision(config.mirror.damping) + " kg/s");
        emit("temperature", full_precision(config.mirror.temperature) + " K");
        emit("sign_d", config.signs.sign_d > 0 ? "+1" : "-1");
        emit("sign_s", config.signs.sign_s > 0 ? "+1" : "-1");
    }
    emit("t_start", full_precision(config.t_start) + (config.natural_units ? "" : " s"));
    emit("t_end", full_precision(config.t_end) + (config.natural_units ? "" : " s"));
    emit("n_points", std::to_string(config.n_points));
    std::string levels;
    for (std::size_t i = 0; i < config.fock_levels.size(); ++i) {
        if (i) levels += ',';
        levels += std::to_string(config.fock_levels[i]);
    }
    emit("fock_levels", levels);
    emit("seed", std::to_string(config.seed));
    if (std::isfinite(config.dt)) {
        emit("dt", full_precision(config.dt) + (config.natural_units ? "" : " s"));
    }
    emit("n_trajectories", std::to_string(config.n_trajectories));
    emit("format", to_string(config.format));
    emit("output_dir", config.output_dir);
    return out;
}

}  // namespace mims
