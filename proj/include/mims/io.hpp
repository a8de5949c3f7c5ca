#pragma once

/**
 * Deterministic columnar output. Every number is written with %.17g, which
 * round-trips doubles exactly, so identical inputs yield byte-identical
 * files and golden-file comparison is meaningful.
 */

#include <complex>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "mims/gaussian.hpp"
#include "mims/system_model.hpp"

namespace mims {

inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Inclusive evenly spaced grid; endpoints land exactly on t_start / t_end.
inline std::vector<double> time_grid(double t_start, double t_end, int n_points) {
    detail::require(n_points >= 2, "n_points must be at least 2");
    detail::require(t_end > t_start, "t_end must exceed t_start");
    std::vector<double> out(static_cast<std::size_t>(n_points));
    const double step = (t_end - t_start) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) out[static_cast<std::size_t>(i)] = t_start + i * step;
    out.back() = t_end;
    return out;
}

// One evolve row: displacement amplitude, squeeze magnitude and the
// uncertainty-ellipse view of the covariance at time t.
struct TraceRecord {
    double t = 0.0;
    double abs_nu = 0.0;
    double re_nu = 0.0;
    double im_nu = 0.0;
    double abs_kappa = 0.0;
    double tilt_angle = 0.0;
    double var_x = 0.25;
    double var_y = 0.25;
    double cov_xy = 0.0;
};

inline TraceRecord trace_at(const DerivedCouplings& k, double t) {
    TraceRecord r;
    r.t = t;
    const std::complex<double> nu = displacement_nu(k, t);
    r.abs_nu = std::abs(nu);
    r.re_nu = nu.real();
    r.im_nu = nu.imag();
    r.abs_kappa = kappa_magnitude(k, t);
    const QuadratureState state = evolve_gaussian(vacuum_state(), k, t);
    const EllipseGeometry ellipse = ellipse_geometry(state);
    r.tilt_angle = ellipse.tilt_angle;
    r.var_x = state.var_x;
    r.var_y = state.var_y;
    r.cov_xy = state.cov_xy;
    return r;
}

inline std::vector<TraceRecord> make_trace(const DerivedCouplings& k,
                                           const std::vector<double>& t_grid) {
    std::vector<TraceRecord> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back(trace_at(k, t));
    return out;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline Table trace_table(const std::vector<TraceRecord>& records) {
    Table t;
    t.columns = {"t", "abs_nu", "re_nu", "im_nu", "abs_kappa",
                 "tilt_angle", "var_x", "var_y", "cov_xy"};
    t.rows.reserve(records.size());
    for (const TraceRecord& r : records) {
        t.rows.push_back({r.t, r.abs_nu, r.re_nu, r.im_nu, r.abs_kappa, r.tilt_angle, r.var_x,
                          r.var_y, r.cov_xy});
    }
    return t;
}

inline void write_csv(std::ostream& os, const Table& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) os << ',';
        os << table.columns[i];
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << format_full(row[i]);
        }
        os << '\n';
    }
}

namespace detail {

inline void write_json_string(std::ostream& os, const std::string& s) {
    os << '"';
    for (char ch : s) {
        switch (ch) {
            case '"': os << "\\\""; break;
            case '\\': os << "\\\\"; break;
            case '\n': os << "\\n"; break;
            case '\t': os << "\\t"; break;
            default: os << ch;
        }
    }
    os << '"';
}

}  // namespace detail

inline void write_json(std::ostream& os, const Table& table) {
    os << "{\n  \"columns\": [";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) os << ", ";
        detail::write_json_string(os, table.columns[i]);
    }
    os << "],\n  \"rows\": [";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (r) os << ',';
        os << "\n    [";
        const auto& row = table.rows[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ", ";
            os << format_full(row[i]);
        }
        os << ']';
    }
    os << "\n  ]\n}\n";
}

/// Ordered name/value report; numeric entries carry full precision, string
/// entries are emitted verbatim in CSV and quoted in JSON.
struct Report {
    struct Entry {
        std::string name;
        std::string value;
        bool quoted = false;
    };
    std::vector<Entry> entries;

    void add(std::string name, double value) {
        entries.push_back({std::move(name), format_full(value), false});
    }
    void add(std::string name, long long value) {
        entries.push_back({std::move(name), std::to_string(value), false});
    }
    void add(std::string name, int value) { add(std::move(name), static_cast<long long>(value)); }
    void add_text(std::string name, std::string value) {
        entries.push_back({std::move(name), std::move(value), true});
    }
};

inline void write_csv(std::ostream& os, const Report& report) {
    os << "name,value\n";
    for (const auto& e : report.entries) os << e.name << ',' << e.value << '\n';
}

inline void write_json(std::ostream& os, const Report& report) {
    os << "{\n";
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& e = report.entries[i];
        os << "  ";
        detail::write_json_string(os, e.name);
        os << ": ";
        if (e.quoted) {
            detail::write_json_string(os, e.value);
        } else {
            os << e.value;
        }
        if (i + 1 < report.entries.size()) os << ',';
        os << '\n';
    }
    os << "}\n";
}

}  // namespace mims
