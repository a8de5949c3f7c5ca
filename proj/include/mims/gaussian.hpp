#pragma once

/**
 * Closed-form semiclassical evolution of the mirror quadratures
 * X = (c + c^dag)/2, Y = (c - c^dag)/(2i) under
 *   H/hbar = C_D (c + c^dag) + C_R (c^dag c + 1/2) + (C_S/2)(c^2 + c^dag 2),
 * with C_R = C_S + omega_m. The means obey
 *   dX/dt = omega_m Y,   dY/dt = -(omega_m + 2 C_S) X - C_D,
 * so the homogeneous flow is symplectic rotation at the effective frequency
 * chi = sqrt(omega_m (omega_m + 2 C_S)) and the drive adds a fixed-point
 * offset. From vacuum the mean traces the displacement amplitude
 *   nu(t) = (C_D/chi) [ (omega_m/chi)(cos chi t - 1) - i sin chi t ],
 * and the covariance acquires a squeeze of magnitude
 *   |kappa(t)| = asinh( |C_S/chi| |sin chi t| ),
 * which continues analytically through chi_sq <= 0 via sin(chi t)/chi -> t
 * (critical point C_S = -omega_m/2) and -> sinh(|chi| t)/|chi| (inverted
 * regime).
 */

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "mims/errors.hpp"
#include "mims/system_model.hpp"

namespace mims {

// First and second moments of the mirror quadratures. Vacuum has
// var_x = var_y = 1/4; pure Gaussian states keep det(cov) = 1/16.
struct QuadratureState {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.25;
    double var_y = 0.25;
    double cov_xy = 0.0;

    double purity_det() const { return var_x * var_y - cov_xy * cov_xy; }
};

inline QuadratureState vacuum_state() { return {}; }

inline void validate(const QuadratureState& s) {
    detail::require(std::isfinite(s.mean_x) && std::isfinite(s.mean_y),
                    "quadrature means must be finite");
    detail::require(s.var_x > 0.0 && s.var_y > 0.0, "variances must be positive");
    detail::require(std::isfinite(s.cov_xy) &&
                        s.var_x * s.var_y - s.cov_xy * s.cov_xy > 0.0,
                    "covariance matrix must be positive definite");
}

struct Mat2 {
    double a = 1.0, b = 0.0;  // row 0
    double c = 0.0, d = 1.0;  // row 1

    double det() const { return a * d - b * c; }
};

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

namespace detail {

inline void require_bound(const DerivedCouplings& k, const char* op) {
    if (k.regime != Regime::BoundOscillator) {
        throw RegimeError(std::string(op) + " requires the bound-oscillator regime; C_S = " +
                          std::to_string(k.c_s) + ", chi_sq = " + std::to_string(k.chi_sq));
    }
}

// sin(chi t)/chi continued through chi_sq = 0; the quantity entering the
// squeeze magnitude in every regime.
inline double sin_ratio(double chi_sq, double t) {
    if (chi_sq > 0.0) {
        const double chi = std::sqrt(chi_sq);
        return std::sin(chi * t) / chi;
    }
    if (chi_sq < 0.0) {
        const double chi_abs = std::sqrt(-chi_sq);
        return std::sinh(chi_abs * t) / chi_abs;
    }
    return t;
}

}  // namespace detail

/// Mean displacement amplitude nu(t) = <c>(t) for a vacuum start.
inline std::complex<double> displacement_nu(const DerivedCouplings& k, double t) {
    detail::require_bound(k, "displacement_nu");
    const double chi = k.chi();
    const double u = chi * t;
    const double re = (k.c_d / chi) * (k.omega_m / chi) * (std::cos(u) - 1.0);
    const double im = -(k.c_d / chi) * std::sin(u);
    return {re, im};
}

/// Short-time magnitude |nu| ~ |C_D (t - (omega_m/3)(omega_m/8 + C_S) t^3)|.
inline double displacement_series(const DerivedCouplings& k, double t) {
    const double cubic = (k.omega_m / 3.0) * (k.omega_m / 8.0 + k.c_s);
    return std::abs(k.c_d * (t - cubic * t * t * t));
}

/// Squeeze magnitude |kappa(t)|, analytic across all three regimes.
inline double kappa_magnitude(const DerivedCouplings& k, double t) {
    const double s = detail::sin_ratio(k.chi_sq, t);
    return std::asinh(std::abs(k.c_s * s));
}

/// Short-time magnitude |kappa| ~ |C_S (t - ((omega_m + C_S)^2 / 6) t^3)|.
inline double kappa_series(const DerivedCouplings& k, double t) {
    const double w = k.omega_m + k.c_s;
    return std::abs(k.c_s * (t - (w * w / 6.0) * t * t * t));
}

/**
 * Homogeneous quadrature flow over time t,
 *   M(t) = [ cos chi t            (omega_m/chi) sin chi t ]
 *          [ -(chi/omega_m) sin chi t        cos chi t    ],
 * with det M = 1. Bound regime only.
 */
inline Mat2 symplectic_propagator(const DerivedCouplings& k, double t) {
    detail::require_bound(k, "symplectic_propagator");
    const double chi = k.chi();
    const double u = chi * t;
    const double c = std::cos(u);
    const double s = std::sin(u);
    return {c, (k.omega_m / chi) * s, -(chi / k.omega_m) * s, c};
}

/**
 * Propagates means and covariance over time t. The drive enters as the
 * affine offset around the fixed point (-omega_m C_D / chi_sq, 0); the
 * covariance transforms congruently, cov' = M cov M^T, which preserves
 * det(cov) exactly in exact arithmetic.
 */
inline QuadratureState evolve_gaussian(const QuadratureState& s, const DerivedCouplings& k,
                                       double t) {
    validate(s);
    detail::require_bound(k, "evolve_gaussian");
    const Mat2 m = symplectic_propagator(k, t);
    const double x_star = -k.omega_m * k.c_d / k.chi_sq;

    QuadratureState out;
    const double dx = s.mean_x - x_star;
    const double dy = s.mean_y;  // fixed point has zero Y component
    out.mean_x = m.a * dx + m.b * dy + x_star;
    out.mean_y = m.c * dx + m.d * dy;

    // M cov M^T for symmetric cov
    const double vxx = s.var_x, vyy = s.var_y, vxy = s.cov_xy;
    out.var_x = m.a * (m.a * vxx + m.b * vxy) + m.b * (m.a * vxy + m.b * vyy);
    out.var_y = m.c * (m.c * vxx + m.d * vxy) + m.d * (m.c * vxy + m.d * vyy);
    out.cov_xy = m.c * (m.a * vxx + m.b * vxy) + m.d * (m.a * vxy + m.b * vyy);
    return out;
}

struct SqueezeParameter {
    double magnitude = 0.0;  // r >= 0
    double phase = 0.0;      // radians in (-pi, pi], twice the minor-axis angle
};

struct EllipseGeometry {
    double tilt_angle = 0.0;       // radians in (-pi/2, pi/2]; 0 when cov is diagonal
    double var_along_tilt = 0.0;   // variance along the tilt direction
    double var_orthogonal = 0.0;   // variance along the perpendicular direction
};

namespace detail {

// Treats covariances that are diagonal at machine scale as exactly diagonal,
// so aligned states report tilt 0 instead of a roundoff-driven angle.
inline bool effectively_diagonal(double var_x, double var_y, double cov_xy) {
    const double scale = std::max(std::abs(var_x), std::abs(var_y));
    return std::abs(cov_xy) <= 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

inline double wrap_angle(double x) {
    double w = std::remainder(x, 2.0 * constants::pi);  // in [-pi, pi]
    if (w <= -constants::pi) w += 2.0 * constants::pi;
    return w;
}

}  // namespace detail

/**
 * Orientation and principal variances of the one-sigma uncertainty ellipse.
 * tilt_angle = (1/2) atan2(2 cov_xy, var_x - var_y) when a genuine
 * cross-correlation is present; var_along_tilt is then the larger principal
 * variance. Diagonal covariances (including isotropic ones) report tilt 0
 * with the variances passed through unchanged.
 */
inline EllipseGeometry ellipse_geometry(const QuadratureState& s) {
    validate(s);
    EllipseGeometry e;
    if (detail::effectively_diagonal(s.var_x, s.var_y, s.cov_xy)) {
        e.tilt_angle = 0.0;
        e.var_along_tilt = s.var_x;
        e.var_orthogonal = s.var_y;
        return e;
    }
    e.tilt_angle = 0.5 * std::atan2(2.0 * s.cov_xy, s.var_x - s.var_y);
    const double mean = 0.5 * (s.var_x + s.var_y);
    const double half_gap = 0.5 * std::hypot(s.var_x - s.var_y, 2.0 * s.cov_xy);
    e.var_along_tilt = mean + half_gap;
    e.var_orthogonal = mean - half_gap;
    return e;
}

/**
 * Squeeze parameter of a pure Gaussian state from its covariance:
 * magnitude = (1/4) ln(v_max / v_min). For vacuum evolved under the model
 * Hamiltonian this satisfies sinh|kappa| = |C_S/chi sin chi t| identically.
 * Throws ImpureStateError when 16 det(cov) strays from 1 beyond purity_tol.
 */
inline SqueezeParameter squeeze_from_covariance(const QuadratureState& s,
                                                double purity_tol = 1e-6) {
    validate(s);
    const double det = s.purity_det();
    if (std::abs(16.0 * det - 1.0) > purity_tol) {
        throw ImpureStateError("covariance is not pure: 16 det(cov) = " +
                               std::to_string(16.0 * det));
    }
    SqueezeParameter p;
    const double mean = 0.5 * (s.var_x + s.var_y);
    const double half_gap = 0.5 * std::hypot(s.var_x - s.var_y, 2.0 * s.cov_xy);
    const double v_max = mean + half_gap;
    const double v_min = mean - half_gap;
    p.magnitude = 0.25 * std::log(v_max / v_min);
    if (p.magnitude == 0.0) return p;  // isotropic: phase degenerate, report 0

    double minor_angle;
    if (detail::effectively_diagonal(s.var_x, s.var_y, s.cov_xy)) {
        minor_angle = s.var_x <= s.var_y ? 0.0 : 0.5 * constants::pi;
    } else {
        // major axis at the atan2 angle; minor axis a quarter turn away
        const double major = 0.5 * std::atan2(2.0 * s.cov_xy, s.var_x - s.var_y);
        minor_angle = major + 0.5 * constants::pi;
    }
    p.phase = detail::wrap_angle(2.0 * minor_angle);
    return p;
}

}  // namespace mims
