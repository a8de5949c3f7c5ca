#pragma once

/**
 * Number-basis oracle for the semiclassical mirror Hamiltonian. Builds the
 * truncated matrix of
 *   H/hbar = C_D (c + c^dag) + C_R (c^dag c + 1/2) + (C_S/2)(c^2 + c^dag 2)
 * on the lowest N Fock states, evolves amplitudes by spectral decomposition
 * (the couplings are real, so H is real symmetric) and reduces states to
 * quadrature moments. The closed-form Gaussian module and this oracle are
 * independent evaluation paths of the same dynamics; their agreement on toy
 * parameter sets is the core correctness check of the project.
 *
 * The basis can only represent states with occupation well below N, so the
 * oracle refuses parameter sets whose predicted occupation
 * |nu|^2 + sinh^2|kappa| exceeds a quarter of the largest requested basis.
 */

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "mims/errors.hpp"
#include "mims/gaussian.hpp"
#include "mims/system_model.hpp"

namespace mims {

using HamiltonianMatrix = Eigen::MatrixXd;  // real symmetric, bandwidth 2
using FockState = Eigen::VectorXcd;

/// H[n][n] = C_R (n + 1/2), H[n][n+1] = C_D sqrt(n+1),
/// H[n][n+2] = (C_S/2) sqrt((n+1)(n+2)); Hermitian by construction.
inline HamiltonianMatrix build_hamiltonian(const DerivedCouplings& k, int n_basis) {
    detail::require(n_basis >= 4, "Fock basis must have at least 4 states");
    HamiltonianMatrix h = HamiltonianMatrix::Zero(n_basis, n_basis);
    for (int n = 0; n < n_basis; ++n) {
        h(n, n) = k.c_r * (n + 0.5);
        if (n + 1 < n_basis) {
            const double v = k.c_d * std::sqrt(n + 1.0);
            h(n, n + 1) = v;
            h(n + 1, n) = v;
        }
        if (n + 2 < n_basis) {
            const double v = 0.5 * k.c_s * std::sqrt((n + 1.0) * (n + 2.0));
            h(n, n + 2) = v;
            h(n + 2, n) = v;
        }
    }
    return h;
}

inline FockState vacuum_fock(int n_basis) {
    detail::require(n_basis >= 4, "Fock basis must have at least 4 states");
    FockState s = FockState::Zero(n_basis);
    s(0) = 1.0;
    return s;
}

/**
 * Spectral decomposition H = V diag(lambda) V^T with a residual check;
 * evolve() applies exp(-i H t) through the eigenbasis, so one decomposition
 * serves any number of time points.
 */
class FockPropagator {
  public:
    explicit FockPropagator(const HamiltonianMatrix& h, double residual_tol = 1e-10) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
        if (solver.info() != Eigen::Success)
            throw ConvergenceError("eigendecomposition of the Fock Hamiltonian failed");
        vals_ = solver.eigenvalues();
        vecs_ = solver.eigenvectors();
        const double h_norm = h.cwiseAbs().maxCoeff();
        residual_ = (h * vecs_ - vecs_ * vals_.asDiagonal()).cwiseAbs().maxCoeff() /
                    std::max(h_norm, 1e-300);
        if (residual_ > residual_tol) {
            throw ConvergenceError("eigendecomposition residual " + std::to_string(residual_) +
                                   " above tolerance");
        }
    }

    double residual() const { return residual_; }
    const Eigen::VectorXd& eigenvalues() const { return vals_; }

    FockState evolve(const FockState& initial, double t) const {
        detail::require(initial.size() == vals_.size(),
                        "state dimension does not match the Hamiltonian");
        Eigen::VectorXcd modal = vecs_.transpose() * initial;
        for (Eigen::Index i = 0; i < modal.size(); ++i) {
            modal(i) *= std::exp(std::complex<double>(0.0, -vals_(i) * t));
        }
        return vecs_ * modal;
    }

  private:
    Eigen::MatrixXd vecs_;
    Eigen::VectorXd vals_;
    double residual_ = 0.0;
};

/// Convenience single-shot evolution of exp(-i H t) applied to `initial`.
inline FockState propagate(const FockState& initial, const HamiltonianMatrix& h, double t) {
    return FockPropagator(h).evolve(initial, t);
}

/**
 * Quadrature moments of a Fock-basis state. norm_tail is the probability
 * mass in the top 10% of basis states (at least one state), the truncation
 * health indicator; tail_warning() flags it above 1e-8.
 */
struct MomentSet {
    std::complex<double> mean_c;
    double mean_n = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;
    double norm_tail = 0.0;

    bool tail_warning() const { return norm_tail > 1e-8; }
};

inline MomentSet moments(const FockState& state) {
    const Eigen::Index n = state.size();
    detail::require(n >= 4, "Fock basis must have at least 4 states");
    std::complex<double> c1;   // <c>
    std::complex<double> c2;   // <c^2>
    double occ = 0.0;          // <c^dag c>
    for (Eigen::Index i = 0; i < n; ++i) {
        occ += static_cast<double>(i) * std::norm(state(i));
        if (i + 1 < n) c1 += std::conj(state(i)) * state(i + 1) * std::sqrt(i + 1.0);
        if (i + 2 < n)
            c2 += std::conj(state(i)) * state(i + 2) * std::sqrt((i + 1.0) * (i + 2.0));
    }
    MomentSet m;
    m.mean_c = c1;
    m.mean_n = occ;
    m.var_x = 0.25 * (1.0 + 2.0 * occ + 2.0 * c2.real()) - c1.real() * c1.real();
    m.var_y = 0.25 * (1.0 + 2.0 * occ - 2.0 * c2.real()) - c1.imag() * c1.imag();
    m.cov_xy = 0.5 * c2.imag() - c1.real() * c1.imag();
    const Eigen::Index tail_count = std::max<Eigen::Index>(1, n / 10);
    for (Eigen::Index i = n - tail_count; i < n; ++i) m.norm_tail += std::norm(state(i));
    return m;
}

inline QuadratureState to_quadrature_state(const MomentSet& m) {
    QuadratureState s;
    s.mean_x = m.mean_c.real();
    s.mean_y = m.mean_c.imag();
    s.var_x = m.var_x;
    s.var_y = m.var_y;
    s.cov_xy = m.cov_xy;
    return s;
}

/// <H> for diagnostics; conserved under the exact evolution.
inline double energy_expectation(const FockState& state, const HamiltonianMatrix& h) {
    return (state.adjoint() * (h * state))(0).real();
}

// ------------------------------------------------------------------ algebra

/**
 * Deviation of [K_-, K_+] - 2 K_0 on the truncated basis, excluding the top
 * two states where the truncation necessarily breaks the algebra. Every
 * nonzero entry of the products is sqrt(k) * sqrt(k) for an integer radicand
 * k, so the entries are evaluated from the radicands directly and the
 * identity holds exactly in floating point: the return value is 0.0.
 */
inline double two_photon_commutator_deviation_exact(int n_basis) {
    detail::require(n_basis >= 4, "Fock basis must have at least 4 states");
    double worst = 0.0;
    for (int i = 0; i + 2 < n_basis; ++i) {
        // (K_- K_+)[i][i] = (i+1)(i+2)/4, (K_+ K_-)[i][i] = i(i-1)/4,
        // both diagonal by the banded structure; off-diagonal terms vanish.
        const double lower_raise = (i + 1.0) * (i + 2.0) / 4.0;
        const double raise_lower = i >= 2 ? i * (i - 1.0) / 4.0 : 0.0;
        const double two_k0 = (2.0 * i + 1.0) / 2.0;
        worst = std::max(worst, std::abs(lower_raise - raise_lower - two_k0));
    }
    return worst;
}

/// Same check through dense floating-point matrix products; a few ulps of
/// roundoff survive, so callers compare against a small tolerance.
inline double two_photon_commutator_deviation_dense(int n_basis) {
    detail::require(n_basis >= 4, "Fock basis must have at least 4 states");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_basis, n_basis);
    for (int i = 0; i + 1 < n_basis; ++i) c(i, i + 1) = std::sqrt(i + 1.0);
    const Eigen::MatrixXd k_minus = 0.5 * c * c;
    const Eigen::MatrixXd k_plus = k_minus.transpose();
    Eigen::MatrixXd two_k0 = 0.5 * (c.transpose() * c + c * c.transpose());
    // cc^dag picks up the truncation in its last diagonal entry; the
    // restricted block below is unaffected.
    const Eigen::MatrixXd dev = k_minus * k_plus - k_plus * k_minus - two_k0;
    const int m = n_basis - 2;
    return dev.topLeftCorner(m, m).cwiseAbs().maxCoeff();
}

// ------------------------------------------------------- scale and accuracy

namespace detail {

// Mean displacement continued through chi_sq <= 0, used only to predict the
// occupation scale before committing to a basis size.
inline double displacement_magnitude_continued(const DerivedCouplings& k, double t) {
    double cos_term;  // (cos chi t - 1) / chi_sq, continued
    if (k.chi_sq > 0.0) {
        const double u = std::sqrt(k.chi_sq) * t;
        cos_term = (std::cos(u) - 1.0) / k.chi_sq;
    } else if (k.chi_sq < 0.0) {
        const double u = std::sqrt(-k.chi_sq) * t;
        cos_term = (std::cosh(u) - 1.0) / k.chi_sq;
    } else {
        cos_term = -0.5 * t * t;
    }
    const double re = k.c_d * k.omega_m * cos_term;
    const double im = -k.c_d * sin_ratio(k.chi_sq, t);
    return std::hypot(re, im);
}

}  // namespace detail

/// Largest occupation |nu|^2 + sinh^2|kappa| predicted over the time grid.
inline double predicted_occupation(const DerivedCouplings& k, std::span<const double> t_grid) {
    double worst = 0.0;
    for (double t : t_grid) {
        const double nu = detail::displacement_magnitude_continued(k, t);
        const double sk = std::sinh(kappa_magnitude(k, t));
        worst = std::max(worst, nu * nu + sk * sk);
    }
    return worst;
}

/// Refuses parameter sets the basis cannot represent: predicted occupation
/// must stay below n_max / 4.
inline void require_oracle_scale(const DerivedCouplings& k, std::span<const double> t_grid,
                                 int n_max) {
    const double occ = predicted_occupation(k, t_grid);
    if (!(occ <= 0.25 * n_max)) {
        throw OracleScaleError(
            "predicted occupation <n> = " + std::to_string(occ) + " exceeds n_max/4 = " +
            std::to_string(0.25 * n_max) +
            "; this parameter scale cannot be represented in the requested Fock basis");
    }
}

// ------------------------------------------------------------- convergence

struct ConvergenceStep {
    int n_coarse = 0;
    int n_fine = 0;
    double max_change = 0.0;  // worst observable change over the grid
};

struct ConvergenceScan {
    std::vector<ConvergenceStep> steps;
    std::vector<double> max_tail;  // per basis size, worst norm_tail over the grid
    std::vector<int> n_list;
    int converged_n = -1;
    bool converged = false;
};

inline constexpr double kTruncationChangeTol = 1e-8;
inline constexpr double kTruncationTailTol = 1e-8;

/**
 * Evolves vacuum on each basis size in ascending n_list over t_grid and
 * tracks the change of (Re<c>, Im<c>, var_x, var_y, cov_xy) between
 * consecutive sizes. Converged when the change and the norm tail both drop
 * below 1e-8; converged_n is the first basis size achieving this.
 */
inline ConvergenceScan truncation_convergence(const DerivedCouplings& k,
                                              std::span<const double> t_grid,
                                              std::vector<int> n_list) {
    detail::require(!n_list.empty(), "n_list must not be empty");
    std::sort(n_list.begin(), n_list.end());
    detail::require(n_list.front() >= 4, "Fock basis must have at least 4 states");
    detail::require(!t_grid.empty(), "time grid must not be empty");
    require_oracle_scale(k, t_grid, n_list.back());

    ConvergenceScan scan;
    scan.n_list = n_list;
    std::vector<MomentSet> prev;
    for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
        const int n = n_list[idx];
        const FockPropagator prop(build_hamiltonian(k, n));
        const FockState initial = vacuum_fock(n);
        std::vector<MomentSet> cur;
        cur.reserve(t_grid.size());
        double tail = 0.0;
        for (double t : t_grid) {
            cur.push_back(moments(prop.evolve(initial, t)));
            tail = std::max(tail, cur.back().norm_tail);
        }
        scan.max_tail.push_back(tail);
        if (idx > 0) {
            double change = 0.0;
            for (std::size_t j = 0; j < cur.size(); ++j) {
                change = std::max(change, std::abs(cur[j].mean_c.real() - prev[j].mean_c.real()));
                change = std::max(change, std::abs(cur[j].mean_c.imag() - prev[j].mean_c.imag()));
                change = std::max(change, std::abs(cur[j].var_x - prev[j].var_x));
                change = std::max(change, std::abs(cur[j].var_y - prev[j].var_y));
                change = std::max(change, std::abs(cur[j].cov_xy - prev[j].cov_xy));
            }
            scan.steps.push_back({n_list[idx - 1], n, change});
            if (!scan.converged && change < kTruncationChangeTol && tail < kTruncationTailTol) {
                scan.converged = true;
                scan.converged_n = n;
            }
        }
        prev = std::move(cur);
    }
    return scan;
}

/// Contract form of the scan: throws NotConvergedError when the largest
/// basis still fails the criteria.
inline void require_converged(const ConvergenceScan& scan) {
    if (scan.converged) return;
    std::string msg = "truncation scan did not converge at the largest basis size";
    if (!scan.steps.empty()) {
        msg += "; last change " + std::to_string(scan.steps.back().max_change) +
               " (tolerance " + std::to_string(kTruncationChangeTol) + ")";
    }
    if (!scan.max_tail.empty()) {
        msg += ", last tail " + std::to_string(scan.max_tail.back()) + " (tolerance " +
               std::to_string(kTruncationTailTol) + ")";
    }
    throw NotConvergedError(msg);
}

}  // namespace mims
