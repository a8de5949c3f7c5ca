#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "mims/fock_oracle.hpp"
#include "mims/gaussian.hpp"

using namespace mims;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const DerivedCouplings kSoft = couplings_from_rates(0.3, 0.4, 1.0);

std::vector<double> period_grid(const DerivedCouplings& k, int n) {
    std::vector<double> out(n);
    const double period = 2.0 * constants::pi / k.chi();
    for (int i = 0; i < n; ++i) out[i] = period * i / (n - 1.0);
    return out;
}

}  // namespace

TEST_CASE("hamiltonian matrix structure") {
    const HamiltonianMatrix h = build_hamiltonian(kSoft, 12);
    SECTION("matrix elements") {
        CHECK(h(0, 0) == 0.5 * kSoft.c_r);
        CHECK(h(3, 3) == 3.5 * kSoft.c_r);
        CHECK(h(0, 1) == kSoft.c_d);
        CHECK(h(0, 2) == 0.5 * 0.4 * std::sqrt(2.0));
        CHECK(h(4, 6) == 0.5 * 0.4 * std::sqrt(30.0));
    }
    SECTION("symmetric with bandwidth two") {
        CHECK((h - h.transpose().eval()).cwiseAbs().maxCoeff() == 0.0);
        for (int i = 0; i < 12; ++i)
            for (int j = i + 3; j < 12; ++j) CHECK(h(i, j) == 0.0);
    }
    SECTION("diagonal when only the oscillator term survives") {
        const HamiltonianMatrix d = build_hamiltonian(couplings_from_rates(0.0, 0.0, 1.0), 8);
        CHECK(d.cwiseAbs().sum() == d.diagonal().cwiseAbs().sum());
        CHECK(d(5, 5) == 5.5);
    }
    SECTION("basis must hold at least four states") {
        CHECK_THROWS_AS(build_hamiltonian(kSoft, 3), ValidationError);
        CHECK_THROWS_AS(vacuum_fock(2), ValidationError);
    }
}

TEST_CASE("two-photon operators close the su(1,1) relation on the kept block") {
    SECTION("radicand arithmetic makes the identity exact") {
        for (int n : {4, 16, 64, 256}) {
            CHECK(two_photon_commutator_deviation_exact(n) == 0.0);
        }
    }
    SECTION("dense products leave only roundoff") {
        CHECK(two_photon_commutator_deviation_dense(64) <= 1e-12);
        CHECK(two_photon_commutator_deviation_dense(16) <= 1e-12);
    }
}

TEST_CASE("propagator basics") {
    const HamiltonianMatrix h = build_hamiltonian(kSoft, 32);
    const FockPropagator prop(h);
    const FockState initial = vacuum_fock(32);

    SECTION("decomposition residual is tiny") {
        CHECK(prop.residual() <= 1e-10);
    }
    SECTION("zero time is the identity") {
        const FockState out = prop.evolve(initial, 0.0);
        CHECK((out - initial).cwiseAbs().maxCoeff() < 1e-13);
    }
    SECTION("evolution is unitary") {
        for (double t : {0.7, 3.1, 12.9}) {
            CHECK_THAT(prop.evolve(initial, t).squaredNorm(), WithinAbs(1.0, 1e-12));
        }
    }
    SECTION("energy is conserved") {
        const double e0 = energy_expectation(initial, h);
        CHECK_THAT(e0, WithinRel(0.5 * kSoft.c_r, 1e-13));
        for (double t : {0.7, 3.1, 12.9}) {
            CHECK_THAT(energy_expectation(prop.evolve(initial, t), h), WithinRel(e0, 1e-9));
        }
    }
    SECTION("dimension mismatch is rejected") {
        CHECK_THROWS_AS(prop.evolve(vacuum_fock(16), 1.0), ValidationError);
    }
}

TEST_CASE("uncoupled oscillator only rotates the vacuum phase") {
    const DerivedCouplings k = couplings_from_rates(0.0, 0.0, 1.0);
    const HamiltonianMatrix h = build_hamiltonian(k, 16);
    const FockPropagator prop(h);
    for (double t : {0.5, 2.0, 7.3}) {
        const FockState out = prop.evolve(vacuum_fock(16), t);
        CHECK_THAT(std::abs(out(0)), WithinAbs(1.0, 1e-12));
        CHECK_THAT(out(0).real(), WithinAbs(std::cos(0.5 * t), 1e-12));  // ground energy 1/2
        const MomentSet m = moments(out);
        CHECK_THAT(std::abs(m.mean_c), WithinAbs(0.0, 1e-14));
        CHECK_THAT(m.var_x, WithinAbs(0.25, 1e-13));
        CHECK_THAT(m.var_y, WithinAbs(0.25, 1e-13));
        CHECK(m.mean_n < 1e-20);
    }
}

TEST_CASE("moment extraction on hand-built states") {
    SECTION("vacuum") {
        const MomentSet m = moments(vacuum_fock(12));
        CHECK(m.mean_c == std::complex<double>(0.0, 0.0));
        CHECK(m.mean_n == 0.0);
        CHECK(m.var_x == 0.25);
        CHECK(m.var_y == 0.25);
        CHECK(m.cov_xy == 0.0);
        CHECK(m.norm_tail == 0.0);
        CHECK_FALSE(m.tail_warning());
    }
    SECTION("first excited state widens both quadratures") {
        FockState s = FockState::Zero(12);
        s(1) = 1.0;
        const MomentSet m = moments(s);
        CHECK(m.mean_n == 1.0);
        CHECK(m.var_x == 0.75);
        CHECK(m.var_y == 0.75);
        CHECK(m.cov_xy == 0.0);
    }
    SECTION("tail mass counts the top tenth of the basis") {
        FockState s = FockState::Zero(20);
        s(0) = std::sqrt(0.5);
        s(18) = std::sqrt(0.25);
        s(19) = std::sqrt(0.25);  // top two states for n = 20
        const MomentSet m = moments(s);
        CHECK_THAT(m.norm_tail, WithinRel(0.5, 1e-15));
        CHECK(m.tail_warning());
    }
    SECTION("quadrature view copies the fields") {
        FockState s = FockState::Zero(12);
        s(1) = 1.0;
        const QuadratureState q = to_quadrature_state(moments(s));
        CHECK(q.var_x == 0.75);
        CHECK(q.mean_x == 0.0);
    }
}

TEST_CASE("number-basis evolution matches the closed-form gaussian flow") {
    const int n_basis = 64;
    const FockPropagator prop(build_hamiltonian(kSoft, n_basis));
    const FockState initial = vacuum_fock(n_basis);

    SECTION("mean displacement") {
        for (double t : period_grid(kSoft, 41)) {
            const MomentSet m = moments(prop.evolve(initial, t));
            const auto nu = displacement_nu(kSoft, t);
            CHECK(std::abs(m.mean_c - nu) < 1e-8);
            CHECK_FALSE(m.tail_warning());
        }
    }
    SECTION("covariance and purity") {
        for (double t : period_grid(kSoft, 21)) {
            const MomentSet m = moments(prop.evolve(initial, t));
            const QuadratureState g = evolve_gaussian(vacuum_state(), kSoft, t);
            CHECK(std::abs(m.var_x - g.var_x) < 1e-8);
            CHECK(std::abs(m.var_y - g.var_y) < 1e-8);
            CHECK(std::abs(m.cov_xy - g.cov_xy) < 1e-8);
            const double det = m.var_x * m.var_y - m.cov_xy * m.cov_xy;
            CHECK_THAT(16.0 * det, WithinAbs(1.0, 1e-8));
        }
    }
    SECTION("pure drive keeps the vacuum width") {
        const DerivedCouplings drive = couplings_from_rates(0.3, 0.0, 1.0);
        const FockPropagator dp(build_hamiltonian(drive, n_basis));
        for (double t : period_grid(drive, 21)) {
            const MomentSet m = moments(dp.evolve(initial, t));
            CHECK(std::abs(m.var_x - 0.25) < 1e-9);
            CHECK(std::abs(m.var_y - 0.25) < 1e-9);
            CHECK(std::abs(m.cov_xy) < 1e-9);
            CHECK(std::abs(m.mean_c - displacement_nu(drive, t)) < 1e-8);
        }
    }
}

TEST_CASE("occupation scale guard") {
    SECTION("predicted occupation matches the closed forms in the bound regime") {
        const std::vector<double> grid = period_grid(kSoft, 17);
        const double occ = predicted_occupation(kSoft, grid);
        double expected = 0.0;
        for (double t : grid) {
            const double nu = std::abs(displacement_nu(kSoft, t));
            const double sk = std::sinh(kappa_magnitude(kSoft, t));
            expected = std::max(expected, nu * nu + sk * sk);
        }
        CHECK_THAT(occ, WithinRel(expected, 1e-12));
    }
    SECTION("doubling the drive quadruples the displacement occupation") {
        const DerivedCouplings base = couplings_from_rates(0.3, 0.0, 1.0);
        const DerivedCouplings loud = couplings_from_rates(0.6, 0.0, 1.0);
        const std::vector<double> grid = period_grid(base, 17);
        CHECK_THAT(predicted_occupation(loud, grid),
                   WithinRel(4.0 * predicted_occupation(base, grid), 1e-12));
    }
    SECTION("laboratory-scale drives are refused") {
        // 2 C_D / omega_m of order 1e9 predicts astronomically many quanta
        const DerivedCouplings k = couplings_from_rates(1e6, 0.0, 1.0);
        const std::vector<double> grid = {constants::pi};
        CHECK_THROWS_AS(require_oracle_scale(k, grid, 80), OracleScaleError);
        CHECK_THROWS_WITH(require_oracle_scale(k, grid, 80),
                          ContainsSubstring("cannot be represented"));
        CHECK_THROWS_AS(truncation_convergence(k, grid, {8, 16, 32, 64, 80}), OracleScaleError);
    }
}

TEST_CASE("truncation convergence scan") {
    SECTION("toy couplings converge well inside the default ladder") {
        const std::vector<double> grid = period_grid(kSoft, 25);
        const ConvergenceScan scan = truncation_convergence(kSoft, grid, {64, 8, 32, 16, 80});
        REQUIRE(scan.n_list == std::vector<int>{8, 16, 32, 64, 80});  // sorted internally
        REQUIRE(scan.steps.size() == 4);
        CHECK(scan.converged);
        CHECK(scan.converged_n <= 64);
        CHECK(scan.max_tail.back() < 1e-10);
        CHECK(scan.steps.back().max_change < 1e-10);
        CHECK_NOTHROW(require_converged(scan));
    }
    SECTION("a starved ladder reports failure") {
        // alpha ~ 1.6 leaves percent-level mass beyond n = 12
        const DerivedCouplings k = couplings_from_rates(0.8, 0.0, 1.0);
        const std::vector<double> grid = period_grid(k, 9);
        const ConvergenceScan scan = truncation_convergence(k, grid, {8, 12});
        CHECK_FALSE(scan.converged);
        CHECK(scan.converged_n == -1);
        CHECK_THROWS_AS(require_converged(scan), NotConvergedError);
        CHECK_THROWS_WITH(require_converged(scan), ContainsSubstring("did not converge"));
    }
}
