// Command-line front end: parses a run configuration and dispatches to the
// closed-form evolution, the number-basis oracle, and the thermal pipeline.
// All emitted files are deterministic for a fixed config and seed.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mims/config.hpp"
#include "mims/fock_oracle.hpp"
#include "mims/gaussian.hpp"
#include "mims/io.hpp"
#include "mims/system_model.hpp"
#include "mims/thermal.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    CLI::Option* out_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* seed_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "path to the run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        out_opt = cmd->add_option("--out", out_dir, "output directory (overrides output_dir)");
        format_opt = cmd->add_option("--format", format, "output format: csv or json")
                         ->check(CLI::IsMember({"csv", "json"}));
        seed_opt = cmd->add_option("--seed", seed, "RNG seed (overrides the config seed)");
    }

    mims::RunConfig load() const {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw mims::ValidationError("cannot read config file '" + config_path + "'");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        mims::RunConfig config = mims::parse_config(buffer.str());
        if (out_opt->count() > 0) config.output_dir = out_dir;
        if (format_opt->count() > 0) {
            config.format = format == "json" ? mims::OutputFormat::Json : mims::OutputFormat::Csv;
        }
        if (seed_opt->count() > 0) config.seed = seed;
        return config;
    }
};

fs::path prepare_output_dir(const mims::RunConfig& config) {
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    return dir;
}

template <typename Payload>
fs::path write_output(const fs::path& dir, const std::string& stem,
                      mims::OutputFormat format, const Payload& payload) {
    const fs::path path =
        dir / (stem + (format == mims::OutputFormat::Csv ? ".csv" : ".json"));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mims::Error("cannot open output file '" + path.string() + "'");
    if (format == mims::OutputFormat::Csv) {
        mims::write_csv(out, payload);
    } else {
        mims::write_json(out, payload);
    }
    return path;
}

void print_report(const mims::Report& report) {
    for (const auto& e : report.entries) std::cout << e.name << " = " << e.value << '\n';
}

mims::Report derive_report(const mims::RunConfig& config, const mims::DerivedCouplings& k) {
    mims::Report report;
    report.add_text("mode", config.natural_units ? "natural" : "physical");
    if (!config.natural_units) {
        const mims::BaseRates rates = mims::base_rates(config.geometry);
        report.add("mode_index", config.geometry.mode_index);
        report.add("omega_n", rates.omega_n);
        report.add("xi", rates.xi);
        report.add("k_n", rates.k_n);
        report.add("tau", rates.tau);
        report.add("kappa_cav", mims::constants::speed_of_light *
                                    config.geometry.end_mirror_transmissivity /
                                    (2.0 * config.geometry.length));
        report.add("xi_d", k.xi_d);
        report.add("xi_s", k.xi_s);
        report.add("omega_d", k.omega_d);
        report.add("omega_s", k.omega_s);
        report.add("n_alpha", k.n_alpha);
        report.add("n_beta", k.n_beta);
    }
    report.add("omega_m", k.omega_m);
    report.add("c_d", k.c_d);
    report.add("c_s", k.c_s);
    report.add("c_r", k.c_r);
    report.add("chi_sq", k.chi_sq);
    report.add_text("regime", mims::to_string(k.regime));
    report.add("ratio_2cd_omega_m", std::abs(2.0 * k.c_d / k.omega_m));
    if (k.regime == mims::Regime::BoundOscillator) {
        const double chi = k.chi();
        report.add("chi", chi);
        report.add("ratio_2cd_chi", std::abs(2.0 * k.c_d / chi));
        report.add("max_abs_kappa", std::asinh(std::abs(k.c_s) / chi));
        report.add("period", mims::constants::two_pi / chi);
    }
    return report;
}

int run_derive(const mims::RunConfig& config) {
    const mims::DerivedCouplings k = config.derive();
    const mims::Report report = derive_report(config, k);
    const fs::path path = write_output(prepare_output_dir(config), "derive", config.format, report);
    print_report(report);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int run_evolve(const mims::RunConfig& config) {
    const mims::DerivedCouplings k = config.derive();
    const std::vector<double> grid = mims::time_grid(config.t_start, config.t_end, config.n_points);
    const std::vector<mims::TraceRecord> records = mims::make_trace(k, grid);
    const mims::Table table = mims::trace_table(records);
    const fs::path path = write_output(prepare_output_dir(config), "trace", config.format, table);

    double max_nu = 0.0, max_kappa = 0.0;
    for (const auto& r : records) {
        max_nu = std::max(max_nu, r.abs_nu);
        max_kappa = std::max(max_kappa, r.abs_kappa);
    }
    std::cout << "rows = " << records.size() << '\n'
              << "max_abs_nu = " << mims::format_full(max_nu) << '\n'
              << "max_abs_kappa = " << mims::format_full(max_kappa) << '\n'
              << "wrote " << path.string() << '\n';
    return 0;
}

int run_oracle(const mims::RunConfig& config) {
    const mims::DerivedCouplings k = config.derive();
    const std::vector<double> grid = mims::time_grid(config.t_start, config.t_end, config.n_points);
    const mims::ConvergenceScan scan = mims::truncation_convergence(k, grid, config.fock_levels);

    // residuals against the closed-form module at the working basis size
    const int n_basis = scan.converged ? scan.converged_n : scan.n_list.back();
    const mims::FockPropagator prop(mims::build_hamiltonian(k, n_basis));
    const mims::FockState initial = mims::vacuum_fock(n_basis);
    const double chi = k.chi();
    double res_mean = 0.0, res_squeeze = 0.0, res_purity = 0.0;
    for (double t : grid) {
        const mims::MomentSet m = mims::moments(prop.evolve(initial, t));
        res_mean = std::max(res_mean, std::abs(m.mean_c - mims::displacement_nu(k, t)));

        const double mean_var = 0.5 * (m.var_x + m.var_y);
        const double half_gap = 0.5 * std::hypot(m.var_x - m.var_y, 2.0 * m.cov_xy);
        const double r_cov = 0.25 * std::log((mean_var + half_gap) / (mean_var - half_gap));
        const double closed = std::abs(k.c_s / chi * std::sin(chi * t));
        res_squeeze = std::max(res_squeeze, std::abs(std::sinh(r_cov) - closed));

        const double det = m.var_x * m.var_y - m.cov_xy * m.cov_xy;
        res_purity = std::max(res_purity, std::abs(det - 0.0625));
    }
    const double threshold = 1e-8;
    const bool pass = scan.converged && res_mean < threshold && res_squeeze < threshold &&
                      res_purity < threshold;

    mims::Report report;
    report.add_text("converged", scan.converged ? "true" : "false");
    report.add("converged_n", scan.converged_n);
    report.add("basis_used", n_basis);
    for (std::size_t i = 0; i < scan.steps.size(); ++i) {
        const auto& s = scan.steps[i];
        report.add("change_" + std::to_string(s.n_coarse) + "_to_" + std::to_string(s.n_fine),
                   s.max_change);
    }
    for (std::size_t i = 0; i < scan.n_list.size(); ++i) {
        report.add("tail_" + std::to_string(scan.n_list[i]), scan.max_tail[i]);
    }
    report.add("residual_mean_displacement", res_mean);
    report.add("residual_covariance_squeeze", res_squeeze);
    report.add("residual_purity", res_purity);
    report.add("threshold", threshold);
    report.add_text("verdict", pass ? "PASS" : "FAIL");

    const fs::path path =
        write_output(prepare_output_dir(config), "oracle_report", config.format, report);
    print_report(report);
    std::cout << "wrote " << path.string() << '\n';
    if (!scan.converged) mims::require_converged(scan);  // exits through the error path
    return pass ? 0 : 4;
}

int run_thermal(const mims::RunConfig& config) {
    const mims::DerivedCouplings k = config.derive();
    const mims::Units units = config.units();
    const mims::ThermalBath bath = config.bath();
    const double var_q =
        mims::stationary_position_variance(k, bath, config.mass(), config.damping(), units);
    const mims::UncertaintyRatio ratio = mims::uncertainty_ratio(k, bath, units);

    mims::Report report;
    report.add_text("mode", config.natural_units ? "natural" : "physical");
    if (!config.natural_units) report.add("temperature", config.mirror.temperature);
    report.add("n_thermal", bath.n_thermal);
    report.add("var_q", var_q);
    report.add("zero_point_var_q", units.hbar / (2.0 * config.mass() * k.omega_m));
    report.add("uncertainty_ratio", ratio.ratio);
    report.add("squeezing_db", ratio.db_amplitude);
    report.add("squeezing_db_variance", ratio.db_variance);
    if (std::isfinite(ratio.high_t_high_squeeze)) {
        report.add("high_t_high_squeeze_ratio", ratio.high_t_high_squeeze);
    }

    if (config.n_trajectories > 0) {
        mims::LangevinConfig lc =
            mims::make_langevin_config(config.mass(), config.damping(), k.omega_m, bath,
                                       config.seed, config.dt, config.n_trajectories, units);
        const mims::TrajectoryEnsemble ensemble =
            mims::langevin_trajectories(lc, k, config.mass(), config.t_end);
        report.add("mc_trajectories", config.n_trajectories);
        report.add("mc_dt", config.dt);
        report.add("mc_t_final", ensemble.times.back());
        report.entries.push_back({"mc_seed", std::to_string(config.seed), false});
        report.add("mc_mean_q", ensemble.empirical_mean_q);
        report.add("mc_var_q", ensemble.empirical_var_q);
        report.add("mc_relative_deviation", std::abs(ensemble.empirical_var_q - var_q) / var_q);
    }

    const fs::path path =
        write_output(prepare_output_dir(config), "thermal", config.format, report);
    print_report(report);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int run_figures(const mims::RunConfig& config) {
    const mims::DerivedCouplings k = config.derive();
    const std::vector<double> grid = mims::time_grid(config.t_start, config.t_end, config.n_points);
    const std::vector<mims::TraceRecord> records = mims::make_trace(k, grid);

    mims::Table displacement;
    displacement.columns = {"t", "abs_nu"};
    mims::Table squeeze;
    squeeze.columns = {"t", "abs_kappa"};
    for (const auto& r : records) {
        displacement.rows.push_back({r.t, r.abs_nu});
        squeeze.rows.push_back({r.t, r.abs_kappa});
    }

    const fs::path dir = prepare_output_dir(config);
    const fs::path fig2 = write_output(dir, "fig2", config.format, displacement);
    const fs::path fig3 = write_output(dir, "fig3", config.format, squeeze);
    std::cout << "wrote " << fig2.string() << '\n' << "wrote " << fig3.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity-mirror dynamics: derived couplings, closed-form evolution, "
                 "number-basis oracle, thermal statistics"};
    app.require_subcommand(1);

    CommonOptions derive_opts, evolve_opts, oracle_opts, thermal_opts, figures_opts;
    CLI::App* derive = app.add_subcommand("derive", "tabulate base rates and couplings");
    derive_opts.attach(derive);
    CLI::App* evolve = app.add_subcommand("evolve", "emit the time trace of nu, kappa and the covariance");
    evolve_opts.attach(evolve);
    CLI::App* oracle = app.add_subcommand("oracle", "cross-check the closed forms against the number basis");
    oracle_opts.attach(oracle);
    CLI::App* thermal = app.add_subcommand("thermal", "stationary statistics and optional Langevin ensemble");
    thermal_opts.attach(thermal);
    CLI::App* figures = app.add_subcommand("figures", "emit the displacement and squeeze data files");
    figures_opts.attach(figures);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (derive->parsed()) return run_derive(derive_opts.load());
        if (evolve->parsed()) return run_evolve(evolve_opts.load());
        if (oracle->parsed()) return run_oracle(oracle_opts.load());
        if (thermal->parsed()) return run_thermal(thermal_opts.load());
        if (figures->parsed()) return run_figures(figures_opts.load());
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const mims::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mims::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mims::DegenerateCouplingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const mims::RegimeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const mims::StepSizeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const mims::OracleScaleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const mims::NotConvergedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const mims::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const mims::ImpureStateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
