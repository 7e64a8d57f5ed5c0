// rotcool: rate tables, thresholds and population dynamics of a rotor in a BEC.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rotcool/rotcool.hpp"

namespace {

void add_options(CLI::App& app, rotcool::RunConfig& c) {
  app.set_config("--config", "", "INI-style key=value file; keys are the long option names");
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  app.add_option("--r0_over_xi", c.params.r0_over_xi, "molecule half-size r0/xi")->capture_default_str();
  app.add_option("--mI_over_mB", c.params.mI_over_mB, "impurity atom mass / boson mass")->capture_default_str();
  app.add_option("--T_over_Tc", c.params.T_over_Tc, "temperature / T_c")->capture_default_str();
  app.add_option("--n0_xi3", c.params.n0_xi3, "gas parameter n0 xi^3")->capture_default_str();
  app.add_option("--gIB_over_g", c.params.gIB_over_g, "g_IB / g")->capture_default_str();

  app.add_option("--jmax", c.jmax, "highest level kept (0: initial level + 8)")->capture_default_str();
  app.add_option("--initial_j", c.initial_j, "initial level for evolve")->capture_default_str();
  app.add_option("--initial_weights", c.initial_weights, "comma-separated initial weights p_0,p_1,...");
  app.add_option("--channels", c.channels, "comma list of 1ph-sp,1ph-T,2ph-cross,2ph-prec (or none)")
      ->capture_default_str();
  app.add_option("--t_start", c.t_start, "first output time")->capture_default_str();
  app.add_option("--t_end", c.t_end, "last output time (0: 10 / slowest decay rate)")->capture_default_str();
  app.add_option("--points", c.points, "number of output times")->capture_default_str();
  app.add_option("--spacing", c.spacing, "linear or log")->capture_default_str();
  app.add_option("--rel_tol", c.rel_tol, "relative quadrature tolerance")->capture_default_str();
  app.add_option("--abs_tol", c.abs_tol, "occupation cutoff for semi-infinite integrals")->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads for rate assembly and sweeps")->capture_default_str();
  app.add_option("--T_over_Tc_grid", c.T_over_Tc_grid, "scan-ratio temperatures")->capture_default_str();
  app.add_option("--n0_xi3_grid", c.n0_xi3_grid, "scan-ratio gas parameters")->capture_default_str();
  app.add_option("--k_max", c.k_max, "dispersion table upper momentum")->capture_default_str();
  app.add_option("--k_points", c.k_points, "dispersion table size")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotational relaxation of a homo-nuclear molecule in a Bose-Einstein condensate"};
  app.fallthrough();
  app.require_subcommand(1);
  rotcool::RunConfig cfg;
  add_options(app, cfg);

  auto* rates = app.add_subcommand("rates", "write rates_<channel>.csv for each channel");
  auto* critical = app.add_subcommand("critical", "print and write jc, jc1, jT, B_rot, Tc");
  auto* evolve = app.add_subcommand("evolve", "integrate the population dynamics");
  auto* scan = app.add_subcommand("scan-ratio", "thermal two-phonon / single-phonon ratio sweep");
  auto* disp = app.add_subcommand("dispersion", "tabulate Bogoliubov dispersion quantities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << rotcool::category_name(rotcool::ErrorCategory::Config) << ": " << e.what() << "\n";
    return rotcool::exit_code(rotcool::ErrorCategory::Config);
  }

  try {
    if (*rates) {
      rotcool::cmd_rates(cfg);
    } else if (*critical) {
      rotcool::cmd_critical(cfg, std::cout);
    } else if (*evolve) {
      rotcool::cmd_evolve(cfg, std::cerr);
    } else if (*scan) {
      rotcool::cmd_scan_ratio(cfg);
    } else if (*disp) {
      rotcool::cmd_dispersion(cfg);
    }
  } catch (const rotcool::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rotcool::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
