#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "retmap/runner.hpp"

namespace {

struct Overrides {
  std::optional<std::string> config, out, scenario;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> params;

  std::optional<std::string> seed_point, lyapunov, eps_family;
  std::optional<std::size_t> max_iters, starts, resolution, budget, expansion_grid, samples, grid;
  std::optional<double> grad_tol, lyapunov_slack, gradient_step;
  std::optional<double> critical_tol, merge_radius, basin_match_radius, degeneracy_floor,
      hyperbolicity_margin;
};

template <class T, class U>
void set_if(const std::optional<T>& v, U& target) {
  if (v) target = *v;
}

retmap::RunConfig assemble(const Overrides& o, std::optional<retmap::Command> command) {
  retmap::RunConfig cfg;
  if (o.config) cfg = retmap::apply_config(cfg, retmap::io::load_config(*o.config));
  if (command) cfg.command = *command;
  set_if(o.out, cfg.out_dir);
  set_if(o.scenario, cfg.scenario);
  set_if(o.jobs, cfg.jobs);
  set_if(o.seed, cfg.seed);
  for (const auto& kv : o.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw retmap::io::ConfigError("--param expects key=value, got '" + kv + "'");
    std::string key = retmap::io::trim(kv.substr(0, eq));
    cfg.params[key] = retmap::io::to_double(retmap::io::trim(kv.substr(eq + 1)), "--param " + key);
  }
  if (o.seed_point) cfg.seed_point = retmap::io::to_doubles(*o.seed_point, "--seed-point");
  if (o.eps_family) cfg.eps_family = retmap::io::to_doubles(*o.eps_family, "--eps-family");
  if (o.lyapunov) {
    if (*o.lyapunov == "enforce") cfg.lyapunov = retmap::LyapunovPolicy::enforce;
    else if (*o.lyapunov == "record") cfg.lyapunov = retmap::LyapunovPolicy::record;
    else throw retmap::io::ConfigError("--lyapunov expects enforce or record");
  }
  set_if(o.max_iters, cfg.max_iters);
  set_if(o.starts, cfg.starts);
  set_if(o.resolution, cfg.resolution);
  set_if(o.budget, cfg.basin_budget);
  set_if(o.expansion_grid, cfg.expansion_grid);
  set_if(o.samples, cfg.samples);
  set_if(o.grid, cfg.grid);
  set_if(o.grad_tol, cfg.grad_tol);
  set_if(o.lyapunov_slack, cfg.lyapunov_slack);
  set_if(o.gradient_step, cfg.gradient_step);
  set_if(o.critical_tol, cfg.tolerances.critical);
  set_if(o.merge_radius, cfg.tolerances.merge_radius);
  set_if(o.basin_match_radius, cfg.tolerances.basin_match_radius);
  set_if(o.degeneracy_floor, cfg.tolerances.degeneracy_floor);
  set_if(o.hyperbolicity_margin, cfg.tolerances.hyperbolicity_margin);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary return map simulator: iterate F = pi o Phi between a convex core and an "
               "outer domain, locate and classify its fixed points, map basins."};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Overrides o;

  app.add_option("--config", o.config, "Run config file (key = value, [params] section)");
  app.add_option("--out", o.out, "Output directory (default retmap_out)");
  app.add_option("--jobs", o.jobs, "Worker threads; 0 = all available (default)");
  app.add_option("--seed", o.seed, "Seed for randomized start sets and seed points (default 0)");
  app.add_option("--scenario", o.scenario, "Catalog scenario name (see list-scenarios)");
  app.add_option("--param", o.params, "Scenario parameter override key=value; repeatable");
  app.add_option("--critical-tol", o.critical_tol, "Gradient residual accepted at a critical point");
  app.add_option("--merge-radius", o.merge_radius, "Dedupe radius for critical points (x core scale)");
  app.add_option("--basin-match-radius", o.basin_match_radius, "Basin labelling radius (x core scale)");
  app.add_option("--degeneracy-floor", o.degeneracy_floor, "Smallest |lambda| treated as nondegenerate");
  app.add_option("--hyperbolicity-margin", o.hyperbolicity_margin, "Band around |mu| = 1 called nonhyperbolic");

  auto* sim = app.add_subcommand("simulate", "Iterate F from one seed point");
  sim->add_option("--seed-point", o.seed_point, "Angle theta (2D) or polar,azimuth (3D); default random");
  sim->add_option("--max-iters", o.max_iters, "Iteration cap (default 100000)");
  sim->add_option("--grad-tol", o.grad_tol, "Stop when |grad d| falls below this (default 1e-8)");
  sim->add_option("--lyapunov", o.lyapunov, "enforce (stop on energy increase, default) or record");
  sim->add_option("--lyapunov-slack", o.lyapunov_slack, "Allowed energy rise per step (default 1e-10)");
  sim->add_option("--gradient-step", o.gradient_step, "Finite-difference step for grad d");

  auto* crit = app.add_subcommand("critical-points", "Locate and classify the critical points of d");
  crit->add_option("--starts", o.starts, "Multistart count (default 64)");

  auto* bas = app.add_subcommand("basins", "Label a seed grid by limit point; writes CSV and SVG");
  bas->add_option("--resolution", o.resolution, "2D: R angles; 3D: R x 2R lat/lon cells (default 100)");
  bas->add_option("--budget", o.budget, "Iteration budget per seed (default 20000)");
  bas->add_option("--starts", o.starts, "Multistart count for the critical point search");
  bas->add_option("--grad-tol", o.grad_tol, "Convergence tolerance on |grad d|");

  auto* exp = app.add_subcommand("verify-expansion", "Measure F(c) - c + 2 d grad d over a grid");
  exp->add_option("--eps-family", o.eps_family, "Comma-separated eps values, e.g. 0.08,0.04,0.02");
  exp->add_option("--grid", o.expansion_grid, "Grid points (default 200)");

  auto* adm = app.add_subcommand("check-admissibility", "Sample the normal and connectivity conditions");
  adm->add_option("--samples", o.samples, "Boundary and core samples each (default 10000)");

  auto* con = app.add_subcommand("constants", "Fit the descent constants a, b, eta");
  con->add_option("--grid", o.grid, "Grid points (default 256)");

  auto* list = app.add_subcommand("list-scenarios", "Print the scenario catalog and parameters");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    std::cout << retmap::catalog_help();
    return 0;
  }
  std::optional<retmap::Command> command;
  if (sim->parsed()) command = retmap::Command::simulate;
  else if (crit->parsed()) command = retmap::Command::critical_points;
  else if (bas->parsed()) command = retmap::Command::basins;
  else if (exp->parsed()) command = retmap::Command::verify_expansion;
  else if (adm->parsed()) command = retmap::Command::check_admissibility;
  else if (con->parsed()) command = retmap::Command::constants;
  if (!command && !o.config) {
    std::cerr << app.help();
    return retmap::kExitConfigError;
  }

  retmap::RunConfig cfg;
  try {
    cfg = assemble(o, command);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return retmap::kExitConfigError;
  }
  return retmap::run(cfg, std::cout);
}
