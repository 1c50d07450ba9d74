#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "retmap/analysis.hpp"
#include "retmap/io/config.hpp"
#include "retmap/io/csv.hpp"
#include "retmap/io/svg.hpp"
#include "retmap/scenario.hpp"

namespace retmap {

enum class Command { simulate, critical_points, basins, verify_expansion, check_admissibility, constants };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::critical_points: return "critical-points";
    case Command::basins: return "basins";
    case Command::verify_expansion: return "verify-expansion";
    case Command::check_admissibility: return "check-admissibility";
    case Command::constants: return "constants";
  }
  return "?";
}

inline Command parse_command(const std::string& s) {
  for (auto c : {Command::simulate, Command::critical_points, Command::basins,
                 Command::verify_expansion, Command::check_admissibility, Command::constants})
    if (s == to_string(c)) return c;
  throw io::ConfigError("unknown command '" + s + "'");
}

inline const char* to_string(LyapunovPolicy p) {
  return p == LyapunovPolicy::enforce ? "enforce" : "record";
}

struct RunConfig {
  Command command = Command::simulate;
  std::string scenario;
  ScenarioParams params;
  std::string out_dir = "retmap_out";
  std::uint64_t seed = 0;
  /// Worker threads; 0 = all hardware threads.
  unsigned jobs = 0;

  /// Angle in 2D, (polar, azimuth) in 3D. Empty: drawn from `seed`.
  std::vector<double> seed_point;
  std::size_t max_iters = 100000;
  double grad_tol = 1e-8;
  double lyapunov_slack = 1e-10;
  LyapunovPolicy lyapunov = LyapunovPolicy::enforce;
  /// Finite-difference step for gradients; 0 = 1e-5 x core scale.
  double gradient_step = 0.0;

  std::size_t starts = 64;
  std::size_t resolution = 100;
  std::size_t basin_budget = 20000;
  std::vector<double> eps_family;
  std::size_t expansion_grid = 200;
  std::size_t samples = 10000;
  std::size_t grid = 256;

  AnalysisTolerances tolerances;
};

/// Throws io::ConfigError naming the offending field.
inline void validate(const RunConfig& c) {
  auto bad = [](const std::string& field, const std::string& what) {
    throw io::ConfigError("field '" + field + "': " + what);
  };
  if (c.scenario.empty()) bad("scenario", "required");
  scenario_dimension(c.scenario);  // throws on unknown names
  try {
    detail::resolve_params(detail::entry(c.scenario), c.params);
  } catch (const ScenarioError& e) {
    bad("params", e.what());
  }
  if (c.out_dir.empty()) bad("out", "must not be empty");
  auto positive = [&](const std::string& f, double v) {
    if (!(v > 0.0)) bad(f, "must be > 0");
  };
  auto count = [&](const std::string& f, std::size_t v) {
    if (v < 1) bad(f, "must be >= 1");
  };
  positive("grad_tol", c.grad_tol);
  positive("lyapunov_slack", c.lyapunov_slack);
  if (c.gradient_step < 0.0) bad("gradient_step", "must be >= 0");
  positive("critical_tolerance", c.tolerances.critical);
  positive("merge_radius", c.tolerances.merge_radius);
  positive("basin_match_radius", c.tolerances.basin_match_radius);
  positive("degeneracy_floor", c.tolerances.degeneracy_floor);
  positive("hyperbolicity_margin", c.tolerances.hyperbolicity_margin);
  positive("multiplier_agreement", c.tolerances.multiplier_agreement);
  count("max_iters", c.max_iters);
  count("starts", c.starts);
  count("resolution", c.resolution);
  count("basin_budget", c.basin_budget);
  count("expansion_grid", c.expansion_grid);
  count("samples", c.samples);
  count("grid", c.grid);
  for (double e : c.eps_family)
    if (!(e > 0.0)) bad("eps_family", "entries must be > 0");
  if (c.eps_family.size() == 1) bad("eps_family", "needs at least two values");
  const int dim = scenario_dimension(c.scenario);
  if (!c.seed_point.empty() && static_cast<int>(c.seed_point.size()) != dim - 1)
    bad("seed_point", dim == 2 ? "expected one angle" : "expected two angles (polar, azimuth)");
}

/// Applies a parsed config file on top of `base`.
inline RunConfig apply_config(RunConfig base, const io::ConfigFile& file) {
  for (const auto& [key, e] : file.top) {
    const std::string what = file.source + ":" + std::to_string(e.line) + ": field '" + key + "'";
    auto num = [&] { return io::to_double(e.value, what); };
    auto cnt = [&]() -> std::size_t {
      long long v = io::to_integer(e.value, what);
      if (v < 1) file.fail(e, key, "must be >= 1");
      return static_cast<std::size_t>(v);
    };
    try {
      if (key == "command") base.command = parse_command(e.value);
      else if (key == "scenario") base.scenario = e.value;
      else if (key == "out") base.out_dir = e.value;
      else if (key == "seed") {
        long long v = io::to_integer(e.value, what);
        if (v < 0) file.fail(e, key, "must be >= 0");
        base.seed = static_cast<std::uint64_t>(v);
      } else if (key == "jobs") {
        long long v = io::to_integer(e.value, what);
        if (v < 0) file.fail(e, key, "must be >= 0");
        base.jobs = static_cast<unsigned>(v);
      } else if (key == "seed_point") base.seed_point = io::to_doubles(e.value, what);
      else if (key == "max_iters") base.max_iters = cnt();
      else if (key == "grad_tol") base.grad_tol = num();
      else if (key == "lyapunov_slack") base.lyapunov_slack = num();
      else if (key == "lyapunov") {
        if (e.value == "enforce") base.lyapunov = LyapunovPolicy::enforce;
        else if (e.value == "record") base.lyapunov = LyapunovPolicy::record;
        else file.fail(e, key, "expected 'enforce' or 'record'");
      } else if (key == "gradient_step") base.gradient_step = num();
      else if (key == "starts") base.starts = cnt();
      else if (key == "resolution") base.resolution = cnt();
      else if (key == "basin_budget") base.basin_budget = cnt();
      else if (key == "eps_family") base.eps_family = io::to_doubles(e.value, what);
      else if (key == "expansion_grid") base.expansion_grid = cnt();
      else if (key == "samples") base.samples = cnt();
      else if (key == "grid") base.grid = cnt();
      else if (key == "critical_tolerance") base.tolerances.critical = num();
      else if (key == "merge_radius") base.tolerances.merge_radius = num();
      else if (key == "basin_match_radius") base.tolerances.basin_match_radius = num();
      else if (key == "degeneracy_floor") base.tolerances.degeneracy_floor = num();
      else if (key == "hyperbolicity_margin") base.tolerances.hyperbolicity_margin = num();
      else if (key == "multiplier_agreement") base.tolerances.multiplier_agreement = num();
      else file.fail(e, key, "unknown field");
    } catch (const io::ConfigError&) {
      throw;
    } catch (const Error& err) {
      file.fail(e, key, err.what());
    }
  }
  for (const auto& [key, e] : file.params)
    base.params[key] =
        io::to_double(e.value, file.source + ":" + std::to_string(e.line) + ": param '" + key + "'");
  return base;
}

namespace detail {

inline std::string params_text(const ScenarioParams& p) {
  std::string out;
  for (const auto& [k, v] : p) out += (out.empty() ? "" : " ") + k + "=" + io::format_number(v);
  return out;
}

template <int Dim>
io::HeaderBlock header(const RunConfig& cfg, const Scenario<Dim>& s) {
  const auto& t = cfg.tolerances;
  io::HeaderBlock h;
  h.add("generator", "retmap 0.1.0")
      .add("command", to_string(cfg.command))
      .add("scenario", s.name)
      .add("dimension", std::to_string(Dim))
      .add("params", params_text(s.params))
      .add("seed", std::to_string(cfg.seed))
      .add("tolerances",
           "surface=" + io::format_number(tol::kSurface) + " root_value=" +
               io::format_number(tol::kRootValue) + " grad_tol=" + io::format_number(cfg.grad_tol) +
               " lyapunov_slack=" + io::format_number(cfg.lyapunov_slack) +
               " critical=" + io::format_number(t.critical) +
               " merge_radius=" + io::format_number(t.merge_radius) +
               " basin_match_radius=" + io::format_number(t.basin_match_radius) +
               " degeneracy_floor=" + io::format_number(t.degeneracy_floor) +
               " hyperbolicity_margin=" + io::format_number(t.hyperbolicity_margin) +
               " multiplier_agreement=" + io::format_number(t.multiplier_agreement));
  return h;
}

template <int Dim>
std::vector<std::string> coord_names() {
  if constexpr (Dim == 2) return {"x", "y"};
  else return {"x", "y", "z"};
}

template <int Dim>
void push_coords(std::vector<std::string>& row, const Vec<Dim>& p) {
  for (int i = 0; i < Dim; ++i) row.push_back(io::format_number(p[i]));
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  return os;
}

template <int Dim>
CorePoint<Dim> seed_point(const RunConfig& cfg, const ConvexCore<Dim>& core) {
  if (!cfg.seed_point.empty()) {
    if constexpr (Dim == 2) return project_to_core(core, unit_circle(cfg.seed_point[0]));
    else return project_to_core(core, unit_sphere(cfg.seed_point[0], cfg.seed_point[1]));
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> n01;
  Vec<Dim> v;
  do {
    for (int i = 0; i < Dim; ++i) v[i] = n01(rng);
  } while (v.norm() < 1e-6);
  return project_to_core(core, Vec<Dim>(v.normalized()));
}

struct Outcome {
  int status = 0;
  std::vector<std::string> files;
};

template <int Dim>
void require_admissible(const Scenario<Dim>& s) {
  if (!s.admissible)
    throw ScenarioError("scenario '" + s.name +
                        "' failed the admissibility check; run `retmap check-admissibility "
                        "--scenario " + s.name + "` for the failing samples");
}

template <int Dim>
Outcome run_simulate(const RunConfig& cfg, const Scenario<Dim>& s, const std::filesystem::path& dir,
                     std::ostream& log) {
  require_admissible(s);
  IterateOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.grad_tolerance = cfg.grad_tol;
  opt.lyapunov_slack = cfg.lyapunov_slack;
  opt.lyapunov = cfg.lyapunov;
  opt.gradient_step = cfg.gradient_step;
  auto c0 = seed_point(cfg, s.core);
  auto traj = iterate(s.core, s.outer, c0, opt);

  auto h = header(cfg, s);
  h.add("lyapunov", to_string(cfg.lyapunov)).add("max_iters", std::to_string(cfg.max_iters));
  {
    auto os = open_out(dir / "trajectory.csv");
    std::vector<std::string> cols{"k"};
    for (auto& n : coord_names<Dim>()) cols.push_back(n);
    for (auto n : {"d", "V", "grad_norm", "displacement"}) cols.push_back(n);
    io::CsvWriter w(os, h, cols);
    for (const auto& r : traj.steps) {
      std::vector<std::string> row{std::to_string(r.k)};
      push_coords<Dim>(row, r.position);
      for (double v : {r.thickness, r.energy, r.grad_norm, r.displacement}) row.push_back(io::format_number(v));
      w.row(row);
    }
  }
  {
    auto os = open_out(dir / "summary.txt");
    h.write(os);
    const auto& last = traj.last();
    os << "termination = " << to_string(traj.termination) << "\n"
       << "message = " << traj.message << "\n"
       << "iterations = " << traj.iterations << "\n"
       << "final_grad_norm = " << io::format_number(last.grad_norm) << "\n"
       << "final_thickness = " << io::format_number(last.thickness) << "\n";
    if constexpr (Dim == 2) {
      os << "initial_angle = " << io::format_number(angle_of(traj.initial().position)) << "\n"
         << "final_angle = " << io::format_number(angle_of(last.position)) << "\n";
    } else {
      os << "initial_polar = " << io::format_number(polar_of(traj.initial().position)) << "\n"
         << "initial_azimuth = " << io::format_number(azimuth_of(traj.initial().position)) << "\n"
         << "final_polar = " << io::format_number(polar_of(last.position)) << "\n"
         << "final_azimuth = " << io::format_number(azimuth_of(last.position)) << "\n";
    }
    os << "lyapunov_violations = " << traj.lyapunov_violations << "\n"
       << "max_energy_increase = " << io::format_number(traj.max_energy_increase) << "\n";
    if (traj.first_violation)
      os << "first_violation = " << traj.first_violation->first << "," << traj.first_violation->second << "\n";
  }
  log << "simulate: " << to_string(traj.termination) << " after " << traj.iterations
      << " steps, final |grad d| = " << traj.last().grad_norm;
  if (!traj.message.empty()) log << " (" << traj.message << ")";
  log << "\n";
  return {traj.termination == Termination::error ? 1 : 0, {"trajectory.csv", "summary.txt"}};
}

template <int Dim>
CriticalPointSearch<Dim> search(const RunConfig& cfg, const Scenario<Dim>& s) {
  SearchOptions opt;
  opt.jobs = cfg.jobs;
  opt.tolerances = cfg.tolerances;
  std::mt19937_64 rng(cfg.seed);
  opt.start_shift = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return find_critical_points(s.core, s.outer, cfg.starts, cfg.tolerances.critical, opt);
}

template <int Dim>
void write_critical_points(std::ostream& os, io::HeaderBlock h, const CriticalPointSearch<Dim>& cs) {
  h.add("globally_critical", cs.globally_critical ? "true" : "false");
  for (const auto& w : cs.warnings) h.add("warning", w);
  std::vector<std::string> cols{"index"};
  for (auto& n : coord_names<Dim>()) cols.push_back(n);
  if constexpr (Dim == 2) cols.push_back("angle");
  else {
    cols.push_back("polar");
    cols.push_back("azimuth");
  }
  cols.push_back("thickness");
  for (int i = 0; i < Dim - 1; ++i) cols.push_back("lambda" + std::to_string(i + 1));
  for (int i = 0; i < Dim - 1; ++i) cols.push_back("mu" + std::to_string(i + 1));
  for (int i = 0; i < Dim - 1; ++i) cols.push_back("jacobian_modulus" + std::to_string(i + 1));
  for (auto n : {"stability", "grad_residual", "degenerate", "prediction_consistent"}) cols.push_back(n);
  io::CsvWriter w(os, h, cols);
  for (std::size_t i = 0; i < cs.records.size(); ++i) {
    const auto& r = cs.records[i];
    std::vector<std::string> row{std::to_string(i)};
    push_coords<Dim>(row, r.location.position);
    if constexpr (Dim == 2) row.push_back(io::format_number(angle_of(r.location.position)));
    else {
      row.push_back(io::format_number(polar_of(r.location.position)));
      row.push_back(io::format_number(azimuth_of(r.location.position)));
    }
    row.push_back(io::format_number(r.thickness_at));
    for (double v : r.hessian_eigs) row.push_back(io::format_number(v));
    for (double v : r.map_eigs) row.push_back(io::format_number(v));
    for (double v : r.jacobian_moduli) row.push_back(io::format_number(v));
    row.push_back(to_string(r.stability));
    row.push_back(io::format_number(r.grad_residual));
    row.push_back(r.degenerate ? "1" : "0");
    row.push_back(r.prediction_consistent ? "1" : "0");
    w.row(row);
  }
}

template <int Dim>
Outcome run_critical_points(const RunConfig& cfg, const Scenario<Dim>& s,
                            const std::filesystem::path& dir, std::ostream& log) {
  auto cs = search(cfg, s);
  auto h = header(cfg, s);
  h.add("starts", std::to_string(cfg.starts));
  auto os = open_out(dir / "critical_points.csv");
  write_critical_points(os, h, cs);
  if (cs.globally_critical)
    log << "critical-points: scenario is globally critical (every point is a fixed point)\n";
  else
    log << "critical-points: " << cs.records.size() << " found\n";
  for (const auto& r : cs.records) {
    log << "  d=" << r.thickness_at << " " << to_string(r.stability) << " moduli";
    for (double m : r.jacobian_moduli) log << " " << m;
    log << "\n";
  }
  return {0, {"critical_points.csv"}};
}

template <int Dim>
Outcome run_basins(const RunConfig& cfg, const Scenario<Dim>& s, const std::filesystem::path& dir,
                   std::ostream& log) {
  require_admissible(s);
  auto cs = search(cfg, s);
  BasinOptions opt;
  opt.iteration_budget = cfg.basin_budget;
  opt.grad_tolerance = cfg.grad_tol;
  opt.jobs = cfg.jobs;
  opt.tolerances = cfg.tolerances;
  auto seeds = basin_seed_grid(s.core, cfg.resolution);
  BasinMap<Dim> map;
  if (cs.globally_critical) {
    map.seeds = seeds;
    map.labels.assign(seeds.size(), BasinMap<Dim>::kUnresolved);
    map.globally_critical = true;
  } else {
    map = compute_basins(s.core, s.outer, seeds, cs.records, opt);
  }

  Outcome out;
  auto h = header(cfg, s);
  h.add("resolution", std::to_string(cfg.resolution))
      .add("iteration_budget", std::to_string(cfg.basin_budget))
      .add("globally_critical", map.globally_critical ? "true" : "false");
  {
    auto os = open_out(dir / "critical_points.csv");
    write_critical_points(os, header(cfg, s), cs);
    out.files.push_back("critical_points.csv");
  }
  {
    auto os = open_out(dir / "basins.csv");
    std::vector<std::string> cols{"seed"};
    for (auto& n : coord_names<Dim>()) cols.push_back(n);
    cols.push_back("label");
    io::CsvWriter w(os, h, cols);
    for (std::size_t i = 0; i < map.seeds.size(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      push_coords<Dim>(row, map.seeds[i].position);
      row.push_back(std::to_string(map.labels[i]));
      w.row(row);
    }
    out.files.push_back("basins.csv");
  }
  {
    auto os = open_out(dir / "basin_summary.txt");
    h.write(os);
    os << "seeds = " << map.seeds.size() << "\n"
       << "resolved_fraction = " << io::format_number(map.globally_critical ? 0.0 : map.resolved_fraction()) << "\n"
       << "unresolved = " << map.unresolved << "\n"
       << "failed = " << map.failed << "\n"
       << "unmatched = " << map.unmatched << "\n"
       << "lyapunov_violations = " << map.lyapunov_violations << "\n";
    for (std::size_t j = 0; j < map.counts.size(); ++j)
      os << "count." << j << " = " << map.counts[j] << "  # " << to_string(cs.records[j].stability)
         << ", d = " << io::format_number(cs.records[j].thickness_at) << "\n";
    out.files.push_back("basin_summary.txt");
  }
  if (map.globally_critical) {
    log << "basins: scenario is globally critical; every seed is its own fixed point, no SVG written\n";
    return out;
  }
  io::LabelRaster raster;
  raster.rows = Dim == 2 ? 1 : cfg.resolution;
  raster.cols = Dim == 2 ? cfg.resolution : 2 * cfg.resolution;
  raster.labels = map.labels;
  std::vector<std::string> legend;
  for (std::size_t j = 0; j < cs.records.size(); ++j) {
    std::ostringstream name;
    name.precision(4);
    name << "#" << j << " " << to_string(cs.records[j].stability) << " d=" << cs.records[j].thickness_at
         << " (" << map.counts[j] << " seeds)";
    legend.push_back(name.str());
  }
  {
    auto os = open_out(dir / "basins.svg");
    io::write_basin_svg(os, raster, legend,
                        s.name + (Dim == 2 ? " basins, angle 0..2pi" : " basins, equirectangular"));
    out.files.push_back("basins.svg");
  }
  log << "basins: " << map.seeds.size() << " seeds, resolved fraction " << map.resolved_fraction()
      << ", unresolved " << map.unresolved << ", failed " << map.failed << "\n";
  return out;
}

template <int Dim>
Outcome run_verify_expansion(const RunConfig& cfg, const Scenario<Dim>& s,
                             const std::filesystem::path& dir, std::ostream& log) {
  auto h = header(cfg, s);
  h.add("expansion_grid", std::to_string(cfg.expansion_grid));
  auto dirs = directions<Dim>(cfg.expansion_grid);
  std::vector<double> eps = cfg.eps_family;
  std::vector<ExpansionReport<Dim>> reports;
  std::optional<ExpansionFamilyReport<Dim>> family;
  if (eps.empty()) {
    std::vector<CorePoint<Dim>> grid;
    for (const auto& w : dirs) grid.push_back(project_to_core(s.core, w));
    reports.push_back(verify_expansion(s.core, s.outer, grid, cfg.jobs));
    eps.push_back(s.params.count("eps") ? s.params.at("eps") : 0.0);
  } else {
    if (!s.params.count("eps"))
      throw io::ConfigError("field 'eps_family': scenario '" + s.name + "' has no 'eps' parameter");
    auto outer_for = [&](double e) {
      ScenarioParams p = cfg.params;
      p.erase("amplitude");
      p["eps"] = e;
      return std::get<Scenario<Dim>>(build_scenario(s.name, p)).outer;
    };
    family = verify_expansion_family<Dim>(s.core, outer_for, eps, dirs, cfg.jobs);
    reports = family->reports;
    std::string listed;
    for (double e : eps) listed += (listed.empty() ? "" : ",") + io::format_number(e);
    h.add("eps_family", listed);
    h.add("loglog_slope", family->loglog_slope);
  }
  {
    auto os = open_out(dir / "expansion.csv");
    std::vector<std::string> cols{"eps"};
    for (auto& n : coord_names<Dim>()) cols.push_back(n);
    for (auto n : {"d", "grad_norm", "remainder", "driver"}) cols.push_back(n);
    io::CsvWriter w(os, h, cols);
    for (std::size_t k = 0; k < reports.size(); ++k)
      for (const auto& smp : reports[k].samples) {
        std::vector<std::string> row{io::format_number(eps[k])};
        push_coords<Dim>(row, smp.position);
        for (double v : {smp.thickness, smp.grad_norm, smp.remainder, smp.driver})
          row.push_back(io::format_number(v));
        w.row(row);
      }
  }
  {
    auto os = open_out(dir / "expansion_summary.csv");
    io::CsvWriter w(os, h, {"eps", "k_hat", "fit_points", "max_remainder", "ratio_to_next"});
    for (std::size_t k = 0; k < reports.size(); ++k) {
      double ratio = family && k < family->ratios.size() ? family->ratios[k] : std::nan("");
      w.row({io::format_number(eps[k]), io::format_number(reports[k].k_hat),
             std::to_string(reports[k].fit_points), io::format_number(reports[k].max_remainder),
             io::format_number(ratio)});
    }
  }
  log << "verify-expansion:";
  for (std::size_t k = 0; k < reports.size(); ++k)
    log << " eps=" << eps[k] << " max|R|=" << reports[k].max_remainder << " K_hat=" << reports[k].k_hat;
  if (family) {
    log << "; ratios";
    for (double r : family->ratios) log << " " << r;
    log << "; slope " << family->loglog_slope;
  }
  log << "\n";
  return {0, {"expansion.csv", "expansion_summary.csv"}};
}

template <int Dim>
Outcome run_check_admissibility(const RunConfig& cfg, const Scenario<Dim>& s,
                                const std::filesystem::path& dir, std::ostream& log) {
  auto rep = check_admissibility(s.core, s.outer, cfg.samples, cfg.samples);
  auto h = header(cfg, s);
  h.add("samples", std::to_string(cfg.samples))
      .add("verdict", rep.verdict() ? "admissible" : "not admissible")
      .add("normal_property_failures", std::to_string(rep.normal_property_failures.size()))
      .add("connectivity_failures", std::to_string(rep.connectivity_failures.size()));
  auto os = open_out(dir / "admissibility.csv");
  std::vector<std::string> cols{"kind"};
  for (auto& n : coord_names<Dim>()) cols.push_back(n);
  io::CsvWriter w(os, h, cols);
  for (const auto& p : rep.normal_property_failures) {
    std::vector<std::string> row{"normal_property"};
    push_coords<Dim>(row, p);
    w.row(row);
  }
  for (const auto& p : rep.connectivity_failures) {
    std::vector<std::string> row{"connectivity"};
    push_coords<Dim>(row, p);
    w.row(row);
  }
  log << "check-admissibility: " << (rep.verdict() ? "admissible" : "NOT admissible") << " ("
      << rep.normal_property_failures.size() << " normal-property failures, "
      << rep.connectivity_failures.size() << " connectivity failures out of " << rep.samples_checked
      << " samples)\n";
  return {0, {"admissibility.csv"}};
}

template <int Dim>
Outcome run_constants(const RunConfig& cfg, const Scenario<Dim>& s, const std::filesystem::path& dir,
                      std::ostream& log) {
  std::vector<CorePoint<Dim>> grid;
  for (const auto& w : directions<Dim>(cfg.grid)) grid.push_back(project_to_core(s.core, w));
  auto h = header(cfg, s);
  h.add("grid", std::to_string(cfg.grid));
  auto os = open_out(dir / "constants.csv");
  try {
    auto k = estimate_descent_constants(s.core, s.outer, grid, cfg.jobs);
    io::CsvWriter w(os, h,
                    {"eta_hat", "a_hat", "b_hat", "epsilon0", "sample_count", "min_thickness",
                     "two_min_d_squared", "quartic_dominates"});
    w.row({io::format_number(k.eta_hat), io::format_number(k.a_hat), io::format_number(k.b_hat),
           io::format_number(k.epsilon0), std::to_string(k.sample_count),
           io::format_number(k.min_thickness), io::format_number(2.0 * k.min_thickness * k.min_thickness),
           k.quartic_dominates ? "1" : "0"});
    log << "constants: eta_hat=" << k.eta_hat << " a_hat=" << k.a_hat << " b_hat=" << k.b_hat
        << " epsilon0=" << k.epsilon0 << (k.quartic_dominates ? " (quartic term dominates)" : "")
        << "\n";
  } catch (const AnalysisError& e) {
    h.add("note", e.what());
    io::CsvWriter w(os, h, {"eta_hat", "a_hat", "b_hat", "epsilon0"});
    log << "constants: " << e.what() << "\n";
  }
  return {0, {"constants.csv"}};
}

template <int Dim>
Outcome dispatch(const RunConfig& cfg, const Scenario<Dim>& s, const std::filesystem::path& dir,
                 std::ostream& log) {
  switch (cfg.command) {
    case Command::simulate: return run_simulate(cfg, s, dir, log);
    case Command::critical_points: return run_critical_points(cfg, s, dir, log);
    case Command::basins: return run_basins(cfg, s, dir, log);
    case Command::verify_expansion: return run_verify_expansion(cfg, s, dir, log);
    case Command::check_admissibility: return run_check_admissibility(cfg, s, dir, log);
    case Command::constants: return run_constants(cfg, s, dir, log);
  }
  return {};
}

}  // namespace detail

/// Exit status of run().
enum ExitStatus : int {
  kExitOk = 0,
  /// The run completed but its result signals failure (e.g. a trajectory
  /// stopped on an energy increase), or the scenario was rejected.
  kExitRunFailure = 1,
  kExitConfigError = 2,
};

/// Runs one command and writes its files to cfg.out_dir. Diagnostics go to
/// `log`; the names of the files written are appended to `written`.
inline int run(const RunConfig& cfg, std::ostream& log, std::vector<std::string>* written = nullptr) {
  try {
    validate(cfg);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    const bool enforce = cfg.command == Command::simulate || cfg.command == Command::basins;
    AnyScenario any = build_scenario(cfg.scenario, cfg.params, enforce);
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    auto outcome = std::visit([&](const auto& s) { return detail::dispatch(cfg, s, dir, log); }, any);
    for (const auto& f : outcome.files) {
      log << "wrote " << (dir / f).string() << "\n";
      if (written) written->push_back((dir / f).string());
    }
    return outcome.status;
  } catch (const io::ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ScenarioError& e) {
    log << "error: " << e.what() << "\n";
    if (cfg.command == Command::simulate || cfg.command == Command::basins)
      log << "hint: run `retmap check-admissibility --scenario " << cfg.scenario
          << "` to list the failing samples\n";
    return kExitRunFailure;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
}

}  // namespace retmap
