#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "retmap/dynamics.hpp"

namespace retmap {

enum class Stability { attracting, repelling, saddle, nonhyperbolic };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::attracting: return "attracting";
    case Stability::repelling: return "repelling";
    case Stability::saddle: return "saddle";
    case Stability::nonhyperbolic: return "nonhyperbolic";
  }
  return "?";
}

struct AnalysisTolerances {
  double critical = 1e-9;
  /// Relative to the core scale.
  double merge_radius = 1e-5;
  double basin_match_radius = 1e-3;
  double degeneracy_floor = 1e-4;
  double hyperbolicity_margin = 1e-3;
  /// Allowed gap between predicted and measured multiplier moduli.
  double multiplier_agreement = 1e-3;
};

template <int Dim>
struct CriticalPointRecord {
  CorePoint<Dim> location;
  double thickness_at;
  /// Ascending eigenvalues of the symmetrized tangential Hessian of d.
  std::array<double, Dim - 1> hessian_eigs;
  /// First-order multiplier prediction 1 - 2 d lambda_i, one per hessian_eigs entry.
  std::array<double, Dim - 1> map_eigs;
  /// Ascending eigenvalue moduli of the finite-difference Jacobian of F.
  std::array<double, Dim - 1> jacobian_moduli;
  Stability stability;
  double grad_residual;
  /// Some |lambda_i| is below the degeneracy floor.
  bool degenerate;
  /// Sorted |map_eigs| agree with jacobian_moduli within tolerance.
  bool prediction_consistent;
};

/// Stability from multiplier moduli, with a band around the unit circle
/// treated as nonhyperbolic.
template <std::size_t N>
Stability classify_moduli(const std::array<double, N>& moduli, double margin) {
  bool any_in = false, any_out = false;
  for (double m : moduli) {
    if (std::abs(m - 1.0) <= margin) return Stability::nonhyperbolic;
    (m < 1.0 ? any_in : any_out) = true;
  }
  if (any_in && any_out) return Stability::saddle;
  return any_in ? Stability::attracting : Stability::repelling;
}

/// Hessian and multiplier analysis at a critical point. The stability class
/// is read off the measured Jacobian of F; the first-order prediction
/// 1 - 2 d lambda is reported alongside and cross-checked.
template <int Dim>
CriticalPointRecord<Dim> classify(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                  const CorePoint<Dim>& location,
                                  const AnalysisTolerances& tols = {}) {
  auto frame = tangent_frame(core, location);
  double residual = tangential_gradient(core, outer, frame, StepSizes::gradient(core)).norm();
  if (residual > tols.critical)
    throw AnalysisError("classify: gradient residual " + std::to_string(residual) +
                        " exceeds the critical tolerance");
  CriticalPointRecord<Dim> rec{};
  rec.location = location;
  rec.grad_residual = residual;
  rec.thickness_at = thickness(core, outer, location).thickness;

  auto hess = tangential_hessian(core, outer, frame, StepSizes::hessian(core));
  rec.hessian_eigs = symmetric_eigenvalues<Dim - 1>(hess.entries);
  rec.degenerate = false;
  for (int i = 0; i < Dim - 1; ++i) {
    rec.map_eigs[i] = 1.0 - 2.0 * rec.thickness_at * rec.hessian_eigs[i];
    if (std::abs(rec.hessian_eigs[i]) < tols.degeneracy_floor) rec.degenerate = true;
  }

  auto jac = numerical_jacobian_F(core, outer, frame, StepSizes::jacobian(core));
  rec.jacobian_moduli = eigenvalue_moduli<Dim - 1>(jac.entries);

  std::array<double, Dim - 1> predicted{};
  for (int i = 0; i < Dim - 1; ++i) predicted[i] = std::abs(rec.map_eigs[i]);
  std::sort(predicted.begin(), predicted.end());
  rec.prediction_consistent = true;
  for (int i = 0; i < Dim - 1; ++i)
    if (std::abs(predicted[i] - rec.jacobian_moduli[i]) > tols.multiplier_agreement)
      rec.prediction_consistent = false;

  rec.stability = rec.degenerate ? Stability::nonhyperbolic
                                 : classify_moduli(rec.jacobian_moduli, tols.hyperbolicity_margin);
  return rec;
}

/// Trust-region Newton iteration on the tangential gradient. Returns the
/// refined point once the gradient norm is at most `tolerance`.
template <int Dim>
std::optional<CorePoint<Dim>> refine_critical_point(const ConvexCore<Dim>& core,
                                                    const OuterDomain<Dim>& outer,
                                                    CorePoint<Dim> c, double tolerance,
                                                    int max_steps = 40) {
  const double trust = 0.1 * core.scale();
  try {
    for (int it = 0; it < max_steps; ++it) {
      auto frame = tangent_frame(core, c);
      auto g = tangential_gradient(core, outer, frame, StepSizes::gradient(core));
      if (g.norm() <= tolerance) return c;
      auto hess = tangential_hessian(core, outer, frame, StepSizes::hessian(core));
      auto lu = hess.entries.fullPivLu();
      if (!lu.isInvertible()) return std::nullopt;
      TVec<Dim> step = -lu.solve(g.coefficients);
      if (!step.allFinite()) return std::nullopt;
      if (step.norm() > trust) step *= trust / step.norm();
      c = project_to_core(core, Vec<Dim>(c.position + frame.embed(step)));
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

template <int Dim>
struct CriticalPointSearch {
  std::vector<CriticalPointRecord<Dim>> records;
  /// Every start was already critical (d is constant); no finite list exists.
  bool globally_critical = false;
  std::vector<std::string> warnings;
};

struct SearchOptions {
  unsigned jobs = 1;
  /// Rotates the low-discrepancy start set; in [0, 1).
  double start_shift = 0.0;
  std::size_t flow_budget = 3000;
  std::size_t map_budget = 500;
  AnalysisTolerances tolerances{};
};

/// Orders records by thickness, then lexicographically by location.
template <int Dim>
void sort_records(std::vector<CriticalPointRecord<Dim>>& recs) {
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
    if (a.thickness_at != b.thickness_at) return a.thickness_at < b.thickness_at;
    const auto& x = a.location.position;
    const auto& y = b.location.position;
    return std::lexicographical_compare(x.data(), x.data() + Dim, y.data(), y.data() + Dim);
  });
}

/// Multistart search for the critical set of d. From each start:
///   - iterate F (finds whatever F attracts),
///   - follow the explicit descent and ascent steps c -/+ 2 d grad d
///     (finds minima and maxima),
///   - run Newton on grad d directly (finds saddles).
/// Every candidate is polished by Newton, merged, and classified.
template <int Dim>
CriticalPointSearch<Dim> find_critical_points(const ConvexCore<Dim>& core,
                                              const OuterDomain<Dim>& outer, std::size_t n_starts,
                                              double critical_tolerance = 1e-9,
                                              const SearchOptions& opt = {}) {
  if (n_starts < 1) throw std::invalid_argument("find_critical_points: need at least one start");
  CriticalPointSearch<Dim> out;
  std::vector<CorePoint<Dim>> starts;
  for (const auto& w : directions<Dim>(n_starts, opt.start_shift))
    starts.push_back(project_to_core(core, w));

  std::vector<double> start_grad(starts.size());
  parallel_for(starts.size(), opt.jobs, [&](std::size_t i) {
    start_grad[i] = tangential_gradient(core, outer, starts[i]).norm();
  });
  if (*std::max_element(start_grad.begin(), start_grad.end()) <= 1e-8) {
    out.globally_critical = true;
    return out;
  }

  const double coarse = 1e-4;
  auto flow = [&](CorePoint<Dim> c, double sign) -> std::optional<CorePoint<Dim>> {
    const double cap = 0.1 * core.scale();
    for (std::size_t it = 0; it < opt.flow_budget; ++it) {
      auto g = tangential_gradient(core, outer, c);
      if (g.norm() <= coarse) return c;
      Vec<Dim> step = sign * 2.0 * thickness(core, outer, c).thickness * g.ambient();
      if (step.norm() > cap) step *= cap / step.norm();
      c = project_to_core(core, Vec<Dim>(c.position + step));
    }
    return c;
  };

  std::vector<std::vector<CorePoint<Dim>>> found(starts.size());
  std::size_t saddle_attempts = 0, saddle_failures = 0;
  std::mutex count_mutex;
  parallel_for(starts.size(), opt.jobs, [&](std::size_t i) {
    std::vector<CorePoint<Dim>> seeds;
    IterateOptions io;
    io.max_iters = opt.map_budget;
    io.lyapunov = LyapunovPolicy::record;
    io.keep_history = false;
    io.grad_tolerance = coarse;
    auto traj = iterate(core, outer, starts[i], io);
    if (traj.termination != Termination::error)
      seeds.push_back(CorePoint<Dim>{traj.last().position});
    for (double sign : {-1.0, 1.0}) {
      try {
        if (auto c = flow(starts[i], sign)) seeds.push_back(*c);
      } catch (const Error&) {
      }
    }
    for (const auto& s : seeds)
      if (auto r = refine_critical_point(core, outer, s, critical_tolerance)) found[i].push_back(*r);
    auto direct = refine_critical_point(core, outer, starts[i], critical_tolerance);
    {
      std::lock_guard lock(count_mutex);
      ++saddle_attempts;
      if (!direct) ++saddle_failures;
    }
    if (direct) found[i].push_back(*direct);
  });
  if (saddle_attempts > 0 && saddle_failures == saddle_attempts)
    out.warnings.push_back("Newton did not converge from any raw start; saddle list may be empty");

  const double merge = opt.tolerances.merge_radius * core.scale();
  std::vector<CorePoint<Dim>> unique;
  for (const auto& list : found)
    for (const auto& c : list) {
      bool dup = std::any_of(unique.begin(), unique.end(), [&](const CorePoint<Dim>& u) {
        return (u.position - c.position).norm() <= merge;
      });
      if (!dup) unique.push_back(c);
    }

  out.records.resize(unique.size());
  AnalysisTolerances tols = opt.tolerances;
  tols.critical = critical_tolerance;
  parallel_for(unique.size(), opt.jobs,
               [&](std::size_t i) { out.records[i] = classify(core, outer, unique[i], tols); });
  sort_records(out.records);
  return out;
}

template <int Dim>
struct BasinMap {
  static constexpr int kUnresolved = -1;
  static constexpr int kFailed = -2;

  std::vector<CorePoint<Dim>> seeds;
  /// Index into the critical point list, or kUnresolved / kFailed.
  std::vector<int> labels;
  std::size_t iteration_budget = 0;
  /// Seed count per critical point index.
  std::vector<std::size_t> counts;
  std::size_t unresolved = 0;
  std::size_t failed = 0;
  /// Seeds whose trajectory converged to a point not in the list.
  std::size_t unmatched = 0;
  std::size_t lyapunov_violations = 0;
  bool globally_critical = false;

  double resolved_fraction() const {
    return seeds.empty() ? 0.0
                         : 1.0 - static_cast<double>(unresolved + failed) /
                                     static_cast<double>(seeds.size());
  }
};

/// Seed grid: `resolution` cell-centred angles in 2D, resolution x 2*resolution
/// latitude/longitude cells in 3D.
template <int Dim>
std::vector<CorePoint<Dim>> basin_seed_grid(const ConvexCore<Dim>& core, std::size_t resolution) {
  std::vector<CorePoint<Dim>> out;
  if constexpr (Dim == 2) {
    for (const auto& w : circle_directions(resolution, 0.5)) out.push_back(project_to_core(core, w));
  } else {
    for (const auto& w : lat_lon_directions(resolution, 2 * resolution))
      out.push_back(project_to_core(core, w));
  }
  return out;
}

struct BasinOptions {
  std::size_t iteration_budget = 20000;
  double grad_tolerance = 1e-8;
  unsigned jobs = 1;
  AnalysisTolerances tolerances{};
};

/// Iterates every seed and labels it by the critical point its trajectory
/// converges to. Energy increases are counted, not fatal, so that each seed
/// runs to its limit.
template <int Dim>
BasinMap<Dim> compute_basins(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                             std::vector<CorePoint<Dim>> seeds,
                             const std::vector<CriticalPointRecord<Dim>>& critical_points,
                             const BasinOptions& opt = {}) {
  BasinMap<Dim> map;
  map.seeds = std::move(seeds);
  map.iteration_budget = opt.iteration_budget;
  map.labels.assign(map.seeds.size(), BasinMap<Dim>::kUnresolved);
  map.counts.assign(critical_points.size(), 0);
  if (critical_points.empty()) {
    bool all_critical = true;
    for (const auto& s : map.seeds)
      if (tangential_gradient(core, outer, s).norm() > opt.grad_tolerance) {
        all_critical = false;
        break;
      }
    if (!all_critical)
      throw std::invalid_argument("compute_basins: critical point list is empty");
    map.globally_critical = true;
    return map;
  }

  const double match = opt.tolerances.basin_match_radius * core.scale();
  std::vector<std::size_t> violations(map.seeds.size(), 0);
  std::vector<char> unmatched(map.seeds.size(), 0);
  parallel_for(map.seeds.size(), opt.jobs, [&](std::size_t i) {
    IterateOptions io;
    io.max_iters = opt.iteration_budget;
    io.grad_tolerance = opt.grad_tolerance;
    io.lyapunov = LyapunovPolicy::record;
    io.keep_history = false;
    auto traj = iterate(core, outer, map.seeds[i], io);
    violations[i] = traj.lyapunov_violations;
    if (traj.termination == Termination::error) {
      map.labels[i] = BasinMap<Dim>::kFailed;
      return;
    }
    if (traj.termination != Termination::converged) return;
    const Vec<Dim>& limit = traj.last().position;
    int best = BasinMap<Dim>::kUnresolved;
    double best_dist = match;
    for (std::size_t j = 0; j < critical_points.size(); ++j) {
      double dist = (critical_points[j].location.position - limit).norm();
      if (dist <= best_dist) {
        best_dist = dist;
        best = static_cast<int>(j);
      }
    }
    map.labels[i] = best;
    if (best == BasinMap<Dim>::kUnresolved) unmatched[i] = 1;
  });

  for (std::size_t i = 0; i < map.seeds.size(); ++i) {
    map.lyapunov_violations += violations[i];
    map.unmatched += unmatched[i];
    int l = map.labels[i];
    if (l == BasinMap<Dim>::kFailed)
      ++map.failed;
    else if (l == BasinMap<Dim>::kUnresolved)
      ++map.unresolved;
    else
      ++map.counts[static_cast<std::size_t>(l)];
  }
  return map;
}

template <int Dim>
struct ExpansionSample {
  Vec<Dim> position;
  double thickness;
  double grad_norm;
  /// |F(c) - c + 2 d(c) grad d(c)|
  double remainder;
  /// d(c) |grad d(c)|^2
  double driver;
};

template <int Dim>
struct ExpansionReport {
  std::vector<ExpansionSample<Dim>> samples;
  /// Max of remainder / driver over samples with driver >= 1e-14; an
  /// empirical envelope constant, zero when no sample qualifies.
  double k_hat = 0.0;
  std::size_t fit_points = 0;
  double max_remainder = 0.0;
};

template <int Dim>
ExpansionReport<Dim> verify_expansion(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                      const std::vector<CorePoint<Dim>>& grid, unsigned jobs = 1) {
  if (grid.empty()) throw std::invalid_argument("verify_expansion: empty grid");
  ExpansionReport<Dim> rep;
  rep.samples.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const auto& c = grid[i];
    auto rt = round_trip(core, outer, c);
    double d = rt.outbound.thickness;
    auto g = tangential_gradient(core, outer, c);
    Vec<Dim> r = rt.inbound.landing.position - c.position + 2.0 * d * g.ambient();
    rep.samples[i] = {c.position, d, g.norm(), r.norm(), d * g.norm() * g.norm()};
  });
  for (const auto& s : rep.samples) {
    rep.max_remainder = std::max(rep.max_remainder, s.remainder);
    if (s.driver >= 1e-14) {
      ++rep.fit_points;
      rep.k_hat = std::max(rep.k_hat, s.remainder / s.driver);
    }
  }
  return rep;
}

template <int Dim>
struct ExpansionFamilyReport {
  std::vector<double> epsilons;
  std::vector<ExpansionReport<Dim>> reports;
  /// max_remainder[i] / max_remainder[i + 1].
  std::vector<double> ratios;
  /// Least-squares slope of log(max remainder) against log(epsilon).
  double loglog_slope = 0.0;
};

/// Runs verify_expansion on a family of outer domains sharing one core.
/// `outer_for` builds the outer domain for a given epsilon; `directions`
/// are projected onto the core to form the common grid.
template <int Dim>
ExpansionFamilyReport<Dim> verify_expansion_family(
    const ConvexCore<Dim>& core, const std::function<OuterDomain<Dim>(double)>& outer_for,
    const std::vector<double>& epsilons, const std::vector<Vec<Dim>>& dirs, unsigned jobs = 1) {
  if (epsilons.size() < 2) throw std::invalid_argument("verify_expansion_family: need two epsilons");
  ExpansionFamilyReport<Dim> fam;
  fam.epsilons = epsilons;
  std::vector<CorePoint<Dim>> grid;
  for (const auto& w : dirs) grid.push_back(project_to_core(core, w));
  for (double eps : epsilons) fam.reports.push_back(verify_expansion(core, outer_for(eps), grid, jobs));
  for (std::size_t i = 0; i + 1 < fam.reports.size(); ++i)
    fam.ratios.push_back(fam.reports[i].max_remainder / fam.reports[i + 1].max_remainder);
  double mx = 0, my = 0;
  const double n = static_cast<double>(epsilons.size());
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    mx += std::log(epsilons[i]) / n;
    my += std::log(fam.reports[i].max_remainder) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    double dx = std::log(epsilons[i]) - mx;
    sxy += dx * (std::log(fam.reports[i].max_remainder) - my);
    sxx += dx * dx;
  }
  fam.loglog_slope = sxy / sxx;
  return fam;
}

}  // namespace retmap
