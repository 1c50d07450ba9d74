#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "retmap/calculus.hpp"
#include "retmap/parallel.hpp"

namespace retmap {

/// What iterate() does when the energy d^2/2 rises by more than the slack.
enum class LyapunovPolicy {
  enforce,  // stop with an error, keeping the offending pair of iterates
  record,   // count the violation and keep iterating
};

enum class Termination { converged, max_iters, error };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::error: return "error";
  }
  return "?";
}

struct IterateOptions {
  std::size_t max_iters = 100000;
  double grad_tolerance = 1e-8;
  double lyapunov_slack = 1e-10;
  LyapunovPolicy lyapunov = LyapunovPolicy::enforce;
  /// When false only the first and the latest step records are kept.
  bool keep_history = true;
  /// Finite-difference step for the gradient; 0 selects the default.
  double gradient_step = 0.0;
};

template <int Dim>
struct StepRecord {
  std::size_t k;
  Vec<Dim> position;
  double thickness;
  double energy;
  double grad_norm;
  /// |c_{k+1} - c_k|; zero on the final record.
  double displacement;
};

template <int Dim>
struct Trajectory {
  std::vector<StepRecord<Dim>> steps;
  Termination termination = Termination::max_iters;
  std::string message;
  /// Number of return-map applications performed.
  std::size_t iterations = 0;
  std::size_t lyapunov_violations = 0;
  /// Largest single-step change V(c_{k+1}) - V(c_k) observed.
  double max_energy_increase = -std::numeric_limits<double>::infinity();
  std::optional<std::pair<std::size_t, std::size_t>> first_violation;
  /// Sum of squared gradient norms over every visited iterate.
  double gradient_square_sum = 0.0;

  const StepRecord<Dim>& initial() const { return steps.front(); }
  const StepRecord<Dim>& last() const { return steps.back(); }
  bool converged() const { return termination == Termination::converged; }
};

template <int Dim>
Trajectory<Dim> iterate(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                        const CorePoint<Dim>& c0, const IterateOptions& opt = {}) {
  Trajectory<Dim> traj;
  const double h = opt.gradient_step > 0.0 ? opt.gradient_step : StepSizes::gradient(core);
  auto push = [&](StepRecord<Dim> r) {
    if (opt.keep_history || traj.steps.size() < 2)
      traj.steps.push_back(std::move(r));
    else
      traj.steps.back() = std::move(r);
  };
  auto grad_norm = [&](const CorePoint<Dim>& c) {
    return tangential_gradient(core, outer, tangent_frame(core, c), h).norm();
  };

  std::size_t k = 0;
  try {
    CorePoint<Dim> c = c0;
    auto sample = thickness(core, outer, c);
    for (;; ++k) {
      const double g = grad_norm(c);
      const double d = sample.thickness;
      const double v = 0.5 * d * d;
      traj.gradient_square_sum += g * g;
      if (g <= opt.grad_tolerance) {
        push({k, c.position, d, v, g, 0.0});
        traj.termination = Termination::converged;
        break;
      }
      if (k >= opt.max_iters) {
        push({k, c.position, d, v, g, 0.0});
        traj.termination = Termination::max_iters;
        break;
      }
      CorePoint<Dim> next = reciprocal_map(core, outer, sample.exit_point).landing;
      auto next_sample = thickness(core, outer, next);
      push({k, c.position, d, v, g, (next.position - c.position).norm()});
      ++traj.iterations;

      const double d_next = next_sample.thickness;
      const double rise = 0.5 * d_next * d_next - v;
      traj.max_energy_increase = std::max(traj.max_energy_increase, rise);
      if (rise > opt.lyapunov_slack) {
        ++traj.lyapunov_violations;
        if (!traj.first_violation) traj.first_violation = std::pair{k, k + 1};
        if (opt.lyapunov == LyapunovPolicy::enforce) {
          push({k + 1, next.position, d_next, 0.5 * d_next * d_next, grad_norm(next), 0.0});
          traj.termination = Termination::error;
          traj.message = "energy increased by " + std::to_string(rise) + " between steps " +
                         std::to_string(k) + " and " + std::to_string(k + 1);
          break;
        }
      }
      c = next;
      sample = next_sample;
    }
  } catch (const Error& e) {
    traj.termination = Termination::error;
    traj.message = "step " + std::to_string(k) + ": " + e.what();
  }
  return traj;
}

template <int Dim>
struct CycleReport {
  std::size_t period;
  std::size_t first_index;
  std::vector<Vec<Dim>> points;
};

/// Looks for j < k with |c_j - c_k| <= spatial_tol where some iterate strictly
/// between them lies at least 10 * spatial_tol from c_j, and returns the
/// smallest such period k - j. For each iterate only the most recent earlier
/// visits to the neighbouring cells of a spatial hash are examined.
template <int Dim>
std::optional<CycleReport<Dim>> detect_cycles(const Trajectory<Dim>& traj, double spatial_tol) {
  if (!(spatial_tol > 0.0)) throw std::invalid_argument("detect_cycles: tolerance must be positive");
  const auto& s = traj.steps;
  if (s.size() < 2) return std::nullopt;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i].k != s[i - 1].k + 1)
      throw std::invalid_argument("detect_cycles: trajectory was recorded without history");

  using Key = std::array<long long, Dim>;
  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept {
      std::size_t h = 1469598103934665603ull;
      for (long long v : key) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
      return h;
    }
  };
  constexpr std::size_t kRecent = 8;
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> cells;
  auto key_of = [&](const Vec<Dim>& x) {
    Key key{};
    for (int i = 0; i < Dim; ++i) key[i] = static_cast<long long>(std::floor(x[i] / spatial_tol));
    return key;
  };
  auto left_neighbourhood = [&](std::size_t j, std::size_t k) {
    for (std::size_t i = j + 1; i < k; ++i)
      if ((s[i].position - s[j].position).norm() >= 10.0 * spatial_tol) return true;
    return false;
  };

  std::optional<CycleReport<Dim>> best;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Key base = key_of(s[k].position);
    int n_offsets = 1;
    for (int i = 0; i < Dim; ++i) n_offsets *= 3;
    for (int o = 0; o < n_offsets; ++o) {
      Key key = base;
      for (int i = 0, code = o; i < Dim; ++i, code /= 3) key[i] += code % 3 - 1;
      auto it = cells.find(key);
      if (it == cells.end()) continue;
      for (auto j = it->second.rbegin(); j != it->second.rend(); ++j) {
        if ((s[*j].position - s[k].position).norm() > spatial_tol) continue;
        if (!left_neighbourhood(*j, k)) continue;
        std::size_t period = k - *j;
        if (!best || period < best->period) {
          best = CycleReport<Dim>{period, *j, {}};
          for (std::size_t i = *j; i < k; ++i) best->points.push_back(s[i].position);
        }
        break;
      }
    }
    auto& bucket = cells[base];
    bucket.push_back(k);
    if (bucket.size() > kRecent) bucket.erase(bucket.begin());
  }
  return best;
}

/// Empirical constants of the energy estimate
///   V(F(c)) - V(c) <= -a |grad d|^2 + b |grad d|^4.
struct DescentConstants {
  double eta_hat;
  double a_hat;
  double b_hat;
  double epsilon0;
  std::size_t sample_count;
  /// Smallest thickness seen on the grid.
  double min_thickness;
  /// b_hat * epsilon0^2 >= a_hat: the quartic term is not dominated.
  bool quartic_dominates;
};

template <int Dim>
DescentConstants estimate_descent_constants(const ConvexCore<Dim>& core,
                                            const OuterDomain<Dim>& outer,
                                            const std::vector<CorePoint<Dim>>& grid,
                                            unsigned jobs = 1) {
  if (grid.empty()) throw std::invalid_argument("estimate_descent_constants: empty grid");
  struct Sample {
    double g, drop, d;
  };
  std::vector<Sample> samples(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    const auto& c = grid[i];
    auto rt = round_trip(core, outer, c);
    double d = rt.outbound.thickness;
    double d_next = thickness(core, outer, rt.inbound.landing).thickness;
    double g = tangential_gradient(core, outer, c).norm();
    samples[i] = {g, 0.5 * d * d - 0.5 * d_next * d_next, d};
  });

  constexpr double kFloor = 1e-8;
  DescentConstants out{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0, 0,
                       std::numeric_limits<double>::infinity(), false};
  std::vector<const Sample*> used;
  for (const auto& s : samples) {
    out.epsilon0 = std::max(out.epsilon0, s.g);
    out.min_thickness = std::min(out.min_thickness, s.d);
    if (s.g > kFloor) used.push_back(&s);
  }
  if (used.empty()) throw AnalysisError("scenario globally critical; constants undefined");
  out.sample_count = used.size();

  for (const auto* s : used) out.eta_hat = std::min(out.eta_hat, s->drop / (s->g * s->g));

  // Least squares of drop ~ a g^2 - b g^4 with columns scaled to unit norm.
  Eigen::MatrixXd x(used.size(), 2);
  Eigen::VectorXd y(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    double g2 = used[i]->g * used[i]->g;
    x(i, 0) = g2;
    x(i, 1) = -g2 * g2;
    y[i] = used[i]->drop;
  }
  Eigen::Vector2d scale(x.col(0).norm(), x.col(1).norm());
  Eigen::Vector2d coef =
      (x * scale.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(y).cwiseQuotient(scale);
  if (coef[0] < 0.0) {
    coef[0] = 0.0;
    coef[1] = y.dot(x.col(1)) / x.col(1).squaredNorm();
  }
  out.a_hat = coef[0];
  out.b_hat = coef[1];
  out.quartic_dominates = out.b_hat * out.epsilon0 * out.epsilon0 >= out.a_hat;
  return out;
}

}  // namespace retmap
