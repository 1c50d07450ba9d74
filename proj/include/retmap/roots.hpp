#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace retmap {

/// Refines a root of f inside [lo, hi] given f(lo) < 0 <= f(hi): a few
/// bisections, then Newton steps that fall back to bisection whenever they
/// leave the bracket.
template <class F, class DF>
double refine_root(F&& f, DF&& df, double lo, double hi) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < 8; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double ft = f(t);
    if (ft == 0.0) return t;
    (ft < 0.0 ? lo : hi) = t;
    double slope = df(t);
    double next = t - ft / slope;
    if (!(slope > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    double scale = std::max(1.0, std::abs(next));
    if (std::abs(next - t) <= 4.0 * eps * scale || hi - lo <= 4.0 * eps * scale) return next;
    t = next;
  }
  return t;
}

/// First t in (0, horizon] at which f turns non-negative, bracketed by
/// marching with a fixed step and refined with refine_root. Requires
/// f(0) < 0. Returns nullopt when no crossing occurs before the horizon.
template <class F, class DF>
std::optional<double> first_crossing(F&& f, DF&& df, double step, double horizon) {
  double t_prev = 0.0;
  for (long k = 1;; ++k) {
    double t = std::min(static_cast<double>(k) * step, horizon);
    if (f(t) >= 0.0) return refine_root(f, df, t_prev, t);
    if (t >= horizon) return std::nullopt;
    t_prev = t;
  }
}

}  // namespace retmap
