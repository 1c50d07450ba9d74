#pragma once

#include <cstddef>
#include <vector>

#include "retmap/geometry.hpp"
#include "retmap/roots.hpp"
#include "retmap/sampling.hpp"

namespace retmap {

template <int Dim>
struct ThicknessSample {
  CorePoint<Dim> base;
  double thickness;
  OuterPoint<Dim> exit_point;
};

template <int Dim>
struct ReciprocalResult {
  OuterPoint<Dim> start;
  double return_time;
  CorePoint<Dim> landing;
};

template <int Dim>
struct RoundTrip {
  ThicknessSample<Dim> outbound;
  ReciprocalResult<Dim> inbound;
};

/// Marching step used to bracket first roots along rays.
template <int Dim>
double ray_step(const ConvexCore<Dim>& core) {
  return 1e-2 * core.scale();
}

/// Rays are abandoned beyond this parameter.
template <int Dim>
double ray_horizon(const OuterDomain<Dim>& outer) {
  return 10.0 * outer.circumradius();
}

/// Distance from c to the outer boundary along the outward core normal,
/// computed as the first exit root of the outer implicit function.
template <int Dim>
ThicknessSample<Dim> thickness(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                               const CorePoint<Dim>& c) {
  const Vec<Dim> nu = outward_normal(core, c);
  const Vec<Dim>& p = c.position;
  auto g = [&](double t) { return outer.implicit(p + t * nu); };
  auto dg = [&](double t) { return outer.implicit_gradient(p + t * nu).dot(nu); };
  if (g(0.0) >= 0.0) throw MapError("core point lies outside the outer domain", p);
  auto t = first_crossing(g, dg, ray_step(core), ray_horizon(outer));
  if (!t) throw MapError("outer boundary not reached", p);
  return {c, *t, OuterPoint<Dim>{p + *t * nu}};
}

template <int Dim>
OuterPoint<Dim> radial_map(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                           const CorePoint<Dim>& c) {
  return thickness(core, outer, c).exit_point;
}

/// First return to the core along the inward normal of the outer boundary.
template <int Dim>
ReciprocalResult<Dim> reciprocal_map(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                     const OuterPoint<Dim>& x) {
  const Vec<Dim> n = inward_normal(outer, x);
  const Vec<Dim>& p = x.position;
  auto h = [&](double t) { return -core.implicit(p + t * n); };
  auto dh = [&](double t) { return -core.implicit_gradient(p + t * n).dot(n); };
  if (h(0.0) >= 0.0) throw MapError("boundary point lies inside the core", p);
  // A ray from p cannot reach the core after travelling |p| + core radius.
  const double step = ray_step(core);
  const double reach = std::min(ray_horizon(outer), p.norm() + core.scale() + step);
  auto t = first_crossing(h, dh, step, reach);
  if (!t) throw MapError("geometric normal property violated at x", p);
  // Land exactly on the core boundary; the correction is at rounding level.
  return {x, *t, project_to_core(core, Vec<Dim>(p + *t * n))};
}

template <int Dim>
RoundTrip<Dim> round_trip(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                          const CorePoint<Dim>& c) {
  auto out = thickness(core, outer, c);
  auto back = reciprocal_map(core, outer, out.exit_point);
  return {out, back};
}

/// The return map F = reciprocal o radial.
template <int Dim>
CorePoint<Dim> return_map(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                          const CorePoint<Dim>& c) {
  return round_trip(core, outer, c).inbound.landing;
}

/// Point of the outer boundary hit by the ray from the origin along w.
template <int Dim>
OuterPoint<Dim> outer_boundary_point(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                     const Vec<Dim>& direction) {
  const Vec<Dim> w = direction.normalized();
  if (const auto* rg = outer.radial()) return {rg->radius(w) * w};
  auto g = [&](double t) { return outer.implicit(t * w); };
  auto dg = [&](double t) { return outer.implicit_gradient(t * w).dot(w); };
  if (g(0.0) >= 0.0) throw MapError("origin lies outside the outer domain", Vec<Dim>::Zero().eval());
  auto t = first_crossing(g, dg, ray_step(core), ray_horizon(outer));
  if (!t) throw MapError("outer boundary not reached", w);
  return {*t * w};
}

template <int Dim>
struct AdmissibilityReport {
  std::size_t samples_checked = 0;
  /// Outer boundary points whose inward-normal ray misses the core.
  std::vector<Vec<Dim>> normal_property_failures;
  /// Core points whose outward ray meets Omega in more than one interval.
  std::vector<Vec<Dim>> connectivity_failures;

  bool verdict() const {
    return normal_property_failures.empty() && connectivity_failures.empty();
  }
};

/// Number of maximal parameter intervals along the outward normal ray from c
/// on which the ray lies inside Omega, at the given marching resolution.
template <int Dim>
int outward_ray_intervals(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                          const CorePoint<Dim>& c, double step) {
  const Vec<Dim> nu = outward_normal(core, c);
  const double reach = c.position.norm() + outer.circumradius() + step;
  int intervals = 0;
  bool inside = false;
  for (double t = 0.0; t <= reach; t += step) {
    bool now = outer.implicit(c.position + t * nu) < 0.0;
    if (now && !inside) ++intervals;
    inside = now;
  }
  return intervals;
}

/// Sampled check of the geometric normal property and of outward-ray
/// connectivity. Sample sets are deterministic (uniform angles in 2D,
/// Fibonacci lattice in 3D).
template <int Dim>
AdmissibilityReport<Dim> check_admissibility(const ConvexCore<Dim>& core,
                                             const OuterDomain<Dim>& outer,
                                             std::size_t n_boundary_samples,
                                             std::size_t n_core_samples) {
  if (n_boundary_samples < 1 || n_core_samples < 1)
    throw std::invalid_argument("check_admissibility: sample counts must be at least 1");
  AdmissibilityReport<Dim> report;
  report.samples_checked = n_boundary_samples + n_core_samples;

  for (const auto& w : directions<Dim>(n_boundary_samples)) {
    Vec<Dim> where = w;
    try {
      auto x = outer_boundary_point(core, outer, w);
      where = x.position;
      reciprocal_map(core, outer, x);
    } catch (const Error&) {
      report.normal_property_failures.push_back(where);
    }
  }

  const double step = 2e-3 * core.scale();
  for (const auto& w : directions<Dim>(n_core_samples)) {
    auto c = project_to_core(core, w);
    if (outward_ray_intervals(core, outer, c, step) != 1 || outer.implicit(c.position) >= 0.0)
      report.connectivity_failures.push_back(c.position);
  }
  return report;
}

}  // namespace retmap
