#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "retmap/types.hpp"

namespace retmap {

inline Vec<2> unit_circle(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Unit vector from polar angle (measured from +z) and azimuth.
inline Vec<3> unit_sphere(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
          std::cos(polar)};
}

/// Angle in [0, 2*pi).
inline double angle_of(const Vec<2>& v) {
  double a = std::atan2(v.y(), v.x());
  return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
}

inline double polar_of(const Vec<3>& v) {
  return std::acos(std::clamp(v.z() / v.norm(), -1.0, 1.0));
}

inline double azimuth_of(const Vec<3>& v) {
  double a = std::atan2(v.y(), v.x());
  return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
}

/// n equally spaced directions, starting at angle 2*pi*offset/n.
inline std::vector<Vec<2>> circle_directions(std::size_t n, double offset = 0.0) {
  std::vector<Vec<2>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(unit_circle(2.0 * std::numbers::pi * (static_cast<double>(i) + offset) /
                              static_cast<double>(n)));
  return out;
}

/// Fibonacci lattice on S^2. `shift` in [0,1) rotates the lattice in azimuth
/// (used for seeded Cranley-Patterson style offsets).
inline std::vector<Vec<3>> fibonacci_directions(std::size_t n, double shift = 0.0) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec<3>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * static_cast<double>(i) + 2.0 * std::numbers::pi * shift;
    out.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

/// Low-discrepancy direction set for the ambient dimension.
template <int Dim>
  requires SupportedDim<Dim>
std::vector<Vec<Dim>> directions(std::size_t n, double shift = 0.0) {
  if constexpr (Dim == 2)
    return circle_directions(n, shift);
  else
    return fibonacci_directions(n, shift);
}

/// Cell-centred latitude/longitude grid, row-major in polar angle.
inline std::vector<Vec<3>> lat_lon_directions(std::size_t n_polar, std::size_t n_azimuth) {
  std::vector<Vec<3>> out;
  out.reserve(n_polar * n_azimuth);
  for (std::size_t i = 0; i < n_polar; ++i) {
    double polar = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n_polar);
    for (std::size_t j = 0; j < n_azimuth; ++j) {
      double az =
          2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n_azimuth);
      out.push_back(unit_sphere(polar, az));
    }
  }
  return out;
}

}  // namespace retmap
