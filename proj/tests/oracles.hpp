#pragma once

// Closed-form reference maps used by the tests. They rely on polar calculus
// and the quadratic formula only, never on the library's ray marching.

#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

namespace oracle {

constexpr double kPi = std::numbers::pi;

inline double wrap(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

/// Signed angular difference a - b in (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = wrap(a - b);
  return d > kPi ? d - 2.0 * kPi : d;
}

/// Outer curve r(phi) around a centred circle of radius R.
struct PolarCurve {
  std::function<double(double)> r;
  std::function<double(double)> dr;
  std::function<double(double)> ddr;
};

/// r = rho + a cos(phi) + b cos(2 phi).
inline PolarCurve two_harmonic_curve(double rho, double a, double b) {
  return {[=](double p) { return rho + a * std::cos(p) + b * std::cos(2 * p); },
          [=](double p) { return -a * std::sin(p) - 2 * b * std::sin(2 * p); },
          [=](double p) { return -a * std::cos(p) - 4 * b * std::cos(2 * p); }};
}

inline PolarCurve cosine_curve(double rho, double a) { return two_harmonic_curve(rho, a, 0.0); }

/// Thickness of the circle core of radius R: radial normals exit at r(theta).
inline double thickness(const PolarCurve& c, double R, double theta) { return c.r(theta) - R; }

/// Arc-length derivative of d on the core circle.
inline double thickness_slope(const PolarCurve& c, double R, double theta) { return c.dr(theta) / R; }

/// Second arc-length derivative of d on the core circle.
inline double thickness_curvature(const PolarCurve& c, double R, double theta) {
  return c.ddr(theta) / (R * R);
}

/// Angle of F(theta): leave along the radius, come back along the inward
/// normal of the polar curve, land on the first intersection with the circle.
inline double return_angle(const PolarCurve& c, double R, double theta) {
  const double r = c.r(theta), dr = c.dr(theta);
  const double ct = std::cos(theta), st = std::sin(theta);
  // Outward normal of r(phi) is proportional to r u_r - r' u_phi.
  double nx = -(r * ct + dr * st), ny = -(r * st - dr * ct);
  const double len = std::hypot(nx, ny);
  nx /= len;
  ny /= len;
  const double x = r * ct, y = r * st;
  const double b = x * nx + y * ny;
  const double disc = b * b - (r * r - R * R);
  const double t = -b - std::sqrt(disc);
  return wrap(std::atan2(y + t * ny, x + t * nx));
}

/// Derivative of the oracle return map by a centred difference in angle.
inline double return_slope(const PolarCurve& c, double R, double theta, double h = 1e-5) {
  return angle_diff(return_angle(c, R, theta + h), return_angle(c, R, theta - h)) / (2 * h);
}

using V3 = Eigen::Vector3d;

/// Outer surface r(w) around a centred sphere of radius R, with the
/// tangential gradient of r on the unit sphere.
struct RadialSurface {
  std::function<double(const V3&)> r;
  std::function<V3(const V3&)> grad_r;
};

/// r = rho (1 + eps z).
inline RadialSurface height_surface(double rho, double eps) {
  return {[=](const V3& w) { return rho * (1.0 + eps * w.z()); },
          [=](const V3& w) { return V3(rho * eps * (V3::UnitZ() - w.z() * w)); }};
}

/// F for a sphere core: exit radially at r(w) w, return along the inward
/// normal w - grad_r / r (normalised, negated outward), first sphere hit.
inline V3 return_point(const RadialSurface& s, double R, const V3& c) {
  const V3 w = c.normalized();
  const double r = s.r(w);
  V3 n = -(w - s.grad_r(w) / r);
  n.normalize();
  const V3 x = r * w;
  const double b = x.dot(n);
  const double t = -b - std::sqrt(b * b - (r * r - R * R));
  return x + t * n;
}

}  // namespace oracle
