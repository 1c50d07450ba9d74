#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>

#include "retmap/profile.hpp"
#include "retmap/types.hpp"

namespace retmap {

enum class CoreShape { circle, sphere, ellipse, ellipsoid };

inline const char* to_string(CoreShape s) {
  switch (s) {
    case CoreShape::circle: return "circle";
    case CoreShape::sphere: return "sphere";
    case CoreShape::ellipse: return "ellipse";
    case CoreShape::ellipsoid: return "ellipsoid";
  }
  return "?";
}

/// Axis-aligned ellipsoidal convex core centred at the origin, described by
/// g(x) = sum_i (x_i / a_i)^2 - 1.
template <int Dim>
  requires SupportedDim<Dim>
class ConvexCore {
 public:
  static ConvexCore ball(double radius) {
    return ConvexCore(Vec<Dim>::Constant(radius), Dim == 2 ? CoreShape::circle : CoreShape::sphere);
  }

  static ConvexCore ellipsoidal(const Vec<Dim>& semi_axes) {
    return ConvexCore(semi_axes, Dim == 2 ? CoreShape::ellipse : CoreShape::ellipsoid);
  }

  CoreShape shape() const noexcept { return shape_; }
  const Vec<Dim>& semi_axes() const noexcept { return axes_; }
  Vec<Dim> centroid() const { return Vec<Dim>::Zero(); }
  /// Largest semi-axis; the length scale of every default step size.
  double scale() const { return axes_.maxCoeff(); }

  double implicit(const Vec<Dim>& x) const { return x.cwiseQuotient(axes_).squaredNorm() - 1.0; }
  Vec<Dim> implicit_gradient(const Vec<Dim>& x) const {
    return 2.0 * x.cwiseQuotient(axes_.cwiseProduct(axes_));
  }
  bool on_surface(const Vec<Dim>& x) const { return std::abs(implicit(x)) <= tol::kSurface; }

 private:
  ConvexCore(const Vec<Dim>& axes, CoreShape shape) : axes_(axes), shape_(shape) {
    if (!(axes_.minCoeff() > 0.0) || !axes_.allFinite())
      throw GeometryError("core semi-axes must be positive and finite");
  }

  Vec<Dim> axes_;
  CoreShape shape_;
};

/// A point on the core boundary.
template <int Dim>
struct CorePoint {
  Vec<Dim> position;
};

/// A point on the outer boundary.
template <int Dim>
struct OuterPoint {
  Vec<Dim> position;
};

template <int Dim>
struct TangentFrame {
  CorePoint<Dim> base;
  Vec<Dim> normal;
  /// Columns are orthonormal tangent vectors.
  Eigen::Matrix<double, Dim, Dim - 1> tangents;

  Vec<Dim> embed(const TVec<Dim>& coeffs) const { return tangents * coeffs; }
  TVec<Dim> coordinates(const Vec<Dim>& v) const { return tangents.transpose() * v; }
};

template <int Dim>
Vec<Dim> outward_normal(const ConvexCore<Dim>& core, const CorePoint<Dim>& c) {
  if (!core.on_surface(c.position)) throw GeometryError("point is not on the core boundary");
  Vec<Dim> g = core.implicit_gradient(c.position);
  double n = g.norm();
  if (n < tol::kDegenerateGradient) throw GeometryError("singular surface point");
  return g / n;
}

/// Orthonormal frame of the tangent space at c. In 2D the tangent is the
/// normal rotated by +90 degrees. In 3D Gram-Schmidt is seeded with the
/// coordinate axis least aligned with the normal (ties go to x, then y, then
/// z) and completed by normal x first tangent.
template <int Dim>
TangentFrame<Dim> tangent_frame(const ConvexCore<Dim>& core, const CorePoint<Dim>& c) {
  TangentFrame<Dim> f{c, outward_normal(core, c), {}};
  if constexpr (Dim == 2) {
    f.tangents.col(0) = Vec<2>(-f.normal.y(), f.normal.x());
  } else {
    int axis = 0;
    double best = std::abs(f.normal[0]);
    for (int i = 1; i < 3; ++i) {
      if (std::abs(f.normal[i]) < best) {
        best = std::abs(f.normal[i]);
        axis = i;
      }
    }
    Vec<3> seed = Vec<3>::Unit(axis);
    Vec<3> t1 = (seed - seed.dot(f.normal) * f.normal).normalized();
    f.tangents.col(0) = t1;
    f.tangents.col(1) = f.normal.cross(t1);
  }
  return f;
}

/// Same base and normal, tangents rotated by `angle` inside the tangent plane.
inline TangentFrame<3> rotated(const TangentFrame<3>& f, double angle) {
  TangentFrame<3> r = f;
  double c = std::cos(angle), s = std::sin(angle);
  r.tangents.col(0) = c * f.tangents.col(0) + s * f.tangents.col(1);
  r.tangents.col(1) = -s * f.tangents.col(0) + c * f.tangents.col(1);
  return r;
}

/// Where the ray from the core centroid through p crosses the core boundary.
template <int Dim>
CorePoint<Dim> project_to_core(const ConvexCore<Dim>& core, const Vec<Dim>& p) {
  double q = p.cwiseQuotient(core.semi_axes()).norm();
  if (!(q > 1e-300) || !std::isfinite(q)) throw GeometryError("undefined projection direction");
  return {p / q};
}

// ---------------------------------------------------------------------------
// Outer domain

enum class OuterRepresentation { radial_graph, implicit };

/// r(w) = base_radius * (1 + amplitude * profile(w)).
template <int Dim>
struct RadialGraph {
  double base_radius;
  double amplitude;
  Profile<Dim> profile;

  double radius(const Vec<Dim>& w) const {
    return base_radius * (1.0 + amplitude * profile.value(w));
  }
};

/// Omega = {value < 0}. bounding_radius must enclose the closure of Omega.
template <int Dim>
struct ImplicitBody {
  std::function<double(const Vec<Dim>&)> value;
  std::function<Vec<Dim>(const Vec<Dim>&)> gradient;
  double bounding_radius;
  std::string label = "implicit";
};

template <int Dim>
  requires SupportedDim<Dim>
class OuterDomain {
 public:
  static OuterDomain radial_graph(double base_radius, double amplitude, Profile<Dim> profile) {
    if (!(base_radius > 0.0)) throw GeometryError("radial graph base radius must be positive");
    if (!(std::abs(amplitude) * profile.bound() < 1.0))
      throw GeometryError("radial graph requires |amplitude * profile| < 1");
    return OuterDomain(RadialGraph<Dim>{base_radius, amplitude, std::move(profile)});
  }

  static OuterDomain ball(double radius) {
    return radial_graph(radius, 0.0, Profile<Dim>::constant(0.0));
  }

  static OuterDomain implicit(ImplicitBody<Dim> body) {
    if (!body.value || !body.gradient) throw GeometryError("implicit body needs value and gradient");
    if (!(body.bounding_radius > 0.0)) throw GeometryError("bounding radius must be positive");
    return OuterDomain(std::move(body));
  }

  OuterRepresentation representation() const noexcept {
    return std::holds_alternative<RadialGraph<Dim>>(rep_) ? OuterRepresentation::radial_graph
                                                          : OuterRepresentation::implicit;
  }

  const RadialGraph<Dim>* radial() const noexcept { return std::get_if<RadialGraph<Dim>>(&rep_); }
  const ImplicitBody<Dim>* implicit_body() const noexcept {
    return std::get_if<ImplicitBody<Dim>>(&rep_);
  }

  /// Implicit function; radial graphs use g(x) = |x| - r(x/|x|).
  double implicit(const Vec<Dim>& x) const {
    if (const auto* rg = radial()) {
      double n = x.norm();
      if (n == 0.0) return -rg->base_radius * (1.0 - std::abs(rg->amplitude) * rg->profile.bound());
      return n - rg->radius(x / n);
    }
    return std::get<ImplicitBody<Dim>>(rep_).value(x);
  }

  Vec<Dim> implicit_gradient(const Vec<Dim>& x) const {
    if (const auto* rg = radial()) {
      double n = x.norm();
      if (n == 0.0) throw GeometryError("undefined direction");
      Vec<Dim> w = x / n;
      Vec<Dim> df = rg->profile.gradient(w);
      Vec<Dim> tangential = df - df.dot(w) * w;
      return w - (rg->base_radius * rg->amplitude / n) * tangential;
    }
    return std::get<ImplicitBody<Dim>>(rep_).gradient(x);
  }

  /// Radius of a centred ball containing the closure of Omega.
  double circumradius() const {
    if (const auto* rg = radial())
      return rg->base_radius * (1.0 + std::abs(rg->amplitude) * rg->profile.bound());
    return std::get<ImplicitBody<Dim>>(rep_).bounding_radius;
  }

  bool on_surface(const Vec<Dim>& x) const { return std::abs(implicit(x)) <= tol::kSurface; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (const auto* rg = radial())
      os << "radial_graph(rho=" << rg->base_radius << ", eps=" << rg->amplitude
         << ", f=" << rg->profile.describe() << ")";
    else
      os << std::get<ImplicitBody<Dim>>(rep_).label;
    return os.str();
  }

 private:
  explicit OuterDomain(RadialGraph<Dim> rg) : rep_(std::move(rg)) {}
  explicit OuterDomain(ImplicitBody<Dim> b) : rep_(std::move(b)) {}

  std::variant<RadialGraph<Dim>, ImplicitBody<Dim>> rep_;
};

template <int Dim>
Vec<Dim> inward_normal(const OuterDomain<Dim>& outer, const OuterPoint<Dim>& x) {
  if (x.position.norm() == 0.0) throw GeometryError("undefined direction");
  if (!outer.on_surface(x.position)) throw GeometryError("point is not on the outer boundary");
  Vec<Dim> g = outer.implicit_gradient(x.position);
  double n = g.norm();
  if (n < tol::kDegenerateGradient) throw GeometryError("singular outer boundary point");
  return -g / n;
}

}  // namespace retmap
