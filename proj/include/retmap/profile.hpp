#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "retmap/types.hpp"

namespace retmap {

// Profile terms f(w) over unit directions w. Each term is defined on all of
// R^Dim (or R^Dim minus the origin) so that ambient gradients and Hessians
// exist; only their values on the unit sphere matter.

struct ConstantTerm {
  double value = 0.0;
};

/// f(w) = w[axis]. In 2D with axis 0 this is cos(theta); in 3D with axis 2
/// it is the height function cos(polar angle).
struct AxisCosineTerm {
  int axis = 0;
};

/// f(w) = exp(-kappa |w - center|^2).
template <int Dim>
struct GaussianBumpTerm {
  Vec<Dim> center;
  double kappa = 1.0;
};

/// f(w) = w^T Q w.
template <int Dim>
struct QuadraticTerm {
  Mat<Dim> form;
};

/// f(w) = cos(order * theta - phase) with theta the polar angle of w (2D only).
struct AngularHarmonicTerm {
  int order = 1;
  double phase = 0.0;
};

template <int Dim>
  requires SupportedDim<Dim>
class Profile {
 public:
  using Term = std::variant<ConstantTerm, AxisCosineTerm, GaussianBumpTerm<Dim>, QuadraticTerm<Dim>,
                            AngularHarmonicTerm>;

  struct Weighted {
    double weight;
    Term term;
  };

  Profile() = default;

  static Profile constant(double c) { return Profile(ConstantTerm{c}); }
  static Profile axis_cosine(int axis) {
    if (axis < 0 || axis >= Dim) throw GeometryError("axis_cosine: axis out of range");
    return Profile(AxisCosineTerm{axis});
  }
  static Profile gaussian_bump(const Vec<Dim>& center, double kappa) {
    if (!(kappa > 0.0)) throw GeometryError("gaussian_bump: kappa must be positive");
    if (center.norm() < 1e-12) throw GeometryError("gaussian_bump: center must be nonzero");
    return Profile(GaussianBumpTerm<Dim>{center.normalized(), kappa});
  }
  static Profile quadratic(const Mat<Dim>& form) {
    return Profile(QuadraticTerm<Dim>{0.5 * (form + form.transpose())});
  }
  static Profile harmonic(int order, double phase = 0.0) {
    if constexpr (Dim != 2) {
      throw GeometryError("angular harmonics are only defined in 2D");
    } else {
      if (order < 0) throw GeometryError("harmonic: order must be nonnegative");
      return Profile(AngularHarmonicTerm{order, phase});
    }
  }

  const std::vector<Weighted>& terms() const noexcept { return terms_; }

  double value(const Vec<Dim>& w) const {
    double s = 0.0;
    for (const auto& [weight, term] : terms_) s += weight * std::visit(ValueOf{w}, term);
    return s;
  }

  /// Ambient gradient of the extension at w.
  Vec<Dim> gradient(const Vec<Dim>& w) const {
    Vec<Dim> g = Vec<Dim>::Zero();
    for (const auto& [weight, term] : terms_) g += weight * std::visit(GradientOf{w}, term);
    return g;
  }

  /// Ambient Hessian of the extension at w.
  Mat<Dim> hessian(const Vec<Dim>& w) const {
    Mat<Dim> h = Mat<Dim>::Zero();
    for (const auto& [weight, term] : terms_) h += weight * std::visit(HessianOf{w}, term);
    return h;
  }

  /// Upper bound on |f| over the unit sphere.
  double bound() const {
    double b = 0.0;
    for (const auto& [weight, term] : terms_) b += std::abs(weight) * std::visit(BoundOf{}, term);
    return b;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [weight, term] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << weight << "*";
      std::visit(Describe{os}, term);
    }
    if (first) os << "0";
    return os.str();
  }

  friend Profile operator+(Profile a, const Profile& b) {
    a.terms_.insert(a.terms_.end(), b.terms_.begin(), b.terms_.end());
    return a;
  }
  friend Profile operator*(double s, Profile p) {
    for (auto& t : p.terms_) t.weight *= s;
    return p;
  }

 private:
  explicit Profile(Term t) { terms_.push_back({1.0, std::move(t)}); }

  struct ValueOf {
    const Vec<Dim>& w;
    double operator()(const ConstantTerm& t) const { return t.value; }
    double operator()(const AxisCosineTerm& t) const { return w[t.axis]; }
    double operator()(const GaussianBumpTerm<Dim>& t) const {
      return std::exp(-t.kappa * (w - t.center).squaredNorm());
    }
    double operator()(const QuadraticTerm<Dim>& t) const { return w.dot(t.form * w); }
    double operator()(const AngularHarmonicTerm& t) const {
      return std::cos(t.order * std::atan2(w[1], w[0]) - t.phase);
    }
  };

  struct GradientOf {
    const Vec<Dim>& w;
    Vec<Dim> operator()(const ConstantTerm&) const { return Vec<Dim>::Zero(); }
    Vec<Dim> operator()(const AxisCosineTerm& t) const { return Vec<Dim>::Unit(t.axis); }
    Vec<Dim> operator()(const GaussianBumpTerm<Dim>& t) const {
      Vec<Dim> r = w - t.center;
      return -2.0 * t.kappa * std::exp(-t.kappa * r.squaredNorm()) * r;
    }
    Vec<Dim> operator()(const QuadraticTerm<Dim>& t) const { return 2.0 * t.form * w; }
    Vec<Dim> operator()(const AngularHarmonicTerm& t) const {
      Vec<Dim> g = Vec<Dim>::Zero();
      double r2 = w[0] * w[0] + w[1] * w[1];
      double s = std::sin(t.order * std::atan2(w[1], w[0]) - t.phase);
      g[0] = t.order * s * w[1] / r2;
      g[1] = -t.order * s * w[0] / r2;
      return g;
    }
  };

  struct HessianOf {
    const Vec<Dim>& w;
    Mat<Dim> operator()(const ConstantTerm&) const { return Mat<Dim>::Zero(); }
    Mat<Dim> operator()(const AxisCosineTerm&) const { return Mat<Dim>::Zero(); }
    Mat<Dim> operator()(const GaussianBumpTerm<Dim>& t) const {
      Vec<Dim> r = w - t.center;
      double e = std::exp(-t.kappa * r.squaredNorm());
      return e * (4.0 * t.kappa * t.kappa * r * r.transpose() -
                  2.0 * t.kappa * Mat<Dim>::Identity());
    }
    Mat<Dim> operator()(const QuadraticTerm<Dim>& t) const { return 2.0 * t.form; }
    Mat<Dim> operator()(const AngularHarmonicTerm& t) const {
      // f = cos(k*theta - phase), dtheta/dw = (-y, x) / r^2.
      Mat<Dim> h = Mat<Dim>::Zero();
      double x = w[0], y = w[1];
      double r2 = x * x + y * y, r4 = r2 * r2;
      double arg = t.order * std::atan2(y, x) - t.phase;
      double k = t.order;
      double tx = -y / r2, ty = x / r2;
      // second derivatives of theta
      double txx = 2.0 * x * y / r4, txy = (y * y - x * x) / r4, tyy = -2.0 * x * y / r4;
      double c = std::cos(arg), s = std::sin(arg);
      h(0, 0) = -k * k * c * tx * tx - k * s * txx;
      h(0, 1) = -k * k * c * tx * ty - k * s * txy;
      h(1, 0) = h(0, 1);
      h(1, 1) = -k * k * c * ty * ty - k * s * tyy;
      return h;
    }
  };

  struct BoundOf {
    double operator()(const ConstantTerm& t) const { return std::abs(t.value); }
    double operator()(const AxisCosineTerm&) const { return 1.0; }
    double operator()(const GaussianBumpTerm<Dim>&) const { return 1.0; }
    double operator()(const QuadraticTerm<Dim>& t) const { return t.form.norm(); }
    double operator()(const AngularHarmonicTerm&) const { return 1.0; }
  };

  struct Describe {
    std::ostream& os;
    void operator()(const ConstantTerm& t) const { os << "const(" << t.value << ")"; }
    void operator()(const AxisCosineTerm& t) const { os << "axis_cos(" << t.axis << ")"; }
    void operator()(const GaussianBumpTerm<Dim>& t) const {
      os << "bump(center=[" << t.center.transpose() << "], kappa=" << t.kappa << ")";
    }
    void operator()(const QuadraticTerm<Dim>&) const { os << "quadratic"; }
    void operator()(const AngularHarmonicTerm& t) const {
      os << "harmonic(k=" << t.order << ", phase=" << t.phase << ")";
    }
  };

  std::vector<Weighted> terms_;
};

}  // namespace retmap
