#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "retmap/maps.hpp"

namespace retmap {

template <int Dim>
struct TangentVector {
  TangentFrame<Dim> frame;
  TVec<Dim> coefficients;

  Vec<Dim> ambient() const { return frame.embed(coefficients); }
  double norm() const { return coefficients.norm(); }
};

template <int Dim>
struct TangentMatrix {
  TangentFrame<Dim> frame;
  TMat<Dim> entries;
  /// ||M - M^T|| before symmetrization (Hessians only).
  double raw_asymmetry = 0.0;
};

/// Default finite-difference steps, relative to the core length scale.
struct StepSizes {
  template <int Dim>
  static double gradient(const ConvexCore<Dim>& core) { return 1e-5 * core.scale(); }
  template <int Dim>
  static double hessian(const ConvexCore<Dim>& core) { return 1e-3 * core.scale(); }
  template <int Dim>
  static double jacobian(const ConvexCore<Dim>& core) { return 1e-4 * core.scale(); }
};

namespace detail {

template <int Dim>
CorePoint<Dim> probe(const ConvexCore<Dim>& core, const TangentFrame<Dim>& f, const Vec<Dim>& offset) {
  return project_to_core(core, Vec<Dim>(f.base.position + offset));
}

}  // namespace detail

// Central differences on retracted probes r(c +- h t_i). The divisor uses the
// realized step h' = |r(c + h t_i) - r(c - h t_i)| / 2, which corrects the
// first-order distortion of the centroid-ray retraction.

template <int Dim, class Field>
TangentVector<Dim> fd_gradient(const ConvexCore<Dim>& core, const TangentFrame<Dim>& frame,
                               Field&& field, double h) {
  TangentVector<Dim> g{frame, TVec<Dim>::Zero()};
  for (int i = 0; i < Dim - 1; ++i) {
    Vec<Dim> step = h * frame.tangents.col(i);
    auto plus = detail::probe(core, frame, step);
    auto minus = detail::probe(core, frame, Vec<Dim>(-step));
    double realized = 0.5 * (plus.position - minus.position).norm();
    g.coefficients[i] = (field(plus) - field(minus)) / (2.0 * realized);
  }
  return g;
}

template <int Dim, class Field>
TangentMatrix<Dim> fd_hessian(const ConvexCore<Dim>& core, const TangentFrame<Dim>& frame,
                              Field&& field, double h) {
  TangentMatrix<Dim> m{frame, TMat<Dim>::Zero()};
  const double center = field(frame.base);
  std::array<double, Dim - 1> realized{};
  for (int i = 0; i < Dim - 1; ++i) {
    Vec<Dim> step = h * frame.tangents.col(i);
    auto plus = detail::probe(core, frame, step);
    auto minus = detail::probe(core, frame, Vec<Dim>(-step));
    realized[i] = 0.5 * (plus.position - minus.position).norm();
    m.entries(i, i) = (field(plus) - 2.0 * center + field(minus)) / (realized[i] * realized[i]);
  }
  for (int i = 0; i < Dim - 1; ++i) {
    for (int j = 0; j < Dim - 1; ++j) {
      if (i == j) continue;
      Vec<Dim> a = h * frame.tangents.col(i), b = h * frame.tangents.col(j);
      double pp = field(detail::probe(core, frame, Vec<Dim>(a + b)));
      double pm = field(detail::probe(core, frame, Vec<Dim>(a - b)));
      double mp = field(detail::probe(core, frame, Vec<Dim>(-a + b)));
      double mm = field(detail::probe(core, frame, Vec<Dim>(-a - b)));
      m.entries(i, j) = (pp - pm - mp + mm) / (4.0 * realized[i] * realized[j]);
    }
  }
  m.raw_asymmetry = (m.entries - m.entries.transpose()).norm();
  m.entries = 0.5 * (m.entries + m.entries.transpose()).eval();
  return m;
}

/// Jacobian of a map of the core boundary into itself, in frame coordinates.
template <int Dim, class Map>
TangentMatrix<Dim> fd_jacobian(const ConvexCore<Dim>& core, const TangentFrame<Dim>& frame,
                               Map&& map, double h) {
  TangentMatrix<Dim> m{frame, TMat<Dim>::Zero()};
  for (int i = 0; i < Dim - 1; ++i) {
    Vec<Dim> step = h * frame.tangents.col(i);
    auto plus = detail::probe(core, frame, step);
    auto minus = detail::probe(core, frame, Vec<Dim>(-step));
    double realized = 0.5 * (plus.position - minus.position).norm();
    Vec<Dim> diff = map(plus).position - map(minus).position;
    m.entries.col(i) = frame.coordinates(diff) / (2.0 * realized);
  }
  return m;
}

template <int Dim>
auto thickness_field(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer) {
  return [&core, &outer](const CorePoint<Dim>& p) { return thickness(core, outer, p).thickness; };
}

template <int Dim>
TangentVector<Dim> tangential_gradient(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                       const TangentFrame<Dim>& frame, double h) {
  return fd_gradient(core, frame, thickness_field(core, outer), h);
}

template <int Dim>
TangentVector<Dim> tangential_gradient(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                       const CorePoint<Dim>& c, double h = 0.0) {
  return tangential_gradient(core, outer, tangent_frame(core, c),
                             h > 0.0 ? h : StepSizes::gradient(core));
}

template <int Dim>
TangentMatrix<Dim> tangential_hessian(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                      const TangentFrame<Dim>& frame, double h) {
  return fd_hessian(core, frame, thickness_field(core, outer), h);
}

template <int Dim>
TangentMatrix<Dim> tangential_hessian(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                      const CorePoint<Dim>& c, double h = 0.0) {
  return tangential_hessian(core, outer, tangent_frame(core, c),
                            h > 0.0 ? h : StepSizes::hessian(core));
}

template <int Dim>
TangentMatrix<Dim> numerical_jacobian_F(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                        const TangentFrame<Dim>& frame, double h) {
  auto map = [&](const CorePoint<Dim>& p) { return return_map(core, outer, p); };
  return fd_jacobian(core, frame, map, h);
}

template <int Dim>
TangentMatrix<Dim> numerical_jacobian_F(const ConvexCore<Dim>& core, const OuterDomain<Dim>& outer,
                                        const CorePoint<Dim>& c, double h = 0.0) {
  return numerical_jacobian_F(core, outer, tangent_frame(core, c),
                              h > 0.0 ? h : StepSizes::jacobian(core));
}

// Eigenvalues of the at most 2x2 tangent-space matrices, in closed form.

/// Ascending eigenvalues of a symmetric matrix.
template <int N>
std::array<double, N> symmetric_eigenvalues(const Eigen::Matrix<double, N, N>& m) {
  static_assert(N == 1 || N == 2);
  if constexpr (N == 1) {
    return {m(0, 0)};
  } else {
    double mean = 0.5 * (m(0, 0) + m(1, 1));
    double half_diff = 0.5 * (m(0, 0) - m(1, 1));
    double off = 0.5 * (m(0, 1) + m(1, 0));
    double r = std::hypot(half_diff, off);
    return {mean - r, mean + r};
  }
}

/// Eigenvalues of a general matrix; complex pairs when the discriminant is
/// negative.
template <int N>
std::array<std::complex<double>, N> general_eigenvalues(const Eigen::Matrix<double, N, N>& m) {
  static_assert(N == 1 || N == 2);
  if constexpr (N == 1) {
    return {std::complex<double>(m(0, 0), 0.0)};
  } else {
    double half_trace = 0.5 * (m(0, 0) + m(1, 1));
    double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    double disc = half_trace * half_trace - det;
    if (disc >= 0.0) {
      double r = std::sqrt(disc);
      return {std::complex<double>(half_trace - r, 0.0), std::complex<double>(half_trace + r, 0.0)};
    }
    double im = std::sqrt(-disc);
    return {std::complex<double>(half_trace, -im), std::complex<double>(half_trace, im)};
  }
}

/// Ascending moduli of the eigenvalues.
template <int N>
std::array<double, N> eigenvalue_moduli(const Eigen::Matrix<double, N, N>& m) {
  auto ev = general_eigenvalues<N>(m);
  std::array<double, N> out{};
  for (int i = 0; i < N; ++i) out[i] = std::abs(ev[i]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace retmap
