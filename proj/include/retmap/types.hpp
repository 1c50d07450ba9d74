#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace retmap {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

// Coordinates and operators on the (Dim - 1)-dimensional tangent space of
// the core boundary.
template <int Dim>
using TVec = Eigen::Matrix<double, Dim - 1, 1>;
template <int Dim>
using TMat = Eigen::Matrix<double, Dim - 1, Dim - 1>;

template <int Dim>
concept SupportedDim = (Dim == 2 || Dim == 3);

namespace tol {
// Implicit-function value below which a point counts as on a surface.
inline constexpr double kSurface = 1e-10;
// Acceptance thresholds for ray roots (the solver polishes well below these).
inline constexpr double kRootValue = 1e-12;
inline constexpr double kRootParameter = 1e-10;
// Gradient norm below which a normal is undefined.
inline constexpr double kDegenerateGradient = 1e-12;
}  // namespace tol

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Failure of a ray construction (thickness, reciprocal return, round trip).
/// Carries the ambient location at which the construction failed.
class MapError : public Error {
 public:
  MapError(const std::string& what, std::vector<double> location)
      : Error(what), location_(std::move(location)) {}

  template <int Dim>
  MapError(const std::string& what, const Vec<Dim>& location)
      : Error(what), location_(location.data(), location.data() + Dim) {}

  const std::vector<double>& location() const noexcept { return location_; }

 private:
  std::vector<double> location_;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace retmap
