#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "retmap/maps.hpp"

namespace retmap {

using ScenarioParams = std::map<std::string, double>;

/// Closed forms for d and its tangential gradient, as functions of a point
/// on the core boundary.
template <int Dim>
struct AnalyticOracle {
  std::function<double(const Vec<Dim>&)> thickness;
  std::function<Vec<Dim>(const Vec<Dim>&)> gradient;
};

template <int Dim>
struct Scenario {
  std::string name;
  ConvexCore<Dim> core;
  OuterDomain<Dim> outer;
  std::string provenance_notes;
  /// Effective parameters, defaults filled in.
  ScenarioParams params;
  std::optional<AnalyticOracle<Dim>> oracle;
  /// Verdict of the sampled admissibility check run at construction.
  bool admissible = true;

  static constexpr int dim = Dim;
};

using AnyScenario = std::variant<Scenario<2>, Scenario<3>>;

/// Exact thickness for a ball core of radius R inside a radial graph: core
/// normals are radial, so d(w) = r(w) - R and grad d = rho eps P grad f / R.
template <int Dim>
AnalyticOracle<Dim> radial_ball_oracle(double core_radius, const RadialGraph<Dim>& rg) {
  AnalyticOracle<Dim> o;
  o.thickness = [core_radius, rg](const Vec<Dim>& c) { return rg.radius(c.normalized()) - core_radius; };
  o.gradient = [core_radius, rg](const Vec<Dim>& c) {
    Vec<Dim> w = c.normalized();
    Vec<Dim> df = rg.profile.gradient(w);
    return Vec<Dim>(rg.base_radius * rg.amplitude * (df - df.dot(w) * w) / core_radius);
  };
  return o;
}

namespace detail {

struct ParamSpec {
  std::string key;
  double fallback;
  std::string help;
};

struct CatalogEntry {
  std::string name;
  int dim;
  std::vector<ParamSpec> params;
  std::string summary;
};

inline const std::vector<ParamSpec> kCommonParams = {
    {"core_radius", 1.0, "radius of the circular/spherical core"},
    {"validation_samples", 1000, "boundary and core samples for the construction-time admissibility check"},
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"concentric_circle", 2, {{"rho", 2.0, "outer radius"}}, "unit circle inside a concentric circle; d is constant"},
      {"concentric_sphere", 3, {{"rho", 2.0, "outer radius"}}, "unit sphere inside a concentric sphere; d is constant"},
      {"perturbed_circle_cosine",
       2,
       {{"rho", 1.5, "base outer radius"},
        {"amplitude", 0.1, "cosine amplitude of d itself: d(theta) = rho - R + amplitude cos(theta)"},
        {"eps", std::nan(""), "relative amplitude; if given, amplitude = rho * eps"}},
       "circle core, outer radius rho + amplitude cos(theta)"},
      {"perturbed_sphere_height",
       3,
       {{"rho", 1.5, "base outer radius"}, {"eps", 0.1, "relative amplitude of the height profile"}},
       "sphere core, outer radius rho (1 + eps z)"},
      {"perturbed_sphere_single_bump",
       3,
       {{"rho", 1.0, "base outer radius"},
        {"eps", 0.1, "relative amplitude"},
        {"depth", 1.0, "bump depth A"},
        {"kappa", 0.5, "bump concentration"}},
       "sphere core, r = rho (1 + eps f), f = 1 + A (1 - exp(-kappa |w - n|^2)), n = north pole; "
       "single minimum of d at n"},
      {"perturbed_sphere_two_bumps",
       3,
       {{"rho", 1.5, "base outer radius"},
        {"eps", 0.2, "relative amplitude"},
        {"depth", 1.0, "bump depth A"},
        {"kappa", 0.5, "bump concentration"},
        {"separation", 2.0, "angle between the two bump centres (radians)"}},
       "sphere core, r = rho (1 + eps f), f = -A (b1 + b2) with Gaussian dents b1, b2 on the "
       "xz great circle, symmetric about the north pole; two minima of d"},
      {"pathological_fold",
       2,
       {{"rho", 3.0, "base outer radius"},
        {"eps", 0.2, "relative ripple amplitude"},
        {"order", 6.0, "ripple harmonic order"}},
       "circle core inside a steeply rippled radial graph; inward normals miss the core"},
  };
  return entries;
}

inline const CatalogEntry& entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw ScenarioError("unknown scenario '" + name + "'");
}

inline ScenarioParams resolve_params(const CatalogEntry& e, const ScenarioParams& given) {
  ScenarioParams out;
  std::set<std::string> known;
  for (const auto* list : {&e.params, &kCommonParams})
    for (const auto& p : *list) {
      known.insert(p.key);
      out[p.key] = p.fallback;
    }
  for (const auto& [k, v] : given) {
    if (!known.count(k)) throw ScenarioError("scenario '" + e.name + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw ScenarioError("parameter '" + k + "' must be finite");
    out[k] = v;
  }
  return out;
}

inline int as_count(double v, const std::string& key) {
  if (!(v >= 1.0) || v != std::floor(v))
    throw ScenarioError("parameter '" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

template <int Dim>
Scenario<Dim> make(const std::string& name, ScenarioParams params, OuterDomain<Dim> outer,
                   std::string notes, bool expect_admissible) {
  const double core_radius = params.at("core_radius");
  auto core = ConvexCore<Dim>::ball(core_radius);
  Scenario<Dim> s{name, core, std::move(outer), std::move(notes), params, std::nullopt, true};
  if (const auto* rg = s.outer.radial()) s.oracle = radial_ball_oracle(core_radius, *rg);

  const auto n = static_cast<std::size_t>(as_count(params.at("validation_samples"), "validation_samples"));
  auto report = check_admissibility(s.core, s.outer, n, n);
  s.admissible = report.verdict();
  std::ostringstream os;
  os << " | admissibility(" << n << "+" << n << " samples): "
     << (s.admissible ? "pass" : "FAIL") << ", normal-property failures "
     << report.normal_property_failures.size() << ", connectivity failures "
     << report.connectivity_failures.size();
  s.provenance_notes += os.str();
  if (expect_admissible && !s.admissible)
    throw ScenarioError("scenario '" + name + "' is not admissible for these parameters" + os.str());

  if (s.oracle && s.admissible) {
    for (const auto& w : directions<Dim>(100)) {
      auto c = project_to_core(s.core, w);
      double numeric = thickness(s.core, s.outer, c).thickness;
      double exact = s.oracle->thickness(c.position);
      if (std::abs(numeric - exact) > 1e-8)
        throw ScenarioError("scenario '" + name + "': thickness disagrees with its closed form");
    }
  }
  return s;
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& e : detail::catalog()) out.push_back(e.name);
  return out;
}

/// Human-readable catalog listing with parameters and defaults.
inline std::string catalog_help() {
  std::ostringstream os;
  for (const auto& e : detail::catalog()) {
    os << e.name << " (" << e.dim << "D): " << e.summary << "\n";
    for (const auto* list : {&e.params, &detail::kCommonParams})
      for (const auto& p : *list) {
        os << "    " << p.key << " = ";
        if (std::isnan(p.fallback))
          os << "(unset)";
        else
          os << p.fallback;
        os << "  " << p.help << "\n";
      }
  }
  return os.str();
}

inline int scenario_dimension(const std::string& name) { return detail::entry(name).dim; }

/// Builds a catalog scenario. With `enforce_admissibility` false a failed
/// construction-time check is recorded in the notes instead of thrown.
inline AnyScenario build_scenario(const std::string& name, const ScenarioParams& given = {},
                                  bool enforce_admissibility = true) {
  const auto& e = detail::entry(name);
  ScenarioParams p = detail::resolve_params(e, given);
  const double core_radius = p.at("core_radius");
  if (!(core_radius > 0.0)) throw ScenarioError("core_radius must be positive");
  const double rho = p.at("rho");
  if (!(rho > 0.0)) throw ScenarioError("rho must be positive");

  try {
    if (name == "concentric_circle" || name == "concentric_sphere") {
      if (!(rho > core_radius)) throw ScenarioError("rho must exceed core_radius");
      std::string notes = "concentric balls; d = rho - R exactly, F is the identity";
      if (e.dim == 2)
        return detail::make<2>(name, p, OuterDomain<2>::ball(rho), notes, enforce_admissibility);
      return detail::make<3>(name, p, OuterDomain<3>::ball(rho), notes, enforce_admissibility);
    }
    if (name == "perturbed_circle_cosine") {
      if (given.count("eps") && given.count("amplitude"))
        throw ScenarioError("give either 'amplitude' or 'eps', not both");
      double amplitude = std::isnan(p.at("eps")) ? p.at("amplitude") : rho * p.at("eps");
      p["amplitude"] = amplitude;
      p["eps"] = amplitude / rho;
      std::ostringstream notes;
      notes.precision(17);
      notes << "radial core normals give d(theta) = " << rho - core_radius << " + " << amplitude
            << " cos(theta) exactly";
      return detail::make<2>(name, p,
                             OuterDomain<2>::radial_graph(rho, amplitude / rho, Profile<2>::axis_cosine(0)),
                             notes.str(), enforce_admissibility);
    }
    if (name == "perturbed_sphere_height") {
      return detail::make<3>(
          name, p, OuterDomain<3>::radial_graph(rho, p.at("eps"), Profile<3>::axis_cosine(2)),
          "deformed sphere r = rho (1 + eps z); d = r - R, minimum at the south pole, maximum at "
          "the north pole",
          enforce_admissibility);
    }
    if (name == "perturbed_sphere_single_bump") {
      double depth = p.at("depth");
      if (!(depth > 0.0)) throw ScenarioError("depth must be positive");
      auto f = Profile<3>::constant(1.0 + depth) +
               (-depth) * Profile<3>::gaussian_bump(Vec<3>::UnitZ(), p.at("kappa"));
      return detail::make<3>(name, p, OuterDomain<3>::radial_graph(rho, p.at("eps"), f),
                             "deformed sphere in radial coordinates with a single Gaussian dent at "
                             "the north pole; d = r - R has one minimum (north) and one maximum "
                             "(south)",
                             enforce_admissibility);
    }
    if (name == "perturbed_sphere_two_bumps") {
      double depth = p.at("depth");
      if (!(depth > 0.0)) throw ScenarioError("depth must be positive");
      double half = 0.5 * p.at("separation");
      if (!(half > 0.0 && half < 0.5 * std::numbers::pi))
        throw ScenarioError("separation must lie in (0, pi)");
      Vec<3> c1(std::sin(half), 0.0, std::cos(half)), c2(-std::sin(half), 0.0, std::cos(half));
      auto f = (-depth) * (Profile<3>::gaussian_bump(c1, p.at("kappa")) +
                           Profile<3>::gaussian_bump(c2, p.at("kappa")));
      return detail::make<3>(name, p, OuterDomain<3>::radial_graph(rho, p.at("eps"), f),
                             "deformed sphere with two Gaussian dents on the xz great circle, "
                             "symmetric about the north pole",
                             enforce_admissibility);
    }
    if (name == "pathological_fold") {
      int order = detail::as_count(p.at("order"), "order");
      return detail::make<2>(
          name, p, OuterDomain<2>::radial_graph(rho, p.at("eps"), Profile<2>::harmonic(order)),
          "steep ripples r = rho (1 + eps cos(k theta)) tilt inward normals past the core, "
          "violating the geometric normal property",
          false);
    }
  } catch (const GeometryError& g) {
    throw ScenarioError("scenario '" + name + "': " + g.what());
  }
  throw ScenarioError("unknown scenario '" + name + "'");
}

}  // namespace retmap
