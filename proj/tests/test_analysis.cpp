#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "retmap/analysis.hpp"

using namespace retmap;

namespace {

struct CircleCase {
  ConvexCore<2> core = ConvexCore<2>::ball(1.0);
  OuterDomain<2> outer = OuterDomain<2>::radial_graph(1.5, 0.1 / 1.5, Profile<2>::axis_cosine(0));
  oracle::PolarCurve curve = oracle::cosine_curve(1.5, 0.1);
};

Stability expected_stability(double modulus) {
  return modulus < 1.0 ? Stability::attracting : Stability::repelling;
}

}  // namespace

TEST(ClassifyModuli, FollowsModulusRules) {
  EXPECT_EQ(classify_moduli(std::array<double, 2>{0.5, 0.9}, 1e-3), Stability::attracting);
  EXPECT_EQ(classify_moduli(std::array<double, 2>{1.1, 1.5}, 1e-3), Stability::repelling);
  EXPECT_EQ(classify_moduli(std::array<double, 2>{0.5, 1.5}, 1e-3), Stability::saddle);
  EXPECT_EQ(classify_moduli(std::array<double, 2>{0.5, 1.0005}, 1e-3), Stability::nonhyperbolic);
  EXPECT_EQ(classify_moduli(std::array<double, 1>{0.9995}, 1e-3), Stability::nonhyperbolic);
}

TEST(CriticalPoints, CircleHasTwoExtremaWithClosedFormData) {
  CircleCase k;
  auto found = find_critical_points(k.core, k.outer, 32);
  EXPECT_FALSE(found.globally_critical);
  ASSERT_EQ(found.records.size(), 2u);
  // Sorted by thickness: theta = pi (d = 0.4) first.
  const double at[2] = {oracle::kPi, 0.0};
  for (int i = 0; i < 2; ++i) {
    const auto& r = found.records[i];
    const double th = at[i];
    EXPECT_NEAR(oracle::angle_diff(angle_of(r.location.position), th), 0.0, 1e-8);
    EXPECT_LE(r.grad_residual, 1e-9);
    EXPECT_NEAR(r.thickness_at, oracle::thickness(k.curve, 1.0, th), 1e-12);
    EXPECT_NEAR(r.hessian_eigs[0], oracle::thickness_curvature(k.curve, 1.0, th), 1e-6);
    EXPECT_NEAR(r.map_eigs[0], 1.0 - 2.0 * r.thickness_at * r.hessian_eigs[0], 1e-15);
    double slope = oracle::return_slope(k.curve, 1.0, th);
    EXPECT_NEAR(r.jacobian_moduli[0], std::abs(slope), 1e-6);
    EXPECT_EQ(r.stability, expected_stability(std::abs(slope)));
    EXPECT_FALSE(r.degenerate);
  }
  // The first-order multiplier 1 - 2 d lambda and the measured one disagree here.
  EXPECT_NEAR(found.records[0].map_eigs[0], 0.92, 1e-6);
  EXPECT_NEAR(found.records[1].map_eigs[0], 1.12, 1e-6);
  EXPECT_FALSE(found.records[0].prediction_consistent);
}

TEST(CriticalPoints, HeightSphereHasTwoPoles) {
  auto core = ConvexCore<3>::ball(1.0);
  auto outer = OuterDomain<3>::radial_graph(1.5, 0.1, Profile<3>::axis_cosine(2));
  auto surf = oracle::height_surface(1.5, 0.1);
  auto found = find_critical_points(core, outer, 24);
  ASSERT_EQ(found.records.size(), 2u);
  EXPECT_LT((found.records[0].location.position - Vec<3>(0, 0, -1)).norm(), 1e-8);
  EXPECT_LT((found.records[1].location.position - Vec<3>(0, 0, 1)).norm(), 1e-8);
  for (const auto& r : found.records) {
    double z = r.location.position.z();
    for (double lam : r.hessian_eigs) EXPECT_NEAR(lam, -0.15 * z, 1e-6);
    // Closed-form multiplier from a radial perturbation of the pole.
    const double h = 1e-5;
    Vec<3> probe = Vec<3>(h, 0, z).normalized();
    Vec<3> image = oracle::return_point(surf, 1.0, probe);
    double mu = image.x() / probe.x();
    for (double m : r.jacobian_moduli) EXPECT_NEAR(m, std::abs(mu), 1e-5);
    EXPECT_EQ(r.stability, expected_stability(std::abs(mu)));
  }
}

TEST(CriticalPoints, ConcentricIsGloballyCritical) {
  auto found = find_critical_points(ConvexCore<2>::ball(1.0), OuterDomain<2>::ball(2.0), 16);
  EXPECT_TRUE(found.globally_critical);
  EXPECT_TRUE(found.records.empty());
}

TEST(Classify, RejectsNonCriticalPointsAndFlagsDegeneracy) {
  CircleCase k;
  EXPECT_THROW(classify(k.core, k.outer, CorePoint<2>{unit_circle(1.0)}), AnalysisError);
  auto flat = classify(ConvexCore<2>::ball(1.0), OuterDomain<2>::ball(2.0), CorePoint<2>{unit_circle(1.0)});
  EXPECT_TRUE(flat.degenerate);
  EXPECT_EQ(flat.stability, Stability::nonhyperbolic);
}

TEST(Basins, CircleLabelsMatchClosedFormLimits) {
  CircleCase k;
  auto found = find_critical_points(k.core, k.outer, 16);
  ASSERT_EQ(found.records.size(), 2u);
  auto seeds = basin_seed_grid(k.core, 48);
  ASSERT_EQ(seeds.size(), 48u);
  auto map = compute_basins(k.core, k.outer, seeds, found.records);
  EXPECT_EQ(map.failed, 0u);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    double th = angle_of(seeds[i].position);
    for (int it = 0; it < 20000; ++it) th = oracle::return_angle(k.curve, 1.0, th);
    ASSERT_GE(map.labels[i], 0) << "seed " << i;
    double label_angle = angle_of(found.records[static_cast<std::size_t>(map.labels[i])].location.position);
    EXPECT_NEAR(oracle::angle_diff(label_angle, th), 0.0, 1e-3) << "seed " << i;
  }
  EXPECT_DOUBLE_EQ(map.resolved_fraction(), 1.0);
  std::size_t total = 0;
  for (auto c : map.counts) total += c;
  EXPECT_EQ(total, seeds.size());
}

TEST(Basins, BudgetExhaustionIsUnresolved) {
  CircleCase k;
  auto found = find_critical_points(k.core, k.outer, 16);
  BasinOptions opt;
  opt.iteration_budget = 3;
  auto map = compute_basins(k.core, k.outer, basin_seed_grid(k.core, 8), found.records, opt);
  EXPECT_EQ(map.unresolved, 8u);
  EXPECT_DOUBLE_EQ(map.resolved_fraction(), 0.0);
}

TEST(Basins, ConcentricReportsGloballyCritical) {
  auto core = ConvexCore<3>::ball(1.0);
  auto map = compute_basins(core, OuterDomain<3>::ball(2.0), basin_seed_grid(core, 4), {});
  EXPECT_TRUE(map.globally_critical);
  EXPECT_EQ(map.seeds.size(), 32u);
  CircleCase k;
  EXPECT_THROW(compute_basins(k.core, k.outer, basin_seed_grid(k.core, 4), {}), std::invalid_argument);
}

TEST(Expansion, ConcentricRemainderVanishes) {
  auto core = ConvexCore<3>::ball(1.0);
  std::vector<CorePoint<3>> grid;
  for (const auto& w : fibonacci_directions(50)) grid.push_back({w});
  auto rep = verify_expansion(core, OuterDomain<3>::ball(2.0), grid);
  EXPECT_LE(rep.max_remainder, 1e-9);
  EXPECT_EQ(rep.fit_points, 0u);
}

TEST(Expansion, CircleRemainderMatchesClosedForm) {
  CircleCase k;
  std::vector<CorePoint<2>> grid;
  for (const auto& w : circle_directions(40, 0.25)) grid.push_back({w});
  auto rep = verify_expansion(k.core, k.outer, grid);
  for (const auto& s : rep.samples) {
    double th = angle_of(s.position);
    double d = oracle::thickness(k.curve, 1.0, th);
    double slope = oracle::thickness_slope(k.curve, 1.0, th);
    Vec<2> tangent(-std::sin(th), std::cos(th));
    Vec<2> r = unit_circle(oracle::return_angle(k.curve, 1.0, th)) - unit_circle(th) +
               2.0 * d * slope * tangent;
    EXPECT_NEAR(s.remainder, r.norm(), 1e-8);
    EXPECT_NEAR(s.driver, d * slope * slope, 1e-9);
    if (s.driver >= 1e-14) EXPECT_LE(s.remainder, rep.k_hat * s.driver * (1 + 1e-12));
  }
  EXPECT_GT(rep.k_hat, 0.0);
  EXPECT_TRUE(std::isfinite(rep.k_hat));
}

TEST(Expansion, FamilyReportsRatiosAndSlope) {
  auto core = ConvexCore<2>::ball(1.0);
  auto outer_for = [](double eps) {
    return OuterDomain<2>::radial_graph(1.5, eps, Profile<2>::axis_cosine(0));
  };
  auto fam = verify_expansion_family<2>(core, outer_for, {0.04, 0.02}, circle_directions(16, 0.5));
  ASSERT_EQ(fam.ratios.size(), 1u);
  EXPECT_NEAR(fam.ratios[0], fam.reports[0].max_remainder / fam.reports[1].max_remainder, 1e-15);
  EXPECT_NEAR(fam.loglog_slope, std::log(fam.ratios[0]) / std::log(2.0), 1e-12);
}
