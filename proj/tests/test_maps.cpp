#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "retmap/maps.hpp"
#include "retmap/sampling.hpp"

using namespace retmap;

TEST(Thickness, ConcentricBallsGiveGap) {
  auto core = ConvexCore<3>::ball(1.0);
  auto outer = OuterDomain<3>::ball(2.0);
  for (const auto& w : fibonacci_directions(64)) {
    auto s = thickness(core, outer, CorePoint<3>{w});
    EXPECT_NEAR(s.thickness, 1.0, 1e-13);
    EXPECT_LT((s.exit_point.position - 2.0 * w).norm(), 1e-13);
  }
}

TEST(Thickness, EllipseInsideCircleMatchesQuadraticRoot) {
  auto core = ConvexCore<2>::ellipsoidal(Vec<2>(1.5, 1.0));
  auto outer = OuterDomain<2>::ball(3.0);
  for (double t : {0.0, 0.4, 1.3, 2.9, 4.4}) {
    Vec<2> p(1.5 * std::cos(t), std::sin(t));
    Vec<2> nu = Vec<2>(p.x() / 2.25, p.y()).normalized();
    double b = p.dot(nu), c = p.squaredNorm() - 9.0;
    double expected = -b + std::sqrt(b * b - c);
    EXPECT_NEAR(thickness(core, outer, CorePoint<2>{p}).thickness, expected, 1e-12);
  }
}

TEST(Thickness, CorePointOutsideOuterDomainIsAnError) {
  auto core = ConvexCore<2>::ball(1.0);
  auto outer = OuterDomain<2>::ball(0.5);
  EXPECT_THROW(thickness(core, outer, CorePoint<2>{Vec<2>(1, 0)}), MapError);
}

TEST(ReciprocalMap, ConcentricReturnsRadially) {
  auto core = ConvexCore<2>::ball(1.0);
  auto outer = OuterDomain<2>::ball(2.0);
  for (double t : {0.0, 1.0, 3.0}) {
    auto r = reciprocal_map(core, outer, OuterPoint<2>{2.0 * unit_circle(t)});
    EXPECT_NEAR(r.return_time, 1.0, 1e-13);
    EXPECT_LT((r.landing.position - unit_circle(t)).norm(), 1e-13);
  }
}

TEST(ReciprocalMap, MissingTheCoreIsReported) {
  auto core = ConvexCore<2>::ball(1.0);
  ImplicitBody<2> body{[](const Vec<2>& x) { return (x - Vec<2>(0.0, 0.0)).norm() - 5.0; },
                       [](const Vec<2>& x) { return Vec<2>(x.normalized()); }, 5.0, "circle5"};
  auto outer = OuterDomain<2>::implicit(body);
  auto ok = reciprocal_map(core, outer, OuterPoint<2>{Vec<2>(5, 0)});
  EXPECT_LT((ok.landing.position - Vec<2>(1, 0)).norm(), 1e-12);

  ImplicitBody<2> tilted{[](const Vec<2>& x) { return x.y() - 3.0 - 10.0 * x.x(); },
                         [](const Vec<2>&) { return Vec<2>(-10.0, 1.0); }, 50.0, "tilted line"};
  auto bad = OuterDomain<2>::implicit(tilted);
  // Inward normal (10, -1)/|.| from (0, 3) passes the unit circle at distance ~2.98.
  EXPECT_THROW(reciprocal_map(core, bad, OuterPoint<2>{Vec<2>(0, 3)}), MapError);
}

TEST(ReturnMap, PerturbedCircleMatchesClosedForm) {
  const double rho = 1.5, amp = 0.1;
  auto core = ConvexCore<2>::ball(1.0);
  auto outer = OuterDomain<2>::radial_graph(rho, amp / rho, Profile<2>::axis_cosine(0));
  auto curve = oracle::cosine_curve(rho, amp);
  for (double t = 0.05; t < 2 * oracle::kPi; t += 0.3) {
    auto f = return_map(core, outer, CorePoint<2>{unit_circle(t)});
    EXPECT_NEAR(oracle::angle_diff(angle_of(f.position), oracle::return_angle(curve, 1.0, t)), 0.0,
                1e-11)
        << "theta = " << t;
    EXPECT_TRUE(core.on_surface(f.position));
  }
  // The displacement at theta = pi/2 is toward theta = 0, i.e. up the slope of d.
  double moved = oracle::angle_diff(angle_of(return_map(core, outer, CorePoint<2>{unit_circle(oracle::kPi / 2)}).position),
                                    oracle::kPi / 2);
  EXPECT_NEAR(moved, -0.0333766, 1e-6);
}

TEST(ReturnMap, PerturbedSphereMatchesClosedForm) {
  const double rho = 1.5, eps = 0.1;
  auto core = ConvexCore<3>::ball(1.0);
  auto outer = OuterDomain<3>::radial_graph(rho, eps, Profile<3>::axis_cosine(2));
  auto surf = oracle::height_surface(rho, eps);
  for (const auto& w : fibonacci_directions(40, 0.3)) {
    auto f = return_map(core, outer, CorePoint<3>{w});
    EXPECT_LT((f.position - oracle::return_point(surf, 1.0, w)).norm(), 1e-11);
  }
}

TEST(ReturnMap, RoundTripPiecesAreConsistent) {
  auto core = ConvexCore<2>::ball(1.0);
  auto outer = OuterDomain<2>::radial_graph(1.5, 0.1, Profile<2>::axis_cosine(0));
  CorePoint<2> c{unit_circle(1.0)};
  auto rt = round_trip(core, outer, c);
  EXPECT_TRUE(outer.on_surface(rt.outbound.exit_point.position));
  EXPECT_LT((radial_map(core, outer, c).position - rt.outbound.exit_point.position).norm(), 1e-15);
  EXPECT_LT((return_map(core, outer, c).position - rt.inbound.landing.position).norm(), 1e-15);
  EXPECT_NEAR(outer_boundary_point(core, outer, unit_circle(1.0)).position.norm(),
              1.5 + 0.15 * std::cos(1.0), 1e-14);
}

TEST(Admissibility, ConcentricPassesAndFoldFails) {
  auto core = ConvexCore<2>::ball(1.0);
  auto good = check_admissibility(core, OuterDomain<2>::ball(2.0), 500, 500);
  EXPECT_TRUE(good.verdict());
  EXPECT_EQ(good.samples_checked, 1000u);

  auto fold = OuterDomain<2>::radial_graph(3.0, 0.2, Profile<2>::harmonic(6));
  auto bad = check_admissibility(core, fold, 2000, 500);
  EXPECT_FALSE(bad.verdict());
  EXPECT_GE(bad.normal_property_failures.size(), 1u);
  // A failing sample really does miss: its inward-normal line stays outside the core.
  for (const auto& x : bad.normal_property_failures) {
    Vec<2> n = inward_normal(fold, OuterPoint<2>{x});
    double b = x.dot(n);
    double disc = b * b - (x.squaredNorm() - 1.0);
    EXPECT_TRUE(disc < 0.0 || -b - std::sqrt(disc) < 0.0);
  }
}

TEST(Admissibility, OutwardRayIntervalsCountsComponents) {
  auto core = ConvexCore<2>::ball(1.0);
  EXPECT_EQ(outward_ray_intervals(core, OuterDomain<2>::ball(2.0), CorePoint<2>{Vec<2>(1, 0)}, 1e-3), 1);
  // An annulus-like implicit body: inside for 1 <= |x| < 2 and 3 < |x| < 4.
  ImplicitBody<2> rings{[](const Vec<2>& x) {
                          double r = x.norm();
                          if (r < 2.5) return r - 2.0;
                          return r < 3.5 ? 3.0 - r : r - 4.0;
                        },
                        [](const Vec<2>& x) { return Vec<2>(x.normalized()); }, 5.0, "rings"};
  EXPECT_EQ(outward_ray_intervals(core, OuterDomain<2>::implicit(rings), CorePoint<2>{Vec<2>(1, 0)}, 1e-3), 2);
}
