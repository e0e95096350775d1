#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "santalo/families.hpp"
#include "santalo/rng.hpp"
#include "santalo/starbody.hpp"

using namespace santalo;

namespace {

const AngularGrid& circle() {
  static const AngularGrid g = AngularGrid::circle();
  return g;
}

const AngularGrid& sphere() {
  static const AngularGrid g = AngularGrid::sphere(128, 256);
  return g;
}

double radial_sup_error(const StarBody& s, double (*exact)(std::span<const double>)) {
  double err = 0.0;
  for (std::size_t k = 0; k < s.grid().size(); ++k) err = std::max(err, std::abs(s.rho()[k] - exact(s.grid().direction(k))));
  return err;
}

}  // namespace

TEST(BallConstants, Values) {
  EXPECT_DOUBLE_EQ(ball_constants(1).v_n, 2.0);
  EXPECT_DOUBLE_EQ(ball_constants(2).v_n, kPi);
  EXPECT_NEAR(ball_constants(3).v_n, 4.0 * kPi / 3.0, 1e-15);
  for (std::size_t n = 1; n <= 5; ++n) {
    const BallConstants b = ball_constants(n);
    EXPECT_NEAR(b.c_n * b.v_n, std::pow(2.0 * kPi, 0.5 * n), 1e-12);
  }
}

TEST(StarBody, RejectsNonPositiveRadius) {
  std::vector<double> rho(circle().size(), 1.0);
  rho[5] = 0.0;
  EXPECT_THROW(StarBody(circle(), rho), Error);
  EXPECT_THROW(StarBody(circle(), std::vector<double>(3, 1.0)), Error);
}

TEST(Gauge, UnitBall) {
  const StarBody b = ball_body(circle());
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Vec x{rng.normal(), rng.normal()};
    EXPECT_NEAR(gauge_eval(b, x), norm(x), 1e-5 * norm(x));
  }
  EXPECT_EQ(gauge_eval(b, Vec{0.0, 0.0}), 0.0);
}

TEST(Gauge, SquareMaxNorm) {
  const StarBody sq = cube_body(circle());
  EXPECT_DOUBLE_EQ(gauge_eval(sq, Vec{2.0, 0.0}), 2.0);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    Vec x{rng.normal(), rng.normal()};
    EXPECT_NEAR(gauge_eval(sq, x), std::max(std::abs(x[0]), std::abs(x[1])), 1e-12 * norm(x));
  }
}

TEST(Gauge, Homogeneous) {
  const StarBody s = random_star_body(circle(), 9);
  const StarBody s3 = random_star_body(sphere(), 9);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Vec x{rng.normal(), rng.normal()};
    Vec y{rng.normal(), rng.normal(), rng.normal()};
    EXPECT_NEAR(gauge_eval(s, Vec{2 * x[0], 2 * x[1]}), 2.0 * gauge_eval(s, x), 1e-15 * gauge_eval(s, x));
    EXPECT_NEAR(gauge_eval(s3, Vec{2 * y[0], 2 * y[1], 2 * y[2]}), 2.0 * gauge_eval(s3, y), 1e-15 * gauge_eval(s3, y));
  }
}

TEST(Gauge, ReproducesNodes) {
  const StarBody s = random_star_body(sphere(), 4, 2.0, 0.5);
  for (std::size_t k = 0; k < s.grid().size(); k += 97) {
    const auto d = s.grid().direction(k);
    EXPECT_NEAR(radial_eval(s, d), s.rho()[k], 1e-12);
  }
}

TEST(PolarBody, BallIsSelfDual) {
  const StarBody p = polar_body(ball_body(circle()));
  for (double r : p.rho()) EXPECT_NEAR(r, 1.0, 1e-5);
  const StarBody p3 = polar_body(ball_body(sphere()));
  for (double r : p3.rho()) EXPECT_NEAR(r, 1.0, 1e-3);
}

TEST(PolarBody, SquareToCrossPolytope) {
  const StarBody p = polar_body(cube_body(circle()));
  EXPECT_LE(radial_sup_error(p, [](std::span<const double> d) { return 1.0 / (std::abs(d[0]) + std::abs(d[1])); }),
            1e-3);
}

TEST(PolarBody, EllipseAxesInvert) {
  const double a = 2.0;
  const StarBody p = polar_body(ellipsoid_body(circle(), {a, 1.0 / a}));
  const StarBody q = ellipsoid_body(circle(), {1.0 / a, a});
  double err = 0.0;
  for (std::size_t k = 0; k < p.rho().size(); ++k) err = std::max(err, std::abs(p.rho()[k] - q.rho()[k]));
  EXPECT_LE(err, 1e-3);
}

TEST(PolarBody, IsConvex) {
  const StarBody p = polar_body(random_star_body(circle(), 17, 1.0, 0.6));
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    Vec x{rng.normal(), rng.normal()}, y{rng.normal(), rng.normal()};
    Vec s{x[0] + y[0], x[1] + y[1]};
    EXPECT_LE(gauge_eval(p, s), gauge_eval(p, x) + gauge_eval(p, y) + 1e-6 * (norm(x) + norm(y)));
  }
}

TEST(Volume, Disc) { EXPECT_NEAR(volume(ball_body(circle())), kPi, 1e-6); }

TEST(Volume, SquareMatchesPolygon) {
  const StarBody sq = cube_body(circle());
  EXPECT_NEAR(volume(sq), 4.0, 1e-3);
  std::vector<double> t(circle().size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = 2.0 * kPi * k / t.size();
  double radial = 0.0;
  for (double r : sq.rho()) radial += 0.5 * r * r * (2.0 * kPi / t.size());
  EXPECT_NEAR(volume(sq), radial, 1e-12);
  EXPECT_NEAR(volume(sq), oracle::polygon_area(t, sq.rho()), 1e-4);
}

TEST(Volume, UnitBall3d) { EXPECT_NEAR(volume(ball_body(sphere())), 4.0 * kPi / 3.0, 1e-3); }

TEST(Centroid, SymmetricBodies) {
  for (const StarBody& s : {cube_body(circle()), ellipsoid_body(circle(), {2.0, 0.5}), cross_polytope_body(circle())})
    for (double c : centroid(s)) EXPECT_NEAR(c, 0.0, 1e-9);
  for (double c : centroid(ball_body(sphere()))) EXPECT_NEAR(c, 0.0, 1e-9);
}

TEST(Centroid, CosineBodyMatchesCartesianQuadrature) {
  const StarBody s = cosine_perturbed_body(circle(), 0.3, 1);
  const Vec c = centroid(s);
  auto inside = [](double x, double y) {
    const double r = std::hypot(x, y);
    return r <= 1.0 + 0.3 * (r > 0 ? x / r : 1.0);
  };
  const oracle::PlanarMoments m = oracle::planar_moments(inside, 1.35, 8000);
  EXPECT_GT(c[0], 0.0);
  EXPECT_NEAR(c[0], m.cx, 1e-4);
  EXPECT_NEAR(c[1], 0.0, 1e-9);
}

TEST(Recenter, CenteredBodyUnchanged) {
  const StarBody s = ellipsoid_body(circle(), {1.5, 0.7});
  const RecenteredBody rc = recenter_body(s);
  EXPECT_EQ(rc.iterations, 0);
  for (std::size_t k = 0; k < s.rho().size(); ++k) EXPECT_NEAR(rc.body.rho()[k], s.rho()[k], 1e-9);
}

TEST(Recenter, CosineBody) {
  const RecenteredBody rc = recenter_body(cosine_perturbed_body(circle(), 0.3, 1));
  EXPECT_LE(norm(centroid(rc.body)), 1e-6);
  EXPECT_GT(rc.shift[0], 0.0);
}

TEST(Recenter, StronglyAsymmetricStar) {
  const RecenteredBody rc = recenter_body(random_star_body(circle(), 3, 1.0, 1.0));
  EXPECT_LE(rc.iterations, 5);
  EXPECT_LE(rc.residual, 1e-6);
}

TEST(Recenter, ThreeDimensional) {
  const RecenteredBody rc = recenter_body(cosine_perturbed_body(sphere(), 0.3, 1));
  EXPECT_LE(rc.residual, 1e-6);
}

TEST(Recenter, OriginOutsideThrows) {
  try {
    rederive_about(ball_body(circle()), Vec{1.5, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CentroidNotInterior);
  }
}

TEST(PhiOfBody, BallGivesGaussian) {
  const StarBody b = ball_body(circle());
  const GridFunction phi = phi_of_body(b);
  for_each_node(phi.box, [&](std::size_t i, auto x) { EXPECT_NEAR(phi.logvals[i], -0.5 * dot(x, x), 1e-4 * (1 + dot(x, x))); });
  EXPECT_NEAR(integrate(phi), 2.0 * kPi, 2e-2 * kPi);
}

TEST(PhiOfBody, Scaling) {
  const StarBody s = random_star_body(circle(), 8);
  const Box b = default_body_box(s, 101);
  const Box b2(Vec{2 * b.lower[0], 2 * b.lower[1]}, Vec{2 * b.upper[0], 2 * b.upper[1]}, b.counts);
  const GridFunction p = phi_of_body(s, b);
  const GridFunction p2 = phi_of_body(s.scaled(2.0), b2);
  for (std::size_t i = 0; i < p.logvals.size(); ++i) EXPECT_NEAR(p2.logvals[i], p.logvals[i], 1e-9 * (1 - p.logvals[i]));
}

TEST(PhiOfBody, BoxTooSmall) {
  try {
    phi_of_body(ball_body(circle()), Box::cube(2, -3.0, 3.0, 31));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BoxTooSmall);
  }
}

TEST(CnIdentity, Disc) {
  const VerificationReport r = verify_cn_identity(ball_body(circle()));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.product, 2.0 * kPi, 2e-2 * kPi);
}

TEST(CnIdentity, SquareMatchesDirectQuadrature) {
  const StarBody sq = cube_body(circle());
  const VerificationReport r = verify_cn_identity(sq);
  EXPECT_TRUE(r.passed);
  // int exp(-max(|x|,|y|)^2 / 2) by plain trapezoid on its own grid
  const GridFunction direct = GridFunction::sample(Box::cube(2, -7.0, 7.0, 701), [](auto x) {
    const double m = std::max(std::abs(x[0]), std::abs(x[1]));
    return -0.5 * m * m;
  });
  EXPECT_NEAR(oracle::trapezoid(direct), ball_constants(2).c_n * 4.0, 1e-2 * ball_constants(2).c_n * 4.0);
  EXPECT_NEAR(r.product, oracle::trapezoid(direct), 1e-2 * r.product);
}

TEST(CnIdentity, SeededStar) { EXPECT_TRUE(verify_cn_identity(random_star_body(circle(), 5)).passed); }

TEST(Lutwak, DiscSaturates) {
  const LutwakCheck lc = verify_lutwak(ball_body(circle()));
  EXPECT_TRUE(lc.passed());
  EXPECT_NEAR(lc.volume_route.product, kPi * kPi, 1e-3);
  EXPECT_NEAR(lc.functional_route.product, 4.0 * kPi * kPi, 1e-2 * 4.0 * kPi * kPi);
  EXPECT_LE(lc.premise_margin, kPremiseMargin);
  EXPECT_LE(lc.amgm_margin, 1e-12);
}

TEST(Lutwak, SquareCrossPolytope) {
  const LutwakCheck lc = verify_lutwak(cube_body(circle()));
  EXPECT_NEAR(lc.volume_route.product, 8.0, 1e-3);
  EXPECT_LE(lc.volume_route.product, kPi * kPi);
  EXPECT_NEAR(volume(lc.polar), 2.0, 1e-3);
  EXPECT_TRUE(lc.passed());
}

TEST(Lutwak, CosineBodyAfterRecentering) {
  const LutwakCheck lc = verify_lutwak(cosine_perturbed_body(circle(), 0.3, 1));
  EXPECT_TRUE(lc.volume_route.passed);
  EXPECT_TRUE(lc.functional_route.passed);
  EXPECT_LE(lc.recentered.residual, 1e-6);
}
