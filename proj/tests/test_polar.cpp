#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "santalo/families.hpp"
#include "santalo/polar.hpp"

using namespace santalo;

namespace {

double central_sup_error(const GridFunction& g, double (*exact_log)(std::span<const double>)) {
  double err = 0.0;
  for_each_node(g.box, [&](std::size_t i, std::span<const double> x) {
    for (std::size_t a = 0; a < x.size(); ++a) {
      const double half = 0.25 * (g.box.hi(a) - g.box.lo(a));
      const double mid = 0.5 * (g.box.hi(a) + g.box.lo(a));
      if (std::abs(x[a] - mid) > half) return;
    }
    err = std::max(err, std::abs(std::exp(g.logvals[i]) - std::exp(exact_log(x))));
  });
  return err;
}

std::vector<double> on_grid(const Box& b, double (*fn)(double)) {
  std::vector<double> out(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) out[k] = fn(b.node(0, k));
  return out;
}

}  // namespace

TEST(Legendre1d, QuadraticSelfConjugate) {
  const Box in = Box::cube(1, -8.0, 8.0, 1601);
  const Box out = Box::cube(1, -4.0, 4.0, 801);
  const auto u = on_grid(in, [](double y) { return 0.5 * y * y; });
  const auto c = legendre_1d(in, u, out);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(c[i], 0.5 * out.node(0, i) * out.node(0, i), 1e-3);
}

TEST(Legendre1d, ScaledQuadraticMatchesBruteForce) {
  const Box in = Box::cube(1, -16.0, 16.0, 3201);
  const Box out = Box::cube(1, -3.0, 3.0, 301);
  const auto u = on_grid(in, [](double y) { return y * y / 8.0; });
  const auto c = legendre_1d(in, u, out);
  const auto ref = oracle::conjugate(in.axis_nodes(0), u, out.axis_nodes(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_NEAR(c[i], ref[i], 1e-10);
    EXPECT_NEAR(c[i], 2.0 * out.node(0, i) * out.node(0, i), 1e-3);
  }
}

TEST(Legendre1d, IntervalSupportFunction) {
  const Box in = Box::cube(1, -2.0, 2.0, 4001);
  const Box out = Box::cube(1, -3.0, 3.0, 61);
  const auto u = on_grid(in, [](double y) { return std::abs(y) <= 1.0 ? 0.0 : kPosInf; });
  const auto c = legendre_1d(in, u, out);
  const auto ref = oracle::conjugate(in.axis_nodes(0), u, out.axis_nodes(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_NEAR(c[i], std::abs(out.node(0, i)), 1e-3);
    EXPECT_NEAR(c[i], ref[i], 1e-10);
  }
}

TEST(Legendre1d, EmptySupportThrows) {
  const Box b = Box::cube(1, -1.0, 1.0, 5);
  try {
    legendre_1d(b, std::vector<double>(5, kPosInf), b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySupport);
  }
}

TEST(Legendre1d, NonConvexInputUsesHull) {
  const Box in = Box::cube(1, -2.0, 2.0, 401);
  const Box out = Box::cube(1, -5.0, 5.0, 101);
  const auto u = on_grid(in, [](double y) { return (y * y - 1.0) * (y * y - 1.0); });
  const auto fast = legendre_1d(in, u, out, TransformMethod::FastLLT);
  const auto brute = legendre_1d(in, u, out, TransformMethod::BruteForce);
  EXPECT_LE(oracle::sup_abs_diff(fast, brute), 1e-10);
}

TEST(LegendreNd, SeparableQuadratic) {
  const Box in = Box::cube(2, -8.0, 8.0, 321);
  const Box out = Box::cube(2, -4.0, 4.0, 81);
  std::vector<double> u(in.size());
  for_each_node(in, [&](std::size_t i, auto y) { u[i] = 0.5 * dot(y, y); });
  const auto c = legendre_nd(in, u, out);
  for_each_node(out, [&](std::size_t i, auto x) { EXPECT_NEAR(c[i], 0.5 * dot(x, x), 2e-3); });
}

TEST(LegendreNd, SquareSupportFunctionMatchesBruteForce) {
  const Box in = Box::cube(2, -2.0, 2.0, 81);
  const Box out = Box::cube(2, -3.0, 3.0, 31);
  std::vector<double> u(in.size());
  for_each_node(in, [&](std::size_t i, auto y) {
    u[i] = (std::abs(y[0]) <= 1.0 && std::abs(y[1]) <= 1.0) ? 0.0 : kPosInf;
  });
  const auto c = legendre_nd(in, u, out);
  const GridFunction f(in, [&] {
    std::vector<double> lv(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) lv[i] = u[i] == kPosInf ? kNegInf : -u[i];
    return lv;
  }());
  const auto ref = oracle::polar_log(f, out);
  for_each_node(out, [&](std::size_t i, auto x) {
    EXPECT_NEAR(c[i], std::abs(x[0]) + std::abs(x[1]), 2e-3);
    EXPECT_NEAR(c[i], -ref[i], 1e-9);
  });
}

TEST(LegendreNd, SinglePointIsExact) {
  const Box in = Box::cube(3, -1.0, 1.0, 5);
  const Box out = Box::cube(3, -2.0, 2.0, 7);
  std::vector<double> u(in.size(), kPosInf);
  const std::size_t j = 2 * 25 + 3 * 5 + 1;
  u[j] = 0.75;
  Vec y0;
  for_each_node(in, [&](std::size_t i, auto y) {
    if (i == j) y0.assign(y.begin(), y.end());
  });
  for (auto m : {TransformMethod::FastLLT, TransformMethod::BruteForce}) {
    const auto c = legendre_nd(in, u, out, m);
    for_each_node(out, [&](std::size_t i, auto x) { EXPECT_NEAR(c[i], dot(x, y0) - 0.75, 1e-14); });
  }
}

TEST(PolarFunction, GaussianIsSelfPolar) {
  for (std::size_t n : {1u, 2u}) {
    const GridFunction f = gaussian(n);
    const TransformResult r = polar_function(f);
    EXPECT_EQ(r.output_box.counts, f.box.counts);
    EXPECT_LE(central_sup_error(r.output, [](std::span<const double> x) { return -0.5 * dot(x, x); }), 2e-3);
  }
}

TEST(PolarFunction, IndicatorGivesLaplace) {
  const GridFunction f = indicator_interval(-1.0, 1.0);
  const Box out = Box::cube(1, -4.0, 4.0, 401);
  const GridFunction g = polar_function(f, out).output;
  const auto ref = oracle::polar_log(f, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_NEAR(std::exp(g.logvals[i]), std::exp(-std::abs(out.node(0, i))), 2e-3);
    EXPECT_NEAR(g.logvals[i], ref[i], 1e-10);
  }
}

TEST(PolarFunction, ScaledGaussian) {
  const GridFunction f = scaled_gaussian(1, 4.0);
  const Box out = Box::cube(1, -8.0, 8.0, 801);
  const GridFunction g = polar_function(f, out).output;
  const auto ref = oracle::polar_log(f, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out.node(0, i);
    EXPECT_NEAR(std::exp(g.logvals[i]), std::exp(-x * x / 8.0), 2e-3);
    EXPECT_NEAR(g.logvals[i], ref[i], 1e-10);
  }
}

TEST(PolarFunction, EmptySupportThrows) {
  const Box b = Box::cube(1, -1.0, 1.0, 5);
  EXPECT_THROW(polar_function(GridFunction(b, std::vector<double>(5, kNegInf))), Error);
}

TEST(PolarFunction, OutputIsMidpointConcave) {
  const GridFunction f = logconcave_mixture(1, 21);
  const GridFunction g = polar_function(f).output;
  for (std::size_t i = 1; i + 1 < g.logvals.size(); ++i)
    EXPECT_GE(g.logvals[i] + 1e-9, 0.5 * (g.logvals[i - 1] + g.logvals[i + 1]));
}

TEST(PolarCovering, ExpandsUntilTailDecays) {
  const GridFunction f = indicator_interval(-1.0, 1.0);
  const CoveredTransform c = polar_function_covering(f);
  EXPECT_FALSE(c.truncated);
  EXPECT_GT(c.expansions, 0u);
  const GridFunction& g = c.transform.output;
  EXPECT_LT(std::exp(g.logvals.front() - g.max_log()), 1e-12);
  EXPECT_NEAR(integrate(g), 2.0, 1e-2);
}

TEST(DualityMargin, GaussianPairIsTight) {
  const GridFunction f = gaussian(1, {std::nullopt, std::nullopt, std::vector<std::size_t>{401}});
  const DualityMargin m = duality_margin(f, f);
  EXPECT_NEAR(m.value, 0.0, 1e-9);
  EXPECT_FALSE(m.subsampled);
}

TEST(DualityMargin, IndicatorLaplacePair) {
  const GridFunction f = indicator_interval(-1.0, 1.0, {std::nullopt, std::nullopt, std::vector<std::size_t>{801}});
  const GridFunction g = GridFunction::sample(Box::cube(1, -6.0, 6.0, 601), [](auto y) { return -std::abs(y[0]); });
  EXPECT_NEAR(duality_margin(f, g).value, 0.0, 2e-3);
  EXPECT_NEAR(duality_margin(f, g.scaled_log(std::log(2.0))).value, std::log(2.0), 2e-3);
}

TEST(DualityMargin, EmptySideIsMinusInfinity) {
  const Box b = Box::cube(1, -1.0, 1.0, 5);
  EXPECT_EQ(duality_margin(GridFunction(b, std::vector<double>(5, kNegInf)), gaussian(1)).value, kNegInf);
}

TEST(Maximality, PolarAndDominated) {
  const GridFunction f = gaussian(1);
  const GridFunction g = polar_function(f).output;
  EXPECT_TRUE(polar_maximality_check(f, g));
  EXPECT_TRUE(polar_maximality_check(f, g.scaled_log(std::log(0.5))));
  const GridFunction over = g.scaled_log(std::log(1.1));
  EXPECT_FALSE(polar_maximality_check(f, over));
  EXPECT_GT(duality_margin(f, over).value, 0.0);
}
