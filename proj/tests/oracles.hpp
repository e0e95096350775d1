#pragma once

// Reference computations for the test suites. Everything here is written
// directly from definitions with plain loops and shares no code paths with
// the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "santalo/grid.hpp"

namespace oracle {

using santalo::Box;
using santalo::GridFunction;
using santalo::Vec;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Coordinates of every node, row-major, last axis fastest.
inline std::vector<Vec> nodes(const Box& b) {
  const std::size_t n = b.dim();
  std::vector<Vec> out;
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < b.size(); ++flat) {
    Vec x(n);
    for (std::size_t a = 0; a < n; ++a) {
      const double h = (b.upper[a] - b.lower[a]) / static_cast<double>(b.counts[a] - 1);
      x[a] = b.shift[a] + b.lower[a] + h * static_cast<double>(idx[a]);
    }
    out.push_back(std::move(x));
    for (std::size_t a = n; a-- > 0;) {
      if (++idx[a] < b.counts[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

/// Product trapezoid weights, same order as nodes().
inline std::vector<double> weights(const Box& b) {
  const std::size_t n = b.dim();
  std::vector<double> out;
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < b.size(); ++flat) {
    double w = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double h = (b.upper[a] - b.lower[a]) / static_cast<double>(b.counts[a] - 1);
      w *= (idx[a] == 0 || idx[a] + 1 == b.counts[a]) ? 0.5 * h : h;
    }
    out.push_back(w);
    for (std::size_t a = n; a-- > 0;) {
      if (++idx[a] < b.counts[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Plain sum of w exp(log f), no log-space tricks.
inline double trapezoid(const GridFunction& f) {
  const auto w = weights(f.box);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::exp(f.logvals[i]);
  return s;
}

/// log f°(x) = min_y (-<x, y> - log f(y)) over every node pair.
inline std::vector<double> polar_log(const GridFunction& f, const Box& out) {
  const auto ys = nodes(f.box);
  const auto xs = nodes(out);
  std::vector<double> res(xs.size(), kInf);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (f.logvals[j] == -kInf) continue;
      res[i] = std::min(res[i], -dot(xs[i], ys[j]) - f.logvals[j]);
    }
  return res;
}

/// u*(x) = max_j (x y_j - u_j) for 1-D samples.
inline std::vector<double> conjugate(const std::vector<double>& y, const std::vector<double>& u,
                                     const std::vector<double>& x) {
  std::vector<double> out(x.size(), -kInf);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (u[j] < kInf) out[i] = std::max(out[i], x[i] * y[j] - u[j]);
  return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

/// Shoelace area of the polygon through the points r_k (cos t_k, sin t_k).
inline double polygon_area(const std::vector<double>& t, const std::vector<double>& r) {
  double a = 0.0;
  const std::size_t m = t.size();
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t l = (k + 1) % m;
    const double x0 = r[k] * std::cos(t[k]), y0 = r[k] * std::sin(t[k]);
    const double x1 = r[l] * std::cos(t[l]), y1 = r[l] * std::sin(t[l]);
    a += x0 * y1 - x1 * y0;
  }
  return 0.5 * a;
}

/// Midpoint-rule area and centroid of {x : inside(x)} on [-R, R]^2.
struct PlanarMoments {
  double area = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

inline PlanarMoments planar_moments(const std::function<bool(double, double)>& inside, double R, std::size_t n) {
  PlanarMoments m;
  const double h = 2.0 * R / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = -R + h * (static_cast<double>(i) + 0.5);
      const double y = -R + h * (static_cast<double>(j) + 0.5);
      if (!inside(x, y)) continue;
      m.area += h * h;
      m.cx += h * h * x;
      m.cy += h * h * y;
    }
  m.cx /= m.area;
  m.cy /= m.area;
  return m;
}

/// Seeded piecewise-linear convex-or-not potential on a 1-D grid; +inf outside
/// a random support interval with probability 1/4.
inline std::vector<double> random_potential(std::mt19937_64& rng, const std::vector<double>& y) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int pieces = 2 + static_cast<int>(rng() % 6);
  std::vector<double> knots(pieces + 1), vals(pieces + 1);
  for (int k = 0; k <= pieces; ++k) {
    knots[k] = y.front() + (y.back() - y.front()) * k / pieces;
    vals[k] = 3.0 * U(rng) + 0.5 * knots[k] * knots[k];
  }
  std::vector<double> u(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    int k = std::min(pieces - 1, static_cast<int>((y[j] - y.front()) / (y.back() - y.front()) * pieces));
    const double t = (y[j] - knots[k]) / (knots[k + 1] - knots[k]);
    u[j] = (1 - t) * vals[k] + t * vals[k + 1];
  }
  if (rng() % 4 == 0) {
    const std::size_t a = rng() % (y.size() / 2);
    const std::size_t b = y.size() / 2 + rng() % (y.size() / 2);
    for (std::size_t j = 0; j < y.size(); ++j)
      if (j < a || j > b) u[j] = kInf;
  }
  return u;
}

inline double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace oracle
