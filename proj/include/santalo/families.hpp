#pragma once

// Analytic and seeded test instances: grid functions and star bodies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "santalo/error.hpp"
#include "santalo/grid.hpp"
#include "santalo/rng.hpp"
#include "santalo/starbody.hpp"

namespace santalo {

/// Optional replacement bounds and/or per-axis counts for a family's default grid.
struct GridOverride {
  std::optional<Vec> lower;
  std::optional<Vec> upper;
  std::optional<std::vector<std::size_t>> counts;

  Box apply(const Box& def) const {
    Vec lo = lower.value_or(def.lower);
    Vec hi = upper.value_or(def.upper);
    std::vector<std::size_t> c = counts.value_or(def.counts);
    if (c.size() == 1 && def.dim() > 1) c.assign(def.dim(), c[0]);
    require(lo.size() == def.dim() && hi.size() == def.dim() && c.size() == def.dim(),
            ErrorCode::InvalidArgument, "grid override does not match the instance dimension");
    return Box(std::move(lo), std::move(hi), std::move(c));
  }
};

namespace detail {

inline void require_dim(std::size_t dim) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::InvalidArgument, "dimension must be 1, 2 or 3");
}

inline std::size_t default_count(std::size_t dim, std::size_t c1, std::size_t c2, std::size_t c3) {
  return dim == 1 ? c1 : dim == 2 ? c2 : c3;
}

}  // namespace detail

/// exp(-a |x|^2 / 2) on [-8/sqrt(a), 8/sqrt(a)]^n.
inline GridFunction scaled_gaussian(std::size_t dim, double a, const GridOverride& o = {}) {
  detail::require_dim(dim);
  require(a > 0.0 && std::isfinite(a), ErrorCode::InvalidArgument, "gaussian scale a must be positive");
  const double r = 8.0 / std::sqrt(a);
  const Box b = o.apply(Box::cube(dim, -r, r, detail::default_count(dim, 1601, 401, 81)));
  return GridFunction::sample(b, [a](std::span<const double> x) { return -0.5 * a * dot(x, x); });
}

inline GridFunction gaussian(std::size_t dim, const GridOverride& o = {}) { return scaled_gaussian(dim, 1.0, o); }

/// exp(-sum x_i) on [0, L]^n; L = 400 with 20001 nodes in 1-D, L = 60 with 301 per axis otherwise.
inline GridFunction exponential(std::size_t dim, const GridOverride& o = {}) {
  detail::require_dim(dim);
  const Box def = dim == 1 ? Box::cube(1, 0.0, 400.0, 20001) : Box::cube(dim, 0.0, 60.0, 301);
  const Box b = o.apply(def);
  return GridFunction::sample(b, [](std::span<const double> x) {
    double s = 0.0;
    for (double c : x) {
      if (c < 0.0) return kNegInf;
      s += c;
    }
    return -s;
  });
}

/// Indicator of [lo, hi]^n on [-2, 2]^n by default.
inline GridFunction indicator_box(std::size_t dim, double lo = -1.0, double hi = 1.0, const GridOverride& o = {}) {
  detail::require_dim(dim);
  require(lo < hi, ErrorCode::InvalidArgument, "indicator needs lo < hi");
  const Box b = o.apply(Box::cube(dim, -2.0, 2.0, detail::default_count(dim, 4001, 401, 81)));
  return GridFunction::sample(b, [lo, hi](std::span<const double> x) {
    for (double c : x)
      if (c < lo || c > hi) return kNegInf;
    return 0.0;
  });
}

inline GridFunction indicator_interval(double lo = -1.0, double hi = 1.0, const GridOverride& o = {}) {
  return indicator_box(1, lo, hi, o);
}

/// u(x) = max_k [ (x - m_k)^T Q_k (x - m_k) / 2 + c_k ], f = exp(-u).
/// Q_k has eigenvalues in [0.5, 2] and a random orientation; m_k in [-1.5, 1.5]^n; c_k in [0, 1].
struct LogConcaveMixture {
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> Q;  // row-major n x n
  std::vector<Vec> m;
  std::vector<double> c;

  static LogConcaveMixture make(std::size_t dim, std::uint64_t seed, std::size_t components = 3) {
    detail::require_dim(dim);
    require(components >= 1, ErrorCode::InvalidArgument, "mixture needs at least one component");
    LogConcaveMixture mix;
    mix.dim = dim;
    mix.seed = seed;
    Rng rng(seed);
    for (std::size_t k = 0; k < components; ++k) {
      std::vector<Vec> basis;
      while (basis.size() < dim) {
        Vec v = rng.unit_vector(dim);
        for (const Vec& q : basis) v = axpy(-dot(v, q), q, v);
        const double len = norm(v);
        if (len < 1e-3) continue;
        for (double& x : v) x /= len;
        basis.push_back(std::move(v));
      }
      Vec eig(dim);
      for (double& e : eig) e = rng.uniform(0.5, 2.0);
      std::vector<double> q(dim * dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          for (std::size_t l = 0; l < dim; ++l) q[i * dim + j] += eig[l] * basis[l][i] * basis[l][j];
      mix.Q.push_back(std::move(q));
      Vec mk(dim);
      for (double& x : mk) x = rng.uniform(-1.5, 1.5);
      mix.m.push_back(std::move(mk));
      mix.c.push_back(rng.uniform(0.0, 1.0));
    }
    return mix;
  }

  double potential(std::span<const double> x) const {
    double u = kNegInf;
    for (std::size_t k = 0; k < m.size(); ++k) {
      double quad = 0.0;
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) quad += (x[i] - m[k][i]) * Q[k][i * dim + j] * (x[j] - m[k][j]);
      u = std::max(u, 0.5 * quad + c[k]);
    }
    return u;
  }

  static Box default_box(std::size_t dim) {
    return Box::cube(dim, -12.0, 12.0, detail::default_count(dim, 2401, 241, 41));
  }

  GridFunction sample(const GridOverride& o = {}) const {
    return GridFunction::sample(o.apply(default_box(dim)), [this](std::span<const double> x) { return -potential(x); });
  }
};

inline GridFunction logconcave_mixture(std::size_t dim, std::uint64_t seed, std::size_t components = 3,
                                       const GridOverride& o = {}) {
  return LogConcaveMixture::make(dim, seed, components).sample(o);
}

// ---------------------------------------------------------------------------
// Star bodies

inline AngularGrid default_angular_grid(std::size_t dim) {
  require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "star bodies live in dimension 2 or 3");
  return dim == 2 ? AngularGrid::circle() : AngularGrid::sphere();
}

inline StarBody ball_body(AngularGrid grid, double radius = 1.0) {
  require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  return StarBody::from_radial(std::move(grid), [radius](auto) { return radius; });
}

inline StarBody ellipsoid_body(AngularGrid grid, const Vec& semi_axes) {
  require(semi_axes.size() == grid.dim(), ErrorCode::InvalidArgument, "one semi-axis per dimension");
  for (double a : semi_axes) require(a > 0.0, ErrorCode::InvalidArgument, "semi-axes must be positive");
  return StarBody::from_radial(std::move(grid), [&](std::span<const double> d) {
    double q = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) q += d[i] * d[i] / (semi_axes[i] * semi_axes[i]);
    return 1.0 / std::sqrt(q);
  });
}

/// [-h, h]^n.
inline StarBody cube_body(AngularGrid grid, double half_width = 1.0) {
  require(half_width > 0.0, ErrorCode::InvalidArgument, "half width must be positive");
  return StarBody::from_radial(std::move(grid), [half_width](std::span<const double> d) {
    double m = 0.0;
    for (double c : d) m = std::max(m, std::abs(c));
    return half_width / m;
  });
}

/// {sum |x_i| <= r}.
inline StarBody cross_polytope_body(AngularGrid grid, double r = 1.0) {
  require(r > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  return StarBody::from_radial(std::move(grid), [r](std::span<const double> d) {
    double s = 0.0;
    for (double c : d) s += std::abs(c);
    return r / s;
  });
}

/// rho = 1 + amplitude cos(mode * angle); the angle is the polar angle around
/// the x-axis in 2-D and the angle to the z-axis in 3-D.
inline StarBody cosine_perturbed_body(AngularGrid grid, double amplitude, int mode = 1) {
  require(std::abs(amplitude) < 1.0, ErrorCode::InvalidArgument, "cosine amplitude must lie in (-1, 1)");
  require(mode >= 0, ErrorCode::InvalidArgument, "mode must be non-negative");
  const bool planar = grid.dim() == 2;
  return StarBody::from_radial(std::move(grid), [=](std::span<const double> d) {
    const double ang = planar ? std::atan2(d[1], d[0]) : std::acos(std::clamp(d[2], -1.0, 1.0));
    return 1.0 + amplitude * std::cos(mode * ang);
  });
}

/// rho = exp(amplitude * noise) with noise a seeded, smoothed random series:
/// 2-D sum_{k<=6} (a_k cos k theta + b_k sin k theta) / k^s,
/// 3-D sum_{k<=6} a_k <u_k, theta>^k / k^s with random unit u_k;
/// coefficients uniform in [-1, 1].
struct RandomStar {
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  double smoothness = 2.0;
  double amplitude = 0.25;
  static constexpr int kModes = 6;
  std::vector<double> a, b;
  std::vector<Vec> u;

  static RandomStar make(std::size_t dim, std::uint64_t seed, double smoothness = 2.0, double amplitude = 0.25) {
    require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "star bodies live in dimension 2 or 3");
    require(smoothness >= 0.0, ErrorCode::InvalidArgument, "smoothness must be non-negative");
    require(amplitude >= 0.0 && amplitude <= 1.0, ErrorCode::InvalidArgument, "amplitude must lie in [0, 1]");
    RandomStar r{dim, seed, smoothness, amplitude, {}, {}, {}};
    Rng rng(seed);
    for (int k = 1; k <= kModes; ++k) {
      r.a.push_back(rng.uniform(-1.0, 1.0));
      r.b.push_back(rng.uniform(-1.0, 1.0));
      r.u.push_back(rng.unit_vector(3));
    }
    return r;
  }

  double rho(std::span<const double> d) const {
    double s = 0.0;
    if (dim == 2) {
      const double t = std::atan2(d[1], d[0]);
      for (int k = 1; k <= kModes; ++k)
        s += (a[k - 1] * std::cos(k * t) + b[k - 1] * std::sin(k * t)) / std::pow(k, smoothness);
    } else {
      for (int k = 1; k <= kModes; ++k) s += a[k - 1] * std::pow(dot(u[k - 1], d), k) / std::pow(k, smoothness);
    }
    return std::exp(amplitude * s);
  }

  StarBody body(AngularGrid grid) const {
    require(grid.dim() == dim, ErrorCode::InvalidArgument, "grid dimension does not match the random star");
    return StarBody::from_radial(std::move(grid), [this](std::span<const double> d) { return rho(d); });
  }
};

inline StarBody random_star_body(AngularGrid grid, std::uint64_t seed, double smoothness = 2.0,
                                 double amplitude = 0.25) {
  const std::size_t dim = grid.dim();
  return RandomStar::make(dim, seed, smoothness, amplitude).body(std::move(grid));
}

}  // namespace santalo
