#pragma once

// Sampled non-negative functions on rectangular grids, stored as log-values.
//
// A GridFunction holds log f at the nodes of a uniform Box; f = 0 is encoded
// as -infinity. Integrals over R^n are trapezoidal sums over the box with
// log-sum-exp scaling, so e^{-|x|^2/2}-type integrands never underflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "santalo/error.hpp"

namespace santalo {

using Vec = std::vector<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr std::size_t kMaxDim = 3;
inline constexpr std::size_t kMaxNodes = std::size_t{1} << 24;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec axpy(double t, std::span<const double> x, std::span<const double> y) {
  Vec out(y.begin(), y.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * x[i];
  return out;
}

/// (2*pi)^n, the Gaussian volume-product constant.
inline double two_pi_pow(std::size_t n) { return std::pow(2.0 * kPi, static_cast<double>(n)); }

/// Uniform rectangular grid. Node k on axis a sits at
/// shift[a] + lower[a] + (upper[a] - lower[a]) * k / (counts[a] - 1).
/// Translations only move `shift`, so spacing and quadrature weights of a
/// translated grid are bit-identical to the original.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> counts;
  std::vector<double> shift;

  Box() = default;

  Box(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> n)
      : lower(std::move(lo)), upper(std::move(hi)), counts(std::move(n)), shift(counts.size(), 0.0) {
    validate();
  }

  static Box cube(std::size_t dim, double lo, double hi, std::size_t count) {
    return Box(Vec(dim, lo), Vec(dim, hi), std::vector<std::size_t>(dim, count));
  }

  void validate() const {
    require(!counts.empty() && counts.size() <= kMaxDim, ErrorCode::InvalidArgument,
            "box dimension must be in [1, 3]");
    require(lower.size() == counts.size() && upper.size() == counts.size() &&
                shift.size() == counts.size(),
            ErrorCode::InvalidArgument, "box bounds and counts disagree in dimension");
    std::size_t total = 1;
    for (std::size_t a = 0; a < counts.size(); ++a) {
      require(std::isfinite(lower[a]) && std::isfinite(upper[a]) && lower[a] < upper[a],
              ErrorCode::InvalidArgument, "box axis " + std::to_string(a) + " needs lower < upper");
      require(counts[a] >= 2, ErrorCode::InvalidArgument,
              "box axis " + std::to_string(a) + " needs at least 2 samples");
      require(total <= kMaxNodes / counts[a], ErrorCode::InvalidArgument,
              "grid exceeds 2^24 nodes");
      total *= counts[a];
    }
  }

  std::size_t dim() const { return counts.size(); }

  std::size_t size() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{1}, std::multiplies<>());
  }

  double step(std::size_t a) const { return (upper[a] - lower[a]) / static_cast<double>(counts[a] - 1); }

  double node(std::size_t a, std::size_t k) const {
    return shift[a] + (lower[a] + (upper[a] - lower[a]) * static_cast<double>(k) /
                                      static_cast<double>(counts[a] - 1));
  }

  /// Node coordinate without the translation.
  double local_node(std::size_t a, std::size_t k) const {
    return lower[a] + (upper[a] - lower[a]) * static_cast<double>(k) / static_cast<double>(counts[a] - 1);
  }

  double lo(std::size_t a) const { return node(a, 0); }
  double hi(std::size_t a) const { return node(a, counts[a] - 1); }

  /// Trapezoid weight of node k along axis a.
  double weight(std::size_t a, std::size_t k) const {
    const double h = step(a);
    return (k == 0 || k + 1 == counts[a]) ? 0.5 * h : h;
  }

  Vec axis_nodes(std::size_t a) const {
    Vec out(counts[a]);
    for (std::size_t k = 0; k < counts[a]; ++k) out[k] = node(a, k);
    return out;
  }

  /// Row-major strides; the last axis varies fastest.
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(dim(), 1);
    for (std::size_t a = dim(); a-- > 1;) s[a - 1] = s[a] * counts[a];
    return s;
  }

  Box shifted(std::span<const double> delta) const {
    Box out = *this;
    for (std::size_t a = 0; a < dim(); ++a) out.shift[a] += delta[a];
    return out;
  }

  /// Same shape with the translation folded into the bounds.
  Box flattened() const {
    Vec lo_v(dim()), hi_v(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
      lo_v[a] = lo(a);
      hi_v[a] = hi(a);
    }
    return Box(std::move(lo_v), std::move(hi_v), counts);
  }

  /// True when both boxes have the same nodes up to `tol` (absolute).
  bool same_nodes(const Box& other, double tol = 1e-12) const {
    if (counts != other.counts) return false;
    for (std::size_t a = 0; a < dim(); ++a) {
      const double scale = std::max({1.0, std::abs(lo(a)), std::abs(hi(a))});
      if (std::abs(lo(a) - other.lo(a)) > tol * scale || std::abs(hi(a) - other.hi(a)) > tol * scale)
        return false;
    }
    return true;
  }
};

/// Visits every node in row-major order: fn(flat_index, coordinates).
template <class Fn>
void for_each_node(const Box& box, Fn&& fn) {
  const std::size_t n = box.dim();
  std::array<std::size_t, kMaxDim> idx{};
  std::array<double, kMaxDim> x{};
  for (std::size_t a = 0; a < n; ++a) x[a] = box.node(a, 0);
  const std::size_t total = box.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, std::span<const double>(x.data(), n));
    for (std::size_t a = n; a-- > 0;) {
      if (++idx[a] < box.counts[a]) {
        x[a] = box.node(a, idx[a]);
        break;
      }
      idx[a] = 0;
      x[a] = box.node(a, 0);
    }
  }
}

/// Visits every node with its multi-index and trapezoid weight.
template <class Fn>
void for_each_weighted_node(const Box& box, Fn&& fn) {
  const std::size_t n = box.dim();
  std::array<std::size_t, kMaxDim> idx{};
  std::array<double, kMaxDim> x{};
  std::array<double, kMaxDim> w{};
  for (std::size_t a = 0; a < n; ++a) {
    x[a] = box.node(a, 0);
    w[a] = box.weight(a, 0);
  }
  const std::size_t total = box.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    double weight = 1.0;
    for (std::size_t a = 0; a < n; ++a) weight *= w[a];
    fn(flat, std::span<const std::size_t>(idx.data(), n), std::span<const double>(x.data(), n), weight);
    for (std::size_t a = n; a-- > 0;) {
      if (++idx[a] < box.counts[a]) {
        x[a] = box.node(a, idx[a]);
        w[a] = box.weight(a, idx[a]);
        break;
      }
      idx[a] = 0;
      x[a] = box.node(a, 0);
      w[a] = box.weight(a, 0);
    }
  }
}

struct GridFunction {
  Box box;
  std::vector<double> logvals;

  GridFunction() = default;

  GridFunction(Box b, std::vector<double> lv) : box(std::move(b)), logvals(std::move(lv)) {
    require(logvals.size() == box.size(), ErrorCode::InvalidArgument,
            "logvals length does not match the grid size");
    for (double v : logvals)
      require(!std::isnan(v) && v != kPosInf, ErrorCode::InvalidArgument,
              "logvals must be finite or -infinity");
  }

  /// Samples log f at every node; log_f receives the node coordinates.
  template <class LogF>
  static GridFunction sample(const Box& box, LogF&& log_f) {
    std::vector<double> lv(box.size());
    for_each_node(box, [&](std::size_t i, std::span<const double> x) { lv[i] = log_f(x); });
    return GridFunction(box, std::move(lv));
  }

  std::size_t dim() const { return box.dim(); }

  double max_log() const {
    double m = kNegInf;
    for (double v : logvals) m = std::max(m, v);
    return m;
  }

  bool has_support() const { return max_log() > kNegInf; }

  std::size_t support_size() const {
    return static_cast<std::size_t>(
        std::count_if(logvals.begin(), logvals.end(), [](double v) { return v > kNegInf; }));
  }

  GridFunction scaled_log(double c) const {
    GridFunction out = *this;
    for (double& v : out.logvals) v += c;
    return out;
  }
};

/// log of the trapezoidal integral; -infinity for the zero function.
inline double log_integrate(const GridFunction& f) {
  const double m = f.max_log();
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for_each_weighted_node(f.box, [&](std::size_t i, auto, auto, double w) {
    const double l = f.logvals[i];
    if (l > kNegInf) sum += w * std::exp(l - m);
  });
  return m + std::log(sum);
}

inline double integrate(const GridFunction& f) {
  const double l = log_integrate(f);
  return l == kNegInf ? 0.0 : std::exp(l);
}

namespace detail {

// Mass and first moment in untranslated coordinates, relative to exp(max_log).
struct Moments {
  double peak = kNegInf;
  double mass = 0.0;
  Vec first;
};

inline Moments local_moments(const GridFunction& f) {
  Moments mo;
  mo.peak = f.max_log();
  mo.first.assign(f.dim(), 0.0);
  if (mo.peak == kNegInf) return mo;
  const Box& box = f.box;
  for_each_weighted_node(box, [&](std::size_t i, std::span<const std::size_t> idx, auto, double w) {
    const double l = f.logvals[i];
    if (l == kNegInf) return;
    const double m = w * std::exp(l - mo.peak);
    mo.mass += m;
    for (std::size_t a = 0; a < idx.size(); ++a) mo.first[a] += m * box.local_node(a, idx[a]);
  });
  return mo;
}

}  // namespace detail

inline Vec barycenter(const GridFunction& f) {
  const detail::Moments mo = detail::local_moments(f);
  require(mo.mass > 0.0 && std::isfinite(mo.peak), ErrorCode::ZeroMass,
          "barycenter of a function with zero mass");
  Vec b(f.dim());
  for (std::size_t a = 0; a < f.dim(); ++a) b[a] = f.box.shift[a] + mo.first[a] / mo.mass;
  return b;
}

/// f_z(x) = f(z + x): same values on the box shifted by -z.
inline GridFunction translate(const GridFunction& f, std::span<const double> z) {
  require(z.size() == f.dim(), ErrorCode::InvalidArgument, "translation has wrong dimension");
  Vec minus(z.begin(), z.end());
  for (double& c : minus) c = -c;
  GridFunction out;
  out.box = f.box.shifted(minus);
  out.logvals = f.logvals;
  return out;
}

/// H = {x : <x, normal> = offset}; H+ is the side where <x, normal> >= offset.
struct Hyperplane {
  Vec normal;
  double offset = 0.0;

  Hyperplane() = default;
  Hyperplane(Vec n, double off) : normal(std::move(n)), offset(off) {
    require(!normal.empty(), ErrorCode::InvalidArgument, "hyperplane normal is empty");
    require(std::abs(norm(normal) - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
            "hyperplane normal must have unit length");
  }

  /// Normalizes `direction`; the offset is measured along the unit normal.
  static Hyperplane along(std::span<const double> direction, double offset) {
    const double len = norm(direction);
    require(len > 0.0 && std::isfinite(len), ErrorCode::InvalidArgument, "zero direction");
    Vec n(direction.begin(), direction.end());
    for (double& c : n) c /= len;
    return Hyperplane(std::move(n), offset);
  }

  static Hyperplane axis(std::size_t dim, std::size_t a, double offset) {
    Vec n(dim, 0.0);
    n[a] = 1.0;
    return Hyperplane(std::move(n), offset);
  }

  double signed_distance(std::span<const double> x) const { return dot(x, normal) - offset; }

  Hyperplane shifted(std::span<const double> z) const {
    return Hyperplane(normal, offset - dot(z, normal));
  }
};

namespace detail {

// P(U_1 + ... + U_k <= tau) for independent U_i ~ Uniform[0, w_i]; inclusion-
// exclusion over the box corners. k <= 3.
inline double uniform_sum_cdf(double tau, std::span<const double> w) {
  const std::size_t k = w.size();
  double total = 0.0;
  for (double v : w) total += v;
  if (tau <= 0.0) return 0.0;
  if (tau >= total) return 1.0;
  if (tau > 0.5 * total) return 1.0 - uniform_sum_cdf(total - tau, w);
  double acc = 0.0;
  double prod = 1.0;
  double fact = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    prod *= w[i];
    fact *= static_cast<double>(i + 1);
  }
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    double corner = 0.0;
    int bits = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (std::size_t{1} << i)) {
        corner += w[i];
        ++bits;
      }
    const double r = tau - corner;
    if (r <= 0.0) continue;
    const double term = std::pow(r, static_cast<double>(k));
    acc += (bits % 2 == 0) ? term : -term;
  }
  return std::clamp(acc / (fact * prod), 0.0, 1.0);
}

// Each node owns its trapezoid cell; a half-space takes the volume fraction of
// the cell lying on its side. Cell widths below 1e-3 of the projected extent
// are collapsed onto their midpoint.
struct ProjectedCell {
  double base = 0.0;  // smallest <u, normal> over the cell
  std::array<double, kMaxDim> widths{};
  std::size_t nwidths = 0;
  double mass = 0.0;  // trapezoid weight times exp(logval - peak)
  std::size_t index = 0;

  double upper_fraction(double offset) const {
    const double tau = offset - base;
    if (nwidths == 0) return tau <= 0.0 ? 1.0 : 0.0;  // zero-width cell: ties go to H+
    return 1.0 - uniform_sum_cdf(tau, std::span<const double>(widths.data(), nwidths));
  }

  double extent() const {
    double s = 0.0;
    for (std::size_t i = 0; i < nwidths; ++i) s += widths[i];
    return s;
  }
};

struct ProjectedCells {
  double peak = kNegInf;
  double total = 0.0;
  std::vector<ProjectedCell> cells;

  ProjectedCells(const GridFunction& f, std::span<const double> normal) {
    peak = f.max_log();
    if (peak == kNegInf) return;
    const Box& box = f.box;
    const std::size_t n = box.dim();
    for_each_weighted_node(box, [&](std::size_t i, std::span<const std::size_t> idx,
                                    std::span<const double> x, double w) {
      const double l = f.logvals[i];
      if (l == kNegInf) return;
      ProjectedCell c;
      c.index = i;
      c.mass = w * std::exp(l - peak);
      double base = dot(x, normal);
      std::array<double, kMaxDim> raw{};
      double extent = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double h = box.step(a);
        const double below = idx[a] == 0 ? 0.0 : 0.5 * h;
        const double above = idx[a] + 1 == box.counts[a] ? 0.0 : 0.5 * h;
        const double na = normal[a];
        base += na >= 0.0 ? -na * below : na * above;
        raw[a] = std::abs(na) * (below + above);
        extent += raw[a];
      }
      for (std::size_t a = 0; a < n; ++a) {
        if (raw[a] > 1e-3 * extent) {
          c.widths[c.nwidths++] = raw[a];
        } else {
          base += 0.5 * raw[a];
        }
      }
      c.base = base;
      total += c.mass;
      cells.push_back(c);
    });
  }

  double upper_mass(double offset) const {
    double s = 0.0;
    for (const auto& c : cells) s += c.mass * c.upper_fraction(offset);
    return s;
  }

  double lambda(double offset) const { return upper_mass(offset) / total; }
};

}  // namespace detail

struct HalfspaceStats {
  double lambda = 0.0;
  std::optional<Vec> b_plus;
  std::optional<Vec> b_minus;
  double mass = 0.0;  // integrate(f)
};

/// Mass fraction and conditional barycenters of f on the two sides of H.
inline HalfspaceStats halfspace_stats(const GridFunction& f, const Hyperplane& h) {
  require(h.normal.size() == f.dim(), ErrorCode::InvalidArgument, "hyperplane has wrong dimension");
  const detail::ProjectedCells pc(f, h.normal);
  require(pc.total > 0.0, ErrorCode::ZeroMass, "half-space statistics of a zero function");
  const std::size_t n = f.dim();
  const auto strides = f.box.strides();
  double up = 0.0;
  double down = 0.0;
  Vec mu(n, 0.0);
  Vec md(n, 0.0);
  for (const auto& c : pc.cells) {
    const double frac = c.upper_fraction(h.offset);
    const double mp = c.mass * frac;
    const double mm = c.mass - mp;
    up += mp;
    down += mm;
    std::size_t rem = c.index;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t k = rem / strides[a];
      rem %= strides[a];
      const double x = f.box.local_node(a, k);
      mu[a] += mp * x;
      md[a] += mm * x;
    }
  }
  HalfspaceStats st;
  st.mass = std::exp(pc.peak) * pc.total;
  st.lambda = std::clamp(up / pc.total, 0.0, 1.0);
  const double tiny = 1e-14 * pc.total;
  if (up > tiny) {
    Vec b(n);
    for (std::size_t a = 0; a < n; ++a) b[a] = f.box.shift[a] + mu[a] / up;
    st.b_plus = std::move(b);
  }
  if (down > tiny) {
    Vec b(n);
    for (std::size_t a = 0; a < n; ++a) b[a] = f.box.shift[a] + md[a] / down;
    st.b_minus = std::move(b);
  }
  return st;
}

/// Offset t with lambda({normal, t}) within 1e-4 of lambda_target, by bisection.
inline double find_quantile_offset(const GridFunction& f, std::span<const double> normal,
                                   double lambda_target) {
  require(lambda_target > 0.0 && lambda_target < 1.0, ErrorCode::InvalidArgument,
          "lambda_target must lie in (0, 1)");
  require(normal.size() == f.dim() && std::abs(norm(normal) - 1.0) <= 1e-12,
          ErrorCode::InvalidArgument, "quantile direction must be a unit vector of the grid dimension");
  const detail::ProjectedCells pc(f, normal);
  require(pc.total > 0.0, ErrorCode::ZeroMass, "quantile of a zero function");
  double lo = kPosInf;
  double hi = kNegInf;
  for (const auto& c : pc.cells) {
    lo = std::min(lo, c.base);
    hi = std::max(hi, c.base + c.extent());
  }
  // lambda(lo) = 1 and lambda(hi) = 0; lambda decreases in the offset.
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pc.lambda(mid) > lambda_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  const double achieved = pc.lambda(t);
  require(std::abs(achieved - lambda_target) <= 1e-4, ErrorCode::NotBracketed,
          "mass fraction " + std::to_string(lambda_target) + " is not attainable (closest " +
              std::to_string(achieved) + ")");
  return t;
}

}  // namespace santalo
