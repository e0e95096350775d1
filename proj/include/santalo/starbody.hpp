#pragma once

// Star bodies S = {r theta : 0 <= r <= rho(theta)} sampled on angular grids.
//
// Between sampled directions the gauge is linear on each angular cone, so the
// interpolated boundary is the polygon (2-D) or polyhedron (3-D) through the
// points rho_k theta_k. Its support function is then exactly the maximum over
// the sampled points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "santalo/error.hpp"
#include "santalo/grid.hpp"
#include "santalo/report.hpp"
#include "santalo/rng.hpp"

namespace santalo {

struct BallConstants {
  std::size_t n = 0;
  double v_n = 0.0;  // volume of the Euclidean unit ball
  double c_n = 0.0;  // (2 pi)^{n/2} / v_n
};

inline BallConstants ball_constants(std::size_t n) {
  require(n >= 1, ErrorCode::InvalidArgument, "ball constants need n >= 1");
  double v = 0.0;
  switch (n) {
    case 1: v = 2.0; break;
    case 2: v = kPi; break;
    case 3: v = 4.0 * kPi / 3.0; break;
    default: v = std::pow(kPi, 0.5 * static_cast<double>(n)) / std::tgamma(0.5 * static_cast<double>(n) + 1.0);
  }
  return {n, v, std::pow(2.0 * kPi, 0.5 * static_cast<double>(n)) / v};
}

/// Directions on the unit circle or sphere with quadrature weights.
///
/// 2-D: M angles 2 pi k / M. 3-D: latitude-longitude grid with polar angles
/// pi (i + 1/2) / n_lat and longitudes 2 pi j / n_lon; weights are the exact
/// areas of the latitude bands split evenly in longitude. The two poles are
/// not grid nodes; their radial value is the mean of the adjacent ring.
class AngularGrid {
 public:
  /// Indices size() and size() + 1 denote the north and south pole.
  struct Cone {
    std::array<std::size_t, 3> node{};
    std::array<double, 3> coef{};
    std::size_t count = 0;
  };

  static AngularGrid circle(std::size_t m = 2048) {
    require(m >= 8, ErrorCode::InvalidArgument, "circle grid needs at least 8 angles");
    AngularGrid g;
    g.dim_ = 2;
    g.n_lat_ = 1;
    g.n_lon_ = m;
    g.dirs_.resize(2 * m);
    g.weights_.assign(m, 2.0 * kPi / static_cast<double>(m));
    for (std::size_t k = 0; k < m; ++k) {
      const double a = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
      g.dirs_[2 * k] = std::cos(a);
      g.dirs_[2 * k + 1] = std::sin(a);
    }
    return g;
  }

  static AngularGrid sphere(std::size_t n_lat = 256, std::size_t n_lon = 512) {
    require(n_lat >= 4 && n_lon >= 8, ErrorCode::InvalidArgument, "sphere grid needs n_lat >= 4, n_lon >= 8");
    AngularGrid g;
    g.dim_ = 3;
    g.n_lat_ = n_lat;
    g.n_lon_ = n_lon;
    g.dirs_.resize(3 * n_lat * n_lon);
    g.weights_.resize(n_lat * n_lon);
    const double dphi = kPi / static_cast<double>(n_lat);
    const double dpsi = 2.0 * kPi / static_cast<double>(n_lon);
    for (std::size_t i = 0; i < n_lat; ++i) {
      const double phi = dphi * (static_cast<double>(i) + 0.5);
      const double band = std::cos(dphi * static_cast<double>(i)) - std::cos(dphi * static_cast<double>(i + 1));
      for (std::size_t j = 0; j < n_lon; ++j) {
        const double psi = dpsi * static_cast<double>(j);
        const std::size_t k = i * n_lon + j;
        g.dirs_[3 * k] = std::sin(phi) * std::cos(psi);
        g.dirs_[3 * k + 1] = std::sin(phi) * std::sin(psi);
        g.dirs_[3 * k + 2] = std::cos(phi);
        g.weights_[k] = band * dpsi;
      }
    }
    return g;
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::size_t n_lat() const { return n_lat_; }
  std::size_t n_lon() const { return n_lon_; }
  double weight(std::size_t k) const { return weights_[k]; }

  std::span<const double> direction(std::size_t k) const {
    if (k >= size()) return dim_ == 3 ? std::span<const double>(k == size() ? kNorth : kSouth) : std::span<const double>{};
    return {dirs_.data() + dim_ * k, dim_};
  }

  std::vector<std::size_t> counts() const {
    if (dim_ == 2) return {n_lon_};
    return {n_lat_, n_lon_};
  }

  bool operator==(const AngularGrid& o) const {
    return dim_ == o.dim_ && n_lat_ == o.n_lat_ && n_lon_ == o.n_lon_;
  }

  /// Cone of grid directions containing x, with x = sum coef_i direction(node_i).
  Cone locate(std::span<const double> x) const {
    Cone c;
    if (dim_ == 2) {
      const std::size_t m = n_lon_;
      double ang = std::atan2(x[1], x[0]);
      if (ang < 0.0) ang += 2.0 * kPi;
      std::size_t k = static_cast<std::size_t>(ang / (2.0 * kPi) * static_cast<double>(m));
      if (k >= m) k = m - 1;
      const std::size_t k1 = (k + 1) % m;
      const auto a = direction(k);
      const auto b = direction(k1);
      const double det = a[0] * b[1] - a[1] * b[0];
      c.node = {k, k1, 0};
      c.coef = {(x[0] * b[1] - x[1] * b[0]) / det, (a[0] * x[1] - a[1] * x[0]) / det, 0.0};
      c.count = 2;
      return c;
    }
    const double r = norm(x);
    const double phi = std::acos(std::clamp(x[2] / r, -1.0, 1.0));
    double psi = std::atan2(x[1], x[0]);
    if (psi < 0.0) psi += 2.0 * kPi;
    const double s = phi * static_cast<double>(n_lat_) / kPi - 0.5;
    const double p = psi * static_cast<double>(n_lon_) / (2.0 * kPi);
    std::size_t j0 = static_cast<std::size_t>(p);
    if (j0 >= n_lon_) j0 = n_lon_ - 1;
    const std::size_t j1 = (j0 + 1) % n_lon_;
    auto id = [&](std::size_t i, std::size_t j) { return i * n_lon_ + j; };
    std::array<std::size_t, 3> tri;
    if (s < 0.0) {
      tri = {size(), id(0, j0), id(0, j1)};
    } else if (s >= static_cast<double>(n_lat_ - 1)) {
      tri = {size() + 1, id(n_lat_ - 1, j0), id(n_lat_ - 1, j1)};
    } else {
      const std::size_t i0 = static_cast<std::size_t>(s);
      const double fs = s - static_cast<double>(i0);
      const double fp = p - static_cast<double>(j0);
      if (fp >= fs)
        tri = {id(i0, j0), id(i0, j1), id(i0 + 1, j1)};
      else
        tri = {id(i0, j0), id(i0 + 1, j0), id(i0 + 1, j1)};
    }
    const auto a = direction(tri[0]);
    const auto b = direction(tri[1]);
    const auto d = direction(tri[2]);
    auto triple = [](std::span<const double> u, std::span<const double> v, std::span<const double> w) {
      return u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
             u[2] * (v[0] * w[1] - v[1] * w[0]);
    };
    const double det = triple(a, b, d);
    c.node = tri;
    c.coef = {triple(x, b, d) / det, triple(a, x, d) / det, triple(a, b, x) / det};
    c.count = 3;
    return c;
  }

 private:
  static constexpr std::array<double, 3> kNorth{0.0, 0.0, 1.0};
  static constexpr std::array<double, 3> kSouth{0.0, 0.0, -1.0};

  std::size_t dim_ = 0;
  std::size_t n_lat_ = 0;
  std::size_t n_lon_ = 0;
  std::vector<double> dirs_;
  std::vector<double> weights_;
};

class StarBody {
 public:
  StarBody(AngularGrid grid, std::vector<double> rho) : grid_(std::move(grid)), rho_(std::move(rho)) {
    require(grid_.dim() == 2 || grid_.dim() == 3, ErrorCode::InvalidArgument, "star bodies live in dimension 2 or 3");
    require(rho_.size() == grid_.size(), ErrorCode::InvalidArgument,
            "rho has " + std::to_string(rho_.size()) + " entries, grid has " + std::to_string(grid_.size()));
    for (double r : rho_)
      require(std::isfinite(r) && r > 0.0, ErrorCode::InvalidArgument, "radial function must be finite and positive");
    if (grid_.dim() == 3) {
      const std::size_t m = grid_.n_lon();
      double north = 0.0, south = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        north += rho_[j];
        south += rho_[(grid_.n_lat() - 1) * m + j];
      }
      poles_ = {north / static_cast<double>(m), south / static_cast<double>(m)};
    }
  }

  /// Samples rho_of(direction) at every grid direction.
  template <class Fn>
  static StarBody from_radial(AngularGrid grid, Fn&& rho_of) {
    std::vector<double> rho(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) rho[k] = rho_of(grid.direction(k));
    return StarBody(std::move(grid), std::move(rho));
  }

  std::size_t dim() const { return grid_.dim(); }
  const AngularGrid& grid() const { return grid_; }
  const std::vector<double>& rho() const { return rho_; }

  /// Radial value at a grid node or at a pole index.
  double node_rho(std::size_t k) const {
    if (k < rho_.size()) return rho_[k];
    return poles_[k - rho_.size()];
  }

  double rho_max() const {
    double m = *std::max_element(rho_.begin(), rho_.end());
    if (dim() == 3) m = std::max({m, poles_[0], poles_[1]});
    return m;
  }

  StarBody scaled(double c) const {
    require(c > 0.0, ErrorCode::InvalidArgument, "scale factor must be positive");
    std::vector<double> r = rho_;
    for (double& v : r) v *= c;
    return StarBody(grid_, std::move(r));
  }

 private:
  AngularGrid grid_;
  std::vector<double> rho_;
  std::array<double, 2> poles_{0.0, 0.0};
};

/// N_S(x) = inf{r > 0 : x in rS}.
inline double gauge_eval(const StarBody& s, std::span<const double> x) {
  require(x.size() == s.dim(), ErrorCode::InvalidArgument, "point dimension does not match the body");
  bool zero = true;
  for (double c : x) zero = zero && c == 0.0;
  if (zero) return 0.0;
  const AngularGrid::Cone c = s.grid().locate(x);
  double g = 0.0;
  for (std::size_t i = 0; i < c.count; ++i) g += c.coef[i] / s.node_rho(c.node[i]);
  return g;
}

/// Radial function of S at a direction, consistent with gauge_eval.
inline double radial_eval(const StarBody& s, std::span<const double> direction) {
  return norm(direction) / gauge_eval(s, direction);
}

namespace detail {

struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> pts;  // rho_k theta_k, poles appended in 3-D
  std::size_t size() const { return pts.size() / dim; }
  double dot_with(std::size_t k, std::span<const double> e) const {
    double s = 0.0;
    for (std::size_t a = 0; a < dim; ++a) s += pts[dim * k + a] * e[a];
    return s;
  }
};

inline PointCloud boundary_points(const StarBody& s) {
  PointCloud pc;
  pc.dim = s.dim();
  const std::size_t total = s.grid().size() + (s.dim() == 3 ? 2 : 0);
  pc.pts.resize(total * pc.dim);
  for (std::size_t k = 0; k < total; ++k) {
    const auto d = s.grid().direction(k);
    for (std::size_t a = 0; a < pc.dim; ++a) pc.pts[pc.dim * k + a] = s.node_rho(k) * d[a];
  }
  return pc;
}

/// max_k <p_k, e> for many e. Points are grouped into index patches with
/// bounding spheres (tiles, then patches of tiles) to prune the scan.
class SupportEvaluator {
 public:
  explicit SupportEvaluator(const StarBody& s) : pc_(boundary_points(s)) {
    const std::size_t rows = s.dim() == 2 ? 1 : s.grid().n_lat();
    const std::size_t cols = s.grid().n_lon();
    const std::size_t tr = s.dim() == 2 ? 1 : 8, tc = s.dim() == 2 ? 64 : 8;
    const std::size_t tile_rows = (rows + tr - 1) / tr, tile_cols = (cols + tc - 1) / tc;
    for (std::size_t bi = 0; bi < tile_rows; ++bi)
      for (std::size_t bj = 0; bj < tile_cols; ++bj) {
        std::vector<std::size_t> idx;
        for (std::size_t i = bi * tr; i < std::min(rows, (bi + 1) * tr); ++i)
          for (std::size_t j = bj * tc; j < std::min(cols, (bj + 1) * tc); ++j) idx.push_back(i * cols + j);
        tiles_.push_back(make_group(std::move(idx)));
      }
    for (std::size_t k = rows * cols; k < pc_.size(); ++k) tiles_.push_back(make_group({k}));
    const std::size_t sr = s.dim() == 2 ? 1 : 8, sc = 8;
    for (std::size_t si = 0; si < tile_rows; si += sr)
      for (std::size_t sj = 0; sj < tile_cols; sj += sc) {
        std::vector<std::size_t> members, pts;
        for (std::size_t bi = si; bi < std::min(tile_rows, si + sr); ++bi)
          for (std::size_t bj = sj; bj < std::min(tile_cols, sj + sc); ++bj) {
            const std::size_t t = bi * tile_cols + bj;
            members.push_back(t);
            pts.insert(pts.end(), tiles_[t].idx.begin(), tiles_[t].idx.end());
          }
        Group g = make_group(std::move(pts));
        g.idx = std::move(members);
        supers_.push_back(std::move(g));
      }
    for (std::size_t t = tile_rows * tile_cols; t < tiles_.size(); ++t) {
      Group g = tiles_[t];
      g.idx = {t};
      supers_.push_back(std::move(g));
    }
  }

  std::size_t size() const { return pc_.size(); }

  /// Support value and the index attaining it; `hint` seeds the lower bound.
  std::pair<double, std::size_t> operator()(std::span<const double> e, std::size_t hint = 0) const {
    std::size_t best_k = hint < pc_.size() ? hint : 0;
    double best = pc_.dot_with(best_k, e);
    const double elen = norm(e);
    for (const Group& sg : supers_) {
      if (dot(sg.center, e) + sg.radius * elen < best) continue;
      for (std::size_t t : sg.idx) {
        const Group& tile = tiles_[t];
        if (dot(tile.center, e) + tile.radius * elen < best) continue;
        for (std::size_t k : tile.idx) {
          const double v = pc_.dot_with(k, e);
          if (v > best) {
            best = v;
            best_k = k;
          }
        }
      }
    }
    return {best, best_k};
  }

  std::span<const double> point(std::size_t k) const { return {pc_.pts.data() + pc_.dim * k, pc_.dim}; }

 private:
  struct Group {
    std::vector<std::size_t> idx;
    Vec center;
    double radius = 0.0;
  };

  Group make_group(std::vector<std::size_t> idx) const {
    Group g;
    g.center.assign(pc_.dim, 0.0);
    for (std::size_t k : idx)
      for (std::size_t a = 0; a < pc_.dim; ++a) g.center[a] += pc_.pts[pc_.dim * k + a];
    for (double& v : g.center) v /= static_cast<double>(idx.size());
    for (std::size_t k : idx) {
      double d2 = 0.0;
      for (std::size_t a = 0; a < pc_.dim; ++a) {
        const double d = pc_.pts[pc_.dim * k + a] - g.center[a];
        d2 += d * d;
      }
      g.radius = std::max(g.radius, std::sqrt(d2));
    }
    g.radius = g.radius * (1.0 + 1e-12) + 1e-300;
    g.idx = std::move(idx);
    return g;
  }

  PointCloud pc_;
  std::vector<Group> tiles_;
  std::vector<Group> supers_;
};

}  // namespace detail

/// Support function h_S(e) = max over boundary points of <p, e>.
inline double support_eval(const StarBody& s, std::span<const double> e) {
  return detail::SupportEvaluator(s)(e).first;
}

/// S° on the same grid: rho°(eta) = 1 / h_S(eta).
inline StarBody polar_body(const StarBody& s) {
  const detail::SupportEvaluator sup(s);
  const AngularGrid& g = s.grid();
  std::vector<double> rho(g.size());
  std::size_t hint = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto [h, arg] = sup(g.direction(k), hint);
    require(h > 0.0, ErrorCode::Unbounded, "support function is not positive; the polar body is unbounded");
    hint = arg;
    rho[k] = 1.0 / h;
  }
  return StarBody(g, std::move(rho));
}

/// (1/n) * integral over the sphere of rho^n.
inline double volume(const StarBody& s) {
  const double n = static_cast<double>(s.dim());
  double acc = 0.0;
  for (std::size_t k = 0; k < s.grid().size(); ++k) acc += s.grid().weight(k) * std::pow(s.rho()[k], n);
  return acc / n;
}

/// vol(S)^{-1} * integral of theta rho^{n+1} / (n+1).
inline Vec centroid(const StarBody& s) {
  const std::size_t n = s.dim();
  Vec m(n, 0.0);
  for (std::size_t k = 0; k < s.grid().size(); ++k) {
    const double w = s.grid().weight(k) * std::pow(s.rho()[k], static_cast<double>(n + 1));
    const auto d = s.grid().direction(k);
    for (std::size_t a = 0; a < n; ++a) m[a] += w * d[a];
  }
  const double v = volume(s);
  for (double& c : m) c /= (static_cast<double>(n) + 1.0) * v;
  return m;
}

/// Radial function of S about the point `origin`, sampled on S's grid.
/// Each ray from `origin` is cut at its first crossing of the boundary.
inline StarBody rederive_about(const StarBody& s, std::span<const double> origin, std::size_t scan_steps = 128) {
  const std::size_t n = s.dim();
  require(gauge_eval(s, origin) < 1.0, ErrorCode::CentroidNotInterior, "new origin lies outside the body");
  const double t_max = 2.0 * (s.rho_max() + norm(origin));
  const double dt = t_max / static_cast<double>(scan_steps);
  const AngularGrid& g = s.grid();
  std::vector<double> rho(g.size());
  Vec p(n);
  auto outside = [&](std::span<const double> d, double t) {
    for (std::size_t a = 0; a < n; ++a) p[a] = origin[a] + t * d[a];
    return gauge_eval(s, p) >= 1.0;
  };
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto d = g.direction(k);
    double lo = 0.0, hi = t_max;
    for (std::size_t i = 1; i <= scan_steps; ++i) {
      const double t = dt * static_cast<double>(i);
      if (outside(d, t)) {
        hi = t;
        break;
      }
      lo = t;
    }
    for (int it = 0; it < 80 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (outside(d, mid) ? hi : lo) = mid;
    }
    rho[k] = 0.5 * (lo + hi);
  }
  return StarBody(g, std::move(rho));
}

struct RecenteredBody {
  StarBody body;
  Vec shift;  // the new origin, in the coordinates of the input body
  int iterations = 0;
  double residual = 0.0;  // |centroid(body)|
};

inline constexpr double kCentroidTolerance = 1e-6;

/// Translates S so its centroid is at 0, re-deriving rho from the input body
/// about the accumulated shift on every iteration.
inline RecenteredBody recenter_body(const StarBody& s, int max_iterations = 5, double tol = 1e-8) {
  const std::size_t n = s.dim();
  Vec shift(n, 0.0);
  Vec c = centroid(s);
  RecenteredBody out{s, shift, 0, norm(c)};
  while (out.residual > tol && out.iterations < max_iterations) {
    Vec next = axpy(1.0, c, shift);
    require(gauge_eval(s, next) < 1.0, ErrorCode::CentroidNotInterior,
            "centroid " + format_vector(next) + " is not interior to the body");
    shift = std::move(next);
    out.body = rederive_about(s, shift);
    out.shift = shift;
    ++out.iterations;
    c = centroid(out.body);
    out.residual = norm(c);
  }
  return out;
}

/// Cube [-6 rho_max, 6 rho_max]^n; default counts 401 (2-D), 81 (3-D).
inline Box default_body_box(const StarBody& s, std::optional<std::size_t> count = std::nullopt) {
  const double r = 6.0 * s.rho_max();
  return Box::cube(s.dim(), -r, r, count.value_or(s.dim() == 2 ? 401 : 81));
}

/// exp(-N_S(x)^2 / 2) sampled on box.
inline GridFunction phi_of_body(const StarBody& s, const Box& box) {
  require(box.dim() == s.dim(), ErrorCode::InvalidArgument, "box dimension does not match the body");
  double boundary_min = kPosInf;
  std::vector<double> lv(box.size());
  const auto strides = box.strides();
  for_each_node(box, [&](std::size_t i, std::span<const double> x) {
    const double g = gauge_eval(s, x);
    lv[i] = -0.5 * g * g;
    bool on_face = false;
    for (std::size_t a = 0; a < box.dim(); ++a) {
      const std::size_t k = (i / strides[a]) % box.counts[a];
      on_face = on_face || k == 0 || k + 1 == box.counts[a];
    }
    if (on_face) boundary_min = std::min(boundary_min, g);
  });
  require(boundary_min >= 5.0, ErrorCode::BoxTooSmall,
          "gauge on the box boundary drops to " + format_number(boundary_min) + " (< 5)");
  return GridFunction(box, std::move(lv));
}

inline GridFunction phi_of_body(const StarBody& s) { return phi_of_body(s, default_body_box(s)); }

inline constexpr double kIdentityTolerance = 1e-2;
inline constexpr double kCorollaryTolerance = 1e-2;

/// Two-sided check of int phi_S = c_n vol(S).
inline VerificationReport verify_cn_identity(const StarBody& s, std::optional<Box> box = std::nullopt) {
  const Box b = box.value_or(default_body_box(s));
  const GridFunction phi = phi_of_body(s, b);
  const BallConstants bc = ball_constants(s.dim());
  VerificationReport r;
  r.theorem = Theorem::Corollary;
  r.product = integrate(phi);
  r.bound = bc.c_n * volume(s);
  r.margin = r.bound - r.product;
  const double rel = std::abs(r.product - r.bound) / r.bound;
  r.passed = rel <= kIdentityTolerance;
  r.grid_meta.add("phi", b);
  r.flag("identity: int phi_S = c_n vol(S), two-sided, relative error " + format_number(rel));
  return r;
}

struct LutwakCheck {
  RecenteredBody recentered;
  StarBody polar;
  VerificationReport volume_route;
  VerificationReport functional_route;
  double premise_margin = kNegInf;  // max (<x,y> - N_S(x) N_S°(y)) / (|x||y|)
  double amgm_margin = kNegInf;     // max N_S N_S° - (N_S^2 + N_S°^2) / 2, relative
  bool passed() const { return volume_route.passed && functional_route.passed; }
};

inline constexpr std::uint64_t kPremiseSeed = 0x4C757477ULL;
inline constexpr double kPremiseMargin = 1e-6;

/// Recenters S and bounds vol(S) vol(S°) by v_n^2 directly and through
/// int phi_S int phi_S° <= (2 pi)^n, checking the pointwise premise on
/// seeded pairs. Half the pairs are extremal: x is the sampled boundary
/// point maximizing <., y>.
inline LutwakCheck verify_lutwak(const StarBody& s, std::size_t pairs = 100'000, std::uint64_t seed = kPremiseSeed) {
  RecenteredBody rc = recenter_body(s);
  const StarBody& body = rc.body;
  StarBody pol = polar_body(body);
  const std::size_t n = body.dim();
  const BallConstants bc = ball_constants(n);

  Rng rng(seed);
  const detail::SupportEvaluator sup(body);
  double premise = kNegInf, amgm = kNegInf;
  for (std::size_t p = 0; p < pairs; ++p) {
    Vec y = rng.unit_vector(n);
    for (double& c : y) c *= rng.uniform(0.25, 4.0);
    Vec x;
    if (p % 2 == 0) {
      x = rng.unit_vector(n);
    } else {
      const auto pt = sup.point(sup(y).second);
      x.assign(pt.begin(), pt.end());
    }
    const double scale = rng.uniform(0.25, 4.0);
    for (double& c : x) c *= scale;
    const double nx = gauge_eval(body, x);
    const double ny = gauge_eval(pol, y);
    premise = std::max(premise, (dot(x, y) - nx * ny) / (norm(x) * norm(y)));
    const double am = 0.5 * (nx * nx + ny * ny);
    amgm = std::max(amgm, (nx * ny - am) / std::max(am, 1e-300));
  }

  const bool premise_ok = premise <= kPremiseMargin && amgm <= 1e-12;
  auto decorate = [&](VerificationReport& r) {
    r.flag("recentered_by=" + format_vector(rc.shift) + " iterations=" + std::to_string(rc.iterations) +
           " residual=" + format_number(rc.residual));
    if (rc.residual > kCentroidTolerance) {
      r.flag("centroid residual above tolerance");
      r.passed = false;
    }
    r.flag("premise <x,y> <= N_S(x) N_S°(y) on " + std::to_string(pairs) + " pairs: max margin " +
           format_number(premise));
    r.flag("am-gm step: max excess " + format_number(amgm));
    if (!premise_ok) {
      r.flag("premise violated");
      r.passed = false;
    }
    r.flag("polar by discrete support maximum");
  };

  const double vs = volume(body), vp = volume(pol);
  LutwakCheck out{std::move(rc), std::move(pol), {}, {}, premise, amgm};
  out.volume_route = make_bound_report(Theorem::Corollary, vs * vp, bc.v_n * bc.v_n, kCorollaryTolerance);
  out.volume_route.flag("route: volumes");
  decorate(out.volume_route);

  const Box bs = default_body_box(out.recentered.body);
  const Box bp = default_body_box(out.polar);
  const double is = integrate(phi_of_body(out.recentered.body, bs));
  const double ip = integrate(phi_of_body(out.polar, bp));
  out.functional_route = make_bound_report(Theorem::Corollary, is * ip, two_pi_pow(n), kCorollaryTolerance);
  out.functional_route.grid_meta.add("phi_S", bs);
  out.functional_route.grid_meta.add("phi_polar", bp);
  out.functional_route.flag("route: functional");
  decorate(out.functional_route);
  return out;
}

}  // namespace santalo
