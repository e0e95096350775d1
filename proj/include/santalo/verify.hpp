#pragma once

// Theorem-level verifiers for functional volume products.
//
// Every verifier instantiates the largest admissible partner g = (f_z)°, so a
// bound checked for it holds for every g satisfying the duality premise with
// the same f and z.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "santalo/error.hpp"
#include "santalo/grid.hpp"
#include "santalo/polar.hpp"
#include "santalo/report.hpp"

namespace santalo {

inline constexpr double kBoundTolerance = 3e-2;
inline constexpr double kBarycenterTolerance = 1e-6;
inline constexpr double kLemmaTolerance = 1e-3;
inline constexpr double kPremiseTolerance = 1e-9;

struct VerifyOptions {
  std::optional<Box> polar_box;  // explicit grid for f°; otherwise a covering box
  CoverOptions cover;
  TransformMethod method = TransformMethod::FastLLT;
};

namespace detail {

struct PolarEval {
  GridFunction g;
  bool truncated = false;
};

inline PolarEval polar_for(const GridFunction& f, const VerifyOptions& opt) {
  if (opt.polar_box) return {polar_function(f, *opt.polar_box, opt.method).output, false};
  CoveredTransform c = polar_function_covering(f, opt.cover, opt.method);
  return {std::move(c.transform.output), c.truncated};
}

inline void require_mass(const GridFunction& f) {
  require(integrate(f) > 0.0, ErrorCode::ZeroMass, "function has zero mass");
}

}  // namespace detail

/// integrate(f) * integrate(f°) with f° sampled on out_box.
inline double santalo_product(const GridFunction& f, const Box& out_box) {
  require(f.has_support(), ErrorCode::EmptySupport, "function has empty support");
  detail::require_mass(f);
  return integrate(f) * integrate(polar_function(f, out_box).output);
}

/// Recenters f at its barycenter and bounds int f * int f° by (2 pi)^n.
inline VerificationReport verify_thm2(const GridFunction& f, const VerifyOptions& opt = {}) {
  detail::require_mass(f);
  const Vec b = barycenter(f);
  const GridFunction fc = translate(f, b);
  const detail::PolarEval pol = detail::polar_for(fc, opt);
  VerificationReport r = make_bound_report(Theorem::Thm2, integrate(f) * integrate(pol.g),
                                           two_pi_pow(f.dim()), kBoundTolerance);
  r.grid_meta.add("f", fc.box);
  r.grid_meta.add("polar", pol.g.box);
  r.flag("recentered_by=" + format_vector(b));
  if (pol.truncated) r.flag("truncation: polar box did not cover the tail");
  return r;
}

/// Hyperplane split of a density and the point z of the two-barycenter line on H.
struct SplitData {
  Hyperplane hyperplane;
  double lambda = 0.0;
  Vec b_plus;
  Vec b_minus;
  Vec z;
  Vec v;                   // (b_plus - z) / <b_plus - z, normal>
  std::vector<Vec> frame;  // orthonormal, frame.back() == normal
};

/// Orthonormal basis whose last vector is `normal`.
inline std::vector<Vec> frame_with_last(std::span<const double> normal) {
  const std::size_t n = normal.size();
  std::vector<Vec> basis;
  std::vector<bool> used(n, false);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    Vec best;
    double best_norm = -1.0;
    std::size_t best_axis = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (used[a]) continue;
      Vec e(n, 0.0);
      e[a] = 1.0;
      Vec r = axpy(-dot(e, normal), normal, e);
      for (const auto& q : basis) r = axpy(-dot(r, q), q, r);
      const double len = norm(r);
      if (len > best_norm) {
        best_norm = len;
        best = std::move(r);
        best_axis = a;
      }
    }
    used[best_axis] = true;
    for (double& c : best) c /= best_norm;
    basis.push_back(std::move(best));
  }
  basis.emplace_back(normal.begin(), normal.end());
  return basis;
}

inline SplitData construct_split(const GridFunction& f, const Hyperplane& h) {
  const HalfspaceStats st = halfspace_stats(f, h);
  require(st.lambda > 1e-12 && st.lambda < 1.0 - 1e-12 && st.b_plus && st.b_minus,
          ErrorCode::DegenerateSplit, "hyperplane leaves one side without mass (lambda = " +
                                          std::to_string(st.lambda) + ")");
  const double dp = h.signed_distance(*st.b_plus);
  const double dm = h.signed_distance(*st.b_minus);
  require(dp > 0.0 && dm < 0.0, ErrorCode::NoIntersection,
          "conditional barycenters are not strictly on their sides of H");
  SplitData s;
  s.hyperplane = h;
  s.lambda = st.lambda;
  s.b_plus = *st.b_plus;
  s.b_minus = *st.b_minus;
  Vec diff = axpy(-1.0, s.b_minus, s.b_plus);
  const double t = -dm / (dp - dm);
  s.z = axpy(t, diff, s.b_minus);
  Vec rel = axpy(-1.0, s.z, s.b_plus);
  const double along = dot(rel, h.normal);
  s.v = rel;
  for (double& c : s.v) c /= along;
  s.frame = frame_with_last(h.normal);
  return s;
}

/// Bound (2 pi)^n / (4 lambda (1 - lambda)) for g = (f_z)° with z from the split.
inline VerificationReport verify_thm3_lambda(const GridFunction& f, const Hyperplane& h,
                                             const VerifyOptions& opt = {}) {
  detail::require_mass(f);
  const SplitData s = construct_split(f, h);
  const GridFunction fz = translate(f, s.z);
  const detail::PolarEval pol = detail::polar_for(fz, opt);
  const double bound = two_pi_pow(f.dim()) / (4.0 * s.lambda * (1.0 - s.lambda));
  VerificationReport r =
      make_bound_report(Theorem::Thm3Lambda, integrate(f) * integrate(pol.g), bound, kBoundTolerance);
  r.lambda = s.lambda;
  r.grid_meta.add("f", f.box);
  r.grid_meta.add("polar", pol.g.box);
  r.flag("z=" + format_vector(s.z));
  if (pol.truncated) r.flag("truncation: polar box did not cover the tail");
  return r;
}

/// Split at the median along `direction`; the bound is exactly (2 pi)^n.
inline VerificationReport verify_thm3_median(const GridFunction& f, std::span<const double> direction,
                                             const VerifyOptions& opt = {}) {
  detail::require_mass(f);
  const Hyperplane probe = Hyperplane::along(direction, 0.0);
  const double offset = find_quantile_offset(f, probe.normal, 0.5);
  VerificationReport r = verify_thm3_lambda(f, Hyperplane(probe.normal, offset), opt);
  r.theorem = Theorem::Thm3Median;
  r.bound = two_pi_pow(f.dim());
  r.margin = r.bound - r.product;
  r.passed = std::isfinite(r.product) && r.product <= r.bound * (1.0 + kBoundTolerance);
  r.flag("median_offset=" + format_number(offset));
  return r;
}

namespace detail {

// Multilinear interpolation of f (not log f), relative to exp(peak); zero
// outside the box.
class LinearSampler {
 public:
  explicit LinearSampler(const GridFunction& f) : box_(f.box.flattened()), peak_(f.max_log()) {
    values_.resize(f.logvals.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] = f.logvals[i] == kNegInf ? 0.0 : std::exp(f.logvals[i] - peak_);
    strides_ = box_.strides();
  }

  double peak() const { return peak_; }
  const Box& box() const { return box_; }

  double operator()(std::span<const double> x) const {
    const std::size_t n = box_.dim();
    std::array<std::size_t, kMaxDim> base{};
    std::array<double, kMaxDim> frac{};
    for (std::size_t a = 0; a < n; ++a) {
      const double lo = box_.lower[a];
      const double hi = box_.upper[a];
      if (!(x[a] >= lo && x[a] <= hi)) return 0.0;
      const double t = (x[a] - lo) / box_.step(a);
      std::size_t k = static_cast<std::size_t>(t);
      if (k + 1 >= box_.counts[a]) k = box_.counts[a] - 2;
      base[a] = k;
      frac[a] = std::clamp(t - static_cast<double>(k), 0.0, 1.0);
    }
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      double w = 1.0;
      std::size_t idx = 0;
      for (std::size_t a = 0; a < n; ++a) {
        const bool up = corner & (std::size_t{1} << a);
        w *= up ? frac[a] : 1.0 - frac[a];
        idx += (base[a] + (up ? 1 : 0)) * strides_[a];
      }
      if (w != 0.0) acc += w * values_[idx];
    }
    return acc;
  }

  /// Trapezoid approximation of int_0^inf f(p + s d) ds (relative to peak).
  double ray_integral(std::span<const double> p, std::span<const double> d, double ds) const {
    const std::size_t n = box_.dim();
    double s_exit = kPosInf;
    for (std::size_t a = 0; a < n; ++a) {
      if (d[a] > 0.0) {
        s_exit = std::min(s_exit, (box_.upper[a] - p[a]) / d[a]);
      } else if (d[a] < 0.0) {
        s_exit = std::min(s_exit, (box_.lower[a] - p[a]) / d[a]);
      } else if (p[a] < box_.lower[a] || p[a] > box_.upper[a]) {
        return 0.0;
      }
    }
    if (!(s_exit >= 0.0)) return 0.0;
    const std::size_t steps = static_cast<std::size_t>(std::floor(s_exit / ds));
    std::array<double, kMaxDim> q{};
    auto at = [&](double s) {
      for (std::size_t a = 0; a < n; ++a) q[a] = p[a] + s * d[a];
      return (*this)(std::span<const double>(q.data(), n));
    };
    double sum = 0.5 * at(0.0);
    double last = sum * 2.0;
    for (std::size_t k = 1; k <= steps; ++k) {
      last = at(static_cast<double>(k) * ds);
      sum += last;
    }
    require(last <= 1e-6, ErrorCode::InterpolationOutOfBox,
            "ray leaves the sampled box while the integrand is still above 1e-6 of its peak");
    return sum * ds;
  }

 private:
  Box box_;
  double peak_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) e(static_cast<Eigen::Index>(i)) = v[i];
  return e;
}

inline Vec from_eigen(const Eigen::VectorXd& e) { return Vec(e.data(), e.data() + e.size()); }

// Grid on H (coordinates along frame[0..n-2]) covering the given coordinate range.
inline Box hyperplane_grid(const Vec& cmin, const Vec& cmax, double step) {
  const std::size_t m = cmin.size();
  const std::size_t cap = m == 1 ? 4097 : 513;
  Vec lo(m), hi(m);
  std::vector<std::size_t> counts(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double width = std::max(cmax[i] - cmin[i], step);
    lo[i] = cmin[i];
    hi[i] = cmin[i] + width;
    counts[i] = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(width / step)) + 1, 2, cap);
  }
  return Box(lo, hi, counts);
}

template <class CoordFn>
void coordinate_range(const Box& box, CoordFn&& coords, Vec& cmin, Vec& cmax) {
  const std::size_t n = box.dim();
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    Vec x(n);
    for (std::size_t a = 0; a < n; ++a) x[a] = (corner & (std::size_t{1} << a)) ? box.hi(a) : box.lo(a);
    const Vec c = coords(x);
    for (std::size_t i = 0; i < c.size(); ++i) {
      cmin[i] = std::min(cmin[i], c[i]);
      cmax[i] = std::max(cmax[i], c[i]);
    }
  }
}

}  // namespace detail

/// Fibre integrals of f along v and of g along the normal, over both rays
/// from H, in the frame of the split.
struct DimensionReduction {
  SplitData split;
  Eigen::MatrixXd A;  // e_i -> e_i (i < n), e_n -> v
  Eigen::MatrixXd B;  // (A^{-1})^T
  GridFunction F_plus, G_plus, F_minus, G_minus;
  double mass_f = 0.0;
  double mass_g = 0.0;
  double det_A = 0.0;
  double det_B = 0.0;
  double bilinear_error = 0.0;  // max |<Ax, Bx'> - <x, x'>| over seeded pairs
  Vec bary_F_plus;
  Vec bary_F_minus;
  double reduced_margin_plus = kNegInf;  // max log F+ + log G+ + <y, y'> - log(pi/2)
  double reduced_margin_minus = kNegInf;
  std::vector<std::string> flags;

  double lambda() const { return split.lambda; }
  /// integrate(F_plus) / integrate(f); equals lambda by Fubini.
  double plus_fraction() const { return integrate(F_plus) / mass_f; }
  double minus_fraction() const { return integrate(F_minus) / mass_f; }
};

inline constexpr std::uint64_t kBilinearSeed = 0xB111EA5ULL;

/// Dimension-reduction step for f already translated so the split point is 0.
inline DimensionReduction reduce_dimension(const GridFunction& f, const GridFunction& g,
                                           const Hyperplane& h) {
  const std::size_t n = f.dim();
  require(n >= 2, ErrorCode::InvalidArgument, "dimension reduction needs dim >= 2");
  require(g.dim() == n && h.normal.size() == n, ErrorCode::InvalidArgument,
          "f, g and H must share the dimension");
  DimensionReduction dr;
  dr.split = construct_split(f, h);
  const SplitData& s = dr.split;
  const double zlen = norm(s.z);
  if (zlen > 1e-6) dr.flags.push_back("split point is not at the origin: |z| = " + format_number(zlen));
  dr.flags.push_back("interpolation: multilinear sampling along fibres");

  const Eigen::VectorXd nrm = detail::to_eigen(h.normal);
  const Eigen::VectorXd ve = detail::to_eigen(s.v);
  dr.A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) +
         (ve - nrm) * nrm.transpose();
  dr.B = dr.A.inverse().transpose();
  dr.det_A = dr.A.determinant();
  dr.det_B = dr.B.determinant();
  {
    std::mt19937_64 rng(kBilinearSeed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int p = 0; p < 100; ++p) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(n)), xp(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = uni(rng);
        xp(i) = uni(rng);
      }
      dr.bilinear_error = std::max(dr.bilinear_error, std::abs((dr.A * x).dot(dr.B * xp) - x.dot(xp)));
    }
  }

  dr.mass_f = integrate(f);
  dr.mass_g = integrate(g);
  const std::size_t m = n - 1;
  const std::vector<Vec>& e = s.frame;

  // F: y in H, y = sum c_i e_i; the fibre y + s v starts on H, so c = coords of P x.
  const detail::LinearSampler fs(f);
  double step_f = kPosInf;
  for (std::size_t a = 0; a < n; ++a) step_f = std::min(step_f, f.box.step(a));
  Vec cmin(m, kPosInf), cmax(m, kNegInf);
  detail::coordinate_range(
      f.box,
      [&](const Vec& x) {
        Vec c(m);
        const double t = dot(x, h.normal);
        for (std::size_t i = 0; i < m; ++i) c[i] = dot(x, e[i]) - t * dot(s.v, e[i]);
        return c;
      },
      cmin, cmax);
  const Box hf = detail::hyperplane_grid(cmin, cmax, step_f);
  const double ds = step_f / (2.0 * norm(s.v));
  Vec vneg = s.v;
  for (double& c : vneg) c = -c;
  std::vector<double> lp(hf.size()), lm(hf.size());
  for_each_node(hf, [&](std::size_t i, std::span<const double> c) {
    Vec y(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) y = axpy(c[k], e[k], y);
    const double ip = fs.ray_integral(y, s.v, ds);
    const double im = fs.ray_integral(y, vneg, ds);
    lp[i] = ip > 0.0 ? std::log(ip) + fs.peak() : kNegInf;
    lm[i] = im > 0.0 ? std::log(im) + fs.peak() : kNegInf;
  });
  dr.F_plus = GridFunction(hf, std::move(lp));
  dr.F_minus = GridFunction(hf, std::move(lm));

  // G: y' in H, fibre B y' + t e_n; coordinates of x along e_i are those of y'.
  const detail::LinearSampler gs(g);
  double step_g = kPosInf;
  for (std::size_t a = 0; a < n; ++a) step_g = std::min(step_g, g.box.step(a));
  Vec dmin(m, kPosInf), dmax(m, kNegInf);
  detail::coordinate_range(
      g.box,
      [&](const Vec& x) {
        Vec c(m);
        for (std::size_t i = 0; i < m; ++i) c[i] = dot(x, e[i]);
        return c;
      },
      dmin, dmax);
  const Box hg = detail::hyperplane_grid(dmin, dmax, step_g);
  const double dt = step_g / 2.0;
  Vec nneg = h.normal;
  for (double& c : nneg) c = -c;
  std::vector<double> gp(hg.size()), gm(hg.size());
  for_each_node(hg, [&](std::size_t i, std::span<const double> c) {
    Eigen::VectorXd yp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < m; ++k) yp += c[k] * detail::to_eigen(e[k]);
    const Vec start = detail::from_eigen(dr.B * yp);
    const double ip = gs.ray_integral(start, h.normal, dt);
    const double im = gs.ray_integral(start, nneg, dt);
    gp[i] = ip > 0.0 ? std::log(ip) + gs.peak() : kNegInf;
    gm[i] = im > 0.0 ? std::log(im) + gs.peak() : kNegInf;
  });
  dr.G_plus = GridFunction(hg, std::move(gp));
  dr.G_minus = GridFunction(hg, std::move(gm));

  dr.bary_F_plus = barycenter(dr.F_plus);
  dr.bary_F_minus = barycenter(dr.F_minus);
  const double log_half_pi = std::log(kPi / 2.0);
  const DualityMargin mp = duality_margin(dr.F_plus, dr.G_plus);
  const DualityMargin mm = duality_margin(dr.F_minus, dr.G_minus);
  dr.reduced_margin_plus = mp.value - log_half_pi;
  dr.reduced_margin_minus = mm.value - log_half_pi;
  if (mp.subsampled || mm.subsampled) dr.flags.push_back("subsampled reduced duality margin");
  return dr;
}

struct InductionStep {
  VerificationReport plus_reduced;   // int F+ int G+ vs (pi/2)(2 pi)^{n-1}
  VerificationReport minus_reduced;
  VerificationReport plus_side;      // int f * int_{H+} g o B vs (2 pi)^n / (4 lambda)
  VerificationReport minus_side;
  VerificationReport combined;       // int f * int g vs the sum of the side bounds
  double sum_identity_error = 0.0;   // |side bounds sum - (2 pi)^n/(4 lambda(1-lambda))|, relative
  bool passed = false;

  std::vector<VerificationReport> reports() const {
    return {plus_reduced, minus_reduced, plus_side, minus_side, combined};
  }
};

inline InductionStep verify_induction_step(const DimensionReduction& dr) {
  const std::size_t n = dr.split.z.size();
  const double lam = dr.lambda();
  const double cap = two_pi_pow(n);
  const double reduced_bound = (kPi / 2.0) * two_pi_pow(n - 1);
  auto tag = [&](VerificationReport r, const char* what) {
    r.lambda = lam;
    r.grid_meta.add("F", dr.F_plus.box);
    r.grid_meta.add("G", dr.G_plus.box);
    r.flag(std::string("induction:") + what);
    for (const auto& fl : dr.flags) r.flag(fl);
    return r;
  };
  const double ip = integrate(dr.G_plus);
  const double im = integrate(dr.G_minus);
  InductionStep st;
  st.plus_reduced = tag(make_bound_report(Theorem::Thm3Lambda, integrate(dr.F_plus) * ip, reduced_bound,
                                          kBoundTolerance),
                        "plus-reduced");
  st.minus_reduced = tag(make_bound_report(Theorem::Thm3Lambda, integrate(dr.F_minus) * im,
                                           reduced_bound, kBoundTolerance),
                         "minus-reduced");
  const double side_plus = cap / (4.0 * lam);
  const double side_minus = cap / (4.0 * (1.0 - lam));
  st.plus_side = tag(make_bound_report(Theorem::Thm3Lambda, dr.mass_f * ip, side_plus, kBoundTolerance),
                     "plus-side");
  st.minus_side = tag(
      make_bound_report(Theorem::Thm3Lambda, dr.mass_f * im, side_minus, kBoundTolerance), "minus-side");
  const double summed = side_plus + side_minus;
  const double direct = cap / (4.0 * lam * (1.0 - lam));
  st.sum_identity_error = std::abs(summed - direct) / direct;
  st.combined = tag(make_bound_report(Theorem::Thm3Lambda, dr.mass_f * (ip + im), summed, kBoundTolerance),
                    "combined");
  st.passed = st.plus_reduced.passed && st.minus_reduced.passed && st.plus_side.passed &&
              st.minus_side.passed && st.combined.passed && st.sum_identity_error <= 1e-12;
  return st;
}

/// Checks phi1(s) phi2(t) <= e^{-st} on the grids, then int phi1 int phi2 <= pi/2.
inline VerificationReport verify_lemma_gm(const GridFunction& phi1, const GridFunction& phi2) {
  require(phi1.dim() == 1 && phi2.dim() == 1, ErrorCode::InvalidArgument, "lemma inputs must be 1-D");
  require(phi1.box.lo(0) >= 0.0 && phi2.box.lo(0) >= 0.0, ErrorCode::InvalidArgument,
          "lemma inputs live on the half-line [0, T]");
  const DualityMargin dm = duality_margin(phi1, phi2);
  require(dm.value <= kPremiseTolerance, ErrorCode::PremiseViolated,
          "phi1(s) phi2(t) <= exp(-st) fails by log-margin " + format_number(dm.value));
  VerificationReport r =
      make_bound_report(Theorem::Lemma1, integrate(phi1) * integrate(phi2), kPi / 2.0, kLemmaTolerance);
  r.grid_meta.add("phi1", phi1.box);
  r.grid_meta.add("phi2", phi2.box);
  r.flag("premise_margin=" + format_number(dm.value));
  if (dm.subsampled) r.flag("subsampled premise margin");
  return r;
}

struct ShiftIdentity {
  VerificationReport tilted;  // int f * int g e^{<y,z>} vs (2 pi)^n / (4 lambda (1 - lambda))
  VerificationReport moment;  // int g vs int g e^{<y,z>} - <int y g, z>
  bool passed() const { return tilted.passed && moment.passed; }
};

/// g centered, (f_z, g e^{<., z>}) in duality; lambda selects the bound.
inline ShiftIdentity verify_shift_identity(const GridFunction& f, const GridFunction& g,
                                           std::span<const double> z, double lambda = 0.5) {
  require(f.dim() == g.dim() && z.size() == f.dim(), ErrorCode::InvalidArgument,
          "f, g and z must share the dimension");
  require(lambda > 0.0 && lambda < 1.0, ErrorCode::InvalidArgument, "lambda must lie in (0, 1)");
  detail::require_mass(g);
  const Vec bg = barycenter(g);
  require(norm(bg) <= kBarycenterTolerance * std::sqrt(static_cast<double>(g.dim())),
          ErrorCode::PremiseViolated, "g is not centered: barycenter " + format_vector(bg));
  GridFunction tilted = g;
  for_each_node(g.box, [&](std::size_t i, std::span<const double> y) {
    if (tilted.logvals[i] > kNegInf) tilted.logvals[i] += dot(y, z);
  });
  const DualityMargin dm = duality_margin(translate(f, z), tilted);
  require(dm.value <= kPremiseTolerance, ErrorCode::PremiseViolated,
          "shifted duality fails by log-margin " + format_number(dm.value));

  ShiftIdentity out;
  const double bound = two_pi_pow(f.dim()) / (4.0 * lambda * (1.0 - lambda));
  out.tilted = make_bound_report(Theorem::Eq8, integrate(f) * integrate(tilted), bound, kBoundTolerance);
  out.tilted.lambda = lambda;
  out.tilted.grid_meta.add("f", f.box);
  out.tilted.grid_meta.add("g", g.box);
  out.tilted.flag("z=" + format_vector(z));
  if (dm.subsampled) out.tilted.flag("subsampled premise margin");

  // Same weights for all three integrals so 1 <= e^a - a holds node by node.
  const double peak = g.max_log();
  double mass = 0.0, tilt = 0.0, moment = 0.0, excess = 0.0;
  for_each_weighted_node(g.box, [&](std::size_t i, auto, std::span<const double> y, double w) {
    if (g.logvals[i] == kNegInf) return;
    const double m = w * std::exp(g.logvals[i] - peak);
    const double a = dot(y, z);
    mass += m;
    tilt += m * std::exp(a);
    moment += m * a;
    excess += m * (std::expm1(a) - a);
  });
  const double scale = std::exp(peak);
  VerificationReport mr;
  mr.theorem = Theorem::Eq8;
  mr.product = scale * mass;
  mr.bound = scale * (tilt - moment);
  mr.margin = scale * excess;
  mr.passed = mr.margin >= -kPremiseTolerance * mr.product;
  mr.lambda = lambda;
  mr.grid_meta.add("g", g.box);
  mr.flag("moment_term=" + format_number(scale * moment));
  out.moment = std::move(mr);
  return out;
}

struct SantaloPoint {
  Vec z;
  double product = kPosInf;
  std::size_t evaluations = 0;
  VerificationReport report;  // Thm1: product at the searched point vs (2 pi)^n
};

/// Golden-section coordinate descent for z minimizing int f * int (f_z)°.
inline SantaloPoint santalo_point_search(const GridFunction& f, const VerifyOptions& opt = {}) {
  detail::require_mass(f);
  const std::size_t n = f.dim();
  const double mass = integrate(f);
  SantaloPoint best;
  auto evaluate = [&](const Vec& z) {
    ++best.evaluations;
    const GridFunction fz = translate(f, z);
    double value = kPosInf;
    if (opt.polar_box) {
      value = mass * integrate(polar_function(fz, *opt.polar_box, opt.method).output);
    } else {
      const CoveredTransform c = polar_function_covering(fz, opt.cover, opt.method);
      if (!c.truncated) value = mass * integrate(c.transform.output);
    }
    if (value < best.product) {
      best.product = value;
      best.z = z;
    }
    return value;
  };

  // Search range per axis: bounding box of the support.
  Vec lo(n, kPosInf), hi(n, kNegInf);
  for_each_node(f.box, [&](std::size_t i, std::span<const double> x) {
    if (f.logvals[i] == kNegInf) return;
    for (std::size_t a = 0; a < n; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  });

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto golden_axis = [&](Vec z, std::size_t a) {
    double left = lo[a], right = hi[a];
    auto at = [&](double t) {
      Vec p = z;
      p[a] = t;
      return evaluate(p);
    };
    double x1 = right - inv_phi * (right - left);
    double x2 = left + inv_phi * (right - left);
    double f1 = at(x1), f2 = at(x2);
    while (right - left > 1e-5) {
      if (f1 <= f2) {
        right = x2;
        x2 = x1;
        f2 = f1;
        x1 = right - inv_phi * (right - left);
        f1 = at(x1);
      } else {
        left = x1;
        x1 = x2;
        f1 = f2;
        x2 = left + inv_phi * (right - left);
        f2 = at(x2);
      }
    }
    z[a] = f1 <= f2 ? x1 : x2;
    return z;
  };

  std::vector<Vec> starts;
  for (std::size_t a = 0; a < n; ++a) {
    try {
      const Hyperplane axis = Hyperplane::axis(n, a, 0.0);
      const double t = find_quantile_offset(f, axis.normal, 0.5);
      starts.push_back(construct_split(f, Hyperplane(axis.normal, t)).z);
    } catch (const Error&) {
      // degenerate split along this axis; the barycenter start remains
    }
  }
  starts.push_back(barycenter(f));

  for (const Vec& start : starts) {
    Vec z = start;
    evaluate(z);
    for (int pass = 0; pass < 50; ++pass) {
      const Vec before = z;
      for (std::size_t a = 0; a < n; ++a) z = golden_axis(z, a);
      double stepsq = 0.0;
      for (std::size_t a = 0; a < n; ++a) stepsq += (z[a] - before[a]) * (z[a] - before[a]);
      if (std::sqrt(stepsq) < 1e-4) break;
    }
  }

  best.report = make_bound_report(Theorem::Thm1, best.product, two_pi_pow(n), kBoundTolerance);
  best.report.grid_meta.add("f", f.box);
  best.report.flag("santalo_point=" + format_vector(best.z));
  best.report.flag("evaluations=" + std::to_string(best.evaluations));
  return best;
}

}  // namespace santalo
