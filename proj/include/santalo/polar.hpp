#pragma once

// Discrete Legendre-Fenchel conjugates and the polar transform of functions.
//
//   u*(x)  = max_j ( <x, y_j> - u(y_j) )      over finite samples y_j
//   f°(x)  = exp( -(-log f)*(x) ) = min_j e^{-<x,y_j>} / f(y_j)
//
// Two routes compute the same discrete maximum: a brute-force scan and a
// linear-time Legendre transform (lower convex hull + monotone slope merge),
// applied axis by axis in higher dimension.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "santalo/error.hpp"
#include "santalo/grid.hpp"

namespace santalo {

enum class TransformMethod { BruteForce, FastLLT };

inline std::string_view to_string(TransformMethod m) {
  return m == TransformMethod::BruteForce ? "BruteForce" : "FastLLT";
}

namespace detail {

// out[i] = max_j (x[i] * y[j] - u[j]) over finite u[j]; -inf when no u[j] is
// finite. y and x ascending.
inline void conjugate_brute(std::span<const double> y, std::span<const double> u,
                            std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = kNegInf;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (u[j] == kPosInf) continue;
      best = std::max(best, x[i] * y[j] - u[j]);
    }
    out[i] = best;
  }
}

inline void conjugate_fast(std::span<const double> y, std::span<const double> u,
                           std::span<const double> x, std::span<double> out,
                           std::vector<std::size_t>& hull) {
  hull.clear();
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (u[j] == kPosInf) continue;
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (y[b] - y[a]) * (u[j] - u[a]) - (u[b] - u[a]) * (y[j] - y[a]);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(j);
  }
  if (hull.empty()) {
    std::fill(out.begin(), out.end(), kNegInf);
    return;
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double cur = x[i] * y[hull[k]] - u[hull[k]];
    while (k + 1 < hull.size()) {
      const double next = x[i] * y[hull[k + 1]] - u[hull[k + 1]];
      if (next < cur) break;
      cur = next;
      ++k;
    }
    out[i] = cur;
  }
}

inline void require_1d(const Box& b, const char* what) {
  require(b.dim() == 1, ErrorCode::InvalidArgument, std::string(what) + " must be one-dimensional");
}

}  // namespace detail

/// 1-D conjugate u*(x_i) = max_j (x_i y_j - u(y_j)); +infinity in u marks
/// points outside the support.
inline std::vector<double> legendre_1d(const Box& in, std::span<const double> u, const Box& out,
                                       TransformMethod method = TransformMethod::FastLLT) {
  detail::require_1d(in, "input grid");
  detail::require_1d(out, "output grid");
  require(u.size() == in.size(), ErrorCode::InvalidArgument, "potential size does not match grid");
  require(std::any_of(u.begin(), u.end(), [](double v) { return v < kPosInf; }),
          ErrorCode::EmptySupport, "potential has no finite sample");
  const Vec y = in.axis_nodes(0);
  const Vec x = out.axis_nodes(0);
  std::vector<double> res(x.size());
  if (method == TransformMethod::BruteForce) {
    detail::conjugate_brute(y, u, x, res);
  } else {
    std::vector<std::size_t> hull;
    detail::conjugate_fast(y, u, x, res, hull);
  }
  return res;
}

/// n-D conjugate on `out`. FastLLT sweeps the 1-D transform along the last
/// axis first and recurses on the remaining axes; BruteForce scans all pairs.
inline std::vector<double> legendre_nd(const Box& in, std::span<const double> u, const Box& out,
                                       TransformMethod method = TransformMethod::FastLLT) {
  require(in.dim() == out.dim(), ErrorCode::InvalidArgument, "input and output grids differ in dimension");
  require(u.size() == in.size(), ErrorCode::InvalidArgument, "potential size does not match grid");
  require(std::any_of(u.begin(), u.end(), [](double v) { return v < kPosInf; }),
          ErrorCode::EmptySupport, "potential has no finite sample");
  const std::size_t n = in.dim();

  if (method == TransformMethod::BruteForce) {
    std::vector<double> ys;
    std::vector<double> us;
    for_each_node(in, [&](std::size_t i, std::span<const double> y) {
      if (u[i] == kPosInf) return;
      ys.insert(ys.end(), y.begin(), y.end());
      us.push_back(u[i]);
    });
    std::vector<double> res(out.size());
    for_each_node(out, [&](std::size_t i, std::span<const double> x) {
      double best = kNegInf;
      for (std::size_t j = 0; j < us.size(); ++j) {
        double s = -us[j];
        for (std::size_t a = 0; a < n; ++a) s += x[a] * ys[j * n + a];
        best = std::max(best, s);
      }
      res[i] = best;
    });
    return res;
  }

  // w holds max over the already-swept axes of (<x, y> - u); shape mixes
  // output counts (swept axes) and input counts (pending axes).
  std::vector<std::size_t> shape = in.counts;
  std::vector<double> w(u.begin(), u.end());
  for (double& v : w) v = -v;
  std::vector<double> yin;
  std::vector<double> xout;
  std::vector<double> fiber_u;
  std::vector<double> fiber_out;
  std::vector<std::size_t> hull;
  for (std::size_t a = n; a-- > 0;) {
    const std::size_t m_in = shape[a];
    const std::size_t m_out = out.counts[a];
    yin = in.axis_nodes(a);
    xout = out.axis_nodes(a);
    std::size_t inner = 1;
    for (std::size_t b = a + 1; b < n; ++b) inner *= shape[b];
    std::size_t outer = 1;
    for (std::size_t b = 0; b < a; ++b) outer *= shape[b];
    std::vector<double> next(outer * m_out * inner);
    fiber_u.resize(m_in);
    fiber_out.resize(m_out);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in_i = 0; in_i < inner; ++in_i) {
        for (std::size_t k = 0; k < m_in; ++k) {
          const double v = w[(o * m_in + k) * inner + in_i];
          fiber_u[k] = v == kNegInf ? kPosInf : -v;
        }
        detail::conjugate_fast(yin, fiber_u, xout, fiber_out, hull);
        for (std::size_t k = 0; k < m_out; ++k) next[(o * m_out + k) * inner + in_i] = fiber_out[k];
      }
    }
    w.swap(next);
    shape[a] = m_out;
  }
  return w;
}

struct TransformResult {
  GridFunction output;
  TransformMethod method = TransformMethod::FastLLT;
  Box input_box;
  Box output_box;
};

/// Input box reflected through 0 with the same extents and counts.
inline Box mirrored_box(const Box& b) {
  Vec lo(b.dim()), hi(b.dim());
  for (std::size_t a = 0; a < b.dim(); ++a) {
    lo[a] = -b.hi(a);
    hi[a] = -b.lo(a);
  }
  return Box(std::move(lo), std::move(hi), b.counts);
}

/// f° on out_box: log f°(x) = -(-log f)*(x).
inline TransformResult polar_function(const GridFunction& f, const Box& out_box,
                                      TransformMethod method = TransformMethod::FastLLT) {
  require(f.has_support(), ErrorCode::EmptySupport, "polar of the zero function");
  std::vector<double> u(f.logvals.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f.logvals[i] == kNegInf ? kPosInf : -f.logvals[i];
  std::vector<double> conj = legendre_nd(f.box, u, out_box, method);
  for (double& v : conj) v = -v;
  TransformResult r;
  r.output = GridFunction(out_box, std::move(conj));
  r.method = method;
  r.input_box = f.box;
  r.output_box = out_box;
  return r;
}

inline TransformResult polar_function(const GridFunction& f,
                                      TransformMethod method = TransformMethod::FastLLT) {
  return polar_function(f, mirrored_box(f.box), method);
}

struct CoverOptions {
  double tail_ratio = 1e-12;          // face values must drop below tail_ratio * peak
  std::size_t max_expansions = 24;
  std::size_t max_nodes = std::size_t{1} << 22;
};

struct CoveredTransform {
  TransformResult transform;
  std::size_t expansions = 0;
  bool truncated = false;  // gave up before the faces decayed
};

namespace detail {

inline double face_max(const GridFunction& g, std::size_t axis, bool high) {
  const std::size_t target = high ? g.box.counts[axis] - 1 : 0;
  const auto strides = g.box.strides();
  double m = kNegInf;
  for (std::size_t i = 0; i < g.logvals.size(); ++i) {
    if ((i / strides[axis]) % g.box.counts[axis] == target) m = std::max(m, g.logvals[i]);
  }
  return m;
}

}  // namespace detail

/// f° on a box grown (at constant spacing) from the mirrored box until every
/// face carries less than tail_ratio of the peak value.
inline CoveredTransform polar_function_covering(const GridFunction& f, const CoverOptions& opt = {},
                                                TransformMethod method = TransformMethod::FastLLT) {
  Box box = mirrored_box(f.box);
  CoveredTransform res;
  const double cut = std::log(opt.tail_ratio);
  for (;;) {
    res.transform = polar_function(f, box, method);
    const GridFunction& g = res.transform.output;
    const double peak = g.max_log();
    Box next = box;
    bool grow = false;
    for (std::size_t a = 0; a < box.dim(); ++a) {
      const double h = box.step(a);
      const std::size_t add = std::max<std::size_t>(1, box.counts[a] / 2);
      for (bool high : {false, true}) {
        if (detail::face_max(g, a, high) <= peak + cut) continue;
        grow = true;
        next.counts[a] += add;
        if (high) {
          next.upper[a] += h * static_cast<double>(add);
        } else {
          next.lower[a] -= h * static_cast<double>(add);
        }
      }
    }
    if (!grow) return res;
    if (res.expansions >= opt.max_expansions || next.size() > opt.max_nodes) {
      res.truncated = true;
      return res;
    }
    // Rebuild so the spacing is recomputed from exact endpoints.
    box = Box(next.lower, next.upper, next.counts);
    ++res.expansions;
  }
}

struct DualityMargin {
  double value = kNegInf;  // max log f(x) + log g(y) + <x, y>
  bool subsampled = false;
  std::uint64_t pairs = 0;
};

inline constexpr std::uint64_t kMarginPairLimit = 100'000'000;
inline constexpr std::uint64_t kMarginSeed = 0x5A4E7A10ULL;

/// Largest violation of f(x) g(y) <= e^{-<x,y>} over sampled node pairs.
inline DualityMargin duality_margin(const GridFunction& f, const GridFunction& g) {
  require(f.dim() == g.dim(), ErrorCode::InvalidArgument, "duality margin needs equal dimensions");
  const std::size_t n = f.dim();
  auto collect = [n](const GridFunction& h, std::vector<double>& xs, std::vector<double>& ls) {
    for_each_node(h.box, [&](std::size_t i, std::span<const double> x) {
      if (h.logvals[i] == kNegInf) return;
      xs.insert(xs.end(), x.begin(), x.end());
      ls.push_back(h.logvals[i]);
    });
    (void)n;
  };
  std::vector<double> xf, lf, xg, lg;
  collect(f, xf, lf);
  collect(g, xg, lg);
  DualityMargin dm;
  if (lf.empty() || lg.empty()) return dm;
  const std::uint64_t pairs = static_cast<std::uint64_t>(lf.size()) * lg.size();
  auto run = [&]<std::size_t N>(std::integral_constant<std::size_t, N>) {
    auto pair_value = [&](std::size_t i, std::size_t j) {
      double s = lf[i] + lg[j];
      for (std::size_t a = 0; a < N; ++a) s += xf[i * N + a] * xg[j * N + a];
      return s;
    };
    double best = kNegInf;
    if (pairs <= kMarginPairLimit) {
      dm.pairs = pairs;
      for (std::size_t i = 0; i < lf.size(); ++i)
        for (std::size_t j = 0; j < lg.size(); ++j) {
          const double v = pair_value(i, j);
          best = v > best ? v : best;
        }
    } else {
      // one draw per pair: high and low 32 bits index f and g
      dm.subsampled = true;
      dm.pairs = kMarginPairLimit;
      std::mt19937_64 rng(kMarginSeed);
      const std::uint64_t nf = lf.size(), ng = lg.size();
      for (std::uint64_t p = 0; p < kMarginPairLimit; ++p) {
        const std::uint64_t r = rng();
        const double v = pair_value(static_cast<std::size_t>(((r >> 32) * nf) >> 32),
                                    static_cast<std::size_t>(((r & 0xFFFFFFFFULL) * ng) >> 32));
        best = v > best ? v : best;
      }
    }
    dm.value = best;
  };
  switch (n) {
    case 1: run(std::integral_constant<std::size_t, 1>{}); break;
    case 2: run(std::integral_constant<std::size_t, 2>{}); break;
    default: run(std::integral_constant<std::size_t, 3>{}); break;
  }
  return dm;
}

/// True iff g <= f° (1 + 1e-6) at every node of g's grid.
inline bool polar_maximality_check(const GridFunction& f, const GridFunction& g) {
  const GridFunction fp = polar_function(f, g.box).output;
  const double slack = std::log1p(1e-6);
  for (std::size_t i = 0; i < g.logvals.size(); ++i) {
    if (g.logvals[i] == kNegInf) continue;
    if (g.logvals[i] > fp.logvals[i] + slack) return false;
  }
  return true;
}

}  // namespace santalo
