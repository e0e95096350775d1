#pragma once

// Batch driver behind the `santalo` executable: instance specs, run
// configuration, verifier dispatch, report emission, seeded generation and
// plot series.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "santalo/error.hpp"
#include "santalo/families.hpp"
#include "santalo/grid.hpp"
#include "santalo/io.hpp"
#include "santalo/polar.hpp"
#include "santalo/report.hpp"
#include "santalo/starbody.hpp"
#include "santalo/verify.hpp"

namespace santalo::cli {

inline Error config_error(const std::string& field, const std::string& what) {
  return Error(ErrorCode::Config, field + ": " + what);
}

// ---------------------------------------------------------------------------
// Instance specs

enum class InstanceKind {
  Gaussian,
  ScaledGaussian,
  Exponential,
  IndicatorInterval,
  IndicatorBox,
  LogconcaveMixture,
  GridFile,
  BodyFamily,
  BodyFile,
};

struct FamilyInfo {
  std::string_view name;
  InstanceKind kind;
  std::vector<std::string_view> params;
};

inline const std::vector<FamilyInfo>& families() {
  static const std::vector<FamilyInfo> table = {
      {"gaussian", InstanceKind::Gaussian, {}},
      {"scaled_gaussian", InstanceKind::ScaledGaussian, {"a"}},
      {"exponential", InstanceKind::Exponential, {}},
      {"indicator_interval", InstanceKind::IndicatorInterval, {"lo", "hi"}},
      {"indicator_box", InstanceKind::IndicatorBox, {"lo", "hi"}},
      {"logconcave_mixture", InstanceKind::LogconcaveMixture, {"seed", "components"}},
      {"grid_file", InstanceKind::GridFile, {"path"}},
      {"ball", InstanceKind::BodyFamily, {"radius"}},
      {"ellipsoid", InstanceKind::BodyFamily, {"axes"}},
      {"cube", InstanceKind::BodyFamily, {"half_width"}},
      {"cross-polytope", InstanceKind::BodyFamily, {"radius"}},
      {"cosine-perturbed", InstanceKind::BodyFamily, {"amplitude", "mode"}},
      {"random-star", InstanceKind::BodyFamily, {"seed", "smoothness", "amplitude"}},
      {"body_file", InstanceKind::BodyFile, {}},
  };
  return table;
}

inline std::string canonical(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

inline const FamilyInfo* find_family(std::string_view name) {
  for (const auto& f : families())
    if (canonical(f.name) == canonical(name)) return &f;
  return nullptr;
}

/// Declarative instance: family name, parameters and grid overrides.
struct InstanceSpec {
  InstanceKind kind = InstanceKind::Gaussian;
  std::string family;
  std::map<std::string, std::string> params;
  std::size_t dim = 1;
  std::optional<Vec> lower;
  std::optional<Vec> upper;
  std::optional<std::vector<std::size_t>> resolution;

  bool is_body() const { return kind == InstanceKind::BodyFamily || kind == InstanceKind::BodyFile; }

  bool has(const std::string& key) const { return params.count(key) > 0; }

  std::string text() const {
    std::string s = family;
    char sep = ':';
    for (const auto& [k, v] : params) {
      s += sep + k + "=" + v;
      sep = ',';
    }
    return s;
  }
};

inline double parse_real(const std::string& field, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(v)) throw config_error(field, "'" + text + "' is not a number");
  return v;
}

inline std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text[0] != '-') v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw config_error(field, "'" + text + "' is not an unsigned integer");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline std::vector<double> parse_reals(const std::string& field, const std::string& text, char sep = ',') {
  std::vector<double> out;
  for (const auto& part : split(text, sep)) out.push_back(parse_real(field, part));
  if (out.empty()) throw config_error(field, "empty list");
  return out;
}

/// Reads a parameter as a real with a default, checking `ok` (message names the field).
inline double real_param(const InstanceSpec& s, const std::string& key, double def) {
  auto it = s.params.find(key);
  return it == s.params.end() ? def : parse_real("instance " + s.family + " parameter " + key, it->second);
}

inline void check(bool ok, const InstanceSpec& s, const std::string& key, const std::string& what) {
  if (!ok) throw config_error("instance " + s.family + " parameter " + key, what);
}

/// Validates kind-specific parameters and dimensions.
inline void validate(const InstanceSpec& s) {
  const std::string where = "instance " + s.family;
  if (s.is_body()) {
    if (s.dim != 2 && s.dim != 3) throw config_error(where + " dim", "star bodies need dim 2 or 3");
  } else if (s.dim < 1 || s.dim > 3) {
    throw config_error(where + " dim", "dim must be 1, 2 or 3");
  }
  if (s.lower && s.lower->size() != s.dim) throw config_error("--box", "expected " + std::to_string(s.dim) + " axes");
  if (s.lower)
    for (std::size_t a = 0; a < s.dim; ++a)
      if (!((*s.lower)[a] < (*s.upper)[a])) throw config_error("--box", "lower bound must be below upper bound");
  if (s.resolution) {
    const std::size_t want = s.is_body() ? (s.dim == 2 ? 1 : 2) : s.dim;
    if (s.resolution->size() != want && !(s.resolution->size() == 1 && !s.is_body()))
      throw config_error("--resolution", "expected " + std::to_string(want) + " counts");
    for (auto c : *s.resolution)
      if (c < 2) throw config_error("--resolution", "counts must be at least 2");
  }
  switch (s.kind) {
    case InstanceKind::ScaledGaussian:
      check(s.has("a"), s, "a", "required");
      check(real_param(s, "a", 1.0) > 0.0, s, "a", "must be positive");
      break;
    case InstanceKind::IndicatorInterval:
    case InstanceKind::IndicatorBox:
      check(s.kind == InstanceKind::IndicatorBox || s.dim == 1, s, "dim", "indicator_interval is 1-D");
      check(real_param(s, "lo", -1.0) < real_param(s, "hi", 1.0), s, "lo", "must be below hi");
      break;
    case InstanceKind::LogconcaveMixture:
      if (s.has("seed")) parse_unsigned(where + " parameter seed", s.params.at("seed"));
      if (s.has("components"))
        check(parse_unsigned(where + " parameter components", s.params.at("components")) >= 1, s, "components",
              "must be at least 1");
      break;
    case InstanceKind::GridFile:
    case InstanceKind::BodyFile:
      check(s.has("path") && !s.params.at("path").empty(), s, "path", "required");
      break;
    case InstanceKind::BodyFamily: {
      const std::string f = canonical(s.family);
      if (f == "ball") check(real_param(s, "radius", 1.0) > 0.0, s, "radius", "must be positive");
      if (f == "cross_polytope") check(real_param(s, "radius", 1.0) > 0.0, s, "radius", "must be positive");
      if (f == "cube") check(real_param(s, "half_width", 1.0) > 0.0, s, "half_width", "must be positive");
      if (f == "ellipsoid") {
        check(s.has("axes"), s, "axes", "required (e.g. axes=2/0.5)");
        const auto ax = parse_reals(where + " parameter axes", s.params.at("axes"), '/');
        check(ax.size() == s.dim, s, "axes", "needs one semi-axis per dimension");
        for (double a : ax) check(a > 0.0, s, "axes", "semi-axes must be positive");
      }
      if (f == "cosine_perturbed") {
        check(std::abs(real_param(s, "amplitude", 0.3)) < 1.0, s, "amplitude", "must lie in (-1, 1)");
        if (s.has("mode")) parse_unsigned(where + " parameter mode", s.params.at("mode"));
      }
      if (f == "random_star") {
        if (s.has("seed")) parse_unsigned(where + " parameter seed", s.params.at("seed"));
        check(real_param(s, "smoothness", 2.0) >= 0.0, s, "smoothness", "must be non-negative");
        const double amp = real_param(s, "amplitude", 0.25);
        check(amp >= 0.0 && amp <= 1.0, s, "amplitude", "must lie in [0, 1]");
      }
      break;
    }
    default:
      break;
  }
}

/// "name" or "name:key=value,key=value".
inline InstanceSpec parse_instance(const std::string& text, std::size_t default_dim) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const FamilyInfo* info = find_family(name);
  if (!info) throw config_error("--instance", "unknown instance kind '" + name + "'");
  InstanceSpec s;
  s.kind = info->kind;
  s.family = std::string(info->name);
  s.dim = default_dim;
  if (colon != std::string::npos) {
    for (const auto& kv : split(text.substr(colon + 1), ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw config_error("--instance " + s.family, "expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (key == "dim") {
        s.dim = parse_unsigned("instance " + s.family + " parameter dim", value);
        continue;
      }
      const bool path_ok = key == "path" && (s.kind == InstanceKind::GridFile || s.kind == InstanceKind::BodyFile);
      if (!path_ok && std::find(info->params.begin(), info->params.end(), key) == info->params.end())
        throw config_error("--instance " + s.family, "unknown parameter '" + key + "'");
      s.params[key] = value;
    }
  }
  return s;
}

inline std::uint64_t instance_seed(const InstanceSpec& s, std::uint64_t fallback) {
  auto it = s.params.find("seed");
  return it == s.params.end() ? fallback : parse_unsigned("seed", it->second);
}

inline bool is_seeded(const InstanceSpec& s) {
  return s.kind == InstanceKind::LogconcaveMixture || canonical(s.family) == "random_star";
}

inline GridOverride override_of(const InstanceSpec& s) {
  GridOverride o;
  o.lower = s.lower;
  o.upper = s.upper;
  o.counts = s.resolution;
  return o;
}

inline GridFunction materialize_function(const InstanceSpec& s, std::uint64_t seed) {
  require(!s.is_body(), ErrorCode::InvalidArgument, "instance '" + s.family + "' is a star body, not a function");
  const GridOverride o = override_of(s);
  switch (s.kind) {
    case InstanceKind::Gaussian: return gaussian(s.dim, o);
    case InstanceKind::ScaledGaussian: return scaled_gaussian(s.dim, real_param(s, "a", 1.0), o);
    case InstanceKind::Exponential: return exponential(s.dim, o);
    case InstanceKind::IndicatorInterval:
    case InstanceKind::IndicatorBox:
      return indicator_box(s.dim, real_param(s, "lo", -1.0), real_param(s, "hi", 1.0), o);
    case InstanceKind::LogconcaveMixture: {
      const std::size_t k = s.has("components") ? parse_unsigned("components", s.params.at("components")) : 3;
      return logconcave_mixture(s.dim, seed, k, o);
    }
    case InstanceKind::GridFile: {
      GridFunction f = read_grid(s.params.at("path"));
      require(f.dim() == s.dim, ErrorCode::InvalidArgument,
              "grid file has dimension " + std::to_string(f.dim()) + ", expected " + std::to_string(s.dim));
      return f;
    }
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "unsupported function instance");
}

inline StarBody materialize_body(const InstanceSpec& s, std::uint64_t seed) {
  require(s.is_body(), ErrorCode::InvalidArgument, "instance '" + s.family + "' is a function, not a star body");
  if (s.kind == InstanceKind::BodyFile) {
    StarBody b = read_body(s.params.at("path"));
    require(b.dim() == s.dim, ErrorCode::InvalidArgument,
            "body file has dimension " + std::to_string(b.dim()) + ", expected " + std::to_string(s.dim));
    return b;
  }
  AngularGrid grid = default_angular_grid(s.dim);
  if (s.resolution) grid = s.dim == 2 ? AngularGrid::circle((*s.resolution)[0])
                                      : AngularGrid::sphere((*s.resolution)[0], (*s.resolution)[1]);
  const std::string f = canonical(s.family);
  if (f == "ball") return ball_body(std::move(grid), real_param(s, "radius", 1.0));
  if (f == "cube") return cube_body(std::move(grid), real_param(s, "half_width", 1.0));
  if (f == "cross_polytope") return cross_polytope_body(std::move(grid), real_param(s, "radius", 1.0));
  if (f == "ellipsoid") return ellipsoid_body(std::move(grid), parse_reals("axes", s.params.at("axes"), '/'));
  if (f == "cosine_perturbed")
    return cosine_perturbed_body(std::move(grid), real_param(s, "amplitude", 0.3),
                                 static_cast<int>(s.has("mode") ? parse_unsigned("mode", s.params.at("mode")) : 1));
  if (f == "random_star")
    return random_star_body(std::move(grid), seed, real_param(s, "smoothness", 2.0), real_param(s, "amplitude", 0.25));
  throw Error(ErrorCode::InvalidArgument, "unsupported body family '" + s.family + "'");
}

// ---------------------------------------------------------------------------
// Run configuration

enum class Command {
  VerifyFunctional,
  VerifyStar,
  VerifySplit,
  VerifyMedian,
  VerifyLemma,
  VerifyShift,
  TransformPolar,
  SearchSantaloPoint,
  Generate,
  PlotData,
};

inline const std::vector<std::pair<std::string_view, Command>>& command_names() {
  static const std::vector<std::pair<std::string_view, Command>> t = {
      {"verify functional", Command::VerifyFunctional}, {"verify star", Command::VerifyStar},
      {"verify split", Command::VerifySplit},           {"verify median", Command::VerifyMedian},
      {"verify lemma", Command::VerifyLemma},           {"verify shift", Command::VerifyShift},
      {"transform polar", Command::TransformPolar},     {"search santalo-point", Command::SearchSantaloPoint},
      {"generate", Command::Generate},                  {"plot-data", Command::PlotData},
  };
  return t;
}

inline std::string_view to_string(Command c) {
  for (const auto& [n, k] : command_names())
    if (k == c) return n;
  return "?";
}

inline Command command_from_string(const std::string& s) {
  for (const auto& [n, k] : command_names())
    if (n == s) return k;
  throw config_error("command", "unknown command '" + s + "'");
}

inline Theorem theorem_of(Command c) {
  switch (c) {
    case Command::VerifyFunctional: return Theorem::Thm2;
    case Command::VerifyStar: return Theorem::Corollary;
    case Command::VerifySplit: return Theorem::Thm3Lambda;
    case Command::VerifyMedian: return Theorem::Thm3Median;
    case Command::VerifyLemma: return Theorem::Lemma1;
    case Command::VerifyShift: return Theorem::Eq8;
    case Command::SearchSantaloPoint: return Theorem::Thm1;
    case Command::PlotData: return Theorem::Thm3Lambda;
    default: return Theorem::Thm2;
  }
}

struct RunConfig {
  Command command = Command::VerifyFunctional;
  std::vector<InstanceSpec> instances;
  std::vector<Vec> directions;
  std::vector<double> lambda_targets;
  std::string output_path;
  bool json = true;
  bool csv = false;
  std::uint64_t global_seed = 0;
  std::optional<Vec> polar_lower;
  std::optional<Vec> polar_upper;
  TransformMethod method = TransformMethod::FastLLT;
  // generate
  std::optional<InstanceSpec> family;
  std::size_t count = 1;
  // plot-data
  std::string sweep = "lambda";
  std::vector<std::size_t> sweep_resolutions;
  std::size_t threads = 0;  // 0: SANTALO_THREADS or hardware concurrency
};

inline void validate(const RunConfig& c) {
  if (c.command == Command::Generate) {
    if (!c.family) throw config_error("--family", "generate needs a family");
    if (!is_seeded(*c.family)) throw config_error("--family", "generate supports logconcave_mixture and random-star");
    if (c.count < 1) throw config_error("--count", "must be at least 1");
    validate(*c.family);
    return;
  }
  if (c.instances.empty()) throw config_error("--instance", "at least one instance is required");
  for (const auto& s : c.instances) {
    validate(s);
    const bool wants_body = c.command == Command::VerifyStar;
    if (s.is_body() != wants_body)
      throw config_error("--instance", "'" + s.family + "' is " + (s.is_body() ? "a star body" : "a function") +
                                           "; command '" + std::string(to_string(c.command)) + "' needs " +
                                           (wants_body ? "a star body" : "a function"));
    if (c.command == Command::VerifyLemma && s.dim != 1) throw config_error("--dim", "the lemma check is 1-D");
    for (const auto& d : c.directions)
      if (d.size() != s.dim) throw config_error("--direction", "direction dimension does not match the instance");
  }
  for (double l : c.lambda_targets)
    if (!(l > 0.0 && l < 1.0)) throw config_error("--lambda", format_number(l) + " is outside (0, 1)");
  for (const auto& d : c.directions)
    if (!(norm(d) > 0.0)) throw config_error("--direction", "zero direction");
  if (c.sweep != "lambda" && c.sweep != "resolution")
    throw config_error("--sweep", "expected 'lambda' or 'resolution'");
  for (auto r : c.sweep_resolutions)
    if (r < 2) throw config_error("--resolution", "counts must be at least 2");
}

inline std::size_t worker_count(const RunConfig& c, std::size_t jobs) {
  std::size_t n = c.threads;
  if (n == 0) {
    if (const char* env = std::getenv("SANTALO_THREADS")) {
      try {
        n = parse_unsigned("SANTALO_THREADS", env);
      } catch (const Error&) {
        n = 0;
      }
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Runs fn(i) for i < jobs on a worker pool; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t jobs, std::size_t workers, Fn&& fn) {
  std::vector<T> out(jobs);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) out[i] = fn(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

// ---------------------------------------------------------------------------
// Per-instance work

inline VerifyOptions verify_options(const RunConfig& c, const GridFunction& f) {
  VerifyOptions o;
  o.method = c.method;
  if (c.polar_lower) o.polar_box = Box(*c.polar_lower, *c.polar_upper, f.box.counts);
  return o;
}

inline std::vector<Vec> directions_or(const RunConfig& c, std::size_t dim, bool all_axes) {
  if (!c.directions.empty()) {
    std::vector<Vec> out;
    for (const auto& d : c.directions) out.push_back(Hyperplane::along(d, 0.0).normal);
    return out;
  }
  std::vector<Vec> out;
  for (std::size_t a = 0; a < (all_axes ? dim : 1); ++a) out.push_back(Hyperplane::axis(dim, a, 0.0).normal);
  return out;
}

/// phi1 = f restricted to nodes with x >= 0; phi2 = the largest function with
/// phi1(s) phi2(t) <= e^{-st}, on the same half-line grid.
inline std::pair<GridFunction, GridFunction> half_line_pair(const GridFunction& f) {
  require(f.dim() == 1, ErrorCode::InvalidArgument, "half-line pair needs a 1-D function");
  const Box b = f.box.flattened();
  const double tol = 1e-12 * std::max(1.0, b.hi(0) - b.lo(0));
  std::size_t first = 0;
  while (first < b.counts[0] && b.node(0, first) < -tol) ++first;
  require(b.counts[0] - first >= 2, ErrorCode::InvalidArgument, "function has fewer than two nodes on [0, inf)");
  const double lo = std::max(0.0, b.node(0, first));
  Box half({lo}, {b.hi(0)}, {b.counts[0] - first});
  GridFunction phi1(half, std::vector<double>(f.logvals.begin() + static_cast<std::ptrdiff_t>(first), f.logvals.end()));
  std::vector<double> u(phi1.logvals.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = phi1.logvals[i] == kNegInf ? kPosInf : -phi1.logvals[i];
  std::vector<double> conj = legendre_1d(half, u, half);
  for (double& v : conj) v = -v;
  return {std::move(phi1), GridFunction(half, std::move(conj))};
}

/// g = f recentered, f' = g°; z from the split of f' at quantile lambda
/// along `dir`. Returns the two shift-identity reports.
inline std::vector<VerificationReport> shift_reports(const GridFunction& h, std::span<const double> dir, double lambda,
                                                     const RunConfig& c) {
  const GridFunction g = translate(h, barycenter(h));
  const VerifyOptions opt = verify_options(c, g);
  const detail::PolarEval pe = detail::polar_for(g, opt);
  const GridFunction& f = pe.g;
  const double offset = find_quantile_offset(f, dir, lambda);
  const SplitData s = construct_split(f, Hyperplane(Vec(dir.begin(), dir.end()), offset));
  ShiftIdentity si = verify_shift_identity(f, g, s.z, s.lambda);
  if (pe.truncated) {
    si.tilted.flag("truncation: polar box did not cover the tail");
    si.moment.flag("truncation: polar box did not cover the tail");
  }
  return {si.tilted, si.moment};
}

inline std::vector<VerificationReport> run_instance(const RunConfig& c, const InstanceSpec& s, std::uint64_t seed) {
  std::vector<VerificationReport> out;
  if (c.command == Command::VerifyStar) {
    const StarBody body = materialize_body(s, seed);
    LutwakCheck lc = verify_lutwak(body);
    out.push_back(std::move(lc.volume_route));
    out.push_back(std::move(lc.functional_route));
    out.push_back(verify_cn_identity(body));
    return out;
  }
  const GridFunction f = materialize_function(s, seed);
  const std::size_t n = f.dim();
  switch (c.command) {
    case Command::VerifyFunctional:
      out.push_back(verify_thm2(f, verify_options(c, f)));
      break;
    case Command::VerifySplit: {
      const auto lams = c.lambda_targets.empty() ? std::vector<double>{0.5} : c.lambda_targets;
      for (const Vec& d : directions_or(c, n, false))
        for (double lam : lams) {
          const double offset = find_quantile_offset(f, d, lam);
          const Hyperplane h(d, offset);
          VerificationReport r = verify_thm3_lambda(f, h, verify_options(c, f));
          r.flag("offset=" + format_number(offset));
          out.push_back(std::move(r));
          if (n >= 2) {
            const SplitData sd = construct_split(f, h);
            const GridFunction fz = translate(f, sd.z);
            const GridFunction g = detail::polar_for(fz, verify_options(c, fz)).g;
            const InductionStep st = verify_induction_step(reduce_dimension(fz, g, h.shifted(sd.z)));
            for (auto& rr : st.reports()) out.push_back(rr);
          }
        }
      break;
    }
    case Command::VerifyMedian:
      for (const Vec& d : directions_or(c, n, true)) out.push_back(verify_thm3_median(f, d, verify_options(c, f)));
      break;
    case Command::VerifyLemma: {
      const auto [p1, p2] = half_line_pair(f);
      out.push_back(verify_lemma_gm(p1, p2));
      break;
    }
    case Command::VerifyShift: {
      const auto lams = c.lambda_targets.empty() ? std::vector<double>{0.5} : c.lambda_targets;
      for (const Vec& d : directions_or(c, n, false))
        for (double lam : lams)
          for (auto& r : shift_reports(f, d, lam, c)) out.push_back(std::move(r));
      break;
    }
    case Command::SearchSantaloPoint:
      out.push_back(santalo_point_search(f, verify_options(c, f)).report);
      break;
    default:
      throw Error(ErrorCode::InvalidArgument, "command does not produce verification reports");
  }
  return out;
}

/// Verification rows for every instance, in instance order. Instance-level
/// failures become failed reports carrying the error in their flags.
inline std::vector<SeededReport> execute(const RunConfig& c) {
  const std::size_t jobs = c.instances.size();
  auto rows = parallel_map<std::vector<SeededReport>>(jobs, worker_count(c, jobs), [&](std::size_t i) {
    const InstanceSpec& s = c.instances[i];
    const std::uint64_t seed = instance_seed(s, c.global_seed + i);
    const std::optional<std::uint64_t> tag = is_seeded(s) ? std::optional<std::uint64_t>(seed) : std::nullopt;
    std::vector<SeededReport> out;
    try {
      for (auto& r : run_instance(c, s, seed)) {
        r.flag("instance=" + s.text());
        out.push_back({std::move(r), tag});
      }
    } catch (const std::exception& e) {
      VerificationReport r = make_error_report(theorem_of(c.command), e.what());
      r.flag("instance=" + s.text());
      out.push_back({std::move(r), tag});
    }
    return out;
  });
  std::vector<SeededReport> flat;
  for (auto& v : rows)
    for (auto& r : v) flat.push_back(std::move(r));
  return flat;
}

inline std::string reports_json(const std::vector<SeededReport>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(to_json(r.report));
  return arr.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Plot series

struct PlotPoint {
  double x = 0.0;
  VerificationReport report;
};

inline std::string emit_plot_data(const std::vector<PlotPoint>& points) {
  std::ostringstream os;
  os << "x,product,bound,margin\n";
  for (const auto& p : points)
    os << format_number(p.x) << ',' << format_number(p.report.product) << ',' << format_number(p.report.bound) << ','
       << format_number(p.report.margin) << '\n';
  return os.str();
}

/// lambda sweep: x = realized mass fraction, bound = (2 pi)^n / (4 x (1 - x)).
/// resolution sweep: x = nodes per axis, Thm2 report on the refined grid.
inline std::vector<PlotPoint> plot_points(const RunConfig& c) {
  std::vector<PlotPoint> pts;
  for (std::size_t i = 0; i < c.instances.size(); ++i) {
    const InstanceSpec& s = c.instances[i];
    const std::uint64_t seed = instance_seed(s, c.global_seed + i);
    if (c.sweep == "lambda") {
      const GridFunction f = materialize_function(s, seed);
      std::vector<double> lams = c.lambda_targets;
      if (lams.empty())
        for (int k = 1; k <= 9; ++k) lams.push_back(0.1 * k);
      for (const Vec& d : directions_or(c, f.dim(), false))
        for (double lam : lams) {
          const Hyperplane h(d, find_quantile_offset(f, d, lam));
          VerificationReport r = verify_thm3_lambda(f, h, verify_options(c, f));
          pts.push_back({*r.lambda, std::move(r)});
        }
    } else {
      std::vector<std::size_t> res = c.sweep_resolutions;
      if (res.empty()) res = {5, 7, 9, 11, 13, 15, 17};
      for (std::size_t r : res) {
        InstanceSpec t = s;
        t.resolution = std::vector<std::size_t>(s.dim, r);
        const GridFunction f = materialize_function(t, seed);
        pts.push_back({static_cast<double>(r), verify_thm2(f, verify_options(c, f))});
      }
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Generation

struct GeneratedInstance {
  std::string spec;  // instance text that reads the file back
  std::string path;
  std::uint64_t seed = 0;
};

inline std::vector<GeneratedInstance> generate(const RunConfig& c) {
  const InstanceSpec& fam = *c.family;
  const std::filesystem::path dir = c.output_path.empty() ? std::filesystem::path(".") : std::filesystem::path(c.output_path);
  std::filesystem::create_directories(dir);
  std::vector<GeneratedInstance> out;
  for (std::size_t i = 0; i < c.count; ++i) {
    const std::uint64_t seed = c.global_seed + i;
    const std::string stem = fam.family + "_d" + std::to_string(fam.dim) + "_s" + std::to_string(seed);
    if (fam.kind == InstanceKind::LogconcaveMixture) {
      const std::size_t k = fam.has("components") ? parse_unsigned("components", fam.params.at("components")) : 3;
      const GridFunction f = logconcave_mixture(fam.dim, seed, k, override_of(fam));
      const auto grid_path = (dir / (stem + ".grid")).string();
      write_grid(grid_path, f);
      nlohmann::json meta = {{"family", fam.family}, {"seed", seed}, {"dim", fam.dim}, {"components", k},
                             {"grid", stem + ".grid"}};
      detail::write_all((dir / (stem + ".json")).string(), meta.dump(2) + "\n");
      out.push_back({"grid_file:path=" + grid_path + ",dim=" + std::to_string(fam.dim), grid_path, seed});
    } else {
      const StarBody b = materialize_body(fam, seed);
      const auto body_path = (dir / (stem + ".json")).string();
      write_body(body_path, b, seed);
      out.push_back({"body_file:path=" + body_path + ",dim=" + std::to_string(fam.dim), body_path, seed});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Command line

inline std::pair<Vec, Vec> parse_box(const std::string& field, const std::string& text, std::size_t dim) {
  Vec lo, hi;
  for (const auto& axis : split(text, ',')) {
    const auto parts = split(axis, ':');
    if (parts.size() != 2) throw config_error(field, "expected lo:hi per axis, got '" + axis + "'");
    lo.push_back(parse_real(field, parts[0]));
    hi.push_back(parse_real(field, parts[1]));
  }
  if (lo.size() == 1 && dim > 1) {
    lo.assign(dim, lo[0]);
    hi.assign(dim, hi[0]);
  }
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(lo[a] < hi[a])) throw config_error(field, "lower bound must be below upper bound");
  return {lo, hi};
}

inline std::vector<std::size_t> parse_counts(const std::string& field, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_unsigned(field, p));
  if (out.empty()) throw config_error(field, "empty list");
  return out;
}

struct Flags {
  std::vector<std::string> instance;
  std::size_t dim = 0;
  std::vector<std::string> lambda;
  std::vector<std::string> direction;
  std::string resolution;
  std::string box;
  std::string polar_box;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  std::string config;
  std::string family;
  std::size_t count = 1;
  std::string sweep;
  std::string method;
  std::size_t threads = 0;
};

/// Config-file keys mirror the long flags; flags given on the command line win.
inline nlohmann::json load_config(const std::string& path) {
  try {
    return nlohmann::json::parse(detail::read_all(path));
  } catch (const nlohmann::json::exception& e) {
    throw config_error("--config", std::string("cannot parse: ") + e.what());
  } catch (const Error& e) {
    throw config_error("--config", e.what());
  }
}

inline std::vector<std::string> json_strings(const nlohmann::json& j, const std::string& field) {
  std::vector<std::string> out;
  auto one = [&](const nlohmann::json& v) {
    if (v.is_string())
      out.push_back(v.get<std::string>());
    else if (v.is_number())
      out.push_back(v.dump());
    else if (v.is_array()) {
      std::string s;
      for (const auto& e : v) s += (s.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
      out.push_back(s);
    } else
      throw config_error(field, "unsupported value " + v.dump());
  };
  if (j.is_array() && field != "resolution" && field != "box" && field != "polar_box") {
    for (const auto& v : j) one(v);
  } else {
    one(j);
  }
  return out;
}

/// Builds a RunConfig from an optional config file plus explicitly given flags.
inline RunConfig build_config(std::optional<std::string> command, const Flags& fl,
                              const std::function<bool(const std::string&)>& given) {
  nlohmann::json cfg = nlohmann::json::object();
  if (!fl.config.empty()) cfg = load_config(fl.config);
  if (!cfg.is_object()) throw config_error("--config", "top level must be an object");
  auto pick = [&](const std::string& key, const std::string& flag) -> std::optional<std::vector<std::string>> {
    if (given(flag)) return std::nullopt;
    if (!cfg.contains(key)) return std::nullopt;
    return json_strings(cfg.at(key), key);
  };

  RunConfig rc;
  if (command) {
    rc.command = command_from_string(*command);
  } else if (cfg.contains("command") && cfg.at("command").is_string()) {
    rc.command = command_from_string(cfg.at("command").get<std::string>());
  } else {
    throw config_error("command", "no command given");
  }

  std::size_t dim = rc.command == Command::VerifyStar ? 2 : 1;
  if (given("--dim"))
    dim = fl.dim;
  else if (auto v = pick("dim", "--dim"))
    dim = parse_unsigned("dim", v->at(0));

  auto strings = [&](const std::string& key, const std::string& flag, const std::vector<std::string>& flag_value) {
    if (given(flag)) return flag_value;
    return pick(key, flag).value_or(std::vector<std::string>{});
  };
  auto scalar = [&](const std::string& key, const std::string& flag, const std::string& flag_value) {
    if (given(flag)) return flag_value;
    auto v = pick(key, flag);
    return v ? v->at(0) : std::string();
  };

  for (const auto& t : strings("instances", "--instance", fl.instance)) rc.instances.push_back(parse_instance(t, dim));
  for (const auto& t : strings("lambda", "--lambda", fl.lambda))
    for (double l : parse_reals("--lambda", t)) rc.lambda_targets.push_back(l);
  for (const auto& t : strings("direction", "--direction", fl.direction)) rc.directions.push_back(parse_reals("--direction", t));

  if (given("--seed"))
    rc.global_seed = fl.seed;
  else if (auto v = pick("seed", "--seed"))
    rc.global_seed = parse_unsigned("seed", v->at(0));

  rc.output_path = scalar("out", "--out", fl.out);
  const std::string fmt = scalar("format", "--format", fl.format);
  if (!fmt.empty()) {
    rc.json = rc.csv = false;
    for (const auto& f : split(fmt, ',')) {
      if (f == "json")
        rc.json = true;
      else if (f == "csv")
        rc.csv = true;
      else
        throw config_error("--format", "unknown format '" + f + "'");
    }
  }

  const std::string res = scalar("resolution", "--resolution", fl.resolution);
  const std::string box = scalar("box", "--box", fl.box);
  const std::string pbox = scalar("polar_box", "--polar-box", fl.polar_box);
  for (auto& s : rc.instances) {
    if (!res.empty() && rc.command != Command::PlotData) s.resolution = parse_counts("--resolution", res);
    if (!box.empty()) {
      auto [lo, hi] = parse_box("--box", box, s.dim);
      s.lower = lo;
      s.upper = hi;
    }
  }
  if (!res.empty() && rc.command == Command::PlotData) rc.sweep_resolutions = parse_counts("--resolution", res);
  if (!pbox.empty()) {
    const std::size_t pd = rc.instances.empty() ? dim : rc.instances[0].dim;
    auto [lo, hi] = parse_box("--polar-box", pbox, pd);
    rc.polar_lower = lo;
    rc.polar_upper = hi;
  }

  const std::string method = scalar("method", "--method", fl.method);
  if (method == "brute")
    rc.method = TransformMethod::BruteForce;
  else if (!method.empty() && method != "fast")
    throw config_error("--method", "expected 'fast' or 'brute'");

  const std::string family = scalar("family", "--family", fl.family);
  if (!family.empty()) {
    rc.family = parse_instance(family, dim);
    if (!res.empty()) rc.family->resolution = parse_counts("--resolution", res);
    if (!box.empty()) {
      auto [lo, hi] = parse_box("--box", box, rc.family->dim);
      rc.family->lower = lo;
      rc.family->upper = hi;
    }
  }
  if (given("--count"))
    rc.count = fl.count;
  else if (auto v = pick("count", "--count"))
    rc.count = parse_unsigned("count", v->at(0));
  const std::string sweep = scalar("sweep", "--sweep", fl.sweep);
  if (!sweep.empty()) rc.sweep = sweep;
  if (given("--threads"))
    rc.threads = fl.threads;
  else if (auto v = pick("threads", "--threads"))
    rc.threads = parse_unsigned("threads", v->at(0));

  validate(rc);
  return rc;
}

inline std::string with_extension(const std::string& path, const std::string& ext) {
  std::filesystem::path p(path);
  if (p.extension() == ".json" || p.extension() == ".csv") p.replace_extension();
  return p.string() + ext;
}

inline void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  detail::write_all(path, text);
}

/// Executes a validated configuration; returns the process exit status.
inline int run(const RunConfig& c, std::ostream& out) {
  switch (c.command) {
    case Command::Generate: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& g : generate(c)) arr.push_back({{"instance", g.spec}, {"path", g.path}, {"seed", g.seed}});
      out << arr.dump(2) << "\n";
      return 0;
    }
    case Command::TransformPolar: {
      nlohmann::json arr = nlohmann::json::array();
      bool ok = true;
      for (std::size_t i = 0; i < c.instances.size(); ++i) {
        const InstanceSpec& s = c.instances[i];
        nlohmann::json j = {{"instance", s.text()}};
        try {
          const GridFunction f = materialize_function(s, instance_seed(s, c.global_seed + i));
          TransformResult tr;
          bool truncated = false;
          if (c.polar_lower) {
            tr = polar_function(f, Box(*c.polar_lower, *c.polar_upper, f.box.counts), c.method);
          } else {
            CoveredTransform ct = polar_function_covering(f, {}, c.method);
            tr = std::move(ct.transform);
            truncated = ct.truncated;
          }
          j["method"] = std::string(to_string(tr.method));
          j["input_box"] = to_json(tr.input_box);
          j["output_box"] = to_json(tr.output_box);
          j["integral"] = integrate(tr.output);
          j["truncated"] = truncated;
          if (!c.output_path.empty()) {
            std::string path = c.output_path;
            if (c.instances.size() > 1) {
              std::filesystem::path p(path);
              path = (p.parent_path() / (p.stem().string() + "_" + std::to_string(i) + p.extension().string())).string();
            }
            write_grid(path, tr.output);
            j["path"] = path;
          }
        } catch (const std::exception& e) {
          ok = false;
          j["error"] = e.what();
        }
        arr.push_back(std::move(j));
      }
      out << arr.dump(2) << "\n";
      return ok ? 0 : 1;
    }
    case Command::PlotData: {
      const auto pts = plot_points(c);
      const std::string csv = emit_plot_data(pts);
      if (c.output_path.empty())
        out << csv;
      else
        write_text(c.output_path, csv);
      bool all = true;
      for (const auto& p : pts) all = all && p.report.passed;
      return all ? 0 : 1;
    }
    default: break;
  }
  const auto rows = execute(c);
  const std::string js = reports_json(rows);
  const std::string cs = csv_summary(rows);
  if (c.output_path.empty()) {
    if (c.json) out << js;
    if (c.csv) out << cs;
  } else {
    if (c.json) write_text(with_extension(c.output_path, ".json"), js);
    if (c.csv) write_text(with_extension(c.output_path, ".csv"), cs);
  }
  bool all = true;
  for (const auto& r : rows) all = all && r.report.passed;
  return all ? 0 : 1;
}

inline void add_run_options(CLI::App* app, Flags& f) {
  app->add_option("--instance,-i", f.instance, "instance spec, e.g. gaussian or scaled_gaussian:a=4 (repeatable)");
  app->add_option("--dim,-d", f.dim, "dimension (default 1; 2 for star bodies)");
  app->add_option("--lambda", f.lambda, "mass fractions in (0, 1), comma separated or repeated");
  app->add_option("--direction", f.direction, "hyperplane normal, e.g. 1,0 (repeatable)");
  app->add_option("--resolution", f.resolution, "grid counts per axis, e.g. 401 or 401,201");
  app->add_option("--box", f.box, "instance bounds lo:hi per axis, e.g. -8:8,-4:4");
  app->add_option("--polar-box", f.polar_box, "bounds for the polar grid; default grows to cover the tail");
  app->add_option("--seed", f.seed, "global seed");
  app->add_option("--out,-o", f.out, "output path");
  app->add_option("--format", f.format, "json, csv or json,csv");
  app->add_option("--config", f.config, "JSON config file; flags override its keys");
  app->add_option("--method", f.method, "fast (default) or brute");
  app->add_option("--threads", f.threads, "worker threads (default SANTALO_THREADS or all cores)");
}

/// Entry point used by the executable; returns the exit status
/// (0 all passed, 1 some check failed, 2 configuration error).
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical checks of functional volume-product inequalities", "santalo"};
  Flags fl;
  app.add_option("--config", fl.config, "JSON config file");
  app.require_subcommand(0, 1);

  std::vector<std::pair<CLI::App*, std::string>> leaves;
  auto* verify = app.add_subcommand("verify", "run a verifier");
  verify->require_subcommand(1);
  const std::pair<const char*, const char*> verbs[] = {
      {"functional", "product of a recentered function and its polar against (2 pi)^n"},
      {"star", "volume product of a recentered star body, by volumes and through phi_S"},
      {"split", "lambda bound at hyperplanes with the given mass fractions"},
      {"median", "bound at the median hyperplane"},
      {"lemma", "half-line product against pi/2"},
      {"shift", "tilted product and moment identity for a centered g"}};
  for (const auto& [name, what] : verbs)
    leaves.push_back({verify->add_subcommand(name, what), std::string("verify ") + name});
  auto* transform = app.add_subcommand("transform", "compute transforms");
  transform->require_subcommand(1);
  leaves.push_back({transform->add_subcommand("polar", "write the polar function as a grid file"), "transform polar"});
  auto* search = app.add_subcommand("search", "searches");
  search->require_subcommand(1);
  leaves.push_back({search->add_subcommand("santalo-point", "minimize the product over translations"),
                    "search santalo-point"});
  leaves.push_back({app.add_subcommand("generate", "write seeded random instances"), "generate"});
  leaves.push_back({app.add_subcommand("plot-data", "CSV series for plots"), "plot-data"});
  for (auto& [leaf, name] : leaves) {
    add_run_options(leaf, fl);
    if (name == "generate") {
      leaf->add_option("--family", fl.family, "logconcave_mixture[:components=k] or random-star[:smoothness=s]");
      leaf->add_option("--count", fl.count, "number of instances");
    }
    if (name == "plot-data") leaf->add_option("--sweep", fl.sweep, "lambda (default) or resolution");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::optional<std::string> command;
  CLI::App* chosen = nullptr;
  for (auto& [leaf, name] : leaves)
    if (leaf->parsed()) {
      command = name;
      chosen = leaf;
    }
  auto given = [&](const std::string& flag) {
    if (chosen) {
      try {
        if (chosen->count(flag) > 0) return true;
      } catch (const CLI::OptionNotFound&) {
      }
    }
    return false;
  };

  try {
    const RunConfig rc = build_config(command, fl, given);
    return run(rc, out);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) {
      err << "config error: " << e.what() << "\n";
      return 2;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace santalo::cli
