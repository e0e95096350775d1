#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "santalo/error.hpp"
#include "santalo/grid.hpp"

namespace santalo {

enum class Theorem { Thm1, Thm2, Thm3Lambda, Thm3Median, Lemma1, Eq8, Corollary };

inline std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::Thm1: return "Thm1";
    case Theorem::Thm2: return "Thm2";
    case Theorem::Thm3Lambda: return "Thm3Lambda";
    case Theorem::Thm3Median: return "Thm3Median";
    case Theorem::Lemma1: return "Lemma1";
    case Theorem::Eq8: return "Eq8";
    case Theorem::Corollary: return "Corollary";
  }
  return "Unknown";
}

inline Theorem theorem_from_string(std::string_view s) {
  for (Theorem t : {Theorem::Thm1, Theorem::Thm2, Theorem::Thm3Lambda, Theorem::Thm3Median,
                    Theorem::Lemma1, Theorem::Eq8, Theorem::Corollary})
    if (to_string(t) == s) return t;
  throw Error(ErrorCode::InvalidArgument, "unknown theorem tag '" + std::string(s) + "'");
}

struct GridRecord {
  std::string role;
  Box box;
};

struct GridMeta {
  std::vector<GridRecord> grids;

  void add(std::string role, const Box& b) { grids.push_back({std::move(role), b.flattened()}); }
};

/// One theorem check. passed <=> product <= bound * (1 + tolerance), except
/// for two-sided identity checks, which say so in their flags.
struct VerificationReport {
  Theorem theorem = Theorem::Thm2;
  double product = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  std::optional<double> lambda;
  GridMeta grid_meta;
  bool passed = false;
  std::vector<std::string> flags;

  void flag(std::string s) { flags.push_back(std::move(s)); }
};

inline VerificationReport make_bound_report(Theorem t, double product, double bound, double tolerance) {
  VerificationReport r;
  r.theorem = t;
  r.product = product;
  r.bound = bound;
  r.margin = bound - product;
  r.passed = std::isfinite(product) && product <= bound * (1.0 + tolerance);
  return r;
}

/// Report for an instance that could not be evaluated.
inline VerificationReport make_error_report(Theorem t, const std::string& what) {
  VerificationReport r;
  r.theorem = t;
  r.product = std::numeric_limits<double>::quiet_NaN();
  r.bound = std::numeric_limits<double>::quiet_NaN();
  r.margin = std::numeric_limits<double>::quiet_NaN();
  r.passed = false;
  r.flag("error: " + what);
  return r;
}

inline nlohmann::json to_json(const Box& b) {
  const Box flat = b.flattened();
  return {{"lower", flat.lower}, {"upper", flat.upper}, {"counts", flat.counts}};
}

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json grids = nlohmann::json::array();
  std::vector<std::size_t> resolutions;
  for (const auto& g : r.grid_meta.grids) {
    nlohmann::json j = to_json(g.box);
    j["role"] = g.role;
    grids.push_back(std::move(j));
    resolutions.push_back(g.box.size());
  }
  nlohmann::json j;
  j["theorem"] = std::string(to_string(r.theorem));
  j["product"] = r.product;
  j["bound"] = r.bound;
  j["margin"] = r.margin;
  j["lambda"] = r.lambda ? nlohmann::json(*r.lambda) : nlohmann::json(nullptr);
  j["grid_meta"] = {{"boxes", grids}, {"resolutions", resolutions}};
  j["passed"] = r.passed;
  j["flags"] = r.flags;
  return j;
}

inline double json_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline VerificationReport report_from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.theorem = theorem_from_string(j.at("theorem").get<std::string>());
  r.product = json_number(j.at("product"));
  r.bound = json_number(j.at("bound"));
  r.margin = json_number(j.at("margin"));
  if (!j.at("lambda").is_null()) r.lambda = j.at("lambda").get<double>();
  for (const auto& g : j.at("grid_meta").at("boxes")) {
    Box b(g.at("lower").get<Vec>(), g.at("upper").get<Vec>(), g.at("counts").get<std::vector<std::size_t>>());
    r.grid_meta.grids.push_back({g.at("role").get<std::string>(), b});
  }
  r.passed = j.at("passed").get<bool>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

/// Shortest round-trip text for a double; "nan"/"inf" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nlohmann::json(v).dump();
}

inline std::string format_vector(std::span<const double> v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_number(v[i]);
  os << ')';
  return os.str();
}

struct SeededReport {
  VerificationReport report;
  std::optional<std::uint64_t> seed;
};

inline std::string csv_summary(const std::vector<SeededReport>& rows) {
  std::ostringstream os;
  os << "theorem,seed,product,bound,margin,passed\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << to_string(r.theorem) << ',' << (row.seed ? std::to_string(*row.seed) : std::string()) << ','
       << format_number(r.product) << ',' << format_number(r.bound) << ',' << format_number(r.margin)
       << ',' << (r.passed ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace santalo
