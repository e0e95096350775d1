#pragma once

// File formats.
//
// Grid file: "GRIDFN1", u32 dim, per axis (f64 lower, f64 upper, u32 count),
// then row-major f64 log-values; everything little-endian.
// Body file: JSON {"dim", "grid": {"counts": [...]}, "rho": [...], "seed"?}.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "santalo/error.hpp"
#include "santalo/grid.hpp"
#include "santalo/starbody.hpp"

namespace santalo {

inline constexpr char kGridMagic[] = "GRIDFN1";

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::string& out, T v) {
  v = to_little(v);
  const auto* p = reinterpret_cast<const char*>(&v);
  out.append(p, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), ErrorCode::Io, "grid file truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return to_little(v);
}

inline std::string read_all(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_all(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::Io, "cannot write '" + path + "'");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(os), ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace detail

/// Node coordinates are written as the box they occupy, so a translated
/// function round-trips to the same nodes.
inline std::string encode_grid(const GridFunction& f) {
  const Box b = f.box.flattened();
  std::string out(kGridMagic, 7);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(b.dim()));
  for (std::size_t a = 0; a < b.dim(); ++a) {
    detail::put<double>(out, b.lower[a]);
    detail::put<double>(out, b.upper[a]);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(b.counts[a]));
  }
  for (double v : f.logvals) detail::put<double>(out, v);
  return out;
}

inline GridFunction decode_grid(const std::string& in) {
  require(in.size() >= 7 && in.compare(0, 7, kGridMagic) == 0, ErrorCode::Io, "not a GRIDFN1 file");
  std::size_t pos = 7;
  const auto dim = detail::take<std::uint32_t>(in, pos);
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::Io, "grid file dimension " + std::to_string(dim) + " unsupported");
  Vec lo(dim), hi(dim);
  std::vector<std::size_t> counts(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    lo[a] = detail::take<double>(in, pos);
    hi[a] = detail::take<double>(in, pos);
    counts[a] = detail::take<std::uint32_t>(in, pos);
  }
  Box box(std::move(lo), std::move(hi), std::move(counts));
  require(in.size() == pos + 8 * box.size(), ErrorCode::Io, "grid file payload has the wrong length");
  std::vector<double> lv(box.size());
  for (double& v : lv) v = detail::take<double>(in, pos);
  return GridFunction(std::move(box), std::move(lv));
}

inline void write_grid(const std::string& path, const GridFunction& f) { detail::write_all(path, encode_grid(f)); }

inline GridFunction read_grid(const std::string& path) { return decode_grid(detail::read_all(path)); }

inline nlohmann::json body_to_json(const StarBody& s, std::optional<std::uint64_t> seed = std::nullopt) {
  nlohmann::json j;
  j["dim"] = s.dim();
  j["grid"] = {{"counts", s.grid().counts()}};
  j["rho"] = s.rho();
  if (seed) j["seed"] = *seed;
  return j;
}

inline StarBody body_from_json(const nlohmann::json& j) {
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    const auto counts = j.at("grid").at("counts").get<std::vector<std::size_t>>();
    AngularGrid grid = [&] {
      if (dim == 2) {
        require(counts.size() == 1, ErrorCode::Io, "2-D body grid needs one count");
        return AngularGrid::circle(counts[0]);
      }
      require(dim == 3 && counts.size() == 2, ErrorCode::Io, "3-D body grid needs counts [n_lat, n_lon]");
      return AngularGrid::sphere(counts[0], counts[1]);
    }();
    return StarBody(std::move(grid), j.at("rho").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed body file: ") + e.what());
  }
}

inline void write_body(const std::string& path, const StarBody& s, std::optional<std::uint64_t> seed = std::nullopt) {
  detail::write_all(path, body_to_json(s, seed).dump() + "\n");
}

inline StarBody read_body(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_all(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Io, "cannot parse '" + path + "': " + e.what());
  }
  return body_from_json(j);
}

}  // namespace santalo
