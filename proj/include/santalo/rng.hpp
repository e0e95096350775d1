#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "santalo/grid.hpp"

namespace santalo {

/// Seeded generator with a distribution layer that is identical on every
/// standard library (std::*_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Vec unit_vector(std::size_t dim) {
    for (;;) {
      Vec v(dim);
      for (double& c : v) c = normal();
      const double len = norm(v);
      if (len > 1e-12) {
        for (double& c : v) c /= len;
        return v;
      }
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace santalo
