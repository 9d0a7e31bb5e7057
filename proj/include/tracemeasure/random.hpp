#ifndef TRACEMEASURE_RANDOM_HPP
#define TRACEMEASURE_RANDOM_HPP

#include "errors.hpp"
#include "rational.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace tracemeasure {

/// Uniform integer in [0, bound) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Index i with probability weights[i] / sum(weights), exactly.
inline std::size_t draw_index(std::mt19937_64& rng, const std::vector<Rational>& weights) {
  BigInt common = 1;
  for (const auto& w : weights) common = boost::multiprecision::lcm(common, denominator(w));
  std::vector<BigInt> scaled;
  BigInt total = 0;
  for (const auto& w : weights) {
    scaled.push_back(numerator(w) * (common / denominator(w)));
    total += scaled.back();
  }
  if (total <= 0 || total > BigInt(std::numeric_limits<std::uint64_t>::max()))
    throw InfeasibleError("weights out of sampling range");
  BigInt u = uniform_below(rng, static_cast<std::uint64_t>(total));
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (u < scaled[i]) return i;
    u -= scaled[i];
  }
  return scaled.size() - 1;
}

}  // namespace tracemeasure

#endif
