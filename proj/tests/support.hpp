#ifndef TRACEMEASURE_TESTS_SUPPORT_HPP
#define TRACEMEASURE_TESTS_SUPPORT_HPP

#include <tracemeasure/ars.hpp>
#include <tracemeasure/measure.hpp>

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace tmtest {

using namespace tracemeasure;

inline WeightedArs intro_system() { return parse_ars("a -> b\na -> c\nc -> d\nc -> e\n"); }

inline std::uint64_t strategy_count(const WeightedArs& ars) {
  std::uint64_t n = 1;
  for (ObjId a : non_normal_objects(ars)) n *= ars.successors(a).size();
  return n;
}

/// Random finite system with at most `max_omega` strategies. Cycles allowed
/// when `acyclic` is false; otherwise edges only go from lower to higher index.
inline WeightedArs random_system(std::mt19937_64& rng, std::uint64_t max_omega, bool acyclic = false) {
  for (;;) {
    WeightedArs ars;
    const int objects = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < objects; ++i) ars.intern("o" + std::to_string(i));
    for (int i = 0; i < objects; ++i) {
      if (rng() % 3 == 0) continue;
      const int fanout = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < fanout; ++k) {
        int j = static_cast<int>(rng() % objects);
        if (acyclic) {
          if (i + 1 >= objects) break;
          j = i + 1 + static_cast<int>(rng() % (objects - i - 1));
        }
        ars.add_rule(ObjId{static_cast<std::uint32_t>(i)}, ObjId{static_cast<std::uint32_t>(j)}, 1 + rng() % 3);
      }
    }
    if (strategy_count(ars) <= max_omega) return ars;
  }
}

/// Every box of a finite system: each non-normal object is either left free
/// or pinned to one of its reducts.
inline std::vector<Box<ObjId>> all_boxes(const WeightedArs& ars) {
  std::vector<Box<ObjId>> boxes{Box<ObjId>{}};
  for (ObjId a : non_normal_objects(ars)) {
    std::vector<Box<ObjId>> next;
    for (const auto& b : boxes) {
      next.push_back(b);
      for (const auto& e : ars.successors(a)) {
        auto c = b;
        c.constraints[a] = e.target;
        next.push_back(std::move(c));
      }
    }
    boxes = std::move(next);
  }
  return boxes;
}

inline bool strategy_in_box(const Strategy<ObjId>& f, const Box<ObjId>& b) {
  std::map<ObjId, ObjId> m(f.choices.begin(), f.choices.end());
  for (const auto& [a, t] : b.constraints)
    if (m.at(a) != t) return false;
  return true;
}

/// Direct product mult/rho, computed without the library.
inline Rational naive_box_prob(const WeightedArs& ars, const Box<ObjId>& b) {
  Rational p{1};
  for (const auto& [a, t] : b.constraints) {
    std::uint64_t rho = 0, m = 0;
    for (const auto& e : ars.successors(a)) {
      rho += e.mult;
      if (e.target == t) m = e.mult;
    }
    p *= Rational(m, rho);
  }
  return p;
}

/// Infimum over box covers of a set of strategies (given as a bitmask over the
/// enumeration order), by exact search over all boxes. Independent of
/// outer_measure: it never sums strategy weights.
class CoverOracle {
 public:
  explicit CoverOracle(const WeightedArs& ars) : strategies_(enumerate_strategies(ars)) {
    for (const auto& b : all_boxes(ars)) {
      std::uint32_t mask = 0;
      for (std::size_t i = 0; i < strategies_.size(); ++i)
        if (strategy_in_box(strategies_[i], b)) mask |= 1u << i;
      if (mask != 0) boxes_.push_back({mask, naive_box_prob(ars, b)});
    }
  }

  std::size_t size() const { return strategies_.size(); }
  const std::vector<Strategy<ObjId>>& strategies() const { return strategies_; }

  Rational min_cover(std::uint32_t target) {
    if (target == 0) return 0;
    if (auto it = memo_.find(target); it != memo_.end()) return it->second;
    const std::uint32_t low = target & (~target + 1);
    Rational best{-1};
    for (const auto& [mask, p] : boxes_) {
      if (!(mask & low)) continue;
      Rational c = p + min_cover(target & ~mask);
      if (best < 0 || c < best) best = c;
    }
    memo_[target] = best;
    return best;
  }

 private:
  std::vector<Strategy<ObjId>> strategies_;
  std::vector<std::pair<std::uint32_t, Rational>> boxes_;
  std::map<std::uint32_t, Rational> memo_;
};

}  // namespace tmtest

#endif
