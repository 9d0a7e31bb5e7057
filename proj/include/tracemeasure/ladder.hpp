#ifndef TRACEMEASURE_LADDER_HPP
#define TRACEMEASURE_LADDER_HPP

#include "ars.hpp"

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracemeasure {

/// Object of the ladder a_i -> a_{i+1}, a_i -> a'_{i+1}.
struct LadderObj {
  std::uint32_t level = 0;
  bool primed = false;

  friend auto operator<=>(const LadderObj&, const LadderObj&) = default;
};

/// The infinite ladder, generated on demand. Every unprimed rung has two
/// equiprobable reducts; primed rungs are normal.
class LadderSystem {
 public:
  using object_type = LadderObj;

  std::vector<Edge<LadderObj>> successors(LadderObj a) const {
    if (a.primed) return {};
    return {Edge<LadderObj>{LadderObj{a.level + 1, false}, 1}, Edge<LadderObj>{LadderObj{a.level + 1, true}, 1}};
  }

  std::string name(LadderObj a) const { return (a.primed ? "a'" : "a") + std::to_string(a.level); }

  /// Accepts "a7" and "a'7".
  static std::optional<LadderObj> parse(std::string_view text) {
    if (text.empty() || text.front() != 'a') return std::nullopt;
    text.remove_prefix(1);
    bool primed = false;
    if (!text.empty() && text.front() == '\'') {
      primed = true;
      text.remove_prefix(1);
    }
    std::uint32_t level = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), level);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    if (primed && level == 0) return std::nullopt;
    return LadderObj{level, primed};
  }
};

/// Finite prefix of the ladder with rules for rungs 0..n. Stopping events
/// within n steps from a0 agree with the infinite ladder.
inline WeightedArs ladder_prefix(std::uint32_t n) {
  WeightedArs ars;
  LadderSystem ladder;
  for (std::uint32_t i = 0; i <= n; ++i) {
    const LadderObj from{i, false};
    for (const auto& e : ladder.successors(from)) ars.add_rule(ladder.name(from), ladder.name(e.target), e.mult);
  }
  return ars;
}

}  // namespace tracemeasure

#endif
