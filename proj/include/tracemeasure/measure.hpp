#ifndef TRACEMEASURE_MEASURE_HPP
#define TRACEMEASURE_MEASURE_HPP

#include "ars.hpp"
#include "errors.hpp"
#include "rational.hpp"

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tracemeasure {

struct Caps {
  std::uint64_t max_strategies = std::uint64_t{1} << 20;
  std::uint64_t max_subsets = std::uint64_t{1} << 16;
};

/// The set of strategies agreeing with a finite partial assignment.
/// No constraints denotes the whole space.
template <class Obj>
struct Box {
  std::map<Obj, Obj> constraints;

  friend bool operator==(const Box&, const Box&) = default;
};

/// A total choice of reduct for every non-normal object.
template <class Obj>
struct Strategy {
  std::vector<std::pair<Obj, Obj>> choices;  // sorted by source

  Box<Obj> as_box() const { return Box<Obj>{std::map<Obj, Obj>(choices.begin(), choices.end())}; }

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

template <RewriteSystem S>
void validate_box(const S& sys, const Box<typename S::object_type>& box) {
  for (const auto& [a, target] : box.constraints) {
    std::uint64_t mult = 0;
    bool any = false;
    for (const auto& e : sys.successors(a)) {
      any = true;
      if (e.target == target) mult = e.mult;
    }
    if (!any) throw InputError("constrained object is normal: " + std::string(sys.name(a)));
    if (mult == 0)
      throw InputError("constraint " + std::string(sys.name(a)) + " -> " + std::string(sys.name(target)) +
                       " has zero multiplicity");
  }
}

/// p(B): product over constraints of mult(a, a') / rho(a). The empty box has p = 1.
template <RewriteSystem S>
Prob box_prob(const S& sys, const Box<typename S::object_type>& box) {
  validate_box(sys, box);
  Rational p{1};
  for (const auto& [a, target] : box.constraints) {
    std::uint64_t mult = 0;
    std::uint64_t rho = 0;
    for (const auto& e : sys.successors(a)) {
      rho += e.mult;
      if (e.target == target) mult = e.mult;
    }
    p *= Rational(mult, rho);
  }
  return Prob(p);
}

/// Argument of the outer measure: an explicitly listed set of strategies, a
/// finite union of boxes, or a boolean combination of those.
template <class Obj>
class EventSet {
 public:
  struct Explicit {
    std::vector<Strategy<Obj>> strategies;
  };
  struct BoxUnion {
    std::vector<Box<Obj>> boxes;
  };
  struct Complement {
    EventSet inner;
  };
  struct Intersection {
    EventSet lhs;
    EventSet rhs;
  };
  using Node = std::variant<Explicit, BoxUnion, Complement, Intersection>;

  static EventSet of_strategies(std::vector<Strategy<Obj>> s) { return EventSet(Explicit{std::move(s)}); }
  static EventSet of_boxes(std::vector<Box<Obj>> b) { return EventSet(BoxUnion{std::move(b)}); }
  static EventSet of_box(Box<Obj> b) { return of_boxes({std::move(b)}); }
  static EventSet empty() { return of_boxes({}); }
  static EventSet omega() { return of_box(Box<Obj>{}); }
  static EventSet complement(EventSet a) { return EventSet(Complement{std::move(a)}); }
  static EventSet intersect(EventSet a, EventSet b) { return EventSet(Intersection{std::move(a), std::move(b)}); }
  static EventSet unite(EventSet a, EventSet b) {
    return complement(intersect(complement(std::move(a)), complement(std::move(b))));
  }
  static EventSet difference(EventSet a, EventSet b) { return intersect(std::move(a), complement(std::move(b))); }

  const Node& node() const { return *node_; }

 private:
  explicit EventSet(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  std::shared_ptr<const Node> node_;
};

namespace detail {

template <class Obj>
void collect_domain(const EventSet<Obj>& set, std::set<Obj>& domain, bool& needs_full) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, typename EventSet<Obj>::Explicit>) {
          needs_full = true;
        } else if constexpr (std::is_same_v<T, typename EventSet<Obj>::BoxUnion>) {
          for (const auto& b : n.boxes)
            for (const auto& [a, _] : b.constraints) domain.insert(a);
        } else if constexpr (std::is_same_v<T, typename EventSet<Obj>::Complement>) {
          collect_domain(n.inner, domain, needs_full);
        } else {
          collect_domain(n.lhs, domain, needs_full);
          collect_domain(n.rhs, domain, needs_full);
        }
      },
      set.node());
}

}  // namespace detail

/// Strategies restricted to a finite domain of non-normal objects, enumerated
/// in mixed radix. Each element stands for the cylinder of full strategies that
/// agree with it on the domain, and carries that cylinder's box probability.
template <RewriteSystem S>
class StrategySpace {
 public:
  using Obj = typename S::object_type;
  using Bits = boost::dynamic_bitset<>;

  StrategySpace(const S& sys, std::vector<Obj> domain, const Caps& caps = {}) : sys_(&sys), domain_(std::move(domain)) {
    std::sort(domain_.begin(), domain_.end());
    domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
    std::uint64_t count = 1;
    for (const Obj& a : domain_) {
      std::vector<Edge<Obj>> edges;
      for (const auto& e : sys.successors(a)) edges.push_back(Edge<Obj>{e.target, e.mult});
      if (edges.empty()) throw InputError("constrained object is normal: " + std::string(sys.name(a)));
      std::uint64_t rho = 0;
      for (const auto& e : edges) rho += e.mult;
      degree_.push_back(rho);
      if (count > caps.max_strategies / edges.size()) throw InfeasibleError("strategy space too large");
      count *= edges.size();
      choices_.push_back(std::move(edges));
    }
    size_ = count;
    weights_.reserve(size_);
    for (std::uint64_t i = 0; i < size_; ++i) {
      Rational w{1};
      std::uint64_t rest = i;
      for (std::size_t k = 0; k < domain_.size(); ++k) {
        const auto& e = choices_[k][rest % choices_[k].size()];
        rest /= choices_[k].size();
        w *= Rational(e.mult, degree_[k]);
      }
      weights_.push_back(std::move(w));
    }
  }

  std::uint64_t size() const { return size_; }
  const std::vector<Obj>& domain() const { return domain_; }
  const Rational& weight(std::uint64_t i) const { return weights_[i]; }

  Obj choice(std::uint64_t index, std::size_t k) const {
    std::uint64_t rest = index;
    for (std::size_t j = 0; j < k; ++j) rest /= choices_[j].size();
    return choices_[k][rest % choices_[k].size()].target;
  }

  Strategy<Obj> strategy(std::uint64_t index) const {
    Strategy<Obj> s;
    for (std::size_t k = 0; k < domain_.size(); ++k) s.choices.emplace_back(domain_[k], choice(index, k));
    return s;
  }

  bool contains(std::uint64_t index, const Box<Obj>& box) const {
    for (const auto& [a, target] : box.constraints) {
      auto it = std::lower_bound(domain_.begin(), domain_.end(), a);
      if (it == domain_.end() || *it != a)
        throw InputError("box constrains an object outside the strategy domain: " + std::string(sys_->name(a)));
      if (choice(index, static_cast<std::size_t>(it - domain_.begin())) != target) return false;
    }
    return true;
  }

  /// Index of a full strategy; the domain must be exactly the strategy's.
  std::uint64_t index_of(const Strategy<Obj>& s) const {
    if (s.choices.size() != domain_.size()) throw InputError("strategy is not total on the non-normal objects");
    std::uint64_t index = 0;
    std::uint64_t radix = 1;
    for (std::size_t k = 0; k < domain_.size(); ++k) {
      const auto& [a, target] = s.choices[k];
      if (a != domain_[k]) throw InputError("strategy is not total on the non-normal objects");
      const auto& edges = choices_[k];
      auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge<Obj>& e) { return e.target == target; });
      if (it == edges.end())
        throw InputError("strategy picks a non-reduct: " + std::string(sys_->name(a)) + " -> " +
                         std::string(sys_->name(target)));
      index += radix * static_cast<std::uint64_t>(it - edges.begin());
      radix *= edges.size();
    }
    return index;
  }

  Bits materialize(const EventSet<Obj>& set) const {
    return std::visit(
        [&](const auto& n) -> Bits {
          using T = std::decay_t<decltype(n)>;
          Bits bits(size_);
          if constexpr (std::is_same_v<T, typename EventSet<Obj>::Explicit>) {
            for (const auto& s : n.strategies) bits.set(index_of(s));
          } else if constexpr (std::is_same_v<T, typename EventSet<Obj>::BoxUnion>) {
            for (const auto& b : n.boxes) {
              validate_box(*sys_, b);
              for (std::uint64_t i = 0; i < size_; ++i)
                if (!bits.test(i) && contains(i, b)) bits.set(i);
            }
          } else if constexpr (std::is_same_v<T, typename EventSet<Obj>::Complement>) {
            bits = materialize(n.inner);
            bits.flip();
          } else {
            bits = materialize(n.lhs) & materialize(n.rhs);
          }
          return bits;
        },
        set.node());
  }

  Rational measure(const Bits& bits) const {
    Rational total{0};
    for (auto i = bits.find_first(); i != Bits::npos; i = bits.find_next(i)) total += weights_[i];
    return total;
  }

 private:
  const S* sys_;
  std::vector<Obj> domain_;
  std::vector<std::vector<Edge<Obj>>> choices_;
  std::vector<std::uint64_t> degree_;
  std::vector<Rational> weights_;
  std::uint64_t size_ = 1;
};

/// Every total strategy of a finite system: the Cartesian product of the
/// distinct reducts of each non-normal object.
inline std::vector<Strategy<ObjId>> enumerate_strategies(const WeightedArs& ars, const Caps& caps = {}) {
  StrategySpace<WeightedArs> space(ars, non_normal_objects(ars), caps);
  std::vector<Strategy<ObjId>> all;
  all.reserve(space.size());
  for (std::uint64_t i = 0; i < space.size(); ++i) all.push_back(space.strategy(i));
  return all;
}

/// Smallest strategy domain on which `set` is determined: the constrained
/// objects of its boxes, or all of the non-normal objects once explicit
/// strategies are involved (finite systems only).
template <RewriteSystem S>
std::vector<typename S::object_type> relevant_domain(const S& sys, const EventSet<typename S::object_type>& set) {
  using Obj = typename S::object_type;
  std::set<Obj> domain;
  bool needs_full = false;
  detail::collect_domain(set, domain, needs_full);
  if (needs_full) {
    if constexpr (std::is_same_v<S, WeightedArs>) {
      return non_normal_objects(sys);
    } else {
      throw InfeasibleError("explicit strategies need a finite system");
    }
  }
  return {domain.begin(), domain.end()};
}

/// P(S). Materializes `set` over its relevant strategy domain and sums the
/// cylinder weights; on finite domains this equals the infimum over box covers.
template <RewriteSystem S>
Prob outer_measure(const S& sys, const EventSet<typename S::object_type>& set, const Caps& caps = {}) {
  try {
    StrategySpace<S> space(sys, relevant_domain(sys, set), caps);
    return Prob(space.measure(space.materialize(set)));
  } catch (const InfeasibleError&) {
    throw InfeasibleError("exact measure unavailable: strategy space too large");
  }
}

/// Lebesgue test: P(S) = P(S n A) + P(S n ~A) for every S, checked over all
/// subsets of the strategy space.
template <RewriteSystem S>
bool is_measurable(const S& sys, const EventSet<typename S::object_type>& set, const Caps& caps = {}) {
  using Obj = typename S::object_type;
  std::vector<Obj> domain;
  if constexpr (std::is_same_v<S, WeightedArs>)
    domain = non_normal_objects(sys);
  else
    domain = relevant_domain(sys, set);

  auto infeasible = [] { return InfeasibleError("measurability check infeasible"); };
  std::unique_ptr<StrategySpace<S>> space;
  try {
    space = std::make_unique<StrategySpace<S>>(sys, domain, caps);
  } catch (const InfeasibleError&) {
    throw infeasible();
  }
  const std::uint64_t n = space->size();
  if (n >= 63 || (std::uint64_t{1} << n) > caps.max_subsets) throw infeasible();

  const auto bits = space->materialize(set);
  std::uint64_t a_mask = 0;
  for (std::uint64_t i = 0; i < n; ++i)
    if (bits.test(i)) a_mask |= std::uint64_t{1} << i;

  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::vector<Rational> p(subsets);
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    const int low = std::countr_zero(mask);
    p[mask] = p[mask & (mask - 1)] + space->weight(static_cast<std::uint64_t>(low));
  }
  for (std::uint64_t s = 0; s < subsets; ++s)
    if (p[s] != p[s & a_mask] + p[s & ~a_mask & (subsets - 1)]) return false;
  return true;
}

}  // namespace tracemeasure

#endif
