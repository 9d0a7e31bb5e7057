#ifndef TRACEMEASURE_EVENTS_HPP
#define TRACEMEASURE_EVENTS_HPP

#include "ars.hpp"
#include "errors.hpp"
#include "measure.hpp"
#include "random.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace tracemeasure {

template <class Obj>
struct TraceEvent {
  enum class Kind { Reach, StopsAtStep, StopsWithin, NeverStops };

  Kind kind = Kind::Reach;
  Obj from{};
  Obj to{};                // Reach only
  std::uint64_t steps = 0;  // StopsAtStep / StopsWithin only

  static TraceEvent reach(Obj a, Obj b) { return {Kind::Reach, a, b, 0}; }
  static TraceEvent stops_at(Obj a, std::uint64_t n) { return checked({Kind::StopsAtStep, a, Obj{}, n}); }
  static TraceEvent stops_within(Obj a, std::uint64_t n) { return checked({Kind::StopsWithin, a, Obj{}, n}); }
  static TraceEvent never_stops(Obj a) { return {Kind::NeverStops, a, Obj{}, 0}; }

 private:
  static TraceEvent checked(TraceEvent ev) {
    if (ev.steps == 0) throw InputError("stopping events need n >= 1");
    return ev;
  }
};

struct ExploreCaps {
  std::uint64_t max_objects = std::uint64_t{1} << 20;
  std::uint64_t max_nodes = std::uint64_t{1} << 22;
  std::uint64_t step_cap = 64;
};

/// P(from ->* to) on a system whose part reachable from `from` (before hitting
/// `to`) is acyclic. Pr(a) = 1 at the target, 0 at other normal objects, and
/// the multiplicity-weighted average of the reducts otherwise.
template <RewriteSystem S>
Prob reach_prob_exact(const S& sys, const typename S::object_type& from, const typename S::object_type& to,
                      const ExploreCaps& caps = {}) {
  using Obj = typename S::object_type;
  enum class Mark { Open, Done };
  std::map<Obj, Mark> mark;
  std::map<Obj, Rational> value;

  struct Frame {
    Obj obj;
    std::vector<Edge<Obj>> edges;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  auto enter = [&](const Obj& a) {
    if (mark.size() >= caps.max_objects) throw InfeasibleError("reachable part too large for exact evaluation");
    mark[a] = Mark::Open;
    Frame f{a, {}, 0};
    if (!(a == to))
      for (const auto& e : sys.successors(a)) f.edges.push_back(Edge<Obj>{e.target, e.mult});
    stack.push_back(std::move(f));
  };

  enter(from);
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next < top.edges.size()) {
      Obj child = top.edges[top.next++].target;
      auto it = mark.find(child);
      if (it == mark.end()) {
        enter(child);
      } else if (it->second == Mark::Open) {
        throw InputError("cyclic system: use fixpoint or sampling");
      }
      continue;
    }
    Rational v{0};
    if (top.obj == to) {
      v = 1;
    } else if (!top.edges.empty()) {
      std::uint64_t rho = 0;
      for (const auto& e : top.edges) rho += e.mult;
      for (const auto& e : top.edges) v += Rational(e.mult, rho) * value.at(e.target);
    }
    mark[top.obj] = Mark::Done;
    value[top.obj] = std::move(v);
    stack.pop_back();
  }
  return Prob(value.at(from));
}

struct FixpointResult {
  Prob value;
  Rational last_delta;  // max componentwise change in the final iteration
  std::uint64_t iterations = 0;
  bool converged = false;
};

/// Least fixpoint of the reachability equations by Kleene iteration from 0.
/// Revisits are resampled here (chain semantics), unlike sampled strategies.
template <RewriteSystem S>
FixpointResult reach_prob_cyclic(const S& sys, const typename S::object_type& from, const typename S::object_type& to,
                                 const Rational& tol, std::uint64_t max_iterations = 100000,
                                 const ExploreCaps& caps = {}) {
  using Obj = typename S::object_type;
  if (tol <= 0) throw InputError("tolerance must be positive");

  std::map<Obj, std::size_t> index;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows;
  std::vector<Obj> pending{from};
  index.emplace(from, 0);
  rows.emplace_back();
  std::vector<bool> is_target{from == to};
  for (std::size_t k = 0; k < pending.size(); ++k) {
    const Obj a = pending[k];
    if (a == to) continue;
    std::uint64_t rho = degree(sys, a);
    std::vector<std::pair<std::size_t, Rational>> row;
    for (const auto& e : sys.successors(a)) {
      auto [it, inserted] = index.emplace(e.target, index.size());
      if (inserted) {
        if (index.size() > caps.max_objects) throw InfeasibleError("reachable part too large for fixpoint iteration");
        pending.push_back(e.target);
        rows.emplace_back();
        is_target.push_back(e.target == to);
      }
      row.emplace_back(it->second, Rational(e.mult, rho));
    }
    rows[index.at(a)] = std::move(row);
  }

  const std::size_t n = rows.size();
  std::vector<Rational> x(n);
  FixpointResult result;
  for (std::uint64_t iter = 1; iter <= max_iterations; ++iter) {
    std::vector<Rational> next(n);
    Rational delta{0};
    for (std::size_t i = 0; i < n; ++i) {
      if (is_target[i]) {
        next[i] = 1;
      } else {
        for (const auto& [j, w] : rows[i]) next[i] += w * x[j];
      }
      Rational d = next[i] - x[i];
      if (d < 0) d = -d;
      if (d > delta) delta = d;
    }
    x = std::move(next);
    result.iterations = iter;
    result.last_delta = delta;
    if (delta < tol) {
      result.converged = true;
      break;
    }
  }
  result.value = Prob(x[0]);
  return result;
}

/// Probability of a stopping event, as an interval. StopsAtStep and
/// StopsWithin are always exact; NeverStops is exact only when every
/// trajectory was resolved (stopped, or provably looping) within the step cap.
struct StoppingResult {
  Rational lower{0};
  Rational upper{0};

  bool exact() const { return lower == upper; }
  Prob value() const {
    if (!exact()) throw InfeasibleError("stopping probability is only bounded: [" + to_string(lower) + ", " +
                                        to_string(upper) + "]");
    return Prob(lower);
  }
};

namespace detail {

/// Enumerates the partial strategies a trajectory from `from` can follow, up
/// to `depth` steps. Each leaf is a box; leaves are pairwise disjoint.
template <RewriteSystem S, class Visit>
void explore_trajectories(const S& sys, const typename S::object_type& from, std::uint64_t depth,
                          std::uint64_t max_nodes, Visit&& visit) {
  using Obj = typename S::object_type;
  enum class End { Stopped, Looping, Truncated };
  std::map<Obj, Obj> memo;
  std::vector<Obj> path{from};
  std::uint64_t nodes = 0;

  auto rec = [&](auto&& self, const Obj& current, std::uint64_t step, Rational prob) -> void {
    if (++nodes > max_nodes) throw InfeasibleError("trajectory exploration exceeded node budget");
    std::vector<Edge<Obj>> edges;
    for (const auto& e : sys.successors(current)) edges.push_back(Edge<Obj>{e.target, e.mult});
    if (edges.empty()) {
      visit(End::Stopped, step, prob, memo, path);
      return;
    }
    if (memo.count(current)) {
      visit(End::Looping, step, prob, memo, path);
      return;
    }
    if (step == depth) {
      visit(End::Truncated, step, prob, memo, path);
      return;
    }
    std::uint64_t rho = 0;
    for (const auto& e : edges) rho += e.mult;
    for (const auto& e : edges) {
      memo[current] = e.target;
      path.push_back(e.target);
      self(self, e.target, step + 1, prob * Rational(e.mult, rho));
      path.pop_back();
    }
    memo.erase(current);
  };
  rec(rec, from, 0, Rational{1});
}

}  // namespace detail

template <RewriteSystem S>
StoppingResult stopping_prob(const S& sys, const TraceEvent<typename S::object_type>& ev,
                             const ExploreCaps& caps = {}) {
  using Obj = typename S::object_type;
  using Kind = typename TraceEvent<Obj>::Kind;
  if (ev.kind == Kind::Reach) throw InputError("stopping_prob needs a stopping event");
  const std::uint64_t depth = ev.kind == Kind::NeverStops ? caps.step_cap : ev.steps;

  StoppingResult r;
  Rational truncated{0};
  detail::explore_trajectories(sys, ev.from, depth, caps.max_nodes,
                               [&](auto end, std::uint64_t step, const Rational& p, const auto&, const auto&) {
                                 const int kind = static_cast<int>(end);  // 0 stopped, 1 looping, 2 truncated
                                 switch (ev.kind) {
                                   case Kind::StopsAtStep:
                                     if (kind == 0 && step == ev.steps) r.lower += p;
                                     break;
                                   case Kind::StopsWithin:
                                     if (kind == 0 && step <= ev.steps) r.lower += p;
                                     break;
                                   default:
                                     if (kind == 1) r.lower += p;
                                     if (kind == 2) truncated += p;
                                 }
                               });
  r.upper = r.lower + truncated;
  return r;
}

/// The event as a disjoint family of boxes (one per explored trajectory
/// prefix that realizes it). Summing their p gives the event's probability.
template <RewriteSystem S>
std::vector<Box<typename S::object_type>> event_boxes(const S& sys, const TraceEvent<typename S::object_type>& ev,
                                                      const ExploreCaps& caps = {}) {
  using Obj = typename S::object_type;
  using Kind = typename TraceEvent<Obj>::Kind;
  std::vector<Box<Obj>> boxes;
  const std::uint64_t depth = ev.kind == Kind::StopsAtStep || ev.kind == Kind::StopsWithin ? ev.steps : caps.step_cap;
  detail::explore_trajectories(
      sys, ev.from, depth, caps.max_nodes,
      [&](auto end, std::uint64_t step, const Rational&, const std::map<Obj, Obj>& memo, const std::vector<Obj>& path) {
        const int kind = static_cast<int>(end);
        bool hit = false;
        switch (ev.kind) {
          case Kind::Reach:
            for (const auto& o : path) hit = hit || o == ev.to;
            if (kind == 2 && !hit) throw InfeasibleError("reachability not resolved within the step cap");
            break;
          case Kind::StopsAtStep: hit = kind == 0 && step == ev.steps; break;
          case Kind::StopsWithin: hit = kind == 0 && step <= ev.steps; break;
          case Kind::NeverStops:
            if (kind == 2) throw InfeasibleError("non-termination not resolved within the step cap");
            hit = kind == 1;
            break;
        }
        if (!hit) return;
        // Constraints after the first visit of the target do not matter for Reach.
        Box<Obj> box;
        if (ev.kind == Kind::Reach) {
          for (std::size_t i = 0; i + 1 < path.size() && !(path[i] == ev.to); ++i) box.constraints[path[i]] = path[i + 1];
        } else {
          box.constraints = memo;
        }
        if (std::find(boxes.begin(), boxes.end(), box) == boxes.end()) boxes.push_back(std::move(box));
      });
  return boxes;
}

struct SampleReport {
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  Prob estimate;
  std::uint64_t step_cap = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SampleReport&, const SampleReport&) = default;
};

/// Draws one strategy lazily: an object's reduct is chosen the first time the
/// trajectory visits it (with probability mult/rho) and reused on revisits.
template <RewriteSystem S>
class LazyStrategySampler {
 public:
  using Obj = typename S::object_type;

  LazyStrategySampler(const S& sys, std::uint64_t seed) : sys_(&sys), rng_(seed) {}

  /// Forgets the current strategy; the next queries draw a fresh one.
  void reset() { memo_.clear(); }

  bool decided(const Obj& a) const { return memo_.count(a) != 0; }

  /// f(a) for the current strategy, or nullopt when `a` is normal.
  std::optional<Obj> choose(const Obj& a) {
    if (auto it = memo_.find(a); it != memo_.end()) return it->second;
    std::uint64_t rho = 0;
    for (const auto& e : sys_->successors(a)) rho += e.mult;
    if (rho == 0) return std::nullopt;
    std::uint64_t u = uniform_below(rng_, rho);
    for (const auto& e : sys_->successors(a)) {
      if (u < e.mult) {
        memo_.emplace(a, e.target);
        return e.target;
      }
      u -= e.mult;
    }
    return std::nullopt;  // unreachable
  }

  const std::map<Obj, Obj>& memo() const { return memo_; }

  /// Follows the current strategy from `ev.from` and reports whether the
  /// event holds. Trajectories cut by `step_cap` count as non-stopping.
  bool run(const TraceEvent<Obj>& ev, std::uint64_t step_cap) {
    using Kind = typename TraceEvent<Obj>::Kind;
    Obj current = ev.from;
    std::map<Obj, bool> seen;
    for (std::uint64_t step = 0;; ++step) {
      if (ev.kind == Kind::Reach && current == ev.to) return true;
      const bool revisit = seen.count(current) != 0;
      seen[current] = true;
      std::optional<Obj> next;
      if (!revisit) next = choose(current);
      const bool normal = !revisit && !next;
      if (normal) {
        switch (ev.kind) {
          case Kind::StopsAtStep: return step == ev.steps;
          case Kind::StopsWithin: return step <= ev.steps;
          default: return false;
        }
      }
      if (revisit || step >= step_cap) return ev.kind == Kind::NeverStops;
      current = *next;
    }
  }

 private:
  const S* sys_;
  std::mt19937_64 rng_;
  std::map<Obj, Obj> memo_;
};

template <RewriteSystem S>
SampleReport sample_event(const S& sys, const TraceEvent<typename S::object_type>& ev, std::uint64_t samples,
                          std::uint64_t step_cap, std::uint64_t seed) {
  if (samples == 0) throw InputError("samples must be >= 1");
  LazyStrategySampler<S> sampler(sys, seed);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    sampler.reset();
    if (sampler.run(ev, step_cap)) ++hits;
  }
  return SampleReport{samples, hits, Prob(Rational(hits, samples)), step_cap, seed};
}

}  // namespace tracemeasure

#endif
