#ifndef TRACEMEASURE_LAMBDA_PLUS_HPP
#define TRACEMEASURE_LAMBDA_PLUS_HPP

#include "errors.hpp"
#include "random.hpp"
#include "rational.hpp"
#include "term.hpp"
#include "type.hpp"
#include "typing.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tracemeasure {

// ---------------------------------------------------------------------------
// Canonical form modulo the symmetric relation (without rule Pi)

namespace detail {

inline Term sorted_sum(std::vector<Term> parts, KeyEnv& env) {
  std::vector<std::pair<std::string, Term>> keyed;
  for (auto& p : parts) keyed.emplace_back(term_key(p, env), std::move(p));
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Term> ts;
  for (auto& [_, t] : keyed) ts.push_back(std::move(t));
  return sum_of(ts);
}

inline Term canonical(const Term& t, KeyEnv& env) {
  switch (t->kind) {
    case TK::Var: return t;
    case TK::Lam: {
      env.vars.push_back(t->name);
      Term body = canonical(t->a, env);
      std::vector<Term> parts;
      for (const auto& s : summands(body)) parts.push_back(lam(t->name, t->type, s, t->pos));
      Term out = parts.size() == 1 ? parts.front() : nullptr;
      env.vars.pop_back();
      return out ? out : sorted_sum(std::move(parts), env);
    }
    case TK::App: {
      Term f = canonical(t->a, env);
      Term x = canonical(t->b, env);
      if (f->kind != TK::Sum) return app(f, x, t->pos);
      std::vector<Term> parts;
      for (const auto& s : summands(f)) parts.push_back(app(s, x, t->pos));
      return sorted_sum(std::move(parts), env);
    }
    case TK::Sum: {
      std::vector<Term> parts = summands(canonical(t->a, env));
      for (const auto& s : summands(canonical(t->b, env))) parts.push_back(s);
      return sorted_sum(std::move(parts), env);
    }
    case TK::TLam: {
      env.types.push_back(t->name);
      Term out = tlam(t->name, canonical(t->a, env), t->pos);
      env.types.pop_back();
      return out;
    }
    default: return with_children(t, t->a ? canonical(t->a, env) : nullptr, t->b ? canonical(t->b, env) : nullptr);
  }
}

}  // namespace detail

/// Sums flattened and sorted, application and abstraction distributed over
/// sums. Rule Pi is not applied.
inline Term canonical_form(const Term& t) {
  KeyEnv env;
  return detail::canonical(t, env);
}

inline std::string canonical_key(const Term& t) { return term_key(canonical_form(t)); }

// ---------------------------------------------------------------------------
// Symmetric relation, one step

enum class SymRule { Comm, AssocLeft, AssocRight, AppDist, AppFactor, LamDist, LamFactor, Pi, PiInverse };

inline std::string to_string(SymRule r) {
  switch (r) {
    case SymRule::Comm: return "comm";
    case SymRule::AssocLeft: return "assoc-left";
    case SymRule::AssocRight: return "assoc-right";
    case SymRule::AppDist: return "app-dist";
    case SymRule::AppFactor: return "app-factor";
    case SymRule::LamDist: return "lam-dist";
    case SymRule::LamFactor: return "lam-factor";
    case SymRule::Pi: return "pi";
    case SymRule::PiInverse: return "pi-inverse";
  }
  return {};
}

namespace detail {

inline std::optional<Type> try_type(const Term& t) {
  try {
    return type_of(t);
  } catch (const TypeError&) {
    return std::nullopt;
  }
}

/// r : A => (B /\ C) for some C (possibly empty), i.e. every factor of r's
/// type is an arrow out of A and B's factors are among the consequents.
inline bool pi_side_condition(const Type& r_type, const Type& a, const Type& b) {
  const TypeNF nf = type_nf(r_type);
  std::vector<Type> consequents;
  for (const auto& f : nf.factors) {
    if (f->kind != TypeNode::Kind::Arrow || !type_equiv(f->lhs, a)) return false;
    consequents.push_back(f->rhs);
  }
  return nf_includes(type_nf(conj_of(consequents)), type_nf(b));
}

inline std::vector<std::pair<SymRule, Term>> sym_local(const Term& t, bool lambda_plus) {
  std::vector<std::pair<SymRule, Term>> out;
  if (t->kind == TK::Sum) {
    out.emplace_back(SymRule::Comm, sum(t->b, t->a, t->pos));
    if (t->a->kind == TK::Sum) out.emplace_back(SymRule::AssocRight, sum(t->a->a, sum(t->a->b, t->b), t->pos));
    if (t->b->kind == TK::Sum) out.emplace_back(SymRule::AssocLeft, sum(sum(t->a, t->b->a), t->b->b, t->pos));
    if (t->a->kind == TK::App && t->b->kind == TK::App && alpha_equal(t->a->b, t->b->b))
      out.emplace_back(SymRule::AppFactor, app(sum(t->a->a, t->b->a), t->a->b, t->pos));
    if (t->a->kind == TK::Lam && t->b->kind == TK::Lam && alpha_equal(t->a->type, t->b->type)) {
      std::set<std::string> avoid, tys;
      all_names(t, avoid, tys);
      const Term& l = t->a;
      const Term& r = t->b;
      std::string z = l->name;
      Term rb = r->a;
      if (r->name != z) {
        if (free_var_names(r->a).count(z)) z = fresh_name(z, avoid);
        rb = subst(r->a, r->name, var(z, r->type));
      }
      Term lb = z == l->name ? l->a : subst(l->a, l->name, var(z, l->type));
      out.emplace_back(SymRule::LamFactor, lam(z, l->type, sum(lb, rb), t->pos));
    }
  }
  if (t->kind == TK::App && t->a->kind == TK::Sum)
    out.emplace_back(SymRule::AppDist, sum(app(t->a->a, t->b, t->pos), app(t->a->b, t->b, t->pos), t->pos));
  if (t->kind == TK::Lam && t->a->kind == TK::Sum)
    out.emplace_back(SymRule::LamDist,
                     sum(lam(t->name, t->type, t->a->a, t->pos), lam(t->name, t->type, t->a->b, t->pos), t->pos));
  if (!lambda_plus) return out;
  // pi_{A=>B}(r) s <-> pi_B(r s) when r : A => (B /\ C)
  if (t->kind == TK::App && t->a->kind == TK::Proj && t->a->type->kind == TypeNode::Kind::Arrow) {
    const Type& a = t->a->type->lhs;
    const Type& b = t->a->type->rhs;
    auto rt = try_type(t->a->a);
    auto st = try_type(t->b);
    if (rt && st && type_equiv(*st, a) && pi_side_condition(*rt, a, b))
      out.emplace_back(SymRule::Pi, proj(b, app(t->a->a, t->b, t->pos), t->a->pos));
  }
  if (t->kind == TK::Proj && t->a->kind == TK::App) {
    const Term& r = t->a->a;
    const Term& s = t->a->b;
    auto rt = try_type(r);
    auto st = try_type(s);
    if (rt && st && pi_side_condition(*rt, *st, t->type))
      out.emplace_back(SymRule::PiInverse, app(proj(arrow(*st, t->type), r, t->pos), s, t->a->pos));
  }
  return out;
}

}  // namespace detail

/// Every term one symmetric step away from `t`, tagged by rule (both
/// directions of each axiom, rule Pi included).
inline std::vector<std::pair<SymRule, Term>> sym_step(const Term& t) {
  return rewrite_everywhere<SymRule>(t, [](const Term& s, const Context&) { return detail::sym_local(s, true); });
}

// ---------------------------------------------------------------------------
// Reduction

enum class Mode { NonDet, Prob };
enum class RedexStrategy { LeftmostOutermost, BetaFirst, ProjFirst };
enum class Rule { Beta, TypeBeta, Proj };

inline std::string to_string(Rule r) {
  switch (r) {
    case Rule::Beta: return "beta";
    case Rule::TypeBeta: return "type-beta";
    case Rule::Proj: return "proj";
  }
  return {};
}

inline std::string to_string(RedexStrategy s) {
  switch (s) {
    case RedexStrategy::LeftmostOutermost: return "leftmost-outermost";
    case RedexStrategy::BetaFirst: return "beta-first";
    case RedexStrategy::ProjFirst: return "proj-first";
  }
  return {};
}

inline RedexStrategy parse_strategy(const std::string& s) {
  if (s == "leftmost-outermost" || s == "lo") return RedexStrategy::LeftmostOutermost;
  if (s == "beta-first") return RedexStrategy::BetaFirst;
  if (s == "proj-first") return RedexStrategy::ProjFirst;
  throw InputError("unknown strategy: " + s);
}

class NotARedex : public InputError {
 public:
  using InputError::InputError;
};

class ProjectorNotReady : public InputError {
 public:
  using InputError::InputError;
};

/// Finite distribution over terms. `residual` is mass not yet resolved when
/// an exploration cap was hit (zero otherwise).
struct Distribution {
  std::vector<std::pair<Term, Rational>> entries;
  Rational residual{0};

  Rational total() const {
    Rational s = residual;
    for (const auto& [_, p] : entries) s += p;
    return s;
  }
  /// Probability of the entry α-equal (modulo canonical form) to `t`, or 0.
  Rational prob_of(const Term& t) const {
    const std::string k = canonical_key(t);
    for (const auto& [u, p] : entries)
      if (canonical_key(u) == k) return p;
    return 0;
  }
};

/// Reducts of one redex. In Prob mode `probs` is parallel to `reducts`; in
/// NonDet mode it is empty.
struct StepResult {
  Rule rule;
  std::vector<Term> reducts;
  std::vector<Rational> probs;
  Term redex;                       // the fired subterm
  std::vector<Term> local_reducts;  // its reducts, parallel to `reducts`
};

namespace detail {

struct Redex {
  std::size_t position;
  Rule rule;
  std::vector<Term> reducts;
  std::vector<Rational> probs;
  Term redex{};
  std::vector<Term> local{};
};

bool has_redex(const Term& t, Context& ctx, Mode mode);

/// Projector reducts in Prob mode: summands of type A grouped by canonical
/// form, weighted by multiplicity, in order of first occurrence. Requires the summands to be normal and not
/// to mention variables bound by an enclosing lambda.
inline std::optional<Redex> prob_projector(const Term& t, const Context& ctx) {
  const Term& body = t->a;
  Context inner = ctx;
  std::vector<Term> parts = summands(body);
  std::set<std::string> free;
  for (const auto& s : parts) {
    if (has_redex(s, inner, Mode::Prob)) return std::nullopt;
    for (const auto& x : free_var_names(s)) free.insert(x);
  }
  for (const auto& x : ctx.lambda_bound)
    if (free.count(x)) return std::nullopt;
  const TypeNF target = type_nf(t->type);
  std::vector<std::string> order;
  std::map<std::string, std::pair<Term, std::uint64_t>> groups;
  std::vector<Term> rest;
  for (const auto& s : parts) {
    auto st = try_type(s);
    if (!st) return std::nullopt;
    if (type_nf(*st) == target) {
      const std::string k = term_key(s);
      auto [it, inserted] = groups.emplace(k, std::make_pair(s, std::uint64_t{0}));
      if (inserted) order.push_back(k);
      ++it->second.second;
    } else {
      rest.push_back(s);
    }
  }
  if (groups.empty()) return std::nullopt;
  if (!rest.empty()) {
    auto rt = try_type(sum_of(rest));
    if (!rt || type_nf(*rt) == target) return std::nullopt;
  }
  std::uint64_t total = 0;
  for (const auto& [_, g] : groups) total += g.second;
  Redex r{0, Rule::Proj, {}, {}};
  for (const auto& k : order) {
    r.reducts.push_back(groups.at(k).first);
    r.probs.push_back(Rational(groups.at(k).second, total));
  }
  return r;
}

/// Projector reducts in NonDet mode: every sub-multiset of the summands whose
/// sum has type A.
inline std::optional<Redex> nondet_projector(const Term& t) {
  const TypeNF target = type_nf(t->type);
  std::vector<Term> parts = summands(t->a);
  std::vector<std::string> keys;
  std::map<std::string, std::pair<Term, std::uint64_t>> groups;
  std::map<std::string, TypeNF> nfs;
  for (const auto& s : parts) {
    const std::string k = term_key(s);
    auto [it, inserted] = groups.emplace(k, std::make_pair(s, std::uint64_t{0}));
    if (inserted) {
      keys.push_back(k);
      auto st = try_type(s);
      if (!st) return std::nullopt;
      nfs.emplace(k, type_nf(*st));
    }
    ++it->second.second;
  }
  std::sort(keys.begin(), keys.end());
  Redex r{0, Rule::Proj, {}, {}};
  std::set<std::string> seen;
  std::vector<std::uint64_t> counts(keys.size(), 0);
  // Budget: remaining factors of the target still to be covered.
  auto rec = [&](auto&& self, std::size_t i, std::multiset<std::string> budget) -> void {
    if (i == keys.size()) {
      if (!budget.empty()) return;
      std::vector<Term> chosen;
      for (std::size_t j = 0; j < keys.size(); ++j)
        for (std::uint64_t c = 0; c < counts[j]; ++c) chosen.push_back(groups.at(keys[j]).first);
      if (chosen.empty()) return;
      Term reduct = canonical_form(sum_of(chosen));
      if (seen.insert(term_key(reduct)).second) r.reducts.push_back(reduct);
      return;
    }
    const auto& [term, available] = groups.at(keys[i]);
    const auto& factors = nfs.at(keys[i]).factor_keys;
    counts[i] = 0;
    self(self, i + 1, budget);
    for (std::uint64_t c = 1; c <= available; ++c) {
      for (const auto& f : factors) {
        auto it = budget.find(f);
        if (it == budget.end()) {
          counts[i] = 0;
          return;
        }
        budget.erase(it);
      }
      counts[i] = c;
      self(self, i + 1, budget);
    }
    counts[i] = 0;
  };
  rec(rec, 0, std::multiset<std::string>(target.factor_keys.begin(), target.factor_keys.end()));
  if (r.reducts.empty()) return std::nullopt;
  return r;
}

inline std::optional<Redex> local_redex(const Term& t, const Context& ctx, Mode mode) {
  if (t->kind == TK::App && t->a->kind == TK::Lam)
    return Redex{0, Rule::Beta, {subst(t->a->a, t->a->name, t->b)}, {Rational(1)}};
  if (t->kind == TK::TApp && t->a->kind == TK::TLam)
    return Redex{0, Rule::TypeBeta, {subst_type(t->a->a, t->a->name, t->type)}, {Rational(1)}};
  if (t->kind == TK::Proj) return mode == Mode::Prob ? prob_projector(t, ctx) : nondet_projector(t);
  return std::nullopt;
}

/// All redexes of `t` in pre-order, each with its whole-term reducts.
inline std::vector<Redex> all_redexes(const Term& t, Mode mode) {
  std::size_t counter = 0;
  std::vector<Redex> found;
  struct Tag {
    std::size_t position;
    Rule rule;
    Rational prob;
    Term redex;
    Term local;
  };
  auto f = [&](const Term& s, const Context& ctx) {
    const std::size_t pos = counter++;
    std::vector<std::pair<Tag, Term>> out;
    if (auto r = local_redex(s, ctx, mode))
      for (std::size_t i = 0; i < r->reducts.size(); ++i)
        out.emplace_back(Tag{pos, r->rule, r->probs.empty() ? Rational(0) : r->probs[i], s, r->reducts[i]},
                         r->reducts[i]);
    return out;
  };
  for (auto& [tag, whole] : rewrite_everywhere<Tag>(t, f)) {
    if (found.empty() || found.back().position != tag.position)
      found.push_back(Redex{tag.position, tag.rule, {}, {}, tag.redex, {}});
    found.back().reducts.push_back(std::move(whole));
    found.back().local.push_back(tag.local);
    if (mode == Mode::Prob) found.back().probs.push_back(tag.prob);
  }
  return found;
}

inline bool has_redex(const Term& t, Context& ctx, Mode mode) {
  if (local_redex(t, ctx, mode)) return true;
  switch (t->kind) {
    case TK::Var: return false;
    case TK::Lam: {
      ctx.lambda_bound.push_back(t->name);
      const bool r = has_redex(t->a, ctx, mode);
      ctx.lambda_bound.pop_back();
      return r;
    }
    case TK::TLam: {
      ctx.type_bound.push_back(t->name);
      const bool r = has_redex(t->a, ctx, mode);
      ctx.type_bound.pop_back();
      return r;
    }
    default: return (t->a && has_redex(t->a, ctx, mode)) || (t->b && has_redex(t->b, ctx, mode));
  }
}

inline const Redex* select(const std::vector<Redex>& rs, RedexStrategy strategy) {
  if (rs.empty()) return nullptr;
  auto first = [&](auto pred) -> const Redex* {
    for (const auto& r : rs)
      if (pred(r)) return &r;
    return nullptr;
  };
  const Redex* pick = nullptr;
  if (strategy == RedexStrategy::BetaFirst) pick = first([](const Redex& r) { return r.rule != Rule::Proj; });
  if (strategy == RedexStrategy::ProjFirst) pick = first([](const Redex& r) { return r.rule == Rule::Proj; });
  return pick ? pick : &rs.front();
}

}  // namespace detail

/// True when no reduction applies (after canonicalization).
inline bool is_normal(const Term& t, Mode mode = Mode::Prob) {
  Context ctx;
  return !detail::has_redex(canonical_form(t), ctx, mode);
}

/// One reduction step at the redex chosen by `strategy`, on the canonical
/// form of `t`. Reducts are returned in canonical form.
inline StepResult reduce_step(const Term& t, Mode mode = Mode::Prob,
                              RedexStrategy strategy = RedexStrategy::LeftmostOutermost) {
  const Term c = canonical_form(t);
  const auto redexes = detail::all_redexes(c, mode);
  const detail::Redex* r = detail::select(redexes, strategy);
  if (!r) throw NotARedex("term is normal: " + to_string(c));
  StepResult out{r->rule, {}, r->probs, r->redex, {}};
  for (const auto& x : r->reducts) out.reducts.push_back(canonical_form(x));
  for (const auto& x : r->local) out.local_reducts.push_back(canonical_form(x));
  // Distinct positions of the same projector may coincide after canonicalization.
  if (mode == Mode::Prob) {
    std::vector<Term> merged, local;
    std::vector<Rational> probs;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < out.reducts.size(); ++i) {
      const std::string k = term_key(out.reducts[i]);
      auto [it, inserted] = index.emplace(k, merged.size());
      if (inserted) {
        merged.push_back(out.reducts[i]);
        local.push_back(out.local_reducts[i]);
        probs.push_back(out.probs[i]);
      } else {
        probs[it->second] += out.probs[i];
      }
    }
    out.reducts = std::move(merged);
    out.local_reducts = std::move(local);
    out.probs = std::move(probs);
  }
  return out;
}

/// Every one-step reduct at every position, in NonDet or Prob mode.
inline std::vector<StepResult> all_reduce_steps(const Term& t, Mode mode) {
  std::vector<StepResult> out;
  for (auto& r : detail::all_redexes(canonical_form(t), mode)) {
    StepResult s{r.rule, {}, r.probs, r.redex, {}};
    for (const auto& x : r.reducts) s.reducts.push_back(canonical_form(x));
    for (const auto& x : r.local) s.local_reducts.push_back(canonical_form(x));
    out.push_back(std::move(s));
  }
  return out;
}

/// Fires the projector `pi` on its own, with its free variables treated as
/// constants. Reducts keep the order of the summands of `pi`.
inline StepResult project(const Term& pi, Mode mode = Mode::Prob) {
  if (pi->kind != TK::Proj) throw NotARedex("not a projector: " + to_string(pi));
  std::vector<Term> parts;
  for (const auto& raw : summands(pi->a))
    for (const auto& s : summands(canonical_form(raw))) parts.push_back(s);
  const Term c = proj(pi->type, sum_of(parts), pi->pos);
  Context ctx;
  auto r = detail::local_redex(c, ctx, mode);
  if (!r) {
    if (detail::has_redex(c->a, ctx, mode)) throw ProjectorNotReady("projector argument is not normal: " + to_string(c));
    throw NotARedex("projector has no summand of type " + to_string(pi->type) + ": " + to_string(c));
  }
  StepResult out{Rule::Proj, {}, r->probs, c, {}};
  for (const auto& x : r->reducts) out.reducts.push_back(canonical_form(x));
  out.local_reducts = out.reducts;
  return out;
}

/// Distribution over normal forms reached by Prob-mode reduction under
/// `strategy`. Mass still reducing after `step_cap` steps is the residual.
inline Distribution normal_distribution(const Term& t, RedexStrategy strategy = RedexStrategy::LeftmostOutermost,
                                        std::uint64_t step_cap = 256) {
  std::map<std::string, std::pair<Term, Rational>> layer, done;
  const Term start = canonical_form(t);
  layer.emplace(term_key(start), std::make_pair(start, Rational(1)));
  for (std::uint64_t step = 0; !layer.empty(); ++step) {
    std::map<std::string, std::pair<Term, Rational>> next;
    for (auto& [k, entry] : layer) {
      auto& [term, p] = entry;
      const auto redexes = detail::all_redexes(term, Mode::Prob);
      const detail::Redex* r = detail::select(redexes, strategy);
      if (!r) {
        auto [it, inserted] = done.emplace(k, entry);
        if (!inserted) it->second.second += p;
        continue;
      }
      if (step >= step_cap) {
        next.emplace(k, entry);
        continue;
      }
      for (std::size_t i = 0; i < r->reducts.size(); ++i) {
        Term u = canonical_form(r->reducts[i]);
        const std::string uk = term_key(u);
        auto [it, inserted] = next.emplace(uk, std::make_pair(u, p * r->probs[i]));
        if (!inserted) it->second.second += p * r->probs[i];
      }
    }
    if (step >= step_cap) {
      Distribution d;
      for (auto& [_, e] : done) d.entries.push_back(e);
      for (auto& [_, e] : next) d.residual += e.second;
      return d;
    }
    layer = std::move(next);
  }
  Distribution d;
  for (auto& [_, e] : done) d.entries.push_back(e);
  return d;
}

/// Repeated Prob-mode runs of one term. Steps are memoized per canonical
/// term; draws consume `rng` exactly as sample_normal_form does.
class NormalFormSampler {
 public:
  explicit NormalFormSampler(const Term& t, RedexStrategy strategy = RedexStrategy::LeftmostOutermost,
                             std::uint64_t step_cap = 256)
      : start_(canonical_form(t)), strategy_(strategy), step_cap_(step_cap) {}

  Term draw(std::mt19937_64& rng) {
    Term cur = start_;
    for (std::uint64_t step = 0; step <= step_cap_; ++step) {
      const Step& s = step_of(cur);
      if (s.reducts.empty()) return cur;
      if (step == step_cap_) break;
      cur = s.reducts[draw_index(rng, s.probs)];
    }
    throw InfeasibleError("no normal form within " + std::to_string(step_cap_) + " steps");
  }

 private:
  struct Step {
    std::vector<Term> reducts;
    std::vector<Rational> probs;
  };

  const Step& step_of(const Term& t) {
    const std::string k = term_key(t);
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    Step s;
    const auto redexes = detail::all_redexes(t, Mode::Prob);
    if (const detail::Redex* r = detail::select(redexes, strategy_)) {
      for (const auto& u : r->reducts) s.reducts.push_back(canonical_form(u));
      s.probs = r->probs;
    }
    return memo_.emplace(k, std::move(s)).first->second;
  }

  Term start_;
  RedexStrategy strategy_;
  std::uint64_t step_cap_;
  std::map<std::string, Step> memo_;
};

/// One Prob-mode run to a normal form, drawing projector choices from `rng`.
inline Term sample_normal_form(const Term& t, std::mt19937_64& rng,
                               RedexStrategy strategy = RedexStrategy::LeftmostOutermost,
                               std::uint64_t step_cap = 256) {
  return NormalFormSampler(t, strategy, step_cap).draw(rng);
}

}  // namespace tracemeasure

#endif
