#ifndef TRACEMEASURE_ALG_HPP
#define TRACEMEASURE_ALG_HPP

#include "errors.hpp"
#include "lambda_plus.hpp"
#include "rational.hpp"
#include "term.hpp"
#include "typing.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tracemeasure {

enum class AlgRule {
  Beta, TypeBeta, ScaleMul, ScaleDist, Factor,
  Comm, AssocLeft, AssocRight, AppDist, AppFactor, LamDist, LamFactor, OneElim, OneIntro
};

inline std::string to_string(AlgRule r) {
  switch (r) {
    case AlgRule::Beta: return "beta";
    case AlgRule::TypeBeta: return "type-beta";
    case AlgRule::ScaleMul: return "scale-mul";
    case AlgRule::ScaleDist: return "scale-dist";
    case AlgRule::Factor: return "factor";
    case AlgRule::Comm: return "comm";
    case AlgRule::AssocLeft: return "assoc-left";
    case AlgRule::AssocRight: return "assoc-right";
    case AlgRule::AppDist: return "app-dist";
    case AlgRule::AppFactor: return "app-factor";
    case AlgRule::LamDist: return "lam-dist";
    case AlgRule::LamFactor: return "lam-factor";
    case AlgRule::OneElim: return "one-elim";
    case AlgRule::OneIntro: return "one-intro";
  }
  return {};
}

/// True for the oriented reductions, false for symmetric moves.
inline bool is_reduction(AlgRule r) {
  switch (r) {
    case AlgRule::Beta:
    case AlgRule::TypeBeta:
    case AlgRule::ScaleMul:
    case AlgRule::ScaleDist:
    case AlgRule::Factor: return true;
    default: return false;
  }
}

struct AlgStepOptions {
  bool symmetric = true;   // include the symmetric moves
  bool one_intro = false;  // r -> 1.r at every position
};

namespace detail {

inline AlgRule alg_rule_of(SymRule r) {
  switch (r) {
    case SymRule::Comm: return AlgRule::Comm;
    case SymRule::AssocLeft: return AlgRule::AssocLeft;
    case SymRule::AssocRight: return AlgRule::AssocRight;
    case SymRule::AppDist: return AlgRule::AppDist;
    case SymRule::AppFactor: return AlgRule::AppFactor;
    case SymRule::LamDist: return AlgRule::LamDist;
    default: return AlgRule::LamFactor;
  }
}

inline std::pair<Rational, Term> split_scale(const Term& t) {
  if (t->kind == TK::Scale) return {t->scalar, t->a};
  return {Rational(1), t};
}

inline std::vector<std::pair<AlgRule, Term>> alg_local(const Term& t, const AlgStepOptions& opts) {
  std::vector<std::pair<AlgRule, Term>> out;
  if (t->kind == TK::App && t->a->kind == TK::Lam) out.emplace_back(AlgRule::Beta, subst(t->a->a, t->a->name, t->b));
  if (t->kind == TK::TApp && t->a->kind == TK::TLam)
    out.emplace_back(AlgRule::TypeBeta, subst_type(t->a->a, t->a->name, t->type));
  if (t->kind == TK::Scale && t->a->kind == TK::Scale)
    out.emplace_back(AlgRule::ScaleMul, scale(t->scalar * t->a->scalar, t->a->a, t->pos));
  if (t->kind == TK::Scale && t->a->kind == TK::Sum)
    out.emplace_back(AlgRule::ScaleDist,
                     sum(scale(t->scalar, t->a->a, t->pos), scale(t->scalar, t->a->b, t->pos), t->a->pos));
  if (t->kind == TK::Sum) {
    // p.r + q.r -> (p+q).r between any two scaled summands of the cluster
    const std::vector<Term> parts = summands(t);
    std::vector<std::string> keys;
    for (const auto& s : parts) keys.push_back(s->kind == TK::Scale ? term_key(s->a) : std::string());
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (std::size_t j = i + 1; j < parts.size(); ++j) {
        if (keys[i].empty() || keys[i] != keys[j]) continue;
        std::vector<Term> merged;
        for (std::size_t k = 0; k < parts.size(); ++k) {
          if (k == i)
            merged.push_back(scale(parts[i]->scalar + parts[j]->scalar, parts[i]->a, parts[i]->pos));
          else if (k != j)
            merged.push_back(parts[k]);
        }
        out.emplace_back(AlgRule::Factor, sum_of(merged));
      }
  }
  if (!opts.symmetric) return out;
  for (auto& [r, u] : sym_local(t, false)) out.emplace_back(alg_rule_of(r), std::move(u));
  if (t->kind == TK::Scale && t->scalar == 1) out.emplace_back(AlgRule::OneElim, t->a);
  if (opts.one_intro) out.emplace_back(AlgRule::OneIntro, scale(Rational(1), t, t->pos));
  return out;
}

}  // namespace detail

/// Every one-step result of the Alg rewrite system at every position, tagged
/// by rule. Results are distinct up to α.
inline std::vector<std::pair<AlgRule, Term>> alg_reduce_step(const Term& r, AlgStepOptions opts = {}) {
  auto all = rewrite_everywhere<AlgRule>(r, [&](const Term& s, const Context&) { return detail::alg_local(s, opts); });
  std::vector<std::pair<AlgRule, Term>> out;
  std::set<std::pair<AlgRule, std::string>> seen;
  for (auto& [rule, t] : all)
    if (seen.emplace(rule, term_key(t)).second) out.emplace_back(rule, std::move(t));
  return out;
}

/// Total scalar weight along the head spine. Application arguments do not
/// count. Every term of the restricted grammar has mass 1.
inline Rational mass(const Term& t) {
  switch (t->kind) {
    case TK::Sum: return mass(t->a) + mass(t->b);
    case TK::Scale: return t->scalar * mass(t->a);
    case TK::Lam:
    case TK::TLam:
    case TK::App:
    case TK::TApp: return mass(t->a);
    default: return 1;
  }
}

namespace detail {

inline bool dist_term(const Term& t);

// A maximal cluster Σ p_i.r_i; an unscaled summand counts with p = 1.
inline bool dist_cluster(const Term& t) {
  Rational total = 0;
  for (const auto& s : summands(t)) {
    auto [p, r] = split_scale(s);
    if (p <= 0 || p > 1 || !dist_term(r)) return false;
    total += p;
  }
  return total == 1;
}

inline bool dist_term(const Term& t) {
  switch (t->kind) {
    case TK::Var: return true;
    case TK::Lam:
    case TK::TLam:
    case TK::TApp: return dist_term(t->a);
    case TK::App: return dist_term(t->a) && dist_term(t->b);
    case TK::Sum:
    case TK::Scale: return dist_cluster(t);
    case TK::Proj: return false;
  }
  return false;
}

}  // namespace detail

/// True iff `r` belongs to the term grammar: every linear combination is a
/// probability distribution (a bare term r counts as 1.r).
inline bool is_distribution(const Term& r) { return detail::dist_term(r); }

/// The top-level decomposition Σ p_i.t_i of a term of the restricted grammar,
/// or nullopt for pseudo-terms.
inline std::optional<std::vector<std::pair<Rational, Term>>> distribution_components(const Term& r) {
  if (!is_distribution(r)) return std::nullopt;
  std::vector<std::pair<Rational, Term>> out;
  for (const auto& s : summands(r)) out.push_back(detail::split_scale(s));
  return out;
}

/// A term of the restricted grammar: scalars in (0,1] summing to 1.
class DistTerm {
 public:
  explicit DistTerm(Term t) : term_(std::move(t)) {
    auto c = distribution_components(term_);
    if (!c) throw InputError("not a probability distribution: " + to_string(term_, Calculus::Alg));
    components_ = std::move(*c);
  }
  const Term& term() const { return term_; }
  const std::vector<std::pair<Rational, Term>>& components() const { return components_; }

 private:
  Term term_;
  std::vector<std::pair<Rational, Term>> components_;
};

namespace detail {

inline Term snf(const Term& t);

inline void collect_weighted(const Term& t, const Rational& p, std::vector<std::pair<Rational, Term>>& out) {
  if (t->kind == TK::Sum) {
    collect_weighted(t->a, p, out);
    collect_weighted(t->b, p, out);
  } else if (t->kind == TK::Scale) {
    collect_weighted(t->a, p * t->scalar, out);
  } else {
    out.emplace_back(p, t);
  }
}

// λx.r + λx.s -> λx.(r + s) and rt + st -> (r + s)t among unscaled summands.
inline bool factor_unscaled(std::vector<std::pair<Rational, Term>>& parts) {
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].first != 1) continue;
    const Term& u = parts[i].second;
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      if (parts[j].first != 1) continue;
      const Term& v = parts[j].second;
      Term merged;
      if (u->kind == TK::Lam && v->kind == TK::Lam && alpha_equal(u->type, v->type)) {
        std::set<std::string> avoid, types;
        all_names(u, avoid, types);
        all_names(v, avoid, types);
        const std::string x = fresh_name("v", avoid);
        const Term bx = var(x, u->type);
        merged = lam(x, u->type, sum(subst(u->a, u->name, bx), subst(v->a, v->name, bx)), u->pos);
      } else if (u->kind == TK::App && v->kind == TK::App && term_key(u->b) == term_key(v->b)) {
        merged = app(sum(u->a, v->a), u->b, u->pos);
      }
      if (!merged) continue;
      parts[i].second = merged;
      parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(j));
      return true;
    }
  }
  return false;
}

inline Term snf(const Term& t) {
  switch (t->kind) {
    case TK::Var: return t;
    case TK::Sum:
    case TK::Scale: {
      std::vector<std::pair<Rational, Term>> parts;
      collect_weighted(t, Rational(1), parts);
      while (factor_unscaled(parts)) {
      }
      std::map<std::string, std::pair<Rational, Term>> merged;
      for (auto& [p, r] : parts) {
        Term n = snf(r);
        auto [it, inserted] = merged.emplace(term_key(n), std::make_pair(p, n));
        if (!inserted) it->second.first += p;
      }
      std::vector<Term> out;
      for (auto& [_, e] : merged) out.push_back(e.first == 1 ? e.second : scale(e.first, e.second));
      return sum_of(out);
    }
    default: return with_children(t, t->a ? snf(t->a) : nullptr, t->b ? snf(t->b) : nullptr);
  }
}

}  // namespace detail

/// Representative of `t` modulo the symmetric moves and the scalar rules
/// (p.q.r, p.(r+s), p.r+q.r, 1.r). Sums are sorted, scalars multiplied out and
/// merged, and abstractions or applications sharing a binder type or an
/// argument are factored when unscaled.
inline Term alg_normalize(const Term& t) {
  Term cur = t;
  for (int i = 0; i < 64; ++i) {
    Term next = detail::snf(cur);
    if (term_key(next) == term_key(cur)) return next;
    cur = next;
  }
  return cur;
}

inline std::string alg_key(const Term& t) { return term_key(alg_normalize(t)); }

}  // namespace tracemeasure

#endif
