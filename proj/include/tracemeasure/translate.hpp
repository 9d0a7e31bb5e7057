#ifndef TRACEMEASURE_TRANSLATE_HPP
#define TRACEMEASURE_TRANSLATE_HPP

#include "alg.hpp"
#include "errors.hpp"
#include "lambda_plus.hpp"
#include "rational.hpp"
#include "term.hpp"
#include "typing.hpp"

#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tracemeasure {

/// Integer weights for Σ (n_i/d_i).r_i: m_i = n_i · ∏_{k≠i} d_k.
struct MultiplicityPlan {
  std::vector<BigInt> numerators;
  std::vector<BigInt> denominators;
  std::vector<BigInt> multiplicities;
  BigInt common_scale{1};  // ∏ d_k

  BigInt total() const {
    BigInt s = 0;
    for (const auto& m : multiplicities) s += m;
    return s;
  }
  Rational weight(std::size_t i) const { return Rational(multiplicities.at(i), total()); }
};

/// Scalars are read in lowest terms.
inline MultiplicityPlan multiplicity_plan(const std::vector<Rational>& scalars) {
  if (scalars.empty()) throw InputError("empty scalar list");
  MultiplicityPlan plan;
  for (const auto& p : scalars) {
    if (p <= 0) throw InputError("scalars must be positive: " + to_string(p));
    plan.numerators.push_back(numerator(p));
    plan.denominators.push_back(denominator(p));
    plan.common_scale *= denominator(p);
  }
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    BigInt m = plan.numerators[i];
    for (std::size_t k = 0; k < scalars.size(); ++k)
      if (k != i) m *= plan.denominators[k];
    plan.multiplicities.push_back(m);
  }
  return plan;
}

inline constexpr std::uint64_t max_multiplicity = 100000;

namespace detail {

inline Term forward(const Term& t) {
  switch (t->kind) {
    case TK::Var: return t;
    case TK::Proj: throw InputError("projector in an Alg term");
    case TK::Sum:
    case TK::Scale: {
      std::vector<Rational> ps;
      std::vector<Term> rs;
      for (const auto& s : summands(t)) {
        auto [p, r] = split_scale(s);
        ps.push_back(p);
        rs.push_back(r);
      }
      const Type a = alg_type_of(rs.front());
      for (std::size_t i = 1; i < rs.size(); ++i)
        if (!alpha_equal(alg_type_of(rs[i]), a))
          throw InputError("heterogeneous sum: " + to_string(a) + " and " + to_string(alg_type_of(rs[i])));
      const MultiplicityPlan plan = multiplicity_plan(ps);
      std::vector<Term> parts;
      for (std::size_t i = 0; i < rs.size(); ++i) {
        if (plan.multiplicities[i] > max_multiplicity)
          throw InfeasibleError("multiplicity " + plan.multiplicities[i].str() +
                                " too large to expand");
        const Term body = forward(rs[i]);
        for (auto k = static_cast<std::uint64_t>(plan.multiplicities[i]); k > 0; --k) parts.push_back(body);
      }
      return proj(a, sum_of(parts), t->pos);
    }
    default: return with_children(t, t->a ? forward(t->a) : nullptr, t->b ? forward(t->b) : nullptr);
  }
}

inline Term backward(const Term& t) {
  switch (t->kind) {
    case TK::Var: return t;
    case TK::Scale: throw InputError("scalar in a lambda-plus term");
    case TK::Proj: {
      StepResult step{Rule::Proj, {}, {}, nullptr, {}};
      try {
        step = project(t, Mode::Prob);
      } catch (const ProjectorNotReady&) {
        throw UntranslatableError(UntranslatableError::Reason::ProjectorNotReady, to_string(t));
      } catch (const NotARedex&) {
        throw UntranslatableError(UntranslatableError::Reason::ProjectorNormalForm, to_string(t));
      }
      std::vector<Term> parts;
      for (std::size_t i = 0; i < step.reducts.size(); ++i)
        parts.push_back(scale(step.probs[i], backward(step.reducts[i]), t->pos));
      return sum_of(parts);
    }
    default: return with_children(t, t->a ? backward(t->a) : nullptr, t->b ? backward(t->b) : nullptr);
  }
}

}  // namespace detail

/// Alg to lambda-plus: each linear combination Σ (n_i/d_i).r_i becomes
/// π_A(Σ m_i.r_i) with A the common type of the r_i.
inline Term to_lambda(const Term& alg) {
  alg_type_of(alg);
  return detail::forward(alg);
}

/// Lambda-plus to Alg: each projector becomes the mixture of its
/// probabilistic reducts.
inline Term to_alg(const Term& lp) {
  type_of(lp);
  return detail::backward(lp);
}

// ---------------------------------------------------------------------------
// Forward simulation

struct ForwardBranch {
  Rational prob;
  Term alg;             // t_i
  Term lambda;          // ⌊t_i⌋
  Distribution normal;  // normal forms of ⌊t_i⌋
};

struct ForwardCheck {
  Term reached;                // Σ p_i.t_i
  std::vector<AlgRule> path;   // rules from the source
  std::vector<ForwardBranch> branches;
  bool ok = true;
};

struct ForwardReport {
  bool ok = true;
  bool truncated = false;
  std::size_t explored = 0;
  std::size_t excluded_pseudo = 0;  // reducts outside the term grammar
  Term source_lambda;
  Distribution source_normal;
  std::vector<ForwardCheck> checks;
  std::set<AlgRule> rules_seen;      // last step into a checked reduct
  std::set<AlgRule> rules_excluded;  // last step into a pseudo-term
  std::vector<std::string> failures;
};

namespace detail {

using Weighted = std::map<std::string, std::pair<Term, Rational>>;

inline Weighted by_key(const Distribution& d) {
  Weighted w;
  for (const auto& [t, p] : d.entries) {
    auto [it, inserted] = w.emplace(canonical_key(t), std::make_pair(t, p));
    if (!inserted) it->second.second += p;
  }
  return w;
}

inline std::string describe(const Weighted& w) {
  std::string s = "{";
  bool first = true;
  for (const auto& [_, e] : w) {
    s += (first ? "" : ", ") + to_string(e.first) + ": " + to_string(e.second);
    first = false;
  }
  return s + "}";
}

}  // namespace detail

/// Explores up to `paths` Alg reducts of `r` (breadth first, distinct up to
/// α). For each reduct Σ p_i.t_i of the term grammar, checks that ⌊r⌋ reaches
/// the normal forms of each ⌊t_i⌋ with total probability exactly p_i.
inline ForwardReport check_simulation_forward(const Term& r, std::size_t paths = 200,
                                              RedexStrategy strategy = RedexStrategy::LeftmostOutermost,
                                              std::uint64_t step_cap = 4096) {
  alg_type_of(r);
  ForwardReport report;
  report.source_lambda = to_lambda(r);
  report.source_normal = normal_distribution(report.source_lambda, strategy, step_cap);
  if (report.source_normal.residual != 0) throw InfeasibleError("step cap reached on the translated source");
  const detail::Weighted source = detail::by_key(report.source_normal);

  std::map<std::string, detail::Weighted> cache;
  auto normal_of = [&](const Term& lam) -> const detail::Weighted& {
    const std::string k = canonical_key(lam);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    Distribution d = normal_distribution(lam, strategy, step_cap);
    if (d.residual != 0) throw InfeasibleError("step cap reached on a translated reduct");
    return cache.emplace(k, detail::by_key(d)).first->second;
  };

  struct Node {
    Term term;
    std::vector<AlgRule> path;
  };
  std::deque<Node> queue{{r, {}}};
  std::set<std::string> seen{term_key(r)};
  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    ++report.explored;
    if (auto comps = distribution_components(node.term)) {
      ForwardCheck check{node.term, node.path, {}, true};
      detail::Weighted mixture;
      for (const auto& [p, t] : *comps) {
        ForwardBranch b{p, t, to_lambda(t), {}};
        const detail::Weighted& nd = normal_of(b.lambda);
        for (const auto& [k, e] : nd) {
          b.normal.entries.push_back(e);
          auto [it, inserted] = mixture.emplace(k, std::make_pair(e.first, p * e.second));
          if (!inserted) it->second.second += p * e.second;
        }
        check.branches.push_back(std::move(b));
      }
      bool same = mixture.size() == source.size();
      auto jt = source.begin();
      for (auto it = mixture.begin(); same && it != mixture.end(); ++it, ++jt)
        same = it->first == jt->first && it->second.second == jt->second.second;
      if (!same) {
        check.ok = false;
        report.ok = false;
        report.failures.push_back(to_string(node.term, Calculus::Alg) + ": expected " + detail::describe(source) +
                                  ", branches give " + detail::describe(mixture));
      }
      if (!node.path.empty()) report.rules_seen.insert(node.path.back());
      report.checks.push_back(std::move(check));
    } else {
      ++report.excluded_pseudo;
      if (!node.path.empty()) report.rules_excluded.insert(node.path.back());
    }
    for (auto& [rule, next] : alg_reduce_step(node.term)) {
      if (!seen.insert(term_key(next)).second) continue;
      if (seen.size() > paths) {
        report.truncated = true;
        continue;
      }
      std::vector<AlgRule> path = node.path;
      path.push_back(rule);
      queue.push_back({std::move(next), std::move(path)});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Backward simulation

struct BackwardReport {
  bool ok = true;
  bool untranslatable_source = false;
  std::size_t symmetric_checked = 0;
  std::size_t rule_pi_encountered = 0;  // documented exclusion, not a failure
  std::size_t reductions_checked = 0;
  std::size_t probabilistic_checked = 0;
  std::size_t skipped_untranslatable = 0;
  std::set<std::string> cases_seen;
  std::vector<std::string> failures;
};

/// For each symmetric and reduction step out of `r`, checks the matching step
/// (or mixture identity) on ⌈r⌉.
inline BackwardReport check_simulation_backward(const Term& r) {
  type_of(r);
  BackwardReport report;
  Term ar;
  try {
    ar = to_alg(r);
  } catch (const UntranslatableError&) {
    report.untranslatable_source = true;
    return report;
  }
  auto translate = [&](const Term& s) -> std::optional<Term> {
    try {
      return to_alg(s);
    } catch (const UntranslatableError&) {
      ++report.skipped_untranslatable;
      return std::nullopt;
    }
  };
  auto fail = [&](const std::string& what) {
    report.ok = false;
    report.failures.push_back(what);
  };

  const std::string ar_key = term_key(ar);
  const std::string ar_ac = canonical_key(ar);
  std::set<std::string> one_sym;
  for (const auto& [_, u] : alg_reduce_step(ar)) one_sym.insert(term_key(u));

  for (const auto& [rule, s] : sym_step(r)) {
    if (rule == SymRule::Pi || rule == SymRule::PiInverse) {
      ++report.rule_pi_encountered;
      report.cases_seen.insert("rule-pi");
      continue;
    }
    auto as = translate(s);
    if (!as) continue;
    ++report.symmetric_checked;
    report.cases_seen.insert(to_string(rule));
    const std::string k = term_key(*as);
    if (k != ar_key && !one_sym.count(k) && canonical_key(*as) != ar_ac)
      fail(to_string(rule) + ": " + to_string(*as, Calculus::Alg) + " is not a symmetric variant of " +
           to_string(ar, Calculus::Alg));
  }

  const Term car = canonical_form(ar);
  std::set<std::string> targets{alg_key(ar)};
  for (const Term& base : {ar, car})
    for (const auto& [rule, u] : alg_reduce_step(base, AlgStepOptions{false, false}))
      if (rule == AlgRule::Beta || rule == AlgRule::TypeBeta) targets.insert(alg_key(u));

  for (const auto& step : all_reduce_steps(r, Mode::Prob)) {
    if (step.reducts.size() == 1) {
      auto as = translate(step.reducts.front());
      if (!as) continue;
      ++report.reductions_checked;
      report.cases_seen.insert(to_string(step.rule));
      if (!targets.count(alg_key(*as)))
        fail(to_string(step.rule) + ": no reduct of " + to_string(ar, Calculus::Alg) + " matches " +
             to_string(*as, Calculus::Alg));
    }
    if (step.rule != Rule::Proj) continue;
    auto lhs = translate(step.redex);
    if (!lhs) continue;
    std::vector<Term> parts;
    bool translatable = true;
    for (std::size_t i = 0; i < step.local_reducts.size() && translatable; ++i) {
      auto ai = translate(step.local_reducts[i]);
      if (!ai)
        translatable = false;
      else
        parts.push_back(scale(step.probs[i], *ai));
    }
    if (!translatable) continue;
    ++report.probabilistic_checked;
    report.cases_seen.insert(step.reducts.size() == 1 ? "proj-certain" : "proj-mixture");
    const Term rhs = sum_of(parts);
    if (alg_key(*lhs) != alg_key(rhs))
      fail("proj: " + to_string(*lhs, Calculus::Alg) + " differs from " + to_string(rhs, Calculus::Alg));
  }
  return report;
}

}  // namespace tracemeasure

#endif
