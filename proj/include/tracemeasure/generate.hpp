#ifndef TRACEMEASURE_GENERATE_HPP
#define TRACEMEASURE_GENERATE_HPP

#include "alg.hpp"
#include "parser.hpp"
#include "random.hpp"
#include "term.hpp"
#include "translate.hpp"
#include "type.hpp"
#include "typing.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tracemeasure {

/// Nesting of binders, applications, projectors and linear combinations; a
/// flattened sum counts once and scalars are free.
inline int term_depth(const Term& t) {
  switch (t->kind) {
    case TK::Var: return 0;
    case TK::Scale: return term_depth(t->a);
    case TK::Sum: {
      int d = 0;
      for (const auto& s : summands(t)) d = std::max(d, term_depth(s));
      return d + 1;
    }
    default: return 1 + std::max(t->a ? term_depth(t->a) : 0, t->b ? term_depth(t->b) : 0);
  }
}

/// One instance of the substitution identities: r with free x : x_type and
/// free type variable y, a replacement s : x_type and a replacement type c.
struct LemmaInstance {
  Calculus calc;
  Term r;
  std::string x;
  Type x_type;
  Term s;
  std::string y;
  Type c;
};

namespace detail {

/// Random well-typed terms built type-directed. Free variables are named after
/// their labels. Λ-bound names are fresh and never occur in the label of a
/// free variable.
class TermGenerator {
 public:
  TermGenerator(std::mt19937_64& rng, Calculus calc, std::string prefix = "g")
      : rng_(rng), calc_(calc), prefix_(std::move(prefix)) {}

  Type random_type(int depth, bool allow_forall = true) {
    const int pick = static_cast<int>(uniform_below(rng_, 20));
    if (depth <= 0 || pick < 9) return tvar(atoms_[uniform_below(rng_, atoms_.size())]);
    if (pick < 17 || !allow_forall) return arrow(random_type(depth - 1, allow_forall), random_type(depth - 1, allow_forall));
    const std::string w = fresh_type_name();
    if (uniform_below(rng_, 2)) return forall(w, arrow(tvar(w), random_type(depth - 1, false)));
    return forall(w, arrow(random_type(depth - 1, false), tvar(w)));
  }

  void set_target(std::string x, Type x_type) {
    x_ = std::move(x);
    x_type_ = std::move(x_type);
  }

  /// A term of type `t`: an Alg term of the restricted grammar, or a
  /// lambda-plus term whose projectors all fire on their own.
  std::optional<Term> term(const Type& t, int depth) { return gen(t, depth); }

  /// Normal, projector-free, sum-free term of type `t`.
  std::optional<Term> normal(const Type& t, int depth) { return gen_normal(t, depth); }

  Term neutral_with_head(const std::string& head, const Type& t, int depth) {
    const Type a = random_type(1, false);
    auto arg = gen_normal(a, depth - 1);
    if (!arg) return var(head, t);
    return app(var(head, arrow(a, t)), *arg);
  }

 private:
  using Gen = std::function<std::optional<Term>()>;

  std::string fresh_type_name() { return "Z" + std::to_string(++type_counter_); }
  std::string fresh_var_name() { return "z" + std::to_string(++var_counter_); }

  bool mentions_bound(const Type& t) const {
    for (const auto& v : free_type_vars(t))
      if (std::find(type_scope_.begin(), type_scope_.end(), v) != type_scope_.end()) return true;
    return false;
  }

  std::string global_name(const Type& t) {
    const std::string k = type_key(t);
    auto it = globals_.find(k);
    if (it != globals_.end()) return it->second;
    return globals_.emplace(k, prefix_ + std::to_string(globals_.size())).first->second;
  }

  std::optional<Term> global(const Type& t) {
    if (mentions_bound(t)) return std::nullopt;
    return var(global_name(t), t);
  }

  std::optional<Term> variable(const Type& t) {
    std::vector<Term> options;
    for (const auto& [z, zt] : scope_)
      if (alpha_equal(zt, t)) options.push_back(var(z, zt));
    if (!x_.empty() && alpha_equal(t, x_type_) && !mentions_bound(t)) {
      options.push_back(var(x_, x_type_));
      options.push_back(var(x_, x_type_));
    }
    if (options.empty() || uniform_below(rng_, 4) == 0) {
      if (auto g = global(t)) options.push_back(*g);
    }
    if (options.empty()) return std::nullopt;
    return options[uniform_below(rng_, options.size())];
  }

  template <class F>
  std::optional<Term> with_var(const std::string& z, const Type& zt, F f) {
    scope_.emplace_back(z, zt);
    auto r = f();
    scope_.pop_back();
    return r;
  }

  template <class F>
  std::optional<Term> with_type_var(const std::string& w, F f) {
    type_scope_.push_back(w);
    auto r = f();
    type_scope_.pop_back();
    return r;
  }

  std::optional<Term> intro(const Type& t, int depth, bool normal) {
    if (t->kind == TypeNode::Kind::Arrow) {
      const std::string z = fresh_var_name();
      auto body = with_var(z, t->lhs, [&] { return normal ? gen_normal(t->rhs, depth - 1) : gen(t->rhs, depth - 1); });
      if (!body) return std::nullopt;
      return lam(z, t->lhs, *body);
    }
    if (t->kind == TypeNode::Kind::Forall) {
      const std::string w = fresh_type_name();
      const Type body_type = subst_type(t->lhs, t->name, tvar(w));
      auto body = with_type_var(w, [&] { return normal ? gen_normal(body_type, depth - 1) : gen(body_type, depth - 1); });
      if (!body) return std::nullopt;
      return tlam(w, *body);
    }
    return std::nullopt;
  }

  std::optional<Term> neutral(const Type& t, int depth) {
    if (depth < 1 || mentions_bound(t)) return std::nullopt;
    if (uniform_below(rng_, 3) == 0) {
      const std::string w = fresh_type_name();
      auto g = global(forall(w, t));
      if (!g) return std::nullopt;
      return tapp(*g, random_type(1, false));
    }
    const Type a = random_type(1, false);
    auto arg = gen_normal(a, depth - 1);
    auto f = global(arrow(a, t));
    if (!arg || !f) return std::nullopt;
    return app(*f, *arg);
  }

  std::optional<Term> first_of(std::vector<std::pair<int, Gen>> options) {
    while (!options.empty()) {
      int total = 0;
      for (const auto& [w, _] : options) total += w;
      int pick = static_cast<int>(uniform_below(rng_, static_cast<std::uint64_t>(total)));
      std::size_t i = 0;
      while (pick >= options[i].first) pick -= options[i++].first;
      if (auto r = options[i].second()) return r;
      options.erase(options.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return std::nullopt;
  }

  std::optional<Term> gen_normal(const Type& t, int depth) {
    std::vector<std::pair<int, Gen>> options{{3, [&] { return variable(t); }}};
    if (depth > 0) {
      options.push_back({3, [&] { return intro(t, depth, true); }});
      options.push_back({2, [&] { return neutral(t, depth); }});
    }
    if (auto r = first_of(std::move(options))) return r;
    return intro(t, std::max(depth, 1), true);
  }

  std::vector<Rational> random_scalars() {
    const std::uint64_t n = 1 + uniform_below(rng_, 3);
    if (n == 1) return {Rational(1)};
    const std::int64_t d = n == 2 ? 2 + static_cast<std::int64_t>(uniform_below(rng_, 3))
                                  : 3 + static_cast<std::int64_t>(uniform_below(rng_, 2));
    std::vector<std::int64_t> parts(n, 1);
    for (std::int64_t left = d - static_cast<std::int64_t>(n); left > 0; --left) ++parts[uniform_below(rng_, n)];
    std::vector<Rational> out;
    for (auto k : parts) out.emplace_back(k, d);
    return out;
  }

  std::optional<Term> combination(const Type& t, int depth) {
    if (depth < 1) return std::nullopt;
    if (calc_ == Calculus::Alg) {
      std::vector<Term> parts;
      for (const auto& p : random_scalars()) {
        auto r = gen(t, depth - 1);
        if (!r) return std::nullopt;
        parts.push_back(scale(p, *r));
      }
      return sum_of(parts);
    }
    std::vector<Term> parts;
    const std::uint64_t n = 1 + uniform_below(rng_, 3);
    for (std::uint64_t i = 0; i < n; ++i) {
      auto r = gen_normal(t, std::min(depth - 1, 2));
      if (!r) return std::nullopt;
      for (auto m = 1 + uniform_below(rng_, 3); m > 0; --m) parts.push_back(*r);
    }
    if (uniform_below(rng_, 2)) {
      static const char* rest_types[] = {"Q", "Q -> A", "A -> Q"};
      const std::string spec = rest_types[uniform_below(rng_, 3)];
      const Type rt = spec == "Q" ? tvar("Q") : spec == "Q -> A" ? arrow(tvar("Q"), tvar("A")) : arrow(tvar("A"), tvar("Q"));
      auto rest = gen_normal(rt, 1);
      if (!rest) return std::nullopt;
      parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng_, parts.size() + 1)), *rest);
    }
    return proj(t, sum_of(parts));
  }

  std::optional<Term> gen(const Type& t, int depth) {
    if (depth <= 0) {
      if (auto v = variable(t)) return v;
      return gen_normal(t, 1);
    }
    std::vector<std::pair<int, Gen>> options{
        {1, [&] { return variable(t); }},
        {3, [&] { return intro(t, depth, false); }},
        {3, [&] { return combination(t, depth); }},
        {2, [&] { return neutral(t, depth); }},
        {2, [&]() -> std::optional<Term> {
           if (depth < 2) return std::nullopt;
           const Type a = random_type(1);
           const std::string z = fresh_var_name();
           auto body = with_var(z, a, [&] { return gen(t, depth - 2); });
           auto arg = gen(a, depth - 2);
           if (!body || !arg) return std::nullopt;
           return app(lam(z, a, *body), *arg);
         }},
        {1, [&]() -> std::optional<Term> {
           if (depth < 2) return std::nullopt;
           const std::string w = fresh_type_name();
           auto body = with_type_var(w, [&] { return gen(t, depth - 2); });
           if (!body) return std::nullopt;
           return tapp(tlam(w, *body), random_type(1));
         }},
        {1, [&]() -> std::optional<Term> {
           if (depth < 3) return std::nullopt;
           const std::string w = fresh_type_name();
           const std::string z = fresh_var_name();
           auto arg = gen(t, depth - 3);
           if (!arg) return std::nullopt;
           return app(tapp(tlam(w, lam(z, tvar(w), var(z, tvar(w)))), t), *arg);
         }},
    };
    return first_of(std::move(options));
  }

  std::mt19937_64& rng_;
  Calculus calc_;
  std::string prefix_;
  std::vector<std::string> atoms_{"A", "B", "Y"};
  std::vector<std::pair<std::string, Type>> scope_;
  std::vector<std::string> type_scope_;
  std::map<std::string, std::string> globals_;
  std::string x_;
  Type x_type_;
  int type_counter_ = 0;
  int var_counter_ = 0;
};

inline bool valid_instance(const LemmaInstance& in) {
  if (in.calc == Calculus::Alg) {
    if (!well_typed(in.r, Calculus::Alg) || !is_distribution(in.r)) return false;
    if (!well_typed(in.s, Calculus::Alg) || !is_distribution(in.s)) return false;
    return alpha_equal(alg_type_of(in.s), in.x_type);
  }
  if (!well_typed(in.r) || !well_typed(in.s)) return false;
  return type_equiv(type_of(in.s), in.x_type);
}

}  // namespace detail

/// `count` instances per calculus, reproducible from `seed`. Every r mentions
/// x or Y; terms deeper than `max_depth` are redrawn.
inline std::vector<LemmaInstance> generate_lemma_corpus(std::uint64_t seed, std::size_t count, int max_depth = 5) {
  std::mt19937_64 rng(seed);
  std::vector<LemmaInstance> out;
  for (Calculus calc : {Calculus::Alg, Calculus::LambdaPlus}) {
    std::size_t made = 0;
    for (std::size_t attempt = 0; made < count; ++attempt) {
      if (attempt > 200 * count + 1000) throw std::logic_error("term generator makes no progress");
      detail::TermGenerator g(rng, calc);
      const Type x_type = g.random_type(1, calc == Calculus::Alg);
      g.set_target("x", x_type);
      const Type t = g.random_type(2);
      const int depth = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(max_depth)));
      auto r = g.term(t, depth);
      if (!r || term_depth(*r) > max_depth) continue;
      LemmaInstance in{calc, *r, "x", x_type, nullptr, "Y", nullptr};
      if (!free_var_names(in.r).count("x") && !free_type_vars(in.r).count("Y")) continue;
      detail::TermGenerator gs(rng, calc, "h");
      if (calc == Calculus::Alg) {
        auto s = gs.term(x_type, 2);
        if (!s) continue;
        in.s = *s;
      } else {
        in.s = gs.neutral_with_head("s0", x_type, 2);
      }
      static const char* replacement_types[] = {"Cq", "Cq -> A", "(A -> Cq) -> B", "forall W. W -> Cq"};
      in.c = parse_type(replacement_types[uniform_below(rng, 4)]);
      if (!detail::valid_instance(in)) throw std::logic_error("ill-typed generated term: " + to_string(in.r, calc));
      out.push_back(std::move(in));
      ++made;
    }
  }
  return out;
}

struct LemmaReport {
  std::size_t alg_instances = 0;
  std::size_t lambda_instances = 0;
  std::size_t checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Type and term substitution commute with both translations, compared α-exactly:
/// ⌊r⌋[C/Y] = ⌊r[C/Y]⌋, ⌊r⌋[⌊s⌋/x] = ⌊r[s/x]⌋, and likewise for ⌈·⌉.
inline LemmaReport check_substitution_lemmas(const std::vector<LemmaInstance>& corpus) {
  LemmaReport report;
  for (const auto& in : corpus) {
    const bool alg = in.calc == Calculus::Alg;
    (alg ? report.alg_instances : report.lambda_instances)++;
    auto tr = [&](const Term& t) { return alg ? to_lambda(t) : to_alg(t); };
    auto check = [&](const char* what, const Term& lhs, const Term& rhs) {
      ++report.checks;
      if (!alpha_equal(lhs, rhs))
        report.failures.push_back(std::string(what) + " on " + to_string(in.r, in.calc) + ": " +
                                  to_string(lhs, alg ? Calculus::LambdaPlus : Calculus::Alg) + " vs " +
                                  to_string(rhs, alg ? Calculus::LambdaPlus : Calculus::Alg));
    };
    try {
      const Term tr_r = tr(in.r);
      check(alg ? "forward type substitution" : "backward type substitution", subst_type(tr_r, in.y, in.c),
            tr(subst_type(in.r, in.y, in.c)));
      check(alg ? "forward term substitution" : "backward term substitution", subst(tr_r, in.x, tr(in.s)),
            tr(subst(in.r, in.x, in.s)));
    } catch (const std::exception& e) {
      ++report.checks;
      report.failures.push_back(std::string("exception on ") + to_string(in.r, in.calc) + ": " + e.what());
    }
  }
  return report;
}

}  // namespace tracemeasure

#endif
