#ifndef TRACEMEASURE_TERM_HPP
#define TRACEMEASURE_TERM_HPP

#include "rational.hpp"
#include "type.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tracemeasure {

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

/// Shared syntax of both calculi. Scale only occurs in Alg terms; Proj only in
/// lambda-plus terms.
struct TermNode {
  enum class Kind { Var, Lam, App, Sum, Proj, TLam, TApp, Scale };
  Kind kind;
  std::string name;  // Var, Lam binder, TLam binder
  Type type;         // Var label, Lam label, Proj index, TApp argument
  Term a;            // Lam/TLam body, App function, Sum left, Proj/TApp/Scale operand
  Term b;            // App argument, Sum right
  Rational scalar;   // Scale
  SourcePos pos{};
};

using TK = TermNode::Kind;

inline Term mk(TK k, std::string name, Type type, Term a, Term b, Rational p = 0, SourcePos pos = {}) {
  return std::make_shared<const TermNode>(
      TermNode{k, std::move(name), std::move(type), std::move(a), std::move(b), std::move(p), pos});
}
inline Term var(std::string x, Type t, SourcePos pos = {}) { return mk(TK::Var, std::move(x), std::move(t), nullptr, nullptr, 0, pos); }
inline Term lam(std::string x, Type t, Term body, SourcePos pos = {}) {
  return mk(TK::Lam, std::move(x), std::move(t), std::move(body), nullptr, 0, pos);
}
inline Term app(Term r, Term s, SourcePos pos = {}) { return mk(TK::App, {}, nullptr, std::move(r), std::move(s), 0, pos); }
inline Term sum(Term r, Term s, SourcePos pos = {}) { return mk(TK::Sum, {}, nullptr, std::move(r), std::move(s), 0, pos); }
inline Term proj(Type t, Term r, SourcePos pos = {}) { return mk(TK::Proj, {}, std::move(t), std::move(r), nullptr, 0, pos); }
inline Term tlam(std::string x, Term body, SourcePos pos = {}) {
  return mk(TK::TLam, std::move(x), nullptr, std::move(body), nullptr, 0, pos);
}
inline Term tapp(Term r, Type t, SourcePos pos = {}) { return mk(TK::TApp, {}, std::move(t), std::move(r), nullptr, 0, pos); }
inline Term scale(Rational p, Term r, SourcePos pos = {}) {
  return mk(TK::Scale, {}, nullptr, std::move(r), nullptr, std::move(p), pos);
}

/// Copy of `t` with new children.
inline Term with_children(const Term& t, Term a, Term b) {
  return mk(t->kind, t->name, t->type, std::move(a), std::move(b), t->scalar, t->pos);
}

/// Left-nested sum of a non-empty list.
inline Term sum_of(const std::vector<Term>& ts) {
  Term s = ts.front();
  for (std::size_t i = 1; i < ts.size(); ++i) s = sum(s, ts[i]);
  return s;
}

/// n-fold sum r + ... + r.
inline Term repeat_sum(const Term& r, std::uint64_t n) {
  std::vector<Term> ts(n, r);
  return sum_of(ts);
}

/// Summands of the maximal Sum cluster rooted at `t`, left to right.
inline void flatten_sum(const Term& t, std::vector<Term>& out) {
  if (t->kind == TK::Sum) {
    flatten_sum(t->a, out);
    flatten_sum(t->b, out);
  } else {
    out.push_back(t);
  }
}

inline std::vector<Term> summands(const Term& t) {
  std::vector<Term> out;
  flatten_sum(t, out);
  return out;
}

struct KeyEnv {
  std::vector<std::string> vars;
  TypeEnv types;
};

/// α-canonical key: bound term variables become binder depths.
inline std::string term_key(const Term& t, KeyEnv& env) {
  switch (t->kind) {
    case TK::Var: {
      const std::string label = type_key(t->type, env.types);
      for (std::size_t i = env.vars.size(); i-- > 0;)
        if (env.vars[i] == t->name) return "#" + std::to_string(i) + ":" + label;
      return t->name + ":" + label;
    }
    case TK::Lam: {
      std::string k = "L" + type_key(t->type, env.types) + ".";
      env.vars.push_back(t->name);
      k += term_key(t->a, env);
      env.vars.pop_back();
      return k;
    }
    case TK::App: return "@(" + term_key(t->a, env) + "," + term_key(t->b, env) + ")";
    case TK::Sum: return "+(" + term_key(t->a, env) + "," + term_key(t->b, env) + ")";
    case TK::Proj: return "P[" + type_key(t->type, env.types) + "](" + term_key(t->a, env) + ")";
    case TK::TLam: {
      env.types.push_back(t->name);
      std::string k = "T." + term_key(t->a, env);
      env.types.pop_back();
      return k;
    }
    case TK::TApp: return "{" + term_key(t->a, env) + "}[" + type_key(t->type, env.types) + "]";
    case TK::Scale: return "S" + to_string(t->scalar) + "(" + term_key(t->a, env) + ")";
  }
  return {};
}

inline std::string term_key(const Term& t) {
  KeyEnv env;
  return term_key(t, env);
}

inline bool alpha_equal(const Term& a, const Term& b) { return term_key(a) == term_key(b); }

/// Free occurrences x^A, in order of appearance (duplicates kept).
inline void free_var_occurrences(const Term& t, std::vector<std::pair<std::string, Type>>& out,
                                 std::vector<std::string>& bound) {
  switch (t->kind) {
    case TK::Var:
      if (std::find(bound.begin(), bound.end(), t->name) == bound.end()) out.emplace_back(t->name, t->type);
      break;
    case TK::Lam:
      bound.push_back(t->name);
      free_var_occurrences(t->a, out, bound);
      bound.pop_back();
      break;
    default:
      if (t->a) free_var_occurrences(t->a, out, bound);
      if (t->b) free_var_occurrences(t->b, out, bound);
  }
}

inline std::vector<std::pair<std::string, Type>> free_var_occurrences(const Term& t) {
  std::vector<std::pair<std::string, Type>> out;
  std::vector<std::string> bound;
  free_var_occurrences(t, out, bound);
  return out;
}

inline std::set<std::string> free_var_names(const Term& t) {
  std::set<std::string> names;
  for (const auto& [x, _] : free_var_occurrences(t)) names.insert(x);
  return names;
}

/// Type variables free in any annotation of `t` (labels, projector indices,
/// type arguments), minus those bound by an enclosing type abstraction.
inline void free_type_vars(const Term& t, std::set<std::string>& out, std::set<std::string>& bound) {
  if (t->type) {
    for (const auto& x : free_type_vars(t->type))
      if (!bound.count(x)) out.insert(x);
  }
  if (t->kind == TK::TLam) {
    const bool had = bound.count(t->name) != 0;
    bound.insert(t->name);
    free_type_vars(t->a, out, bound);
    if (!had) bound.erase(t->name);
    return;
  }
  if (t->a) free_type_vars(t->a, out, bound);
  if (t->b) free_type_vars(t->b, out, bound);
}

inline std::set<std::string> free_type_vars(const Term& t) {
  std::set<std::string> out, bound;
  free_type_vars(t, out, bound);
  return out;
}

inline void all_names(const Term& t, std::set<std::string>& terms, std::set<std::string>& types) {
  if (t->kind == TK::TLam)
    types.insert(t->name);
  else if (!t->name.empty())
    terms.insert(t->name);
  if (t->type) all_type_names(t->type, types);
  if (t->a) all_names(t->a, terms, types);
  if (t->b) all_names(t->b, terms, types);
}

Term subst_type(const Term& r, const std::string& x, const Type& b);

/// r[s/x], renaming binders of r that would capture free variables of s.
inline Term subst(const Term& r, const std::string& x, const Term& s) {
  switch (r->kind) {
    case TK::Var: return r->name == x ? s : r;
    case TK::Lam: {
      if (r->name == x) return r;
      const auto fv_r = free_var_names(r);
      if (!fv_r.count(x)) return r;
      const auto fv_s = free_var_names(s);
      if (!fv_s.count(r->name)) return lam(r->name, r->type, subst(r->a, x, s), r->pos);
      std::set<std::string> avoid = fv_s, tys;
      all_names(r, avoid, tys);
      avoid.insert(x);
      const std::string y = fresh_name(r->name, avoid);
      return lam(y, r->type, subst(subst(r->a, r->name, var(y, r->type)), x, s), r->pos);
    }
    case TK::TLam: {
      if (!free_var_names(r).count(x)) return r;
      const auto ftv_s = free_type_vars(s);
      if (!ftv_s.count(r->name)) return tlam(r->name, subst(r->a, x, s), r->pos);
      std::set<std::string> avoid = ftv_s, terms;
      all_names(r, terms, avoid);
      const std::string y = fresh_name(r->name, avoid);
      return tlam(y, subst(subst_type(r->a, r->name, tvar(y)), x, s), r->pos);
    }
    default:
      return with_children(r, r->a ? subst(r->a, x, s) : nullptr, r->b ? subst(r->b, x, s) : nullptr);
  }
}

/// r[B/X] on every annotation, renaming type binders that would capture.
inline Term subst_type(const Term& r, const std::string& x, const Type& b) {
  auto sub = [&](const Type& t) { return t ? subst_type(t, x, b) : t; };
  switch (r->kind) {
    case TK::TLam: {
      if (r->name == x) return r;
      if (!free_type_vars(r).count(x)) return r;
      const auto fv_b = free_type_vars(b);
      if (!fv_b.count(r->name)) return tlam(r->name, subst_type(r->a, x, b), r->pos);
      std::set<std::string> avoid = fv_b, terms;
      all_names(r, terms, avoid);
      avoid.insert(x);
      const std::string y = fresh_name(r->name, avoid);
      return tlam(y, subst_type(subst_type(r->a, r->name, tvar(y)), x, b), r->pos);
    }
    default:
      return mk(r->kind, r->name, sub(r->type), r->a ? subst_type(r->a, x, b) : nullptr,
                r->b ? subst_type(r->b, x, b) : nullptr, r->scalar, r->pos);
  }
}

enum class Calculus { LambdaPlus, Alg };

namespace detail {

// Levels: 0 sum and binders, 1 scaled summand, 2 application, 3 atom.
inline int term_level(const Term& t) {
  switch (t->kind) {
    case TK::Sum:
    case TK::Lam:
    case TK::TLam: return 0;
    case TK::Scale: return 1;
    case TK::App:
    case TK::TApp: return 2;
    default: return 3;
  }
}

inline std::string print_term(const Term& t, int min_level, Calculus c) {
  std::string s;
  switch (t->kind) {
    case TK::Var: return t->name + ":" + to_atomic_string(t->type);
    case TK::Proj: return "pi[" + to_string(t->type) + "](" + print_term(t->a, 0, c) + ")";
    case TK::Lam: s = "\\" + t->name + ":" + to_string(t->type) + ". " + print_term(t->a, 0, c); break;
    case TK::TLam: s = "/\\" + t->name + ". " + print_term(t->a, 0, c); break;
    case TK::App: s = print_term(t->a, 2, c) + " " + print_term(t->b, 3, c); break;
    case TK::TApp: s = print_term(t->a, 2, c) + " {" + to_string(t->type) + "}"; break;
    case TK::Scale: s = to_string(t->scalar) + "." + print_term(t->a, 2, c); break;
    case TK::Sum: {
      // The left spine is one flat list; right operands that are sums keep parentheses.
      std::vector<Term> spine;
      Term cur = t;
      while (cur->kind == TK::Sum) {
        spine.push_back(cur->b);
        cur = cur->a;
      }
      spine.push_back(cur);
      std::reverse(spine.begin(), spine.end());
      std::vector<std::string> keys;
      for (const auto& x : spine) keys.push_back(term_key(x));
      for (std::size_t i = 0; i < spine.size();) {
        std::size_t j = i + 1;
        if (c == Calculus::LambdaPlus)
          while (j < spine.size() && keys[j] == keys[i]) ++j;
        if (i) s += " + ";
        if (j - i > 1)
          s += std::to_string(j - i) + "." + print_term(spine[i], 2, c);
        else
          s += print_term(spine[i], 1, c);
        i = j;
      }
      break;
    }
  }
  return term_level(t) < min_level ? "(" + s + ")" : s;
}

}  // namespace detail

inline std::string to_string(const Term& t, Calculus c = Calculus::LambdaPlus) { return detail::print_term(t, 0, c); }

/// Variables bound by the lambdas enclosing a position, and enclosing type binders.
struct Context {
  std::vector<std::string> lambda_bound;
  std::vector<std::string> type_bound;
};

/// Applies `f` at every position of `t` (pre-order) and plugs each local
/// result back into the whole term. f(subterm, context) -> vector<pair<Tag, Term>>.
template <class Tag, class F>
void rewrite_everywhere(const Term& t, Context& ctx, F& f, const std::function<Term(Term)>& plug,
                        std::vector<std::pair<Tag, Term>>& out) {
  for (auto& [tag, local] : f(t, ctx)) out.emplace_back(std::move(tag), plug(std::move(local)));
  switch (t->kind) {
    case TK::Var: return;
    case TK::Lam: {
      ctx.lambda_bound.push_back(t->name);
      rewrite_everywhere<Tag>(t->a, ctx, f, [&](Term x) { return plug(with_children(t, std::move(x), nullptr)); }, out);
      ctx.lambda_bound.pop_back();
      return;
    }
    case TK::TLam: {
      ctx.type_bound.push_back(t->name);
      rewrite_everywhere<Tag>(t->a, ctx, f, [&](Term x) { return plug(with_children(t, std::move(x), nullptr)); }, out);
      ctx.type_bound.pop_back();
      return;
    }
    default:
      if (t->a)
        rewrite_everywhere<Tag>(t->a, ctx, f, [&](Term x) { return plug(with_children(t, std::move(x), t->b)); }, out);
      if (t->b)
        rewrite_everywhere<Tag>(t->b, ctx, f, [&](Term x) { return plug(with_children(t, t->a, std::move(x))); }, out);
  }
}

template <class Tag, class F>
std::vector<std::pair<Tag, Term>> rewrite_everywhere(const Term& t, F f) {
  std::vector<std::pair<Tag, Term>> out;
  Context ctx;
  rewrite_everywhere<Tag>(t, ctx, f, [](Term x) { return x; }, out);
  return out;
}

/// Structural map applied bottom-up.
template <class F>
Term map_bottom_up(const Term& t, F&& f) {
  Term a = t->a ? map_bottom_up(t->a, f) : nullptr;
  Term b = t->b ? map_bottom_up(t->b, f) : nullptr;
  Term self = (a == t->a && b == t->b) ? t : with_children(t, std::move(a), std::move(b));
  return f(self);
}

inline std::size_t term_size(const Term& t) {
  return 1 + (t->a ? term_size(t->a) : 0) + (t->b ? term_size(t->b) : 0);
}

}  // namespace tracemeasure

#endif
