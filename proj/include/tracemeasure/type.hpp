#ifndef TRACEMEASURE_TYPE_HPP
#define TRACEMEASURE_TYPE_HPP

#include "errors.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tracemeasure {

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

/// X | A -> B | A /\ B | forall X. A
struct TypeNode {
  enum class Kind { Var, Arrow, Conj, Forall };
  Kind kind;
  std::string name;  // Var, Forall binder
  Type lhs;          // Arrow antecedent, Conj left, Forall body
  Type rhs;          // Arrow consequent, Conj right
  SourcePos pos{};
};

inline Type tvar(std::string name, SourcePos pos = {}) {
  return std::make_shared<const TypeNode>(TypeNode{TypeNode::Kind::Var, std::move(name), nullptr, nullptr, pos});
}
inline Type arrow(Type a, Type b, SourcePos pos = {}) {
  return std::make_shared<const TypeNode>(TypeNode{TypeNode::Kind::Arrow, {}, std::move(a), std::move(b), pos});
}
inline Type conj(Type a, Type b, SourcePos pos = {}) {
  return std::make_shared<const TypeNode>(TypeNode{TypeNode::Kind::Conj, {}, std::move(a), std::move(b), pos});
}
inline Type forall(std::string x, Type body, SourcePos pos = {}) {
  return std::make_shared<const TypeNode>(TypeNode{TypeNode::Kind::Forall, std::move(x), std::move(body), nullptr, pos});
}

/// Right-nested conjunction of a non-empty list.
inline Type conj_of(const std::vector<Type>& factors) {
  Type t = factors.back();
  for (auto it = factors.rbegin() + 1; it != factors.rend(); ++it) t = conj(*it, t);
  return t;
}

/// Name not in `avoid`, built from `base` by replacing trailing digits.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  std::string stem = base;
  while (!stem.empty() && std::isdigit(static_cast<unsigned char>(stem.back()))) stem.pop_back();
  if (stem.empty()) stem = "v";
  for (int i = 1;; ++i) {
    std::string candidate = stem + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

using TypeEnv = std::vector<std::string>;  // bound type variables, innermost last

/// α-canonical rendering: bound variables become their binder depth.
inline std::string type_key(const Type& t, TypeEnv& env) {
  switch (t->kind) {
    case TypeNode::Kind::Var:
      for (std::size_t i = env.size(); i-- > 0;)
        if (env[i] == t->name) return "%" + std::to_string(i);
      return t->name;
    case TypeNode::Kind::Arrow: return "(" + type_key(t->lhs, env) + ">" + type_key(t->rhs, env) + ")";
    case TypeNode::Kind::Conj: return "(" + type_key(t->lhs, env) + "&" + type_key(t->rhs, env) + ")";
    case TypeNode::Kind::Forall: {
      env.push_back(t->name);
      std::string k = "!{" + type_key(t->lhs, env) + "}";
      env.pop_back();
      return k;
    }
  }
  return {};
}

inline std::string type_key(const Type& t) {
  TypeEnv env;
  return type_key(t, env);
}

inline bool alpha_equal(const Type& a, const Type& b) { return type_key(a) == type_key(b); }

inline void free_type_vars(const Type& t, std::set<std::string>& out, std::set<std::string>& bound) {
  switch (t->kind) {
    case TypeNode::Kind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      break;
    case TypeNode::Kind::Arrow:
    case TypeNode::Kind::Conj:
      free_type_vars(t->lhs, out, bound);
      free_type_vars(t->rhs, out, bound);
      break;
    case TypeNode::Kind::Forall: {
      const bool had = bound.count(t->name) != 0;
      bound.insert(t->name);
      free_type_vars(t->lhs, out, bound);
      if (!had) bound.erase(t->name);
      break;
    }
  }
}

inline std::set<std::string> free_type_vars(const Type& t) {
  std::set<std::string> out, bound;
  free_type_vars(t, out, bound);
  return out;
}

inline void all_type_names(const Type& t, std::set<std::string>& out) {
  out.insert(t->name);
  if (t->lhs) all_type_names(t->lhs, out);
  if (t->rhs) all_type_names(t->rhs, out);
}

/// A[B/X], renaming binders that would capture free variables of B.
inline Type subst_type(const Type& a, const std::string& x, const Type& b) {
  switch (a->kind) {
    case TypeNode::Kind::Var: return a->name == x ? b : a;
    case TypeNode::Kind::Arrow: return arrow(subst_type(a->lhs, x, b), subst_type(a->rhs, x, b), a->pos);
    case TypeNode::Kind::Conj: return conj(subst_type(a->lhs, x, b), subst_type(a->rhs, x, b), a->pos);
    case TypeNode::Kind::Forall: {
      if (a->name == x) return a;
      const auto fv_a = free_type_vars(a);
      if (!fv_a.count(x)) return a;
      const auto fv_b = free_type_vars(b);
      if (!fv_b.count(a->name)) return forall(a->name, subst_type(a->lhs, x, b), a->pos);
      std::set<std::string> avoid = fv_b;
      all_type_names(a, avoid);
      avoid.insert(x);
      const std::string y = fresh_name(a->name, avoid);
      return forall(y, subst_type(subst_type(a->lhs, a->name, tvar(y)), x, b), a->pos);
    }
  }
  return a;
}

namespace detail {

struct Factor {
  std::string key;
  Type type;
};

inline std::string join_keys(const std::vector<Factor>& fs) {
  std::string k = "[";
  for (std::size_t i = 0; i < fs.size(); ++i) k += (i ? "&" : "") + fs[i].key;
  return k + "]";
}

inline Type rebuild(const std::vector<Factor>& fs) {
  std::vector<Type> ts;
  for (const auto& f : fs) ts.push_back(f.type);
  return conj_of(ts);
}

inline std::vector<Factor> nf_factors(const Type& t, TypeEnv& env) {
  std::vector<Factor> out;
  switch (t->kind) {
    case TypeNode::Kind::Var: out.push_back({type_key(t, env), t}); break;
    case TypeNode::Kind::Conj: {
      out = nf_factors(t->lhs, env);
      auto r = nf_factors(t->rhs, env);
      out.insert(out.end(), r.begin(), r.end());
      break;
    }
    case TypeNode::Kind::Arrow: {
      auto ante = nf_factors(t->lhs, env);
      const std::string ak = join_keys(ante);
      const Type at = rebuild(ante);
      for (auto& f : nf_factors(t->rhs, env)) out.push_back({"(" + ak + ">" + f.key + ")", arrow(at, f.type)});
      break;
    }
    case TypeNode::Kind::Forall: {
      env.push_back(t->name);
      auto body = nf_factors(t->lhs, env);
      env.pop_back();
      out.push_back({"!{" + join_keys(body) + "}", forall(t->name, rebuild(body))});
      break;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Factor& a, const Factor& b) { return a.key < b.key; });
  return out;
}

}  // namespace detail

/// Normal form modulo the type isomorphisms: conjunctions flattened into a
/// sorted multiset of factors, arrows distributed over conjunctive consequents,
/// normalized under binders. Two types are equivalent iff their NFs coincide.
struct TypeNF {
  std::vector<std::string> factor_keys;
  std::vector<Type> factors;

  std::string key() const {
    std::string k;
    for (std::size_t i = 0; i < factor_keys.size(); ++i) k += (i ? " & " : "") + factor_keys[i];
    return k;
  }
  Type type() const { return conj_of(factors); }
  friend bool operator==(const TypeNF& a, const TypeNF& b) { return a.factor_keys == b.factor_keys; }
};

inline TypeNF type_nf(const Type& t, TypeEnv& env) {
  TypeNF nf;
  for (auto& f : detail::nf_factors(t, env)) {
    nf.factor_keys.push_back(std::move(f.key));
    nf.factors.push_back(std::move(f.type));
  }
  return nf;
}

inline TypeNF type_nf(const Type& t) {
  TypeEnv env;
  return type_nf(t, env);
}

inline bool type_equiv(const Type& a, const Type& b) { return type_nf(a) == type_nf(b); }

/// Multiset inclusion of NF factors: `part` is equivalent to a sub-conjunction of `whole`.
inline bool nf_includes(const TypeNF& whole, const TypeNF& part) {
  return std::includes(whole.factor_keys.begin(), whole.factor_keys.end(), part.factor_keys.begin(),
                       part.factor_keys.end());
}

inline bool type_mentions_conj(const Type& t) {
  if (t->kind == TypeNode::Kind::Conj) return true;
  return (t->lhs && type_mentions_conj(t->lhs)) || (t->rhs && type_mentions_conj(t->rhs));
}

namespace detail {

// Precedence: 0 forall, 1 arrow, 2 conj, 3 atom.
inline int type_level(const Type& t) {
  switch (t->kind) {
    case TypeNode::Kind::Forall: return 0;
    case TypeNode::Kind::Arrow: return 1;
    case TypeNode::Kind::Conj: return 2;
    default: return 3;
  }
}

inline std::string print_type(const Type& t, int min_level) {
  std::string s;
  switch (t->kind) {
    case TypeNode::Kind::Var: return t->name;
    case TypeNode::Kind::Arrow: s = print_type(t->lhs, 2) + " -> " + print_type(t->rhs, 0); break;
    case TypeNode::Kind::Conj: s = print_type(t->lhs, 2) + " /\\ " + print_type(t->rhs, 3); break;
    case TypeNode::Kind::Forall: s = "forall " + t->name + ". " + print_type(t->lhs, 0); break;
  }
  return type_level(t) < min_level ? "(" + s + ")" : s;
}

}  // namespace detail

inline std::string to_string(const Type& t) { return detail::print_type(t, 0); }
inline std::string to_atomic_string(const Type& t) { return detail::print_type(t, 3); }

}  // namespace tracemeasure

#endif
