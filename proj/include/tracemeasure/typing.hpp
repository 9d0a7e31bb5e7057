#ifndef TRACEMEASURE_TYPING_HPP
#define TRACEMEASURE_TYPING_HPP

#include "errors.hpp"
#include "term.hpp"
#include "type.hpp"

#include <map>
#include <string>

namespace tracemeasure {

namespace detail {

using Labels = std::map<std::string, Type>;  // free variable -> label

struct Judgement {
  Type type;
  Labels free;
};

class Checker {
 public:
  explicit Checker(Calculus calc) : calc_(calc) {}

  Judgement infer(const Term& t) {
    switch (t->kind) {
      case TK::Var:
        check_type(t->type, t->pos);
        return {t->type, Labels{{t->name, t->type}}};

      case TK::Lam: {
        check_type(t->type, t->pos);
        Judgement body = infer(t->a);
        if (auto it = body.free.find(t->name); it != body.free.end()) {
          if (!same(it->second, t->type))
            throw TypeError(TypeError::Kind::IncoherentLabels, "=>i", t->pos,
                            t->name + " is labelled both " + to_string(t->type) + " and " + to_string(it->second));
          body.free.erase(it);
        }
        return {arrow(t->type, body.type), std::move(body.free)};
      }

      case TK::App: {
        Judgement f = infer(t->a);
        Judgement x = infer(t->b);
        Labels free = merge(std::move(f.free), x.free, "=>e", t->pos);
        return {apply(f.type, x.type, t->pos), std::move(free)};
      }

      case TK::Sum: {
        Judgement l = infer(t->a);
        Judgement r = infer(t->b);
        const char* rule = calc_ == Calculus::LambdaPlus ? "/\\i" : "+i";
        Labels free = merge(std::move(l.free), r.free, rule, t->pos);
        if (calc_ == Calculus::LambdaPlus) return {conj(l.type, r.type), std::move(free)};
        if (!alpha_equal(l.type, r.type))
          throw TypeError(TypeError::Kind::SumTypeMismatch, "+i", t->pos,
                          "summands have types " + to_string(l.type) + " and " + to_string(r.type));
        return {l.type, std::move(free)};
      }

      case TK::Proj: {
        if (calc_ == Calculus::Alg) throw TypeError(TypeError::Kind::Unsupported, "-", t->pos, "projector in Alg");
        check_type(t->type, t->pos);
        Judgement r = infer(t->a);
        if (!nf_includes(type_nf(r.type), type_nf(t->type)))
          throw TypeError(TypeError::Kind::NotAConj, "/\\e", t->pos,
                          to_string(r.type) + " has no factor " + to_string(t->type));
        return {t->type, std::move(r.free)};
      }

      case TK::TLam: {
        Judgement r = infer(t->a);
        for (const auto& [x, label] : r.free)
          if (free_type_vars(label).count(t->name))
            throw TypeError(TypeError::Kind::EscapingTypeVariable, "forall_i", t->pos,
                            t->name + " is free in the label of " + x + ":" + to_string(label));
        return {forall(t->name, r.type), std::move(r.free)};
      }

      case TK::TApp: {
        check_type(t->type, t->pos);
        Judgement r = infer(t->a);
        Type poly = r.type;
        if (poly->kind != TypeNode::Kind::Forall && calc_ == Calculus::LambdaPlus) {
          TypeNF nf = type_nf(poly);
          if (nf.factors.size() == 1) poly = nf.factors.front();
        }
        if (poly->kind != TypeNode::Kind::Forall)
          throw TypeError(TypeError::Kind::NotAForall, "forall_e", t->pos, to_string(r.type) + " is not polymorphic");
        return {subst_type(poly->lhs, poly->name, t->type), std::move(r.free)};
      }

      case TK::Scale: {
        if (calc_ == Calculus::LambdaPlus)
          throw TypeError(TypeError::Kind::Unsupported, "-", t->pos, "scalar in lambda-plus");
        if (t->scalar <= 0) throw TypeError(TypeError::Kind::Unsupported, "p_i", t->pos, "scalar must be positive");
        return infer(t->a);
      }
    }
    throw TypeError(TypeError::Kind::Unsupported, "-", t->pos, "unknown node");
  }

 private:
  bool same(const Type& a, const Type& b) const {
    return calc_ == Calculus::LambdaPlus ? type_equiv(a, b) : alpha_equal(a, b);
  }

  void check_type(const Type& t, SourcePos pos) const {
    if (calc_ == Calculus::Alg && type_mentions_conj(t))
      throw TypeError(TypeError::Kind::Unsupported, "-", pos, "conjunction type in Alg");
  }

  Labels merge(Labels into, const Labels& from, const std::string& rule, SourcePos pos) const {
    for (const auto& [x, label] : from) {
      auto [it, inserted] = into.emplace(x, label);
      if (!inserted && !same(it->second, label))
        throw TypeError(TypeError::Kind::IncoherentLabels, rule, pos,
                        x + " is labelled both " + to_string(it->second) + " and " + to_string(label));
    }
    return into;
  }

  // Every factor of f's normal form must be an arrow out of the argument type.
  Type apply(const Type& f, const Type& arg, SourcePos pos) const {
    auto not_arrow = [&] {
      return TypeError(TypeError::Kind::NotAnArrow, "=>e", pos,
                       to_string(f) + " does not accept an argument of type " + to_string(arg));
    };
    if (calc_ == Calculus::Alg) {
      if (f->kind != TypeNode::Kind::Arrow || !alpha_equal(f->lhs, arg)) throw not_arrow();
      return f->rhs;
    }
    if (f->kind == TypeNode::Kind::Arrow && type_equiv(f->lhs, arg)) return f->rhs;
    const TypeNF nf = type_nf(f);
    std::vector<Type> results;
    for (const auto& factor : nf.factors) {
      if (factor->kind != TypeNode::Kind::Arrow || !type_equiv(factor->lhs, arg)) throw not_arrow();
      results.push_back(factor->rhs);
    }
    return conj_of(results);
  }

  Calculus calc_;
};

}  // namespace detail

/// Main type of a lambda-plus term; every type equivalent to it is also a
/// type of the term. Open terms are typed from their labels.
inline Type type_of(const Term& t) { return detail::Checker(Calculus::LambdaPlus).infer(t).type; }

/// System-F typing of Alg pseudo-terms: sums need equal types, no isomorphisms.
inline Type alg_type_of(const Term& t) { return detail::Checker(Calculus::Alg).infer(t).type; }

inline bool well_typed(const Term& t, Calculus calc = Calculus::LambdaPlus) {
  try {
    detail::Checker(calc).infer(t);
    return true;
  } catch (const TypeError&) {
    return false;
  }
}

/// Types of the free variables, Γ(t).
inline std::map<std::string, Type> free_labels(const Term& t, Calculus calc = Calculus::LambdaPlus) {
  return detail::Checker(calc).infer(t).free;
}

}  // namespace tracemeasure

#endif
