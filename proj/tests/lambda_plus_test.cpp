#include "corpus.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <functional>
#include <set>

using namespace tmtest;

namespace {

using TKind = TypeNode::Kind;

// Independent ≡ oracle: every type reachable by applying the three axioms,
// in either direction, at any position.
std::vector<Type> axiom_neighbours(const Type& t) {
  std::vector<Type> out;
  if (t->kind == TKind::Conj) {
    out.push_back(conj(t->rhs, t->lhs));
    if (t->lhs->kind == TKind::Conj) out.push_back(conj(t->lhs->lhs, conj(t->lhs->rhs, t->rhs)));
    if (t->rhs->kind == TKind::Conj) out.push_back(conj(conj(t->lhs, t->rhs->lhs), t->rhs->rhs));
    if (t->lhs->kind == TKind::Arrow && t->rhs->kind == TKind::Arrow && alpha_equal(t->lhs->lhs, t->rhs->lhs))
      out.push_back(arrow(t->lhs->lhs, conj(t->lhs->rhs, t->rhs->rhs)));
  }
  if (t->kind == TKind::Arrow && t->rhs->kind == TKind::Conj)
    out.push_back(conj(arrow(t->lhs, t->rhs->lhs), arrow(t->lhs, t->rhs->rhs)));
  switch (t->kind) {
    case TKind::Var: break;
    case TKind::Forall:
      for (const auto& b : axiom_neighbours(t->lhs)) out.push_back(forall(t->name, b));
      break;
    default:
      for (const auto& a : axiom_neighbours(t->lhs))
        out.push_back(t->kind == TKind::Arrow ? arrow(a, t->rhs) : conj(a, t->rhs));
      for (const auto& b : axiom_neighbours(t->rhs))
        out.push_back(t->kind == TKind::Arrow ? arrow(t->lhs, b) : conj(t->lhs, b));
  }
  return out;
}

std::set<std::string> axiom_closure(const Type& t, std::size_t cap = 20000) {
  std::set<std::string> seen{type_key(t)};
  std::deque<Type> queue{t};
  while (!queue.empty()) {
    const Type cur = queue.front();
    queue.pop_front();
    for (const auto& n : axiom_neighbours(cur))
      if (seen.insert(type_key(n)).second) {
        if (seen.size() > cap) throw std::runtime_error("closure cap");
        queue.push_back(n);
      }
  }
  return seen;
}

std::vector<Type> all_types(int depth) {
  std::vector<Type> out{tvar("X"), tvar("Y")};
  if (depth == 0) return out;
  const auto smaller = all_types(depth - 1);
  for (const auto& a : smaller)
    for (const auto& b : smaller) {
      out.push_back(arrow(a, b));
      out.push_back(conj(a, b));
    }
  return out;
}

Type random_type(std::mt19937_64& rng, int depth, int binders = 0) {
  const auto pick = rng() % 10;
  if (depth == 0 || pick < 3) {
    if (binders > 0 && rng() % 2) return tvar("V" + std::to_string(rng() % binders));
    return tvar(std::string(1, static_cast<char>('A' + rng() % 3)));
  }
  if (pick < 6) return arrow(random_type(rng, depth - 1, binders), random_type(rng, depth - 1, binders));
  if (pick < 9) return conj(random_type(rng, depth - 1, binders), random_type(rng, depth - 1, binders));
  return forall("V" + std::to_string(binders), random_type(rng, depth - 1, binders + 1));
}

std::set<std::string> keys(const std::vector<Term>& ts) {
  std::set<std::string> out;
  for (const auto& t : ts) out.insert(canonical_key(t));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// parsing

TEST(Parse, Abstraction) {
  const Term t = lp("\\x:X. x:X");
  ASSERT_EQ(t->kind, TK::Lam);
  EXPECT_EQ(t->name, "x");
  EXPECT_TRUE(alpha_equal(t->type, tvar("X")));
  EXPECT_EQ(t->a->kind, TK::Var);
  EXPECT_TRUE(alpha_equal(t->a->type, tvar("X")));
}

TEST(Parse, Projector) {
  const Term t = lp("pi[A](r:A + s:A)");
  ASSERT_EQ(t->kind, TK::Proj);
  EXPECT_TRUE(alpha_equal(t->type, tvar("A")));
  EXPECT_EQ(t->a->kind, TK::Sum);
}

TEST(Parse, TypeAbstractionAndApplication) {
  const Term t = lp("(/\\X. x:A) {B}");
  ASSERT_EQ(t->kind, TK::TApp);
  EXPECT_EQ(t->a->kind, TK::TLam);
  EXPECT_EQ(t->a->name, "X");
}

TEST(Parse, Precedence) {
  const Term t = lp("f:(A -> A -> A) x:A y:A + z:A");
  ASSERT_EQ(t->kind, TK::Sum);
  ASSERT_EQ(t->a->kind, TK::App);
  EXPECT_EQ(t->a->a->kind, TK::App);
  EXPECT_TRUE(alpha_equal(t->a->a->a->type, ty("A -> (A -> A)")));
  EXPECT_TRUE(alpha_equal(ty("forall X. X -> X /\\ A"), ty("forall X. (X -> (X /\\ A))")));
}

TEST(Parse, MultiplicityExpandsToSum) {
  EXPECT_TRUE(alpha_equal(lp("3.r:A"), lp("r:A + r:A + r:A")));
  EXPECT_TRUE(alpha_equal(lp("pi[A](2.r:A + s:A)"), lp("pi[A](r:A + r:A + s:A)")));
}

TEST(Parse, AlphaEquivalentBindersCompareEqual) {
  EXPECT_TRUE(alpha_equal(lp("\\x:A. x:A"), lp("\\y:A. y:A")));
  EXPECT_TRUE(alpha_equal(lp("/\\X. \\x:X. x:X"), lp("/\\Z. \\u:Z. u:Z")));
  EXPECT_FALSE(alpha_equal(lp("\\x:A. y:A"), lp("\\y:A. y:A")));
  EXPECT_TRUE(alpha_equal(ty("forall X. X -> A"), ty("forall Y. Y -> A")));
}

TEST(Parse, ErrorsCarryLineAndColumn) {
  try {
    parse_term("\\x:A.\n  x:A +");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 2);
    EXPECT_GT(e.pos().column, 0);
  }
  EXPECT_THROW(parse_term("pi[A](x:A"), ParseError);
  EXPECT_THROW(parse_type("A -> "), ParseError);
  EXPECT_THROW(parse_term("1/2.x:A"), ParseError);
}

TEST(Parse, PrintParseRoundTrip) {
  for (const auto& t : random_terms(3, 200, Calculus::LambdaPlus)) EXPECT_TRUE(alpha_equal(lp(to_string(t).c_str()), t));
}

// ---------------------------------------------------------------------------
// type equivalence

TEST(TypeEquiv, AxiomExamples) {
  EXPECT_TRUE(type_equiv(ty("A /\\ B"), ty("B /\\ A")));
  EXPECT_TRUE(type_equiv(ty("A -> (B /\\ C)"), ty("(A -> B) /\\ (A -> C)")));
  EXPECT_TRUE(type_equiv(ty("(A /\\ B) /\\ C"), ty("A /\\ (B /\\ C)")));
  EXPECT_FALSE(type_equiv(ty("A -> B"), ty("B -> A")));
  EXPECT_FALSE(type_equiv(ty("(A /\\ B) -> C"), ty("(A -> C) /\\ (B -> C)")));
  EXPECT_TRUE(type_equiv(ty("forall X. X -> (A /\\ X)"), ty("forall Y. (Y -> Y) /\\ (Y -> A)")));
}

TEST(TypeEquiv, AgreesWithAxiomClosureOnSmallTypes) {
  const auto types = all_types(2);
  ASSERT_EQ(types.size(), 202u);
  std::vector<std::set<std::string>> closures;
  for (const auto& t : types) closures.push_back(axiom_closure(t));
  std::size_t related = 0;
  for (std::size_t i = 0; i < types.size(); ++i)
    for (std::size_t j = 0; j < types.size(); ++j) {
      const bool oracle = closures[i].count(type_key(types[j])) != 0;
      related += oracle;
      ASSERT_EQ(type_equiv(types[i], types[j]), oracle) << to_string(types[i]) << " vs " << to_string(types[j]);
    }
  EXPECT_GT(related, types.size());
}

TEST(TypeEquiv, AgreesWithAxiomClosureOnDepthThreeSample) {
  std::mt19937_64 rng(5);
  std::vector<Type> sample;
  while (sample.size() < 120) {
    Type t = random_type(rng, 3);
    if (free_type_vars(t).size() <= 2) sample.push_back(t);
  }
  for (const auto& a : sample) {
    const auto closure = axiom_closure(a);
    for (const auto& b : sample) ASSERT_EQ(type_equiv(a, b), closure.count(type_key(b)) != 0);
  }
}

TEST(TypeEquiv, SoundUnderRandomAxiomApplication) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 400; ++i) {
    const Type start = random_type(rng, 4);
    Type cur = start;
    for (int k = 0; k < 12; ++k) {
      const auto next = axiom_neighbours(cur);
      if (next.empty()) break;
      cur = next[rng() % next.size()];
    }
    ASSERT_TRUE(type_equiv(start, cur)) << to_string(start) << " vs " << to_string(cur);
    ASSERT_EQ(type_nf(start), type_nf(cur));
  }
}

// ---------------------------------------------------------------------------
// typing

TEST(Typing, Examples) {
  EXPECT_TRUE(alpha_equal(type_of(lp("\\x:A. x:A")), ty("A -> A")));
  EXPECT_TRUE(alpha_equal(type_of(lp("x:A + y:B")), ty("A /\\ B")));
  EXPECT_TRUE(alpha_equal(type_of(lp("pi[A](x:A + y:B)")), ty("A")));
  EXPECT_TRUE(alpha_equal(type_of(lp("(/\\X. \\x:X. x:X) {B}")), ty("B -> B")));
}

TEST(Typing, EliminationsWorkModuloEquivalence) {
  EXPECT_TRUE(alpha_equal(type_of(lp("pi[A -> B](f:(A -> (B /\\ C)))")), ty("A -> B")));
  EXPECT_TRUE(alpha_equal(type_of(lp("pi[C](x:((A /\\ B) /\\ C))")), ty("C")));
  EXPECT_TRUE(type_equiv(type_of(lp("(f:(A -> B) + g:(A -> C)) a:A")), ty("B /\\ C")));
}

TEST(Typing, Errors) {
  auto kind_of = [](const char* text) {
    try {
      type_of(lp(text));
    } catch (const TypeError& e) {
      return e.kind();
    }
    ADD_FAILURE() << text << " type-checked";
    return TypeError::Kind::Unsupported;
  };
  EXPECT_EQ(kind_of("x:A + x:B"), TypeError::Kind::IncoherentLabels);
  EXPECT_EQ(kind_of("\\x:A. x:B"), TypeError::Kind::IncoherentLabels);
  EXPECT_EQ(kind_of("x:A y:A"), TypeError::Kind::NotAnArrow);
  EXPECT_EQ(kind_of("pi[B](x:A)"), TypeError::Kind::NotAConj);
  EXPECT_EQ(kind_of("x:A {B}"), TypeError::Kind::NotAForall);
  EXPECT_EQ(kind_of("/\\X. x:X"), TypeError::Kind::EscapingTypeVariable);
}

TEST(Typing, ErrorReportsRuleAndPosition) {
  try {
    type_of(lp("\\y:A.\n  /\\X. x:X"));
    FAIL();
  } catch (const TypeError& e) {
    EXPECT_EQ(e.rule(), "forall_i");
    EXPECT_EQ(e.pos().line, 2);
  }
}

TEST(Typing, CoherenceIsUpToEquivalence) {
  EXPECT_NO_THROW(type_of(lp("x:(A /\\ B) + x:(B /\\ A)")));
}

// ---------------------------------------------------------------------------
// symmetric relation and canonical form

TEST(Symmetric, AssociativityAndCommutativityShareCanonicalForm) {
  EXPECT_EQ(canonical_key(lp("(r:A + s:A) + t:A")), canonical_key(lp("r:A + (s:A + t:A)")));
  EXPECT_EQ(canonical_key(lp("r:A + s:B")), canonical_key(lp("s:B + r:A")));
  EXPECT_EQ(canonical_key(lp("(f:(A -> B) + g:(A -> B)) a:A")), canonical_key(lp("f:(A -> B) a:A + g:(A -> B) a:A")));
  EXPECT_EQ(canonical_key(lp("\\x:A. (x:A + y:A)")), canonical_key(lp("(\\x:A. x:A) + (\\z:A. y:A)")));
}

TEST(Symmetric, StepListsTableMoves) {
  auto has = [](const Term& t, SymRule rule, const Term& want) {
    for (const auto& [r, u] : sym_step(t))
      if (r == rule && alpha_equal(u, want)) return true;
    return false;
  };
  EXPECT_TRUE(has(lp("(r:(A -> B) + s:(A -> B)) t:A"), SymRule::AppDist, lp("r:(A -> B) t:A + s:(A -> B) t:A")));
  EXPECT_TRUE(has(lp("r:A + s:A"), SymRule::Comm, lp("s:A + r:A")));
  EXPECT_TRUE(has(lp("(r:A + s:A) + t:A"), SymRule::AssocRight, lp("r:A + (s:A + t:A)")));
  EXPECT_TRUE(has(lp("\\x:A. (x:A + y:A)"), SymRule::LamDist, lp("(\\x:A. x:A) + (\\x:A. y:A)")));
  EXPECT_TRUE(has(lp("pi[A -> B](f:(A -> (B /\\ C))) a:A"), SymRule::Pi, lp("pi[B](f:(A -> (B /\\ C)) a:A)")));
  EXPECT_TRUE(has(lp("pi[B](f:(A -> (B /\\ C)) a:A)"), SymRule::PiInverse, lp("pi[A -> B](f:(A -> (B /\\ C))) a:A")));
  EXPECT_TRUE(has(lp("pi[A -> B](f:(A -> B)) a:A"), SymRule::Pi, lp("pi[B](f:(A -> B) a:A)")));
  EXPECT_FALSE(has(lp("pi[A -> B](f:((A -> B) /\\ (C -> D))) a:A"), SymRule::Pi,
                   lp("pi[B](f:((A -> B) /\\ (C -> D)) a:A)")));
}

TEST(Symmetric, CanonicalFormIsIdempotent) {
  for (const auto& t : random_terms(9, 300, Calculus::LambdaPlus)) {
    const Term c = canonical_form(t);
    ASSERT_EQ(term_key(canonical_form(c)), term_key(c)) << to_string(t);
  }
}

TEST(Symmetric, StepsPreserveTypeAndCanonicalForm) {
  std::size_t steps = 0;
  for (const auto& t : random_terms(10, 150, Calculus::LambdaPlus, 3)) {
    const Type a = type_of(t);
    const std::string key = canonical_key(t);
    for (const auto& [rule, u] : sym_step(t)) {
      ++steps;
      ASSERT_TRUE(type_equiv(type_of(u), a)) << to_string(rule) << ": " << to_string(t) << " => " << to_string(u);
      if (rule != SymRule::Pi && rule != SymRule::PiInverse) ASSERT_EQ(canonical_key(u), key) << to_string(t);
    }
  }
  EXPECT_GT(steps, 300u);
}

// ---------------------------------------------------------------------------
// reduction

TEST(Reduce, Beta) {
  const StepResult r = reduce_step(lp("(\\x:A. x:A) y:A"));
  EXPECT_EQ(r.rule, Rule::Beta);
  ASSERT_EQ(r.reducts.size(), 1u);
  EXPECT_TRUE(alpha_equal(r.reducts[0], lp("y:A")));
  EXPECT_EQ(r.probs, std::vector<Rational>{Rational(1)});
}

TEST(Reduce, TypeBeta) {
  const StepResult r = reduce_step(lp("(/\\X. \\x:X. x:X) {B}"));
  EXPECT_EQ(r.rule, Rule::TypeBeta);
  EXPECT_TRUE(alpha_equal(r.reducts.at(0), lp("\\x:B. x:B")));
}

TEST(Reduce, SubstitutionAvoidsCapture) {
  const Term t = normal_distribution(lp("(\\x:A. \\y:A. x:A) y:A")).entries.at(0).first;
  ASSERT_EQ(t->kind, TK::Lam);
  EXPECT_EQ(t->a->name, "y");
  EXPECT_NE(t->name, "y");
  EXPECT_TRUE(alpha_equal(subst(lp("\\y:A. x:A"), "x", lp("y:A")), lp("\\z:A. y:A")));
}

TEST(Reduce, AlphaRenamedInputsGiveAlphaEqualResults) {
  const auto a = normal_distribution(lp("(\\f:A -> A. \\u:A. f:(A -> A) u:A) (\\v:A. v:A)"));
  const auto b = normal_distribution(lp("(\\g:A -> A. \\w:A. g:(A -> A) w:A) (\\q:A. q:A)"));
  ASSERT_EQ(a.entries.size(), 1u);
  EXPECT_TRUE(alpha_equal(a.entries[0].first, b.entries[0].first));
}

TEST(Reduce, ProjectorMultiplicityTwo) {
  const Distribution d = normal_distribution(lp("pi[A](r:A + r:A)"));
  ASSERT_EQ(d.entries.size(), 1u);
  EXPECT_EQ(d.entries[0].second, Rational(1));
  const StepResult nd = reduce_step(lp("pi[A](r:A + r:A)"), Mode::NonDet);
  EXPECT_EQ(keys(nd.reducts), keys({lp("r:A")}));
}

TEST(Reduce, ProjectorWeightsFromMultiplicities) {
  const Distribution d = normal_distribution(lp("pi[A](192.r:A + 32.t:A + 32.s:A)"));
  EXPECT_EQ(d.entries.size(), 3u);
  EXPECT_EQ(d.prob_of(lp("r:A")), Rational(3, 4));
  EXPECT_EQ(d.prob_of(lp("t:A")), Rational(1, 8));
  EXPECT_EQ(d.prob_of(lp("s:A")), Rational(1, 8));
  EXPECT_EQ(d.residual, 0);
}

TEST(Reduce, ProjectorMatchesInducedRewriteSystem) {
  // Oracle: the one-step system pi -> r_i with multiplicity m_i, measured on
  // strategies by the event engine.
  std::mt19937_64 rng(23);
  const char* names[] = {"r", "s", "t", "u"};
  for (int round = 0; round < 40; ++round) {
    const std::size_t n = 1 + rng() % 4;
    std::string body, ars;
    std::vector<std::uint64_t> mult;
    for (std::size_t i = 0; i < n; ++i) {
      mult.push_back(1 + rng() % 5);
      body += (i ? " + " : "") + std::to_string(mult[i]) + "." + names[i] + ":A";
      ars += std::string("p -> ") + names[i] + " : " + std::to_string(mult[i]) + "\n";
    }
    const Distribution d = normal_distribution(lp(("pi[A](" + body + ")").c_str()));
    const WeightedArs sys = parse_ars(ars);
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_EQ(d.prob_of(lp((std::string(names[i]) + ":A").c_str())),
                reach_prob_exact(sys, sys.id("p"), sys.id(names[i])).value());
    EXPECT_EQ(d.total(), 1);
  }
}

TEST(Reduce, TwoDistinctSummandsSplitEvenly) {
  const Distribution d = normal_distribution(lp("pi[A](r:A + t:A)"));
  const WeightedArs box = parse_ars("p -> r\np -> t\n");
  EXPECT_EQ(d.prob_of(lp("r:A")), reach_prob_exact(box, box.id("p"), box.id("r")).value());
  EXPECT_EQ(d.prob_of(lp("t:A")), Rational(1, 2));
}

TEST(Reduce, RestOfOtherTypeIsDropped) {
  const Distribution d = normal_distribution(lp("pi[A](x:A + y:B)"));
  ASSERT_EQ(d.entries.size(), 1u);
  EXPECT_EQ(d.prob_of(lp("x:A")), 1);
  EXPECT_EQ(normal_distribution(lp("pi[A](2.x:A + y:A + z:(B -> B))")).prob_of(lp("x:A")), Rational(2, 3));
}

TEST(Reduce, PathDependenceAcrossStrategies) {
  const Term t = lp("(/\\X. pi[A](x:A + y:X)) {A}");
  const Distribution beta = normal_distribution(t, RedexStrategy::BetaFirst);
  EXPECT_EQ(beta.prob_of(lp("x:A")), Rational(1, 2));
  EXPECT_EQ(beta.prob_of(lp("y:A")), Rational(1, 2));
  const Distribution proj = normal_distribution(t, RedexStrategy::ProjFirst);
  EXPECT_EQ(proj.prob_of(lp("x:A")), 1);
  EXPECT_EQ(proj.entries.size(), 1u);
}

TEST(Reduce, NormalTermIsNotARedex) {
  EXPECT_TRUE(is_normal(lp("\\x:A. x:A")));
  EXPECT_THROW(reduce_step(lp("\\x:A. x:A")), NotARedex);
  EXPECT_THROW(project(lp("pi[A /\\ B](x:A + y:B)")), NotARedex);
  EXPECT_TRUE(is_normal(lp("pi[A /\\ B](x:A + y:B)")));
}

TEST(Reduce, ProjectorWaitsForNormalSummands) {
  const Term t = lp("pi[A]((\\x:A. x:A) y:A + z:A)");
  EXPECT_THROW(project(t), ProjectorNotReady);
  const StepResult r = reduce_step(t);
  EXPECT_EQ(r.rule, Rule::Beta);
  EXPECT_EQ(normal_distribution(t).prob_of(lp("y:A")), Rational(1, 2));
}

TEST(Reduce, NonDetProjectorListsEveryLegalReduct) {
  const StepResult r = reduce_step(lp("pi[A](x:A + y:A + z:B)"), Mode::NonDet);
  EXPECT_EQ(keys(r.reducts), keys({lp("x:A"), lp("y:A")}));
  for (const auto& u : r.reducts) EXPECT_TRUE(type_equiv(type_of(u), ty("A")));
}

TEST(Reduce, SubjectReductionOnCorpus) {
  std::size_t steps = 0;
  for (const auto& t : random_terms(31, 200, Calculus::LambdaPlus)) {
    const Type a = type_of(t);
    for (Mode mode : {Mode::NonDet, Mode::Prob})
      for (const auto& step : all_reduce_steps(t, mode))
        for (const auto& u : step.reducts) {
          ++steps;
          ASSERT_TRUE(type_equiv(type_of(u), a)) << to_string(t) << " => " << to_string(u);
        }
  }
  EXPECT_GT(steps, 200u);
}

TEST(Reduce, DistributionsSumToOne) {
  for (const auto& t : random_terms(37, 150, Calculus::LambdaPlus, 3)) {
    const Distribution d = normal_distribution(t, RedexStrategy::LeftmostOutermost, 4096);
    EXPECT_EQ(d.total(), 1);
    for (const auto& [nf, p] : d.entries) {
      EXPECT_GT(p, 0);
      EXPECT_TRUE(is_normal(nf));
    }
  }
}

TEST(Reduce, StepCapLeavesResidualMass) {
  const Distribution d = normal_distribution(lp("pi[A]((\\x:A. x:A) y:A + z:A)"), RedexStrategy::LeftmostOutermost, 1);
  EXPECT_EQ(d.residual, 1);
  EXPECT_EQ(d.total(), 1);
}

TEST(Reduce, StrategyNames) {
  EXPECT_EQ(parse_strategy("beta-first"), RedexStrategy::BetaFirst);
  EXPECT_EQ(parse_strategy("lo"), RedexStrategy::LeftmostOutermost);
  EXPECT_EQ(parse_strategy("proj-first"), RedexStrategy::ProjFirst);
  EXPECT_THROW(parse_strategy("random"), InputError);
}

// ---------------------------------------------------------------------------
// sampling

TEST(Sample, FixedSeedIsDeterministic) {
  const Term t = lp("pi[A](192.r:A + 32.t:A + 32.s:A)");
  std::mt19937_64 a(99), b(99);
  NormalFormSampler sampler(t);
  for (int i = 0; i < 200; ++i) ASSERT_TRUE(alpha_equal(sample_normal_form(t, a), sampler.draw(b)));
}

TEST(Sample, FrequenciesWithinFourSigma) {
  const Term t = lp("pi[A](192.r:A + 32.t:A + 32.s:A)");
  const Distribution exact = normal_distribution(t);
  std::mt19937_64 rng(2024);
  NormalFormSampler sampler(t);
  const int n = 10000;
  std::map<std::string, int> hits;
  for (int i = 0; i < n; ++i) ++hits[canonical_key(sampler.draw(rng))];
  for (const auto& [nf, p] : exact.entries) {
    const double q = p.convert_to<double>();
    const double sigma = std::sqrt(n * q * (1 - q));
    EXPECT_LE(std::abs(hits[canonical_key(nf)] - n * q), 4 * sigma) << to_string(nf);
  }
}
