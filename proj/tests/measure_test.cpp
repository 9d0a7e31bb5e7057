#include "support.hpp"

#include <tracemeasure/ars.hpp>
#include <tracemeasure/measure.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace tracemeasure;
using tmtest::intro_system;

namespace {

using Set = EventSet<ObjId>;

Box<ObjId> box(const WeightedArs& ars, std::initializer_list<std::pair<const char*, const char*>> cs) {
  Box<ObjId> b;
  for (auto [a, t] : cs) b.constraints[ars.id(a)] = ars.id(t);
  return b;
}

Set subset(const std::vector<Strategy<ObjId>>& all, std::uint64_t mask) {
  std::vector<Strategy<ObjId>> chosen;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (mask >> i & 1) chosen.push_back(all[i]);
  return Set::of_strategies(std::move(chosen));
}

}  // namespace

TEST(Parse, RulesCommentsAndDeclarations) {
  auto ars = parse_ars("# two ways\na -> b : 2\na -> c\n\nz\n");
  EXPECT_EQ(ars.size(), 4u);
  EXPECT_EQ(ars.multiplicity(ars.id("a"), ars.id("b")), 2u);
  EXPECT_EQ(ars.multiplicity(ars.id("a"), ars.id("c")), 1u);
  EXPECT_EQ(ars.multiplicity(ars.id("b"), ars.id("a")), 0u);
  EXPECT_TRUE(ars.successors(ars.id("z")).empty());
}

TEST(Parse, RepeatedRulesAccumulate) {
  auto ars = parse_ars("a -> b\na -> b : 2\n");
  EXPECT_EQ(ars.multiplicity(ars.id("a"), ars.id("b")), 3u);
}

TEST(Parse, ErrorsCarryLineNumbers) {
  try {
    parse_ars("a -> b\na -> \n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 2);
  }
  EXPECT_THROW(parse_ars("a -> b : x"), ParseError);
  EXPECT_THROW(parse_ars("a b"), ParseError);
}

TEST(Parse, FormatRoundTrips) {
  auto ars = parse_ars("a -> b : 2\na -> c\nc -> d\n");
  auto again = parse_ars(format_ars(ars));
  EXPECT_EQ(format_ars(again), format_ars(ars));
}

TEST(Degree, Examples) {
  auto intro = intro_system();
  EXPECT_EQ(degree(intro, intro.id("a")), 2u);
  EXPECT_EQ(degree(intro, intro.id("b")), 0u);
  auto two = parse_ars("a -> b : 2\na -> c : 1\n");
  EXPECT_EQ(degree(two, two.id("a")), 3u);
  EXPECT_THROW(intro.id("zz"), InputError);
  EXPECT_THROW(degree(intro, ObjId{99}), InputError);
}

TEST(NonNormal, Examples) {
  auto intro = intro_system();
  EXPECT_EQ(non_normal_objects(intro), (std::vector<ObjId>{intro.id("a"), intro.id("c")}));
  EXPECT_TRUE(non_normal_objects(WeightedArs{}).empty());
  auto one = parse_ars("a -> b");
  EXPECT_EQ(non_normal_objects(one), (std::vector<ObjId>{one.id("a")}));
}

TEST(Enumerate, Counts) {
  EXPECT_EQ(enumerate_strategies(intro_system()).size(), 4u);
  auto none = enumerate_strategies(parse_ars("a\nb\n"));
  ASSERT_EQ(none.size(), 1u);
  EXPECT_TRUE(none[0].choices.empty());
  EXPECT_EQ(enumerate_strategies(parse_ars("a -> b : 2\na -> c : 1\n")).size(), 2u);
}

TEST(Enumerate, CapExceeded) {
  WeightedArs ars;
  for (int i = 0; i < 21; ++i) {
    ars.add_rule("s" + std::to_string(i), "x");
    ars.add_rule("s" + std::to_string(i), "y");
  }
  EXPECT_THROW(enumerate_strategies(ars), InfeasibleError);
  try {
    enumerate_strategies(ars);
  } catch (const InfeasibleError& e) {
    EXPECT_STREQ(e.what(), "strategy space too large");
  }
}

TEST(Enumerate, StrategiesAreTotalAndDistinct) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 40; ++t) {
    auto ars = tmtest::random_system(rng, 64);
    auto all = enumerate_strategies(ars);
    EXPECT_EQ(all.size(), tmtest::strategy_count(ars));
    for (const auto& f : all) {
      ASSERT_EQ(f.choices.size(), non_normal_objects(ars).size());
      for (const auto& [a, b] : f.choices) EXPECT_GE(ars.multiplicity(a, b), 1u);
    }
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_FALSE(all[i] == all[j]);
  }
}

TEST(BoxProb, Examples) {
  auto two = parse_ars("a -> b : 2\na -> c : 1\n");
  EXPECT_EQ(box_prob(two, box(two, {{"a", "b"}})), Prob(2, 3));
  EXPECT_EQ(box_prob(two, Box<ObjId>{}), Prob::one());
  auto intro = intro_system();
  EXPECT_EQ(box_prob(intro, box(intro, {{"a", "b"}, {"c", "d"}})), Prob(1, 4));
}

TEST(BoxProb, Errors) {
  auto intro = intro_system();
  try {
    box_prob(intro, box(intro, {{"b", "a"}}));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("constrained object is normal"), std::string::npos);
  }
  EXPECT_THROW(box_prob(intro, box(intro, {{"a", "d"}})), InputError);
}

TEST(OuterMeasure, Examples) {
  auto intro = intro_system();
  const auto a = intro.id("a"), b = intro.id("b"), c = intro.id("c"), d = intro.id("d"), e = intro.id("e");
  Strategy<ObjId> f1{{{a, b}, {c, d}}};
  Strategy<ObjId> f3{{{a, c}, {c, e}}};
  EXPECT_EQ(outer_measure(intro, Set::of_strategies({f1, f3})), Prob(1, 2));
  EXPECT_EQ(outer_measure(intro, Set::omega()), Prob::one());
  EXPECT_EQ(outer_measure(intro, Set::empty()), Prob::zero());
  EXPECT_EQ(outer_measure(intro, Set::of_strategies({})), Prob::zero());
}

TEST(OuterMeasure, CapGivesExactMeasureUnavailable) {
  WeightedArs ars;
  for (int i = 0; i < 21; ++i) {
    ars.add_rule("s" + std::to_string(i), "x");
    ars.add_rule("s" + std::to_string(i), "y");
  }
  try {
    outer_measure(ars, Set::of_strategies({}));
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("exact measure unavailable"), std::string::npos);
  }
}

TEST(OuterMeasure, RejectsNonStrategy) {
  auto intro = intro_system();
  Strategy<ObjId> partial{{{intro.id("a"), intro.id("b")}}};
  EXPECT_THROW(outer_measure(intro, Set::of_strategies({partial})), InputError);
}

// The strategy-sum equals the infimum over box covers on every subset.
TEST(OuterMeasure, EqualsMinimumBoxCover) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int t = 0; t < 30; ++t) {
    auto ars = tmtest::random_system(rng, 12);
    tmtest::CoverOracle oracle(ars);
    const auto n = oracle.size();
    const std::uint32_t full = n == 32 ? ~0u : (1u << n) - 1;
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      if (n > 6 && rng() % 8 != 0) continue;
      EXPECT_EQ(outer_measure(ars, subset(oracle.strategies(), mask)).value(), oracle.min_cover(mask));
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(BoxDecomposition, BoxProbIsSumOfMemberStrategies) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 60; ++t) {
    auto ars = tmtest::random_system(rng, 64);
    auto all = enumerate_strategies(ars);
    for (const auto& b : tmtest::all_boxes(ars)) {
      Rational sum{0};
      for (const auto& f : all)
        if (tmtest::strategy_in_box(f, b)) sum += tmtest::naive_box_prob(ars, f.as_box());
      EXPECT_EQ(box_prob(ars, b).value(), sum);
    }
  }
}

TEST(BoxDecomposition, PEqualsPOnEveryBox) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 60; ++t) {
    auto ars = tmtest::random_system(rng, 64);
    for (const auto& b : tmtest::all_boxes(ars)) {
      EXPECT_EQ(outer_measure(ars, Set::of_box(b)), box_prob(ars, b));
      EXPECT_EQ(box_prob(ars, b).value(), tmtest::naive_box_prob(ars, b));
    }
  }
}

TEST(Measurable, Examples) {
  auto intro = intro_system();
  EXPECT_TRUE(is_measurable(intro, Set::empty()));
  for (const auto& b : tmtest::all_boxes(intro)) {
    EXPECT_TRUE(is_measurable(intro, Set::of_box(b)));
    EXPECT_TRUE(is_measurable(intro, Set::complement(Set::of_box(b))));
  }
}

TEST(Measurable, CapExceeded) {
  WeightedArs ars;
  for (int i = 0; i < 5; ++i) {
    ars.add_rule("s" + std::to_string(i), "x");
    ars.add_rule("s" + std::to_string(i), "y");
  }
  try {
    is_measurable(ars, Set::empty());
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_STREQ(e.what(), "measurability check infeasible");
  }
}

// On enumerable systems: monotonicity, disjoint additivity,
// closure under complement and union.
TEST(OuterMeasure, PropertiesOnRandomSystems) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    auto ars = tmtest::random_system(rng, 16);
    auto all = enumerate_strategies(ars);
    const std::uint64_t full = (std::uint64_t{1} << all.size()) - 1;
    for (int k = 0; k < 10; ++k) {
      const std::uint64_t a = rng() & full, s = rng() & full;
      const std::uint64_t sup = a | (rng() & full);
      EXPECT_LE(outer_measure(ars, subset(all, a)), outer_measure(ars, subset(all, sup)));
      ASSERT_TRUE(is_measurable(ars, subset(all, a)));
      const std::uint64_t disjoint = s & ~a;
      EXPECT_EQ(outer_measure(ars, subset(all, a | disjoint)).value(),
                outer_measure(ars, subset(all, a)).value() + outer_measure(ars, subset(all, disjoint)).value());
      EXPECT_TRUE(is_measurable(ars, Set::complement(subset(all, a))));
      EXPECT_TRUE(is_measurable(ars, Set::unite(subset(all, a), subset(all, s))));
      EXPECT_LE(outer_measure(ars, Set::unite(subset(all, a), subset(all, s))).value(),
                outer_measure(ars, subset(all, a)).value() + outer_measure(ars, subset(all, s)).value());
    }
  }
}

TEST(EventSets, BooleanAlgebraMatchesBitmasks) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    auto ars = tmtest::random_system(rng, 32);
    auto all = enumerate_strategies(ars);
    const std::uint64_t full = all.size() == 64 ? ~0ull : (std::uint64_t{1} << all.size()) - 1;
    const std::uint64_t a = rng() & full, b = rng() & full;
    auto P = [&](std::uint64_t m) { return outer_measure(ars, subset(all, m)); };
    EXPECT_EQ(outer_measure(ars, Set::intersect(subset(all, a), subset(all, b))), P(a & b));
    EXPECT_EQ(outer_measure(ars, Set::unite(subset(all, a), subset(all, b))), P(a | b));
    EXPECT_EQ(outer_measure(ars, Set::difference(subset(all, a), subset(all, b))), P(a & ~b));
    EXPECT_EQ(outer_measure(ars, Set::complement(subset(all, a))), P(full & ~a));
  }
}

TEST(Rational, ParseAndPrint) {
  EXPECT_EQ(parse_rational("3/4"), Rational(3, 4));
  EXPECT_EQ(parse_rational("-6/8"), Rational(-3, 4));
  EXPECT_EQ(to_string(Rational(6, 8)), "3/4");
  EXPECT_EQ(to_string(Rational(2)), "2");
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational("x"), std::invalid_argument);
  EXPECT_EQ(Prob(1, 4).decimal(), "0.25");
  EXPECT_EQ(Prob(1, 3).decimal(), "0.3333333333");
  EXPECT_THROW(Prob(3, 2), std::domain_error);
}
