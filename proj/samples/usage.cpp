// Walkthrough of the library API. Exits non-zero if any printed value is off.

#include <tracemeasure/tracemeasure.hpp>

#include <iostream>

using namespace tracemeasure;

namespace {

int failures = 0;

void show(const std::string& label, const Rational& got, const Rational& want) {
  std::cout << label << " = " << to_string(got) << (got == want ? "" : "  (expected " + to_string(want) + ")") << "\n";
  if (got != want) ++failures;
}

}  // namespace

int main() {
  // Strategies of a small rewrite system.
  const WeightedArs ars = parse_ars("a -> b\na -> c\nc -> d\nc -> e\n");
  const ObjId a = ars.id("a");
  show("P(a reaches b)", reach_prob_exact(ars, a, ars.id("b")).value(), Rational(1, 2));
  show("P(a reaches d)", reach_prob_exact(ars, a, ars.id("d")).value(), Rational(1, 4));

  Box<ObjId> via_c;
  via_c.constraints[a] = ars.id("c");
  show("p({a->c})", box_prob(ars, via_c).value(), Rational(1, 2));

  // An infinite system, explored lazily.
  const LadderSystem ladder;
  const LadderObj start = *LadderSystem::parse("a0");
  show("P(stops at step 3)", stopping_prob(ladder, TraceEvent<LadderObj>::stops_at(start, 3)).value().value(),
       Rational(1, 8));

  // Probabilistic reduction of a projector.
  const Term pi = parse_term("pi[A](192.r:A + 32.t:A + 32.s:A)");
  std::cout << "type: " << to_string(type_of(pi)) << "\n";
  for (const auto& [nf, p] : normal_distribution(pi).entries)
    show("P(" + to_string(nf) + ")", p, nf->name == "r" ? Rational(3, 4) : Rational(1, 8));

  // Translation into the algebraic calculus and back.
  const Term alg = to_alg(pi);
  std::cout << "to_alg: " << to_string(alg, Calculus::Alg) << "\n";
  const Term back = to_lambda(alg);
  std::cout << "to_lambda: " << to_string(back) << "\n";
  if (!alpha_equal(back, pi)) ++failures;

  const ForwardReport fwd = check_simulation_forward(alg);
  std::cout << "forward simulation: " << (fwd.ok ? "holds" : "fails") << " on " << fwd.checks.size() << " reducts\n";
  if (!fwd.ok) ++failures;

  return failures == 0 ? 0 : 1;
}
