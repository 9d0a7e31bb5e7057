// tracemeasure command-line interface.

#include "tracemeasure/tracemeasure.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace tracemeasure;
using json = nlohmann::json;

namespace {

// Accepts p/q as well as decimal and scientific notation.
Rational parse_tolerance(const std::string& text) {
  if (text.find_first_of(".eE") == std::string::npos) return parse_rational(text);
  std::size_t used = 0;
  const double d = std::stod(text, &used);
  if (used != text.size() || !(d > 0)) throw std::invalid_argument("malformed tolerance: " + text);
  return Rational(d);
}

constexpr std::uint64_t default_seed = 20130731;

struct Output {
  bool as_json = false;

  void line(const std::string& text, json obj) const {
    if (as_json)
      std::cout << obj.dump() << "\n";
    else
      std::cout << text << "\n";
  }
};

std::string prob_text(const Rational& q) { return to_string(q) + " (~" + to_decimal(q, 10) + ")"; }

json prob_json(const Rational& q) { return {{"p", to_string(q)}, {"decimal", to_decimal(q, 10)}}; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Calculus calculus_of(const std::string& path) { return has_suffix(path, ".alg") ? Calculus::Alg : Calculus::LambdaPlus; }

std::uint64_t env_seed(std::uint64_t fallback) {
  if (const char* s = std::getenv("TRACEMEASURE_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw InputError(std::string("TRACEMEASURE_SEED is not an integer: ") + s);
    }
  }
  return fallback;
}

// ---------------------------------------------------------------------------
// ars

struct ArsInput {
  std::string file;
  std::uint32_t ladder = 0;
  bool use_ladder = false;

  WeightedArs load() const {
    if (use_ladder) return ladder_prefix(ladder);
    if (file.empty()) throw InputError("an .ars file or --ladder N is required");
    std::ifstream in(file);
    if (!in) throw InputError("cannot open " + file);
    return parse_ars(in);
  }
};

Box<ObjId> parse_box(const WeightedArs& ars, const std::string& text) {
  Box<ObjId> box;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto arrow_at = item.find("->");
    if (arrow_at == std::string::npos) throw InputError("box constraint must look like a->b: " + item);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const ObjId a = ars.id(trim(item.substr(0, arrow_at)));
    const ObjId b = ars.id(trim(item.substr(arrow_at + 2)));
    if (!box.constraints.emplace(a, b).second) throw InputError("object constrained twice: " + ars.name(a));
  }
  return box;
}

TraceEvent<ObjId> parse_event(const WeightedArs& ars, const std::vector<std::string>& words) {
  auto need = [&](std::size_t n) {
    if (words.size() != n) throw InputError("event '" + words.front() + "' takes " + std::to_string(n - 1) + " arguments");
  };
  auto steps = [](const std::string& s) -> std::uint64_t {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw InputError("step count is not an integer: " + s);
    }
  };
  if (words.empty()) throw InputError("missing event");
  const std::string& kind = words.front();
  if (kind == "reach") {
    need(3);
    return TraceEvent<ObjId>::reach(ars.id(words[1]), ars.id(words[2]));
  }
  if (kind == "stops-at") {
    need(3);
    return TraceEvent<ObjId>::stops_at(ars.id(words[1]), steps(words[2]));
  }
  if (kind == "stops-within") {
    need(3);
    return TraceEvent<ObjId>::stops_within(ars.id(words[1]), steps(words[2]));
  }
  if (kind == "never-stops") {
    need(2);
    return TraceEvent<ObjId>::never_stops(ars.id(words[1]));
  }
  throw InputError("unknown event: " + kind + " (reach, stops-at, stops-within, never-stops)");
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
  return s;
}

void add_ars_source(CLI::App* cmd, ArsInput& in, bool positional_file = true) {
  if (positional_file) cmd->add_option("file", in.file, "rewrite system (.ars)");
  cmd->add_option_function<std::uint32_t>(
      "--ladder",
      [&in](std::uint32_t n) {
        in.ladder = n;
        in.use_ladder = true;
      },
      "use the ladder prefix with rungs 0..N instead of a file");
}

void setup_ars(CLI::App& app, const Output& out) {
  auto* ars = app.add_subcommand("ars", "measures on weighted abstract rewrite systems");
  ars->require_subcommand(1);

  {
    auto* cmd = ars->add_subcommand("prob-box", "probability p(B) of a box");
    auto file = std::make_shared<std::string>();
    auto box = std::make_shared<std::string>();
    cmd->add_option("file", *file, "rewrite system (.ars)")->required();
    cmd->add_option("box", *box, "constraints, e.g. \"a->b, c->d\"")->required();
    cmd->callback([=, &out] {
      const WeightedArs sys = ArsInput{*file}.load();
      const Rational p = box_prob(sys, parse_box(sys, *box)).value();
      json j = prob_json(p);
      j["box"] = *box;
      out.line(prob_text(p), j);
    });
  }
  {
    auto* cmd = ars->add_subcommand("prob-set", "outer measure of a union of boxes");
    auto file = std::make_shared<std::string>();
    auto boxes = std::make_shared<std::vector<std::string>>();
    cmd->add_option("file", *file, "rewrite system (.ars)")->required();
    cmd->add_option("boxes", *boxes, "one or more boxes")->required();
    cmd->callback([=, &out] {
      const WeightedArs sys = ArsInput{*file}.load();
      std::vector<Box<ObjId>> bs;
      for (const auto& b : *boxes) bs.push_back(parse_box(sys, b));
      const Rational p = outer_measure(sys, EventSet<ObjId>::of_boxes(bs)).value();
      json j = prob_json(p);
      j["boxes"] = *boxes;
      out.line(prob_text(p), j);
    });
  }
  {
    auto* cmd = ars->add_subcommand("measurable", "Lebesgue measurability of a union of boxes");
    auto file = std::make_shared<std::string>();
    auto boxes = std::make_shared<std::vector<std::string>>();
    cmd->add_option("file", *file, "rewrite system (.ars)")->required();
    cmd->add_option("boxes", *boxes, "one or more boxes")->required();
    cmd->callback([=, &out] {
      const WeightedArs sys = ArsInput{*file}.load();
      std::vector<Box<ObjId>> bs;
      for (const auto& b : *boxes) bs.push_back(parse_box(sys, b));
      const bool m = is_measurable(sys, EventSet<ObjId>::of_boxes(bs));
      out.line(m ? "measurable" : "not measurable", {{"measurable", m}});
    });
  }
  {
    auto* cmd = ars->add_subcommand("prob-event", "probability of a trace event");
    auto in = std::make_shared<ArsInput>();
    auto words = std::make_shared<std::vector<std::string>>();
    auto tol = std::make_shared<std::string>();
    auto step_cap = std::make_shared<std::uint64_t>(64);
    cmd->add_option("file", in->file, "rewrite system (.ars)");
    add_ars_source(cmd, *in, false);
    cmd->add_option("event", *words, "reach A B | stops-at A N | stops-within A N | never-stops A")->required();
    cmd->add_option("--fixpoint", *tol, "least-fixpoint iteration to this tolerance (cyclic systems)");
    cmd->add_option("--step-cap", *step_cap, "trajectory depth for never-stops");
    cmd->callback([=, &out] {
      // A lone event word lands in `file` when --ladder supplies the system.
      if (in->use_ladder && !in->file.empty()) {
        words->insert(words->begin(), in->file);
        in->file.clear();
      }
      const WeightedArs sys = in->load();
      const auto ev = parse_event(sys, *words);
      json j;
      j["event"] = join(*words);
      if (ev.kind == TraceEvent<ObjId>::Kind::Reach) {
        if (!tol->empty()) {
          const auto r = reach_prob_cyclic(sys, ev.from, ev.to, parse_tolerance(*tol));
          j.update(prob_json(r.value.value()));
          j["iterations"] = r.iterations;
          j["converged"] = r.converged;
          j["last_delta"] = to_string(r.last_delta);
          out.line(prob_text(r.value.value()) + " after " + std::to_string(r.iterations) + " iterations" +
                       (r.converged ? "" : " (not converged)"),
                   j);
          return;
        }
        Rational p;
        try {
          p = reach_prob_exact(sys, ev.from, ev.to).value();
        } catch (const InputError& e) {
          if (std::string(e.what()).rfind("cyclic", 0) == 0)
            throw InfeasibleError("exact reachability needs an acyclic system; try --fixpoint TOL or `ars sample`");
          throw;
        }
        j.update(prob_json(p));
        out.line(prob_text(p), j);
        return;
      }
      ExploreCaps caps;
      caps.step_cap = *step_cap;
      const StoppingResult r = stopping_prob(sys, ev, caps);
      if (r.exact()) {
        j.update(prob_json(r.lower));
        out.line(prob_text(r.lower), j);
      } else {
        j["lower"] = to_string(r.lower);
        j["upper"] = to_string(r.upper);
        out.line("[" + to_string(r.lower) + ", " + to_string(r.upper) + "] (bounds at step cap " +
                     std::to_string(*step_cap) + ")",
                 j);
      }
    });
  }
  {
    auto* cmd = ars->add_subcommand("sample", "Monte Carlo estimate of a trace event");
    auto in = std::make_shared<ArsInput>();
    auto words = std::make_shared<std::vector<std::string>>();
    auto samples = std::make_shared<std::uint64_t>(10000);
    auto step_cap = std::make_shared<std::uint64_t>(64);
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("file", in->file, "rewrite system (.ars)");
    add_ars_source(cmd, *in, false);
    cmd->add_option("event", *words, "reach A B | stops-at A N | stops-within A N | never-stops A")->required();
    cmd->add_option("--samples", *samples, "number of sampled strategies")->check(CLI::PositiveNumber);
    cmd->add_option("--step-cap", *step_cap, "maximum trajectory length");
    auto* seed_opt = cmd->add_option("--seed", *seed, "random seed");
    cmd->callback([=, &out] {
      if (in->use_ladder && !in->file.empty()) {
        words->insert(words->begin(), in->file);
        in->file.clear();
      }
      const WeightedArs sys = in->load();
      const auto ev = parse_event(sys, *words);
      const std::uint64_t s = seed_opt->count() ? *seed : env_seed(default_seed);
      const SampleReport r = sample_event(sys, ev, *samples, *step_cap, s);
      json j = prob_json(r.estimate.value());
      j["event"] = join(*words);
      j["samples"] = r.samples;
      j["hits"] = r.hits;
      j["seed"] = r.seed;
      out.line(prob_text(r.estimate.value()) + " from " + std::to_string(r.hits) + "/" + std::to_string(r.samples) +
                   " samples, seed " + std::to_string(r.seed),
               j);
    });
  }
  {
    auto* cmd = ars->add_subcommand("ladder", "print the ladder prefix as an .ars file");
    auto n = std::make_shared<std::uint32_t>(3);
    cmd->add_option("--n", *n, "last rung")->required();
    cmd->callback([=] { std::cout << format_ars(ladder_prefix(*n)); });
  }
}

// ---------------------------------------------------------------------------
// lambda

struct TermInput {
  std::string file;
  bool allow_ill_typed = false;

  Term load(Calculus calc = Calculus::LambdaPlus) const {
    const Term t = parse_term(read_file(file), calc);
    if (calc == Calculus::LambdaPlus) {
      if (!allow_ill_typed) type_of(t);
    } else {
      alg_type_of(t);
    }
    return t;
  }
};

void add_term_input(CLI::App* cmd, TermInput& in) {
  cmd->add_option("file", in.file, "term file (.lp)")->required();
  cmd->add_flag("--allow-ill-typed", in.allow_ill_typed, "reduce even if type checking fails");
}

void print_distribution(const Output& out, const Distribution& d) {
  for (const auto& [t, p] : d.entries) {
    json j = prob_json(p);
    j["term"] = to_string(t);
    out.line(to_string(t) + " : " + to_string(p), j);
  }
  if (d.residual != 0) {
    json j = prob_json(d.residual);
    j["residual"] = true;
    out.line("(unresolved at step cap) : " + to_string(d.residual), j);
  }
}

void setup_lambda(CLI::App& app, const Output& out) {
  auto* lam = app.add_subcommand("lambda", "the non-deterministic and probabilistic calculi");
  lam->require_subcommand(1);

  {
    auto* cmd = lam->add_subcommand("typecheck", "print the main type");
    auto file = std::make_shared<std::string>();
    cmd->add_option("file", *file, "term file (.lp or .alg)")->required();
    cmd->callback([=, &out] {
      const Calculus calc = calculus_of(*file);
      const Term t = parse_term(read_file(*file), calc);
      const Type a = calc == Calculus::Alg ? alg_type_of(t) : type_of(t);
      out.line(to_string(a), {{"type", to_string(a)}});
    });
  }
  {
    auto* cmd = lam->add_subcommand("reduce", "one reduction step");
    auto in = std::make_shared<TermInput>();
    auto strategy = std::make_shared<std::string>("leftmost-outermost");
    auto mode = std::make_shared<std::string>("prob");
    add_term_input(cmd, *in);
    cmd->add_option("--strategy", *strategy, "leftmost-outermost | beta-first | proj-first");
    cmd->add_option("--mode", *mode, "prob | nondet")->check(CLI::IsMember({"prob", "nondet"}));
    cmd->callback([=, &out] {
      const Term t = in->load();
      const Mode m = *mode == "prob" ? Mode::Prob : Mode::NonDet;
      const StepResult r = reduce_step(t, m, parse_strategy(*strategy));
      for (std::size_t i = 0; i < r.reducts.size(); ++i) {
        json j{{"rule", to_string(r.rule)}, {"term", to_string(r.reducts[i])}};
        std::string text = to_string(r.rule) + ": " + to_string(r.reducts[i]);
        if (m == Mode::Prob) {
          j.update(prob_json(r.probs[i]));
          text += " : " + to_string(r.probs[i]);
        }
        out.line(text, j);
      }
    });
  }
  {
    auto* cmd = lam->add_subcommand("dist", "exact distribution over normal forms");
    auto in = std::make_shared<TermInput>();
    auto strategy = std::make_shared<std::string>("leftmost-outermost");
    auto step_cap = std::make_shared<std::uint64_t>(256);
    add_term_input(cmd, *in);
    cmd->add_option("--strategy", *strategy, "leftmost-outermost | beta-first | proj-first");
    cmd->add_option("--step-cap", *step_cap, "maximum reduction length");
    cmd->callback([=, &out] {
      print_distribution(out, normal_distribution(in->load(), parse_strategy(*strategy), *step_cap));
    });
  }
  {
    auto* cmd = lam->add_subcommand("sample", "sampled normal forms");
    auto in = std::make_shared<TermInput>();
    auto strategy = std::make_shared<std::string>("leftmost-outermost");
    auto count = std::make_shared<std::uint64_t>(1);
    auto seed = std::make_shared<std::uint64_t>(0);
    add_term_input(cmd, *in);
    cmd->add_option("--strategy", *strategy, "leftmost-outermost | beta-first | proj-first");
    cmd->add_option("--count", *count, "number of runs")->check(CLI::PositiveNumber);
    auto* seed_opt = cmd->add_option("--seed", *seed, "random seed");
    cmd->callback([=, &out] {
      const Term t = in->load();
      std::mt19937_64 rng(seed_opt->count() ? *seed : env_seed(default_seed));
      NormalFormSampler sampler(t, parse_strategy(*strategy));
      std::map<std::string, std::pair<Term, std::uint64_t>> hits;
      for (std::uint64_t i = 0; i < *count; ++i) {
        const Term nf = sampler.draw(rng);
        auto [it, inserted] = hits.emplace(term_key(nf), std::make_pair(nf, std::uint64_t{0}));
        ++it->second.second;
      }
      for (const auto& [_, e] : hits) {
        const Rational freq(e.second, *count);
        json j = prob_json(freq);
        j["term"] = to_string(e.first);
        j["hits"] = e.second;
        out.line(to_string(e.first) + " : " + std::to_string(e.second) + "/" + std::to_string(*count), j);
      }
    });
  }
}

// ---------------------------------------------------------------------------
// translate and check

void setup_translate(CLI::App& app, const Output& out) {
  auto* tr = app.add_subcommand("translate", "translations between Alg and lambda-plus");
  tr->require_subcommand(1);
  {
    auto* cmd = tr->add_subcommand("to-lambda", "Alg term (.alg) to lambda-plus");
    auto file = std::make_shared<std::string>();
    cmd->add_option("file", *file, "term file (.alg)")->required();
    cmd->callback([=, &out] {
      const Term t = to_lambda(parse_term(read_file(*file), Calculus::Alg));
      out.line(to_string(t), {{"term", to_string(t)}});
    });
  }
  {
    auto* cmd = tr->add_subcommand("to-alg", "lambda-plus term (.lp) to Alg");
    auto file = std::make_shared<std::string>();
    cmd->add_option("file", *file, "term file (.lp)")->required();
    cmd->callback([=, &out] {
      const Term t = to_alg(parse_term(read_file(*file)));
      out.line(to_string(t, Calculus::Alg), {{"term", to_string(t, Calculus::Alg)}});
    });
  }
}

void setup_check(CLI::App& app, const Output& out, int& status) {
  auto* chk = app.add_subcommand("check", "executable checks of the simulation results");
  chk->require_subcommand(1);
  {
    auto* cmd = chk->add_subcommand("simulation", "forward (.alg) or backward (.lp) simulation");
    auto file = std::make_shared<std::string>();
    auto paths = std::make_shared<std::size_t>(200);
    cmd->add_option("file", *file, "term file")->required();
    cmd->add_option("--paths", *paths, "Alg reducts explored (forward)");
    cmd->callback([=, &out, &status] {
      if (calculus_of(*file) == Calculus::Alg) {
        const ForwardReport r = check_simulation_forward(parse_term(read_file(*file), Calculus::Alg), *paths);
        for (const auto& [t, p] : r.source_normal.entries) {
          json j = prob_json(p);
          j["normal_form"] = to_string(t);
          out.line("  " + to_string(t) + " : " + to_string(p), j);
        }
        json j{{"ok", r.ok},
               {"explored", r.explored},
               {"checked", r.checks.size()},
               {"excluded_pseudo_terms", r.excluded_pseudo},
               {"truncated", r.truncated}};
        out.line(std::string(r.ok ? "forward simulation holds" : "forward simulation FAILS") + " on " +
                     std::to_string(r.checks.size()) + " reducts (" + std::to_string(r.excluded_pseudo) +
                     " pseudo-terms excluded, " + std::to_string(r.explored) + " explored" +
                     (r.truncated ? ", truncated" : "") + ")",
                 j);
        for (const auto& f : r.failures) out.line("  " + f, {{"failure", f}});
        if (!r.ok) status = 1;
      } else {
        const BackwardReport r = check_simulation_backward(parse_term(read_file(*file)));
        if (r.untranslatable_source) throw UntranslatableError(UntranslatableError::Reason::ProjectorNormalForm, *file);
        json j{{"ok", r.ok},
               {"symmetric", r.symmetric_checked},
               {"reductions", r.reductions_checked},
               {"probabilistic", r.probabilistic_checked},
               {"rule_pi_encountered", r.rule_pi_encountered},
               {"skipped_untranslatable", r.skipped_untranslatable}};
        out.line(std::string(r.ok ? "backward simulation holds" : "backward simulation FAILS") + ": " +
                     std::to_string(r.symmetric_checked) + " symmetric, " + std::to_string(r.reductions_checked) +
                     " reduction, " + std::to_string(r.probabilistic_checked) + " projector steps; rule Pi excluded " +
                     std::to_string(r.rule_pi_encountered) + " times",
                 j);
        for (const auto& f : r.failures) out.line("  " + f, {{"failure", f}});
        if (!r.ok) status = 1;
      }
    });
  }
  {
    auto* cmd = chk->add_subcommand("lemmas", "substitution identities on random terms");
    auto seed = std::make_shared<std::uint64_t>(0);
    auto count = std::make_shared<std::size_t>(1000);
    auto depth = std::make_shared<int>(5);
    auto* seed_opt = cmd->add_option("--seed", *seed, "random seed");
    cmd->add_option("--count", *count, "terms per calculus")->check(CLI::PositiveNumber);
    cmd->add_option("--depth", *depth, "maximum term depth")->check(CLI::Range(1, 8));
    cmd->callback([=, &out, &status] {
      const std::uint64_t s = seed_opt->count() ? *seed : env_seed(default_seed);
      const LemmaReport r = check_substitution_lemmas(generate_lemma_corpus(s, *count, *depth));
      json j{{"ok", r.ok()},
             {"alg_terms", r.alg_instances},
             {"lambda_terms", r.lambda_instances},
             {"checks", r.checks},
             {"failures", r.failures.size()},
             {"seed", s}};
      out.line(std::to_string(r.checks) + " identities checked on " + std::to_string(r.alg_instances) + " + " +
                   std::to_string(r.lambda_instances) + " terms, " + std::to_string(r.failures.size()) +
                   " failures (seed " + std::to_string(s) + ")",
               j);
      for (const auto& f : r.failures) out.line("  " + f, {{"failure", f}});
      if (!r.ok()) status = 1;
    });
  }
}

int fail(int code, const std::string& kind, const std::string& what, const Output& out) {
  if (out.as_json)
    std::cout << json{{"error", kind}, {"message", what}, {"exit", code}}.dump() << "\n";
  std::cerr << "error: " << what << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilities on rewrite traces, and the lambda-plus / Alg calculi"};
  app.require_subcommand(1);
  Output out;
  int status = 0;
  app.add_flag("--json", out.as_json, "JSON-lines output");
  setup_ars(app, out);
  setup_lambda(app, out);
  setup_translate(app, out);
  setup_check(app, out, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ParseError& e) {
    return fail(2, "parse", e.what(), out);
  } catch (const TypeError& e) {
    return fail(2, "type", e.what(), out);
  } catch (const UntranslatableError& e) {
    return fail(4, "untranslatable", e.what(), out);
  } catch (const InfeasibleError& e) {
    return fail(3, "infeasible", e.what(), out);
  } catch (const InputError& e) {
    return fail(2, "input", e.what(), out);
  } catch (const std::invalid_argument& e) {
    return fail(2, "input", e.what(), out);
  } catch (const std::domain_error& e) {
    return fail(2, "input", e.what(), out);
  }
  return status;
}
