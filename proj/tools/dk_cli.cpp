#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dk/bisim.hpp"
#include "dk/diff.hpp"
#include "dk/gallery.hpp"
#include "dk/kripke.hpp"
#include "dk/oracle.hpp"
#include "dk/semantics.hpp"

namespace {

using nlohmann::ordered_json;

struct LoadedModel {
  dk::KripkeModel model;
  std::optional<std::string> point;
  std::string source;
};

// A --model argument is either a built-in name or a path to a JSON file.
LoadedModel resolve_model(const std::string& arg) {
  std::string normalized = arg;
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  for (const auto& name : dk::gallery_names())
    if (name == normalized) {
      auto pm = dk::gallery_model(name);
      return {std::move(pm.model), pm.point, name};
    }
  return {dk::load_model(arg), std::nullopt, arg};
}

std::string resolve_world(const LoadedModel& lm, const std::string& world_opt) {
  if (!world_opt.empty()) return world_opt;
  if (lm.point) return *lm.point;
  throw dk::ModelError("model '" + lm.source + "' has no distinguished world; pass --world");
}

std::vector<std::string> world_names(const dk::KripkeModel& m, const dk::WorldSet& s) {
  return m.names_of(s);
}

std::string joined(const std::vector<std::string>& names) {
  std::string out = "{";
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? " " : "") + names[i];
  return out + "}";
}

struct CheckArgs {
  std::string model, world, formula, variant;
  bool all_variants = false, json = false, quiet = false;
};

int run_check(const CheckArgs& a) {
  if (a.variant.empty() == !a.all_variants)
    throw dk::Error("check needs exactly one of --variant and --all-variants");
  LoadedModel lm = resolve_model(a.model);
  std::string world = resolve_world(lm, a.world);
  dk::Formula f = dk::parse_formula(a.formula);

  if (!a.all_variants) {
    dk::Variant v = dk::Variant::parse(a.variant);
    bool value = dk::eval(lm.model, world, f, v);
    if (a.json) {
      ordered_json j;
      j["model"] = lm.source;
      j["world"] = world;
      j["formula"] = dk::to_string(f);
      j["variant"] = v.str();
      j["value"] = value;
      std::cout << j.dump(2) << "\n";
    } else if (!a.quiet) {
      std::cout << v.str() << ": " << (value ? "true" : "false") << " at " << world << "\n";
    }
    return value ? 0 : 1;
  }

  ordered_json results = ordered_json::object();
  std::size_t width = 0;
  for (const auto& v : dk::Variant::all()) width = std::max(width, v.str().size());
  std::string table;
  for (const auto& v : dk::Variant::all()) {
    bool value = dk::eval(lm.model, world, f, v);
    results[v.str()] = value;
    table += v.str() + std::string(width + 2 - v.str().size(), ' ') +
             (value ? "true" : "false") + "\n";
  }
  if (a.json) {
    ordered_json j;
    j["model"] = lm.source;
    j["world"] = world;
    j["formula"] = dk::to_string(f);
    j["results"] = results;
    std::cout << j.dump(2) << "\n";
  } else if (!a.quiet) {
    std::cout << dk::to_string(f) << " at " << world << ":\n" << table;
  }
  return 0;
}

struct BisimArgs {
  std::string model, world, other, other_world, vocab;
  bool json = false;
};

int run_bisim(const BisimArgs& a) {
  LoadedModel lm = resolve_model(a.model);
  std::vector<std::string> vocab = lm.model.atoms();
  if (!a.vocab.empty()) {
    vocab.clear();
    std::istringstream in(a.vocab);
    for (std::string item; std::getline(in, item, ',');)
      if (!item.empty()) vocab.push_back(item);
  }

  if (a.other.empty()) {
    if (!a.other_world.empty())
      throw dk::Error("--other-world needs --other");
    dk::Partition part(lm.model, vocab);
    if (a.json) {
      ordered_json j;
      j["model"] = lm.source;
      j["vocab"] = vocab;
      auto classes = ordered_json::array();
      for (const auto& c : part.classes()) classes.push_back(world_names(lm.model, c));
      j["classes"] = classes;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "classes over " << joined(vocab) << ":\n";
      for (std::size_t c = 0; c < part.class_count(); ++c)
        std::cout << "  " << c << ": " << joined(world_names(lm.model, part.class_set(c)))
                  << "\n";
    }
    return 0;
  }

  LoadedModel other = resolve_model(a.other);
  std::string left = resolve_world(lm, a.world);
  std::string right = resolve_world(other, a.other_world);
  bool same = dk::bisimilar(lm.model, left, other.model, right, vocab);
  if (a.json) {
    ordered_json j;
    j["left"] = {{"model", lm.source}, {"world", left}};
    j["right"] = {{"model", other.source}, {"world", right}};
    j["vocab"] = vocab;
    j["bisimilar"] = same;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "bisimilar: " << (same ? "true" : "false") << "\n";
  }
  return same ? 0 : 1;
}

struct SimulateArgs {
  std::string model, world, script, target;
  bool json = false;
};

int run_simulate(const SimulateArgs& a) {
  LoadedModel lm = resolve_model(a.model);
  std::string world = resolve_world(lm, a.world);
  std::ifstream in(a.script);
  if (!in) throw dk::ModelError("cannot open script file '" + a.script + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto script = dk::AnnouncementScript::parse(buf.str());
  auto r = dk::simulate_script(lm.model, world, script);

  std::optional<dk::WorldSet> target;
  std::optional<dk::Formula> target_formula;
  if (!a.target.empty()) {
    target_formula = dk::parse_formula(a.target);
    target = dk::extension(lm.model, *target_formula, dk::Variant::intersection());
  }

  std::size_t point = lm.model.world_index(world);
  if (a.json) {
    ordered_json j;
    j["model"] = lm.source;
    j["world"] = world;
    auto steps = ordered_json::array();
    for (const auto& s : r.steps)
      steps.push_back({{"agent", s.agent},
                       {"formula", dk::to_string(s.formula)},
                       {"extension", world_names(lm.model, s.announced)},
                       {"truthful", s.truthful}});
    j["steps"] = steps;
    j["all_truthful"] = r.all_truthful;
    auto fin = ordered_json::object();
    for (std::size_t ag = 0; ag < lm.model.agents().size(); ++ag)
      fin[lm.model.agents()[ag]] = world_names(lm.model, r.state.successors(ag, point));
    j["final"] = fin;
    if (target) {
      auto knows = ordered_json::object();
      for (std::size_t ag = 0; ag < lm.model.agents().size(); ++ag)
        knows[lm.model.agents()[ag]] = r.state.knows(ag, point, *target);
      j["target"] = {{"formula", dk::to_string(*target_formula)}, {"knows", knows}};
    }
    std::cout << j.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < r.steps.size(); ++i)
      std::cout << (i + 1) << ". " << r.steps[i].agent << " announces "
                << dk::to_string(r.steps[i].formula)
                << (r.steps[i].truthful ? "" : " (untruthful)") << "\n";
    std::cout << "after the script at " << world << ":\n";
    for (std::size_t ag = 0; ag < lm.model.agents().size(); ++ag) {
      std::cout << "  " << lm.model.agents()[ag] << " considers "
                << joined(world_names(lm.model, r.state.successors(ag, point)));
      if (target)
        std::cout << (r.state.knows(ag, point, *target) ? ", knows " : ", does not know ")
                  << dk::to_string(*target_formula);
      std::cout << "\n";
    }
  }
  return 0;
}

struct DiffArgs {
  dk::DiffParams params;
  bool no_brute = false, json = false;
  std::string out, replay_path;
};

int run_diff(const DiffArgs& a) {
  if (!a.replay_path.empty()) {
    std::ifstream in(a.replay_path);
    if (!in) throw dk::ModelError("cannot open report file '" + a.replay_path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, true);
    std::size_t total = 0, reproduced = 0;
    for (const auto& dj : j.at("discrepancies")) {
      ++total;
      if (dk::replay(dk::discrepancy_from_json(dj))) ++reproduced;
    }
    std::cout << "replayed " << total << " discrepancies, " << reproduced << " reproduced\n";
    return total == reproduced ? 0 : 1;
  }

  dk::DiffParams p = a.params;
  p.with_brute = !a.no_brute;
  auto r = dk::differential_run(p);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw dk::ModelError("cannot write report file '" + a.out + "'");
    out << r.to_json().dump(2) << "\n";
  }
  if (a.json)
    std::cout << r.to_json().dump(2) << "\n";
  else
    std::cout << r.summary();
  return r.discrepancies.empty() ? 0 : 1;
}

bool claim(bool ok, const std::string& text) {
  std::cout << "  " << (ok ? "[ok] " : "[FAILED] ") << text << "\n";
  return ok;
}

int demo_appendix_a() {
  auto [m, pt] = dk::gallery_model("appendix_a");
  bool ok = true;
  std::cout << "six-world model, p marks the s-worlds, pointed at " << pt << "\n";
  std::cout << "agent a's cells pair each s with its t; agent b cannot tell s1,s2,t1 apart,\n"
               "nor s3,t2,t3, so both consider p-worlds and non-p-worlds possible at "
            << pt << "\n";
  dk::Formula d = dk::parse_formula("D{a,b} p");
  ok &= claim(dk::eval(m, pt, d, dk::Variant::intersection()),
              "pooling the raw relations settles p at " + pt);
  auto shares = dk::maximal_shares(m, pt, {"a", "b"});
  for (const auto& [agent, e] : shares)
    ok &= claim(e == dk::WorldSet::all(m.world_count()),
                "the strongest announcement " + agent + " knows says nothing at all");
  for (const auto& v : dk::Variant::all()) {
    if (v.f == dk::FormMode::Cap) continue;
    ok &= claim(!dk::eval(m, pt, d, v), v.str() + " fails at " + pt);
  }
  std::cout << "so exchanging formulas, in any amount and order, cannot reproduce what\n"
               "pooling the relations themselves delivers\n";
  return ok ? 0 : 1;
}

int demo_moore() {
  auto [m, pt] = dk::gallery_model("moore");
  bool ok = true;
  dk::Formula s = dk::parse_formula("p & ~[a]p");
  std::cout << "two worlds; the sentence 'p & ~[a]p' says: p, but a does not know it\n";
  ok &= claim(dk::extension(m, s, dk::Variant::intersection()) ==
                  dk::extension(m, dk::parse_formula("p"), dk::Variant::intersection()),
              "the sentence is true exactly where p is");
  ok &= claim(dk::extension(m, dk::parse_formula("[a](p & ~[a]p)"),
                            dk::Variant::intersection())
                  .none(),
              "a can never know it: [a](p & ~[a]p) holds nowhere");
  dk::Formula d = dk::parse_formula("D{a,b} (p & ~[a]p)");
  for (const auto& v : dk::Variant::all())
    ok &= claim(dk::eval(m, pt, d, v), v.str() + " holds at " + pt);
  std::cout << "b knows the sentence outright and hands it over; distributed knowledge of\n"
               "an unlearnable truth is still attainable under every reading\n";
  return ok ? 0 : 1;
}

int demo_intro() {
  auto [m, pt] = dk::gallery_model("intro");
  bool ok = true;
  std::cout << "four worlds named by their valuations; a knows whether p -> q, b knows "
               "whether p\n";
  dk::Formula dq = dk::parse_formula("D{a,b} q");
  for (const char* solo : {"a", "b"})
    ok &= claim(!dk::eval(m, pt, dk::Formula::d({solo}, dk::parse_formula("q")),
                          dk::Variant::fullcomm()),
                std::string(solo) + " alone does not know q");
  for (const auto& v : dk::Variant::all())
    ok &= claim(dk::eval(m, pt, dq, v), v.str() + " holds at " + pt);
  auto script = dk::AnnouncementScript::parse("b: p\na: q\n");
  auto r = dk::simulate_script(m, pt, script);
  ok &= claim(r.steps.size() == 2 && r.steps[0].truthful,
              "b can truthfully announce p");
  ok &= claim(r.steps[1].truthful, "after hearing it, a can truthfully announce q");
  dk::WorldSet q_ext = dk::extension(m, dk::parse_formula("q"), dk::Variant::intersection());
  std::size_t point = m.world_index(pt);
  bool everyone = true;
  for (std::size_t ag = 0; ag < m.agents().size(); ++ag)
    everyone = everyone && r.state.knows(ag, point, q_ext);
  ok &= claim(everyone, "after the script, everyone knows q");
  return ok ? 0 : 1;
}

int demo_circularity() {
  auto [m, pt] = dk::gallery_model("appendix_a");
  bool ok = true;
  std::cout << "when announcements may themselves use the group operator, the language\n"
               "and the operator have to be found together; a family of extensions is\n"
               "self-fulfilling when closing the atoms under the connectives, with the\n"
               "family itself as the announcement pool, reproduces the family\n";
  auto full = dk::ExtensionSet::powerset(6);
  auto rf = dk::verify_self_fulfilling(m, full);
  ok &= claim(rf.verdict, "the family of all 64 subsets is self-fulfilling");

  dk::ExtensionSet coarse(6);
  dk::WorldSet p_ext = m.atom_extension(m.atom_index("p"));
  coarse.add(dk::WorldSet(6));
  coarse.add(p_ext);
  coarse.add(p_ext.complement());
  coarse.add(dk::WorldSet::all(6));
  auto rc = dk::verify_self_fulfilling(m, coarse);
  ok &= claim(rc.verdict, "so is the four-member family {empty, p-worlds, rest, all}");

  dk::WorldSet d_full = dk::circular_d_extension(m, {"a", "b"}, p_ext, full);
  dk::WorldSet d_coarse = dk::circular_d_extension(m, {"a", "b"}, p_ext, coarse);
  ok &= claim(d_full != d_coarse && d_full.test(m.world_index(pt)) &&
                  !d_coarse.test(m.world_index(pt)),
              "the two families disagree about the group operator at " + pt);

  dk::ExtensionSet tiny(6);
  tiny.add(dk::WorldSet(6));
  tiny.add(dk::WorldSet::all(6));
  auto rt = dk::verify_self_fulfilling(m, tiny);
  bool p_escapes = std::find(rt.escaping.begin(), rt.escaping.end(), p_ext) != rt.escaping.end();
  ok &= claim(!rt.verdict && p_escapes,
              "{empty, all} is not self-fulfilling: the extension of p escapes");
  std::cout << "the operator is only fixed relative to a family, and more than one\n"
               "family fits\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model checker for twelve readings of distributed knowledge"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "evaluate a formula at a world");
  c->add_option("--model", check.model, "built-in model name or JSON file")->required();
  c->add_option("--world", check.world, "world to evaluate at");
  c->add_option("--formula", check.formula, "formula to evaluate")->required();
  c->add_option("--variant", check.variant, "variant tuple or alias");
  c->add_flag("--all-variants", check.all_variants, "evaluate under all twelve variants");
  c->add_flag("--json", check.json, "emit JSON");
  c->add_flag("--quiet", check.quiet, "no output, answer via exit code");

  BisimArgs bisim;
  auto* b = app.add_subcommand("bisim", "partition a model or compare two pointed models");
  b->add_option("--model", bisim.model, "built-in model name or JSON file")->required();
  b->add_option("--world", bisim.world, "world in the first model");
  b->add_option("--other", bisim.other, "second model to compare against");
  b->add_option("--other-world", bisim.other_world, "world in the second model");
  b->add_option("--vocab", bisim.vocab, "comma-separated atoms (default: all)");
  b->add_flag("--json", bisim.json, "emit JSON");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run an announcement script");
  s->add_option("--model", sim.model, "built-in model name or JSON file")->required();
  s->add_option("--world", sim.world, "world the script happens at");
  s->add_option("--script", sim.script, "script file, one 'agent: formula' per line")
      ->required();
  s->add_option("--target", sim.target, "report who knows this formula afterwards");
  s->add_flag("--json", sim.json, "emit JSON");

  DiffArgs diff;
  auto* d = app.add_subcommand("diff", "differential run over random models");
  d->add_option("--seed", diff.params.seed, "base seed");
  d->add_option("--count", diff.params.count, "number of instances");
  d->add_option("--max-worlds", diff.params.max_worlds, "largest world count");
  d->add_option("--max-agents", diff.params.max_agents, "largest agent count");
  d->add_option("--max-atoms", diff.params.max_atoms, "largest atom count");
  d->add_option("--depth", diff.params.formula_depth, "target formula depth");
  d->add_option("--frame", diff.params.frame, "K, S5 or both");
  d->add_flag("--no-brute", diff.no_brute, "skip brute-force cross-checks");
  d->add_flag("--json", diff.json, "emit the full JSON report");
  d->add_option("--out", diff.out, "also write the JSON report to a file");
  d->add_option("--replay", diff.replay_path, "replay discrepancies from a report file");

  std::string demo_name;
  auto* e = app.add_subcommand("demo", "guided walkthroughs with checked claims");
  e->add_option("name", demo_name, "appendix-a, moore, intro or circularity")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c) return run_check(check);
    if (*b) return run_bisim(bisim);
    if (*s) return run_simulate(sim);
    if (*d) return run_diff(diff);
    std::string name = demo_name;
    std::replace(name.begin(), name.end(), '-', '_');
    if (name == "appendix_a") return demo_appendix_a();
    if (name == "moore") return demo_moore();
    if (name == "intro") return demo_intro();
    if (name == "circularity") return demo_circularity();
    throw dk::Error("unknown demo '" + demo_name +
                    "'; available: appendix-a, moore, intro, circularity");
  } catch (const dk::BoundError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const dk::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
