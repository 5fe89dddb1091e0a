#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dk/errors.hpp"
#include "dk/formula.hpp"
#include "dk/kripke.hpp"
#include "dk/oracle.hpp"
#include "dk/random.hpp"
#include "dk/semantics.hpp"
#include "dk/variant.hpp"

namespace dk {

using Matrix12 = std::array<std::array<bool, 12>, 12>;

// Pairs of variants that are provably interchangeable on every model, given
// by the reporting-order indices of Variant::all. The blocks: the two
// relation-pooling readings; the four one-formula-each variants; the
// some-reading and all-reading of finite formula-set protocols, each block
// joining the simultaneous and sequential forms; and the two readings of
// transfinite protocols.
inline const Matrix12& expected_equivalences() {
  static const Matrix12 m = [] {
    Matrix12 out{};
    const std::vector<std::vector<int>> blocks = {{0, 1}, {2, 3, 4, 5}, {6, 8}, {7, 9}, {10, 11}};
    for (const auto& b : blocks)
      for (int i : b)
        for (int j : b) out[i][j] = true;
    return out;
  }();
  return m;
}

// Entailments that hold on every model: within a block both ways, and the
// chain one-formula-each -> finite-sets-all -> finite-sets-some ->
// transfinite -> relation-pooling, closed under transitivity.
inline const Matrix12& expected_implications() {
  static const Matrix12 m = [] {
    Matrix12 out = expected_equivalences();
    for (int i = 0; i < 12; ++i) out[i][i] = true;
    const std::vector<std::pair<int, int>> chain = {{2, 7}, {7, 6}, {6, 10}, {10, 0}};
    for (auto [i, j] : chain) out[i][j] = true;
    for (int k = 0; k < 12; ++k)
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
          if (out[i][k] && out[k][j]) out[i][j] = true;
    return out;
  }();
  return m;
}

struct DiffParams {
  std::uint64_t seed = 0;
  int count = 100;
  int max_worlds = 5;
  int max_agents = 3;
  int max_atoms = 2;
  int formula_depth = 3;
  std::string frame = "both";  // "K", "S5" or "both" (alternating)
  bool with_brute = true;
  OracleBounds bounds{};
};

// One reproducible disagreement: either a fast evaluation against the
// brute-force search ("oracle"), or two variants breaking a documented
// equivalence or entailment. Carries the full model so it can be replayed
// from the report alone.
struct Discrepancy {
  std::string kind;  // "oracle" | "expected-equivalence" | "expected-implication"
  std::uint64_t instance_seed = 0;
  nlohmann::ordered_json model;
  std::string world;
  std::vector<std::string> group;
  std::string target;         // printed formula
  std::string left_variant;   // a variant string
  std::string right_variant;  // a variant string, or "brute"
  bool left_value = false;
  bool right_value = false;
};

inline nlohmann::ordered_json discrepancy_to_json(const Discrepancy& d) {
  nlohmann::ordered_json j;
  j["kind"] = d.kind;
  j["instance_seed"] = d.instance_seed;
  j["world"] = d.world;
  j["group"] = d.group;
  j["target"] = d.target;
  j["left"] = d.left_variant;
  j["right"] = d.right_variant;
  j["left_value"] = d.left_value;
  j["right_value"] = d.right_value;
  j["model"] = d.model;
  return j;
}

inline Discrepancy discrepancy_from_json(const nlohmann::json& j) {
  Discrepancy d;
  d.kind = j.at("kind").get<std::string>();
  d.instance_seed = j.at("instance_seed").get<std::uint64_t>();
  d.world = j.at("world").get<std::string>();
  d.group = j.at("group").get<std::vector<std::string>>();
  d.target = j.at("target").get<std::string>();
  d.left_variant = j.at("left").get<std::string>();
  d.right_variant = j.at("right").get<std::string>();
  d.left_value = j.at("left_value").get<bool>();
  d.right_value = j.at("right_value").get<bool>();
  d.model = j.at("model");
  return d;
}

struct DiffReport {
  DiffParams params;
  int instances = 0;
  std::array<std::array<long, 12>, 12> agreement{};             // verdicts equal
  std::array<std::array<long, 12>, 12> implication_violations{};  // row true, column false
  std::array<long, 12> brute_checked{};
  std::array<long, 12> brute_disagreements{};
  std::vector<std::vector<std::string>> verdict_classes;  // variants with identical verdicts
  std::vector<Discrepancy> discrepancies;

  static const char* note() {
    return "Verdict classes record which variants returned identical answers on every "
           "sampled instance. The sampled models are finite and the targets are free of "
           "the group operator; under those conditions the maximal-information protocol "
           "exists and collapses the announcement-based variants, and the some/all "
           "readings do not separate. Over infinite models no such protocol need exist, "
           "so the classes describe this run, not a general equivalence.";
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["params"] = {{"seed", params.seed},
                   {"count", params.count},
                   {"max_worlds", params.max_worlds},
                   {"max_agents", params.max_agents},
                   {"max_atoms", params.max_atoms},
                   {"formula_depth", params.formula_depth},
                   {"frame", params.frame},
                   {"with_brute", params.with_brute}};
    j["instances"] = instances;
    auto vars = nlohmann::ordered_json::array();
    for (const auto& v : Variant::all()) vars.push_back(v.str());
    j["variants"] = vars;
    auto mat = [](const auto& m) {
      auto out = nlohmann::ordered_json::array();
      for (const auto& row : m) out.push_back(std::vector<long>(row.begin(), row.end()));
      return out;
    };
    j["agreement"] = mat(agreement);
    j["implication_violations"] = mat(implication_violations);
    j["brute"] = {{"checked", std::vector<long>(brute_checked.begin(), brute_checked.end())},
                  {"disagreements", std::vector<long>(brute_disagreements.begin(),
                                                      brute_disagreements.end())}};
    j["verdict_classes"] = verdict_classes;
    auto ds = nlohmann::ordered_json::array();
    for (const auto& d : discrepancies) ds.push_back(discrepancy_to_json(d));
    j["discrepancies"] = ds;
    j["note"] = note();
    return j;
  }

  std::string summary() const {
    std::ostringstream out;
    out << "instances evaluated: " << instances << " (frame " << params.frame << ")\n";
    long checked = 0, bad = 0;
    for (int v = 0; v < 12; ++v) {
      checked += brute_checked[v];
      bad += brute_disagreements[v];
    }
    if (params.with_brute)
      out << "brute-force comparisons: " << checked << ", disagreements: " << bad << "\n";
    out << "discrepancies: " << discrepancies.size() << "\n";
    out << "verdict classes:";
    for (const auto& cls : verdict_classes) {
      out << " {";
      for (std::size_t i = 0; i < cls.size(); ++i) out << (i ? " " : "") << cls[i];
      out << "}";
    }
    out << "\n";
    return out.str();
  }
};

// Samples pointed models and targets, evaluates all twelve variants on each,
// optionally cross-checks every verdict against the brute-force search, and
// tallies agreements, entailment failures and anything that contradicts the
// documented structure. Instance i depends only on seed + i, so any report
// line can be regenerated in isolation and whole reports are byte-stable.
inline DiffReport differential_run(const DiffParams& p) {
  if (p.frame != "K" && p.frame != "S5" && p.frame != "both")
    throw Error("frame must be K, S5 or both");
  if (p.count < 0) throw Error("instance count must be non-negative");
  if (p.max_worlds < 1 || p.max_agents < 1 || p.max_atoms < 0 || p.formula_depth < 0)
    throw Error("size bounds must be positive");

  DiffReport r;
  r.params = p;
  const auto& eq = expected_equivalences();
  const auto& imp = expected_implications();

  for (int i = 0; i < p.count; ++i) {
    std::uint64_t inst_seed = p.seed + static_cast<std::uint64_t>(i);
    std::mt19937_64 g(inst_seed);

    GeneratorParams gp;
    gp.world_count = 1 + rand_below(g, p.max_worlds);
    gp.agent_count = 1 + rand_below(g, p.max_agents);
    gp.atom_count = rand_below(g, p.max_atoms + 1);
    gp.edge_density = (10 + rand_below(g, 81)) / 100.0;
    gp.frame = p.frame == "K" || (p.frame == "both" && i % 2 == 0) ? Frame::K : Frame::S5;
    gp.seed = g();
    KripkeModel m = random_model(gp);
    Partition part(m, m.atoms());

    std::string world = m.worlds()[rand_below(g, m.world_count())];
    std::vector<std::string> group_names;
    while (group_names.empty())
      for (const auto& a : m.agents())
        if (rand_chance(g, 0.5)) group_names.push_back(a);
    auto group = detail::resolve_group(m, group_names);
    Formula f = random_formula(g, m.atoms(), m.agents(), p.formula_depth, false);
    WorldSet target = Evaluator(m, Variant::intersection()).extension(f);

    auto snapshot = [&] { return model_to_json(m); };
    std::size_t wi = m.world_index(world);
    std::array<bool, 12> verdict{};
    for (int v = 0; v < 12; ++v)
      verdict[v] = dk_holds(m, part, wi, group, target, Variant::all()[v]);

    if (p.with_brute)
      for (int v = 0; v < 12; ++v) {
        bool brute = brute_force_dk(m, part, world, group_names, target, Variant::all()[v],
                                    p.bounds);
        ++r.brute_checked[v];
        if (brute != verdict[v]) {
          ++r.brute_disagreements[v];
          r.discrepancies.push_back({"oracle", inst_seed, snapshot(), world, group_names,
                                     to_string(f), Variant::all()[v].str(), "brute", verdict[v],
                                     brute});
        }
      }

    for (int a = 0; a < 12; ++a)
      for (int b = 0; b < 12; ++b) {
        if (verdict[a] == verdict[b]) ++r.agreement[a][b];
        if (verdict[a] && !verdict[b]) {
          ++r.implication_violations[a][b];
          if (imp[a][b])
            r.discrepancies.push_back({"expected-implication", inst_seed, snapshot(), world,
                                       group_names, to_string(f), Variant::all()[a].str(),
                                       Variant::all()[b].str(), verdict[a], verdict[b]});
        }
        if (a < b && eq[a][b] && verdict[a] != verdict[b])
          r.discrepancies.push_back({"expected-equivalence", inst_seed, snapshot(), world,
                                     group_names, to_string(f), Variant::all()[a].str(),
                                     Variant::all()[b].str(), verdict[a], verdict[b]});
      }
    ++r.instances;
  }

  // variants whose verdicts agreed on every instance form one class
  std::vector<int> owner(12, -1);
  for (int v = 0; v < 12; ++v) {
    for (int u = 0; u < v; ++u)
      if (r.agreement[u][v] == r.instances) {
        owner[v] = owner[u];
        break;
      }
    if (owner[v] < 0) {
      owner[v] = static_cast<int>(r.verdict_classes.size());
      r.verdict_classes.emplace_back();
    }
    r.verdict_classes[owner[v]].push_back(Variant::all()[v].str());
  }
  return r;
}

// Re-evaluates both sides of a recorded discrepancy on its embedded model.
// True when the stored verdicts reproduce exactly.
inline bool replay(const Discrepancy& d) {
  KripkeModel m = model_from_json(d.model);
  Formula f = parse_formula(d.target);
  WorldSet target = Evaluator(m, Variant::intersection()).extension(f);
  auto side = [&](const std::string& name, const std::string& other) {
    if (name == "brute") return brute_force_dk(m, d.world, d.group, target, Variant::parse(other));
    return dk_holds(m, d.world, d.group, target, Variant::parse(name));
  };
  return side(d.left_variant, d.right_variant) == d.left_value &&
         side(d.right_variant, d.left_variant) == d.right_value;
}

}  // namespace dk
