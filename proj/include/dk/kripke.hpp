#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dk/errors.hpp"
#include "dk/random.hpp"
#include "dk/world_set.hpp"

namespace dk {

enum class Frame { K, S5 };

inline std::string frame_name(Frame f) { return f == Frame::K ? "K" : "S5"; }

// Finite Kripke model: named worlds, one accessibility relation per agent,
// one extension per atom. Relations are stored as per-world successor sets,
// which every algorithm in the library consumes directly. The frame tag is
// declarative; validate() reports where an S5-tagged model breaks the
// equivalence conditions instead of silently repairing it.
class KripkeModel {
 public:
  KripkeModel() = default;

  KripkeModel(std::vector<std::string> worlds, std::vector<std::string> agents,
              std::vector<std::string> atoms, Frame frame)
      : worlds_(std::move(worlds)),
        agents_(std::move(agents)),
        atoms_(std::move(atoms)),
        frame_(frame) {
    index(worlds_, windex_, "world");
    index(agents_, aindex_, "agent");
    index(atoms_, pindex_, "atom");
    val_.assign(atoms_.size(), WorldSet(worlds_.size()));
    rel_.assign(agents_.size(),
                std::vector<WorldSet>(worlds_.size(), WorldSet(worlds_.size())));
  }

  std::size_t world_count() const { return worlds_.size(); }
  const std::vector<std::string>& worlds() const { return worlds_; }
  const std::vector<std::string>& agents() const { return agents_; }
  const std::vector<std::string>& atoms() const { return atoms_; }
  Frame frame() const { return frame_; }

  const std::string& world_name(std::size_t i) const { return worlds_[i]; }

  std::optional<std::size_t> find_world(std::string_view name) const { return find(windex_, name); }
  std::optional<std::size_t> find_agent(std::string_view name) const { return find(aindex_, name); }
  std::optional<std::size_t> find_atom(std::string_view name) const { return find(pindex_, name); }

  std::size_t world_index(std::string_view name) const { return need(windex_, name, "world"); }
  std::size_t agent_index(std::string_view name) const { return need(aindex_, name, "agent"); }
  std::size_t atom_index(std::string_view name) const { return need(pindex_, name, "atom"); }

  const WorldSet& atom_extension(std::size_t atom) const { return val_[atom]; }
  const WorldSet& successors(std::size_t agent, std::size_t world) const {
    return rel_[agent][world];
  }

  void set_atom(std::string_view atom, std::string_view world) {
    val_[atom_index(atom)].set(world_index(world));
  }

  void add_edge(std::string_view agent, std::string_view from, std::string_view to) {
    rel_[agent_index(agent)][world_index(from)].set(world_index(to));
  }

  void add_edge(std::size_t agent, std::size_t from, std::size_t to) {
    rel_[agent][from].set(to);
  }

  std::vector<std::string> names_of(const WorldSet& ws) const {
    std::vector<std::string> out;
    for (auto i : ws.members()) out.push_back(worlds_[i]);
    return out;
  }

  // Lists every violation instead of stopping at the first one.
  std::vector<std::string> validate() const {
    std::vector<std::string> bad;
    if (worlds_.empty()) bad.push_back("worlds must be non-empty");
    if (frame_ == Frame::S5) {
      for (std::size_t a = 0; a < agents_.size(); ++a) {
        for (std::size_t w = 0; w < worlds_.size(); ++w) {
          if (!rel_[a][w].test(w))
            bad.push_back("agent " + agents_[a] + ": relation not reflexive at " + worlds_[w]);
          for (auto v : rel_[a][w].members()) {
            if (!rel_[a][v].test(w))
              bad.push_back("agent " + agents_[a] + ": relation not symmetric for (" +
                            worlds_[w] + ", " + worlds_[v] + ")");
            if (!rel_[a][v].subset_of(rel_[a][w]))
              bad.push_back("agent " + agents_[a] + ": relation not transitive through (" +
                            worlds_[w] + ", " + worlds_[v] + ")");
          }
        }
      }
    }
    return bad;
  }

  // Reflexive-symmetric-transitive closure of every agent's relation, i.e.
  // each world's successor set becomes its undirected connected component.
  // Idempotent, monotone in the edge set; the result is tagged S5.
  KripkeModel s5_closure() const {
    KripkeModel out = *this;
    out.frame_ = Frame::S5;
    const std::size_t n = worlds_.size();
    for (std::size_t a = 0; a < agents_.size(); ++a) {
      std::vector<std::size_t> root(n);
      for (std::size_t i = 0; i < n; ++i) root[i] = i;
      auto find_root = [&](std::size_t x) {
        while (root[x] != x) x = root[x] = root[root[x]];
        return x;
      };
      for (std::size_t w = 0; w < n; ++w)
        for (auto v : rel_[a][w].members()) root[find_root(w)] = find_root(v);
      std::vector<WorldSet> comp(n, WorldSet(n));
      for (std::size_t w = 0; w < n; ++w) comp[find_root(w)].set(w);
      for (std::size_t w = 0; w < n; ++w) out.rel_[a][w] = comp[find_root(w)];
    }
    return out;
  }

  friend bool operator==(const KripkeModel& a, const KripkeModel& b) {
    return a.worlds_ == b.worlds_ && a.agents_ == b.agents_ && a.atoms_ == b.atoms_ &&
           a.frame_ == b.frame_ && a.val_ == b.val_ && a.rel_ == b.rel_;
  }
  friend bool operator!=(const KripkeModel& a, const KripkeModel& b) { return !(a == b); }

 private:
  static void index(const std::vector<std::string>& names,
                    std::map<std::string, std::size_t, std::less<>>& into,
                    const char* kind) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (!into.emplace(names[i], i).second)
        throw ModelError(std::string("duplicate ") + kind + " name '" + names[i] + "'");
  }

  static std::optional<std::size_t> find(
      const std::map<std::string, std::size_t, std::less<>>& m, std::string_view k) {
    auto it = m.find(k);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  static std::size_t need(const std::map<std::string, std::size_t, std::less<>>& m,
                          std::string_view k, const char* kind) {
    auto it = m.find(k);
    if (it == m.end())
      throw ModelError(std::string("undeclared ") + kind + " '" + std::string(k) + "'");
    return it->second;
  }

  std::vector<std::string> worlds_, agents_, atoms_;
  std::map<std::string, std::size_t, std::less<>> windex_, aindex_, pindex_;
  std::vector<WorldSet> val_;                // per atom
  std::vector<std::vector<WorldSet>> rel_;   // per agent, per world
  Frame frame_ = Frame::K;
};

struct PointedModel {
  KripkeModel model;
  std::string point;

  std::size_t point_index() const { return model.world_index(point); }
};

// Worlds whose every a-successor lies in e.
inline WorldSet box_preimage(const KripkeModel& m, std::size_t agent, const WorldSet& e) {
  WorldSet out(m.world_count());
  for (std::size_t w = 0; w < m.world_count(); ++w)
    if (m.successors(agent, w).subset_of(e)) out.set(w);
  return out;
}

namespace detail {

// Validated agent indices of a group: non-empty, declared, sorted, unique.
inline std::vector<std::size_t> resolve_group(const KripkeModel& m,
                                              const std::vector<std::string>& group) {
  if (group.empty()) throw ModelError("agent group must be non-empty");
  std::vector<std::size_t> out;
  for (const auto& a : group) out.push_back(m.agent_index(a));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Serialization. The file format is a single JSON object:
//
//   {
//     "worlds":    ["s1", ...],               required, non-empty
//     "agents":    ["a", ...],                required
//     "atoms":     ["p", ...],                required
//     "valuation": {"p": ["s1", ...], ...},   required, atoms may be omitted
//     "relations": {"a": [["s1","t1"], ...]}, required, agents may be omitted
//     "frame":     "K" | "S5",                required
//     "close":     true                       optional, s5_closure on load
//   }

namespace detail {

inline std::vector<std::string> string_array(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw ModelError("missing key '" + key + "'");
  if (!j[key].is_array()) throw ModelError("'" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j[key]) {
    if (!e.is_string()) throw ModelError("'" + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline KripkeModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("model file must hold a JSON object");
  auto worlds = detail::string_array(j, "worlds");
  auto agents = detail::string_array(j, "agents");
  auto atoms = detail::string_array(j, "atoms");

  if (!j.contains("frame") || !j["frame"].is_string())
    throw ModelError("missing key 'frame' (\"K\" or \"S5\")");
  std::string fr = j["frame"].get<std::string>();
  Frame frame;
  if (fr == "K") frame = Frame::K;
  else if (fr == "S5") frame = Frame::S5;
  else throw ModelError("frame must be \"K\" or \"S5\", got \"" + fr + "\"");

  if (worlds.empty()) throw ModelError("worlds must be non-empty");
  KripkeModel m(std::move(worlds), std::move(agents), std::move(atoms), frame);

  if (!j.contains("valuation") || !j["valuation"].is_object())
    throw ModelError("missing key 'valuation'");
  for (const auto& [atom, list] : j["valuation"].items()) {
    if (!m.find_atom(atom)) throw ModelError("valuation for undeclared atom '" + atom + "'");
    if (!list.is_array()) throw ModelError("valuation of '" + atom + "' must be a world array");
    for (const auto& w : list) {
      if (!w.is_string() || !m.find_world(w.get<std::string>()))
        throw ModelError("valuation of '" + atom + "' mentions undeclared world " + w.dump());
      m.set_atom(atom, w.get<std::string>());
    }
  }

  if (!j.contains("relations") || !j["relations"].is_object())
    throw ModelError("missing key 'relations'");
  for (const auto& [agent, pairs] : j["relations"].items()) {
    if (!m.find_agent(agent)) throw ModelError("relations for undeclared agent '" + agent + "'");
    if (!pairs.is_array())
      throw ModelError("relations of '" + agent + "' must be an array of world pairs");
    for (const auto& pr : pairs) {
      if (!pr.is_array() || pr.size() != 2 || !pr[0].is_string() || !pr[1].is_string())
        throw ModelError("relations of '" + agent + "' contain a malformed pair " + pr.dump());
      for (const auto& end : pr)
        if (!m.find_world(end.get<std::string>()))
          throw ModelError("relation pair " + pr.dump() + " for agent '" + agent +
                           "' mentions undeclared world \"" + end.get<std::string>() + "\"");
      m.add_edge(agent, pr[0].get<std::string>(), pr[1].get<std::string>());
    }
  }

  if (j.contains("close")) {
    if (!j["close"].is_boolean()) throw ModelError("'close' must be a boolean");
    if (j["close"].get<bool>()) m = m.s5_closure();
  }

  auto bad = m.validate();
  if (!bad.empty()) {
    std::string msg = "model validation failed:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ModelError(msg);
  }
  return m;
}

inline KripkeModel parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline KripkeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const Error& e) {
    throw ModelError(path + ": " + e.what());
  }
}

// Canonical order: declared order for worlds/agents/atoms, relation pairs by
// world index. load(save(m)) reproduces m exactly.
inline nlohmann::ordered_json model_to_json(const KripkeModel& m) {
  nlohmann::ordered_json j;
  j["worlds"] = m.worlds();
  j["agents"] = m.agents();
  j["atoms"] = m.atoms();
  auto val = nlohmann::ordered_json::object();
  for (std::size_t p = 0; p < m.atoms().size(); ++p)
    val[m.atoms()[p]] = m.names_of(m.atom_extension(p));
  j["valuation"] = std::move(val);
  auto rel = nlohmann::ordered_json::object();
  for (std::size_t a = 0; a < m.agents().size(); ++a) {
    auto pairs = nlohmann::ordered_json::array();
    for (std::size_t w = 0; w < m.world_count(); ++w)
      for (auto v : m.successors(a, w).members())
        pairs.push_back({m.world_name(w), m.world_name(v)});
    rel[m.agents()[a]] = std::move(pairs);
  }
  j["relations"] = std::move(rel);
  j["frame"] = frame_name(m.frame());
  return j;
}

inline void save_model(const KripkeModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << model_to_json(m).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Seeded generator.

struct GeneratorParams {
  std::uint64_t seed = 0;
  int world_count = 1;
  int agent_count = 1;
  int atom_count = 0;
  double edge_density = 0.5;  // 0 = no sampled edges, 1 = every candidate edge
  Frame frame = Frame::S5;
};

inline std::string nth_agent_name(int i) {
  return std::string(1, static_cast<char>('a' + i));
}

inline std::string nth_atom_name(int i) {
  if (i == 0) return "p";
  if (i == 1) return "q";
  if (i == 2) return "r";
  return "p" + std::to_string(i);
}

// Same parameters, same model: draws happen in a fixed order (relations per
// agent over pairs in index order, then the valuation per atom per world).
// S5 relations are the s5_closure of sampled undirected edges, so density 0
// yields identity relations and density 1 the total relation.
inline KripkeModel random_model(const GeneratorParams& p) {
  if (p.world_count < 1 || p.world_count > 512)
    throw ModelError("world_count must be between 1 and 512");
  if (p.agent_count < 1 || p.agent_count > 26)
    throw ModelError("agent_count must be between 1 and 26");
  if (p.atom_count < 0 || p.atom_count > 26)
    throw ModelError("atom_count must be between 0 and 26");
  if (!(p.edge_density >= 0.0 && p.edge_density <= 1.0))
    throw ModelError("edge_density must lie in [0, 1]");

  std::vector<std::string> worlds, agents, atoms;
  for (int i = 0; i < p.world_count; ++i) worlds.push_back("w" + std::to_string(i));
  for (int i = 0; i < p.agent_count; ++i) agents.push_back(nth_agent_name(i));
  for (int i = 0; i < p.atom_count; ++i) atoms.push_back(nth_atom_name(i));

  KripkeModel m(std::move(worlds), std::move(agents), std::move(atoms), Frame::K);
  std::mt19937_64 g(p.seed);
  const std::size_t n = static_cast<std::size_t>(p.world_count);

  for (int a = 0; a < p.agent_count; ++a) {
    if (p.frame == Frame::S5) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (rand_chance(g, p.edge_density)) {
            m.add_edge(a, i, j);
          }
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (rand_chance(g, p.edge_density)) m.add_edge(a, i, j);
    }
  }
  for (int q = 0; q < p.atom_count; ++q)
    for (std::size_t w = 0; w < n; ++w)
      if (rand_chance(g, 0.5)) m.set_atom(nth_atom_name(q), m.world_name(w));

  return p.frame == Frame::S5 ? m.s5_closure() : m;
}

}  // namespace dk
