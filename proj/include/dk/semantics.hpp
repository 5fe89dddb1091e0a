#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dk/bisim.hpp"
#include "dk/errors.hpp"
#include "dk/formula.hpp"
#include "dk/kripke.hpp"
#include "dk/variant.hpp"
#include "dk/world_set.hpp"

namespace dk {

// What each agent announces, keyed by agent name. Kept ordered so printed
// share tuples are stable.
using ShareTuple = std::map<std::string, WorldSet>;

// Strongest announceable contribution of each group member at s: the coarsest
// definable set covering what the agent considers possible. Announcements are
// drawn from the D-free language over the model's declared atoms, and over
// that language a set is expressible exactly when it is a union of partition
// classes, so the strongest known formula has the closure of the accessible
// set as its extension.
inline ShareTuple maximal_shares(const KripkeModel& m, const Partition& part, std::size_t s,
                                 const std::vector<std::size_t>& group) {
  ShareTuple out;
  for (auto a : group) out[m.agents()[a]] = part.closure(m.successors(a, s));
  return out;
}

inline ShareTuple maximal_shares(const KripkeModel& m, const std::string& world,
                                 const std::vector<std::string>& group) {
  Partition part(m, m.atoms());
  return maximal_shares(m, part, m.world_index(world), detail::resolve_group(m, group));
}

// Relations pooled directly: the group knows the target iff the intersection
// of the members' accessible sets lies inside it. The quantifier dimension is
// irrelevant here because all members end up with the same pooled relation.
inline bool dk_intersection(const KripkeModel& m, std::size_t s,
                            const std::vector<std::size_t>& group, const WorldSet& target) {
  WorldSet pooled = WorldSet::all(m.world_count());
  for (auto a : group) pooled &= m.successors(a, s);
  return pooled.subset_of(target);
}

namespace detail {

inline bool quantified_learning(const KripkeModel& m, std::size_t s,
                                const std::vector<std::size_t>& group, const WorldSet& common,
                                const WorldSet& target, QuantMode q) {
  for (auto b : group) {
    bool learns = (m.successors(b, s) & common).subset_of(target);
    if (q == QuantMode::All && !learns) return false;
    if (q == QuantMode::Some && learns) return true;
  }
  return q == QuantMode::All;
}

}  // namespace detail

// One simultaneous round: everyone announces at once, then updates on the
// conjunction of all announcements. Legal share tuples are ordered pointwise
// and the learning test is antitone in the pooled extension, so checking the
// tuple of strongest shares decides the existential over all tuples.
inline bool dk_simultaneous(const KripkeModel& m, const Partition& part, std::size_t s,
                            const std::vector<std::size_t>& group, const WorldSet& target,
                            QuantMode q) {
  WorldSet x = WorldSet::all(m.world_count());
  for (auto a : group) x &= part.closure(m.successors(a, s));
  return detail::quantified_learning(m, s, group, x, target, q);
}

// Finite sequences where each member speaks exactly once, in some order. For
// a fixed order the strongest announcement at every turn dominates all other
// choices, so only the orders need enumerating.
inline bool dk_sequential_single(const KripkeModel& m, const Partition& part, std::size_t s,
                                 const std::vector<std::size_t>& group, const WorldSet& target,
                                 QuantMode q) {
  if (group.size() > 8)
    throw BoundError("refusing to enumerate " + std::to_string(group.size()) +
                     "! speaking orders (bound is 8)");
  std::vector<std::size_t> order(group.begin(), group.end());
  std::sort(order.begin(), order.end());
  do {
    WorldSet common = WorldSet::all(m.world_count());
    for (auto spk : order) common &= part.closure(m.successors(spk, s) & common);
    if (detail::quantified_learning(m, s, group, common, target, q)) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

// Unbounded sequences drawn from each member's full stock of known formulas.
// Refining round-robin with the strongest remaining announcement reaches the
// least reachable common ground; every protocol, of any length and order,
// stays above it, so testing there decides the existential. The extensions of
// finite and transfinite protocols coincide on finite models because the
// descending chain of common grounds stabilizes after finitely many steps;
// the mode parameter only records which reading was requested.
inline bool dk_sequential_sets(const KripkeModel& m, const Partition& part, std::size_t s,
                               const std::vector<std::size_t>& group, const WorldSet& target,
                               OrderMode mode, QuantMode q) {
  if (mode != OrderMode::SeqOmega && mode != OrderMode::SeqTransfinite)
    throw Error("sequential-set evaluation needs a sequential order mode");
  WorldSet common = WorldSet::all(m.world_count());
  for (bool changed = true; changed;) {
    changed = false;
    for (auto a : group) {
      WorldSet next = common & part.closure(m.successors(a, s) & common);
      if (next != common) {
        common = next;
        changed = true;
      }
    }
  }
  return detail::quantified_learning(m, s, group, common, target, q);
}

// Evaluates one taxonomy point at one world against an arbitrary target set.
inline bool dk_holds(const KripkeModel& m, const Partition& part, std::size_t s,
                     const std::vector<std::size_t>& group, const WorldSet& target,
                     const Variant& v) {
  if (group.empty()) throw ModelError("agent group must be non-empty");
  switch (v.f) {
    case FormMode::Cap:
      return dk_intersection(m, s, group, target);
    case FormMode::L0:
      break;
  }
  if (v.o == OrderMode::Sim) return dk_simultaneous(m, part, s, group, target, v.q);
  if (v.a == AmountMode::Single) return dk_sequential_single(m, part, s, group, target, v.q);
  return dk_sequential_sets(m, part, s, group, target, v.o, v.q);
}

inline bool dk_holds(const KripkeModel& m, const std::string& world,
                     const std::vector<std::string>& group, const WorldSet& target,
                     const Variant& v) {
  Partition part(m, m.atoms());
  return dk_holds(m, part, m.world_index(world), detail::resolve_group(m, group), target, v);
}

// Formula evaluation under a chosen variant. Extensions are memoized per
// structural node, so shared subtrees are evaluated once; the atom partition
// backing the announcement language is built lazily on the first group
// operator encountered.
class Evaluator {
 public:
  Evaluator(const KripkeModel& m, const Variant& v) : m_(m), v_(v) {}

  const WorldSet& extension(const Formula& f) {
    auto it = memo_.find(f.id());
    if (it != memo_.end()) return it->second;
    WorldSet e = compute(f);
    return memo_.emplace(f.id(), std::move(e)).first->second;
  }

  bool eval(std::size_t world, const Formula& f) {
    if (world >= m_.world_count()) throw ModelError("world index out of range");
    return extension(f).test(world);
  }

  const KripkeModel& model() const { return m_; }
  const Variant& variant() const { return v_; }

 private:
  WorldSet compute(const Formula& f) {
    switch (f.op()) {
      case Op::Atom: {
        auto p = m_.find_atom(f.label());
        if (!p) throw ModelError("formula mentions undeclared atom '" + f.label() + "'");
        return m_.atom_extension(*p);
      }
      case Op::True:
        return WorldSet::all(m_.world_count());
      case Op::Not:
        return extension(f.child()).complement();
      case Op::Or:
        return extension(f.child()) | extension(f.rhs());
      case Op::Box: {
        auto a = m_.find_agent(f.label());
        if (!a) throw ModelError("formula mentions undeclared agent '" + f.label() + "'");
        return box_preimage(m_, *a, extension(f.child()));
      }
      case Op::D: {
        auto group = detail::resolve_group(m_, f.group());
        const WorldSet& target = extension(f.child());
        WorldSet out(m_.world_count());
        for (std::size_t s = 0; s < m_.world_count(); ++s)
          if (dk_holds(m_, partition(), s, group, target, v_)) out.set(s);
        return out;
      }
    }
    throw Error("unreachable formula operator");
  }

  const Partition& partition() {
    if (!part_) part_.emplace(m_, m_.atoms());
    return *part_;
  }

  const KripkeModel& m_;
  Variant v_;
  std::unordered_map<const void*, WorldSet> memo_;
  std::optional<Partition> part_;
};

inline WorldSet extension(const KripkeModel& m, const Formula& f, const Variant& v) {
  return Evaluator(m, v).extension(f);
}

inline bool eval(const KripkeModel& m, const std::string& world, const Formula& f,
                 const Variant& v) {
  return Evaluator(m, v).eval(m.world_index(world), f);
}

// One witness formula per distinct extension of a D-free formula of modal
// depth at most max_depth, sorted by extension. Level-wise and semantic:
// depth 0 is the boolean closure of the atoms, each further level adds box
// preimages of everything so far and recloses, and a level that adds no new
// extension ends the search early, since deeper formulas can only combine
// extensions already present. The family is capped by the number of world
// subsets, so models beyond 12 worlds are refused.
inline std::vector<std::pair<Formula, WorldSet>> enumerate_formulas(const KripkeModel& m,
                                                                    int max_depth) {
  if (m.world_count() > 12)
    throw BoundError("refusing to enumerate formula extensions over " +
                     std::to_string(m.world_count()) + " worlds (bound is 12)");
  if (max_depth < 0) throw Error("formula depth must be non-negative");

  std::map<WorldSet, Formula> reps;
  auto offer = [&](WorldSet e, const Formula& f) { reps.emplace(std::move(e), f); };

  offer(WorldSet::all(m.world_count()), Formula::truth());
  for (std::size_t p = 0; p < m.atoms().size(); ++p)
    offer(m.atom_extension(p), Formula::atom(m.atoms()[p]));

  auto reclose = [&] {
    for (bool grew = true; grew;) {
      grew = false;
      std::vector<std::pair<WorldSet, Formula>> snap(reps.begin(), reps.end());
      std::size_t before = reps.size();
      for (const auto& [e, f] : snap) {
        offer(e.complement(), Formula::negation(f));
        for (const auto& [e2, f2] : snap) offer(e | e2, Formula::disjunction(f, f2));
      }
      grew = reps.size() > before;
    }
  };
  reclose();

  for (int level = 1; level <= max_depth; ++level) {
    std::vector<std::pair<WorldSet, Formula>> snap(reps.begin(), reps.end());
    std::size_t before = reps.size();
    for (const auto& [e, f] : snap)
      for (std::size_t a = 0; a < m.agents().size(); ++a)
        offer(box_preimage(m, a, e), Formula::box(m.agents()[a], f));
    if (reps.size() == before) break;
    reclose();
  }

  std::vector<std::pair<Formula, WorldSet>> out;
  out.reserve(reps.size());
  for (const auto& [e, f] : reps) out.emplace_back(f, e);
  return out;
}

// Refined accessibility after a series of public announcements. Worlds are
// never deleted: hearing an announcement splits every agent's accessible sets
// along the announced extension, so each relation only ever shrinks and
// S5 relations stay S5.
struct InfoState {
  std::vector<std::vector<WorldSet>> refined;  // [agent][world]

  static InfoState from_model(const KripkeModel& m) {
    InfoState st;
    st.refined.resize(m.agents().size());
    for (std::size_t a = 0; a < m.agents().size(); ++a) {
      st.refined[a].reserve(m.world_count());
      for (std::size_t w = 0; w < m.world_count(); ++w)
        st.refined[a].push_back(m.successors(a, w));
    }
    return st;
  }

  const WorldSet& successors(std::size_t agent, std::size_t world) const {
    return refined[agent][world];
  }

  bool knows(std::size_t agent, std::size_t world, const WorldSet& target) const {
    return refined[agent][world].subset_of(target);
  }
};

// Applies one public announcement to every agent's refined relation. The
// formula must be D-free; its extension is taken in the original model, the
// same fixed reading the variant semantics give to shares. Returns that
// extension.
inline WorldSet apply_announcement(InfoState& st, const KripkeModel& m, const Formula& f) {
  if (!meta(f).is_l0) throw ModelError("announcements must be D-free");
  WorldSet e = extension(m, f, Variant::intersection());
  WorldSet ce = e.complement();
  for (auto& per_agent : st.refined)
    for (std::size_t w = 0; w < per_agent.size(); ++w)
      per_agent[w] &= e.test(w) ? e : ce;
  return e;
}

struct ScriptStep {
  std::string agent;
  Formula formula;
};

// A script is one announcement per line in the form "agent: formula".
// Blank lines and lines starting with # are skipped.
struct AnnouncementScript {
  std::vector<ScriptStep> steps;

  static AnnouncementScript parse(const std::string& text) {
    AnnouncementScript out;
    std::istringstream in(text);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
      std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos || line[start] == '#') continue;
      auto fail = [no](const std::string& why) -> ParseError {
        return ParseError("script line " + std::to_string(no) + ": " + why);
      };
      std::size_t colon = line.find(':', start);
      if (colon == std::string::npos) throw fail("expected 'agent: formula'");
      std::size_t name_end = line.find_last_not_of(" \t", colon - 1);
      if (colon == start || name_end == std::string::npos || name_end < start)
        throw fail("expected 'agent: formula'");
      std::string agent = line.substr(start, name_end - start + 1);
      Formula f = [&] {
        try {
          return parse_formula(line.substr(colon + 1));
        } catch (const ParseError& e) {
          throw fail(e.what());
        }
      }();
      if (!meta(f).is_l0) throw fail("announcements must be D-free");
      out.steps.push_back({std::move(agent), std::move(f)});
    }
    return out;
  }
};

struct SimulationStep {
  std::string agent;
  Formula formula;
  WorldSet announced;  // extension in the original model
  bool truthful;       // the speaker knew the formula when speaking
};

struct SimulationResult {
  std::vector<SimulationStep> steps;
  InfoState state;  // refined relations after the whole script
  bool all_truthful = true;
};

// Runs a script from the given world. An untruthful step is recorded but
// still applied, so the caller sees the full downstream effect.
inline SimulationResult simulate_script(const KripkeModel& m, const std::string& world,
                                        const AnnouncementScript& script) {
  std::size_t point = m.world_index(world);
  SimulationResult r{{}, InfoState::from_model(m), true};
  for (const auto& s : script.steps) {
    auto speaker = m.find_agent(s.agent);
    if (!speaker) throw ModelError("script mentions undeclared agent '" + s.agent + "'");
    WorldSet e = extension(m, s.formula, Variant::intersection());
    bool truthful = r.state.refined[*speaker][point].subset_of(e);
    apply_announcement(r.state, m, s.formula);
    r.steps.push_back({s.agent, s.formula, std::move(e), truthful});
    r.all_truthful = r.all_truthful && truthful;
  }
  return r;
}

}  // namespace dk
