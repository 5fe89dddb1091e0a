#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "dk/errors.hpp"
#include "dk/kripke.hpp"
#include "dk/world_set.hpp"

namespace dk {

inline std::vector<std::string> gallery_names() { return {"appendix_a", "moore", "intro"}; }

// Three small S5 models used throughout the tests and the demo subcommands.
//
// appendix_a: six worlds s1..s3, t1..t3 with p exactly on the s-worlds.
//   Agent a partitions them into {s1,t1}, {s2,t2}, {s3,t3}; agent b into
//   {s1,s2,t1}, {s3,t2,t3}. Pointed at s2. The two agents could identify the
//   p-worlds by pooling their raw relations, but no exchange of D-free
//   formulas helps them: over atom vocabulary {p} every world of a class
//   looks like every other, so all announcements are trivial.
//
// moore: two worlds, p at w1 only; a considers both possible, b only the
//   actual one. Pointed at w1. At w1 the sentence p & ~[a]p is true but
//   unlearnable by a alone; b can hand it over.
//
// intro: four worlds named by their valuation over {p, q}. Agent a knows
//   whether p -> q, agent b knows whether p. Pointed at the pq-world, where
//   neither alone knows q but together they can derive it.
inline PointedModel gallery_model(const std::string& requested) {
  std::string name = requested;
  std::replace(name.begin(), name.end(), '-', '_');

  if (name == "appendix_a") {
    KripkeModel m({"s1", "s2", "s3", "t1", "t2", "t3"}, {"a", "b"}, {"p"}, Frame::K);
    for (const auto* w : {"s1", "s2", "s3"}) m.set_atom("p", w);
    m.add_edge("a", "s1", "t1");
    m.add_edge("a", "s2", "t2");
    m.add_edge("a", "s3", "t3");
    m.add_edge("b", "s1", "t1");
    m.add_edge("b", "s3", "t3");
    m.add_edge("b", "s1", "s2");
    m.add_edge("b", "t1", "s2");
    m.add_edge("b", "s3", "t2");
    m.add_edge("b", "t2", "t3");
    return {m.s5_closure(), "s2"};
  }
  if (name == "moore") {
    KripkeModel m({"w1", "w2"}, {"a", "b"}, {"p"}, Frame::K);
    m.set_atom("p", "w1");
    m.add_edge("a", "w1", "w2");
    return {m.s5_closure(), "w1"};
  }
  if (name == "intro") {
    KripkeModel m({"pq", "p", "q", "neither"}, {"a", "b"}, {"p", "q"}, Frame::K);
    m.set_atom("p", "pq");
    m.set_atom("p", "p");
    m.set_atom("q", "pq");
    m.set_atom("q", "q");
    // a's cells: {pq, q, neither} (p -> q holds) and {p}
    m.add_edge("a", "pq", "q");
    m.add_edge("a", "q", "neither");
    // b's cells: {pq, p} and {q, neither}
    m.add_edge("b", "pq", "p");
    m.add_edge("b", "q", "neither");
    return {m.s5_closure(), "pq"};
  }
  throw Error("unknown gallery model '" + requested + "'; available: appendix_a, moore, intro");
}

// A family of candidate extensions over a fixed world universe, kept sorted
// and duplicate-free. Closure properties are checked where needed, never
// assumed.
class ExtensionSet {
 public:
  explicit ExtensionSet(std::size_t universe) : universe_(universe) {}

  static ExtensionSet powerset(std::size_t universe) {
    if (universe > 16)
      throw BoundError("refusing to materialize 2^" + std::to_string(universe) + " extensions");
    ExtensionSet out(universe);
    for (std::size_t mask = 0; mask < (std::size_t{1} << universe); ++mask) {
      WorldSet e(universe);
      for (std::size_t i = 0; i < universe; ++i)
        if (mask & (std::size_t{1} << i)) e.set(i);
      out.add(e);
    }
    return out;
  }

  std::size_t universe() const { return universe_; }

  void add(const WorldSet& e) {
    if (e.size() != universe_) throw Error("extension universe mismatch");
    auto it = std::lower_bound(sets_.begin(), sets_.end(), e);
    if (it == sets_.end() || *it != e) sets_.insert(it, e);
  }

  bool contains(const WorldSet& e) const {
    return std::binary_search(sets_.begin(), sets_.end(), e);
  }

  const std::vector<WorldSet>& sets() const { return sets_; }

 private:
  std::size_t universe_;
  std::vector<WorldSet> sets_;
};

// Worlds where the group operator holds when announcements may only be drawn
// from the given pool: s qualifies iff each a in G can pick a pool member
// covering its accessible set such that, under the joint restriction, every
// member of G ends up knowing the target.
inline WorldSet circular_d_extension(const KripkeModel& m, const std::vector<std::string>& group,
                                     const WorldSet& target, const ExtensionSet& pool) {
  if (pool.universe() != m.world_count()) throw Error("extension universe mismatch");
  auto g = detail::resolve_group(m, group);
  WorldSet out(m.world_count());
  for (std::size_t s = 0; s < m.world_count(); ++s) {
    // per-agent candidate shares
    std::vector<std::vector<const WorldSet*>> choices;
    bool stuck = false;
    for (auto a : g) {
      choices.emplace_back();
      for (const auto& e : pool.sets())
        if (m.successors(a, s).subset_of(e)) choices.back().push_back(&e);
      if (choices.back().empty()) {
        stuck = true;
        break;
      }
    }
    if (stuck) continue;
    std::vector<std::size_t> pick(g.size(), 0);
    for (;;) {
      WorldSet x = WorldSet::all(m.world_count());
      for (std::size_t i = 0; i < g.size(); ++i) x &= *choices[i][pick[i]];
      bool everyone = true;
      for (auto b : g)
        if (!(m.successors(b, s) & x).subset_of(target)) {
          everyone = false;
          break;
        }
      if (everyone) {
        out.set(s);
        break;
      }
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == choices[i].size()) pick[i++] = 0;
      if (i == pick.size()) break;
    }
  }
  return out;
}

struct SelfFulfillingReport {
  bool verdict = false;                   // family is exactly the generated language
  bool generated_within_family = false;   // no formula escapes the family
  bool family_within_generated = false;   // no family member is unreachable
  std::vector<WorldSet> escaping;         // generated but not in the family
  std::vector<WorldSet> unreachable;      // in the family but never generated
  std::vector<WorldSet> generated;        // the full generated language
};

// Closes the atomic extensions under complement, union, per-agent box
// preimage and the circular group operator over every non-empty agent group,
// with the candidate family itself serving as the announcement pool. The
// family is self-fulfilling when that closure reproduces it exactly; both
// inclusion directions are reported so a failing family shows what escaped
// or what was unreachable.
inline SelfFulfillingReport verify_self_fulfilling(const KripkeModel& m,
                                                   const ExtensionSet& family) {
  if (family.universe() != m.world_count()) throw Error("extension universe mismatch");
  const std::size_t n_agents = m.agents().size();
  if (n_agents > 8)
    throw BoundError("refusing to close over 2^" + std::to_string(n_agents) + " agent groups");

  std::set<WorldSet> gen;
  gen.insert(WorldSet::all(m.world_count()));  // extension of "true"
  for (std::size_t p = 0; p < m.atoms().size(); ++p) gen.insert(m.atom_extension(p));

  std::vector<std::vector<std::string>> groups;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n_agents); ++mask) {
    groups.emplace_back();
    for (std::size_t a = 0; a < n_agents; ++a)
      if (mask & (std::size_t{1} << a)) groups.back().push_back(m.agents()[a]);
  }

  for (bool grew = true; grew;) {
    grew = false;
    std::vector<WorldSet> snapshot(gen.begin(), gen.end());
    auto offer = [&](const WorldSet& e) {
      if (gen.insert(e).second) grew = true;
    };
    for (const auto& x : snapshot) {
      offer(x.complement());
      for (std::size_t a = 0; a < n_agents; ++a) offer(box_preimage(m, a, x));
      for (const auto& g : groups) offer(circular_d_extension(m, g, x, family));
      for (const auto& y : snapshot) offer(x | y);
    }
  }

  SelfFulfillingReport r;
  r.generated.assign(gen.begin(), gen.end());
  for (const auto& e : r.generated)
    if (!family.contains(e)) r.escaping.push_back(e);
  for (const auto& e : family.sets())
    if (!gen.count(e)) r.unreachable.push_back(e);
  r.generated_within_family = r.escaping.empty();
  r.family_within_generated = r.unreachable.empty();
  r.verdict = r.generated_within_family && r.family_within_generated;
  return r;
}

}  // namespace dk
