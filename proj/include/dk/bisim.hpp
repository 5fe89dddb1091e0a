#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dk/errors.hpp"
#include "dk/formula.hpp"
#include "dk/kripke.hpp"
#include "dk/world_set.hpp"

namespace dk {

// Coarsest partition of a model's worlds that (1) separates worlds differing
// on any atom of Q and (2) is stable: for every class C, agent a and class C',
// either every member of C has an a-successor in C' or none does. Classes of
// this partition are exactly the Q-bisimulation classes of the model.
//
// Determinism: worlds are scanned in index order and a fresh signature gets
// the next class id, so class ids are ordered by least member and repeated
// runs produce identical partitions.
class Partition {
 public:
  Partition(const KripkeModel& m, std::vector<std::string> q_atoms)
      : world_count_(m.world_count()) {
    std::sort(q_atoms.begin(), q_atoms.end());
    q_atoms.erase(std::unique(q_atoms.begin(), q_atoms.end()), q_atoms.end());
    for (const auto& p : q_atoms)
      if (!m.find_atom(p)) throw ModelError("undeclared atom '" + p + "' in partition vocabulary");
    atoms_ = std::move(q_atoms);

    const std::size_t n = m.world_count();
    class_of_.assign(n, 0);

    // Seed with the Q-valuation profile.
    {
      std::map<std::vector<bool>, std::size_t> ids;
      for (std::size_t w = 0; w < n; ++w) {
        std::vector<bool> profile;
        for (const auto& p : atoms_) profile.push_back(m.atom_extension(m.atom_index(p)).test(w));
        class_of_[w] = ids.emplace(std::move(profile), ids.size()).first->second;
      }
      count_ = ids.size();
    }

    // Refine by per-agent successor-class profiles until stable.
    for (;;) {
      std::map<std::vector<std::size_t>, std::size_t> ids;
      std::vector<std::size_t> next(n);
      for (std::size_t w = 0; w < n; ++w) {
        std::vector<std::size_t> sig;
        sig.push_back(class_of_[w]);
        for (std::size_t a = 0; a < m.agents().size(); ++a) {
          std::set<std::size_t> seen;
          for (auto v : m.successors(a, w).members()) seen.insert(class_of_[v]);
          sig.push_back(seen.size());
          sig.insert(sig.end(), seen.begin(), seen.end());
        }
        next[w] = ids.emplace(std::move(sig), ids.size()).first->second;
      }
      if (ids.size() == count_) break;
      count_ = ids.size();
      class_of_ = std::move(next);
    }

    classes_.assign(count_, WorldSet(n));
    for (std::size_t w = 0; w < n; ++w) classes_[class_of_[w]].set(w);
  }

  std::size_t world_count() const { return world_count_; }
  std::size_t class_count() const { return count_; }
  std::size_t class_of(std::size_t world) const { return class_of_[world]; }
  const WorldSet& class_set(std::size_t c) const { return classes_[c]; }
  const std::vector<WorldSet>& classes() const { return classes_; }
  const std::vector<std::string>& atoms() const { return atoms_; }

  // Union of all classes meeting x: the least superset of x that is a union
  // of classes. closure(x) == x iff x is definable over this vocabulary.
  WorldSet closure(const WorldSet& x) const {
    WorldSet out(world_count_);
    for (const auto& c : classes_)
      if (c.intersects(x)) out |= c;
    return out;
  }

  bool definable(const WorldSet& x) const { return closure(x) == x; }

 private:
  std::size_t world_count_;
  std::vector<std::string> atoms_;
  std::vector<std::size_t> class_of_;
  std::vector<WorldSet> classes_;
  std::size_t count_ = 0;
};

// Q-bisimilarity of two pointed models, decided by refining their disjoint
// union. Q must be declared in both models. Agents present in only one model
// keep an empty relation on the other side, which makes a world with any
// successors for such an agent distinguishable from every world of the other
// model, as it should be.
inline bool bisimilar(const KripkeModel& m, const std::string& s,
                      const KripkeModel& n, const std::string& t,
                      const std::vector<std::string>& q_atoms) {
  for (const auto& p : q_atoms)
    if (!m.find_atom(p) || !n.find_atom(p))
      throw ModelError("atom '" + p + "' must be declared in both models");
  std::size_t si = m.world_index(s);
  std::size_t ti = n.world_index(t);

  std::vector<std::string> worlds;
  for (const auto& w : m.worlds()) worlds.push_back("L:" + w);
  for (const auto& w : n.worlds()) worlds.push_back("R:" + w);
  std::set<std::string> agent_union(m.agents().begin(), m.agents().end());
  agent_union.insert(n.agents().begin(), n.agents().end());
  std::set<std::string> atom_union(m.atoms().begin(), m.atoms().end());
  atom_union.insert(n.atoms().begin(), n.atoms().end());

  KripkeModel u(worlds,
                std::vector<std::string>(agent_union.begin(), agent_union.end()),
                std::vector<std::string>(atom_union.begin(), atom_union.end()), Frame::K);
  const std::size_t off = m.world_count();
  for (const auto& [model, offset] : {std::pair<const KripkeModel*, std::size_t>{&m, 0},
                                      {&n, off}}) {
    for (std::size_t a = 0; a < model->agents().size(); ++a) {
      std::size_t ua = u.agent_index(model->agents()[a]);
      for (std::size_t w = 0; w < model->world_count(); ++w)
        for (auto v : model->successors(a, w).members())
          u.add_edge(ua, offset + w, offset + v);
    }
    for (std::size_t p = 0; p < model->atoms().size(); ++p)
      for (auto w : model->atom_extension(p).members())
        u.set_atom(model->atoms()[p], u.world_name(offset + w));
  }

  Partition part(u, q_atoms);
  return part.class_of(si) == part.class_of(off + ti);
}

namespace detail {

inline Formula conj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return Formula::truth();
  Formula out = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) out = Formula::conjunction(out, fs[i]);
  return out;
}

inline Formula disj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return Formula::falsity();
  Formula out = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) out = Formula::disjunction(out, fs[i]);
  return out;
}

}  // namespace detail

// D-free formula whose extension in m is exactly the given class. Built in
// world_count rounds; round k conjoins the class's atom literals with, per
// agent, a box over the disjunction of the round-(k-1) formulas of successor
// classes and one diamond per successor class. Subtrees are shared, so the
// result is a small DAG even though its printed form would be large.
inline Formula characteristic_formula(const KripkeModel& m, const Partition& part,
                                      std::size_t class_index) {
  if (class_index >= part.class_count()) throw Error("characteristic_formula: no such class");
  const std::size_t rounds = m.world_count();
  const std::size_t k = part.class_count();

  // atom profile per class
  std::vector<Formula> profile;
  profile.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<Formula> lits;
    std::size_t w = part.class_set(c).members().front();
    for (const auto& p : part.atoms()) {
      Formula lit = Formula::atom(p);
      if (!m.atom_extension(m.atom_index(p)).test(w)) lit = Formula::negation(lit);
      lits.push_back(lit);
    }
    profile.push_back(detail::conj_all(lits));
  }

  // successor classes per (agent, class); stability makes the member choice irrelevant
  std::vector<std::vector<std::vector<std::size_t>>> succ(m.agents().size());
  for (std::size_t a = 0; a < m.agents().size(); ++a) {
    succ[a].resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t w = part.class_set(c).members().front();
      std::set<std::size_t> seen;
      for (auto v : m.successors(a, w).members()) seen.insert(part.class_of(v));
      succ[a][c].assign(seen.begin(), seen.end());
    }
  }

  std::vector<Formula> prev = profile;
  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<Formula> cur;
    cur.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<Formula> parts{profile[c]};
      for (std::size_t a = 0; a < m.agents().size(); ++a) {
        std::vector<Formula> succ_forms;
        for (auto c2 : succ[a][c]) succ_forms.push_back(prev[c2]);
        parts.push_back(Formula::box(m.agents()[a], detail::disj_all(succ_forms)));
        for (auto& f : succ_forms) parts.push_back(Formula::diamond(m.agents()[a], f));
      }
      cur.push_back(detail::conj_all(parts));
    }
    prev = std::move(cur);
  }
  return prev[class_index];
}

}  // namespace dk
