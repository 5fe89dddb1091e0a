#pragma once

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "dk/bisim.hpp"
#include "dk/errors.hpp"
#include "dk/formula.hpp"
#include "dk/kripke.hpp"
#include "dk/variant.hpp"
#include "dk/world_set.hpp"

namespace dk {

struct OracleBounds {
  int max_free_classes = 16;
};

// Every union of partition classes that contains base. Classes meeting base
// are forced in; each subset of the remaining classes may be added, so the
// result has 2^free members. Refuses to materialize more than
// 2^max_free_classes sets. Output is sorted for determinism.
//
// Over the declared-atom vocabulary these are precisely the extensions of
// D-free announcements available to an agent whose accessible set is base:
// an announcement known at s must cover base, its extension is closed, and
// every closed superset is the extension of a disjunction of characteristic
// formulas.
inline std::vector<WorldSet> enumerate_closed_supersets(const Partition& part,
                                                        const WorldSet& base,
                                                        int max_free_classes = 16) {
  WorldSet forced = part.closure(base);
  std::vector<std::size_t> free_classes;
  for (std::size_t c = 0; c < part.class_count(); ++c)
    if (!part.class_set(c).intersects(base)) free_classes.push_back(c);
  if (free_classes.size() > static_cast<std::size_t>(max_free_classes))
    throw BoundError("refusing to enumerate 2^" + std::to_string(free_classes.size()) +
                     " closed supersets (bound is 2^" + std::to_string(max_free_classes) + ")");

  std::vector<WorldSet> out;
  out.reserve(std::size_t{1} << free_classes.size());
  for (std::size_t mask = 0; mask < (std::size_t{1} << free_classes.size()); ++mask) {
    WorldSet e = forced;
    for (std::size_t i = 0; i < free_classes.size(); ++i)
      if (mask & (std::size_t{1} << i)) e |= part.class_set(free_classes[i]);
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

struct QTest {
  const KripkeModel& m;
  std::size_t s;
  const std::vector<std::size_t>& group;
  const WorldSet& target;
  QuantMode q;

  bool learns(std::size_t agent, const WorldSet& allowed) const {
    return (m.successors(agent, s) & allowed).subset_of(target);
  }

  bool operator()(const WorldSet& allowed) const {
    for (auto b : group) {
      bool k = learns(b, allowed);
      if (q == QuantMode::Some && k) return true;
      if (q == QuantMode::All && !k) return false;
    }
    return q == QuantMode::All;
  }
};

inline bool brute_simultaneous(const KripkeModel& m, const Partition& part, std::size_t s,
                               const std::vector<std::size_t>& group, const WorldSet& target,
                               QuantMode q, const OracleBounds& bounds) {
  QTest qt{m, s, group, target, q};
  std::vector<std::vector<WorldSet>> shares;
  for (auto a : group)
    shares.push_back(enumerate_closed_supersets(part, m.successors(a, s), bounds.max_free_classes));
  // odometer over the share tuple space
  std::vector<std::size_t> pick(group.size(), 0);
  for (;;) {
    WorldSet x = WorldSet::all(m.world_count());
    for (std::size_t i = 0; i < group.size(); ++i) x &= shares[i][pick[i]];
    if (qt(x)) return true;
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == shares[i].size()) pick[i++] = 0;
    if (i == pick.size()) return false;
  }
}

inline bool brute_sequential_single_from(const KripkeModel& m, const Partition& part,
                                         std::size_t s, const std::vector<std::size_t>& order,
                                         std::size_t turn, const WorldSet& allowed,
                                         const QTest& qt, const OracleBounds& bounds) {
  if (turn == order.size()) return qt(allowed);
  WorldSet current = m.successors(order[turn], s) & allowed;
  for (const auto& e : enumerate_closed_supersets(part, current, bounds.max_free_classes))
    if (brute_sequential_single_from(m, part, s, order, turn + 1, allowed & e, qt, bounds))
      return true;
  return false;
}

inline bool brute_sequential_single(const KripkeModel& m, const Partition& part, std::size_t s,
                                    const std::vector<std::size_t>& group, const WorldSet& target,
                                    QuantMode q, const OracleBounds& bounds) {
  QTest qt{m, s, group, target, q};
  std::vector<std::size_t> order = group;  // sorted already
  do {
    if (brute_sequential_single_from(m, part, s, order, 0, WorldSet::all(m.world_count()), qt,
                                     bounds))
      return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

// Sequential protocols with announcement sets never need infinite scripts on
// a finite model: the joint restriction after any script is an intersection
// of closed sets, of which there are finitely many, and any such state is
// reached by some finite script. So the search walks the reachable
// restriction states instead of materializing scripts; transfinite length
// adds no further states, which is why omega and Omega share this search.
inline bool brute_sequential_sets(const KripkeModel& m, const Partition& part, std::size_t s,
                                  const std::vector<std::size_t>& group, const WorldSet& target,
                                  QuantMode q, const OracleBounds& bounds) {
  QTest qt{m, s, group, target, q};
  std::set<WorldSet> seen;
  std::deque<WorldSet> frontier;
  frontier.push_back(WorldSet::all(m.world_count()));
  seen.insert(frontier.back());
  while (!frontier.empty()) {
    WorldSet e = std::move(frontier.front());
    frontier.pop_front();
    if (qt(e)) return true;
    for (auto a : group) {
      WorldSet current = m.successors(a, s) & e;
      for (const auto& share : enumerate_closed_supersets(part, current, bounds.max_free_classes)) {
        WorldSet next = e & share;
        if (seen.insert(next).second) frontier.push_back(next);
      }
    }
  }
  return false;
}

}  // namespace detail

// Literal existential search over announcement choices, following the variant
// definitions step by step. Intended as the trusted reference for the fast
// algorithms, not for large inputs.
inline bool brute_force_dk(const KripkeModel& m, const Partition& part, const std::string& s,
                           const std::vector<std::string>& group, const WorldSet& target,
                           const Variant& v, const OracleBounds& bounds = {}) {
  std::size_t si = m.world_index(s);
  auto g = detail::resolve_group(m, group);

  if (v.f == FormMode::Cap) {
    WorldSet n = WorldSet::all(m.world_count());
    for (auto b : g) n &= m.successors(b, si);
    return n.subset_of(target);  // the same relation serves every member, so q is moot
  }
  switch (v.o) {
    case OrderMode::Sim:
      // a set of formulas known at s restricts exactly like the single
      // formula given by its conjunction, so both amounts share one search
      return detail::brute_simultaneous(m, part, si, g, target, v.q, bounds);
    case OrderMode::SeqOmega:
      if (v.a == AmountMode::Single)
        return detail::brute_sequential_single(m, part, si, g, target, v.q, bounds);
      return detail::brute_sequential_sets(m, part, si, g, target, v.q, bounds);
    case OrderMode::SeqTransfinite:
      return detail::brute_sequential_sets(m, part, si, g, target, v.q, bounds);
    default:
      throw Error("variant " + v.str() + " is not in the taxonomy");
  }
}

inline bool brute_force_dk(const KripkeModel& m, const std::string& s,
                           const std::vector<std::string>& group, const WorldSet& target,
                           const Variant& v, const OracleBounds& bounds = {}) {
  Partition part(m, m.atoms());
  return brute_force_dk(m, part, s, group, target, v, bounds);
}

}  // namespace dk
