#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <unordered_map>

#include "dk/bisim.hpp"
#include "dk/gallery.hpp"

using dk::Formula;
using dk::Frame;
using dk::KripkeModel;
using dk::Partition;
using dk::WorldSet;

namespace {

// Reference extension function for D-free formulas, independent of the
// semantics module so the characteristic-formula checks stand on their own.
WorldSet ref_ext(const KripkeModel& m, const Formula& f,
                 std::unordered_map<const void*, WorldSet>& memo) {
  auto it = memo.find(f.id());
  if (it != memo.end()) return it->second;
  WorldSet r(m.world_count());
  switch (f.op()) {
    case dk::Op::Atom: r = m.atom_extension(m.atom_index(f.label())); break;
    case dk::Op::True: r = WorldSet::all(m.world_count()); break;
    case dk::Op::Not: r = ref_ext(m, f.child(), memo).complement(); break;
    case dk::Op::Or: r = ref_ext(m, f.child(), memo) | ref_ext(m, f.rhs(), memo); break;
    case dk::Op::Box:
      r = dk::box_preimage(m, m.agent_index(f.label()), ref_ext(m, f.child(), memo));
      break;
    case dk::Op::D: throw dk::Error("reference evaluator is D-free");
  }
  memo.emplace(f.id(), r);
  return r;
}

WorldSet ref_ext(const KripkeModel& m, const Formula& f) {
  std::unordered_map<const void*, WorldSet> memo;
  return ref_ext(m, f, memo);
}

WorldSet names_to_set(const KripkeModel& m, const std::vector<std::string>& names) {
  WorldSet s(m.world_count());
  for (const auto& n : names) s.set(m.world_index(n));
  return s;
}

const KripkeModel& six() {
  static const KripkeModel m = dk::gallery_model("appendix_a").model;
  return m;
}

}  // namespace

TEST_CASE("six-world model splits into the two valuation classes over {p}") {
  Partition part(six(), {"p"});
  REQUIRE(part.class_count() == 2);
  CHECK(part.class_set(part.class_of(six().world_index("s1"))) ==
        names_to_set(six(), {"s1", "s2", "s3"}));
  CHECK(part.class_set(part.class_of(six().world_index("t1"))) ==
        names_to_set(six(), {"t1", "t2", "t3"}));
}

TEST_CASE("empty vocabulary collapses the six-world model to one class") {
  Partition part(six(), {});
  CHECK(part.class_count() == 1);
  CHECK(part.class_set(0) == WorldSet::all(6));
}

TEST_CASE("intro model has singleton classes over {p,q}") {
  const KripkeModel& m = dk::gallery_model("intro").model;
  Partition part(m, {"p", "q"});
  CHECK(part.class_count() == 4);
}

TEST_CASE("partition rejects undeclared vocabulary") {
  CHECK_THROWS_AS(Partition(six(), {"zz"}), dk::ModelError);
}

TEST_CASE("closure adds exactly the touched classes") {
  Partition part(six(), {"p"});
  CHECK(part.closure(names_to_set(six(), {"s2", "t2"})) == WorldSet::all(6));
  CHECK(part.closure(names_to_set(six(), {"s2"})) == names_to_set(six(), {"s1", "s2", "s3"}));
  CHECK(part.closure(WorldSet(6)) == WorldSet(6));
  CHECK(part.definable(names_to_set(six(), {"s1", "s2", "s3"})));
  CHECK_FALSE(part.definable(names_to_set(six(), {"s2"})));
}

TEST_CASE("closure is extensive, monotone and idempotent") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    KripkeModel m = dk::random_model({seed, 5, 2, 2, 0.4, seed % 2 ? Frame::S5 : Frame::K});
    Partition part(m, m.atoms());
    std::mt19937_64 g(seed * 17 + 1);
    for (int i = 0; i < 10; ++i) {
      WorldSet x(m.world_count()), y(m.world_count());
      for (std::size_t w = 0; w < m.world_count(); ++w) {
        if (dk::rand_chance(g, 0.4)) x.set(w);
        if (dk::rand_chance(g, 0.4)) y.set(w);
      }
      WorldSet cx = part.closure(x);
      CHECK(x.subset_of(cx));
      CHECK(part.closure(cx) == cx);
      CHECK(part.closure(x | y) == (part.closure(x) | part.closure(y)));
      if (x.subset_of(y)) CHECK(cx.subset_of(part.closure(y)));
    }
  }
}

TEST_CASE("partitions are stable under one more refinement step") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    KripkeModel m = dk::random_model({seed, 6, 2, 2, 0.3, seed % 2 ? Frame::S5 : Frame::K});
    Partition part(m, m.atoms());
    for (std::size_t c = 0; c < part.class_count(); ++c) {
      for (std::size_t a = 0; a < m.agents().size(); ++a) {
        for (std::size_t c2 = 0; c2 < part.class_count(); ++c2) {
          int with = 0, members = 0;
          for (auto w : part.class_set(c).members()) {
            ++members;
            if (m.successors(a, w).intersects(part.class_set(c2))) ++with;
          }
          INFO("class " << c << " agent " << a << " target " << c2);
          CHECK((with == 0 || with == members));
        }
      }
    }
  }
}

TEST_CASE("pointwise bisimilarity matches shared partition classes") {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    KripkeModel m = dk::random_model({seed, 5, 2, 1, 0.4, seed % 2 ? Frame::S5 : Frame::K});
    Partition part(m, m.atoms());
    for (std::size_t w = 0; w < m.world_count(); ++w)
      for (std::size_t v = 0; v < m.world_count(); ++v) {
        bool same = part.class_of(w) == part.class_of(v);
        CHECK(dk::bisimilar(m, m.world_name(w), m, m.world_name(v), m.atoms()) == same);
      }
  }
}

TEST_CASE("six-world bisimilarity facts") {
  const KripkeModel& m = six();
  CHECK(dk::bisimilar(m, "s1", m, "s3", {"p"}));
  CHECK(dk::bisimilar(m, "t1", m, "t2", {"p"}));
  CHECK_FALSE(dk::bisimilar(m, "s1", m, "t1", {"p"}));
  for (const auto& w : m.worlds()) CHECK(dk::bisimilar(m, w, m, w, {"p"}));
}

TEST_CASE("quotient of the six-world model is bisimilar to it") {
  // Two worlds, both relations total, p on exactly one: the {p}-quotient.
  KripkeModel q({"P", "N"}, {"a", "b"}, {"p"}, Frame::K);
  q.set_atom("p", "P");
  q.add_edge("a", "P", "N");
  q.add_edge("b", "P", "N");
  q = q.s5_closure();
  CHECK(dk::bisimilar(six(), "s2", q, "P", {"p"}));
  CHECK(dk::bisimilar(six(), "t3", q, "N", {"p"}));
  CHECK_FALSE(dk::bisimilar(six(), "s2", q, "N", {"p"}));

  // Same shape but with an identity relation for b: no longer bisimilar.
  KripkeModel moore = dk::gallery_model("moore").model;
  CHECK_FALSE(dk::bisimilar(six(), "s2", moore, "w1", {"p"}));
}

TEST_CASE("bisimilarity distinguishes dangling successors on K frames") {
  KripkeModel m({"w0", "w1"}, {"a"}, {}, Frame::K);
  m.add_edge("a", "w0", "w1");
  KripkeModel n({"v0", "v1", "v2"}, {"a"}, {}, Frame::K);
  n.add_edge("a", "v0", "v1");
  n.add_edge("a", "v1", "v2");
  CHECK_FALSE(dk::bisimilar(m, "w0", n, "v0", {}));
  CHECK(dk::bisimilar(m, "w1", n, "v2", {}));
  CHECK(dk::bisimilar(m, "w0", n, "v1", {}));
}

TEST_CASE("bisimilar requires the vocabulary in both models") {
  CHECK_THROWS_AS(dk::bisimilar(six(), "s1", dk::gallery_model("intro").model, "pq", {"q"}),
                  dk::ModelError);
}

TEST_CASE("characteristic formulas carve out exactly their class") {
  Partition part(six(), {"p"});
  for (std::size_t c = 0; c < part.class_count(); ++c) {
    Formula chi = dk::characteristic_formula(six(), part, c);
    CHECK(dk::meta(chi).is_l0);
    CHECK(ref_ext(six(), chi) == part.class_set(c));
  }

  for (std::uint64_t seed = 300; seed < 330; ++seed) {
    KripkeModel m = dk::random_model({seed, 5, 2, 1, 0.35, seed % 2 ? Frame::S5 : Frame::K});
    Partition part2(m, m.atoms());
    for (std::size_t c = 0; c < part2.class_count(); ++c) {
      Formula chi = dk::characteristic_formula(m, part2, c);
      INFO("seed " << seed << " class " << c);
      CHECK(ref_ext(m, chi) == part2.class_set(c));
    }
  }

  CHECK_THROWS_AS(dk::characteristic_formula(six(), part, 9), dk::Error);
}
