#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "dk/kripke.hpp"

using dk::Frame;
using dk::GeneratorParams;
using dk::KripkeModel;
using dk::WorldSet;

namespace {

std::set<std::string> succ_names(const KripkeModel& m, const std::string& agent,
                                 const std::string& world) {
  auto v = m.names_of(m.successors(m.agent_index(agent), m.world_index(world)));
  return {v.begin(), v.end()};
}

// Six worlds, p on the s-side, a pairs s_i with t_i, b glues {s1,s2,t1} and
// {s3,t2,t3}; edges as drawn before closure.
KripkeModel six_world_edges() {
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
  return m;
}

}  // namespace

TEST_CASE("s5_closure turns drawn edges into the expected cells") {
  KripkeModel m = six_world_edges().s5_closure();
  CHECK(m.frame() == Frame::S5);
  CHECK(succ_names(m, "a", "s1") == std::set<std::string>{"s1", "t1"});
  CHECK(succ_names(m, "a", "s2") == std::set<std::string>{"s2", "t2"});
  CHECK(succ_names(m, "a", "s3") == std::set<std::string>{"s3", "t3"});
  CHECK(succ_names(m, "a", "t2") == std::set<std::string>{"s2", "t2"});
  CHECK(succ_names(m, "b", "s1") == std::set<std::string>{"s1", "s2", "t1"});
  CHECK(succ_names(m, "b", "s2") == std::set<std::string>{"s1", "s2", "t1"});
  CHECK(succ_names(m, "b", "t1") == std::set<std::string>{"s1", "s2", "t1"});
  CHECK(succ_names(m, "b", "s3") == std::set<std::string>{"s3", "t2", "t3"});
  CHECK(succ_names(m, "b", "t2") == std::set<std::string>{"s3", "t2", "t3"});
  CHECK(succ_names(m, "b", "t3") == std::set<std::string>{"s3", "t2", "t3"});
  CHECK(m.validate().empty());
}

TEST_CASE("s5_closure separates disconnected components") {
  KripkeModel m({"w0", "w1", "w2"}, {"a"}, {}, Frame::K);
  m.add_edge("a", "w0", "w1");
  KripkeModel c = m.s5_closure();
  CHECK(succ_names(c, "a", "w0") == std::set<std::string>{"w0", "w1"});
  CHECK(succ_names(c, "a", "w2") == std::set<std::string>{"w2"});
}

TEST_CASE("s5_closure is idempotent and monotone") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GeneratorParams p{seed, 6, 2, 1, 0.3, Frame::K};
    KripkeModel m = dk::random_model(p);
    KripkeModel once = m.s5_closure();
    CHECK(once.s5_closure() == once);

    KripkeModel bigger = m;
    bigger.add_edge(std::size_t{0}, seed % 6, (seed + 3) % 6);
    bigger.add_edge(std::size_t{1}, (seed + 1) % 6, (seed + 4) % 6);
    KripkeModel cb = bigger.s5_closure();
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t w = 0; w < 6; ++w)
        CHECK(once.successors(a, w).subset_of(cb.successors(a, w)));
  }
}

TEST_CASE("validate reports every S5 violation instead of the first") {
  KripkeModel m({"u", "v"}, {"a"}, {}, Frame::S5);
  m.add_edge("a", "u", "v");  // not reflexive anywhere, not symmetric
  auto bad = m.validate();
  REQUIRE(bad.size() >= 3);
  bool reflexive_u = false, reflexive_v = false, symmetric = false;
  for (const auto& b : bad) {
    if (b.find("not reflexive at u") != std::string::npos) reflexive_u = true;
    if (b.find("not reflexive at v") != std::string::npos) reflexive_v = true;
    if (b.find("not symmetric") != std::string::npos) symmetric = true;
  }
  CHECK(reflexive_u);
  CHECK(reflexive_v);
  CHECK(symmetric);

  CHECK(six_world_edges().validate().empty());  // K frame: no conditions
}

TEST_CASE("serialization round-trips exactly") {
  KripkeModel m = six_world_edges().s5_closure();
  CHECK(dk::parse_model(dk::model_to_json(m).dump()) == m);

  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    GeneratorParams p{seed, 1 + static_cast<int>(seed % 6), 1 + static_cast<int>(seed % 3),
                      static_cast<int>(seed % 3), 0.4, seed % 2 ? Frame::S5 : Frame::K};
    KripkeModel r = dk::random_model(p);
    CHECK(dk::parse_model(dk::model_to_json(r).dump()) == r);
  }
}

TEST_CASE("model files surface precise errors") {
  using Catch::Matchers::ContainsSubstring;
  CHECK_THROWS_WITH(
      dk::parse_model(R"({"worlds": [], "agents": [], "atoms": [],
                          "valuation": {}, "relations": {}, "frame": "K"})"),
      ContainsSubstring("worlds must be non-empty"));
  CHECK_THROWS_WITH(
      dk::parse_model(R"({"worlds": ["w1"], "agents": ["a"], "atoms": [],
                          "valuation": {}, "relations": {"a": [["w1","w9"]]}, "frame": "K"})"),
      ContainsSubstring("w9") && ContainsSubstring("[\"w1\",\"w9\"]"));
  CHECK_THROWS_WITH(
      dk::parse_model(R"({"worlds": ["w1"], "agents": [], "atoms": [],
                          "valuation": {"q": ["w1"]}, "relations": {}, "frame": "K"})"),
      ContainsSubstring("undeclared atom 'q'"));
  CHECK_THROWS_WITH(dk::parse_model("{not json"), ContainsSubstring("not valid JSON"));
  CHECK_THROWS_WITH(
      dk::parse_model(R"({"worlds": ["w1"], "agents": [], "atoms": [],
                          "valuation": {}, "relations": {}, "frame": "T"})"),
      ContainsSubstring("frame must be"));
  CHECK_THROWS_WITH(
      dk::parse_model(R"({"worlds": ["w1", "w1"], "agents": [], "atoms": [],
                          "valuation": {}, "relations": {}, "frame": "K"})"),
      ContainsSubstring("duplicate world name 'w1'"));
  // S5-tagged file whose relation is not an equivalence fails validation...
  CHECK_THROWS_WITH(
      dk::parse_model(R"({"worlds": ["u", "v"], "agents": ["a"], "atoms": [],
                          "valuation": {}, "relations": {"a": [["u","v"]]}, "frame": "S5"})"),
      ContainsSubstring("not reflexive"));
  // ...unless the file asks to be closed on load.
  KripkeModel closed = dk::parse_model(
      R"({"worlds": ["u", "v"], "agents": ["a"], "atoms": [],
          "valuation": {}, "relations": {"a": [["u","v"]]}, "frame": "S5", "close": true})");
  CHECK(succ_names(closed, "a", "u") == std::set<std::string>{"u", "v"});
}

TEST_CASE("generator is deterministic and honors density endpoints") {
  GeneratorParams p{7, 5, 2, 2, 0.5, Frame::S5};
  CHECK(dk::random_model(p) == dk::random_model(p));

  GeneratorParams p2 = p;
  p2.seed = 8;
  CHECK(dk::random_model(p) != dk::random_model(p2));

  GeneratorParams identity{3, 4, 2, 1, 0.0, Frame::S5};
  KripkeModel mi = dk::random_model(identity);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t w = 0; w < 4; ++w) {
      CHECK(mi.successors(a, w).count() == 1);
      CHECK(mi.successors(a, w).test(w));
    }

  GeneratorParams total{3, 4, 2, 1, 1.0, Frame::S5};
  KripkeModel mt = dk::random_model(total);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t w = 0; w < 4; ++w) CHECK(mt.successors(a, w).count() == 4);

  GeneratorParams empty_k{3, 4, 2, 1, 0.0, Frame::K};
  KripkeModel mk = dk::random_model(empty_k);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t w = 0; w < 4; ++w) CHECK(mk.successors(a, w).none());

  GeneratorParams total_k{3, 4, 2, 1, 1.0, Frame::K};
  KripkeModel mtk = dk::random_model(total_k);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t w = 0; w < 4; ++w) CHECK(mtk.successors(a, w).count() == 4);

  CHECK(dk::random_model(p).validate().empty());
}

TEST_CASE("generator rejects out-of-range parameters") {
  CHECK_THROWS_AS(dk::random_model({1, 0, 1, 0, 0.5, Frame::K}), dk::ModelError);
  CHECK_THROWS_AS(dk::random_model({1, 3, 0, 0, 0.5, Frame::K}), dk::ModelError);
  CHECK_THROWS_AS(dk::random_model({1, 3, 1, -1, 0.5, Frame::K}), dk::ModelError);
  CHECK_THROWS_AS(dk::random_model({1, 3, 1, 0, 1.5, Frame::K}), dk::ModelError);
}

TEST_CASE("model lookups validate names") {
  KripkeModel m = six_world_edges();
  CHECK(m.world_index("t2") == 4);
  CHECK_THROWS_AS(m.world_index("s9"), dk::ModelError);
  CHECK_THROWS_AS(m.agent_index("c"), dk::ModelError);
  CHECK_THROWS_AS(m.atom_index("q"), dk::ModelError);
  CHECK_FALSE(m.find_world("zz").has_value());
  dk::PointedModel pm{m, "s2"};
  CHECK(pm.point_index() == 1);
}

TEST_CASE("box preimage on a two-world chain") {
  KripkeModel m({"w1", "w2"}, {"a", "b"}, {"p"}, Frame::K);
  m.set_atom("p", "w1");
  m.add_edge("a", "w1", "w2");
  KripkeModel c = m.s5_closure();  // a total, b identity
  WorldSet only_w1(2);
  only_w1.set(0);
  CHECK(dk::box_preimage(c, c.agent_index("a"), only_w1).none());
  CHECK(dk::box_preimage(c, c.agent_index("b"), only_w1) == only_w1);
}
