#include <doctest.h>

#include <algorithm>

#include "weightlab/families.hpp"
#include "weightlab/implication.hpp"

using namespace weightlab;

namespace {

using N = Node;
using K = Verdict::Kind;

bool has_edge(const ImplicationGraph& g, N a, N b) {
  return std::any_of(g.edges.begin(), g.edges.end(), [&](const Edge& e) { return e.from == a && e.to == b; });
}

const std::vector<N>& clique() {
  static const std::vector<N> c = {N::P1, N::P2, N::P3, N::P4, N::P4a, N::P4b, N::P5, N::P6, N::P6e, N::P7, N::P8};
  return c;
}

VerdictMap classify_all(const Profile& p) {
  VerdictMap out;
  for (const ConditionId& c : ConditionId::all()) out[c.kind] = classify(p, c, {}).verdict.kind;
  return out;
}

}  // namespace

TEST_CASE("unconditional edges") {
  const ImplicationGraph g = build_graph();
  CHECK(g.edges.size() == 15);
  // The P1..P8 chain.
  for (auto [a, b] : std::vector<std::pair<N, N>>{{N::P1, N::P2}, {N::P2, N::P5}, {N::P5, N::P4}, {N::P8, N::P3},
                                                  {N::P3, N::P6}, {N::P6, N::P4}, {N::P4, N::P7}}) {
    CHECK(has_edge(g, a, b));
  }
  // Concentration refinements of P4.
  for (auto [a, b] : std::vector<std::pair<N, N>>{{N::P6, N::P4a}, {N::P4a, N::P4}, {N::P2, N::P4b}, {N::P4b, N::P5}}) {
    CHECK(has_edge(g, a, b));
  }
  CHECK(has_edge(g, N::B1, N::BpI));
  CHECK(has_edge(g, N::BpI, N::P1));
  CHECK_FALSE(has_edge(g, N::P7, N::P4));
}

TEST_CASE("closure follows paths") {
  const ImplicationGraph g = build_graph();
  const auto reach = closure(g);
  CHECK(reach.at(N::P1).count(N::P7) == 1);
  CHECK(reach.at(N::B1).count(N::P7) == 1);
  CHECK(reach.at(N::P8).count(N::P4a) == 1);
  CHECK(reach.at(N::P7).size() == 1);
  CHECK(reach.at(N::P5).count(N::P2) == 0);
  // Under AC every P-condition reaches every other.
  const auto with_ac = closure(g, {true, false, false});
  for (N a : clique()) CHECK(with_ac.at(a).size() >= clique().size());
  CHECK(forced(g, {false, false, true}).count(N::P7) == 1);
  CHECK(forced(g, {}).empty());
}

TEST_CASE("unconditional edges are acyclic apart from the LlogL pair") {
  const ImplicationGraph g = build_graph();
  const auto reach = closure(g);
  for (N a : g.nodes) {
    for (N b : reach.at(a)) {
      if (a == b || reach.at(b).count(a) == 0) continue;
      const bool llogl = (a == N::P6 && b == N::P6e) || (a == N::P6e && b == N::P6);
      CAPTURE(kind_name(a));
      CAPTURE(kind_name(b));
      CHECK(llogl);
    }
  }
}

TEST_CASE("anti-edges and their witnesses") {
  const ImplicationGraph g = build_graph();
  auto find = [&](N a, N b, const std::string& w) {
    return std::find_if(g.anti_edges.begin(), g.anti_edges.end(),
                        [&](const AntiEdge& e) { return e.from == a && e.to == b && e.witness == w; });
  };
  CHECK(find(N::P3, N::P8, "Ex6_6") != g.anti_edges.end());
  CHECK(find(N::P8, N::P5, "Ex6_2") != g.anti_edges.end());
  CHECK(find(N::P4b, N::P2, "ExP4_4") != g.anti_edges.end());
  // Listed in two diagrams, stored once.
  const auto twice = find(N::P2, N::P1, "Ex6_4");
  REQUIRE(twice != g.anti_edges.end());
  CHECK(twice->figure.find(';') != std::string::npos);
  // No anti-edge contradicts the closure.
  const auto reach = closure(g);
  for (const AntiEdge& e : g.anti_edges) CHECK(reach.at(e.from).count(e.to) == 0);
  for (const AntiEdge& e : g.anti_edges) {
    const auto ids = named_family_ids();
    CHECK(std::find(ids.begin(), ids.end(), e.witness) != ids.end());
  }
}

TEST_CASE("consistency checks") {
  const ImplicationGraph g = build_graph();
  SUBCASE("all Holds") {
    VerdictMap v;
    for (N n : g.nodes) v[n] = K::Holds;
    CHECK(check_consistency("constant", v, g).empty());
  }
  SUBCASE("P8 without P5") {
    const ExpectedBehavior e = expected_behavior("Ex6_2");
    VerdictMap v;
    for (const auto& [n, h] : e.holds) v[n] = h ? K::Holds : K::Fails;
    CHECK(check_consistency("Ex6_2", v, g).empty());
  }
  SUBCASE("corrupted pair") {
    const VerdictMap v = {{N::P1, K::Holds}, {N::P2, K::Fails}};
    const auto out = check_consistency("bad", v, g);
    REQUIRE(out.size() == 1);
    CHECK(out[0].from == N::P1);
    CHECK(out[0].to == N::P2);
    CHECK(out[0].describe().find("P1") != std::string::npos);
  }
  SUBCASE("inconclusive never violates") {
    const VerdictMap v = {{N::P1, K::Holds}, {N::P2, K::Inconclusive}, {N::P7, K::Inconclusive}};
    CHECK(check_consistency("open", v, g).empty());
  }
  SUBCASE("AC edges switch on with the AC verdict") {
    VerdictMap v = {{N::P7, K::Holds}, {N::P4, K::Fails}, {N::AC, K::Fails}};
    CHECK(check_consistency("x", v, g).empty());
    v[N::AC] = K::Holds;
    CHECK_FALSE(check_consistency("x", v, g).empty());
  }
  SUBCASE("every expected table is consistent") {
    for (const std::string& id : named_family_ids()) {
      const ExpectedBehavior e = expected_behavior(id);
      VerdictMap v;
      for (const auto& [n, h] : e.holds) v[n] = h ? K::Holds : K::Fails;
      CAPTURE(id);
      CHECK(check_consistency(id, v, g).empty());
    }
  }
}

TEST_CASE("AC weights do not separate the P-conditions") {
  for (const std::string id : {"Ex6_9"}) {
    const Profile p = instantiate(parse_family(id));
    REQUIRE(ac_block_sup(p, 40).hi <= 10.0);
    const VerdictMap v = classify_all(p);
    CHECK(v.at(N::AC) == K::Holds);
    const bool any_holds = std::any_of(clique().begin(), clique().end(), [&](N n) { return v.at(n) == K::Holds; });
    CHECK(any_holds);
    for (N n : clique()) {
      CAPTURE(kind_name(n));
      CHECK(v.at(n) != K::Fails);
    }
    CHECK(check_consistency(id, v, build_graph()).empty());
  }
  const VerdictMap c = classify_all(constant_profile(1));
  for (const auto& [n, k] : c) CHECK(k == K::Holds);
  CHECK(check_consistency("constant", c, build_graph()).empty());
}

TEST_CASE("figure table output") {
  FigureReport r;
  r.cells.push_back({N::P3, N::P8, "anti_edge", "Ex6_6", "yes", "P-diagram"});
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("from,to,kind,witness,validated", 0) == 0);
  CHECK(csv.find("P3,P8,anti_edge,Ex6_6,yes") != std::string::npos);
  CHECK(r.ok());
  r.inconclusive = 1;
  CHECK_FALSE(r.ok());
  CHECK(r.to_json().contains("cells"));
}

TEST_CASE("thread budget") {
  CHECK(thread_budget(3) == 3);
  CHECK(thread_budget() >= 1);
}
