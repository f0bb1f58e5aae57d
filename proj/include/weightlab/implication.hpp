#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "weightlab/conditions.hpp"

namespace weightlab {

using Node = ConditionKind;

struct Edge {
  Node from;
  Node to;
  std::string provenance;
};

// from satisfies, to does not, realized by the witness family.
struct AntiEdge {
  Node from;
  Node to;
  std::string witness;
  std::string figure;
};

enum class SideCondition { AC, INC, DEC };
std::string to_string(SideCondition s);

// from == nullopt encodes an edge from the top element: the side condition
// alone forces `to`.
struct ConditionalEdge {
  std::optional<Node> from;
  Node to;
  SideCondition side;
};

struct ImplicationGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<AntiEdge> anti_edges;
  std::vector<ConditionalEdge> conditional_edges;
};

ImplicationGraph build_graph();

// Which side conditions are active for the family at hand.
struct ActiveSides {
  bool ac = false;
  bool inc = false;
  bool dec = false;
};

// reach[a] = nodes reachable from a (a included) along unconditional edges
// and the conditional edges whose side condition is active.
std::map<Node, std::set<Node>> closure(const ImplicationGraph& g, const ActiveSides& sides = {});
// Nodes forced true by an active top-element edge.
std::set<Node> forced(const ImplicationGraph& g, const ActiveSides& sides);

using VerdictMap = std::map<Node, Verdict::Kind>;

struct ConsistencyViolation {
  std::string family;
  bool from_top = false;  // the side condition alone forces `to`
  Node from;
  Node to;
  Verdict::Kind from_verdict;
  Verdict::Kind to_verdict;
  std::string describe() const;
};

// Holds(a) with Fails(b) for b reachable from a. AC edges are active only
// when the AC verdict is Holds; INC/DEC come from `sides`.
std::vector<ConsistencyViolation> check_consistency(const std::string& family, const VerdictMap& verdicts,
                                                    const ImplicationGraph& g, ActiveSides sides = {});

struct FigureCell {
  Node from;
  Node to;
  std::string kind;  // edge, anti_edge, conditional
  std::string witness;
  std::string validated;  // yes, no, inconclusive
  std::string figure;
};

struct FigureReport {
  std::vector<FigureCell> cells;
  std::vector<ConsistencyViolation> violations;
  std::map<std::string, VerdictMap> verdicts;  // per family
  std::map<std::string, std::string> errors;   // per family, e.g. non-integrable
  int inconclusive = 0;
  int unrealized = 0;

  bool ok() const { return violations.empty() && unrealized == 0 && inconclusive == 0; }
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

struct FigureOptions {
  ClassifyOptions classify;
  std::vector<Edge> injected_edges;  // test hook: extra (possibly false) edges
  unsigned threads = 0;              // 0: WEIGHTLAB_THREADS or hardware
};

// Classifies every named family and checks each edge and anti-edge.
FigureReport validate_figures(const FigureOptions& opts);

// Worker count from WEIGHTLAB_THREADS, else the hardware, at least 1.
unsigned thread_budget(unsigned requested = 0);

}  // namespace weightlab
