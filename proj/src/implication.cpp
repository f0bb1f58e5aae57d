#include "weightlab/implication.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "weightlab/families.hpp"

namespace weightlab {

std::string to_string(SideCondition s) {
  switch (s) {
    case SideCondition::AC: return "AC";
    case SideCondition::INC: return "INC";
    case SideCondition::DEC: return "DEC";
  }
  return "?";
}

ImplicationGraph build_graph() {
  using N = Node;
  ImplicationGraph g;
  g.nodes = {N::P1, N::P2, N::P3, N::P4, N::P4a, N::P4b, N::P5, N::P6, N::P6e,
             N::P7, N::P8, N::B1,  N::BpI, N::AC};
  g.edges = {
      {N::P1, N::P2, "P-chain"},        {N::P2, N::P5, "P-chain"},         {N::P5, N::P4, "P-chain"},
      {N::P8, N::P3, "P-chain"},        {N::P3, N::P6, "P-chain"},         {N::P6, N::P4, "P-chain"},
      {N::P4, N::P7, "P-chain"},        {N::P6, N::P4a, "concentration"},  {N::P4a, N::P4, "concentration"},
      {N::P2, N::P4b, "concentration"}, {N::P4b, N::P5, "concentration"},  {N::B1, N::BpI, "Bp-inclusion"},
      {N::BpI, N::P1, "Bp-inclusion"},  {N::P6, N::P6e, "LlogL-variant"},  {N::P6e, N::P6, "LlogL-variant"},
  };
  auto anti = [&](N from, N to, const std::string& w, const std::string& fig) {
    for (AntiEdge& a : g.anti_edges) {
      if (a.from == from && a.to == to && a.witness == w) {
        a.figure += "; " + fig;
        return;
      }
    }
    g.anti_edges.push_back({from, to, w, fig});
  };
  // P1 - P8 diagram.
  anti(N::P2, N::P1, "Ex6_4", "P-diagram");
  anti(N::P5, N::P2, "Ex6_3", "P-diagram");
  anti(N::P3, N::P8, "Ex6_6", "P-diagram");
  anti(N::P6, N::P3, "Ex6_5", "P-diagram");
  anti(N::P7, N::P4, "Ex6_8", "P-diagram");
  anti(N::P8, N::P5, "Ex6_2", "P-diagram");
  anti(N::P1, N::P6, "Ex6_1", "P-diagram");
  // P4a / P4b diagram.
  anti(N::P4b, N::P2, "ExP4_4", "P4-diagram");
  anti(N::P5, N::P4b, "ExP4_3", "P4-diagram");
  anti(N::P4a, N::P6, "ExP4_2", "P4-diagram");
  anti(N::P4, N::P4a, "ExP4_1", "P4-diagram");
  // Classical classes.
  anti(N::AC, N::B1, "Ex6_9", "classical");
  anti(N::AC, N::P7, "Ex6_10", "classical");
  anti(N::B1, N::P3, "Ex6_1", "classical");
  anti(N::P3, N::P2, "Ex6_3", "classical");
  anti(N::P2, N::P1, "Ex6_4", "classical");
  anti(N::B1, N::AC, "Ex6_6", "classical");
  anti(N::BpI, N::B1, "Ex6_7", "classical");

  const std::vector<N> clique = {N::P1, N::P2, N::P3, N::P4, N::P4a, N::P4b, N::P5, N::P6, N::P6e, N::P7, N::P8};
  for (N a : clique) {
    for (N b : clique) {
      if (a != b) g.conditional_edges.push_back({a, b, SideCondition::AC});
    }
  }
  for (N a : {N::P2, N::P3, N::P4}) g.conditional_edges.push_back({a, N::AC, SideCondition::DEC});
  g.conditional_edges.push_back({std::nullopt, N::P7, SideCondition::DEC});
  g.conditional_edges.push_back({N::P7, N::AC, SideCondition::INC});
  return g;
}

namespace {

bool active(SideCondition s, const ActiveSides& sides) {
  switch (s) {
    case SideCondition::AC: return sides.ac;
    case SideCondition::INC: return sides.inc;
    case SideCondition::DEC: return sides.dec;
  }
  return false;
}

}  // namespace

std::map<Node, std::set<Node>> closure(const ImplicationGraph& g, const ActiveSides& sides) {
  std::map<Node, std::vector<Node>> adj;
  for (const Edge& e : g.edges) adj[e.from].push_back(e.to);
  for (const ConditionalEdge& e : g.conditional_edges) {
    if (e.from && active(e.side, sides)) adj[*e.from].push_back(e.to);
  }
  std::map<Node, std::set<Node>> reach;
  for (Node n : g.nodes) {
    std::set<Node>& seen = reach[n];
    std::vector<Node> stack{n};
    while (!stack.empty()) {
      const Node cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      for (Node nx : adj[cur]) stack.push_back(nx);
    }
  }
  return reach;
}

std::set<Node> forced(const ImplicationGraph& g, const ActiveSides& sides) {
  const auto reach = closure(g, sides);
  std::set<Node> out;
  for (const ConditionalEdge& e : g.conditional_edges) {
    if (!e.from && active(e.side, sides)) out.insert(reach.at(e.to).begin(), reach.at(e.to).end());
  }
  return out;
}

std::string ConsistencyViolation::describe() const {
  std::ostringstream os;
  os << family << ": " << (from_top ? std::string("side condition") : kind_name(from)) << " -> " << kind_name(to)
     << " but " << (from_top ? "" : kind_name(from) + " holds and ") << kind_name(to) << " fails";
  return os.str();
}

std::vector<ConsistencyViolation> check_consistency(const std::string& family, const VerdictMap& verdicts,
                                                    const ImplicationGraph& g, ActiveSides sides) {
  auto kind_of = [&](Node n) {
    const auto it = verdicts.find(n);
    return it == verdicts.end() ? Verdict::Kind::Inconclusive : it->second;
  };
  sides.ac = kind_of(Node::AC) == Verdict::Kind::Holds;
  const auto reach = closure(g, sides);
  std::vector<ConsistencyViolation> out;
  for (Node a : g.nodes) {
    if (kind_of(a) != Verdict::Kind::Holds) continue;
    for (Node b : reach.at(a)) {
      if (b != a && kind_of(b) == Verdict::Kind::Fails) {
        out.push_back({family, false, a, b, Verdict::Kind::Holds, Verdict::Kind::Fails});
      }
    }
  }
  for (Node b : forced(g, sides)) {
    if (kind_of(b) == Verdict::Kind::Fails) {
      out.push_back({family, true, b, b, Verdict::Kind::Holds, Verdict::Kind::Fails});
    }
  }
  return out;
}

unsigned thread_budget(unsigned requested) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("WEIGHTLAB_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
  }
  return std::max(1u, n);
}

namespace {

struct FamilyRun {
  std::string label;
  VerdictMap verdicts;
  ActiveSides sides;
  std::string error;
};

FamilyRun run_family(const std::string& id, const ImplicationGraph& g, const ClassifyOptions& opts) {
  FamilyRun r;
  r.label = id;
  try {
    const NamedFamily fam = parse_family(id, std::max<long>(104, opts.n_max + 64));
    r.label = fam.label();
    Classifier c(instantiate(fam), opts);
    r.sides.dec = c.decreasing_weight();
    r.sides.inc = c.increasing_weight();
    for (Node n : g.nodes) {
      const SweepReport rep = c.classify({n, std::nullopt});
      r.verdicts[n] = rep.verdict.kind;
      if (!rep.error.empty() && r.error.empty()) r.error = rep.error;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
    for (Node n : g.nodes) r.verdicts.try_emplace(n, Verdict::Kind::Inconclusive);
  }
  return r;
}

std::string validated_word(int v) { return v > 0 ? "yes" : v < 0 ? "no" : "inconclusive"; }

}  // namespace

FigureReport validate_figures(const FigureOptions& opts) {
  ImplicationGraph g = build_graph();
  for (const Edge& e : opts.injected_edges) g.edges.push_back(e);
  const std::vector<std::string> ids = named_family_ids();
  std::vector<FamilyRun> runs(ids.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < ids.size(); i = next++) runs[i] = run_family(ids[i], g, opts.classify);
  };
  const unsigned n = std::min<unsigned>(thread_budget(opts.threads), static_cast<unsigned>(ids.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  FigureReport rep;
  std::map<std::string, const FamilyRun*> by_id;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const FamilyRun& r = runs[i];
    by_id[ids[i]] = &r;
    rep.verdicts[r.label] = r.verdicts;
    if (!r.error.empty()) rep.errors[r.label] = r.error;
    for (ConsistencyViolation& v : check_consistency(r.label, r.verdicts, g, r.sides)) rep.violations.push_back(v);
  }
  auto holds = [](const FamilyRun& r, Node n) { return r.verdicts.at(n) == Verdict::Kind::Holds; };
  auto fails = [](const FamilyRun& r, Node n) { return r.verdicts.at(n) == Verdict::Kind::Fails; };

  for (const Edge& e : g.edges) {
    bool broken = false;
    for (const FamilyRun& r : runs) broken = broken || (holds(r, e.from) && fails(r, e.to));
    rep.cells.push_back({e.from, e.to, "edge", "", validated_word(broken ? -1 : 1), e.provenance});
  }
  for (const ConditionalEdge& e : g.conditional_edges) {
    bool broken = false;
    for (const FamilyRun& r : runs) {
      ActiveSides s = r.sides;
      s.ac = holds(r, Node::AC);
      if (!active(e.side, s)) continue;
      const bool premise = e.from ? holds(r, *e.from) : true;
      broken = broken || (premise && fails(r, e.to));
    }
    FigureCell c{e.from.value_or(e.to), e.to, "conditional", to_string(e.side), validated_word(broken ? -1 : 1),
                 "side condition " + to_string(e.side)};
    if (!e.from) c.witness += " (unconditional target)";
    rep.cells.push_back(c);
  }
  for (const AntiEdge& a : g.anti_edges) {
    const FamilyRun& r = *by_id.at(a.witness);
    int v = 0;
    if (holds(r, a.from) && fails(r, a.to)) v = 1;
    else if (fails(r, a.from) || holds(r, a.to)) v = -1;
    if (v == 0) ++rep.inconclusive;
    if (v < 0) ++rep.unrealized;
    rep.cells.push_back({a.from, a.to, "anti_edge", a.witness, validated_word(v), a.figure});
  }
  return rep;
}

std::string FigureReport::to_csv() const {
  std::ostringstream os;
  os << "from,to,kind,witness,validated\n";
  for (const FigureCell& c : cells) {
    os << kind_name(c.from) << ',' << kind_name(c.to) << ',' << c.kind << ',' << c.witness << ',' << c.validated
       << '\n';
  }
  return os.str();
}

nlohmann::json FigureReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  nlohmann::json cj = nlohmann::json::array();
  for (const FigureCell& c : cells) {
    cj.push_back({{"from", kind_name(c.from)},
                  {"to", kind_name(c.to)},
                  {"kind", c.kind},
                  {"witness", c.witness},
                  {"validated", c.validated},
                  {"figure", c.figure}});
  }
  j["cells"] = cj;
  nlohmann::json vj = nlohmann::json::array();
  for (const ConsistencyViolation& v : violations) {
    vj.push_back({{"family", v.family},
                  {"from", v.from_top ? std::string("side") : kind_name(v.from)},
                  {"to", kind_name(v.to)},
                  {"description", v.describe()}});
  }
  j["violations"] = vj;
  nlohmann::json fj = nlohmann::json::object();
  for (const auto& [fam, vm] : verdicts) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& [n, k] : vm) {
      Verdict v;
      v.kind = k;
      row[kind_name(n)] = v.kind_name();
    }
    fj[fam] = row;
  }
  j["verdicts"] = fj;
  j["errors"] = errors;
  j["inconclusive"] = inconclusive;
  j["unrealized"] = unrealized;
  return j;
}

}  // namespace weightlab
