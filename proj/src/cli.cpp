#include "weightlab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "weightlab/disc_oracle.hpp"
#include "weightlab/families.hpp"
#include "weightlab/implication.hpp"
#include "weightlab/profile_io.hpp"

namespace weightlab {

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"family", family},
                      {"profile_file", profile_file},
                      {"conditions", conditions},
                      {"n_max", n_max},
                      {"divergence_factor", divergence_factor},
                      {"format", format},
                      {"seed", seed},
                      {"oracle", oracle},
                      {"parts", parts}};
  if (depth) j["depth"] = *depth;
  if (!inject_edges.empty()) j["inject_edges"] = inject_edges;
  return j;
}

void RunConfig::merge(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  if (j.contains("schema_version") && j.at("schema_version") != kSchemaVersion) {
    throw DomainError("unsupported config schema_version " + j.at("schema_version").dump());
  }
  try {
    if (j.contains("family")) family = j.at("family").get<std::string>();
    if (j.contains("profile_file")) profile_file = j.at("profile_file").get<std::string>();
    if (j.contains("conditions")) {
      const auto& c = j.at("conditions");
      conditions = c.is_string() ? std::vector<std::string>{c.get<std::string>()} : c.get<std::vector<std::string>>();
    }
    if (j.contains("n_max")) n_max = j.at("n_max").get<long>();
    if (j.contains("divergence_factor")) divergence_factor = j.at("divergence_factor").get<double>();
    if (j.contains("format")) format = j.at("format").get<std::string>();
    if (j.contains("out")) out = j.at("out").get<std::string>();
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("depth")) depth = j.at("depth").get<long>();
    if (j.contains("oracle")) oracle = j.at("oracle").get<bool>();
    if (j.contains("parts")) parts = j.at("parts").get<std::string>();
    if (j.contains("inject_edges")) inject_edges = j.at("inject_edges").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("bad config field: ") + e.what());
  }
}

long RunConfig::effective_depth() const { return depth.value_or(n_max + 64); }

namespace {

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const std::string& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) out.push_back(tok);
    }
  }
  return out;
}

std::vector<ConditionId> parse_conditions(const std::vector<std::string>& items) {
  const std::vector<std::string> toks = split_list(items);
  if (toks.empty() || (toks.size() == 1 && toks[0] == "all")) return ConditionId::all();
  std::vector<ConditionId> out;
  for (const std::string& t : toks) out.push_back(ConditionId::parse(t));
  return out;
}

bool looks_like_json_file(const std::string& s) {
  return s.size() > 5 && s.compare(s.size() - 5, 5, ".json") == 0;
}

NamedFamily resolve_family(const RunConfig& cfg) {
  if (looks_like_json_file(cfg.family)) {
    std::ifstream in(cfg.family);
    if (!in) throw DomainError("cannot open family spec '" + cfg.family + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("family spec is not valid JSON: " + std::string(e.what()));
    }
    return family_from_json(j);
  }
  if (!cfg.family.empty() && cfg.family.front() == '{') {
    try {
      return family_from_json(nlohmann::json::parse(cfg.family));
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("family spec is not valid JSON: " + std::string(e.what()));
    }
  }
  return parse_family(cfg.family, cfg.effective_depth());
}

struct Input {
  Profile profile = StepProfile(constant_profile(1));
  nlohmann::json description;
  std::optional<NamedFamily> family;
};

Input resolve_input(const RunConfig& cfg) {
  if (cfg.family.empty() == cfg.profile_file.empty()) {
    throw DomainError("give exactly one of --family and --profile-file");
  }
  Input in;
  if (!cfg.profile_file.empty()) {
    in.profile = load_profile(cfg.profile_file);
    in.description = {{"profile_file", cfg.profile_file}};
    return in;
  }
  NamedFamily fam = resolve_family(cfg);
  if (fam.b_rule && cfg.n_max + 24 > fam.depth) {
    throw DomainError("depth " + std::to_string(fam.depth) + " is too shallow for n_max " +
                      std::to_string(cfg.n_max) + " (need n_max + 24 <= depth)");
  }
  in.profile = instantiate(fam);
  in.description = {{"family", fam.to_json()}};
  in.family = fam;
  return in;
}

void check_common(const RunConfig& cfg) {
  if (cfg.n_max < 1) throw DomainError("n_max must be at least 1");
  if (!(cfg.divergence_factor > 1.0)) throw DomainError("divergence factor must exceed 1");
  if (cfg.format != "json" && cfg.format != "csv") throw DomainError("format must be json or csv");
}

// Writes to --out when given, else to the stream.
void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + cfg.out + "'");
  f << text;
  if (!f) throw DomainError("failed writing '" + cfg.out + "'");
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Parameterized conditions contribute one row block per grid parameter.
void samples_csv_rows(const SweepReport& r, std::ostream& os) {
  for (const FunctionalSample& s : r.samples) {
    os << r.condition.name() << ',' << s.n << ',' << to_decimal(s.value.lo) << ',' << to_decimal(s.value.hi) << '\n';
  }
  for (const SweepReport& sub : r.sub) samples_csv_rows(sub, os);
}

std::string samples_csv(const std::vector<SweepReport>& reports) {
  std::ostringstream os;
  os << "condition,n,lo,hi\n";
  for (const SweepReport& r : reports) samples_csv_rows(r, os);
  return os.str();
}

std::set<char> parse_parts(const std::string& text) {
  std::set<char> out;
  for (const std::string& t : split_list({text})) {
    if (t.size() != 1 || std::string("abefh").find(t[0]) == std::string::npos) {
      throw DomainError("oracle parts are a subset of a,b,e,f,h");
    }
    out.insert(t[0]);
  }
  if (out.empty()) throw DomainError("no oracle parts selected");
  return out;
}

OracleOptions oracle_options(const RunConfig& cfg) {
  OracleOptions o;
  o.parts = parse_parts(cfg.parts);
  o.seed = cfg.seed;
  return o;
}

std::string oracle_csv(const OracleReport& rep) {
  std::ostringstream os;
  os << "part,label,lhs,rhs,abs_err,rel_err,nodes,pass\n";
  for (const OracleCheck& c : rep.checks) {
    os << c.part << ",\"" << c.label << "\"," << to_decimal(c.lhs) << ',' << to_decimal(c.rhs) << ','
       << to_decimal(c.abs_err) << ',' << to_decimal(c.rel_err) << ',' << c.nodes << ','
       << (c.skipped ? "skipped" : c.pass ? "yes" : "no") << '\n';
  }
  return os.str();
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_common(cfg);
  const Input in = resolve_input(cfg);
  const std::vector<ConditionId> conds = parse_conditions(cfg.conditions);
  Classifier classifier(in.profile, ClassifyOptions{cfg.n_max, cfg.divergence_factor});
  std::vector<SweepReport> reports;
  bool non_integrable = false;
  for (const ConditionId& c : conds) {
    reports.push_back(classifier.classify(c));
    if (reports.back().error == "non-integrable") non_integrable = true;
  }
  if (cfg.format == "csv") {
    emit(cfg, samples_csv(reports), out);
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepReport& r : reports) arr.push_back(r.to_json());
    nlohmann::json j = {{"schema_version", RunConfig::kSchemaVersion},
                        {"input", in.description},
                        {"config", cfg.to_json()},
                        {"reports", arr}};
    if (cfg.oracle) j["oracle"] = run_oracle(in.profile, in.description.dump(), oracle_options(cfg)).to_json();
    emit(cfg, dump(j), out);
  }
  for (const SweepReport& r : reports) {
    err << r.condition.name() << ": " << r.verdict.kind_name();
    if (!r.verdict.reason.empty()) err << " (" << r.verdict.reason << ")";
    err << '\n';
  }
  if (non_integrable) {
    err << "error: non-integrable weight\n";
    return kExitNonIntegrable;
  }
  return kExitOk;
}

Edge parse_injected(const std::string& text) {
  const auto pos = text.find("->");
  if (pos == std::string::npos) throw DomainError("injected edges look like P8->P1");
  return {ConditionId::parse(text.substr(0, pos)).kind, ConditionId::parse(text.substr(pos + 2)).kind, "injected"};
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_common(cfg);
  FigureOptions opts;
  opts.classify = ClassifyOptions{cfg.n_max, cfg.divergence_factor};
  for (const std::string& e : split_list(cfg.inject_edges)) opts.injected_edges.push_back(parse_injected(e));
  const FigureReport rep = validate_figures(opts);
  emit(cfg, cfg.format == "csv" ? rep.to_csv() : dump(rep.to_json()), out);
  for (const ConsistencyViolation& v : rep.violations) err << "violation: " << v.describe() << '\n';
  for (const FigureCell& c : rep.cells) {
    if (c.kind != "anti_edge" || c.validated == "yes") continue;
    err << (c.validated == "no" ? "unrealized" : "inconclusive") << ": " << kind_name(c.from) << " -/-> "
        << kind_name(c.to) << " via " << c.witness << '\n';
  }
  err << "violations " << rep.violations.size() << ", unrealized " << rep.unrealized << ", inconclusive "
      << rep.inconclusive << '\n';
  if (!rep.violations.empty() || rep.unrealized > 0) return kExitValidationFailed;
  if (rep.inconclusive > 0) return kExitInconclusive;
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_common(cfg);
  const Input in = resolve_input(cfg);
  const OracleReport rep = run_oracle(in.profile, in.description.dump(), oracle_options(cfg));
  emit(cfg, cfg.format == "csv" ? oracle_csv(rep) : dump(rep.to_json()), out);
  for (const OracleCheck& c : rep.checks) {
    if (!c.skipped && !c.pass) err << "failed: (" << c.part << ") " << c.label << '\n';
  }
  return rep.ok() ? kExitOk : kExitValidationFailed;
}

int cmd_show_family(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  check_common(cfg);
  const Input in = resolve_input(cfg);
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "lo,hi,value\n";
    if (const auto* s = std::get_if<StepProfile>(&in.profile)) {
      for (const Piece& p : s->pieces()) os << to_decimal(p.lo) << ',' << to_decimal(p.hi) << ',' << to_decimal(p.value) << '\n';
    }
    emit(cfg, os.str(), out);
    return kExitOk;
  }
  nlohmann::json j = {{"schema_version", RunConfig::kSchemaVersion}, {"input", in.description}};
  if (const auto* s = std::get_if<StepProfile>(&in.profile)) {
    j["profile"] = profile_to_json(*s);
  } else {
    j["profile"] = {{"kind", "power"}, {"r", std::get<PowerProfile>(in.profile).r}, {"coordinate", "s"}};
  }
  if (in.family) {
    const ExpectedBehavior ex = expected_behavior(in.family->id);
    nlohmann::json e = nlohmann::json::object();
    for (const auto& [node, holds] : ex.holds) {
      e[kind_name(node)] = {{"holds", holds}, {"source", ex.source.at(node)}};
    }
    j["expected"] = e;
    j["non_integrable"] = is_non_integrable(in.family->id);
  }
  emit(cfg, dump(j), out);
  return kExitOk;
}

// Loads --config before the main parse so explicit flags win.
void preload_config(const std::vector<std::string>& args, RunConfig& cfg) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    if (path.empty()) continue;
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("config is not valid JSON: " + std::string(e.what()));
    }
    cfg.merge(j);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    preload_config(args, cfg);
  } catch (const WeightlabError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformed;
  }

  CLI::App app{"Radial weight condition toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "weightlab 1.0");
  std::string config_path;
  long depth_flag = 0;

  auto add_common = [&](CLI::App* sub, bool input) {
    sub->add_option("--config", config_path, "JSON run config (flags given here take precedence)");
    sub->add_option("--n-max", cfg.n_max, "deepest sweep index n (scales 2^-n)");
    sub->add_option("--divergence-factor", cfg.divergence_factor, "growth factor that counts as divergence");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    if (input) {
      sub->add_option("--family", cfg.family, "named family, e.g. Ex6_3 or ExCentre(r=-0.5), or a JSON family spec");
      sub->add_option("--profile-file", cfg.profile_file, "profile interchange JSON file");
      sub->add_option("--depth", depth_flag, "materialized blocks for named families (default n_max + 64)");
      sub->add_option("--seed", cfg.seed, "seed for stratified sampling");
    }
  };

  CLI::App* classify = app.add_subcommand("classify", "sweep conditions over one weight");
  add_common(classify, true);
  classify->add_option("--conditions", cfg.conditions, "comma-separated conditions or 'all'")->delimiter(',');
  classify->add_flag("--oracle", cfg.oracle, "attach the dictionary oracle report");
  classify->add_option("--parts", cfg.parts, "oracle parts when --oracle is set");

  CLI::App* validate = app.add_subcommand("validate-figures", "check the implication map against every family");
  add_common(validate, false);
  validate->add_option("--inject-edge", cfg.inject_edges, "test hook: add an edge such as P8->P1")
      ->group("")
      ->delimiter(',');

  CLI::App* oracle = app.add_subcommand("oracle", "check the disc-to-interval dictionary by 2D quadrature");
  add_common(oracle, true);
  oracle->add_option("--parts", cfg.parts, "comma-separated subset of a,b,e,f,h");

  CLI::App* show = app.add_subcommand("show-family", "print a family's pieces, b rule and expected behaviour");
  add_common(show, true);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitMalformed;
  }

  for (CLI::App* sub : {classify, oracle, show}) {
    if (sub->parsed() && sub->count("--depth") > 0) cfg.depth = depth_flag;
  }

  try {
    if (classify->parsed()) return cmd_classify(cfg, out, err);
    if (validate->parsed()) return cmd_validate(cfg, out, err);
    if (oracle->parsed()) return cmd_oracle(cfg, out, err);
    if (show->parsed()) return cmd_show_family(cfg, out, err);
  } catch (const NonIntegrable& e) {
    err << "error: non-integrable: " << e.what() << '\n';
    return kExitNonIntegrable;
  } catch (const TailError& e) {
    err << "error: tail: " << e.what() << '\n';
    return kExitTail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitMalformed;
  }
  return kExitMalformed;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace weightlab
