#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "weightlab/cli.hpp"

using namespace weightlab;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "weightlab");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "weightlab_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string verdict_of(const nlohmann::json& j, const std::string& condition) {
  for (const auto& r : j.at("reports")) {
    if (r.at("condition") == condition) return r.at("verdict").at("kind");
  }
  return "missing";
}

}  // namespace

TEST_CASE("classify reports the expected verdicts") {
  const Run r = run({"classify", "--family", "Ex6_4", "--conditions", "P1,P2,P3"});
  REQUIRE(r.code == kExitOk);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(verdict_of(j, "P1") == "fails");
  CHECK(verdict_of(j, "P2") == "holds");
  CHECK(verdict_of(j, "P3") == "holds");
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("config").at("family") == "Ex6_4");
}

TEST_CASE("the constant weight satisfies everything") {
  const std::string path = scratch("constant.json").string();
  write_file(path, R"({"coordinate": "s", "breakpoints": ["1", "0"], "values": ["1"]})");
  const Run r = run({"classify", "--profile-file", path, "--n-max", "12"});
  REQUIRE(r.code == kExitOk);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  REQUIRE(j.at("reports").size() == 14);
  for (const auto& rep : j.at("reports")) {
    CAPTURE(rep.at("condition").get<std::string>());
    CHECK(rep.at("verdict").at("kind") == "holds");
  }
}

TEST_CASE("exit codes") {
  SUBCASE("non-integrable") { CHECK(run({"classify", "--family", "Ex6_10"}).code == kExitNonIntegrable); }
  SUBCASE("malformed input") {
    CHECK(run({"classify", "--family", "Ex9_9"}).code == kExitMalformed);
    CHECK(run({"classify", "--family", "Ex6_3", "--conditions", "Q9"}).code == kExitMalformed);
    CHECK(run({"classify", "--bogus"}).code == kExitMalformed);
    const std::string path = scratch("bad.json").string();
    write_file(path, R"({"coordinate": "s", "breakpoints": ["1", "1/2"], "values": ["1", "2"]})");
    CHECK(run({"classify", "--profile-file", path}).code == kExitMalformed);
  }
  SUBCASE("depth too shallow for the sweep") {
    const Run r = run({"classify", "--family", "Ex6_3", "--n-max", "40", "--depth", "50"});
    CHECK(r.code == kExitMalformed);
    CHECK(r.err.find("depth") != std::string::npos);
  }
  SUBCASE("a forbidden tail is hit by the sweep") {
    const std::string path = scratch("forbid.json").string();
    write_file(path,
               R"({"coordinate": "s", "breakpoints": ["1", "1/2", "1/4"], "values": ["2", "3"], "tail": {"mode": "forbid"}})");
    CHECK(run({"classify", "--profile-file", path, "--conditions", "P2"}).code == kExitTail);
  }
}

TEST_CASE("figure validation") {
  SUBCASE("a short sweep leaves cells open") {
    const Run r = run({"validate-figures", "--n-max", "4", "--format", "csv"});
    CHECK(r.code == kExitInconclusive);
    CHECK(r.out.rfind("from,to,kind,witness,validated", 0) == 0);
    CHECK(r.out.find("inconclusive") != std::string::npos);
  }
  SUBCASE("a false edge is caught") {
    const Run r = run({"validate-figures", "--n-max", "12", "--inject-edge", "P8->P1"});
    CHECK(r.code == kExitValidationFailed);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    bool found = false;
    for (const auto& v : j.at("violations")) {
      if (v.at("from") == "P8" && v.at("to") == "P1") found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("oracle command") {
  CHECK(run({"oracle", "--family", "Ex6_2", "--parts", "a,h"}).code == kExitOk);
  CHECK(run({"oracle", "--family", "ExCentre(-0.5)", "--parts", "a"}).code == kExitOk);
  const std::string path = scratch("constant_oracle.json").string();
  write_file(path, R"({"coordinate": "s", "breakpoints": ["1", "0"], "values": ["1"]})");
  const Run c = run({"oracle", "--profile-file", path});
  CHECK(c.code == kExitOk);
  const nlohmann::json j = nlohmann::json::parse(c.out);
  for (const auto& k : j.at("checks")) {
    CHECK(k.contains("lhs"));
    CHECK(k.contains("rhs"));
    CHECK(k.contains("abs_err"));
    CHECK(k.contains("rel_err"));
    CHECK(k.contains("nodes"));
  }
  CHECK(run({"oracle", "--family", "Ex6_2", "--parts", "z"}).code == kExitMalformed);
}

TEST_CASE("csv output has fixed columns") {
  const Run r = run({"classify", "--family", "Ex6_2", "--conditions", "P5", "--format", "csv", "--n-max", "8"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.rfind("condition,n,lo,hi\n", 0) == 0);
  CHECK(r.out.find("P5,8,") != std::string::npos);
}

TEST_CASE("show-family") {
  const Run r = run({"show-family", "--family", "Ex6_2"});
  REQUIRE(r.code == kExitOk);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.contains("expected"));
  CHECK(j.at("expected").at("P8").at("holds") == true);
  CHECK(j.at("expected").at("P5").at("holds") == false);
}

TEST_CASE("config file and output file") {
  const auto cfg = scratch("run.json");
  write_file(cfg, R"({"family": "Ex6_3", "conditions": ["P5"], "n_max": 10, "format": "csv"})");
  const auto out = scratch("run_out.csv");
  const Run r = run({"classify", "--config", cfg.string(), "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  const std::string text = read_file(out);
  CHECK(text.rfind("condition,n,lo,hi", 0) == 0);
  CHECK(text.find("P5,10,") != std::string::npos);
  CHECK(text.find("P5,11,") == std::string::npos);
  // A flag on the command line wins over the file.
  const Run r2 = run({"classify", "--config", cfg.string(), "--n-max", "6"});
  CHECK(r2.out.find("P5,6,") != std::string::npos);
  CHECK(r2.out.find("P5,7,") == std::string::npos);
  write_file(cfg, "{not json");
  CHECK(run({"classify", "--config", cfg.string()}).code == kExitMalformed);
}

TEST_CASE("runs are deterministic") {
  const std::vector<std::string> args = {"classify", "--family", "ExP4_2", "--n-max", "16"};
  const Run a = run(args);
  const Run b = run(args);
  CHECK(a.code == b.code);
  CHECK(a.out == b.out);
}

#ifdef WEIGHTLAB_EXE
TEST_CASE("the installed tool gives byte-identical output") {
  const std::string exe = WEIGHTLAB_EXE;
  const auto one = scratch("det1.json");
  const auto two = scratch("det2.json");
  const std::string base = "\"" + exe + "\" classify --family Ex6_5 --n-max 16 --out ";
  REQUIRE(std::system((base + "\"" + one.string() + "\"").c_str()) == 0);
  REQUIRE(std::system(("WEIGHTLAB_THREADS=1 " + base + "\"" + two.string() + "\"").c_str()) == 0);
  CHECK(read_file(one) == read_file(two));
  CHECK_FALSE(read_file(one).empty());
  const int code = std::system(("\"" + exe + "\" classify --family Ex6_10 > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(code) == kExitNonIntegrable);
}
#endif
