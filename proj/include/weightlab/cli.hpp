#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace weightlab {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitMalformed = 1,
  kExitNonIntegrable = 2,
  kExitTail = 3,
  kExitInconclusive = 4,
  kExitValidationFailed = 5,
};

// Everything a run depends on. Serialized with a schema version so a run can
// be repeated from its config file.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  std::string family;        // family spec text or JSON family spec file
  std::string profile_file;  // profile interchange file
  std::vector<std::string> conditions{"all"};
  long n_max = 40;
  double divergence_factor = 4.0;
  std::string format = "json";
  std::string out;
  std::uint64_t seed = 1;
  std::optional<long> depth;
  bool oracle = false;
  std::string parts = "a,b,e,f,h";
  std::vector<std::string> inject_edges;  // "P8->P1", test hook

  nlohmann::json to_json() const;
  // Fields present in j replace the current ones.
  void merge(const nlohmann::json& j);
  // Depth used for named families: --depth, else n_max + 64.
  long effective_depth() const;
};

// Runs one command line. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weightlab
