#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weightlab/block_family.hpp"
#include "weightlab/implication.hpp"

namespace weightlab {

// Where the construction leaves b_k free, the choice of sequence.
struct BRule {
  enum class Kind { Geometric, Linear, ReciprocalLinear, ExpAffine, Slow };
  Kind kind = Kind::Geometric;
  Rational b0 = 1;
  Rational step = 2;    // ratio (geometric kinds) or slope (linear kinds)
  double offset = 0.0;  // exp_affine: b_k = exp(-(offset + slope k)) for k >= 1
  double slope = 1.0;
  bool up = true;       // slow: log2(k+2) or its reciprocal

  Rational value(long k) const;
  double log_value(long k) const;
  nlohmann::json to_json() const;
  static BRule from_json(const nlohmann::json& j);
};

// A named family with its parameters. ExCentre carries r; the
// closed-form families Ex6_9 and Ex6_10 and the constant carry no b_rule.
struct NamedFamily {
  std::string id;
  std::optional<BRule> b_rule;
  long depth = 104;
  double r = 0.0;

  std::string label() const;
  nlohmann::json to_json() const;
};

// "Ex6_3", "ExCentre(-0.5)", "ExCentre(r=1)", "constant". Default b_rule and depth.
NamedFamily parse_family(const std::string& text, long depth = 104);
// {"id": ..., "b_rule": {...}, "depth": ...}
NamedFamily family_from_json(const nlohmann::json& j);

std::optional<BRule> default_b_rule(const std::string& id);
// Throws DomainError when the rule breaks the family's stated constraints.
void check_b_rule(const std::string& id, const BRule& rule, long depth);

// The (a_k, b_k) description, for the block families.
DyadicBlockFamily dyadic_family(const std::string& id, const BRule& rule, long depth);

// s-coordinate profile for every family; ExCentre gives a PowerProfile.
Profile instantiate(const NamedFamily& fam);
Profile instantiate(const std::string& id, const std::optional<BRule>& rule, long depth);
// Ex6_8/9/10 in their native u coordinate, without a tail.
StepProfile instantiate_native(const NamedFamily& fam);

// Every id accepted by parse_family, in a fixed order (ExCentre at r = -1/2 and 1).
std::vector<std::string> named_family_ids();
bool is_non_integrable(const std::string& id);

struct ExpectedBehavior {
  std::map<Node, bool> holds;           // closure included
  std::map<Node, std::string> source;   // "header" or "closure"
};
ExpectedBehavior expected_behavior(const std::string& id);

}  // namespace weightlab
