#include "weightlab/profile_io.hpp"

#include <fstream>
#include <sstream>

namespace weightlab {

namespace {

Rational number_from(const nlohmann::json& v, const char* what) {
  if (v.is_string()) return parse_decimal(v.get<std::string>());
  if (v.is_number()) return exact(v.get<double>());
  throw DomainError(std::string(what) + " entries must be decimal strings or numbers");
}

double bound_from(const nlohmann::json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    return parse_decimal(s).get_d();
  }
  if (v.is_number()) return v.get<double>();
  throw DomainError("tail range must be a number or \"inf\"");
}

std::vector<Rational> numbers(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw DomainError(std::string("profile needs a '") + key + "' array");
  std::vector<Rational> out;
  for (const auto& v : j.at(key)) out.push_back(number_from(v, key));
  return out;
}

}  // namespace

StepProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("profile must be a JSON object");
  const Coordinate coord = coordinate_from(j.value("coordinate", std::string("s")));
  const std::vector<Rational> bp = numbers(j, "breakpoints");
  const std::vector<Rational> vals = numbers(j, "values");
  StepProfile base(coord, bp, vals, nullptr);
  if (coord == Coordinate::OneMinusModulus) base = convert_coordinate(base, Coordinate::OneMinusModulusSquared);
  if (!base.has_tail()) return base;

  const nlohmann::json tail = j.value("tail", nlohmann::json::object());
  const std::string mode = tail.value("mode", std::string("forbid"));
  if (mode == "forbid") return base.with_tail(std::make_shared<ForbidTail>());
  if (mode != "geometric") throw DomainError("unknown tail mode '" + mode + "'");
  if (!tail.contains("ratio")) throw DomainError("geometric tail needs a ratio");
  const double ratio = bound_from(tail.at("ratio"));
  const double inf = tail.contains("inf") ? bound_from(tail.at("inf")) : 0.0;
  const double sup = tail.contains("sup") ? bound_from(tail.at("sup")) : kInf;
  if (!(inf >= 0.0 && inf <= sup)) throw DomainError("tail range needs 0 <= inf <= sup");
  const Piece& last = base.pieces().back();
  const LogPiece lp{last.log_len, last.log_value};
  return base.with_tail(std::make_shared<GeometricTail>(ratio, lp, base.coverage().get_d(), inf, sup));
}

StepProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open profile file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("profile file '" + path + "' is not valid JSON: " + e.what());
  }
  return profile_from_json(j);
}

nlohmann::json profile_to_json(const StepProfile& p) {
  nlohmann::json bp = nlohmann::json::array();
  nlohmann::json vals = nlohmann::json::array();
  for (const Rational& b : p.breakpoints()) bp.push_back(to_decimal(b));
  for (const Rational& v : p.values()) vals.push_back(to_decimal(v));
  nlohmann::json j = {{"coordinate", to_string(p.coordinate())}, {"breakpoints", bp}, {"values", vals}};
  if (p.has_tail()) {
    const Tail& t = p.tail();
    nlohmann::json tj = {{"mode", t.mode()}};
    if (const auto* g = dynamic_cast<const GeometricTail*>(&t)) tj["ratio"] = g->ratio();
    const auto [lo, hi] = t.range();
    tj["inf"] = to_decimal(lo);
    tj["sup"] = to_decimal(hi);
    j["tail"] = tj;
  }
  return j;
}

}  // namespace weightlab
