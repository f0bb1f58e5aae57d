#include "weightlab/families.hpp"

#include <cmath>
#include <regex>

namespace weightlab {

namespace {

Rational rational_pow(const Rational& q, unsigned long k) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), q.get_num().get_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), q.get_den().get_mpz_t(), k);
  Rational out(num, den);
  out.canonicalize();
  return out;
}

Rational json_rational(const nlohmann::json& j, const char* key, const Rational& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_string()) return parse_decimal(v.get<std::string>());
  if (v.is_number()) return parse_decimal(v.dump());
  throw DomainError(std::string("b_rule field '") + key + "' must be a number");
}

double json_double(const nlohmann::json& j, const char* key, double fallback) {
  return j.contains(key) ? json_rational(j, key, Rational(0)).get_d() : fallback;
}

}  // namespace

// ---- b rules ----

Rational BRule::value(long k) const {
  switch (kind) {
    case Kind::Geometric: return b0 * rational_pow(step, static_cast<unsigned long>(k));
    case Kind::Linear: return b0 + step * k;
    case Kind::ReciprocalLinear: return 1 / Rational(b0 + step * k);
    case Kind::ExpAffine: return k == 0 ? b0 : exact(std::exp(-(offset + slope * static_cast<double>(k))));
    case Kind::Slow: {
      const double l = std::log2(static_cast<double>(k + 2));
      return exact(up ? l : 1.0 / l);
    }
  }
  return b0;
}

double BRule::log_value(long k) const {
  const double kd = static_cast<double>(k);
  switch (kind) {
    case Kind::Geometric: return log_of(b0) + kd * log_of(step);
    case Kind::Linear: return log_of(Rational(b0 + step * k));
    case Kind::ReciprocalLinear: return -log_of(Rational(b0 + step * k));
    case Kind::ExpAffine: return k == 0 ? log_of(b0) : -(offset + slope * kd);
    case Kind::Slow: {
      const double l = std::log(std::log2(kd + 2.0));
      return up ? l : -l;
    }
  }
  return 0.0;
}

nlohmann::json BRule::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::Geometric:
      j = {{"kind", "geometric"}, {"ratio", to_decimal(step)}, {"b0", to_decimal(b0)}};
      break;
    case Kind::Linear: j = {{"kind", "linear"}, {"slope", to_decimal(step)}, {"b0", to_decimal(b0)}}; break;
    case Kind::ReciprocalLinear:
      j = {{"kind", "reciprocal_linear"}, {"slope", to_decimal(step)}, {"b0", to_decimal(b0)}};
      break;
    case Kind::ExpAffine:
      j = {{"kind", "exp_affine"}, {"b0", to_decimal(b0)}, {"offset", offset}, {"slope", slope}};
      break;
    case Kind::Slow: j = {{"kind", "slow"}, {"direction", up ? "up" : "down"}}; break;
  }
  return j;
}

BRule BRule::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw DomainError("b_rule must be an object with a 'kind'");
  const std::string k = j.at("kind").get<std::string>();
  BRule r;
  if (k == "geometric") {
    r.kind = Kind::Geometric;
    r.step = json_rational(j, "ratio", Rational(2));
    r.b0 = json_rational(j, "b0", Rational(1));
    if (sgn(r.step) <= 0) throw DomainError("geometric ratio must be positive");
  } else if (k == "linear" || k == "reciprocal_linear") {
    r.kind = k == "linear" ? Kind::Linear : Kind::ReciprocalLinear;
    r.step = json_rational(j, "slope", Rational(1));
    r.b0 = json_rational(j, "b0", Rational(1));
    if (sgn(r.step) < 0 || sgn(r.b0) <= 0) throw DomainError(k + " b_rule needs b0 > 0 and slope >= 0");
  } else if (k == "exp_affine") {
    r.kind = Kind::ExpAffine;
    r.b0 = json_rational(j, "b0", Rational(1));
    r.offset = json_double(j, "offset", 0.0);
    r.slope = json_double(j, "slope", 1.0);
  } else if (k == "slow") {
    r.kind = Kind::Slow;
    const std::string d = j.value("direction", std::string("up"));
    if (d != "up" && d != "down") throw DomainError("slow b_rule direction must be 'up' or 'down'");
    r.up = d == "up";
  } else {
    throw DomainError("unknown b_rule kind '" + k + "'");
  }
  return r;
}

// ---- the family table ----

namespace {

enum class AForm { Reciprocal, ReciprocalLog, Quarter, SqrtLog, Log4, Pow2NegB, Pow2NegInvB, LogLog };

enum class Trend { Up, Down };

struct FamilyInfo {
  std::string id;
  bool blocks = true;  // (a_k, b_k) construction in s
  AForm a = AForm::Quarter;
  Trend trend = Trend::Up;
  // b_0 constraint: == 1, >= 1, <= 1 or >= e.
  enum class Start { One, AtLeastOne, AtMostOne, AtLeastE, Free } start = Start::Free;
  bool ratio_bound = false;  // b_k / b_{k-1} <= (k+1)/k
  std::map<Node, bool> header;
};

BRule geometric(const Rational& ratio, const Rational& b0) {
  BRule r;
  r.kind = BRule::Kind::Geometric;
  r.step = ratio;
  r.b0 = b0;
  return r;
}

BRule linear(const Rational& slope, const Rational& b0, bool reciprocal = false) {
  BRule r;
  r.kind = reciprocal ? BRule::Kind::ReciprocalLinear : BRule::Kind::Linear;
  r.step = slope;
  r.b0 = b0;
  return r;
}

const std::vector<FamilyInfo>& table() {
  using N = Node;
  using S = FamilyInfo::Start;
  static const std::vector<FamilyInfo> t = {
      {"Ex6_1", true, AForm::Reciprocal, Trend::Up, S::AtLeastOne, false,
       {{N::P1, true}, {N::P6, false}, {N::B1, true}, {N::P3, false}, {N::AC, false}}},
      {"Ex6_2", true, AForm::Quarter, Trend::Up, S::One, true,
       {{N::P8, true}, {N::P5, false}, {N::P3, true}, {N::P2, false}, {N::AC, false}}},
      {"Ex6_3", true, AForm::SqrtLog, Trend::Down, S::One, false,
       {{N::P8, true}, {N::P5, true}, {N::P2, false}, {N::P3, true}, {N::AC, false}}},
      {"Ex6_4", true, AForm::Log4, Trend::Down, S::One, false,
       {{N::P8, true}, {N::P2, true}, {N::P1, false}, {N::P3, true}, {N::AC, false}}},
      {"Ex6_5", true, AForm::ReciprocalLog, Trend::Up, S::AtLeastOne, false,
       {{N::P1, true}, {N::P6, true}, {N::P3, false}, {N::B1, true}, {N::AC, false}}},
      {"Ex6_6", true, AForm::Pow2NegB, Trend::Up, S::AtLeastOne, false,
       {{N::P1, true}, {N::P3, true}, {N::P8, false}, {N::B1, true}, {N::AC, false}}},
      {"Ex6_7", true, AForm::Pow2NegInvB, Trend::Down, S::AtMostOne, false,
       {{N::P1, true}, {N::P8, true}, {N::AC, false}, {N::P3, true}, {N::BpI, true}, {N::B1, false}}},
      {"Ex6_8", false, AForm::Quarter, Trend::Up, S::One, false, {{N::P7, true}, {N::P4, false}, {N::AC, false}}},
      {"Ex6_9", false, AForm::Quarter, Trend::Up, S::Free, false, {{N::AC, true}, {N::P7, true}, {N::B1, false}}},
      {"Ex6_10", false, AForm::Quarter, Trend::Up, S::Free, false, {{N::AC, true}, {N::P7, false}}},
      {"ExP4_1", true, AForm::Reciprocal, Trend::Up, S::AtLeastOne, false,
       {{N::P1, true}, {N::P4, true}, {N::P4a, false}, {N::B1, true}, {N::P6, false}, {N::AC, false}}},
      {"ExP4_2", true, AForm::LogLog, Trend::Up, S::AtLeastE, false,
       {{N::P1, true}, {N::P4a, true}, {N::P6, false}, {N::AC, false}}},
      {"ExP4_3", true, AForm::Quarter, Trend::Down, S::AtMostOne, false,
       {{N::P8, true}, {N::P5, true}, {N::P4b, false}, {N::AC, false}}},
      {"ExP4_4", true, AForm::SqrtLog, Trend::Down, S::One, false,
       {{N::P8, true}, {N::P4b, true}, {N::P2, false}, {N::P5, true}, {N::AC, false}}},
      {"ExCentre", false, AForm::Quarter, Trend::Up, S::Free, false, {{N::P1, true}, {N::P3, true}, {N::AC, false}}},
      {"constant", false, AForm::Quarter, Trend::Up, S::Free, false, {}},
  };
  return t;
}

const FamilyInfo& info(const std::string& id) {
  for (const FamilyInfo& f : table()) {
    if (f.id == id) return f;
  }
  throw DomainError("unknown family '" + id + "'");
}

// log a_k from log b_k.
double log_a(AForm form, double lb) {
  const double ln2 = std::log(2.0);
  switch (form) {
    case AForm::Reciprocal: return -lb;
    case AForm::ReciprocalLog: return -lb - std::log1p(lb);
    case AForm::Quarter: return std::log(0.25);
    case AForm::SqrtLog: return -0.5 * std::log(16.0 - lb);
    case AForm::Log4: return -std::log(4.0 - lb);
    case AForm::Pow2NegB: return -std::exp(lb) * ln2;
    case AForm::Pow2NegInvB: return -std::exp(-lb) * ln2;
    case AForm::LogLog: return -lb - std::log1p(std::log(lb));
  }
  return 0.0;
}

Rational a_value(AForm form, const Rational& b, double lb) {
  switch (form) {
    case AForm::Reciprocal: return 1 / b;
    case AForm::Quarter: return Rational(1, 4);
    case AForm::Pow2NegB:
      if (b.get_den() == 1 && b.get_num().fits_slong_p()) return pow2(-b.get_num().get_si());
      break;
    case AForm::Pow2NegInvB: {
      const Rational inv = 1 / b;
      if (inv.get_den() == 1 && inv.get_num().fits_slong_p()) return pow2(-inv.get_num().get_si());
      break;
    }
    default: break;
  }
  const double la = log_a(form, lb);
  if (!(la < 0.0)) return Rational(1);
  return exact(std::exp(la));
}

// Ex6_8/9/10: f_n on the u-block (2^{-n-1}, 2^{-n}].
struct UFamily {
  std::function<Rational(long)> value;
  std::function<double(long)> log_value;
  bool nondecreasing = false;  // in t
  bool nonincreasing = false;
  std::optional<Rational> identity_mass;  // s-tail mass, when closed
};

UFamily u_family(const NamedFamily& fam) {
  UFamily u;
  if (fam.id == "Ex6_8") {
    const BRule rule = *fam.b_rule;
    // Products 1/(b_1 ... b_n); log form by summation.
    auto logs = std::make_shared<std::vector<double>>();
    auto vals = std::make_shared<std::vector<Rational>>();
    u.value = [rule, vals](long n) {
      if (vals->empty()) vals->push_back(Rational(1));
      while (static_cast<long>(vals->size()) <= n) {
        const long k = static_cast<long>(vals->size());
        vals->push_back(vals->back() / rule.value(k));
      }
      return (*vals)[static_cast<std::size_t>(n)];
    };
    u.log_value = [rule, logs](long n) {
      if (logs->empty()) logs->push_back(0.0);
      while (static_cast<long>(logs->size()) <= n) {
        const long k = static_cast<long>(logs->size());
        logs->push_back(logs->back() - rule.log_value(k));
      }
      return (*logs)[static_cast<std::size_t>(n)];
    };
    u.nondecreasing = true;
  } else if (fam.id == "Ex6_9") {
    u.value = [](long n) { return pow2(-n); };
    u.log_value = [](long n) { return -static_cast<double>(n) * std::log(2.0); };
    u.nondecreasing = true;
    // sum_{n >= K} 2^{-n} (2^{-n} - 3 2^{-2n-2}) = (4/3) 4^{-K} - (6/7) 8^{-K}
    const long K = fam.depth;
    u.identity_mass = Rational(4, 3) * pow2(-2 * K) - Rational(6, 7) * pow2(-3 * K);
  } else {
    u.value = [](long n) { return pow2(n); };
    u.log_value = [](long n) { return static_cast<double>(n) * std::log(2.0); };
    u.nonincreasing = true;
  }
  return u;
}

StepProfile build_u_family(const NamedFamily& fam, bool native) {
  const UFamily u = u_family(fam);
  const long K = fam.depth;
  std::vector<Rational> bp{Rational(1)};
  std::vector<Rational> vals;
  for (long n = 0; n < K; ++n) {
    vals.push_back(u.value(n));
    bp.push_back(pow2(-n - 1));
  }
  StepProfile p(Coordinate::OneMinusModulus, bp, vals, nullptr);
  if (native) return p;
  StepProfile s = convert_coordinate(p, Coordinate::OneMinusModulusSquared);
  const auto logf = u.log_value;
  // The u-block n has s-length 2^{-n} - 3 2^{-2n-2}.
  SeriesTail::Generator gen = [logf](long n, std::vector<LogPiece>& out) {
    out.clear();
    const double len = -static_cast<double>(n) * std::log(2.0) + std::log1p(-3.0 * std::ldexp(1.0, static_cast<int>(-n - 2)));
    out.push_back({len, logf(n)});
  };
  SeriesTail::Options opts;
  const double edge = std::exp(logf(K));
  if (u.nondecreasing) {
    opts.inf = 0.0;
    opts.sup = edge;
    opts.nondecreasing = true;
  } else {
    opts.inf = edge;
    opts.sup = kInf;
    opts.nonincreasing = true;
  }
  opts.identity_mass = u.identity_mass;
  return s.with_tail(std::make_shared<SeriesTail>(K, gen, opts));
}

}  // namespace

void check_b_rule(const std::string& id, const BRule& rule, long depth) {
  const FamilyInfo& f = info(id);
  if (!f.blocks && id != "Ex6_8") throw DomainError(id + " takes no b_rule");
  const Rational b0 = rule.value(0);
  auto fail = [&](const std::string& what) { throw DomainError(id + ": b_rule violates " + what); };
  switch (f.start) {
    case FamilyInfo::Start::One:
      if (b0 != 1) fail("b_0 = 1");
      break;
    case FamilyInfo::Start::AtLeastOne:
      if (b0 < 1) fail("b_0 >= 1");
      break;
    case FamilyInfo::Start::AtMostOne:
      if (b0 > 1) fail("b_0 <= 1");
      break;
    case FamilyInfo::Start::AtLeastE:
      if (rule.log_value(0) < 1.0) fail("b_0 >= e");
      break;
    case FamilyInfo::Start::Free: break;
  }
  for (long k = 1; k <= depth + 1; ++k) {
    const Rational prev = rule.value(k - 1);
    const Rational cur = rule.value(k);
    if (sgn(cur) <= 0) fail("b_k > 0");
    if (f.trend == Trend::Up && !(cur > prev)) fail("b_k increasing");
    if (f.trend == Trend::Down && !(cur < prev)) fail("b_k decreasing");
    if (f.ratio_bound && cur * k > prev * (k + 1)) fail("b_k / b_{k-1} <= (k+1)/k");
  }
  if (f.a == AForm::SqrtLog) {
    for (long k = 0; k <= depth; ++k) {
      if (!(rule.log_value(k) < 16.0)) fail("log b_k < 16");
    }
  }
}

std::optional<BRule> default_b_rule(const std::string& id) {
  if (id == "Ex6_1" || id == "ExP4_1" || id == "Ex6_5") return geometric(Rational(2), Rational(1));
  if (id == "Ex6_2" || id == "Ex6_8") return linear(Rational(1), Rational(1));
  if (id == "Ex6_3" || id == "ExP4_4") {
    BRule r;
    r.kind = BRule::Kind::ExpAffine;
    r.b0 = 1;
    r.offset = 384.0;
    r.slope = 1.0;
    return r;
  }
  if (id == "ExP4_3") return geometric(Rational(1, 2), Rational(1));
  // a_k log b_k = -1 + 4/(4 - log b_k); a steep ratio keeps that error small at desk depth.
  if (id == "Ex6_4") return geometric(Rational(1, 1024), Rational(1));
  if (id == "Ex6_6") return linear(Rational(4), Rational(4));
  if (id == "Ex6_7") return linear(Rational(4), Rational(4), true);
  if (id == "ExP4_2") {
    // b_0 = e is not rational; round up so that b_0 >= e still holds.
    return geometric(Rational(2), exact(next_up(std::exp(1.0))));
  }
  return std::nullopt;
}

DyadicBlockFamily dyadic_family(const std::string& id, const BRule& rule, long depth) {
  const FamilyInfo& f = info(id);
  if (!f.blocks) throw DomainError(id + " is not an (a_k, b_k) family");
  DyadicBlockFamily d;
  d.name = id;
  d.depth = depth;
  const AForm form = f.a;
  d.b.value = [rule](long k) { return rule.value(k); };
  d.b.log_value = [rule](long k) { return rule.log_value(k); };
  d.a.value = [rule, form](long k) { return a_value(form, rule.value(k), rule.log_value(k)); };
  d.a.log_value = [rule, form](long k) { return log_a(form, rule.log_value(k)); };
  return d;
}

std::string NamedFamily::label() const {
  if (id == "ExCentre") return "ExCentre(r=" + to_decimal(r) + ")";
  return id;
}

nlohmann::json NamedFamily::to_json() const {
  nlohmann::json j;
  j["id"] = label();
  j["b_rule"] = b_rule ? b_rule->to_json() : nlohmann::json(nullptr);
  j["depth"] = depth;
  return j;
}

NamedFamily parse_family(const std::string& text, long depth) {
  static const std::regex centre(R"(ExCentre\((?:r=)?([^)]+)\))");
  NamedFamily f;
  f.depth = depth;
  std::smatch m;
  if (std::regex_match(text, m, centre)) {
    f.id = "ExCentre";
    f.r = parse_decimal(m[1].str()).get_d();
    if (!(f.r > -1.0) || f.r == 0.0) throw DomainError("ExCentre needs r > -1 and r != 0");
    return f;
  }
  if (text == "ExCentre") throw DomainError("ExCentre needs an exponent, e.g. ExCentre(-0.5)");
  info(text);
  f.id = text;
  f.b_rule = default_b_rule(text);
  return f;
}

NamedFamily family_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("id")) throw DomainError("family spec needs an 'id'");
  const long depth = j.value("depth", 104L);
  if (depth < 1) throw DomainError("family depth must be positive");
  NamedFamily f = parse_family(j.at("id").get<std::string>(), depth);
  if (j.contains("r") && f.id == "ExCentre") f.r = json_double(j, "r", f.r);
  if (j.contains("b_rule") && !j.at("b_rule").is_null()) {
    if (!f.b_rule) throw DomainError(f.id + " takes no b_rule");
    f.b_rule = BRule::from_json(j.at("b_rule"));
  }
  return f;
}

Profile instantiate(const NamedFamily& fam) {
  if (fam.id == "ExCentre") return PowerProfile(fam.r);
  if (fam.id == "constant") return constant_profile(Rational(1));
  if (fam.depth < 1) throw DomainError("family depth must be positive");
  if (fam.b_rule) check_b_rule(fam.id, *fam.b_rule, fam.depth);
  const FamilyInfo& f = info(fam.id);
  if (!f.blocks) return build_u_family(fam, false);
  return build_family(dyadic_family(fam.id, *fam.b_rule, fam.depth));
}

Profile instantiate(const std::string& id, const std::optional<BRule>& rule, long depth) {
  NamedFamily f = parse_family(id, depth);
  if (rule) {
    if (!f.b_rule) throw DomainError(f.id + " takes no b_rule");
    f.b_rule = rule;
  }
  return instantiate(f);
}

StepProfile instantiate_native(const NamedFamily& fam) {
  if (fam.id == "Ex6_8" || fam.id == "Ex6_9" || fam.id == "Ex6_10") {
    if (fam.b_rule) check_b_rule(fam.id, *fam.b_rule, fam.depth);
    return build_u_family(fam, true);
  }
  Profile p = instantiate(fam);
  if (auto* s = std::get_if<StepProfile>(&p)) return *s;
  throw Unsupported("power profiles have no step form");
}

std::vector<std::string> named_family_ids() {
  return {"Ex6_1",  "Ex6_2",  "Ex6_3",  "Ex6_4",          "Ex6_5",         "Ex6_6",
          "Ex6_7",  "Ex6_8",  "Ex6_9",  "Ex6_10",         "ExP4_1",        "ExP4_2",
          "ExP4_3", "ExP4_4", "ExCentre(-0.5)", "ExCentre(1)", "constant"};
}

bool is_non_integrable(const std::string& id) { return id == "Ex6_10"; }

ExpectedBehavior expected_behavior(const std::string& text) {
  const NamedFamily fam = parse_family(text);
  const FamilyInfo& f = info(fam.id);
  const ImplicationGraph g = build_graph();
  ExpectedBehavior out;
  std::map<Node, bool> header = f.header;
  if (fam.id == "constant") {
    for (Node n : g.nodes) header[n] = true;
  }
  ActiveSides sides;
  sides.ac = header.count(Node::AC) && header.at(Node::AC);
  // Weights with 0 < w(0) < inf that decrease (resp. increase) away from the centre.
  sides.dec = fam.id == "Ex6_8" || fam.id == "Ex6_9";
  sides.inc = fam.id == "Ex6_10";
  const auto reach = closure(g, sides);
  auto set = [&](Node n, bool v, const std::string& src) {
    const auto it = out.holds.find(n);
    if (it != out.holds.end()) {
      if (it->second != v) throw WeightlabError("expected behavior of " + text + " is inconsistent at " + kind_name(n));
      return;
    }
    out.holds[n] = v;
    out.source[n] = src;
  };
  for (const auto& [n, v] : header) set(n, v, "header");
  for (Node n : forced(g, sides)) set(n, true, "closure");
  for (const auto& [n, v] : header) {
    if (v) {
      for (Node m : reach.at(n)) set(m, true, "closure");
    } else {
      for (const auto& [a, targets] : reach) {
        if (targets.count(n)) set(a, false, "closure");
      }
    }
  }
  // Second pass so that forced nodes propagate too.
  const auto snapshot = out.holds;
  for (const auto& [n, v] : snapshot) {
    if (v) {
      for (Node m : reach.at(n)) set(m, true, "closure");
    } else {
      for (const auto& [a, targets] : reach) {
        if (targets.count(n)) set(a, false, "closure");
      }
    }
  }
  return out;
}

}  // namespace weightlab
