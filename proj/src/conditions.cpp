#include "weightlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "weightlab/maximal.hpp"

namespace weightlab {

// ---- condition ids ----

std::string kind_name(ConditionKind k) {
  switch (k) {
    case ConditionKind::P1: return "P1";
    case ConditionKind::P2: return "P2";
    case ConditionKind::P3: return "P3";
    case ConditionKind::P4: return "P4";
    case ConditionKind::P4a: return "P4a";
    case ConditionKind::P4b: return "P4b";
    case ConditionKind::P5: return "P5";
    case ConditionKind::P6: return "P6";
    case ConditionKind::P6e: return "P6e";
    case ConditionKind::P7: return "P7";
    case ConditionKind::P8: return "P8";
    case ConditionKind::B1: return "B1";
    case ConditionKind::BpI: return "BpIntersection";
    case ConditionKind::AC: return "AC";
  }
  return "?";
}

namespace {

const char* param_label(ConditionKind k) {
  switch (k) {
    case ConditionKind::P1: return "p";
    case ConditionKind::P3: return "q";
    case ConditionKind::P4: return "alpha";
    case ConditionKind::P8: return "beta";
    default: return nullptr;
  }
}

}  // namespace

std::string ConditionId::name() const {
  std::string out = kind_name(kind);
  if (param) out += std::string("(") + param_label(kind) + "=" + to_decimal(*param) + ")";
  return out;
}

ConditionId ConditionId::parse(const std::string& raw) {
  std::string text;
  for (char ch : raw) {
    if (ch != ' ') text += ch;
  }
  std::string head = text;
  std::optional<double> param;
  const auto open = text.find('(');
  if (open != std::string::npos) {
    if (text.back() != ')') throw DomainError("malformed condition '" + raw + "'");
    head = text.substr(0, open);
    std::string inner = text.substr(open + 1, text.size() - open - 2);
    const auto eq = inner.find('=');
    if (eq != std::string::npos) inner = inner.substr(eq + 1);
    try {
      param = parse_decimal(inner).get_d();
    } catch (const std::exception&) {
      throw DomainError("malformed condition parameter in '" + raw + "'");
    }
  }
  static const std::map<std::string, ConditionKind> names = {
      {"P1", ConditionKind::P1},   {"P2", ConditionKind::P2},   {"P3", ConditionKind::P3},
      {"P4", ConditionKind::P4},   {"P4a", ConditionKind::P4a}, {"P4b", ConditionKind::P4b},
      {"P5", ConditionKind::P5},   {"P6", ConditionKind::P6},   {"P6e", ConditionKind::P6e},
      {"P7", ConditionKind::P7},   {"P8", ConditionKind::P8},   {"B1", ConditionKind::B1},
      {"BpIntersection", ConditionKind::BpI}, {"BpI", ConditionKind::BpI}, {"AC", ConditionKind::AC},
      {"RJ", ConditionKind::P2},   {"RH", ConditionKind::P3},   {"Binf", ConditionKind::P7},
      {"BpUnion", ConditionKind::P1}};
  const auto it = names.find(head);
  if (it == names.end()) throw DomainError("unknown condition '" + raw + "'");
  ConditionId id{it->second, param};
  if (param) {
    const double v = *param;
    switch (id.kind) {
      case ConditionKind::P1:
      case ConditionKind::P3:
        if (!(v > 1.0)) throw DomainError("exponent must exceed 1 in '" + raw + "'");
        break;
      case ConditionKind::P4:
        if (!(v > 0.0 && v < 1.0)) throw DomainError("alpha must lie in (0, 1) in '" + raw + "'");
        break;
      case ConditionKind::P8:
        if (!(v > 0.0 && v <= 1.0)) throw DomainError("beta must lie in (0, 1] in '" + raw + "'");
        break;
      default: throw DomainError("condition " + head + " takes no parameter");
    }
  }
  return id;
}

std::vector<ConditionId> ConditionId::all() {
  std::vector<ConditionId> out;
  for (ConditionKind k : {ConditionKind::P1, ConditionKind::P2, ConditionKind::P3, ConditionKind::P4,
                          ConditionKind::P4a, ConditionKind::P4b, ConditionKind::P5, ConditionKind::P6,
                          ConditionKind::P6e, ConditionKind::P7, ConditionKind::P8, ConditionKind::B1,
                          ConditionKind::BpI, ConditionKind::AC}) {
    out.push_back({k, std::nullopt});
  }
  return out;
}

bool ConditionId::operator<(const ConditionId& o) const {
  if (kind != o.kind) return kind < o.kind;
  return param < o.param;
}

std::vector<double> p1_grid() { return {1.5, 2.0, 3.0, 5.0, 10.0}; }
std::vector<double> p3_grid() { return {1.25, 1.5, 2.0, 3.0, 5.0, 10.0}; }
std::vector<double> p4_grid() { return {0.5, 0.25, 0.125}; }
std::vector<double> p4b_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }
std::vector<double> p8_base_grid() { return {1.0, 0.5, 0.25, 0.125}; }
int p4a_levels() { return 20; }

// ---- functionals ----

namespace {

BoundPair on_log(const LogBound& l) { return BoundPair::of(l.lo, l.hi); }

BoundPair log_scale(const Rational& x) { return widen(BoundPair::around(log_of(x), 2), kTranscendentalSlack); }

BoundPair scalar(double v) { return BoundPair::of(exact(v)); }

// exp of an enclosure given on the log scale, keeping +inf and 0 as limits.
BoundPair exp_bound(const BoundPair& l) {
  BoundPair out = exp_of(l);
  out.lo = std::max(out.lo, 0.0);
  return out;
}

const StepProfile& need_step(const Profile& p, const char* what) {
  if (const auto* s = std::get_if<StepProfile>(&p)) return *s;
  throw Unsupported(std::string(what) + " is not available for power profiles");
}

}  // namespace

BoundPair average(const Profile& p, const Rational& x) {
  return moment(p, x, Transform::identity()) / BoundPair::of(x);
}

BoundPair p1_functional(const Profile& p, const Rational& x, double exp_p) {
  if (!(exp_p > 1.0)) throw DomainError("P1 needs p > 1");
  const double neg = -1.0 / (exp_p - 1.0);  // 1 - p'
  const BoundPair lx = log_scale(x);
  const BoundPair l1 = on_log(log_moment(p, x, Transform::identity())) - lx;
  const BoundPair lq = on_log(log_moment(p, x, Transform::power(neg))) - lx;
  return exp_bound(l1 + scalar(exp_p - 1.0) * lq);
}

BoundPair rj_functional(const Profile& p, const Rational& x) {
  const BoundPair la = on_log(log_moment(p, x, Transform::identity())) - log_scale(x);
  const BoundPair mlog = moment(p, x, Transform::log()) / BoundPair::of(x);
  return exp_bound(la - mlog);
}

BoundPair rh_functional(const Profile& p, const Rational& x, double q) {
  if (!(q > 1.0)) throw DomainError("P3 needs q > 1");
  const BoundPair lx = log_scale(x);
  const BoundPair l1 = on_log(log_moment(p, x, Transform::identity())) - lx;
  const BoundPair lq = on_log(log_moment(p, x, Transform::power(q))) - lx;
  return exp_bound(lq / scalar(q) - l1);
}

BoundPair p5_functional(const Profile& p, const Rational& x) { return average(p, x) / median(p, x); }

BoundPair p6_functional(const Profile& p, const Rational& x) {
  const LogBound l1 = log_moment(p, x, Transform::identity());
  const BoundPair avg = exp_bound(on_log(l1) - log_scale(x));
  const LogBound l = log_moment(p, x, Transform::logplus_relative(avg));
  if (l.hi == -kInf) return BoundPair::of(Rational(0));
  return exp_bound(on_log(l) - on_log(l1));
}

BoundPair p6e_functional(const Profile& p, const Rational& x) {
  const LogBound l1 = log_moment(p, x, Transform::identity());
  const BoundPair avg = exp_bound(on_log(l1) - log_scale(x));
  const LogBound l = log_moment(p, x, Transform::loge_plus_relative(avg));
  return exp_bound(on_log(l) - on_log(l1));
}

BoundPair p7_functional(const Profile& p, const Rational& x) {
  const StepProfile& s = need_step(p, "P7");
  return maximal_integral(s, x) / moment(p, x, Transform::identity());
}

BoundPair b1_functional(const Profile& p, const Rational& x) {
  return average(p, x) / ess_bounds(p, Rational(0), x).inf;
}

P8Result p8_worst(const StepProfile& p, const Rational& x, const Rational& beta) {
  if (!(sgn(beta) > 0 && beta <= 1)) throw DomainError("P8 needs 0 < beta <= 1");
  const Window w = window(p, x);
  const BoundPair T = w.tail_mass;
  const bool has_tail = sgn(w.tail_len) > 0;
  if (has_tail && !std::isfinite(T.hi)) throw NonIntegrable("tail mass is infinite");
  const Rational T_hi = T.exact ? *T.exact : exact(T.hi);
  // The admissible range is lambda > average; an inexact average is replaced by its upper end.
  Rational avg;
  if (T.exact) avg = (w.mat_mass + *T.exact) / x;
  else avg = (w.mat_mass + T_hi) / x;
  P8Result best{BoundPair::of(Rational(0)), avg};
  if (w.values.empty()) return best;
  const Rational vmax = w.values.front();

  std::vector<Rational> cands{avg};
  for (const Rational& v : w.values) {
    cands.push_back(v);
    cands.push_back(v / beta);
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  for (const Rational& c : cands) {
    // Levels are restricted to the materialized range: above vmax only tail mass remains.
    if (c < avg || c >= vmax) continue;
    const auto [len_c, mass_c] = w.above(c);
    if (sgn(mass_c) == 0) continue;
    const Rational len_b = w.above(beta * c).first;
    BoundPair r;
    const bool bounded = std::isfinite(w.tail_sup);
    const bool tail_above_c = has_tail && !(bounded && exact(w.tail_sup) <= c);
    const bool tail_above_bc = has_tail && !(bounded && exact(w.tail_sup) <= beta * c);
    if (!tail_above_c && !tail_above_bc) {
      r = BoundPair::of(Rational(mass_c / (c * len_b)));
    } else {
      // The tail's share of both level sets, from its own block sums.
      const Tail& tail = p.tail();
      BoundPair tm = BoundPair::of(Rational(0));
      BoundPair tl = BoundPair::of(Rational(0));
      if (tail_above_c) tm = from_log(tail.log_moment(Transform::mass_above(c)));
      if (tail_above_bc) tl = from_log(tail.log_moment(Transform::indicator_above(beta * c)));
      const BoundPair num = BoundPair::of(mass_c) + tm;
      const BoundPair den = BoundPair::of(c) * (BoundPair::of(len_b) + tl);
      r = num / den;
    }
    if (r.hi > best.value.hi || (r.hi == best.value.hi && r.lo > best.value.lo)) {
      best.value = max_of(best.value, r);
      best.lambda = c;
    } else {
      best.value = max_of(best.value, r);
    }
  }
  return best;
}

std::vector<Rational> ConcentrationCurve::alphas() const {
  std::vector<Rational> out;
  for (const Rational& l : w.len_ge) out.push_back(l / w.x);
  return out;
}

Rational ConcentrationCurve::greedy_mass(const Rational& L) const {
  if (sgn(L) <= 0) return Rational(0);
  if (L >= w.mat_len) return w.mat_mass;
  const auto it = std::partition_point(w.len_ge.begin(), w.len_ge.end(), [&](const Rational& l) { return l < L; });
  const std::size_t j = static_cast<std::size_t>(it - w.len_ge.begin());
  const Rational prev_len = j ? w.len_ge[j - 1] : Rational(0);
  const Rational prev_mass = j ? w.mass_ge[j - 1] : Rational(0);
  return prev_mass + (L - prev_len) * w.values[j];
}

BoundPair ConcentrationCurve::at(const Rational& alpha) const {
  const Rational g = greedy_mass(alpha * w.x);
  if (sgn(w.tail_len) == 0) return BoundPair::of(Rational(g / w.mat_mass));
  const Rational T_hi = w.tail_mass.exact ? *w.tail_mass.exact : exact(w.tail_mass.hi);
  const Rational den = w.mat_mass + T_hi;
  Rational hi = (g + T_hi) / den;
  if (hi > 1) hi = 1;
  return BoundPair::of(down(Rational(g / den)), up(hi));
}

ConcentrationCurve concentration_curve(const StepProfile& p, const Rational& x) { return {window(p, x)}; }

namespace {

// Breakpoints of p strictly inside (lo, hi), hi above the coverage.
std::vector<Rational> breakpoints_in(const StepProfile& p, const Rational& lo, const Rational& hi) {
  std::vector<Rational> out;
  Rational top = hi > 1 ? Rational(1) : hi;
  if (!(top > p.coverage())) return out;
  const auto& pieces = p.pieces();
  for (std::size_t i = p.locate(top); i < pieces.size(); ++i) {
    if (!(pieces[i].lo > lo)) break;
    if (pieces[i].lo < hi) out.push_back(pieces[i].lo);
  }
  return out;
}

}  // namespace

std::vector<Rational> block_scales(const Profile& p, long n) {
  const Rational top = pow2(-n);
  const Rational bottom = pow2(-n - 1);
  std::vector<Rational> xs{top};
  if (const auto* s = std::get_if<StepProfile>(&p)) {
    for (const Rational& c : breakpoints_in(*s, bottom / 2, top)) {
      if (c > bottom) xs.push_back(c);
      for (long j = 1; j <= 6; ++j) {
        const Rational y = c * (1 + pow2(-j));
        if (y > bottom && y < top) xs.push_back(y);
      }
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

BoundPair concentration_block_sup(const StepProfile& p, long n, const Rational& alpha) {
  const Rational top = pow2(-n);
  const Rational bottom = pow2(-n - 1);
  std::vector<Rational> xs{top};
  for (const Rational& c : breakpoints_in(p, bottom, top)) xs.push_back(c);
  const Rational keep = 1 - alpha;
  for (const Rational& c : breakpoints_in(p, keep * bottom, keep * top)) xs.push_back(c / keep);
  BoundPair best = BoundPair::of(Rational(0));
  for (const Rational& x : xs) {
    if (!(x > bottom) || x > top) continue;
    best = max_of(best, concentration_curve(p, x).at(alpha));
  }
  return best;
}

BoundPair ac_ratio(const Profile& p, const Rational& ell) {
  if (sgn(ell) <= 0 || ell > 1) throw DomainError("arc length must lie in (0, 1]");
  Coordinate c = Coordinate::OneMinusModulusSquared;
  if (const auto* s = std::get_if<StepProfile>(&p)) c = s->coordinate();
  Rational lo, hi;
  if (c == Coordinate::OneMinusModulusSquared) {
    lo = ell * (1 - ell / 4);
    hi = ell * (2 - ell);
  } else {
    lo = ell / 2;
    hi = ell;
  }
  const EssBounds eb = ess_bounds_open(p, lo, hi);
  return eb.sup / eb.inf;
}

BoundPair ac_block_sup(const Profile& p, long n) {
  const Rational top = pow2(-n);
  const Rational bottom = pow2(-n - 1);
  std::vector<Rational> pts{bottom, top};
  if (const auto* s = std::get_if<StepProfile>(&p)) {
    const bool sq = s->coordinate() == Coordinate::OneMinusModulusSquared;
    const Rational range_lo = sq ? Rational(bottom * (1 - bottom / 4)) : Rational(bottom / 2);
    const Rational range_hi = sq ? Rational(top * (2 - top)) : top;
    for (const Rational& c : breakpoints_in(*s, range_lo, range_hi)) {
      std::vector<double> crit;
      if (sq) {
        const double r = std::sqrt(1.0 - c.get_d());
        crit = {2.0 - 2.0 * r, 1.0 - r};
      } else {
        crit = {2.0 * c.get_d(), c.get_d()};
      }
      for (double e : crit) {
        const Rational q = exact(e);
        if (q > bottom && q < top) pts.push_back(q);
      }
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  BoundPair best = ac_ratio(p, top);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) best = max_of(best, ac_ratio(p, (pts[i] + pts[i + 1]) / 2));
  return best;
}

// ---- verdicts ----

std::string Verdict::kind_name() const {
  switch (kind) {
    case Kind::Holds: return "holds";
    case Kind::Fails: return "fails";
    case Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict classify_samples(const std::vector<FunctionalSample>& s, double factor) {
  Verdict v;
  if (s.empty()) {
    v.reason = "no samples";
    return v;
  }
  for (const FunctionalSample& f : s) {
    if (f.value.lo == kInf) {
      v.kind = Verdict::Kind::Fails;
      v.witness_n = f.n;
      v.witness_value = f.value;
      v.reason = "infinite sample";
      return v;
    }
  }
  const std::size_t N = s.size() - 1;
  const std::size_t q = (3 * N) / 4;
  bool rising = true;
  for (std::size_t i = q; i < N; ++i) {
    if (s[i + 1].value.hi < s[i].value.lo * (1.0 - 1e-12)) rising = false;
  }
  const double base = std::max(s[0].value.hi, 1.0);
  // Growth that is slowing faster than a logarithm is a limit being approached.
  const std::size_t quarter = N / 4, half_n = N / 2;
  const double late = s[N].value.lo - s[q].value.hi;
  const double early = s[half_n].value.hi - s[quarter].value.lo;
  const bool sustained = !(early > 0.0) || late >= 0.3 * early;
  if (N > 0 && s[N].value.lo >= factor * base && rising && sustained && s[N].value.lo >= 1.1 * s[q].value.hi) {
    v.kind = Verdict::Kind::Fails;
    v.witness_n = s[N].n;
    v.witness_value = s[N].value;
    v.reason = "growth beyond divergence factor";
    return v;
  }
  // Bounded: nothing in the deeper half rises more than 10% above the shallower half.
  const std::size_t half = N / 2;
  double head = 0.0, tail = 0.0, all = 0.0;
  for (std::size_t i = 0; i <= N; ++i) {
    double& slot = i <= half ? head : tail;
    slot = std::max(slot, s[i].value.hi);
    all = std::max(all, s[i].value.hi);
  }
  bool informative = true;
  for (const FunctionalSample& f : s) informative = informative && f.value.hi <= 10.0 * f.value.lo + 1e-6;
  if (std::isfinite(all) && informative && (N == 0 || tail <= 1.1 * head + 1e-9)) {
    v.kind = Verdict::Kind::Holds;
    v.constant = all;
    return v;
  }
  v.reason = !std::isfinite(all) ? "unbounded enclosure"
             : !informative        ? "enclosure too wide"
                                   : "growth below divergence threshold";
  return v;
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json j;
  j["condition"] = condition.name();
  nlohmann::json params = nlohmann::json::object();
  if (condition.param) params[param_label(condition.kind)] = to_decimal(*condition.param);
  j["params"] = params;
  nlohmann::json samples_j = nlohmann::json::array();
  for (const FunctionalSample& f : samples) {
    nlohmann::json sj;
    sj["n"] = f.n;
    sj["x"] = "2^-" + std::to_string(f.n);
    sj["lo"] = to_decimal(f.value.lo);
    sj["hi"] = to_decimal(f.value.hi);
    if (!f.aux.is_null()) sj["aux"] = f.aux;
    samples_j.push_back(sj);
  }
  j["samples"] = samples_j;
  nlohmann::json vj;
  vj["kind"] = verdict.kind_name();
  if (verdict.kind == Verdict::Kind::Holds) vj["constant"] = to_decimal(verdict.constant);
  if (verdict.kind == Verdict::Kind::Fails && verdict.witness_n >= 0) {
    vj["witness"] = {{"n", verdict.witness_n},
                     {"lo", to_decimal(verdict.witness_value.lo)},
                     {"hi", to_decimal(verdict.witness_value.hi)}};
  }
  if (!verdict.reason.empty()) vj["reason"] = verdict.reason;
  j["verdict"] = vj;
  if (!error.empty()) j["error"] = error;
  if (!sub.empty()) {
    nlohmann::json subj = nlohmann::json::array();
    for (const SweepReport& r : sub) subj.push_back(r.to_json());
    j["sub"] = subj;
  }
  j["caveat"] = "finite-sweep";
  return j;
}

// ---- classifier ----

namespace {

SweepReport combine(const ConditionId& id, std::vector<SweepReport> subs, bool existential) {
  SweepReport r;
  r.condition = id;
  bool any_holds = false, any_fails = false, all_holds = true, all_fails = true;
  const SweepReport* first_holds = nullptr;
  const SweepReport* first_fails = nullptr;
  for (const SweepReport& s : subs) {
    const auto k = s.verdict.kind;
    if (k == Verdict::Kind::Holds) {
      any_holds = true;
      if (!first_holds) first_holds = &s;
    } else {
      all_holds = false;
    }
    if (k == Verdict::Kind::Fails) {
      any_fails = true;
      if (!first_fails) first_fails = &s;
    } else {
      all_fails = false;
    }
    if (r.error.empty() && !s.error.empty()) r.error = s.error;
  }
  if (existential) {
    if (any_holds) {
      r.verdict = first_holds->verdict;
      r.verdict.reason = "holds at " + first_holds->condition.name();
    } else if (all_fails) {
      r.verdict = first_fails->verdict;
      r.verdict.reason = "fails at every grid parameter";
    } else {
      r.verdict.reason = "no grid parameter holds";
    }
  } else {
    if (any_fails) {
      r.verdict = first_fails->verdict;
      r.verdict.reason = "fails at " + first_fails->condition.name();
    } else if (all_holds) {
      double c = 0.0;
      for (const SweepReport& s : subs) c = std::max(c, s.verdict.constant);
      r.verdict.kind = Verdict::Kind::Holds;
      r.verdict.constant = c;
    } else {
      r.verdict.reason = "some grid parameter inconclusive";
    }
  }
  r.sub = std::move(subs);
  return r;
}

}  // namespace

Classifier::Classifier(Profile p, ClassifyOptions opts) : profile_(std::move(p)), opts_(opts) {
  if (opts_.n_max < 1) throw DomainError("n_max must be at least 1");
  if (!(opts_.divergence_factor > 1.0)) throw DomainError("divergence factor must exceed 1");
  if (const auto* s = std::get_if<StepProfile>(&profile_)) {
    if (s->has_tail() && pow2(-opts_.n_max - 1) < s->coverage()) {
      throw TailError("sweep depth n_max exceeds the materialized depth");
    }
  }
}

bool Classifier::integrable() {
  if (!integrable_) {
    const BoundPair m = moment(profile_, Rational(1), Transform::identity());
    integrable_ = std::isfinite(m.hi);
  }
  return *integrable_;
}

bool Classifier::decreasing_weight() const {
  if (const auto* s = std::get_if<StepProfile>(&profile_)) return s->nondecreasing_in_t();
  return false;
}

bool Classifier::increasing_weight() const {
  if (const auto* s = std::get_if<StepProfile>(&profile_)) return s->nonincreasing_in_t();
  return false;
}

SweepReport Classifier::scalar_sweep(const ConditionId& c) {
  const auto cached = scalar_cache_.find(c);
  if (cached != scalar_cache_.end()) return cached->second;
  auto eval = [&](const Rational& x) {
    switch (c.kind) {
      case ConditionKind::P1: return p1_functional(profile_, x, *c.param);
      case ConditionKind::P2: return rj_functional(profile_, x);
      case ConditionKind::P3: return rh_functional(profile_, x, *c.param);
      case ConditionKind::P5: return p5_functional(profile_, x);
      case ConditionKind::P6: return p6_functional(profile_, x);
      case ConditionKind::P6e: return p6e_functional(profile_, x);
      case ConditionKind::P7: return p7_functional(profile_, x);
      case ConditionKind::B1: return b1_functional(profile_, x);
      default: throw DomainError("not a scalar condition");
    }
  };
  SweepReport r;
  r.condition = c;
  for (long n = 0; n <= opts_.n_max; ++n) {
    FunctionalSample f;
    f.n = n;
    try {
      Rational arg = pow2(-n);
      f.value = eval(arg);
      for (const Rational& x : block_scales(profile_, n)) {
        if (x == pow2(-n)) continue;
        const BoundPair v = eval(x);
        if (v.hi > f.value.hi) arg = x;
        f.value = max_of(f.value, v);
      }
      if (arg != pow2(-n)) f.aux = {{"argmax_x", to_decimal(arg.get_d())}};
    } catch (const DivergentMoment& e) {
      f.value = BoundPair::of(kInf, kInf);
      f.aux = {{"error", "divergent-moment"}, {"message", e.what()}};
      r.error = "divergent-moment";
    }
    r.samples.push_back(std::move(f));
  }
  r.verdict = classify_samples(r.samples, opts_.divergence_factor);
  scalar_cache_[c] = r;
  return r;
}

SweepReport Classifier::p4_single(double alpha) {
  const ConditionId id{ConditionKind::P4, alpha};
  const auto cached = scalar_cache_.find(id);
  if (cached != scalar_cache_.end()) return cached->second;
  const StepProfile& s = need_step(profile_, "P4");
  SweepReport r;
  r.condition = id;
  const Rational a = exact(alpha);
  for (long n = 0; n <= opts_.n_max; ++n) {
    const BoundPair k = concentration_block_sup(s, n, a);
    FunctionalSample f;
    f.n = n;
    // Odds 1/(1-K): bounded exactly when K stays away from 1.
    f.value = BoundPair::of(Rational(1)) / (BoundPair::of(Rational(1)) - k);
    f.aux = {{"K_lo", to_decimal(k.lo)}, {"K_hi", to_decimal(k.hi)}};
    r.samples.push_back(std::move(f));
  }
  r.verdict = classify_samples(r.samples, opts_.divergence_factor);
  scalar_cache_[id] = r;
  return r;
}

SweepReport Classifier::p4a() {
  const StepProfile& s = need_step(profile_, "P4a");
  SweepReport r;
  r.condition = {ConditionKind::P4a, std::nullopt};
  const int levels = p4a_levels();
  for (int j = 1; j <= levels; ++j) {
    const Rational a = pow2(-j);
    BoundPair kappa = BoundPair::of(Rational(0));
    long arg = 0;
    for (long n = 0; n <= opts_.n_max; ++n) {
      const BoundPair k = concentration_block_sup(s, n, a);
      if (k.hi > kappa.hi) arg = n;
      kappa = max_of(kappa, k);
    }
    FunctionalSample f;
    f.n = j;
    f.value = kappa;
    f.aux = {{"alpha", "2^-" + std::to_string(j)}, {"argmax_n", arg}};
    r.samples.push_back(std::move(f));
  }
  // kappa_j = sup_x K_x(2^-j) must tend to 0 for P4a. A flat tail of the
  // sequence refutes it; steady decay over the deeper half supports it.
  const auto& sm = r.samples;
  const std::size_t last = sm.size() - 1;
  const std::size_t half = sm.size() / 2;
  bool decreasing = true;
  for (std::size_t i = half; i < last; ++i) {
    if (sm[i + 1].value.lo > sm[i].value.hi + 1e-12) decreasing = false;
  }
  const double first = sm.front().value.hi;
  const double mid = sm[half - 1].value.hi;
  const double end = sm[last].value.hi;
  // P4a with beta = 1/2 already gives P4, so a failing P4 settles it.
  const SweepReport p4 = classify_unchecked({ConditionKind::P4, std::nullopt});
  if (p4.verdict.kind == Verdict::Kind::Fails) {
    r.verdict = p4.verdict;
    r.verdict.reason = "P4 fails at every grid alpha";
  } else if (sm[last].value.lo >= 0.95 * sm[half - 1].value.hi) {
    r.verdict.kind = Verdict::Kind::Fails;
    r.verdict.witness_n = sm[last].n;
    r.verdict.witness_value = sm[last].value;
    r.verdict.reason = "concentration does not decay as alpha shrinks";
  } else if (decreasing && end <= 0.9 * mid && end <= 0.5 * first) {
    r.verdict.kind = Verdict::Kind::Holds;
    r.verdict.constant = end;
  } else {
    r.verdict.reason = "concentration decay undetermined";
  }
  return r;
}

SweepReport Classifier::p4b() {
  std::vector<SweepReport> subs;
  for (double a : p4b_grid()) {
    SweepReport r = p4_single(a);
    subs.push_back(std::move(r));
  }
  return combine({ConditionKind::P4b, std::nullopt}, std::move(subs), false);
}

SweepReport Classifier::p8_single(const Rational& beta, const ConditionId& id) {
  const StepProfile& s = need_step(profile_, "P8");
  SweepReport r;
  r.condition = id;
  for (long n = 0; n <= opts_.n_max; ++n) {
    const P8Result res = p8_worst(s, pow2(-n), beta);
    FunctionalSample f;
    f.n = n;
    f.value = res.value;
    f.aux = {{"lambda", to_decimal(res.lambda.get_d())}};
    r.samples.push_back(std::move(f));
  }
  r.verdict = classify_samples(r.samples, opts_.divergence_factor);
  return r;
}

const SweepReport& Classifier::ac() {
  if (!ac_) {
    SweepReport r;
    r.condition = {ConditionKind::AC, std::nullopt};
    for (long n = 0; n <= opts_.n_max; ++n) {
      FunctionalSample f;
      f.n = n;
      f.value = ac_block_sup(profile_, n);
      r.samples.push_back(std::move(f));
    }
    r.verdict = classify_samples(r.samples, opts_.divergence_factor);
    ac_ = std::move(r);
  }
  return *ac_;
}

SweepReport Classifier::classify(const ConditionId& c) {
  SweepReport r = classify_unchecked(c);
  if (r.verdict.kind == Verdict::Kind::Holds && opts_.n_max < kMinHoldingSweep) {
    r.verdict.kind = Verdict::Kind::Inconclusive;
    r.verdict.reason = "sweep too short to support a bound";
  }
  return r;
}

SweepReport Classifier::classify_unchecked(const ConditionId& c) {
  if (c.kind == ConditionKind::AC) return ac();
  if (!integrable()) {
    SweepReport r;
    r.condition = c;
    r.error = "non-integrable";
    r.verdict.kind = Verdict::Kind::Fails;
    r.verdict.reason = "inadmissible: non-integrable";
    return r;
  }
  try {
    switch (c.kind) {
      case ConditionKind::P1:
      case ConditionKind::P3:
        if (c.param) return scalar_sweep(c);
        {
          std::vector<SweepReport> subs;
          for (double v : c.kind == ConditionKind::P1 ? p1_grid() : p3_grid()) subs.push_back(scalar_sweep({c.kind, v}));
          return combine(c, std::move(subs), true);
        }
      case ConditionKind::BpI: {
        std::vector<SweepReport> subs;
        for (double v : p1_grid()) subs.push_back(scalar_sweep({ConditionKind::P1, v}));
        return combine(c, std::move(subs), false);
      }
      case ConditionKind::P4:
        if (c.param) return p4_single(*c.param);
        {
          std::vector<SweepReport> subs;
          for (double a : p4_grid()) subs.push_back(p4_single(a));
          return combine(c, std::move(subs), true);
        }
      case ConditionKind::P4a: return p4a();
      case ConditionKind::P4b: return p4b();
      case ConditionKind::P8:
        if (c.param) return p8_single(exact(*c.param), c);
        {
          std::vector<double> grid = p8_base_grid();
          const SweepReport& a = ac();
          // With AC a fixed small beta is enough; the AC constant suggests which.
          if (a.verdict.kind == Verdict::Kind::Holds && a.verdict.constant > 0.0) {
            const double b = 1.0 / (4.0 * a.verdict.constant);
            if (b < 0.125) grid.push_back(b);
          }
          std::vector<SweepReport> subs;
          for (double b : grid) subs.push_back(p8_single(exact(b), {ConditionKind::P8, b}));
          return combine(c, std::move(subs), true);
        }
      default: return scalar_sweep(c);
    }
  } catch (const Unsupported& e) {
    SweepReport r;
    r.condition = c;
    r.error = "unsupported";
    r.verdict.reason = e.what();
    return r;
  } catch (const NonIntegrable& e) {
    SweepReport r;
    r.condition = c;
    r.error = "non-integrable";
    r.verdict.kind = Verdict::Kind::Fails;
    r.verdict.reason = std::string("inadmissible: ") + e.what();
    return r;
  }
}

SweepReport classify(const Profile& p, const ConditionId& c, const ClassifyOptions& opts) {
  Classifier k(p, opts);
  return k.classify(c);
}

}  // namespace weightlab
