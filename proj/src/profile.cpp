#include "weightlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace weightlab {

std::string to_string(Coordinate c) {
  return c == Coordinate::OneMinusModulus ? "u" : "s";
}

Coordinate coordinate_from(const std::string& text) {
  if (text == "u" || text == "one_minus_modulus") return Coordinate::OneMinusModulus;
  if (text == "s" || text == "one_minus_modulus_squared") return Coordinate::OneMinusModulusSquared;
  throw DomainError("unknown coordinate '" + text + "'");
}

namespace {

// Log-sum-exp of terms with a small rigorous slack for the rounding in each term.
struct LogAccumulator {
  static constexpr double kUlp = 2.3e-16;  // two units of relative rounding

  double m = -kInf;
  double s = 0.0;
  double w = 0.0;  // sum of |t| exp(t - m): each term's log error weighted by its share
  double r = 0.0;  // rounding of the sum: a term below an ulp of s costs at most itself
  std::size_t n = 0;

  void add(double t) {
    if (t == -kInf) return;
    ++n;
    if (t == kInf) {
      m = kInf;
      return;
    }
    if (m == kInf) return;
    if (t > m) {
      const double k = std::exp(m - t);
      s = s * k + 1.0;
      w = w * k + std::fabs(t);
      r = r * k + kUlp * s + kUlp;
      m = t;
    } else {
      const double e = std::exp(t - m);
      s += e;
      w += std::fabs(t) * e;
      r += std::min(e, kUlp * s) + kUlp * e;
    }
  }
  double value() const {
    if (m == -kInf || m == kInf) return m;
    return m + std::log(s);
  }
  double slack() const {
    if (!(s > 0.0)) return 1e-15;
    return 1e-15 + 2.0 * r / s + 1e-15 * (w / s);
  }
};

LogBound finish(const LogAccumulator& lo, const LogAccumulator& hi) {
  LogBound out;
  out.lo = lo.value();
  out.hi = hi.value();
  if (std::isfinite(out.lo)) out.lo -= lo.slack();
  if (std::isfinite(out.hi)) out.hi += hi.slack();
  return out;
}

constexpr std::size_t kWindow = 64;
constexpr double kStopGap = 40.0;

// Log of an upper bound on the remainder of a series whose last terms (in
// log) are `hist`, the term of index j being block first + j. +inf flags a
// series that does not converge.
double remainder_log(const std::vector<double>& hist, long first) {
  if (hist.empty()) return -kInf;
  const std::size_t n = hist.size();
  const std::size_t w0 = n > kWindow ? n - kWindow : 0;
  double last = -kInf;
  std::size_t last_idx = 0;
  for (std::size_t j = w0; j < n; ++j) {
    if (hist[j] > -kInf) {
      last = hist[j];
      last_idx = j;
    }
  }
  if (last == -kInf) return -kInf;
  if (last == kInf) return kInf;
  double rho = 0.0;
  bool any = false;
  for (std::size_t j = w0; j + 1 < n; ++j) {
    if (hist[j] > -kInf && hist[j + 1] > -kInf) {
      rho = std::max(rho, std::exp(hist[j + 1] - hist[j]));
      any = true;
    }
  }
  if (any && rho < 0.999) return last + std::log(rho / (1.0 - rho));
  // Slow decay: fit t_k ~ k^{-gamma} between the middle and the end.
  std::size_t mid = n / 2;
  while (mid < last_idx && hist[mid] == -kInf) ++mid;
  if (mid >= last_idx) return kInf;
  const double k1 = static_cast<double>(first + static_cast<long>(mid)) + 1.0;
  const double k2 = static_cast<double>(first + static_cast<long>(last_idx)) + 1.0;
  const double gamma = (hist[mid] - last) / std::log(k2 / k1);
  if (!(gamma > 1.001)) return kInf;
  return last + std::log(k2 / (gamma - 1.0));
}

}  // namespace

// ---- tails ----

LogBound ForbidTail::log_moment(const Transform&) const {
  throw TailError("query reaches below the materialized pieces and the tail is forbidden");
}

BoundPair ForbidTail::log_integral() const {
  throw TailError("query reaches below the materialized pieces and the tail is forbidden");
}

std::pair<double, double> ForbidTail::range() const { return {0.0, kInf}; }

SeriesTail::SeriesTail(long first_block, Generator gen, Options opts)
    : first_(first_block), opts_(std::move(opts)) {
  blocks_.resize(static_cast<std::size_t>(opts_.max_blocks));
  for (long j = 0; j < opts_.max_blocks; ++j) gen(first_ + j, blocks_[static_cast<std::size_t>(j)]);
  // Running averages from 0: for y in block j, (1/y) int_0^y f <= mass(0, hi_j] / lo_j.
  // Suffix sums run over the cached window; what lies below it is closed with
  // the fitted remainder, as for moments.
  const std::size_t n = blocks_.size();
  std::vector<double> len(n), mass(n);
  for (std::size_t j = 0; j < n; ++j) {
    LogAccumulator l, m;
    for (const LogPiece& p : blocks_[j]) {
      l.add(p.log_len);
      m.add(p.log_len + p.log_value);
    }
    len[j] = l.value();
    mass[j] = m.value();
  }
  const double rem_len = remainder_log(len, first_);
  const double rem_mass = remainder_log(mass, first_);
  if (rem_mass == kInf || rem_len == kInf) return;
  double below_len = rem_len;
  double below_mass = rem_mass;
  double best = -kInf;
  for (std::size_t j = n; j-- > 0;) {
    const double upto_mass = log_add(below_mass, mass[j]);
    if (below_len > -kInf) best = std::max(best, upto_mass - below_len);
    below_len = log_add(below_len, len[j]);
    below_mass = upto_mass;
  }
  env_sup_ = best == -kInf ? opts_.sup : std::exp(best + 1e-9);
}

LogBound SeriesTail::log_moment(const Transform& t) const {
  if (t.kind == Transform::Kind::Identity && opts_.identity_mass) {
    return to_log(BoundPair::of(*opts_.identity_mass));
  }
  LogAccumulator lo, hi;
  std::vector<double> hist;
  hist.reserve(blocks_.size());
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    LogAccumulator blo, bhi;
    for (const LogPiece& p : blocks_[j]) {
      blo.add(p.log_len + log_apply(t, p.log_value, false));
      bhi.add(p.log_len + log_apply(t, p.log_value, true));
    }
    const double th = bhi.value();
    lo.add(blo.value());
    hi.add(th);
    hist.push_back(th);
    if (hi.value() == kInf) return {kInf, kInf};
    if (j >= kWindow && std::isfinite(hi.value()) && th < hi.value() - kStopGap) break;
  }
  const double rem = remainder_log(hist, first_);
  if (rem == kInf) return {kInf, kInf};
  hi.add(rem);
  return finish(lo, hi);
}

BoundPair SeriesTail::log_integral() const {
  // Signed sum of len * log v; the remainder is bounded through |len * log v|.
  double sum = 0.0;
  double abs_sum = 0.0;
  LogAccumulator acc;
  std::vector<double> hist;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    LogAccumulator b;
    for (const LogPiece& p : blocks_[j]) {
      if (p.log_len == -kInf || p.log_value == 0.0) continue;
      const double term = std::exp(p.log_len) * p.log_value;
      sum += term;
      abs_sum += std::fabs(term);
      b.add(p.log_len + std::log(std::fabs(p.log_value)));
    }
    const double th = b.value();
    acc.add(th);
    hist.push_back(th);
    if (j >= kWindow && std::isfinite(acc.value()) && th < acc.value() - kStopGap) break;
  }
  const double rem = remainder_log(hist, first_);
  if (rem == kInf) return BoundPair::of(-kInf, kInf);
  const double r = (rem == -kInf ? 0.0 : std::exp(rem)) + 1e-14 * abs_sum + 1e-300;
  return BoundPair::of(next_down(sum - r), next_up(sum + r));
}

std::optional<Rational> SeriesTail::exact_moment(const Transform& t) const {
  if (t.kind == Transform::Kind::Identity) return opts_.identity_mass;
  return std::nullopt;
}

GeometricTail::GeometricTail(double ratio, LogPiece last, double coverage, double inf, double sup)
    : ratio_(ratio), last_(last), coverage_(coverage), inf_(inf), sup_(sup) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("geometric tail ratio must lie in (0, 1)");
}

LogBound GeometricTail::log_moment(const Transform& t) const {
  const double head = last_.log_len + log_apply(t, last_.log_value, true);
  LogBound out;
  out.lo = -kInf;
  out.hi = head == -kInf ? -kInf : head + std::log(ratio_ / (1.0 - ratio_)) + 1e-12 * (1.0 + std::fabs(head));
  return out;
}

BoundPair GeometricTail::log_integral() const {
  if (inf_ > 0.0 && std::isfinite(sup_)) {
    return widen(BoundPair::of(coverage_ * std::log(inf_), coverage_ * std::log(sup_)), 1e-12);
  }
  const double b = std::exp(last_.log_len) * std::fabs(last_.log_value) * ratio_ / (1.0 - ratio_);
  return BoundPair::of(-next_up(b), next_up(b));
}

// ---- StepProfile ----

StepProfile::StepProfile(Coordinate coordinate, const std::vector<Rational>& breakpoints,
                         const std::vector<Rational>& values, std::shared_ptr<const Tail> tail)
    : coordinate_(coordinate), tail_(std::move(tail)) {
  if (breakpoints.size() != values.size() + 1 || values.empty()) {
    throw DomainError("a step profile needs one more breakpoint than values");
  }
  if (breakpoints.front() != 1) throw DomainError("the first breakpoint must be 1");
  if (sgn(breakpoints.back()) < 0) throw DomainError("breakpoints must be nonnegative");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i + 1])) throw DomainError("breakpoints must decrease strictly");
    if (sgn(values[i]) <= 0) throw DomainError("weight values must be positive");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!pieces_.empty() && pieces_.back().value == values[i]) {
      pieces_.back().lo = breakpoints[i + 1];
      continue;
    }
    Piece p;
    p.hi = breakpoints[i];
    p.lo = breakpoints[i + 1];
    p.value = values[i];
    pieces_.push_back(p);
  }
  for (Piece& p : pieces_) {
    p.log_value = log_of(p.value);
    p.log_len = log_of(Rational(p.hi - p.lo));
  }
  coverage_ = breakpoints.back();
  if (!has_tail()) tail_.reset();
  else if (!tail_) tail_ = std::make_shared<ForbidTail>();
  mass_below_.assign(pieces_.size(), Rational(0));
  for (std::size_t i = pieces_.size() - 1; i-- > 0;) {
    const Piece& q = pieces_[i + 1];
    mass_below_[i] = mass_below_[i + 1] + (q.hi - q.lo) * q.value;
  }
}

const Tail& StepProfile::tail() const {
  if (!tail_) throw TailError("profile has no tail");
  return *tail_;
}

StepProfile StepProfile::with_tail(std::shared_ptr<const Tail> tail) const {
  StepProfile out = *this;
  if (out.has_tail()) out.tail_ = tail ? std::move(tail) : std::make_shared<ForbidTail>();
  return out;
}

std::size_t StepProfile::locate(const Rational& y) const {
  if (!(y > coverage_) || y > 1) throw DomainError("point outside the materialized range");
  const auto it = std::partition_point(pieces_.begin(), pieces_.end(),
                                       [&](const Piece& p) { return p.lo >= y; });
  return static_cast<std::size_t>(it - pieces_.begin());
}

Rational StepProfile::materialized_mass(const Rational& y) const {
  if (!(y > coverage_)) return Rational(0);
  const std::size_t i = locate(y);
  return mass_below_[i] + (y - pieces_[i].lo) * pieces_[i].value;
}

bool StepProfile::nondecreasing_in_t() const {
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    if (pieces_[i].value < pieces_[i + 1].value) return false;
  }
  if (has_tail()) {
    if (!tail_->nondecreasing()) return false;
    const double sup = tail_->range().second;
    if (!std::isfinite(sup) || exact(sup) > pieces_.back().value) return false;
  }
  return true;
}

bool StepProfile::nonincreasing_in_t() const {
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    if (pieces_[i].value > pieces_[i + 1].value) return false;
  }
  if (has_tail()) {
    if (!tail_->nonincreasing()) return false;
    if (exact(tail_->range().first) < pieces_.back().value) return false;
  }
  return true;
}

std::vector<Rational> StepProfile::breakpoints() const {
  std::vector<Rational> out;
  out.reserve(pieces_.size() + 1);
  for (const Piece& p : pieces_) out.push_back(p.hi);
  out.push_back(coverage_);
  return out;
}

std::vector<Rational> StepProfile::values() const {
  std::vector<Rational> out;
  out.reserve(pieces_.size());
  for (const Piece& p : pieces_) out.push_back(p.value);
  return out;
}

PowerProfile::PowerProfile(double exponent) : r(exponent) {
  if (!(exponent > -1.0) || exponent == 0.0 || !std::isfinite(exponent)) {
    throw DomainError("power profile exponent must satisfy r > -1 and r != 0");
  }
}

// ---- moments ----

namespace {

void check_scale(const Rational& x) {
  if (sgn(x) <= 0 || x > 1) throw DomainError("scale must lie in (0, 1]");
}

void check_tail_reach(const StepProfile& p, const Rational& x) {
  if (p.has_tail() && x < p.coverage()) {
    throw TailError("scale " + to_decimal(x) + " lies below the materialized coverage " +
                    to_decimal(p.coverage()));
  }
}

Rational exact_materialized(const StepProfile& p, const Rational& x, const Transform& t) {
  if (!(x > p.coverage())) return Rational(0);
  if (t.kind == Transform::Kind::Identity) return p.materialized_mass(x);
  const auto& pieces = p.pieces();
  Rational sum = 0;
  for (std::size_t i = p.locate(x); i < pieces.size(); ++i) {
    const Piece& q = pieces[i];
    const Rational top = i == p.locate(x) ? x : q.hi;
    const Rational v = apply_exact(t, q.value);
    if (sgn(v) != 0) sum += (top - q.lo) * v;
  }
  return sum;
}

void add_materialized_log(const StepProfile& p, const Rational& x, const Transform& t, LogAccumulator& lo,
                          LogAccumulator& hi) {
  if (!(x > p.coverage())) return;
  const auto& pieces = p.pieces();
  const std::size_t first = p.locate(x);
  for (std::size_t i = first; i < pieces.size(); ++i) {
    const Piece& q = pieces[i];
    const double ll = i == first ? log_of(Rational(x - q.lo)) : q.log_len;
    lo.add(ll + log_apply(t, q.log_value, false));
    hi.add(ll + log_apply(t, q.log_value, true));
  }
}

LogBound step_log_moment(const StepProfile& p, const Rational& x, const Transform& t) {
  check_scale(x);
  check_tail_reach(p, x);
  if (!t.nonnegative()) throw DomainError("log-domain moment needs a nonnegative transform");
  LogAccumulator lo, hi;
  add_materialized_log(p, x, t, lo, hi);
  LogBound out = finish(lo, hi);
  if (p.has_tail()) out = log_sum(out, p.tail().log_moment(t));
  return out;
}

BoundPair step_moment(const StepProfile& p, const Rational& x, const Transform& t) {
  check_scale(x);
  check_tail_reach(p, x);
  if (t.rational_exact()) {
    BoundPair mat = BoundPair::of(exact_materialized(p, x, t));
    if (!p.has_tail()) return mat;
    if (auto e = p.tail().exact_moment(t)) return BoundPair::of(*mat.exact + *e);
    return mat + from_log(p.tail().log_moment(t));
  }
  if (t.kind == Transform::Kind::Log) {
    double sum = 0.0;
    double abs_sum = 0.0;
    if (x > p.coverage()) {
      const auto& pieces = p.pieces();
      const std::size_t first = p.locate(x);
      for (std::size_t i = first; i < pieces.size(); ++i) {
        const Piece& q = pieces[i];
        const double len = i == first ? Rational(x - q.lo).get_d() : Rational(q.hi - q.lo).get_d();
        const double term = len * q.log_value;
        sum += term;
        abs_sum += std::fabs(term);
      }
    }
    const double err = 1e-15 * abs_sum * (4.0 + 0.01 * static_cast<double>(p.pieces().size())) + 1e-300;
    BoundPair out = BoundPair::of(next_down(sum - err), next_up(sum + err));
    if (p.has_tail()) out = out + p.tail().log_integral();
    return out;
  }
  return from_log(step_log_moment(p, x, t));
}

// Integral of (1 - t)^e over (0, x] for x in (0, 1].
double power_integral(double e, double x) {
  const double l = std::log1p(-x);
  if (e == -1.0) {
    if (x >= 1.0) throw DivergentMoment("integral of (1-t)^-1 diverges at t = 1");
    return -l;
  }
  if (e < -1.0 && x >= 1.0) {
    throw DivergentMoment("integral of (1-t)^" + to_decimal(e) + " diverges at t = 1");
  }
  return -std::expm1((e + 1.0) * l) / (e + 1.0);
}

BoundPair power_moment(const PowerProfile& p, const Rational& xq, const Transform& t) {
  check_scale(xq);
  const double x = xq.get_d();
  double v = 0.0;
  switch (t.kind) {
    case Transform::Kind::Identity: v = power_integral(p.r, x); break;
    case Transform::Kind::Power: v = power_integral(p.r * t.s, x); break;
    case Transform::Kind::Log: {
      // -(1-x) log(1-x) - x; the series -sum_{k>=2} x^k / (k(k-1)) avoids the
      // cancellation at small x.
      if (x < 0.5) {
        double term = x, sum = 0.0;
        for (int k = 2; k < 80; ++k) {
          term *= x;
          const double add = term / (static_cast<double>(k) * (k - 1));
          sum += add;
          if (add < sum * 1e-18) break;
        }
        v = -p.r * sum;
      } else {
        const double tail = x >= 1.0 ? 0.0 : (1.0 - x) * std::log1p(-x);
        v = p.r * (-tail - x);
      }
      break;
    }
    case Transform::Kind::IndicatorAbove:
    case Transform::Kind::MassAbove: {
      const double lam = t.lambda.get_d();
      if (lam <= 0.0) {
        v = t.kind == Transform::Kind::IndicatorAbove ? x : power_integral(p.r, x);
        break;
      }
      const double tstar = std::clamp(1.0 - std::pow(lam, 1.0 / p.r), 0.0, x);
      double a = 0.0, b = x;
      if (p.r > 0.0) b = tstar;
      else a = tstar;
      if (t.kind == Transform::Kind::IndicatorAbove) v = b - a;
      else v = power_integral(p.r, b) - (a > 0.0 ? power_integral(p.r, a) : 0.0);
      break;
    }
    default: throw Unsupported("transform " + t.name() + " is not available for power profiles");
  }
  BoundPair out = widen(BoundPair::around(v, 4), 16 * kTranscendentalSlack);
  out.lo = next_down(out.lo - 1e-300);
  out.hi = next_up(out.hi + 1e-300);
  if (t.nonnegative()) out.lo = std::max(out.lo, 0.0);
  return out;
}

}  // namespace

BoundPair moment(const Profile& p, const Rational& x, const Transform& t) {
  if (const auto* s = std::get_if<StepProfile>(&p)) return step_moment(*s, x, t);
  return power_moment(std::get<PowerProfile>(p), x, t);
}

LogBound log_moment(const Profile& p, const Rational& x, const Transform& t) {
  if (const auto* s = std::get_if<StepProfile>(&p)) return step_log_moment(*s, x, t);
  return to_log(power_moment(std::get<PowerProfile>(p), x, t));
}

// ---- ess bounds ----

EssBounds ess_bounds(const Profile& p, const Rational& lo, const Rational& hi) {
  if (!(lo < hi) || sgn(lo) < 0 || hi > 1) throw DomainError("ess bounds need 0 <= lo < hi <= 1");
  if (const auto* pp = std::get_if<PowerProfile>(&p)) {
    const double a = std::pow(1.0 - lo.get_d(), pp->r);
    const double b = hi == 1 ? (pp->r > 0.0 ? 0.0 : kInf) : std::pow(1.0 - hi.get_d(), pp->r);
    auto enclose = [](double v) {
      if (v == 0.0) return BoundPair::of(Rational(0));
      if (v == kInf) return BoundPair::of(kInf, kInf);
      return widen(BoundPair::around(v, 2), 1e-13);
    };
    return {enclose(std::min(a, b)), enclose(std::max(a, b))};
  }
  const StepProfile& s = std::get<StepProfile>(p);
  std::optional<Rational> mn, mx;
  for (const Piece& q : s.pieces()) {
    if (q.lo < hi && q.hi > lo) {
      if (!mn || q.value < *mn) mn = q.value;
      if (!mx || q.value > *mx) mx = q.value;
    }
  }
  if (s.has_tail() && lo < s.coverage()) {
    if (dynamic_cast<const ForbidTail*>(&s.tail())) throw TailError("interval reaches the forbidden tail");
    const auto [ti, ts] = s.tail().range();
    if (sgn(lo) == 0) {
      // (lo, hi] covers the whole tail, whose inf and sup are known.
      BoundPair inf = mn ? (exact(ti) < *mn ? BoundPair::of(exact(ti)) : BoundPair::of(*mn)) : BoundPair::of(exact(ti));
      BoundPair sup = BoundPair::of(ts, ts);
      if (std::isfinite(ts)) sup = BoundPair::of(mx && *mx > exact(ts) ? *mx : exact(ts));
      return {inf, sup};
    }
    // Over part of the tail the ess inf and sup both lie in [ti, ts].
    if (!mn) return {BoundPair::of(ti, ts), BoundPair::of(ti, ts)};
    return {BoundPair::of(std::min(ti, down(*mn)), std::min(ts, up(*mn))),
            BoundPair::of(std::max(ti, down(*mx)), std::max(ts, up(*mx)))};
  }
  if (!mn) throw DomainError("empty interval");
  return {BoundPair::of(*mn), BoundPair::of(*mx)};
}

EssBounds ess_bounds_open(const Profile& p, const Rational& lo, const Rational& hi) {
  // Endpoints carry no measure, and every piece meeting (lo, hi] with lo < hi
  // meets (lo, hi) in an interval of positive length.
  return ess_bounds(p, lo, hi);
}

// ---- windows and level sets ----

std::pair<Rational, Rational> Window::above(const Rational& lambda) const {
  const auto it = std::partition_point(values.begin(), values.end(), [&](const Rational& v) { return v > lambda; });
  const std::size_t j = static_cast<std::size_t>(it - values.begin());
  if (j == 0) return {Rational(0), Rational(0)};
  return {len_ge[j - 1], mass_ge[j - 1]};
}

std::pair<Rational, Rational> Window::at_or_above(const Rational& lambda) const {
  const auto it = std::partition_point(values.begin(), values.end(), [&](const Rational& v) { return v >= lambda; });
  const std::size_t j = static_cast<std::size_t>(it - values.begin());
  if (j == 0) return {Rational(0), Rational(0)};
  return {len_ge[j - 1], mass_ge[j - 1]};
}

BoundPair Window::total_mass() const { return BoundPair::of(mat_mass) + tail_mass; }

Window window(const StepProfile& p, const Rational& x) {
  check_scale(x);
  check_tail_reach(p, x);
  Window w;
  w.x = x;
  std::map<Rational, std::pair<Rational, Rational>, std::greater<>> agg;
  if (x > p.coverage()) {
    const auto& pieces = p.pieces();
    const std::size_t first = p.locate(x);
    for (std::size_t i = first; i < pieces.size(); ++i) {
      const Piece& q = pieces[i];
      const Rational len = (i == first ? x : q.hi) - q.lo;
      auto& slot = agg[q.value];
      slot.first += len;
      slot.second += len * q.value;
    }
  }
  Rational cl = 0, cm = 0;
  for (const auto& [v, lm] : agg) {
    w.values.push_back(v);
    w.len.push_back(lm.first);
    w.mass.push_back(lm.second);
    cl += lm.first;
    cm += lm.second;
    w.len_ge.push_back(cl);
    w.mass_ge.push_back(cm);
  }
  w.mat_len = cl;
  w.mat_mass = cm;
  w.tail_len = p.has_tail() ? p.coverage() : Rational(0);
  w.tail_mass = BoundPair::of(Rational(0));
  if (p.has_tail()) {
    const Tail& t = p.tail();
    if (auto e = t.exact_moment(Transform::identity())) w.tail_mass = BoundPair::of(*e);
    else w.tail_mass = from_log(t.log_moment(Transform::identity()));
    w.tail_inf = t.range().first;
    w.tail_sup = t.range().second;
  }
  return w;
}

// ---- median ----

namespace {

// Lower endpoint of the median interval when the tail sits at one value
// (nullopt: above every piece).
Rational median_scenario(const Window& w, const std::optional<Rational>& tail_value) {
  const Rational half = w.x / 2;
  struct Entry {
    Rational v;
    Rational len;
    bool top;
  };
  std::vector<Entry> e;
  e.reserve(w.values.size() + 1);
  const bool with_tail = sgn(w.tail_len) > 0;
  bool placed = !with_tail;
  if (with_tail && !tail_value) {
    e.push_back({Rational(0), w.tail_len, true});
    placed = true;
  }
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    if (!placed && *tail_value >= w.values[i]) {
      e.push_back({*tail_value, w.tail_len, false});
      placed = true;
    }
    e.push_back({w.values[i], w.len[i], false});
  }
  if (!placed) e.push_back({*tail_value, w.tail_len, false});
  // Merge equal values so "strictly greater" sums are right.
  std::vector<Entry> m;
  for (const Entry& x : e) {
    if (!m.empty() && !m.back().top && !x.top && m.back().v == x.v) m.back().len += x.len;
    else m.push_back(x);
  }
  Rational gt = 0;
  std::optional<Rational> best;
  for (const Entry& x : m) {
    if (gt > half) break;
    if (!x.top) best = x.v;
    gt += x.len;
  }
  if (!best) throw DomainError("median lies in the tail above every piece");
  return *best;
}

}  // namespace

BoundPair median(const Profile& p, const Rational& x) {
  if (const auto* pp = std::get_if<PowerProfile>(&p)) {
    check_scale(x);
    const double v = std::pow(1.0 - x.get_d() / 2.0, pp->r);
    return widen(BoundPair::around(v, 2), 1e-13);
  }
  const StepProfile& s = std::get<StepProfile>(p);
  const Window w = window(s, x);
  if (sgn(w.tail_len) == 0) return BoundPair::of(median_scenario(w, Rational(0)));
  const Rational lo_val = median_scenario(w, exact(w.tail_inf));
  const bool inf_sup = !std::isfinite(w.tail_sup);
  // With the tail above every piece the median may reach into the tail.
  Rational hi_val;
  bool hi_unbounded = false;
  try {
    hi_val = median_scenario(w, inf_sup ? std::optional<Rational>() : std::optional<Rational>(exact(w.tail_sup)));
  } catch (const DomainError&) {
    hi_unbounded = true;
  }
  BoundPair out = BoundPair::of(down(lo_val), hi_unbounded ? (inf_sup ? kInf : w.tail_sup) : up(hi_val));
  if (!hi_unbounded && lo_val == hi_val) out = BoundPair::of(lo_val);
  if (out.lo > out.hi) std::swap(out.lo, out.hi);
  return out;
}

BoundPair measure_above(const Profile& p, const Rational& x, const Rational& lambda) {
  return moment(p, x, Transform::indicator_above(lambda));
}

BoundPair mass_above(const Profile& p, const Rational& x, const Rational& lambda) {
  return moment(p, x, Transform::mass_above(lambda));
}

// ---- coordinates ----

namespace {

Rational u_from_s(const Rational& s) {
  if (s == 1) return Rational(1);
  if (sgn(s) == 0) return Rational(0);
  mpf_class r(0, 256);
  mpf_class a(Rational(1 - s), 256);
  mpf_sqrt(r.get_mpf_t(), a.get_mpf_t());
  mpf_class u(1, 256);
  u -= r;
  return exact(u.get_d());
}

}  // namespace

StepProfile convert_coordinate(const StepProfile& p, Coordinate to) {
  if (p.coordinate() == to) return p;
  const std::vector<Rational> bp = p.breakpoints();
  std::vector<Rational> nb;
  nb.reserve(bp.size());
  for (const Rational& x : bp) {
    nb.push_back(to == Coordinate::OneMinusModulusSquared ? Rational(x * (2 - x)) : u_from_s(x));
  }
  for (std::size_t i = 0; i + 1 < nb.size(); ++i) {
    if (!(nb[i] > nb[i + 1])) throw DomainError("breakpoints collapse under the change of coordinate");
  }
  return StepProfile(to, nb, p.values(), nullptr);
}

StepProfile constant_profile(const Rational& c, Coordinate coordinate) {
  return StepProfile(coordinate, {Rational(1), Rational(0)}, {c}, nullptr);
}

}  // namespace weightlab
