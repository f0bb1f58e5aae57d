#include "weightlab/maximal.hpp"

#include <cmath>

namespace weightlab {

AverageEnvelope envelope(const StepProfile& p, const Rational& x) {
  if (sgn(x) <= 0 || x > 1) throw DomainError("scale must lie in (0, 1]");
  if (p.has_tail() && x < p.coverage()) throw TailError("scale lies below the materialized coverage");
  AverageEnvelope env;
  env.x = x;
  env.x_low = p.has_tail() ? p.coverage() : Rational(0);
  env.tail_mass = BoundPair::of(Rational(0));
  if (p.has_tail()) {
    if (auto e = p.tail().exact_moment(Transform::identity())) env.tail_mass = BoundPair::of(*e);
    else env.tail_mass = from_log(p.tail().log_moment(Transform::identity()));
  }
  if (!(x > env.x_low)) return env;
  const auto& pieces = p.pieces();
  const std::size_t first = p.locate(x);
  for (std::size_t i = first; i < pieces.size(); ++i) {
    const Piece& q = pieces[i];
    const Rational d = i == first ? x : q.hi;
    env.pieces.push_back({q.lo, d, p.materialized_mass(q.lo), q.value});
  }
  return env;
}

Rational AverageEnvelope::at_exact(const Rational& y, const Rational& T) const {
  if (!(y > x_low) || y > x) throw DomainError("envelope queried outside (x_low, x]");
  // Pieces are descending; find the one with c < y <= d.
  std::size_t lo = 0, hi = pieces.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (pieces[mid].d >= y) lo = mid;
    else hi = mid;
  }
  const EnvelopePiece& e = pieces[lo];
  return (T + e.A + e.B * (y - e.c)) / y;
}

BoundPair AverageEnvelope::at(const Rational& y) const {
  if (tail_mass.exact) return BoundPair::of(at_exact(y, *tail_mass.exact));
  const Rational lo = at_exact(y, exact(tail_mass.lo));
  const Rational hi = at_exact(y, exact(tail_mass.hi));
  return BoundPair::of(down(lo), up(hi));
}

RunningMaxProfile running_max(const AverageEnvelope& env, const Rational& T) {
  RunningMaxProfile out;
  if (env.pieces.empty()) {
    out.bottom = T / env.x;
    return out;
  }
  auto value = [&](const EnvelopePiece& e, const Rational& y) -> Rational { return (T + e.A + e.B * (y - e.c)) / y; };
  Rational m = value(env.pieces.front(), env.x);
  for (std::size_t i = 0; i < env.pieces.size(); ++i) {
    const EnvelopePiece& e = env.pieces[i];
    if (sgn(e.c) == 0) {
      // Constant average B on (0, d]; never above the running max from the right.
      out.pieces.push_back({e.c, e.d, true, m, i});
      continue;
    }
    const Rational ec = value(e, e.c);
    if (ec <= m) {
      out.pieces.push_back({e.c, e.d, true, m, i});
      continue;
    }
    // The envelope decreases in y here and crosses m at y*.
    const Rational ystar = (T + e.A - e.B * e.c) / (m - e.B);
    if (ystar < e.d) out.pieces.push_back({ystar, e.d, true, m, i});
    const Rational top = ystar < e.d ? ystar : e.d;
    RunningMaxPiece seg;
    seg.lo = e.c;
    seg.hi = top;
    seg.constant = false;
    seg.segment = i;
    out.pieces.push_back(seg);
    m = ec;
  }
  out.bottom = m;
  return out;
}

namespace {

// Integral of the running max over (x_low, x] plus the tail part, with T fixed.
BoundPair integral_with_tail(const AverageEnvelope& env, const Rational& T, const StepProfile& p) {
  const RunningMaxProfile rm = running_max(env, T);
  Rational exact_part = 0;
  BoundPair logs = BoundPair::of(Rational(0));
  for (const RunningMaxPiece& r : rm.pieces) {
    if (r.constant) {
      exact_part += r.m * (r.hi - r.lo);
      continue;
    }
    const EnvelopePiece& e = env.pieces[r.segment];
    exact_part += e.B * (r.hi - r.lo);
    const Rational coef = T + e.A - e.B * e.c;
    if (sgn(coef) != 0) {
      const double l = log_of(Rational(r.hi / r.lo));
      const BoundPair lb = widen(BoundPair::around(l, 2), kTranscendentalSlack);
      logs = logs + BoundPair::of(coef) * lb;
    }
  }
  BoundPair total = BoundPair::of(exact_part);
  if (!logs.is_exact() || sgn(*logs.exact) != 0) total = total + logs;
  if (sgn(env.x_low) > 0) {
    const Rational m = rm.bottom;
    // On (0, x_K] the running max is max(m, averages over (0, y], y <= x_K).
    BoundPair tail_part;
    if (p.tail().nondecreasing()) {
      const Rational avg = T / env.x_low;
      tail_part = BoundPair::of(env.x_low * (avg > m ? avg : m));
    } else {
      const double s = p.tail().env_sup();
      const Rational lo = env.x_low * m;
      if (std::isfinite(s) && exact(s) <= m) tail_part = BoundPair::of(lo);
      else tail_part = BoundPair::of(down(lo), std::isfinite(s) ? up(env.x_low * exact(s)) : kInf);
    }
    total = total + tail_part;
  }
  return total;
}

}  // namespace

BoundPair restricted_maximal_at(const StepProfile& p, const Rational& x, const Rational& t) {
  if (t > x) throw DomainError("restricted maximal needs t <= x");
  const AverageEnvelope env = envelope(p, x);
  if (!(t > env.x_low)) throw TailError("pointwise maximal queries need t above the materialized depth");
  // The envelope is monotone on each piece: the sup sits at t, x or a breakpoint.
  BoundPair best = env.at(t);
  best = max_of(best, env.at(x));
  for (const EnvelopePiece& e : env.pieces) {
    if (e.c > t && e.c < x) best = max_of(best, env.at(e.c));
  }
  return best;
}

BoundPair maximal_integral(const StepProfile& p, const Rational& x) {
  const AverageEnvelope env = envelope(p, x);
  if (env.tail_mass.exact) return integral_with_tail(env, *env.tail_mass.exact, p);
  if (!std::isfinite(env.tail_mass.hi)) throw NonIntegrable("the weight is not integrable near 0");
  const BoundPair lo = integral_with_tail(env, exact(env.tail_mass.lo), p);
  const BoundPair hi = integral_with_tail(env, exact(env.tail_mass.hi), p);
  return BoundPair::of(lo.lo, hi.hi);
}

BoundPair global_maximal_at(const StepProfile& p, const Rational& t) {
  return restricted_maximal_at(p, Rational(1), t);
}

}  // namespace weightlab
