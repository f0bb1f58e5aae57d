#include "weightlab/block_family.hpp"

#include <cmath>

namespace weightlab {

Rational DyadicBlockFamily::a_at(long k) const { return a.value(k); }
Rational DyadicBlockFamily::b_at(long k) const { return b.value(k); }

Rational DyadicBlockFamily::a_sup() const {
  Rational best = 0;
  for (long k = 1; k < depth; ++k) best = std::max(best, a_at(k));
  return best;
}

StepProfile build_family(const DyadicBlockFamily& fam) {
  if (fam.depth < 1) throw DomainError("family depth must be at least 1");
  std::vector<Rational> bp{Rational(1)};
  std::vector<Rational> vals;
  for (long k = 0; k < fam.depth; ++k) {
    const Rational ak = fam.a_at(k);
    const Rational bk = fam.b_at(k);
    if (sgn(ak) < 0 || ak > 1) throw DomainError(fam.name + ": a_" + std::to_string(k) + " outside [0, 1]");
    if (sgn(bk) <= 0) throw DomainError(fam.name + ": b_" + std::to_string(k) + " must be positive");
    const Rational lo = pow2(-k - 1);
    const Rational mid = lo * (1 + ak);
    if (mid < bp.back()) {
      vals.push_back(Rational(1));
      bp.push_back(mid);
    }
    if (mid > lo) {
      vals.push_back(bk);
      bp.push_back(lo);
    }
  }

  const long first = fam.depth;
  const BlockSequence a = fam.a;
  const BlockSequence b = fam.b;
  SeriesTail::Generator gen = [a, b](long k, std::vector<LogPiece>& out) {
    const double log_half = -static_cast<double>(k + 1) * std::log(2.0);
    const double la = a.log_value(k);
    const double l1ma = la == -kInf ? 0.0 : std::log1p(-std::exp(la));
    out.clear();
    if (la > -kInf) out.push_back({log_half + la, b.log_value(k)});
    if (l1ma > -kInf) out.push_back({log_half + l1ma, 0.0});
  };
  SeriesTail::Options opts;
  const double lb0 = b.log_value(first);
  const double lb1 = b.log_value(first + 1);
  if (lb1 > lb0) {
    opts.inf = std::min(1.0, std::exp(lb0));
    opts.sup = kInf;
  } else if (lb1 < lb0) {
    opts.inf = 0.0;
    opts.sup = std::max(1.0, std::exp(lb0));
  } else {
    opts.inf = std::min(1.0, std::exp(lb0));
    opts.sup = std::max(1.0, std::exp(lb0));
  }
  auto tail = std::make_shared<SeriesTail>(first, gen, opts);
  return StepProfile(fam.coordinate, bp, vals, tail);
}

Rational series_tail(long n) {
  if (n < 0) throw DomainError("series_tail needs n >= 0");
  return pow2(1 - n) * (n + 2);
}

double series_tail_constant() { return 2.0 + 2.0 / std::log(2.0); }

}  // namespace weightlab
