#include "weightlab/transform.hpp"

#include <cmath>

namespace weightlab {

Transform Transform::identity() { return {}; }

Transform Transform::power(double s) {
  Transform t;
  t.kind = Kind::Power;
  t.s = s;
  return t;
}

Transform Transform::log() {
  Transform t;
  t.kind = Kind::Log;
  return t;
}

namespace {
Transform relative(Transform::Kind kind, const BoundPair& c) {
  if (!(c.lo > 0.0)) throw DomainError("reference level must be positive");
  Transform t;
  t.kind = kind;
  const LogBound lc = to_log(c);
  t.log_c_lo = lc.lo;
  t.log_c_hi = lc.hi;
  return t;
}
}  // namespace

Transform Transform::logplus_relative(const BoundPair& c) { return relative(Kind::LogPlusRelative, c); }

Transform Transform::loge_plus_relative(const BoundPair& c) {
  return relative(Kind::LogEPlusRelative, c);
}

Transform Transform::indicator_above(const Rational& lambda) {
  Transform t;
  t.kind = Kind::IndicatorAbove;
  t.lambda = lambda;
  return t;
}

Transform Transform::mass_above(const Rational& lambda) {
  Transform t;
  t.kind = Kind::MassAbove;
  t.lambda = lambda;
  return t;
}

std::string Transform::name() const {
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Power: return "power(" + to_decimal(s) + ")";
    case Kind::Log: return "log";
    case Kind::LogPlusRelative: return "logplus_relative";
    case Kind::LogEPlusRelative: return "log_e_plus_relative";
    case Kind::IndicatorAbove: return "indicator_above(" + to_decimal(lambda) + ")";
    case Kind::MassAbove: return "mass_above(" + to_decimal(lambda) + ")";
  }
  return "?";
}

double log_apply(const Transform& t, double log_v, bool upper) {
  switch (t.kind) {
    case Transform::Kind::Identity: return log_v;
    case Transform::Kind::Power: return t.s == 0.0 ? 0.0 : t.s * log_v;
    case Transform::Kind::Log: throw DomainError("log transform is signed");
    case Transform::Kind::LogPlusRelative: {
      const double r = log_v - (upper ? t.log_c_lo : t.log_c_hi);
      if (!(r > 0.0)) return -kInf;
      return log_v + std::log(r);
    }
    case Transform::Kind::LogEPlusRelative: {
      const double r = log_v - (upper ? t.log_c_lo : t.log_c_hi);
      return log_v + std::log(log_add(1.0, r));
    }
    case Transform::Kind::IndicatorAbove:
    case Transform::Kind::MassAbove: {
      if (sgn(t.lambda) <= 0) return t.kind == Transform::Kind::IndicatorAbove ? 0.0 : log_v;
      const double ll = log_of(t.lambda);
      const double guard = 1e-12 * (1.0 + std::fabs(ll));
      bool above;
      // Equal logs come from equal values: the level itself is not above.
      if (log_v == ll) above = false;
      else if (log_v > ll + guard) above = true;
      else if (log_v < ll - guard) above = false;
      else above = upper;
      if (!above) return -kInf;
      return t.kind == Transform::Kind::IndicatorAbove ? 0.0 : log_v;
    }
  }
  return -kInf;
}

Rational apply_exact(const Transform& t, const Rational& v) {
  switch (t.kind) {
    case Transform::Kind::Identity: return v;
    case Transform::Kind::IndicatorAbove: return v > t.lambda ? Rational(1) : Rational(0);
    case Transform::Kind::MassAbove: return v > t.lambda ? v : Rational(0);
    default: throw DomainError("transform " + t.name() + " is not rational");
  }
}

}  // namespace weightlab
