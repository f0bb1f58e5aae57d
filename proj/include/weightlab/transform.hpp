#pragma once

#include <string>

#include "weightlab/numeric.hpp"

namespace weightlab {

// The integrands phi applied to a weight value before integrating.
struct Transform {
  enum class Kind { Identity, Power, Log, LogPlusRelative, LogEPlusRelative, IndicatorAbove, MassAbove };

  Kind kind = Kind::Identity;
  double s = 1.0;  // exponent for Power
  // Relative transforms use a reference level c, known as an enclosure of log c.
  double log_c_lo = 0.0;
  double log_c_hi = 0.0;
  Rational lambda;  // level for IndicatorAbove / MassAbove

  static Transform identity();
  static Transform power(double s);
  static Transform log();
  // v -> v log+(v/c)
  static Transform logplus_relative(const BoundPair& c);
  // v -> v log(e + v/c)
  static Transform loge_plus_relative(const BoundPair& c);
  // v -> 1[v > lambda]
  static Transform indicator_above(const Rational& lambda);
  // v -> v 1[v > lambda]
  static Transform mass_above(const Rational& lambda);

  bool nonnegative() const { return kind != Kind::Log; }
  // phi maps rationals to rationals, so sums stay exact.
  bool rational_exact() const {
    return kind == Kind::Identity || kind == Kind::IndicatorAbove || kind == Kind::MassAbove;
  }
  std::string name() const;
};

// log phi(v) from log v, for nonnegative kinds. `upper` picks the end of any
// enclosure (of c, or of an ambiguous level comparison) that makes phi larger.
double log_apply(const Transform& t, double log_v, bool upper);

// phi(v) exactly, for rational_exact kinds.
Rational apply_exact(const Transform& t, const Rational& v);

}  // namespace weightlab
