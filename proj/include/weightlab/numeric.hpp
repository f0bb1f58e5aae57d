#pragma once

#include <gmpxx.h>

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace weightlab {

using Rational = mpq_class;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error taxonomy. The CLI maps these onto exit codes.
struct WeightlabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : WeightlabError {
  using WeightlabError::WeightlabError;
};
struct TailError : WeightlabError {
  using WeightlabError::WeightlabError;
};
struct DivergentMoment : WeightlabError {
  using WeightlabError::WeightlabError;
};
struct NonIntegrable : WeightlabError {
  using WeightlabError::WeightlabError;
};
struct Unsupported : WeightlabError {
  using WeightlabError::WeightlabError;
};

double next_down(double v);
double next_up(double v);

// Directed conversions: down(q) <= q <= up(q).
double down(const Rational& q);
double up(const Rational& q);
Rational exact(double d);

// Natural log of a positive rational, accurate for any magnitude.
double log_of(const Rational& q);

Rational pow2(long e);

// Accepts "0.125", "-3e-4", "1/8", "7".
Rational parse_decimal(const std::string& text);
std::string to_decimal(double v);
std::string to_decimal(const Rational& q);

// log(exp(a) + exp(b)) with -inf as the additive identity.
double log_add(double a, double b);

// Closed interval [lo, hi] enclosing a real quantity. When the quantity is
// known exactly as a rational it is carried alongside.
struct BoundPair {
  double lo = 0.0;
  double hi = 0.0;
  std::optional<Rational> exact;

  static BoundPair of(const Rational& q);
  static BoundPair of(double lo, double hi);
  // A binary64 result with `ulps` units of slack each way.
  static BoundPair around(double v, int ulps = 1);

  bool is_exact() const { return exact.has_value(); }
  double width() const { return is_exact() ? 0.0 : hi - lo; }
  double mid() const;
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool finite() const;
};

BoundPair operator+(const BoundPair& a, const BoundPair& b);
BoundPair operator-(const BoundPair& a, const BoundPair& b);
BoundPair operator*(const BoundPair& a, const BoundPair& b);
BoundPair operator/(const BoundPair& a, const BoundPair& b);

// Relative widening by `rel`, used after transcendental steps.
BoundPair widen(const BoundPair& a, double rel);
BoundPair hull(const BoundPair& a, const BoundPair& b);
// Pointwise maximum of two enclosed quantities.
BoundPair max_of(const BoundPair& a, const BoundPair& b);

BoundPair exp_of(const BoundPair& a);
BoundPair log_of(const BoundPair& a);
// a^e for a >= 0 and real e.
BoundPair pow_of(const BoundPair& a, double e);

// Enclosure of the natural log of a nonnegative quantity; lo may be -inf.
struct LogBound {
  double lo = -kInf;
  double hi = -kInf;
  static LogBound zero() { return {}; }
  bool is_zero() const { return hi == -kInf; }
};

LogBound log_sum(const LogBound& a, const LogBound& b);
LogBound to_log(const BoundPair& a);
BoundPair from_log(const LogBound& a);

// Slack applied to every transcendental result, a few ulps of the magnitude;
// libm exp/log/log1p are within one ulp.
inline constexpr double kTranscendentalSlack = 1e-15;

}  // namespace weightlab
