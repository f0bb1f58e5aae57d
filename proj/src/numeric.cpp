#include "weightlab/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

namespace weightlab {

namespace {

constexpr double kMax = std::numeric_limits<double>::max();

// Round a computed lower bound down. An overflow produced from finite inputs
// only proves "larger than DBL_MAX", so it is clamped rather than trusted.
double round_lo(double s, bool inputs_finite) {
  if (std::isnan(s)) return -kInf;
  if (std::isinf(s)) return (s > 0 && inputs_finite) ? kMax : s;
  return next_down(s);
}

double round_hi(double s, bool inputs_finite) {
  if (std::isnan(s)) return kInf;
  if (std::isinf(s)) return (s < 0 && inputs_finite) ? -kMax : s;
  return next_up(s);
}

double safe_mul(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

bool is_dyadic_or_decimal(const mpz_class& den) {
  mpz_class d = den;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) d /= 2;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) d /= 5;
  return d == 1;
}

}  // namespace

double next_down(double v) {
  if (std::isinf(v)) return v;
  return std::nextafter(v, -kInf);
}

double next_up(double v) {
  if (std::isinf(v)) return v;
  return std::nextafter(v, kInf);
}

double down(const Rational& q) {
  const int s = sgn(q);
  if (s == 0) return 0.0;
  const double d = q.get_d();  // truncates toward zero
  if (s > 0) {
    if (std::isinf(d)) return kMax;
    return d;
  }
  if (std::isinf(d)) return -kInf;
  return Rational(d) == q ? d : next_down(d);
}

double up(const Rational& q) {
  const int s = sgn(q);
  if (s == 0) return 0.0;
  const double d = q.get_d();
  if (s < 0) {
    if (std::isinf(d)) return -kMax;
    return d;
  }
  if (std::isinf(d)) return kInf;
  return Rational(d) == q ? d : next_up(d);
}

Rational exact(double d) {
  if (!std::isfinite(d)) throw DomainError("non-finite value cannot be made exact");
  return Rational(d);
}

double log_of(const Rational& q) {
  if (sgn(q) <= 0) throw DomainError("log of a non-positive rational");
  long en = 0;
  long ed = 0;
  const double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log(mn) - std::log(md) + static_cast<double>(en - ed) * std::log(2.0);
}

Rational pow2(long e) {
  mpz_class p = 1;
  if (e >= 0) {
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    return Rational(p);
  }
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  return Rational(mpz_class(1), p);
}

Rational parse_decimal(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  if (text.empty()) throw DomainError("empty number");

  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (sgn(den) == 0) throw DomainError("zero denominator in '" + raw + "'");
    Rational r = num / den;
    r.canonicalize();
    return r;
  }

  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw DomainError("malformed number '" + raw + "'");
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') throw DomainError("malformed number '" + raw + "'");
    const std::string exponent = text.substr(i + 1);
    if (exponent.empty()) throw DomainError("malformed exponent in '" + raw + "'");
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(exponent, &used);
    } catch (const std::exception&) {
      throw DomainError("malformed exponent in '" + raw + "'");
    }
    if (used != exponent.size()) throw DomainError("malformed exponent in '" + raw + "'");
    scale += e;
  }
  mpz_class mantissa(digits, 10);
  mpz_class ten_power;
  mpz_ui_pow_ui(ten_power.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational r = scale >= 0 ? Rational(mantissa * ten_power) : Rational(mantissa, ten_power);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

std::string to_decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_decimal(const Rational& q) {
  if (!is_dyadic_or_decimal(q.get_den())) return q.get_str();
  // Exact decimal: scale by 10^k until integral.
  mpz_class num = q.get_num();
  mpz_class den = q.get_den();
  long k = 0;
  while (den != 1) {
    num *= 10;
    ++k;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    num /= g;
    den /= g;
  }
  const bool negative = sgn(num) < 0;
  if (negative) num = -num;
  std::string digits = num.get_str();
  if (k > 0) {
    if (static_cast<long>(digits.size()) <= k)
      digits.insert(0, static_cast<std::size_t>(k - static_cast<long>(digits.size()) + 1), '0');
    digits.insert(digits.size() - static_cast<std::size_t>(k), ".");
  }
  return negative ? "-" + digits : digits;
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a == kInf || b == kInf) return kInf;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

BoundPair BoundPair::of(const Rational& q) {
  BoundPair b;
  b.lo = down(q);
  b.hi = up(q);
  b.exact = q;
  return b;
}

BoundPair BoundPair::of(double lo, double hi) {
  BoundPair b;
  b.lo = lo;
  b.hi = hi;
  return b;
}

BoundPair BoundPair::around(double v, int ulps) {
  BoundPair b;
  b.lo = v;
  b.hi = v;
  for (int i = 0; i < ulps; ++i) {
    b.lo = next_down(b.lo);
    b.hi = next_up(b.hi);
  }
  return b;
}

double BoundPair::mid() const {
  if (exact) return exact->get_d();
  if (lo == hi) return lo;
  if (std::isinf(hi) && !std::isinf(lo)) return hi;
  return 0.5 * lo + 0.5 * hi;
}

bool BoundPair::finite() const { return std::isfinite(lo) && std::isfinite(hi); }

BoundPair operator+(const BoundPair& a, const BoundPair& b) {
  if (a.exact && b.exact) return BoundPair::of(*a.exact + *b.exact);
  const bool fin_lo = std::isfinite(a.lo) && std::isfinite(b.lo);
  const bool fin_hi = std::isfinite(a.hi) && std::isfinite(b.hi);
  return BoundPair::of(round_lo(a.lo + b.lo, fin_lo), round_hi(a.hi + b.hi, fin_hi));
}

BoundPair operator-(const BoundPair& a, const BoundPair& b) {
  if (a.exact && b.exact) return BoundPair::of(*a.exact - *b.exact);
  const bool fin_lo = std::isfinite(a.lo) && std::isfinite(b.hi);
  const bool fin_hi = std::isfinite(a.hi) && std::isfinite(b.lo);
  return BoundPair::of(round_lo(a.lo - b.hi, fin_lo), round_hi(a.hi - b.lo, fin_hi));
}

BoundPair operator*(const BoundPair& a, const BoundPair& b) {
  if (a.exact && b.exact) return BoundPair::of(*a.exact * *b.exact);
  const double p[4] = {safe_mul(a.lo, b.lo), safe_mul(a.lo, b.hi), safe_mul(a.hi, b.lo),
                       safe_mul(a.hi, b.hi)};
  const bool fin = a.finite() && b.finite();
  return BoundPair::of(round_lo(*std::min_element(p, p + 4), fin),
                       round_hi(*std::max_element(p, p + 4), fin));
}

BoundPair operator/(const BoundPair& a, const BoundPair& b) {
  if (a.exact && b.exact && sgn(*b.exact) != 0) return BoundPair::of(*a.exact / *b.exact);
  if (b.lo <= 0.0 && b.hi >= 0.0) {
    if (a.lo >= 0.0 && b.lo >= 0.0) {
      if (b.hi == 0.0) return BoundPair::of(a.lo > 0.0 ? kInf : 0.0, a.hi > 0.0 ? kInf : 0.0);
      return BoundPair::of(round_lo(a.lo / b.hi, true), kInf);
    }
    return BoundPair::of(-kInf, kInf);
  }
  BoundPair inv = BoundPair::of(round_lo(1.0 / b.hi, true), round_hi(1.0 / b.lo, true));
  if (std::isinf(b.hi)) inv.lo = 0.0;
  return a * inv;
}

BoundPair widen(const BoundPair& a, double rel) {
  BoundPair out = BoundPair::of(a.lo, a.hi);
  if (std::isfinite(a.lo)) out.lo = next_down(a.lo - std::fabs(a.lo) * rel);
  if (std::isfinite(a.hi)) out.hi = next_up(a.hi + std::fabs(a.hi) * rel);
  return out;
}

BoundPair hull(const BoundPair& a, const BoundPair& b) {
  if (a.exact && b.exact && *a.exact == *b.exact) return a;
  return BoundPair::of(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

BoundPair max_of(const BoundPair& a, const BoundPair& b) {
  if (a.exact && b.exact) return *a.exact >= *b.exact ? a : b;
  return BoundPair::of(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
}

BoundPair exp_of(const BoundPair& a) {
  BoundPair out = BoundPair::of(std::exp(a.lo), std::exp(a.hi));
  if (std::isinf(out.lo) && std::isfinite(a.lo)) out.lo = kMax;
  return widen(out, kTranscendentalSlack);
}

BoundPair log_of(const BoundPair& a) {
  const double lo = a.lo <= 0.0 ? -kInf : std::log(a.lo);
  const double hi = a.hi <= 0.0 ? -kInf : std::log(a.hi);
  return widen(BoundPair::of(lo, hi), kTranscendentalSlack);
}

BoundPair pow_of(const BoundPair& a, double e) {
  if (e == 1.0) return a;
  if (a.lo < 0.0) throw DomainError("pow_of expects a nonnegative base");
  const double p = std::pow(a.lo, e);
  const double q = std::pow(a.hi, e);
  BoundPair out = BoundPair::of(std::min(p, q), std::max(p, q));
  if (std::isinf(out.lo) && a.finite() && a.lo > 0.0) out.lo = kMax;
  return widen(out, kTranscendentalSlack);
}

LogBound log_sum(const LogBound& a, const LogBound& b) {
  LogBound out;
  out.lo = log_add(a.lo, b.lo);
  out.hi = log_add(a.hi, b.hi);
  if (std::isfinite(out.lo)) out.lo -= kTranscendentalSlack * (1.0 + std::fabs(out.lo));
  if (std::isfinite(out.hi)) out.hi += kTranscendentalSlack * (1.0 + std::fabs(out.hi));
  return out;
}

LogBound to_log(const BoundPair& a) {
  LogBound out;
  out.lo = a.lo <= 0.0 ? -kInf : std::log(a.lo);
  out.hi = a.hi <= 0.0 ? -kInf : std::log(a.hi);
  if (std::isfinite(out.lo)) out.lo -= kTranscendentalSlack * (1.0 + std::fabs(out.lo));
  if (std::isfinite(out.hi)) out.hi += kTranscendentalSlack * (1.0 + std::fabs(out.hi));
  return out;
}

BoundPair from_log(const LogBound& a) {
  double lo = a.lo == -kInf ? 0.0 : std::exp(a.lo);
  double hi = a.hi == -kInf ? 0.0 : std::exp(a.hi);
  if (std::isinf(lo) && std::isfinite(a.lo)) lo = kMax;
  return widen(BoundPair::of(lo, hi), kTranscendentalSlack);
}

}  // namespace weightlab
