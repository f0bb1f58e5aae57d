#pragma once

// Reference computations used by the tests. They work from the raw
// description of a weight (block sequences, closed forms, piece lists) and do
// not call into the code under test beyond reading its inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "weightlab/block_family.hpp"
#include "weightlab/profile.hpp"

namespace oracle {

using weightlab::Rational;

// Integral of phi(f) over (0, x] for an (a_k, b_k) family, summed block by
// block in long double straight from the sequences. phi takes log v.
inline long double block_moment(const weightlab::DyadicBlockFamily& fam, long double x,
                                 const std::function<long double(long double)>& phi, long blocks = 1200) {
  long double total = 0.0L;
  const long double phi_one = phi(0.0L);
  for (long k = 0; k < blocks; ++k) {
    const long double top = std::ldexp(1.0L, static_cast<int>(-k));
    const long double bottom = top / 2;
    if (bottom >= x) continue;
    const long double a = std::exp(static_cast<long double>(fam.a.log_value(k)));
    const long double log_b = fam.b.log_value(k);
    const long double split = bottom * (1 + a);
    const long double hi = std::min(top, x);
    const long double exc = std::max(0.0L, std::min(hi, split) - bottom);
    const long double rest = std::max(0.0L, hi - std::max(bottom, split));
    total += exc * phi(log_b) + rest * phi_one;
  }
  return total;
}

// f(t) = (1 - t)^r: closed forms on (0, x].
inline double power_identity_moment(double r, double x) { return (1.0 - std::pow(1.0 - x, r + 1.0)) / (r + 1.0); }
inline double power_log_moment(double r, double x) {
  const double y = 1.0 - x;
  return r * (y > 0 ? -y * std::log(y) - x : -1.0);
}

// Composite Simpson rule on (lo, hi] after the substitution t = hi - (hi-lo) v^3
// which tames an integrable endpoint singularity at hi.
inline double simpson(const std::function<double(double)>& g, double lo, double hi, int panels = 20000) {
  const double len = hi - lo;
  auto h = [&](double v) { return v == 0.0 ? 0.0 : g(hi - len * v * v * v) * 3.0 * len * v * v; };
  const double dv = 1.0 / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double v0 = i * dv;
    s += (h(v0) + 4.0 * h(v0 + dv / 2) + h(v0 + dv)) * dv / 6.0;
  }
  return s;
}

// A finite profile from the first `count` pieces, the last one stretched to 0.
inline weightlab::StepProfile truncate(const weightlab::StepProfile& p, std::size_t count) {
  const auto& pieces = p.pieces();
  count = std::min(count, pieces.size());
  std::vector<Rational> bp{pieces[0].hi};
  std::vector<Rational> vals;
  for (std::size_t i = 0; i < count; ++i) {
    bp.push_back(i + 1 == count ? Rational(0) : pieces[i].lo);
    vals.push_back(pieces[i].value);
  }
  return weightlab::StepProfile(p.coordinate(), bp, vals, nullptr);
}

// Pieces of a finite profile clipped to (0, x]: (length, value).
inline std::vector<std::pair<Rational, Rational>> clipped(const weightlab::StepProfile& p, const Rational& x) {
  std::vector<std::pair<Rational, Rational>> out;
  for (const auto& pc : p.pieces()) {
    if (pc.lo >= x) continue;
    const Rational hi = pc.hi < x ? pc.hi : x;
    out.emplace_back(Rational(hi - pc.lo), pc.value);
  }
  return out;
}

struct SubsetBest {
  Rational length;
  Rational mass;
};

// Every union of pieces of (0, x]; at most 2^pieces entries.
inline std::vector<SubsetBest> all_subsets(const weightlab::StepProfile& p, const Rational& x) {
  const auto pcs = clipped(p, x);
  const std::size_t n = pcs.size();
  std::vector<SubsetBest> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    SubsetBest s{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        s.length += pcs[i].first;
        s.mass += pcs[i].first * pcs[i].second;
      }
    }
    out.push_back(s);
  }
  return out;
}

// Running averages y -> (1/y) int_0^y f from prefix sums over the pieces, in
// double. below_mass is the mass under the lowest materialized piece.
class PrefixAverages {
 public:
  PrefixAverages(const weightlab::StepProfile& p, double below_mass) : below_(below_mass) {
    const auto& pcs = p.pieces();
    for (auto it = pcs.rbegin(); it != pcs.rend(); ++it) {
      lo_.push_back(it->lo.get_d());
      hi_.push_back(it->hi.get_d());
      val_.push_back(it->value.get_d());
    }
    cum_.resize(lo_.size() + 1, below_);
    for (std::size_t i = 0; i < lo_.size(); ++i) cum_[i + 1] = cum_[i] + (hi_[i] - lo_[i]) * val_[i];
  }
  double mass(double y) const {
    const auto it = std::upper_bound(hi_.begin(), hi_.end(), y);
    std::size_t i = static_cast<std::size_t>(it - hi_.begin());
    if (i > 0 && hi_[i - 1] == y) return cum_[i];
    if (i >= lo_.size()) return cum_.back();
    return cum_[i] + (y - lo_[i]) * val_[i];
  }
  double average(double y) const { return mass(y) / y; }
  const std::vector<double>& tops() const { return hi_; }

 private:
  double below_;
  std::vector<double> lo_, hi_, val_, cum_;
};

// Right-endpoint Riemann sum of t -> sup_{t <= y <= x} avg(y) on (0, x].
// The supremum over y runs over a grid finer than the sum's plus every piece
// top; between piece tops the average is monotone, so the tops and the grid
// points bracket every local maximum.
inline double riemann_maximal_integral(const PrefixAverages& pa, double x, int points) {
  std::vector<double> ys;
  for (int i = 1; i <= points; ++i) ys.push_back(x * i / points);
  for (double t : pa.tops())
    if (t > x * 0.5 / points && t < x) ys.push_back(t);
  std::sort(ys.begin(), ys.end());
  std::vector<double> best(ys.size());
  double run = 0.0;
  for (std::size_t i = ys.size(); i-- > 0;) {
    run = std::max(run, pa.average(ys[i]));
    best[i] = run;
  }
  double sum = 0.0;
  for (int i = 1; i <= points; ++i) {
    const double t = x * i / points;
    const auto idx = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), t) - ys.begin());
    sum += best[idx] * (x / points);
  }
  return sum;
}

}  // namespace oracle
