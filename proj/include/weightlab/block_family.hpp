#pragma once

#include <functional>
#include <string>

#include "weightlab/profile.hpp"

namespace weightlab {

// A sequence k -> s_k > 0 (or >= 0), known exactly where it is materialized
// and through its logarithm everywhere, so deep tail blocks never underflow.
struct BlockSequence {
  std::function<Rational(long)> value;
  std::function<double(long)> log_value;
};

// The (a_k, b_k) construction: on (2^{-k-1}, 2^{-k}] the profile is b_k on the
// lower a_k-fraction and 1 on the rest.
struct DyadicBlockFamily {
  std::string name;
  BlockSequence a;
  BlockSequence b;
  long depth = 104;
  Coordinate coordinate = Coordinate::OneMinusModulusSquared;

  Rational a_at(long k) const;
  Rational b_at(long k) const;
  // sup_{1 <= k < depth} a_k.
  Rational a_sup() const;
};

// Materializes blocks k < depth and attaches a series tail for k >= depth.
StepProfile build_family(const DyadicBlockFamily& fam);

// sum_{k >= n} 2^{-k} (k+1) = 2^{1-n} (n+2).
Rational series_tail(long n);
// The constant 2 + 2/log 2 bounding series_tail(n) / (2^{-n} (n+1)).
double series_tail_constant();

}  // namespace weightlab
