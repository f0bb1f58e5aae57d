#pragma once

#include <vector>

#include "weightlab/profile.hpp"

namespace weightlab {

// On (c, d] the running average is y -> (T + A + B (y - c)) / y, where T is the
// tail mass below x_low and A the materialized mass over (x_low, c].
struct EnvelopePiece {
  Rational c;
  Rational d;
  Rational A;
  Rational B;
};

struct AverageEnvelope {
  Rational x_low;  // x_K, or 0 without a tail
  Rational x;
  BoundPair tail_mass;
  std::vector<EnvelopePiece> pieces;  // pieces[0] ends at x, descending

  // (1/y) int_0^y f for y in (x_low, x].
  BoundPair at(const Rational& y) const;
  // Same with the tail mass pinned to T.
  Rational at_exact(const Rational& y, const Rational& T) const;
};

AverageEnvelope envelope(const StepProfile& p, const Rational& x);

// t -> sup_{t <= y <= x} of the envelope, on (x_low, x].
struct RunningMaxPiece {
  Rational lo;
  Rational hi;
  bool constant = true;
  Rational m;        // the value, for constant pieces
  std::size_t segment = 0;  // envelope piece followed otherwise
};

struct RunningMaxProfile {
  std::vector<RunningMaxPiece> pieces;  // descending in t
  Rational bottom;                      // value at t = x_low+
};

RunningMaxProfile running_max(const AverageEnvelope& env, const Rational& T);

// M(f 1_{(0,x]})(t) for x_K < t <= x.
BoundPair restricted_maximal_at(const StepProfile& p, const Rational& x, const Rational& t);
// int_0^x M(f 1_{(0,x]}).
BoundPair maximal_integral(const StepProfile& p, const Rational& x);
// Mf(t) = restricted_maximal_at(p, 1, t).
BoundPair global_maximal_at(const StepProfile& p, const Rational& t);

}  // namespace weightlab
