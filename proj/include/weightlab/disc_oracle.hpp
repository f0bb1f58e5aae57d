#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "weightlab/profile.hpp"

namespace weightlab {

// Q_I: the points of the disc over the arc I with 1 - |z| < |I|. Arc lengths
// are normalized so the whole circle has length 1 and areas so the disc has
// area 1. The scale x = |I|(2 - |I|) is kept exact; the arc itself is exact
// only when the square was built from it.
struct CarlesonSquare {
  double arc = 1.0;
  double theta_c = 0.0;
  Rational x = 1;
  std::optional<Rational> exact_arc;

  static CarlesonSquare from_arc(const Rational& arc, double theta_c = 0.0);
  // |I| = 1 - sqrt(1 - x), rounded to nearest.
  static CarlesonSquare from_scale(const Rational& x, double theta_c = 0.0);

  // |I|^2 (2 - |I|) and |I|^2 (1 - 3|I|/4); exact when the arc is.
  BoundPair area() const;
  BoundPair top_area() const;
};

// Midpoint-product rule in (1 - |z|, angle). Radial panels are split at the
// radii where the profile jumps unless split_at_breakpoints is off.
struct QuadratureSpec {
  int radial = 2048;
  int angular = 64;
  bool split_at_breakpoints = true;

  void validate() const;  // both counts at least 16
  QuadratureSpec refined() const;
};

// (1/|Q_I|) times the integral of phi(w) over Q_I, by quadrature. Needs an
// s-coordinate profile. Below the materialized depth the annulus identity
// supplies the tail's share.
double carleson_moment_2d(const Profile& p, const CarlesonSquare& sq, const Transform& phi,
                          const QuadratureSpec& spec = {});
// Quadrature nodes used by the call above.
long quadrature_nodes(const Profile& p, const CarlesonSquare& sq, const QuadratureSpec& spec);

// Brute-force Mw(z) at a point with 1 - |z|^2 = t: the best average over
// candidate squares containing z. Candidate arcs are log-spaced in
// [1 - |z|, 1], plus those whose scale lands on a breakpoint of the profile.
double maximal_2d_at(const Profile& p, const Rational& t, double angle, int candidate_count,
                     const QuadratureSpec& spec = {16, 16, true});
// M(w 1_{Q_I})(z): sup over every J containing z of w(Q_I n Q_J)/|Q_J|.
double restricted_maximal_2d(const Profile& p, const CarlesonSquare& sq, const Rational& t, double angle,
                             int candidate_count, const QuadratureSpec& spec = {16, 16, true});
// M_I w(z): the same sup over J inside I only.
double within_maximal_2d(const Profile& p, const CarlesonSquare& sq, const Rational& t, double angle,
                         int candidate_count, const QuadratureSpec& spec = {16, 16, true});

// Lower median of w over Q_I from exact annulus areas. Step profiles only.
Rational median_2d(const StepProfile& p, const CarlesonSquare& sq);
// Lower median of w at area-stratified random points of Q_I.
double median_2d_sampled(const Profile& p, const CarlesonSquare& sq, long sample_count, std::uint64_t seed);

// essinf and esssup of w over Q_I, read off the quadrature nodes.
std::pair<double, double> ess_range_2d(const Profile& p, const CarlesonSquare& sq, const QuadratureSpec& spec = {});

// Area of the annulus sector {z in Q_I : a < 1 - |z|^2 <= b}, from
// |I| (r_outer^2 - r_inner^2). Needs an exact arc.
Rational annulus_area(const CarlesonSquare& sq, const Rational& a, const Rational& b);
// w({z in Q_I : w(z) > lambda}) summed over annulus sectors, step profiles only.
Rational superlevel_mass_2d(const StepProfile& p, const CarlesonSquare& sq, const Rational& lambda);

struct OracleCheck {
  std::string part;   // a, b, e, f, g, h, geometry, rotation, convergence
  std::string label;  // what was compared
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  long nodes = 0;
  double tolerance = 0.0;
  bool exact = false;  // compared as rationals
  bool pass = false;
  bool skipped = false;
  std::string note;

  nlohmann::json to_json() const;
};

struct OracleReport {
  std::string profile;
  std::vector<OracleCheck> checks;

  bool ok() const;
  nlohmann::json to_json() const;
};

struct OracleOptions {
  std::set<char> parts{'a', 'b', 'e', 'f', 'h'};
  QuadratureSpec spec;
  long median_samples = 100000;
  std::uint64_t seed = 1;
  int candidates = 1000;
};

// The dictionary checks for one profile over a fixed set of squares.
OracleReport run_oracle(const Profile& p, const std::string& label, const OracleOptions& opts = {});

}  // namespace weightlab
