#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "weightlab/numeric.hpp"
#include "weightlab/transform.hpp"

namespace weightlab {

// u = 1 - |z| or s = 1 - |z|^2. The dictionary works in s.
enum class Coordinate { OneMinusModulus, OneMinusModulusSquared };

std::string to_string(Coordinate c);
Coordinate coordinate_from(const std::string& text);

// A constant piece of f on (lo, hi].
struct Piece {
  Rational lo;
  Rational hi;
  Rational value;
  double log_value = 0.0;
  double log_len = 0.0;
};

// A piece known only through logs, as used for tail blocks.
struct LogPiece {
  double log_len = -kInf;
  double log_value = 0.0;
};

// What lives on (0, x_K], below the materialized pieces.
class Tail {
 public:
  virtual ~Tail() = default;
  virtual std::string mode() const = 0;
  // Enclosure of log of the integral of phi(f) over (0, x_K], phi nonnegative.
  virtual LogBound log_moment(const Transform& t) const = 0;
  // Enclosure of the integral of log f over (0, x_K].
  virtual BoundPair log_integral() const = 0;
  virtual std::optional<Rational> exact_moment(const Transform&) const { return std::nullopt; }
  // Exact inf and sup of f on (0, x_K] (0 and +inf are attained as limits).
  virtual std::pair<double, double> range() const = 0;
  // f nondecreasing (resp. nonincreasing) in t on (0, x_K].
  virtual bool nondecreasing() const { return false; }
  virtual bool nonincreasing() const { return false; }
  // Upper bound on sup over 0 < y <= x_K of (1/y) times the integral of f over (0, y].
  virtual double env_sup() const { return range().second; }
};

class ForbidTail final : public Tail {
 public:
  std::string mode() const override { return "forbid"; }
  LogBound log_moment(const Transform&) const override;
  BoundPair log_integral() const override;
  std::pair<double, double> range() const override;
};

// Tail given as infinitely many blocks k >= first_block, each a few log pieces.
// Sums are taken directly over a window and closed with a remainder estimate
// fitted to the last terms (geometric or polynomial decay).
class SeriesTail final : public Tail {
 public:
  using Generator = std::function<void(long k, std::vector<LogPiece>& out)>;
  struct Options {
    double inf = 0.0;
    double sup = kInf;
    bool nondecreasing = false;
    bool nonincreasing = false;
    std::optional<Rational> identity_mass;  // exact closed form, when known
    long max_blocks = 4096;
  };

  SeriesTail(long first_block, Generator gen, Options opts);

  std::string mode() const override { return opts_.identity_mass ? "closed_form" : "series"; }
  LogBound log_moment(const Transform& t) const override;
  BoundPair log_integral() const override;
  std::optional<Rational> exact_moment(const Transform& t) const override;
  std::pair<double, double> range() const override { return {opts_.inf, opts_.sup}; }
  bool nondecreasing() const override { return opts_.nondecreasing; }
  bool nonincreasing() const override { return opts_.nonincreasing; }
  double env_sup() const override { return env_sup_; }

 private:
  long first_;
  Options opts_;
  std::vector<std::vector<LogPiece>> blocks_;
  double env_sup_ = kInf;
};

// Profile-file tail: the moment over (0, x_K] is at most ratio/(1-ratio) times
// the contribution of the last materialized piece.
class GeometricTail final : public Tail {
 public:
  GeometricTail(double ratio, LogPiece last, double coverage, double inf, double sup);
  std::string mode() const override { return "geometric"; }
  LogBound log_moment(const Transform& t) const override;
  BoundPair log_integral() const override;
  std::pair<double, double> range() const override { return {inf_, sup_}; }
  double ratio() const { return ratio_; }

 private:
  double ratio_;
  LogPiece last_;
  double coverage_;
  double inf_;
  double sup_;
};

class StepProfile {
 public:
  // breakpoints: 1 = x_0 > x_1 > ... > x_K >= 0; values[i] lives on (x_{i+1}, x_i].
  // x_K = 0 means the pieces cover all of (0, 1] and no tail is needed.
  StepProfile(Coordinate coordinate, const std::vector<Rational>& breakpoints,
              const std::vector<Rational>& values, std::shared_ptr<const Tail> tail);

  Coordinate coordinate() const { return coordinate_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const Rational& coverage() const { return coverage_; }
  bool has_tail() const { return sgn(coverage_) > 0; }
  const Tail& tail() const;
  std::shared_ptr<const Tail> tail_ptr() const { return tail_; }
  StepProfile with_tail(std::shared_ptr<const Tail> tail) const;

  // Index of the piece with lo < y <= hi; y must be in (x_K, 1].
  std::size_t locate(const Rational& y) const;
  // Exact integral of f over (x_K, y].
  Rational materialized_mass(const Rational& y) const;

  // Piece values nonincreasing from t = 1 down to the tail, tail included.
  bool nondecreasing_in_t() const;
  bool nonincreasing_in_t() const;

  std::vector<Rational> breakpoints() const;
  std::vector<Rational> values() const;

 private:
  Coordinate coordinate_;
  std::vector<Piece> pieces_;
  Rational coverage_;
  std::shared_ptr<const Tail> tail_;
  std::vector<Rational> mass_below_;  // mass_below_[i] = integral over (x_K, pieces_[i].lo]
};

// f(t) = (1 - t)^r on (0, 1], s-coordinate.
struct PowerProfile {
  double r = 1.0;
  explicit PowerProfile(double exponent);
};

using Profile = std::variant<StepProfile, PowerProfile>;

// Integral of phi(f) over (0, x].
BoundPair moment(const Profile& p, const Rational& x, const Transform& t);
// Same, in the log domain, for nonnegative phi. Avoids overflow.
LogBound log_moment(const Profile& p, const Rational& x, const Transform& t);

struct EssBounds {
  BoundPair inf;
  BoundPair sup;
};
// essinf and esssup of f over (lo, hi].
EssBounds ess_bounds(const Profile& p, const Rational& lo, const Rational& hi);
// Same over the open interval (lo, hi).
EssBounds ess_bounds_open(const Profile& p, const Rational& lo, const Rational& hi);

// Lower endpoint of the median interval of f on (0, x].
BoundPair median(const Profile& p, const Rational& x);

// |{t <= x : f(t) > lambda}| and the integral of f over that set.
BoundPair measure_above(const Profile& p, const Rational& x, const Rational& lambda);
BoundPair mass_above(const Profile& p, const Rational& x, const Rational& lambda);

// The pieces of (0, x] sorted by value, with cumulative sums. Used for level
// sets, the median, P8 and concentration curves.
struct Window {
  Rational x;
  std::vector<Rational> values;  // distinct, descending
  std::vector<Rational> len;     // total length at values[i]
  std::vector<Rational> mass;    // total mass at values[i]
  std::vector<Rational> len_ge;  // cumulative length of values >= values[i]
  std::vector<Rational> mass_ge;
  Rational mat_len;   // materialized length, x - x_K
  Rational mat_mass;  // materialized mass
  Rational tail_len;  // x_K
  BoundPair tail_mass;
  double tail_inf = 0.0;
  double tail_sup = 0.0;

  // Materialized length and mass strictly above lambda.
  std::pair<Rational, Rational> above(const Rational& lambda) const;
  // Materialized length and mass at or above lambda.
  std::pair<Rational, Rational> at_or_above(const Rational& lambda) const;
  BoundPair total_mass() const;
};

Window window(const StepProfile& p, const Rational& x);

// Re-express the weight in the other radial coordinate. Breakpoints map by
// s = u(2 - u) (exact) or u = 1 - sqrt(1 - s) (rounded to nearest); the tail
// becomes Forbid and must be reattached by the caller.
StepProfile convert_coordinate(const StepProfile& p, Coordinate to);

// Constant profile f = c on (0, 1].
StepProfile constant_profile(const Rational& c, Coordinate coordinate = Coordinate::OneMinusModulusSquared);

}  // namespace weightlab
