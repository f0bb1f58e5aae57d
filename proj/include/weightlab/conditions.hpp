#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weightlab/profile.hpp"

namespace weightlab {

enum class ConditionKind { P1, P2, P3, P4, P4a, P4b, P5, P6, P6e, P7, P8, B1, BpI, AC };

// A condition, optionally pinned to one parameter (p for P1, q for P3,
// alpha for P4, beta for P8). Unpinned parameterized conditions are
// existential over a fixed grid; BpI is universal over the P1 grid.
struct ConditionId {
  ConditionKind kind = ConditionKind::P1;
  std::optional<double> param;

  std::string name() const;  // "P1", "P1(p=2)", ...
  static ConditionId parse(const std::string& text);
  static std::vector<ConditionId> all();
  bool operator<(const ConditionId& o) const;
  bool operator==(const ConditionId& o) const = default;
};

std::string kind_name(ConditionKind k);

// ---- per-scale functionals; x is the scale of the interval (0, x] ----

BoundPair average(const Profile& p, const Rational& x);
BoundPair p1_functional(const Profile& p, const Rational& x, double exp_p);
BoundPair rj_functional(const Profile& p, const Rational& x);
BoundPair rh_functional(const Profile& p, const Rational& x, double q);
BoundPair p5_functional(const Profile& p, const Rational& x);
BoundPair p6_functional(const Profile& p, const Rational& x);
BoundPair p6e_functional(const Profile& p, const Rational& x);
BoundPair p7_functional(const Profile& p, const Rational& x);
BoundPair b1_functional(const Profile& p, const Rational& x);

struct P8Result {
  BoundPair value;
  Rational lambda;  // the maximizing level (limit from above)
};
// sup over lambda > average of w({f > lambda}) / (lambda |{f > beta lambda}|).
P8Result p8_worst(const StepProfile& p, const Rational& x, const Rational& beta);

// alpha -> K_x(alpha), the largest share of the mass of (0, x] carried by a
// set of measure alpha x. Greedy on the value-sorted window.
struct ConcentrationCurve {
  Window w;
  // Materialized breakpoints of the curve: alpha_i = len_ge[i]/x.
  std::vector<Rational> alphas() const;
  // Exact greedy materialized mass for a set of length L.
  Rational greedy_mass(const Rational& L) const;
  BoundPair at(const Rational& alpha) const;
};
ConcentrationCurve concentration_curve(const StepProfile& p, const Rational& x);

// Scales probed for the block (2^{-n-1}, 2^{-n}]: its top, the breakpoints
// inside it, and points just above breakpoints, where the averages of a step
// profile jump.
std::vector<Rational> block_scales(const Profile& p, long n);

// sup of K over candidate scales in (2^{-n-1}, 2^{-n}].
BoundPair concentration_block_sup(const StepProfile& p, long n, const Rational& alpha);

// esssup/essinf of f over the top half for arc length ell.
BoundPair ac_ratio(const Profile& p, const Rational& ell);
// sup of ac_ratio over ell in (2^{-n-1}, 2^{-n}].
BoundPair ac_block_sup(const Profile& p, long n);

// ---- verdicts and sweeps ----

struct Verdict {
  enum class Kind { Holds, Fails, Inconclusive };
  Kind kind = Kind::Inconclusive;
  double constant = 0.0;  // Holds: max observed value
  long witness_n = -1;    // Fails: sample index
  BoundPair witness_value;
  std::string reason;

  std::string kind_name() const;
};

struct FunctionalSample {
  long n = 0;
  BoundPair value;
  nlohmann::json aux;
};

struct SweepReport {
  ConditionId condition;
  std::vector<FunctionalSample> samples;
  Verdict verdict;
  std::vector<SweepReport> sub;  // per-parameter reports
  std::string error;             // "non-integrable", "divergent-moment", ...
  nlohmann::json to_json() const;
};

// Below this many scales a bounded-looking sweep is reported Inconclusive.
inline constexpr long kMinHoldingSweep = 8;

struct ClassifyOptions {
  long n_max = 40;
  double divergence_factor = 4.0;
};

// Classification of samples at n = 0..N by growth.
Verdict classify_samples(const std::vector<FunctionalSample>& samples, double factor);

// Runs the sweeps for one profile, caching shared pieces (AC sweep, averages).
class Classifier {
 public:
  Classifier(Profile p, ClassifyOptions opts);
  SweepReport classify(const ConditionId& c);
  const Profile& profile() const { return profile_; }
  const ClassifyOptions& options() const { return opts_; }
  // True when f is monotone in the way the conditional edges need, with 0 < w(0) < inf.
  bool decreasing_weight() const;
  bool increasing_weight() const;

 private:
  SweepReport classify_unchecked(const ConditionId& c);
  SweepReport scalar_sweep(const ConditionId& c);
  SweepReport p4_single(double alpha);
  SweepReport p4a();
  SweepReport p4b();
  SweepReport p8_single(const Rational& beta, const ConditionId& id);
  const SweepReport& ac();
  bool integrable();

  Profile profile_;
  ClassifyOptions opts_;
  std::optional<SweepReport> ac_;
  std::map<ConditionId, SweepReport> scalar_cache_;
  std::optional<bool> integrable_;
};

SweepReport classify(const Profile& p, const ConditionId& c, const ClassifyOptions& opts);

// Parameter grids used by the existential conditions.
std::vector<double> p1_grid();
std::vector<double> p3_grid();
std::vector<double> p4_grid();
std::vector<double> p4b_grid();
std::vector<double> p8_base_grid();
int p4a_levels();

}  // namespace weightlab
