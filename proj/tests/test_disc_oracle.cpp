#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "weightlab/disc_oracle.hpp"
#include "weightlab/families.hpp"
#include "weightlab/maximal.hpp"

using namespace weightlab;

namespace {

StepProfile step(const std::string& id) { return std::get<StepProfile>(instantiate(parse_family(id))); }

constexpr double kTwoPi = 6.283185307179586;

}  // namespace

TEST_CASE("constant weight averages to itself") {
  const Profile c = constant_profile(1);
  for (const Rational& arc : {Rational(1), Rational(1, 3), Rational(1, 1024)}) {
    CHECK(std::fabs(carleson_moment_2d(c, CarlesonSquare::from_arc(arc, 0.7), Transform::identity()) - 1.0) <= 1e-12);
  }
  CHECK(std::fabs(carleson_moment_2d(constant_profile(3), CarlesonSquare::from_arc(Rational(1, 2)),
                                     Transform::identity()) -
                  3.0) <= 1e-12);
}

TEST_CASE("square averages match the one-dimensional moments") {
  SUBCASE("P8-not-P5 family over the whole disc") {
    const double v = carleson_moment_2d(step("Ex6_2"), CarlesonSquare::from_arc(1), Transform::identity(), {2048, 64});
    CHECK(std::fabs(v - 1.25) <= 1e-6);
  }
  SUBCASE("power weight") {
    const double v = carleson_moment_2d(PowerProfile(1), CarlesonSquare::from_arc(1), Transform::identity());
    CHECK(std::fabs(v - 0.5) <= 1e-6);
    for (double r : {1.0, -0.5}) {
      const Rational x = Rational(1, 4);
      const CarlesonSquare sq = CarlesonSquare::from_scale(x);
      const double ref = oracle::power_identity_moment(r, x.get_d()) / x.get_d();
      CAPTURE(r);
      CHECK(std::fabs(carleson_moment_2d(PowerProfile(r), sq, Transform::identity()) - ref) <= 1e-6 * ref);
    }
  }
  SUBCASE("families at several scales") {
    for (const std::string id : {"Ex6_1", "Ex6_3", "Ex6_5"}) {
      const StepProfile p = step(id);
      for (long n : {1L, 3L, 6L}) {
        const CarlesonSquare sq = CarlesonSquare::from_scale(pow2(-n));
        const double ref = moment(p, pow2(-n), Transform::identity()).mid() / std::ldexp(1.0, static_cast<int>(-n));
        CAPTURE(id);
        CAPTURE(n);
        CHECK(std::fabs(carleson_moment_2d(p, sq, Transform::identity()) - ref) <= 1e-6 * ref);
      }
    }
  }
}

TEST_CASE("square geometry") {
  for (const Rational& arc : {Rational(1), Rational(1, 2), Rational(3, 7), Rational(1, 1000)}) {
    const CarlesonSquare sq = CarlesonSquare::from_arc(arc);
    const Rational a = arc * arc * (2 - arc);
    const Rational top = arc * arc * (1 - Rational(3, 4) * arc);
    REQUIRE(sq.area().is_exact());
    CHECK(*sq.area().exact == a);
    CHECK(*sq.top_area().exact == top);
    CHECK(a <= 4 * top);
    CHECK(sq.x == arc * (2 - arc));
    // Quadrature of 1 reproduces the area.
    const double one = carleson_moment_2d(constant_profile(1), sq, Transform::identity());
    CHECK(std::fabs(one - 1.0) <= 1e-10);
  }
  CHECK_THROWS(QuadratureSpec{8, 64, true}.validate());
  const QuadratureSpec r = QuadratureSpec{}.refined();
  CHECK(r.radial == 4096);
  CHECK(r.angular == 128);
}

TEST_CASE("level sets are exact annuli") {
  const CarlesonSquare sq = CarlesonSquare::from_arc(Rational(1, 2));
  // Whole square: the scale range (0, x].
  CHECK(annulus_area(sq, 0, sq.x) == *sq.area().exact);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Rational a(static_cast<long>(rng() % 997), 1000 * 4);
    const Rational b = a + Rational(static_cast<long>(rng() % 1000) + 1, 4000);
    const Rational hi = b < sq.x ? b : sq.x;
    if (hi <= a) continue;
    CHECK(annulus_area(sq, a, hi) == Rational(1, 2) * (hi - a));
  }
  // Superlevel sets: a finite profile takes any level, the full one only
  // levels its tail stays under.
  const StepProfile full = step("Ex6_3");
  const StepProfile cut = oracle::truncate(step("Ex6_3"), 20);
  const CarlesonSquare small = CarlesonSquare::from_arc(Rational(1, 8));
  auto same = [&](const StepProfile& p, const Rational& lam) {
    const BoundPair one_d = mass_above(p, small.x, lam);
    const double two_d = Rational(superlevel_mass_2d(p, small, lam) / small.exact_arc.value()).get_d();
    CAPTURE(lam.get_d());
    CHECK(one_d.lo <= two_d * (1 + 1e-12));
    CHECK(one_d.hi >= two_d * (1 - 1e-12));
  };
  for (const Rational& lam : {Rational(0), Rational(1, 2), Rational(1), Rational(1, 100)}) same(cut, lam);
  for (const Rational& lam : {Rational(1), Rational(7, 2)}) same(full, lam);
  CHECK_THROWS(superlevel_mass_2d(step("Ex6_2"), small, Rational(20)));
}

TEST_CASE("rotation does not change a radial average") {
  const StepProfile p = step("Ex6_2");
  const double base = carleson_moment_2d(p, CarlesonSquare::from_arc(Rational(1, 4), 0.0), Transform::identity());
  for (double theta : {0.3, 1.7, kTwoPi - 0.01, 12.0}) {
    const double v = carleson_moment_2d(p, CarlesonSquare::from_arc(Rational(1, 4), theta), Transform::identity());
    CHECK(std::fabs(v - base) <= 1e-12 * base);
  }
}

TEST_CASE("medians over squares") {
  CHECK(median_2d(constant_profile(7), CarlesonSquare::from_arc(Rational(1, 3))) == 7);
  const StepProfile e2 = step("Ex6_2");
  CHECK(median_2d(e2, CarlesonSquare::from_arc(1)) == 1);
  const StepProfile e3 = step("Ex6_3");
  const CarlesonSquare sq3 = CarlesonSquare::from_scale(pow2(-3));
  CHECK(median_2d(e3, sq3) == 1);
  CHECK(median_2d_sampled(e3, sq3, 100000, 11) == 1.0);
  for (const std::string id : {"Ex6_1", "Ex6_2", "Ex6_5"}) {
    const StepProfile p = step(id);
    for (long n : {0L, 2L, 5L}) {
      const CarlesonSquare sq = CarlesonSquare::from_scale(pow2(-n));
      CAPTURE(id);
      CHECK(median_2d(p, sq) == *median(p, pow2(-n)).exact);
    }
  }
}

TEST_CASE("maximal function over squares") {
  CHECK(std::fabs(maximal_2d_at(constant_profile(1), pow2(-3), 0.4, 64) - 1.0) <= 1e-12);
  const StepProfile e1 = step("Ex6_1");
  const Rational t = pow2(-5);
  const double one_d = global_maximal_at(e1, t).mid();
  const double two_d = maximal_2d_at(e1, t, 0.9, 1000, {256, 16, true});
  CHECK(two_d <= one_d * (1 + 1e-6));
  CHECK(std::fabs(two_d - one_d) <= 1e-4 * one_d);
}

TEST_CASE("restricted and within-square maximal functions agree for radial weights") {
  const StepProfile p = step("Ex6_2");
  const CarlesonSquare sq = CarlesonSquare::from_arc(Rational(1, 4), 1.0);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const Rational t = sq.x * Rational(static_cast<long>(rng() % 999) + 1, 1000);
    const double angle = 1.0 + (static_cast<double>(rng() % 1000) / 1000.0 - 0.5) * kTwoPi * sq.arc * 0.9;
    const double a = restricted_maximal_2d(p, sq, t, angle, 64);
    const double b = within_maximal_2d(p, sq, t, angle, 64);
    CAPTURE(i);
    CHECK(std::fabs(a - b) <= 1e-9 * std::max(a, b));
  }
}

TEST_CASE("refinement shrinks the mismatch") {
  for (double r : {1.0, -0.5}) {
    const CarlesonSquare sq = CarlesonSquare::from_arc(Rational(3, 5));
    const double ref = oracle::power_identity_moment(r, sq.x.get_d()) / sq.x.get_d();
    const QuadratureSpec coarse{64, 16, false};
    const double e1 = std::fabs(carleson_moment_2d(PowerProfile(r), sq, Transform::identity(), coarse) - ref);
    const double e2 =
        std::fabs(carleson_moment_2d(PowerProfile(r), sq, Transform::identity(), coarse.refined()) - ref);
    CAPTURE(r);
    CHECK(e2 * 3 <= e1);
  }
}

TEST_CASE("oracle runs") {
  OracleOptions o;
  o.candidates = 200;
  o.median_samples = 20000;
  const OracleReport c = run_oracle(constant_profile(1), "constant", o);
  CHECK(c.ok());
  CHECK_FALSE(c.checks.empty());
  const OracleReport e = run_oracle(step("Ex6_2"), "Ex6_2", o);
  for (const OracleCheck& k : e.checks) {
    CAPTURE(k.part);
    CAPTURE(k.label);
    CHECK((k.pass || k.skipped));
  }
  const nlohmann::json j = e.to_json();
  CHECK(j.contains("checks"));
  CHECK(j["checks"][0].contains("rel_err"));
}
