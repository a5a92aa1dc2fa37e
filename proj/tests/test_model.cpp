#include <doctest.h>

#include <cmath>
#include <random>

#include "lvfront/error.hpp"
#include "lvfront/model.hpp"

using namespace lvf;

namespace {

// |A l^2 + B l + C| relative to the sum of term magnitudes, in long double.
double rel_residual(double A, double B, double C, double l) {
  const long double L = l;
  const long double t1 = A * L * L, t2 = B * L, t3 = C;
  return static_cast<double>(std::fabs(t1 + t2 + t3) / (std::fabs(t1) + std::fabs(t2) + std::fabs(t3)));
}

struct Draw {
  ModelParams p;
  double c;
};

// Strong competition parameters and speeds from the range used in sweeps.
Draw draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Draw s;
  s.p.d = std::exp(std::log(0.05) + U(rng) * std::log(400.0));
  s.p.r = std::exp(std::log(0.05) + U(rng) * std::log(400.0));
  s.p.a = 1.0 + 1e-3 + 30.0 * U(rng);
  s.p.b = 1.0 + 1e-3 + 30.0 * U(rng);
  s.c = -10.0 + 20.0 * U(rng);
  return s;
}

}  // namespace

TEST_CASE("canonical speeds") {
  SpeedSet s = canonical_speeds({1, 1, 2, 2});
  CHECK(s.c_u == doctest::Approx(2.0));
  CHECK(s.c_v == 2.0);
  CHECK_FALSE(s.c_uv.has_value());
  s = canonical_speeds({0.25, 1, 1.2, 20});
  CHECK(s.c_u == doctest::Approx(1.0));
  CHECK(s.c_v == 2.0);
  CHECK_THROWS_AS(canonical_speeds({4, 0, 2, 2}), Error);
  CHECK_THROWS_AS(canonical_speeds({-1, 1, 2, 2}), Error);

  const SpeedSet r = canonical_speeds({1, 1, 2, 3}).resolved(0.25);
  REQUIRE(r.c_0.has_value());
  CHECK(*r.c_0 == doctest::Approx(1.125));
}

TEST_CASE("roots at zero speed, symmetric case") {
  const CharacteristicRoots r = char_roots({1, 1, 2, 2}, 0.0);
  CHECK(r.lambda1 == doctest::Approx(-1.0));
  CHECK(r.lambda2 == doctest::Approx(-1.0));
  CHECK(r.lambda3 == doctest::Approx(1.0));
  CHECK(r.lambda4 == doctest::Approx(1.0));
  CHECK(r.gamma_plus == 1);
  CHECK(r.gamma_minus == 1);
}

TEST_CASE("lambda4 matches the quadratic formula") {
  const CharacteristicRoots r = char_roots({1, 1, 2, 5}, 0.5);
  CHECK(r.lambda4 == doctest::Approx((-0.5 + std::sqrt(0.25 + 16.0)) / 2.0).epsilon(1e-14));
  // a = 2 with d = r = 1 makes the lambda1 and lambda2 quadratics identical.
  CHECK(r.gamma_plus == 1);
  CHECK(r.gamma_minus == 0);
  CHECK(char_roots({1, 1, 3, 5}, 0.5).gamma_plus == 0);
  CHECK(r.Lambda_plus == std::max(r.lambda1, r.lambda2));
  CHECK(r.Lambda_minus == std::min(r.lambda3, r.lambda4));
}

TEST_CASE("weak competition rejected") {
  CHECK_THROWS_AS(char_roots({1, 1, 1.0, 2}, 0.0), Error);
  CHECK_THROWS_AS(char_roots({1, 1, 2, 0.5}, 0.0), Error);
}

TEST_CASE("root identities and sign pattern over random draws") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 2000; ++k) {
    const Draw s = draw(rng);
    const ModelParams& p = s.p;
    const CharacteristicRoots r = char_roots(p, s.c);
    CHECK(rel_residual(p.d, s.c, p.r * (1 - p.a), r.lambda1) < 1e-12);
    CHECK(rel_residual(1.0, s.c, -1.0, r.lambda2) < 1e-12);
    CHECK(rel_residual(p.d, s.c, -p.r, r.lambda3) < 1e-12);
    CHECK(rel_residual(1.0, s.c, 1 - p.b, r.lambda4) < 1e-12);
    CHECK(r.lambda1 < 0.0);
    CHECK(r.lambda2 < 0.0);
    CHECK(r.lambda3 > 0.0);
    CHECK(r.lambda4 > 0.0);
  }
}

TEST_CASE("exchange symmetry of the roots") {
  // With d = r = 1, swapping a and b and reversing the speed maps
  // (l1, l2, l3, l4) to (-l4, -l3, -l2, -l1).
  std::mt19937_64 rng(12);
  for (int k = 0; k < 500; ++k) {
    Draw s = draw(rng);
    s.p.d = s.p.r = 1.0;
    const CharacteristicRoots r = char_roots(s.p, s.c);
    const CharacteristicRoots m = char_roots({1, 1, s.p.b, s.p.a}, -s.c);
    CHECK(m.lambda1 == doctest::Approx(-r.lambda4).epsilon(1e-12));
    CHECK(m.lambda2 == doctest::Approx(-r.lambda3).epsilon(1e-12));
    CHECK(m.lambda3 == doctest::Approx(-r.lambda2).epsilon(1e-12));
    CHECK(m.lambda4 == doctest::Approx(-r.lambda1).epsilon(1e-12));
  }
}

TEST_CASE("stable quadratic at large |B|") {
  for (double B : {1e4, 1e8, -1e8, 1e12}) {
    const RootPair rp = opposite_sign_roots(1.0, B, -1.0);
    CHECK(rel_residual(1.0, B, -1.0, rp.negative) < 1e-15);
    CHECK(rel_residual(1.0, B, -1.0, rp.positive) < 1e-15);
    // Vieta: the product is C / A exactly up to rounding.
    CHECK(rp.negative * rp.positive == doctest::Approx(-1.0).epsilon(1e-15));
  }
}

TEST_CASE("coincident roots threshold") {
  CHECK(roots_coincide(-1.0, -1.0 - 5e-9));
  CHECK_FALSE(roots_coincide(-1.0, -1.0 - 2e-8));
  CHECK(roots_coincide(-100.0, -100.0 - 5e-7));
}

TEST_CASE("sign prediction clauses") {
  SignPrediction s = cuv_sign_prediction({1, 1, 2, 3});
  CHECK(s.verdict == SignVerdict::Positive);
  CHECK(s.rule == SignRule::EqualRatesBGreater);
  s = cuv_sign_prediction({1, 1, 2, 2});
  CHECK(s.verdict == SignVerdict::Zero);
  CHECK(s.rule == SignRule::EqualRatesEqual);
  s = cuv_sign_prediction({1, 1, 3, 2});
  CHECK(s.verdict == SignVerdict::Negative);
  s = cuv_sign_prediction({1, 2, 1.5, 6});
  CHECK(s.verdict == SignVerdict::Positive);
  CHECK(s.rule == SignRule::FastGrowthLargeB);
  s = cuv_sign_prediction({2, 1, 1.5, 1.2});
  CHECK(s.verdict == SignVerdict::Unknown);
  CHECK(s.rule == SignRule::None);
  s = cuv_sign_prediction({2, 1, 4.8, 1.2});
  CHECK(s.verdict == SignVerdict::Negative);
  CHECK(s.rule == SignRule::FastDiffusionLargeA);
}
