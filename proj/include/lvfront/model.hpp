#pragma once

// Model parameters of the two-species competition-diffusion system
//
//   u_t = d u_xx + r u (1 - u - a v)
//   v_t =   v_xx +   v (1 - v - b u)
//
// together with the canonical spreading speeds and the characteristic roots
// that govern the exponential tails of the bistable front.

#include <optional>
#include <string>

namespace lvf {

struct ModelParams {
  double d = 1.0;  // diffusion of u
  double r = 1.0;  // growth rate of u
  double a = 2.0;  // competition pressure of v on u
  double b = 2.0;  // competition pressure of u on v

  /// Throws Error(InvalidParameter) naming the first non-positive coefficient.
  void validate() const;
  bool strong_competition() const noexcept { return a > 1.0 && b > 1.0; }
};

struct SpeedSet {
  double c_u = 0.0;
  double c_v = 2.0;
  std::optional<double> c_uv;  // bistable speed, resolved by the wave solver
  std::optional<double> c_0;   // (c_uv + c_v) / 2 once c_uv is known

  /// Returns a copy with c_uv and the derived midpoint speed filled in.
  SpeedSet resolved(double cuv) const;
};

SpeedSet canonical_speeds(const ModelParams& params);

struct CharacteristicRoots {
  double speed = 0.0;
  double lambda1 = 0.0;  // negative root of c l + d l^2 + r(1-a)
  double lambda2 = 0.0;  // negative root of c l + l^2 - 1
  double lambda3 = 0.0;  // positive root of c l + d l^2 - r
  double lambda4 = 0.0;  // positive root of c l + l^2 + 1 - b
  double Lambda_plus = 0.0;   // max(lambda1, lambda2)
  double Lambda_minus = 0.0;  // min(lambda3, lambda4)
  int gamma_plus = 0;   // 1 when lambda1 == lambda2
  int gamma_minus = 0;  // 1 when lambda3 == lambda4
};

/// Characteristic roots at wave speed c. Requires a > 1 and b > 1.
CharacteristicRoots char_roots(const ModelParams& params, double c);

/// Roots of A l^2 + B l + C = 0 with A > 0 and C < 0, as (negative, positive).
/// Uses the cancellation-free form of the quadratic formula.
struct RootPair {
  double negative;
  double positive;
};
RootPair opposite_sign_roots(double A, double B, double C);

/// Relative threshold under which two decay rates count as coincident.
inline constexpr double kRootCoincidenceTol = 1e-8;
bool roots_coincide(double x, double y) noexcept;

enum class SignVerdict { Positive, Zero, Negative, Unknown };

enum class SignRule {
  None,
  EqualRatesBGreater,   // r = d and b > a > 1
  EqualRatesEqual,      // r = d and a = b > 1
  EqualRatesAGreater,   // r = d and a > b > 1
  FastGrowthLargeB,     // r > d and b >= (r/d)^2 a
  FastDiffusionLargeA,  // r < d and a >= (d/r)^2 b
};

struct SignPrediction {
  SignVerdict verdict = SignVerdict::Unknown;
  SignRule rule = SignRule::None;
};

/// Closed-form sign of the bistable speed where a known sufficient condition applies.
SignPrediction cuv_sign_prediction(const ModelParams& params);

std::string to_string(SignVerdict v);
std::string to_string(SignRule r);

}  // namespace lvf
