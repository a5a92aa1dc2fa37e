#include "lvfront/model.hpp"

#include <algorithm>
#include <cmath>

#include "lvfront/error.hpp"

namespace lvf {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::InvalidParameter,
         std::string("positivity: parameter ") + name + " must be > 0, got " + std::to_string(value));
  }
}

// Equality of r and d for the symmetric-rate clause of the sign rules.
bool nearly_equal(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)); }

}  // namespace

void ModelParams::validate() const {
  require_positive(d, "d");
  require_positive(r, "r");
  require_positive(a, "a");
  require_positive(b, "b");
}

SpeedSet SpeedSet::resolved(double cuv) const {
  SpeedSet out = *this;
  out.c_uv = cuv;
  out.c_0 = 0.5 * (cuv + c_v);
  return out;
}

SpeedSet canonical_speeds(const ModelParams& params) {
  params.validate();
  SpeedSet s;
  s.c_u = 2.0 * std::sqrt(params.r * params.d);
  s.c_v = 2.0;
  return s;
}

RootPair opposite_sign_roots(double A, double B, double C) {
  // C < 0 < A guarantees real roots of opposite sign. The root of larger
  // magnitude comes from q, the other from C/q, so no subtraction of nearly
  // equal numbers occurs for any sign of B.
  const double disc = std::sqrt(B * B - 4.0 * A * C);
  const double q = B >= 0.0 ? -0.5 * (B + disc) : -0.5 * (B - disc);
  const double r1 = q / A;
  const double r2 = C / q;
  return r1 < r2 ? RootPair{r1, r2} : RootPair{r2, r1};
}

bool roots_coincide(double x, double y) noexcept {
  return std::abs(x - y) < kRootCoincidenceTol * std::max(1.0, std::abs(x));
}

CharacteristicRoots char_roots(const ModelParams& p, double c) {
  p.validate();
  if (!p.strong_competition()) {
    fail(ErrorKind::Precondition, "strong competition: char_roots requires a > 1 and b > 1");
  }
  if (!std::isfinite(c)) fail(ErrorKind::InvalidParameter, "wave speed must be finite");

  CharacteristicRoots out;
  out.speed = c;
  out.lambda1 = opposite_sign_roots(p.d, c, p.r * (1.0 - p.a)).negative;
  out.lambda2 = opposite_sign_roots(1.0, c, -1.0).negative;
  out.lambda3 = opposite_sign_roots(p.d, c, -p.r).positive;
  out.lambda4 = opposite_sign_roots(1.0, c, 1.0 - p.b).positive;
  out.Lambda_plus = std::max(out.lambda1, out.lambda2);
  out.Lambda_minus = std::min(out.lambda3, out.lambda4);
  out.gamma_plus = roots_coincide(out.lambda1, out.lambda2) ? 1 : 0;
  out.gamma_minus = roots_coincide(out.lambda3, out.lambda4) ? 1 : 0;
  return out;
}

SignPrediction cuv_sign_prediction(const ModelParams& p) {
  p.validate();
  if (!p.strong_competition()) {
    fail(ErrorKind::Precondition, "strong competition: sign prediction requires a > 1 and b > 1");
  }
  if (nearly_equal(p.r, p.d)) {
    if (nearly_equal(p.a, p.b)) return {SignVerdict::Zero, SignRule::EqualRatesEqual};
    if (p.b > p.a) return {SignVerdict::Positive, SignRule::EqualRatesBGreater};
    return {SignVerdict::Negative, SignRule::EqualRatesAGreater};
  }
  if (p.r > p.d) {
    const double ratio = p.r / p.d;
    if (p.b >= ratio * ratio * p.a) return {SignVerdict::Positive, SignRule::FastGrowthLargeB};
    return {};
  }
  const double ratio = p.d / p.r;
  if (p.a >= ratio * ratio * p.b) return {SignVerdict::Negative, SignRule::FastDiffusionLargeA};
  return {};
}

std::string to_string(SignVerdict v) {
  switch (v) {
    case SignVerdict::Positive: return "positive";
    case SignVerdict::Zero: return "zero";
    case SignVerdict::Negative: return "negative";
    case SignVerdict::Unknown: return "unknown";
  }
  return "unknown";
}

std::string to_string(SignRule r) {
  switch (r) {
    case SignRule::None: return "none";
    case SignRule::EqualRatesBGreater: return "r=d,b>a";
    case SignRule::EqualRatesEqual: return "r=d,a=b";
    case SignRule::EqualRatesAGreater: return "r=d,a>b";
    case SignRule::FastGrowthLargeB: return "r>d,b>=(r/d)^2a";
    case SignRule::FastDiffusionLargeA: return "r<d,a>=(d/r)^2b";
  }
  return "none";
}

}  // namespace lvf
