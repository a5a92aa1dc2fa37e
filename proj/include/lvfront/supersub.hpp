#pragma once

// Comparison-function families built from traveling fronts, their parameter
// constraints, and sign checks of the residual operators
//
//   N1[u, v] = u_t - d u_xx - r u (1 - u - a v)
//   N2[u, v] = v_t -   v_xx -   v (1 - v - b u)
//
// A lower pair (u small, v large) needs N1 <= 0 and N2 >= 0; an upper pair
// (u large, v small) needs N1 >= 0 and N2 <= 0.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lvfront/model.hpp"
#include "lvfront/pde.hpp"
#include "lvfront/wave.hpp"

namespace lvf {

enum class Family {
  LowerSimple,    // u = max(U(xi) - p, 0), v = (1 + q) V(xi)
  UpperSimple,    // u = (1 + q) U(xi), v = max(V(xi) - p, 0)
  UpperTwoSided,  // u = U(xi+) + U(xi-) - 1 + p, v = (1 - q)(V(xi+) + V(xi-))
  LowerTwoSided,  // u = max(U(xi+) + U(xi-) - 1 - p, 0), v = (1 + q)(V(xi+) + V(xi-))
  AppendixLower,  // perturbed front: u = max(U+ + U- - (1-eps) - p, 0), v = V+ + V- + q
};

std::string to_string(Family f);
std::optional<Family> parse_family(const std::string& s);
bool is_lower(Family f) noexcept;

/// Free parameters of a family. `rate` is alpha (simple pairs), beta
/// (two-sided pairs) or mu (appendix pair).
///   simple:    p = p0 e^{-rate t}, q = q0 e^{-rate t}, eta  = shift0 - shift1 e^{-rate t / 2}, xi = x - c t + eta
///   two-sided: same p, q;                             zeta = shift0 - shift1 e^{-rate t / 2}, xi+- = +-x - c t + zeta
///   appendix:  same p, q;                             zeta = -shift0 + shift1 e^{-rate t},    xi+- = +-x - c t - zeta
struct SuperSubParams {
  Family family = Family::LowerSimple;
  double p0 = 0.05;
  double q0 = 0.5;
  double rate = 0.3;
  double shift0 = 0.0;
  double shift1 = 1.0;
  double epsilon = 0.0;  // AppendixLower only
};

struct ConstraintVerdict {
  bool pass = true;
  std::vector<std::string> failed;  // names of violated inequalities
};

/// Checks the sufficient conditions of the family. `wave` is needed only by
/// AppendixLower, whose rate bound involves the perturbed front's speed.
ConstraintVerdict check_constraints(Family family, const ModelParams& params, const SuperSubParams& ssp,
                                    const WaveProfile* wave = nullptr);

struct PairValue {
  double u = 0.0, v = 0.0;          // the pair, with the max{., 0} truncation
  double u_raw = 0.0, v_raw = 0.0;  // the smooth branch before truncation
};

struct ResidualValue {
  double n1 = 0.0, n2 = 0.0;
  double scale1 = 0.0, scale2 = 0.0;  // sums of |terms|, for relative thresholds
  bool kink = false;                  // truncated component is exactly 0 here
};

class SuperSubPair {
 public:
  SuperSubPair(const ModelParams& params, const WaveProfile& wave, const SuperSubParams& ssp);

  const SuperSubParams& ssp() const noexcept { return ssp_; }
  const ModelParams& params() const noexcept { return params_; }
  const WaveProfile& wave() const noexcept { return eval_.profile(); }
  double speed() const noexcept { return c_; }
  bool lower() const noexcept { return is_lower(ssp_.family); }
  bool two_sided() const noexcept { return ssp_.family != Family::LowerSimple && ssp_.family != Family::UpperSimple; }

  double p(double t) const;
  double q(double t) const;
  double shift(double t) const;  // eta or zeta

  /// Where the front sits at time t: xi = 0 (simple) or xi+ = 0 (two-sided).
  double front_position(double t) const;

  PairValue operator()(double t, double x) const;

  /// N1, N2 from the closed-form time derivatives and the wave identities.
  ResidualValue residual(double t, double x) const;

  /// N1, N2 by fourth-order central differences of the pair itself. On the
  /// truncated branch of a lower (or upper) pair, the smooth branch is used.
  ResidualValue residual_fd(double t, double x, double ht = 1e-3, double hx = 0.1) const;

 private:
  WaveSample wave_at(double xi) const;
  ResidualValue residual_simple(double t, double x) const;
  ResidualValue residual_two_sided(double t, double x) const;
  ResidualValue residual_appendix(double t, double x) const;

  ModelParams params_;
  SuperSubParams ssp_;
  WaveEvaluator eval_;
  double c_;
  double xi_limit_;
};

SuperSubPair build_pair(Family family, const ModelParams& params, const WaveProfile& wave, SuperSubParams ssp);

struct Lattice {
  double t0 = 0.0, t1 = 200.0, dt = 0.5;
  double half_width = 40.0;  // in xi around each front
  double dx = 0.05;
};

struct Violation {
  double value = 0.0;  // size of the wrong-signed residual
  double t = 0.0, x = 0.0;
};

enum class ResidualMethod { Analytic, FiniteDifference };

struct ResidualReport {
  Family family = Family::LowerSimple;
  Lattice lattice;
  ResidualMethod method = ResidualMethod::Analytic;
  std::size_t points = 0;
  std::size_t kink_points = 0;
  std::size_t n1_violations = 0, n2_violations = 0;
  std::optional<Violation> n1_worst, n2_worst;
  std::optional<double> T_star;              // first lattice time with no violations from then on
  std::optional<double> last_violation_time;
  std::vector<double> row_times;
  std::vector<std::size_t> row_violations;   // per lattice time

  bool clean() const noexcept { return T_star.has_value(); }
  bool clean_from(double t) const noexcept { return T_star && *T_star <= t; }
};

/// Relative threshold: a residual is wrong-signed when it exceeds this
/// fraction of the sum of the magnitudes of its terms.
inline constexpr double kResidualRelTol = 1e-8;

/// Evaluates the residuals on the lattice. Rows are distributed over
/// `threads` workers and reduced in time order.
ResidualReport evaluate_residuals(const SuperSubPair& pair, const Lattice& lattice = {},
                                  ResidualMethod method = ResidualMethod::Analytic, unsigned threads = 1);

/// x-nodes of the lattice row at time t for this pair.
std::vector<double> lattice_row(const SuperSubPair& pair, const Lattice& lattice, double t);

struct CertificateResult {
  bool certified = false;
  double margin = 0.0;   // min over the grid of min(u0 - u_lower, v_upper - v0)
  double worst_x = 0.0;  // where the margin is attained
  char species = 'u';
};

/// Pointwise check u0 >= u_lower(T, .) and v0 <= v_upper(T, .) for a
/// LowerTwoSided pair whose report is clean from T onward.
CertificateResult invasion_certificate(const Grid& grid, const FieldState& initial, const SuperSubPair& pair,
                                       const ResidualReport& report, double T);

}  // namespace lvf
