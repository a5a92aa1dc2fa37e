#pragma once

// Traveling fronts of the competition system and of the single-species
// equation, computed as boundary-value problems on a truncated line
// [-L, L] with central differences and Newton's method.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lvfront/model.hpp"

namespace lvf {

enum class WaveKind { Bistable, KppU, KppV, PerturbedBistable };

std::string to_string(WaveKind kind);

struct WaveProfile {
  WaveKind kind = WaveKind::Bistable;
  ModelParams params;
  double speed = 0.0;
  double epsilon = 0.0;  // only for PerturbedBistable

  double L = 0.0;
  double h = 0.0;
  std::vector<double> xi;
  std::vector<double> U, V;    // V is identically zero for KPP profiles
  std::vector<double> dU, dV;  // derivative samples (central differences)
  double phase_anchor = 0.0;   // xi where U = left_U / 2

  double left_U = 1.0, left_V = 0.0;    // limits at -infinity
  double right_U = 0.0, right_V = 1.0;  // limits at +infinity

  double residual = 0.0;             // max-norm residual of the discrete system
  double monotonicity_margin = 0.0;  // largest wrong-signed increment (<= 1e-9 accepted)
  int newton_iterations = 0;
  int continuation_steps = 0;
  std::vector<std::string> notes;

  std::size_t size() const noexcept { return xi.size(); }
};

struct WaveSolveOptions {
  double L = 60.0;
  std::size_t n = 4801;  // odd, so that xi = 0 is a node
  double phase_anchor = 0.0;
  double tol = 1e-10;
  int max_newton = 40;
  bool allow_continuation = true;
  bool auto_extend = true;  // enlarge L when the predicted tails are not below 1e-8 at +-L
};

/// Bistable front (c_uv, U, V) connecting (1,0) at -infinity to (0,1) at
/// +infinity, phase-fixed by U(phase_anchor) = 1/2. Requires a, b > 1.
WaveProfile solve_bistable_wave(const ModelParams& params, const WaveSolveOptions& opt = {});

/// Single-species front d w'' + c w' + r w (1 - w) = 0 from 1 to 0 at the
/// prescribed speed c >= 2 sqrt(r d), phase-fixed by w(phase_anchor) = 1/2.
WaveProfile solve_kpp_profile(double d, double r, double c, const WaveSolveOptions& opt = {});

/// Front of the shifted system
///   c U' + d U'' + r U (1 - eps - U - a V) = 0,  c V' + V'' + V (1 + eps - V - b U) = 0
/// with limits (1-eps, 0) and (0, 1+eps).
WaveProfile solve_perturbed_wave(const ModelParams& params, double eps, const WaveSolveOptions& opt = {});

/// Bistability of the shifted system: a(1+eps) > 1-eps and b(1-eps) > 1+eps.
bool perturbed_is_bistable(const ModelParams& params, double eps) noexcept;

/// Characteristic roots of the shifted system at its own limits; reduces
/// to char_roots for eps = 0.
CharacteristicRoots perturbed_roots(const ModelParams& params, double eps, double c);

// --- tail decay -----------------------------------------------------------

enum class Side { PlusInfinity, MinusInfinity };

enum class TailQuantity {
  U_Plus,          // U at +infinity, rate lambda1
  VDeficit_Plus,   // right_V - V at +infinity, rate Lambda_plus, prefactor gamma_plus
  V_Minus,         // V at -infinity, rate lambda4
  UDeficit_Minus,  // left_U - U at -infinity, rate Lambda_minus, prefactor gamma_minus
};

std::string to_string(TailQuantity q);

struct DecayFit {
  bool valid = false;
  std::string reason;  // set when !valid
  Side side = Side::PlusInfinity;
  TailQuantity quantity = TailQuantity::U_Plus;
  double measured_rate = 0.0;
  double predicted_rate = 0.0;
  double amplitude = 0.0;  // q(xi) ~ amplitude |xi|^gamma exp(rate xi)
  int gamma = 0;
  double window_lo = 0.0, window_hi = 0.0;
  std::size_t samples = 0;

  double relative_deviation() const noexcept;
};

/// Least-squares slope of log(q / |xi|^gamma) over the usable tail window:
/// samples with q in [floor, 1e-3], outside the outer 10% of the domain.
DecayFit fit_tail_decay(const WaveProfile& profile, const CharacteristicRoots& roots, TailQuantity quantity);

/// Default component for a side: U at +infinity, V at -infinity.
DecayFit fit_tail_decay(const WaveProfile& profile, const CharacteristicRoots& roots, Side side);

// --- evaluation ------------------------------------------------------------

struct WaveSample {
  double U, V;    // values
  double Up, Vp;  // derivatives in xi
  double DU;      // left_U - U, accurate in the left tail
  double DV;      // right_V - V, accurate in the right tail
};

/// Evaluates a profile at arbitrary xi: cubic Hermite interpolation of the
/// samples, continued beyond the accurate range by the fitted exponential
/// tails so that small values and small deficits keep relative accuracy.
class WaveEvaluator {
 public:
  explicit WaveEvaluator(const WaveProfile& profile);

  WaveSample operator()(double xi) const;
  const WaveProfile& profile() const noexcept { return *profile_; }

  /// Tail models in use (index by TailQuantity); invalid ones fall back to
  /// the predicted rate anchored at the last accurate sample.
  const DecayFit& tail(TailQuantity q) const { return tails_[static_cast<int>(q)].fit; }

 private:
  struct Tail {
    DecayFit fit;
    bool present = false;
    double anchor_xi = 0.0;  // switch point between samples and the model
    double anchor_q = 0.0;
    double rate = 0.0;
    int gamma = 0;
    double value(double xi) const;
    double slope(double xi) const;
  };

  void hermite(double xi, double& U, double& Up, double& V, double& Vp) const;

  const WaveProfile* profile_;
  Tail tails_[4];
};

/// Max-norm residual of the continuous traveling-wave equations evaluated
/// on the profile's interior samples with second-order finite differences.
double wave_equation_residual(const WaveProfile& profile);

}  // namespace lvf
