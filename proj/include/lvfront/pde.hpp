#pragma once

// Monotone explicit finite-difference solver for the competition system on a
// truncated line. With the time step inside the stability bound, one step is
// an order-preserving map for the competitive order (u larger, v smaller),
// which is the discrete form of the comparison principle.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lvfront/model.hpp"

namespace lvf {

enum class Closure {
  ZeroFlux,  // mirrored ghost node
  Pinned,    // boundary node held at its initial value
};

struct Grid {
  double x_min = -50.0;
  double x_max = 50.0;
  std::size_t n = 1001;
  Closure left = Closure::ZeroFlux;
  Closure right = Closure::ZeroFlux;

  static Grid with_spacing(double x_min, double x_max, double dx, Closure left = Closure::ZeroFlux,
                           Closure right = Closure::ZeroFlux);

  double dx() const noexcept { return (x_max - x_min) / static_cast<double>(n - 1); }
  double x(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * dx(); }
  std::vector<double> nodes() const;
  /// n >= 16 and x_max > x_min.
  void validate() const;
  bool same_as(const Grid& other) const noexcept;
};

struct FieldState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

enum class Scenario {
  A1,        // compact invader u, native v with positive lower bound
  A2,        // both species compactly supported
  SimpleIC,  // u = 1 left of x_u, v = 1 right of x_v
  Custom,
};

/// Initial-data description. u0 for A1/A2 is a plateau of height
/// `u_amplitude` on [u_lo, u_hi] with cosine ramps of width `taper` inside
/// the support; outside the support it is exactly zero.
struct InitialCondition {
  Scenario scenario = Scenario::A2;

  double u_lo = -5.0;
  double u_hi = 5.0;
  double u_amplitude = 1.0;
  double taper = 0.0;

  // A1: v0 equals v_background outside the pocket [v_lo, v_hi] and
  // v_pocket inside it (ramped over `taper`). A2: v0 is a plateau of height
  // v_amplitude on [v_lo, v_hi], optionally mirrored onto [-v_hi, -v_lo].
  double v_lo = 10.0;
  double v_hi = 20.0;
  double v_amplitude = 1.0;
  double v_background = 1.0;
  double v_pocket = 1.0;
  bool v_mirror = false;

  // SimpleIC crossover points.
  double x_u = 0.0;
  double x_v = 0.0;

  // Custom profiles (samples are clamped at zero).
  std::function<double(double)> u_fn;
  std::function<double(double)> v_fn;
};

/// Samples the scenario on the grid. Throws Error(Precondition) when a
/// support or crossover point lies within 10 dx of the grid ends.
FieldState make_initial(const Grid& grid, const InitialCondition& ic);

/// Lipschitz bound of the reaction terms over [0, u_max] x [0, v_max].
double reaction_lipschitz(const ModelParams& params, double u_max, double v_max);

/// Largest dt for which the update is monotone:
///   2 dt max(d, 1) / dx^2 + dt * reaction_lipschitz <= 1.
double max_stable_dt(const ModelParams& params, double dx, double u_max, double v_max);

/// Minimal front speed of the scheme linearized at w = 0 for the scalar
/// equation w_t = d w_xx + r w (1 - w): the minimum over lambda > 0 of
///   ln(1 + dt (d (2 cosh(lambda dx) - 2) / dx^2 + r)) / (dt lambda).
/// Tends to 2 sqrt(r d) as dx, dt -> 0.
double discrete_kpp_speed(double d, double r, double dx, double dt);

/// Time step at which discrete_kpp_speed equals 2 sqrt(r d) for this dx
/// (spatial and temporal speed errors cancel). Throws Error(Numerical) when
/// no such step lies below the monotone bound.
double kpp_matched_dt(double d, double r, double dx);

/// One forward-Euler step. Throws Error(Precondition) if dt exceeds the
/// monotone bound for the box spanned by max(1, sup u) and max(1, sup v).
FieldState step(const FieldState& state, const Grid& grid, const ModelParams& params, double dt);

struct Trajectory {
  ModelParams params;
  Grid grid;
  double dt = 0.0;
  std::vector<FieldState> snapshots;
  std::vector<std::string> warnings;
};

inline constexpr const char* kSchemeVersion = "euler-central-monotone/1";

/// Streaming form of simulate: `observer` sees every output snapshot in
/// time order and may keep what it needs. Returns the warnings raised.
using SnapshotObserver = std::function<void(const FieldState&)>;

struct SimulationSetup {
  ModelParams params;
  Grid grid;
  double dt = 0.004;
  double t_end = 10.0;
  std::vector<double> output_times;  // subset of [0, t_end]; empty = final only
};

std::vector<std::string> simulate_streaming(const SimulationSetup& setup, FieldState initial,
                                            const SnapshotObserver& observer);

Trajectory simulate(const SimulationSetup& setup, const FieldState& initial);
Trajectory simulate(const SimulationSetup& setup, const InitialCondition& ic);

/// Evenly spaced output times t0, t0+dt_out, ..., up to t_end inclusive.
std::vector<double> output_schedule(double t0, double t_end, double dt_out);

/// Non-empty when a u or v level set at m in {0.1, 0.5, 0.9} lies within
/// 20 dx of either end of the grid.
std::optional<std::string> boundary_proximity(const Grid& grid, const FieldState& state);

struct ComparisonReport {
  double max_violation = 0.0;  // max over snapshots of max(u_lo - u_up, v_up - v_lo)
  std::size_t snapshot = 0;
  std::size_t node = 0;
  double t = 0.0;
  double x = 0.0;
  char species = 'u';
  bool within(double tol) const noexcept { return max_violation <= tol; }
};

/// Largest violation of the competitive order u_upper >= u_lower,
/// v_upper <= v_lower across matching snapshots.
ComparisonReport comparison_check(const Trajectory& upper, const Trajectory& lower);

}  // namespace lvf
