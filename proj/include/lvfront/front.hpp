#pragma once

// Front positions, spreading speeds, the logarithmic delay fit, shifts
// against traveling fronts, segregation and terrace diagnostics.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lvfront/model.hpp"
#include "lvfront/pde.hpp"
#include "lvfront/wave.hpp"

namespace lvf {

enum class Species { U, V };
enum class Extreme { Min, Max };

std::string to_string(Species s);

/// Crossings of the level m by the species on x > 0, located by linear
/// interpolation between nodes, sorted ascending.
std::vector<double> level_set(const Grid& grid, const FieldState& state, Species species, double m);

struct FrontTrace {
  double level = 0.5;
  Species species = Species::U;
  std::vector<double> times;
  std::vector<std::optional<double>> positions_min;  // empty level set -> nullopt
  std::vector<std::optional<double>> positions_max;
  bool boundary_flag = false;
  std::vector<std::string> warnings;

  const std::vector<std::optional<double>>& positions(Extreme e) const {
    return e == Extreme::Min ? positions_min : positions_max;
  }
};

/// Streaming front tracker: feed it snapshots in time order.
class FrontTracker {
 public:
  FrontTracker(const Grid& grid, Species species, double m);
  void observe(const FieldState& state);
  const FrontTrace& trace() const noexcept { return trace_; }
  FrontTrace take() { return std::move(trace_); }

 private:
  Grid grid_;
  FrontTrace trace_;
};

FrontTrace track_front(const Trajectory& traj, Species species, double m);

struct SpeedEstimate {
  double speed = 0.0;
  double half_width = 0.0;  // two standard errors of the slope
  double intercept = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of position against time over [t_lo, t_hi].
/// Needs at least 10 samples and no empty level sets in the window.
SpeedEstimate estimate_speed(const FrontTrace& trace, double t_lo, double t_hi, Extreme extreme = Extreme::Max);

struct BramsonFit {
  double c = 0.0;
  double kappa = 0.0;   // coefficient of ln(t + t0) in c t - position
  double offset = 0.0;  // c t - position = kappa ln(t + t0) + offset + omega(t)
  double t0 = 0.0;
  double rms = 0.0;
  std::vector<double> times;
  std::vector<double> omega;
  double sup_omega = 0.0;
};

/// Regression of c t - position(t) on ln(t + t0) over [t_lo, t_hi]; t0 is the
/// grid value with the smallest residual. Needs t_lo >= 20.
BramsonFit fit_bramson(const FrontTrace& trace, double c, double t_lo, double t_hi,
                       const std::vector<double>& t0_grid = {0.0}, Extreme extreme = Extreme::Max);

struct ShiftEstimate {
  double h = 0.0;          // fitted shift
  double distance = 0.0;   // sup-distance at h
  bool unimodal = true;    // false when the bracket holds several local minima
  std::vector<double> local_minima;
  double window_lo = 0.0, window_hi = 0.0;
};

struct ShiftOptions {
  double half_width = 20.0;  // comparison window around the expected center
  double bracket = 10.0;     // search h within +-bracket of the expected shift
  std::size_t coarse = 201;  // samples used to validate the bracket
  double tol = 1e-7;
};

/// Fits h minimizing sup_x |u - U(x - c t - h)| + |v - V(x - c t - h)| over a
/// window around `expected_center`, with c the wave's speed and t the
/// state's time. For single-species fronts only u is compared.
ShiftEstimate estimate_shift(const Grid& grid, const FieldState& state, const WaveEvaluator& wave,
                             double expected_center, const ShiftOptions& opt = {});

/// Largest gap between any two values.
double max_pairwise_gap(const std::vector<double>& values);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;  // non-positive values left out
};

/// Least-squares line through (t, ln y) for the positive y.
LogLinearFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y);

/// sup over x in [x_lo, x_hi] of the species.
double sup_over(const Grid& grid, const FieldState& state, Species species, double x_lo, double x_hi);

struct SegregationSeries {
  double c = 0.0;
  std::vector<double> times;
  std::vector<double> values;  // max |u - 1| + max v over |x| <= c t
  bool truncated = false;      // cone reached the grid margin
  LogLinearFit fit;            // over the last half of the run
};

double segregation_value(const Grid& grid, const FieldState& state, double c, bool* truncated = nullptr);

/// Requires c < cuv when cuv is given.
SegregationSeries segregation_metric(const Trajectory& traj, double c, std::optional<double> cuv = std::nullopt);

/// Fits the last half of an already collected series.
void fit_last_half(SegregationSeries& s);

struct TerraceOptions {
  double level = 0.5;
  double window_lo = -1.0;  // speed window; negative means the second half of the run
  double window_hi = -1.0;
};

struct TerraceReport {
  bool terrace = false;
  double u_speed = 0.0, v_speed = 0.0;
  double u_half_width = 0.0, v_half_width = 0.0;
  double c0 = 0.0;
  double sup_u_beyond = 0.0;            // sup of u on [c0 t, x_max] at the final time
  std::vector<double> sup_u_beyond_series;
  bool sup_u_beyond_decreasing = false;
  std::optional<ShiftEstimate> behind;  // u, v against the bistable front behind c0 t
  std::vector<std::string> diagnostics;
};

/// Two stacked fronts: u at c_uv behind, v at c_v ahead. Requires c_u < c_v
/// and a resolved c_uv. `wave` (optional) enables the zone check behind c0 t.
TerraceReport detect_terrace(const Trajectory& traj, const SpeedSet& speeds, const WaveProfile* wave = nullptr,
                             const TerraceOptions& opt = {});

}  // namespace lvf
