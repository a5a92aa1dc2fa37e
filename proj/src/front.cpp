#include "lvfront/front.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvfront/error.hpp"

namespace lvf {

namespace {

const std::vector<double>& field(const FieldState& s, Species sp) { return sp == Species::U ? s.u : s.v; }

void check_level(double m) {
  if (!(m > 0.0 && m < 1.0)) {
    std::ostringstream os;
    os << "level m = " << m << " must lie in (0, 1)";
    fail(ErrorKind::InvalidParameter, os.str());
  }
}

void check_state(const Grid& grid, const FieldState& s) {
  if (s.u.size() != grid.n || s.v.size() != grid.n) {
    fail(ErrorKind::Precondition, "state size does not match the grid");
  }
}

struct Line {
  double slope = 0.0, intercept = 0.0, ssr = 0.0, sxx = 0.0, sst = 0.0;
  std::size_t n = 0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  Line l;
  l.n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < l.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(l.n);
  my /= static_cast<double>(l.n);
  double sxy = 0.0;
  for (std::size_t i = 0; i < l.n; ++i) {
    l.sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    l.sst += (y[i] - my) * (y[i] - my);
  }
  l.slope = l.sxx > 0.0 ? sxy / l.sxx : 0.0;
  l.intercept = my - l.slope * mx;
  for (std::size_t i = 0; i < l.n; ++i) {
    const double r = y[i] - (l.intercept + l.slope * x[i]);
    l.ssr += r * r;
  }
  return l;
}

// Samples of one extreme over [t_lo, t_hi]; throws on an empty level set.
void window_samples(const FrontTrace& trace, double t_lo, double t_hi, Extreme e, std::vector<double>& t,
                    std::vector<double>& x) {
  if (!(t_hi > t_lo)) fail(ErrorKind::InvalidParameter, "window: t_hi must exceed t_lo");
  const auto& pos = trace.positions(e);
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double ti = trace.times[i];
    if (ti < t_lo - 1e-9 || ti > t_hi + 1e-9) continue;
    if (!pos[i]) {
      std::ostringstream os;
      os << "window [" << t_lo << ", " << t_hi << "] rejected: empty level set at t = " << ti;
      fail(ErrorKind::Precondition, os.str());
    }
    t.push_back(ti);
    x.push_back(*pos[i]);
  }
}

}  // namespace

std::string to_string(Species s) { return s == Species::U ? "u" : "v"; }

std::vector<double> level_set(const Grid& grid, const FieldState& state, Species species, double m) {
  check_level(m);
  check_state(grid, state);
  const auto& f = field(state, species);
  std::vector<double> out;
  const double h = grid.dx();
  for (std::size_t i = 0; i + 1 < grid.n; ++i) {
    if (grid.x(i + 1) <= 0.0) continue;
    const double a = f[i] - m, b = f[i + 1] - m;
    if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
      const double x = grid.x(i) + (m - f[i]) / (f[i + 1] - f[i]) * h;
      if (x > 0.0) out.push_back(x);
    }
  }
  return out;
}

FrontTracker::FrontTracker(const Grid& grid, Species species, double m) : grid_(grid) {
  check_level(m);
  grid.validate();
  trace_.level = m;
  trace_.species = species;
}

void FrontTracker::observe(const FieldState& state) {
  if (!trace_.times.empty() && state.t < trace_.times.back()) {
    fail(ErrorKind::Precondition, "front tracker: snapshots must arrive in time order");
  }
  const auto set = level_set(grid_, state, trace_.species, trace_.level);
  trace_.times.push_back(state.t);
  if (set.empty()) {
    trace_.positions_min.emplace_back();
    trace_.positions_max.emplace_back();
  } else {
    trace_.positions_min.emplace_back(set.front());
    trace_.positions_max.emplace_back(set.back());
  }
  if (!trace_.boundary_flag) {
    if (auto w = boundary_proximity(grid_, state)) {
      trace_.boundary_flag = true;
      trace_.warnings.push_back(*w);
    }
  }
}

FrontTrace track_front(const Trajectory& traj, Species species, double m) {
  FrontTracker tr(traj.grid, species, m);
  for (const auto& s : traj.snapshots) tr.observe(s);
  FrontTrace out = tr.take();
  for (const auto& w : traj.warnings) {
    if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) {
      out.warnings.push_back(w);
      out.boundary_flag = true;
    }
  }
  return out;
}

SpeedEstimate estimate_speed(const FrontTrace& trace, double t_lo, double t_hi, Extreme extreme) {
  std::vector<double> t, x;
  window_samples(trace, t_lo, t_hi, extreme, t, x);
  if (t.size() < 10) {
    std::ostringstream os;
    os << "speed window [" << t_lo << ", " << t_hi << "] rejected: " << t.size() << " samples, need 10";
    fail(ErrorKind::Precondition, os.str());
  }
  const Line l = least_squares(t, x);
  SpeedEstimate e;
  e.speed = l.slope;
  e.intercept = l.intercept;
  e.samples = l.n;
  e.half_width = 2.0 * std::sqrt(l.ssr / static_cast<double>(l.n - 2) / l.sxx);
  return e;
}

BramsonFit fit_bramson(const FrontTrace& trace, double c, double t_lo, double t_hi,
                       const std::vector<double>& t0_grid, Extreme extreme) {
  if (t_lo < 20.0) fail(ErrorKind::Precondition, "bramson: window must start at t >= 20");
  if (t0_grid.empty()) fail(ErrorKind::InvalidParameter, "bramson: empty t0 grid");
  std::vector<double> t, x;
  window_samples(trace, t_lo, t_hi, extreme, t, x);
  if (t.size() < 10) fail(ErrorKind::Precondition, "bramson: fewer than 10 samples in the window");

  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = c * t[i] - x[i];

  BramsonFit best;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (double t0 : t0_grid) {
    if (!(t.front() + t0 > 0.0)) fail(ErrorKind::InvalidParameter, "bramson: t + t0 must stay positive");
    std::vector<double> lx(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) lx[i] = std::log(t[i] + t0);
    if (lx.back() - lx.front() < 0.2) {
      fail(ErrorKind::Precondition, "bramson: window too short, regression is ill-conditioned");
    }
    const Line l = least_squares(lx, y);
    if (l.ssr < best_ssr) {
      best_ssr = l.ssr;
      best.kappa = l.slope;
      best.offset = l.intercept;
      best.t0 = t0;
      best.omega.resize(t.size());
      best.sup_omega = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        best.omega[i] = y[i] - l.slope * lx[i] - l.intercept;
        best.sup_omega = std::max(best.sup_omega, std::abs(best.omega[i]));
      }
    }
  }
  best.c = c;
  best.times = t;
  best.rms = std::sqrt(best_ssr / static_cast<double>(t.size()));
  return best;
}

ShiftEstimate estimate_shift(const Grid& grid, const FieldState& state, const WaveEvaluator& wave,
                             double expected_center, const ShiftOptions& opt) {
  check_state(grid, state);
  if (!(opt.half_width > 0.0) || !(opt.bracket > 0.0) || opt.coarse < 5) {
    fail(ErrorKind::InvalidParameter, "shift: half_width, bracket must be > 0 and coarse >= 5");
  }
  const WaveProfile& prof = wave.profile();
  const bool kpp = prof.kind == WaveKind::KppU || prof.kind == WaveKind::KppV;
  const double margin = 20.0 * grid.dx();
  ShiftEstimate est;
  est.window_lo = std::max(expected_center - opt.half_width, grid.x_min + margin);
  est.window_hi = std::min(expected_center + opt.half_width, grid.x_max - margin);
  std::size_t i0 = grid.n, i1 = 0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    if (x >= est.window_lo && x <= est.window_hi) {
      i0 = std::min(i0, i);
      i1 = i;
    }
  }
  if (i0 > i1) fail(ErrorKind::Precondition, "shift: comparison window holds no grid nodes");

  const double ct = prof.speed * state.t;
  const auto distance = [&](double h) {
    double sup = 0.0;
    for (std::size_t i = i0; i <= i1; ++i) {
      const WaveSample w = wave(grid.x(i) - ct - h);
      double d = std::abs(state.u[i] - w.U);
      if (!kpp) d += std::abs(state.v[i] - w.V);
      sup = std::max(sup, d);
    }
    return sup;
  };

  const double h_exp = expected_center - ct - prof.phase_anchor;
  const double lo = h_exp - opt.bracket, hi = h_exp + opt.bracket;
  const std::size_t n = opt.coarse;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = distance(lo + step * static_cast<double>(k));

  std::vector<std::size_t> minima;
  for (std::size_t k = 0; k < n; ++k) {
    const bool left_ok = k == 0 || f[k] < f[k - 1];
    const bool right_ok = k + 1 == n || f[k] <= f[k + 1];
    if (left_ok && right_ok) minima.push_back(k);
  }
  std::size_t kbest = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (f[k] < f[kbest]) kbest = k;
  }
  const double a = lo + step * static_cast<double>(kbest == 0 ? 0 : kbest - 1);
  const double b = lo + step * static_cast<double>(std::min(kbest + 1, n - 1));
  const auto r = boost::math::tools::brent_find_minima(distance, a, b, std::numeric_limits<double>::digits / 2);
  est.h = r.first;
  est.distance = r.second;
  if (f[kbest] < est.distance) {
    est.h = lo + step * static_cast<double>(kbest);
    est.distance = f[kbest];
  }
  for (std::size_t k : minima) est.local_minima.push_back(lo + step * static_cast<double>(k));
  est.unimodal = minima.size() == 1 && kbest != 0 && kbest + 1 != n;
  return est;
}

double max_pairwise_gap(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  return *mx - *mn;
}

LogLinearFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) fail(ErrorKind::InvalidParameter, "log-linear fit: size mismatch");
  LogLinearFit fit;
  std::vector<double> tt, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] > 0.0 && std::isfinite(y[i])) {
      tt.push_back(t[i]);
      ly.push_back(std::log(y[i]));
    } else {
      ++fit.skipped;
    }
  }
  fit.samples = tt.size();
  if (tt.size() < 3) return fit;
  const Line l = least_squares(tt, ly);
  fit.slope = l.slope;
  fit.intercept = l.intercept;
  fit.r2 = l.sst > 0.0 ? 1.0 - l.ssr / l.sst : 0.0;
  return fit;
}

double sup_over(const Grid& grid, const FieldState& state, Species species, double x_lo, double x_hi) {
  check_state(grid, state);
  const auto& f = field(state, species);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    if (x >= x_lo && x <= x_hi) s = std::max(s, f[i]);
  }
  return s;
}

double segregation_value(const Grid& grid, const FieldState& state, double c, bool* truncated) {
  check_state(grid, state);
  const double margin = 20.0 * grid.dx();
  const double reach = c * state.t;
  const double lo = std::max(-reach, grid.x_min + margin);
  const double hi = std::min(reach, grid.x_max - margin);
  if (truncated) *truncated = -reach < grid.x_min + margin || reach > grid.x_max - margin;
  double du = 0.0, mv = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    if (x < lo || x > hi) continue;
    any = true;
    du = std::max(du, std::abs(state.u[i] - 1.0));
    mv = std::max(mv, state.v[i]);
  }
  if (!any) {
    // Cone narrower than one cell: use the node nearest the origin.
    const double fi = std::round((0.0 - grid.x_min) / grid.dx());
    const auto i = static_cast<std::size_t>(std::clamp(fi, 0.0, static_cast<double>(grid.n - 1)));
    du = std::abs(state.u[i] - 1.0);
    mv = state.v[i];
  }
  return du + mv;
}

void fit_last_half(SegregationSeries& s) {
  if (s.times.empty()) {
    s.fit = {};
    return;
  }
  const double mid = 0.5 * (s.times.front() + s.times.back());
  std::vector<double> t, y;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (s.times[i] >= mid) {
      t.push_back(s.times[i]);
      y.push_back(s.values[i]);
    }
  }
  s.fit = fit_log_linear(t, y);
}

SegregationSeries segregation_metric(const Trajectory& traj, double c, std::optional<double> cuv) {
  if (!(c > 0.0)) fail(ErrorKind::InvalidParameter, "segregation: cone speed c must be > 0");
  if (cuv && !(c < *cuv)) {
    std::ostringstream os;
    os << "segregation: cone speed " << c << " must be below c_uv = " << *cuv;
    fail(ErrorKind::Precondition, os.str());
  }
  SegregationSeries s;
  s.c = c;
  for (const auto& snap : traj.snapshots) {
    bool tr = false;
    s.times.push_back(snap.t);
    s.values.push_back(segregation_value(traj.grid, snap, c, &tr));
    s.truncated = s.truncated || tr;
  }
  fit_last_half(s);
  return s;
}

TerraceReport detect_terrace(const Trajectory& traj, const SpeedSet& speeds, const WaveProfile* wave,
                             const TerraceOptions& opt) {
  if (!(speeds.c_u < speeds.c_v)) {
    std::ostringstream os;
    os << "terrace: needs c_u < c_v, got c_u = " << speeds.c_u << ", c_v = " << speeds.c_v;
    fail(ErrorKind::Precondition, os.str());
  }
  if (!speeds.c_uv) fail(ErrorKind::Precondition, "terrace: c_uv is not resolved");
  if (traj.snapshots.empty()) fail(ErrorKind::Precondition, "terrace: empty trajectory");

  TerraceReport rep;
  rep.c0 = speeds.c_0 ? *speeds.c_0 : 0.5 * (*speeds.c_uv + speeds.c_v);
  const double t_first = traj.snapshots.front().t, t_last = traj.snapshots.back().t;
  const double w_lo = opt.window_lo >= 0.0 ? opt.window_lo : 0.5 * (t_first + t_last);
  const double w_hi = opt.window_hi >= 0.0 ? opt.window_hi : t_last;

  const FrontTrace tu = track_front(traj, Species::U, opt.level);
  const FrontTrace tv = track_front(traj, Species::V, opt.level);
  bool have_u = false, have_v = false;
  try {
    const SpeedEstimate e = estimate_speed(tu, w_lo, w_hi, Extreme::Max);
    rep.u_speed = e.speed;
    rep.u_half_width = e.half_width;
    have_u = true;
  } catch (const Error& e) {
    rep.diagnostics.push_back(std::string("u-front: ") + e.what());
  }
  try {
    const SpeedEstimate e = estimate_speed(tv, w_lo, w_hi, Extreme::Max);
    rep.v_speed = e.speed;
    rep.v_half_width = e.half_width;
    have_v = true;
  } catch (const Error& e) {
    rep.diagnostics.push_back(std::string("v-front: ") + e.what());
  }

  for (const auto& s : traj.snapshots) {
    rep.sup_u_beyond_series.push_back(sup_over(traj.grid, s, Species::U, rep.c0 * s.t, traj.grid.x_max));
  }
  rep.sup_u_beyond = rep.sup_u_beyond_series.back();
  {
    // Decreasing over the speed window: last value below the window's first.
    std::optional<double> first;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      if (traj.snapshots[i].t >= w_lo && !first) first = rep.sup_u_beyond_series[i];
    }
    rep.sup_u_beyond_decreasing = first && rep.sup_u_beyond < *first;
  }

  const FieldState& last = traj.snapshots.back();
  if (wave && have_u && tu.positions_max.back()) {
    WaveEvaluator ev(*wave);
    ShiftOptions so;
    const double center = *tu.positions_max.back();
    so.half_width = std::min(20.0, std::max(1.0, rep.c0 * last.t - center));
    try {
      rep.behind = estimate_shift(traj.grid, last, ev, center, so);
    } catch (const Error& e) {
      rep.diagnostics.push_back(std::string("behind zone: ") + e.what());
    }
  }

  if (!have_u || !have_v) {
    rep.diagnostics.push_back("one front only: no terrace");
  } else if (!(rep.u_speed + rep.u_half_width < rep.v_speed - rep.v_half_width)) {
    std::ostringstream os;
    os << "fronts merged: u-speed " << rep.u_speed << " vs v-speed " << rep.v_speed;
    rep.diagnostics.push_back(os.str());
  } else if (!(rep.sup_u_beyond < 1e-2)) {
    std::ostringstream os;
    os << "u not small beyond c0 t: " << rep.sup_u_beyond;
    rep.diagnostics.push_back(os.str());
  } else {
    rep.terrace = true;
  }
  for (const auto& w : tu.warnings) rep.diagnostics.push_back(w);
  return rep;
}

}  // namespace lvf
