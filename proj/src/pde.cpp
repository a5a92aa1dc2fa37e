#include "lvfront/pde.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "lvfront/error.hpp"
#include "lvfront/kernels.hpp"

namespace lvf {

Grid Grid::with_spacing(double x_min, double x_max, double dx, Closure left, Closure right) {
  if (!(dx > 0.0) || !(x_max > x_min)) fail(ErrorKind::InvalidParameter, "grid: need x_max > x_min and dx > 0");
  Grid g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n = static_cast<std::size_t>(std::llround((x_max - x_min) / dx)) + 1;
  g.left = left;
  g.right = right;
  g.validate();
  return g;
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = x(i);
  return xs;
}

void Grid::validate() const {
  if (n < 16) fail(ErrorKind::InvalidParameter, "grid: n >= 16 required");
  if (!(x_max > x_min)) fail(ErrorKind::InvalidParameter, "grid: x_max must exceed x_min");
}

bool Grid::same_as(const Grid& o) const noexcept {
  return n == o.n && x_min == o.x_min && x_max == o.x_max && left == o.left && right == o.right;
}

namespace {

// 0 at s <= 0, 1 at s >= w, cosine in between.
double ramp(double s, double w) {
  if (s <= 0.0) return 0.0;
  if (w <= 0.0 || s >= w) return 1.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * s / w));
}

// Plateau on [lo, hi], ramped inside the support, exactly zero outside.
double plateau(double x, double lo, double hi, double taper) {
  if (x < lo || x > hi) return 0.0;
  return std::min(ramp(x - lo, taper), ramp(hi - x, taper));
}

void require_inside(const Grid& g, double x, const char* what) {
  const double margin = 10.0 * g.dx();
  if (x < g.x_min + margin || x > g.x_max - margin) {
    std::ostringstream os;
    os << "margin rule: " << what << " = " << x << " must lie at least 10*dx inside [" << g.x_min << ", "
       << g.x_max << "]";
    fail(ErrorKind::Precondition, os.str());
  }
}

}  // namespace

FieldState make_initial(const Grid& grid, const InitialCondition& ic) {
  grid.validate();
  FieldState s;
  s.u.assign(grid.n, 0.0);
  s.v.assign(grid.n, 0.0);

  switch (ic.scenario) {
    case Scenario::A1:
    case Scenario::A2: {
      if (!(ic.u_hi > ic.u_lo)) fail(ErrorKind::InvalidParameter, "u support must be a non-empty interval");
      if (!(ic.u_amplitude > 0.0)) fail(ErrorKind::InvalidParameter, "u amplitude must be > 0");
      require_inside(grid, ic.u_lo, "u support start");
      require_inside(grid, ic.u_hi, "u support end");
      if (!(ic.v_hi > ic.v_lo)) fail(ErrorKind::InvalidParameter, "v interval must be non-empty");
      require_inside(grid, ic.v_lo, "v interval start");
      require_inside(grid, ic.v_hi, "v interval end");
      if (ic.v_mirror) {
        require_inside(grid, -ic.v_hi, "mirrored v interval start");
        require_inside(grid, -ic.v_lo, "mirrored v interval end");
      }
      if (ic.scenario == Scenario::A1) {
        if (!(ic.v_background > 0.0) || !(ic.v_pocket > 0.0)) {
          fail(ErrorKind::InvalidParameter, "A1: v0 needs a positive lower bound");
        }
      } else if (!(ic.v_amplitude > 0.0)) {
        fail(ErrorKind::InvalidParameter, "A2: v amplitude must be > 0");
      }
      for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        s.u[i] = ic.u_amplitude * plateau(x, ic.u_lo, ic.u_hi, ic.taper);
        if (ic.scenario == Scenario::A1) {
          double inside = plateau(x, ic.v_lo, ic.v_hi, ic.taper);
          if (ic.v_mirror) inside = std::max(inside, plateau(x, -ic.v_hi, -ic.v_lo, ic.taper));
          s.v[i] = ic.v_background + (ic.v_pocket - ic.v_background) * inside;
        } else {
          double val = plateau(x, ic.v_lo, ic.v_hi, ic.taper);
          if (ic.v_mirror) val = std::max(val, plateau(x, -ic.v_hi, -ic.v_lo, ic.taper));
          s.v[i] = ic.v_amplitude * val;
        }
      }
      break;
    }
    case Scenario::SimpleIC: {
      require_inside(grid, ic.x_u, "x_u");
      require_inside(grid, ic.x_v, "x_v");
      for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        s.u[i] = x < ic.x_u ? 1.0 : 0.0;
        s.v[i] = x > ic.x_v ? 1.0 : 0.0;
      }
      break;
    }
    case Scenario::Custom: {
      if (!ic.u_fn || !ic.v_fn) fail(ErrorKind::InvalidParameter, "custom initial condition needs u and v");
      for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        s.u[i] = std::max(0.0, ic.u_fn(x));
        s.v[i] = std::max(0.0, ic.v_fn(x));
      }
      break;
    }
  }
  return s;
}

double reaction_lipschitz(const ModelParams& p, double u_max, double v_max) {
  return std::max(p.r * (1.0 + 2.0 * u_max + p.a * v_max), 1.0 + 2.0 * v_max + p.b * u_max);
}

double max_stable_dt(const ModelParams& p, double dx, double u_max, double v_max) {
  const double diff = 2.0 * std::max(p.d, 1.0) / (dx * dx);
  return 1.0 / (diff + reaction_lipschitz(p, u_max, v_max));
}

double discrete_kpp_speed(double d, double r, double dx, double dt) {
  if (!(d > 0.0) || !(r > 0.0) || !(dx > 0.0) || !(dt > 0.0)) {
    fail(ErrorKind::InvalidParameter, "discrete speed: d, r, dx, dt must be > 0");
  }
  const auto speed = [&](double lam) {
    const double growth = d * (2.0 * std::cosh(lam * dx) - 2.0) / (dx * dx) + r;
    return std::log1p(dt * growth) / (dt * lam);
  };
  const double lam0 = std::sqrt(r / d);
  const auto best = boost::math::tools::brent_find_minima(speed, 0.05 * lam0, 20.0 * lam0, 52);
  return best.second;
}

double kpp_matched_dt(double d, double r, double dx) {
  const double target = 2.0 * std::sqrt(r * d);
  // Monotone bound of the scalar equation on [0, 1].
  const double hi = 1.0 / (2.0 * d / (dx * dx) + r);
  const double lo = 1e-6 * hi;
  const auto f = [&](double dt) { return discrete_kpp_speed(d, r, dx, dt) - target; };
  if (!(f(lo) > 0.0 && f(hi) < 0.0)) {
    fail(ErrorKind::Numerical, "kpp_matched_dt: discrete speed does not cross 2 sqrt(r d) below the monotone bound");
  }
  std::uintmax_t iters = 200;
  const auto br = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(40), iters);
  return 0.5 * (br.first + br.second);
}

namespace {

struct Stepper {
  const Grid& grid;
  kernels::StepCoeffs k;
  const kernels::KernelTable& table = kernels::active();

  Stepper(const Grid& g, const ModelParams& p, double dt) : grid(g) {
    const double inv_dx2 = 1.0 / (g.dx() * g.dx());
    k = {p.d * dt * inv_dx2, dt * inv_dx2, p.r * dt, dt, p.a, p.b};
  }

  void advance(const FieldState& in, FieldState& out) const {
    const std::size_t n = grid.n;
    const double* u = in.u.data();
    const double* v = in.v.data();
    double* un = out.u.data();
    double* vn = out.v.data();
    table.step_interior(u, v, un, vn, n, k);
    if (grid.left == Closure::ZeroFlux) {
      kernels::step_node(u[1], u[0], u[1], v[1], v[0], v[1], k, un[0], vn[0]);
    } else {
      un[0] = u[0];
      vn[0] = v[0];
    }
    if (grid.right == Closure::ZeroFlux) {
      kernels::step_node(u[n - 2], u[n - 1], u[n - 2], v[n - 2], v[n - 1], v[n - 2], k, un[n - 1], vn[n - 1]);
    } else {
      un[n - 1] = u[n - 1];
      vn[n - 1] = v[n - 1];
    }
  }
};

double sup(const std::vector<double>& x) { return x.empty() ? 0.0 : *std::max_element(x.begin(), x.end()); }

void check_state(const Grid& grid, const FieldState& s) {
  if (s.u.size() != grid.n || s.v.size() != grid.n) {
    fail(ErrorKind::Precondition, "field state size does not match the grid");
  }
}

void check_dt(const Grid& grid, const ModelParams& p, double dt, double u_max, double v_max) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidParameter, "dt must be > 0");
  const double limit = max_stable_dt(p, grid.dx(), u_max, v_max);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "stability bound: dt = " << dt << " exceeds the monotone limit " << limit
       << " (2 dt max(d,1)/dx^2 + dt L_reac <= 1)";
    fail(ErrorKind::Precondition, os.str());
  }
}

}  // namespace

FieldState step(const FieldState& state, const Grid& grid, const ModelParams& params, double dt) {
  params.validate();
  grid.validate();
  check_state(grid, state);
  check_dt(grid, params, dt, std::max(1.0, sup(state.u)), std::max(1.0, sup(state.v)));
  FieldState out;
  out.u.resize(grid.n);
  out.v.resize(grid.n);
  Stepper(grid, params, dt).advance(state, out);
  out.t = state.t + dt;
  return out;
}

std::vector<double> output_schedule(double t0, double t_end, double dt_out) {
  if (!(dt_out > 0.0)) fail(ErrorKind::InvalidParameter, "output interval must be > 0");
  std::vector<double> ts;
  const auto count = static_cast<long long>(std::floor((t_end - t0) / dt_out + 1e-9));
  for (long long i = 0; i <= count; ++i) ts.push_back(t0 + static_cast<double>(i) * dt_out);
  return ts;
}

std::optional<std::string> boundary_proximity(const Grid& grid, const FieldState& s) {
  const auto band = static_cast<std::size_t>(20);
  if (grid.n <= 2 * band + 2) return std::nullopt;
  auto crosses = [](const std::vector<double>& f, std::size_t lo, std::size_t hi, double m) {
    for (std::size_t i = lo; i < hi; ++i) {
      if ((f[i] - m) * (f[i + 1] - m) <= 0.0 && f[i] != f[i + 1]) return true;
    }
    return false;
  };
  for (double m : {0.1, 0.5, 0.9}) {
    for (char species : {'u', 'v'}) {
      const auto& f = species == 'u' ? s.u : s.v;
      const bool left = crosses(f, 0, band, m);
      const bool right = crosses(f, grid.n - 1 - band, grid.n - 1, m);
      if (left || right) {
        std::ostringstream os;
        os << "front near boundary: " << species << " level " << m << " within 20*dx of the "
           << (left ? "left" : "right") << " end at t=" << s.t;
        return os.str();
      }
    }
  }
  return std::nullopt;
}

std::vector<std::string> simulate_streaming(const SimulationSetup& setup, FieldState initial,
                                            const SnapshotObserver& observer) {
  const Grid& grid = setup.grid;
  setup.params.validate();
  grid.validate();
  check_state(grid, initial);
  if (!(setup.t_end >= 0.0)) fail(ErrorKind::InvalidParameter, "t_end must be >= 0");
  check_dt(grid, setup.params, setup.dt, std::max(1.0, sup(initial.u)), std::max(1.0, sup(initial.v)));

  std::vector<double> outs = setup.output_times;
  if (outs.empty()) outs.push_back(setup.t_end);
  std::sort(outs.begin(), outs.end());
  for (double t : outs) {
    if (t < -1e-12 || t > setup.t_end + 1e-9) fail(ErrorKind::Precondition, "output time outside [0, t_end]");
  }

  // Output time t is served by the first step count k with k dt >= t.
  const double dt = setup.dt;
  auto step_of = [dt](double t) {
    return static_cast<long long>(std::ceil(t / dt - 1e-9));
  };
  const long long total = step_of(setup.t_end);

  std::vector<std::string> warnings;
  bool warned = false;
  auto emit = [&](const FieldState& s) {
    if (!warned) {
      if (auto w = boundary_proximity(grid, s)) {
        warnings.push_back(*w);
        warned = true;
      }
    }
    if (observer) observer(s);
  };

  const double t0 = initial.t;
  FieldState cur = std::move(initial);
  FieldState next;
  next.u.resize(grid.n);
  next.v.resize(grid.n);
  Stepper stepper(grid, setup.params, dt);

  std::size_t oi = 0;
  long long last_emitted = -1;
  for (long long k = 0;; ++k) {
    while (oi < outs.size() && step_of(outs[oi]) <= k) {
      if (last_emitted != k) {
        emit(cur);
        last_emitted = k;
      }
      ++oi;
    }
    if (k >= total) break;
    stepper.advance(cur, next);
    next.t = t0 + static_cast<double>(k + 1) * dt;
    std::swap(cur, next);
  }
  return warnings;
}

Trajectory simulate(const SimulationSetup& setup, const FieldState& initial) {
  Trajectory traj;
  traj.params = setup.params;
  traj.grid = setup.grid;
  traj.dt = setup.dt;
  traj.warnings =
      simulate_streaming(setup, initial, [&traj](const FieldState& s) { traj.snapshots.push_back(s); });
  return traj;
}

Trajectory simulate(const SimulationSetup& setup, const InitialCondition& ic) {
  return simulate(setup, make_initial(setup.grid, ic));
}

ComparisonReport comparison_check(const Trajectory& upper, const Trajectory& lower) {
  if (!upper.grid.same_as(lower.grid)) fail(ErrorKind::Precondition, "comparison: grids differ");
  if (upper.snapshots.size() != lower.snapshots.size()) {
    fail(ErrorKind::Precondition, "comparison: snapshot counts differ");
  }
  const auto& p = upper.params;
  const auto& q = lower.params;
  if (p.d != q.d || p.r != q.r || p.a != q.a || p.b != q.b || upper.dt != lower.dt) {
    fail(ErrorKind::Precondition, "comparison: model parameters or time steps differ");
  }

  ComparisonReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < upper.snapshots.size(); ++s) {
    const FieldState& hi = upper.snapshots[s];
    const FieldState& lo = lower.snapshots[s];
    if (std::abs(hi.t - lo.t) > 1e-9) fail(ErrorKind::Precondition, "comparison: snapshot times differ");
    const double du = kernels::max_excess(lo.u, hi.u);
    const double dv = kernels::max_excess(hi.v, lo.v);
    const double worst = std::max(du, dv);
    if (worst > rep.max_violation) {
      const char species = du >= dv ? 'u' : 'v';
      const auto& a = species == 'u' ? lo.u : hi.v;
      const auto& b = species == 'u' ? hi.u : lo.v;
      std::size_t node = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] - b[i] == worst) {
          node = i;
          break;
        }
      }
      rep.max_violation = worst;
      rep.snapshot = s;
      rep.node = node;
      rep.t = hi.t;
      rep.x = upper.grid.x(node);
      rep.species = species;
    }
  }
  if (upper.snapshots.empty()) rep.max_violation = 0.0;
  return rep;
}

}  // namespace lvf
