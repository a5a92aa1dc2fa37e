// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance            all criteria
//   acceptance 4 7 9      a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lvfront/error.hpp"
#include "lvfront/front.hpp"
#include "lvfront/model.hpp"
#include "lvfront/pde.hpp"
#include "lvfront/supersub.hpp"
#include "lvfront/wave.hpp"

using namespace lvf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const ModelParams kBase{1.0, 1.0, 2.0, 3.0};

// Invasion setup shared by criteria 9 and 12: A1 data certified by a
// two-sided lower pair.
InitialCondition invasion_ic() {
  InitialCondition ic;
  ic.scenario = Scenario::A1;
  ic.u_lo = -15.0;
  ic.u_hi = 15.0;
  ic.u_amplitude = 1.0;
  ic.taper = 0.0;
  ic.v_lo = -15.0;
  ic.v_hi = 15.0;
  ic.v_background = 1.0;
  ic.v_pocket = 1e-4;
  return ic;
}

SuperSubParams invasion_pair() { return {Family::LowerTwoSided, 0.04, 0.5, 0.2, 0.0, 2.0, 0.0}; }

// Single-species u run from compact data; v stays identically zero. The
// left wall is reached by design, so only the right clearance is checked.
FieldState kpp_initial(const Grid& g) {
  InitialCondition ic;
  ic.scenario = Scenario::Custom;
  ic.u_fn = [](double x) { return std::abs(x) <= 5.0 ? 1.0 : 0.0; };
  ic.v_fn = [](double) { return 0.0; };
  return make_initial(g, ic);
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  WaveSolveOptions o;
  o.L = 60.0;
  o.n = 4801;
  const WaveProfile w = solve_bistable_wave({1, 1, 2, 2}, o);
  const double el = seconds_since(t0);
  return {std::abs(w.speed) < 1e-4 && el < 10.0, fmt("c_uv = %.3e, %.2f s", w.speed, el)};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  std::vector<double> c;
  for (double b : {2.0, 2.5, 3.0, 4.0}) c.push_back(solve_bistable_wave({1, 1, 2, b}).speed);
  const double el = seconds_since(t0);
  bool inc = true;
  for (std::size_t i = 1; i < c.size(); ++i) inc = inc && c[i] > c[i - 1];
  return {inc && std::abs(c[0]) < 1e-4 && el < 60.0,
          fmt("c_uv(b=2,2.5,3,4) = %.3e, %.5f, %.5f, %.5f; %.2f s", c[0], c[1], c[2], c[3], el)};
}

// Draws parameter sets aimed at each clause of the sign rules in turn.
ModelParams draw_signed_params(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto in = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  ModelParams p;
  switch (k % 3) {
    case 0:
      p.d = p.r = in(0.5, 2.0);
      p.a = in(1.2, 5.0);
      p.b = (k % 6 == 0) ? p.a : in(1.2, 5.0);
      break;
    case 1: {
      p.d = in(0.5, 2.0);
      const double s = in(1.1, 2.0);
      p.r = p.d * s;
      p.a = in(1.2, 3.0);
      p.b = s * s * p.a * in(1.0, 2.0);
      break;
    }
    default: {
      p.r = in(0.5, 2.0);
      const double s = in(1.1, 2.0);
      p.d = p.r * s;
      p.b = in(1.2, 3.0);
      p.a = s * s * p.b * in(1.0, 2.0);
      break;
    }
  }
  return p;
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240917);
  int checked = 0, matched = 0, zeros = 0;
  std::string first_bad;
  for (int k = 0; checked < 50; ++k) {
    const ModelParams p = draw_signed_params(rng, k);
    const SignPrediction pr = cuv_sign_prediction(p);
    if (pr.verdict == SignVerdict::Unknown) continue;
    ++checked;
    double c = 0.0;
    try {
      c = solve_bistable_wave(p).speed;
    } catch (const Error& e) {
      if (first_bad.empty()) first_bad = fmt("(%g,%g,%g,%g): %s", p.d, p.r, p.a, p.b, e.what());
      continue;
    }
    const SignVerdict got = std::abs(c) < 1e-4 ? SignVerdict::Zero : (c > 0 ? SignVerdict::Positive : SignVerdict::Negative);
    if (got == pr.verdict) {
      ++matched;
      if (got == SignVerdict::Zero) ++zeros;
    } else if (first_bad.empty()) {
      first_bad = fmt("(%g,%g,%g,%g): c_uv = %.3e, predicted %s", p.d, p.r, p.a, p.b, c, to_string(pr.verdict).c_str());
    }
  }
  const double el = seconds_since(t0);
  std::string d = fmt("%d/%d signs match (%d zero), %.1f s", matched, checked, zeros, el);
  if (!first_bad.empty()) d += "; first mismatch " + first_bad;
  return {matched == checked && el < 600.0, d};
}

Outcome criterion4() {
  const WaveProfile w = solve_bistable_wave(kBase);
  const CharacteristicRoots roots = char_roots(kBase, w.speed);
  bool ok = true;
  std::string d;
  for (auto q : {TailQuantity::U_Plus, TailQuantity::VDeficit_Plus, TailQuantity::V_Minus, TailQuantity::UDeficit_Minus}) {
    const DecayFit f = fit_tail_decay(w, roots, q);
    const double dev = f.valid ? f.relative_deviation() : 1.0;
    ok = ok && f.valid && dev < 0.03;
    d += fmt("%s %.4f vs %.4f (%.2f%%); ", to_string(q).c_str(), f.measured_rate, f.predicted_rate, 100 * dev);
  }
  return {ok, d};
}

Outcome criterion5() {
  const Grid g = Grid::with_spacing(-50.0, 350.0, 0.1);
  const SimulationSetup s{{1, 1, 2, 3}, g, 0.004, 100.0, output_schedule(0.0, 100.0, 1.0)};
  FrontTracker tr(g, Species::U, 0.5);
  simulate_streaming(s, kpp_initial(g), [&](const FieldState& st) { tr.observe(st); });
  const SpeedEstimate e = estimate_speed(tr.trace(), 50.0, 100.0);
  const double rel = std::abs(e.speed - 2.0) / 2.0;
  const double clear = g.x_max - *tr.trace().positions_max.back();
  return {rel < 0.02 && clear > 50.0, fmt("speed %.5f +- %.5f (%.2f%% from 2)", e.speed, e.half_width, 100 * rel)};
}

Outcome criterion6() {
  // Synthetic trace first: x(t) = 2t - 1.5 ln t + 3.
  FrontTrace syn;
  for (int k = 0; k <= 900; ++k) {
    const double t = 100.0 + k;
    syn.times.push_back(t);
    syn.positions_max.emplace_back(2.0 * t - 1.5 * std::log(t) + 3.0);
    syn.positions_min.push_back(syn.positions_max.back());
  }
  const BramsonFit sf = fit_bramson(syn, 2.0, 100.0, 1000.0);
  const bool syn_ok = std::abs(sf.kappa - 1.5) < 1e-6;

  const auto t0 = Clock::now();
  const Grid g = Grid::with_spacing(-50.0, 2200.0, 0.1);
  const double dt = kpp_matched_dt(1.0, 1.0, g.dx());
  const SimulationSetup s{{1, 1, 2, 3}, g, dt, 1000.0, output_schedule(0.0, 1000.0, 1.0)};
  FrontTracker tr(g, Species::U, 0.5);
  simulate_streaming(s, kpp_initial(g), [&](const FieldState& st) { tr.observe(st); });
  const BramsonFit b = fit_bramson(tr.trace(), 2.0, 100.0, 1000.0, {0.0, 5.0, 10.0, 20.0, 50.0});
  const double el = seconds_since(t0);
  const bool ok = syn_ok && b.kappa >= 1.2 && b.kappa <= 1.8 && el < 900.0 && g.x_max - *tr.trace().positions_max.back() > 50.0;
  return {ok, fmt("kappa %.4f (t0 = %g, sup|omega| %.3g), synthetic error %.1e, dt %.4g, %.0f s", b.kappa, b.t0,
                  b.sup_omega, std::abs(sf.kappa - 1.5), dt, el)};
}

Outcome criterion7() {
  struct Case {
    Family family;
    SuperSubParams ssp;
    double eps;
  };
  const std::vector<Case> cases = {
      {Family::LowerSimple, {Family::LowerSimple, 0.05, 0.5, 0.3, 0.0, 1.0, 0.0}, 0.0},
      {Family::UpperSimple, {Family::UpperSimple, 0.05, 0.5, 0.3, 0.0, -1.0, 0.0}, 0.0},
      {Family::UpperTwoSided, {Family::UpperTwoSided, 0.05, 0.5, 0.05, -20.0, -1.0, 0.0}, 0.0},
      {Family::LowerTwoSided, {Family::LowerTwoSided, 0.04, 0.5, 0.05, -10.0, 1.0, 0.0}, 0.0},
      {Family::AppendixLower, {Family::AppendixLower, 0.1, 0.05, 0.1, 0.0, 1.0, 0.02}, 0.02},
  };
  const WaveProfile w = solve_bistable_wave(kBase);
  bool ok = true;
  std::string d;
  for (const auto& c : cases) {
    const WaveProfile pw = c.eps > 0.0 ? solve_perturbed_wave(kBase, c.eps) : w;
    const ConstraintVerdict cv = check_constraints(c.family, kBase, c.ssp, &pw);
    const ResidualReport rep = evaluate_residuals(SuperSubPair(kBase, pw, c.ssp));
    SuperSubParams inflated = c.ssp;
    inflated.p0 *= 100.0;
    const ConstraintVerdict icv = check_constraints(c.family, kBase, inflated, &pw);
    const ResidualReport irep = evaluate_residuals(SuperSubPair(kBase, pw, inflated));
    // The inflated pair must show violations the documented pair does not have.
    const bool base_ok = cv.pass && rep.clean();
    const bool infl_ok = !icv.pass && rep.T_star &&
                         (!irep.T_star || (irep.last_violation_time && *irep.last_violation_time >= *rep.T_star));
    ok = ok && base_ok && infl_ok;
    d += fmt("%s T*=%s inflated %s; ", to_string(c.family).c_str(), rep.T_star ? fmt("%g", *rep.T_star).c_str() : "none",
             irep.T_star ? fmt("last violation %g", *irep.last_violation_time).c_str() : "never clean");
  }
  return {ok, d};
}

Outcome criterion8() {
  const ModelParams p = kBase;
  const Grid g = Grid::with_spacing(-20.0, 20.0, 0.1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    // Random smooth lower pair plus a nonnegative perturbation in the competitive order.
    const auto bump = [&](double amp) {
      const double c = -15.0 + 30.0 * U(rng), w = 0.5 + 4.0 * U(rng), h = amp * U(rng);
      return [c, w, h](double x) { return h * std::exp(-(x - c) * (x - c) / (w * w)); };
    };
    const auto u2a = bump(1.0), u2b = bump(0.5), v2a = bump(1.0), v2b = bump(0.5), du = bump(0.4), dv = bump(0.4);
    FieldState lo, up;
    lo.u.resize(g.n);
    lo.v.resize(g.n);
    up.u.resize(g.n);
    up.v.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.x(i);
      lo.u[i] = u2a(x) + u2b(x);
      lo.v[i] = v2a(x) + v2b(x);
      up.u[i] = lo.u[i] + du(x);
      up.v[i] = std::max(0.0, lo.v[i] - dv(x));
    }
    const SimulationSetup s{p, g, 0.004, 20.0, output_schedule(0.0, 20.0, 0.5)};
    const ComparisonReport r = comparison_check(simulate(s, up), simulate(s, lo));
    worst = std::max(worst, r.max_violation);
  }
  return {worst <= 1e-10, fmt("max ordering violation %.3e over 20 pairs", worst)};
}

struct InvasionRun {
  WaveProfile wave;
  Trajectory traj;
  bool certified = false;
  double T = 0.0;
};

const InvasionRun& invasion_run() {
  static const InvasionRun run = [] {
    InvasionRun r;
    r.wave = solve_bistable_wave(kBase);
    const Grid g = Grid::with_spacing(-150.0, 150.0, 0.1);
    const FieldState init = make_initial(g, invasion_ic());
    const SuperSubPair pair(kBase, r.wave, invasion_pair());
    const ResidualReport rep = evaluate_residuals(pair);
    r.T = rep.T_star.value_or(200.0);
    r.certified = check_constraints(Family::LowerTwoSided, kBase, invasion_pair()).pass &&
                  invasion_certificate(g, init, pair, rep, r.T).certified;
    const SimulationSetup s{kBase, g, 0.004, 200.0, output_schedule(0.0, 200.0, 1.0)};
    r.traj = simulate(s, init);
    return r;
  }();
  return run;
}

Outcome criterion9() {
  const InvasionRun& r = invasion_run();
  const WaveEvaluator ev(r.wave);
  const FrontTrace tr = track_front(r.traj, Species::U, 0.5);
  std::vector<double> hs;
  double dist200 = 1.0;
  for (std::size_t i = 0; i < r.traj.snapshots.size(); ++i) {
    const FieldState& s = r.traj.snapshots[i];
    if (s.t < 150.0 - 1e-9 || !tr.positions_max[i]) continue;
    const ShiftEstimate e = estimate_shift(r.traj.grid, s, ev, *tr.positions_max[i]);
    hs.push_back(e.h);
    if (std::abs(s.t - 200.0) < 1e-9) dist200 = e.distance;
  }
  const double gap = max_pairwise_gap(hs);
  return {r.certified && dist200 <= 0.05 && gap < 0.05 && hs.size() == 51,
          fmt("certified at T = %g: %s; distance(200) %.3e; h gap over [150,200] %.3e", r.T, r.certified ? "yes" : "no",
              dist200, gap)};
}

Outcome criterion10() {
  const ModelParams p{4.0, 1.0, 2.0, 20.0};
  const SpeedSet sp = canonical_speeds(p);
  const double cuv = solve_bistable_wave(p).speed;
  const Grid g = Grid::with_spacing(-850.0, 850.0, 0.2);
  InitialCondition ic;
  ic.scenario = Scenario::A2;
  ic.u_lo = -5.0;
  ic.u_hi = 5.0;
  ic.v_lo = 10.0;
  ic.v_hi = 20.0;
  ic.v_mirror = true;
  const SimulationSetup s{p, g, 0.004, 200.0, output_schedule(0.0, 200.0, 1.0)};
  std::vector<double> t, y;
  FieldState last;
  simulate_streaming(s, make_initial(g, ic), [&](const FieldState& st) {
    if (st.t >= 100.0 - 1e-9) {
      t.push_back(st.t);
      y.push_back(sup_over(g, st, Species::V, 0.0, g.x_max));
    }
    last = st;
  });
  const LogLinearFit f = fit_log_linear(t, y);
  WaveSolveOptions wo;
  wo.L = 100.0;
  wo.n = 8001;
  const WaveProfile kpp = solve_kpp_profile(p.d, p.r, sp.c_u, wo);
  const double X = sp.c_u * 200.0 - (3.0 * p.d / sp.c_u) * std::log(200.0);
  ShiftOptions so;
  so.bracket = 20.0;
  const ShiftEstimate e = estimate_shift(g, last, WaveEvaluator(kpp), X, so);
  const bool ok = sp.c_u > sp.c_v && f.slope < 0.0 && f.r2 > 0.9 && f.skipped == 0 && e.distance <= 0.05;
  return {ok, fmt("c_uv %.4f; sup v(x>=0) slope %.4f R^2 %.4f; KPP distance %.3e at offset %.3f", cuv, f.slope, f.r2,
                  e.distance, e.h + sp.c_u * 200.0 - X)};
}

Outcome criterion11() {
  const ModelParams p{0.25, 1.0, 1.2, 20.0};
  const WaveProfile w = solve_bistable_wave(p);
  const SpeedSet sp = canonical_speeds(p).resolved(w.speed);
  const Grid g = Grid::with_spacing(-460.0, 460.0, 0.1);
  InitialCondition ic;
  ic.scenario = Scenario::A2;
  ic.u_lo = -5.0;
  ic.u_hi = 5.0;
  ic.v_lo = 10.0;
  ic.v_hi = 20.0;
  ic.v_mirror = true;
  const SimulationSetup s{p, g, 0.004, 200.0, output_schedule(0.0, 200.0, 1.0)};
  const TerraceReport rep = detect_terrace(simulate(s, make_initial(g, ic)), sp, &w);
  const double eu = std::abs(rep.u_speed - w.speed) / w.speed, ev = std::abs(rep.v_speed - 2.0) / 2.0;
  return {rep.terrace && eu < 0.05 && ev < 0.05 && rep.sup_u_beyond < 1e-3,
          fmt("u-front %.4f vs c_uv %.4f (%.2f%%), v-front %.4f (%.2f%%), sup u beyond c0 t %.2e", rep.u_speed, w.speed,
              100 * eu, rep.v_speed, 100 * ev, rep.sup_u_beyond)};
}

Outcome criterion12() {
  const InvasionRun& r = invasion_run();
  const SegregationSeries s = segregation_metric(r.traj, 0.5 * r.wave.speed, r.wave.speed);
  return {r.certified && s.fit.r2 > 0.9 && s.fit.slope < 0.0 && !s.truncated,
          fmt("c = %.4f: slope %.4f, R^2 %.4f over the last half", s.c, s.fit.slope, s.fit.r2)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> all = {criterion1, criterion2, criterion3,  criterion4,
                                                      criterion5, criterion6, criterion7,  criterion8,
                                                      criterion9, criterion10, criterion11, criterion12};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = all[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %2d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
