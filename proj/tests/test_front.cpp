#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lvfront/error.hpp"
#include "lvfront/front.hpp"

using namespace lvf;

namespace {

const ModelParams kBase{1, 1, 2, 3};

FieldState sample(const Grid& g, double t, const std::function<double(double)>& u,
                  const std::function<double(double)>& v) {
  FieldState s;
  s.t = t;
  for (std::size_t i = 0; i < g.n; ++i) {
    s.u.push_back(u(g.x(i)));
    s.v.push_back(v(g.x(i)));
  }
  return s;
}

FrontTrace synthetic_trace(double t0, double t1, double dt, const std::function<double(double)>& x) {
  FrontTrace tr;
  for (double t = t0; t <= t1 + 1e-9; t += dt) {
    tr.times.push_back(t);
    tr.positions_max.emplace_back(x(t));
    tr.positions_min.emplace_back(x(t));
  }
  return tr;
}

FieldState kpp_initial(const Grid& g) {
  return sample(g, 0.0, [](double x) { return std::abs(x) <= 3.0 ? 1.0 : 0.0; }, [](double) { return 0.0; });
}

}  // namespace

TEST_CASE("level sets") {
  const Grid g = Grid::with_spacing(-2, 4, 0.01);
  SUBCASE("linear profile") {
    const auto s = sample(g, 0, [](double x) { return std::max(0.0, 1.0 - x); }, [](double) { return 0.0; });
    const auto xs = level_set(g, s, Species::U, 0.5);
    REQUIRE(xs.size() == 1);
    CHECK(std::abs(xs[0] - 0.5) < 1e-3);
    // Linear interpolation is exact on linear data.
    CHECK(std::abs(xs[0] - 0.5) < 1e-12);
  }
  SUBCASE("no crossing") {
    const auto s = sample(g, 0, [](double) { return 0.2; }, [](double) { return 0.0; });
    CHECK(level_set(g, s, Species::U, 0.5).empty());
  }
  SUBCASE("two bumps, four crossings") {
    // Tent functions centred at 1 and 3 with half-width 0.8 cross 0.5 at
    // 0.6, 1.4, 2.6 and 3.4.
    const auto tent = [](double x, double c) { return std::max(0.0, 1.0 - std::abs(x - c) / 0.8); };
    const auto s = sample(g, 0, [](double) { return 0.0; }, [&](double x) { return tent(x, 1.0) + tent(x, 3.0); });
    const auto xs = level_set(g, s, Species::V, 0.5);
    REQUIRE(xs.size() == 4);
    const double want[4] = {0.6, 1.4, 2.6, 3.4};
    for (int i = 0; i < 4; ++i) CHECK(xs[i] == doctest::Approx(want[i]).epsilon(1e-9));
    CHECK(std::is_sorted(xs.begin(), xs.end()));
  }
  SUBCASE("only the positive half line") {
    const auto s = sample(g, 0, [](double x) { return std::exp(-x * x); }, [](double) { return 0.0; });
    const auto xs = level_set(g, s, Species::U, 0.5);
    REQUIRE(xs.size() == 1);
    CHECK(xs[0] == doctest::Approx(std::sqrt(std::log(2.0))).epsilon(1e-4));
  }
}

TEST_CASE("stationary field gives a constant trace") {
  const Grid g = Grid::with_spacing(-10, 10, 0.1);
  Trajectory tr;
  tr.grid = g;
  for (int k = 0; k <= 10; ++k)
    tr.snapshots.push_back(sample(g, k, [](double x) { return 1.0 / (1.0 + std::exp(x - 2.0)); }, [](double) { return 0.0; }));
  const FrontTrace f = track_front(tr, Species::U, 0.5);
  REQUIRE(f.times.size() == 11);
  for (std::size_t i = 0; i < 11; ++i) {
    CHECK(*f.positions_max[i] == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(*f.positions_min[i] == *f.positions_max[i]);
  }
  CHECK(estimate_speed(f, 0, 10).speed == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("speed estimates") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.01);
  const FrontTrace tr = synthetic_trace(0, 50, 0.5, [&](double t) { return 1.3 * t + noise(rng); });
  const SpeedEstimate e = estimate_speed(tr, 10, 50);
  CHECK(std::abs(e.speed - 1.3) < 0.01);
  CHECK(e.half_width > 0.0);
  CHECK(std::abs(e.speed - 1.3) < 3.0 * e.half_width);

  FrontTrace gap = tr;
  gap.positions_max[40].reset();
  CHECK_THROWS_AS(estimate_speed(gap, 10, 50), Error);
  CHECK_THROWS_AS(estimate_speed(tr, 10, 12), Error);
}

TEST_CASE("Bramson fit on synthetic traces") {
  const FrontTrace tr = synthetic_trace(100, 1000, 1, [](double t) { return 2 * t - 1.5 * std::log(t) + 3; });
  const BramsonFit b = fit_bramson(tr, 2.0, 100, 1000);
  CHECK(b.kappa == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(b.offset == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(b.sup_omega < 1e-6);

  const FrontTrace lin = synthetic_trace(100, 1000, 1, [](double t) { return 2 * t; });
  CHECK(std::abs(fit_bramson(lin, 2.0, 100, 1000).kappa) < 1e-9);

  // The t0 grid picks the origin that fits best.
  const FrontTrace sh = synthetic_trace(100, 1000, 1, [](double t) { return 2 * t - 1.5 * std::log(t + 20) + 1; });
  const BramsonFit bs = fit_bramson(sh, 2.0, 100, 1000, {0, 10, 20, 50});
  CHECK(bs.t0 == 20.0);
  CHECK(bs.kappa == doctest::Approx(1.5).epsilon(1e-9));

  CHECK_THROWS_AS(fit_bramson(tr, 2.0, 100, 105), Error);
}

TEST_CASE("KPP spreading and the logarithmic sandwich") {
  const Grid g = Grid::with_spacing(-20, 450, 0.1);
  const double dt = kpp_matched_dt(1, 1, g.dx());
  const SimulationSetup s{kBase, g, dt, 200, output_schedule(0, 200, 1)};
  FrontTracker tr(g, Species::U, 0.5);
  simulate_streaming(s, kpp_initial(g), [&](const FieldState& st) { tr.observe(st); });
  const FrontTrace& f = tr.trace();

  const SpeedEstimate e = estimate_speed(f, 50, 100);
  CHECK(e.speed >= 1.9);
  CHECK(e.speed <= 2.0);

  // max E - X bounded above and min E - X bounded below, X = 2t - 1.5 ln t.
  double hi_early = -1e9, hi_late = -1e9, lo_early = 1e9, lo_late = 1e9;
  for (std::size_t i = 0; i < f.times.size(); ++i) {
    const double t = f.times[i];
    if (t < 20) continue;
    const double X = 2 * t - 1.5 * std::log(t);
    const double up = *f.positions_max[i] - X, dn = *f.positions_min[i] - X;
    (t < 110 ? hi_early : hi_late) = std::max(t < 110 ? hi_early : hi_late, up);
    (t < 110 ? lo_early : lo_late) = std::min(t < 110 ? lo_early : lo_late, dn);
  }
  MESSAGE("E - X range: early [" << lo_early << ", " << hi_early << "], late [" << lo_late << ", " << hi_late << "]");
  CHECK(hi_late <= hi_early + 0.5);
  CHECK(lo_late >= lo_early - 0.5);

  // Monotone single front: the level set is one point.
  for (std::size_t i = 0; i < f.times.size(); ++i)
    if (f.positions_max[i]) CHECK(*f.positions_min[i] == *f.positions_max[i]);
}

TEST_CASE("shift estimates against an exact translate") {
  const WaveProfile w = solve_bistable_wave(kBase);
  const WaveEvaluator ev(w);
  const Grid g = Grid::with_spacing(-60, 60, 0.05);
  SUBCASE("pure translate") {
    const FieldState s = sample(g, 0, [&](double x) { return ev(x - 3.7).U; }, [&](double x) { return ev(x - 3.7).V; });
    const ShiftEstimate e = estimate_shift(g, s, ev, 3.0);
    CHECK(std::abs(e.h - 3.7) < 1e-3);
    CHECK(e.distance < 1e-4);
    CHECK(e.unimodal);
  }
  SUBCASE("perturbed translate") {
    const auto bump = [](double x) { return 0.01 * std::exp(-(x - 6.0) * (x - 6.0)); };
    const FieldState s =
        sample(g, 0, [&](double x) { return ev(x - 3.7).U + bump(x); }, [&](double x) { return ev(x - 3.7).V; });
    const ShiftEstimate e = estimate_shift(g, s, ev, 3.0);
    CHECK(std::abs(e.h - 3.7) < 0.05);
    CHECK(e.distance == doctest::Approx(0.01).epsilon(0.3));
  }
  SUBCASE("moving frame") {
    const double t = 40.0, c = w.speed;
    const FieldState s =
        sample(g, t, [&](double x) { return ev(x - c * t + 1.2).U; }, [&](double x) { return ev(x - c * t + 1.2).V; });
    const ShiftEstimate e = estimate_shift(g, s, ev, c * t);
    CHECK(std::abs(e.h + 1.2) < 1e-3);
  }
}

TEST_CASE("simple data converge to a shifted front") {
  const WaveProfile w = solve_bistable_wave(kBase);
  const WaveEvaluator ev(w);
  const Grid g = Grid::with_spacing(-100, 150, 0.1, Closure::Pinned, Closure::Pinned);
  InitialCondition ic;
  ic.scenario = Scenario::SimpleIC;
  const SimulationSetup s{kBase, g, 0.004, 200, output_schedule(0, 200, 1)};
  const Trajectory tr = simulate(s, ic);
  const FrontTrace f = track_front(tr, Species::U, 0.5);
  std::vector<double> hs;
  double last = 1.0;
  for (std::size_t i = 150; i < tr.snapshots.size(); ++i) {
    const ShiftEstimate e = estimate_shift(g, tr.snapshots[i], ev, *f.positions_max[i]);
    hs.push_back(e.h);
    last = e.distance;
  }
  CHECK(last <= 0.05);
  CHECK(max_pairwise_gap(hs) < 0.05);

  // Speed does not depend on the tracked level.
  const SpeedEstimate mid = estimate_speed(f, 100, 200);
  for (double m : {0.1, 0.9}) {
    const SpeedEstimate o = estimate_speed(track_front(tr, Species::U, m), 100, 200);
    CHECK(std::abs(o.speed - mid.speed) <= o.half_width + mid.half_width);
  }
}

TEST_CASE("log-linear fits and helpers") {
  std::vector<double> t, y;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(k);
    y.push_back(3.0 * std::exp(-0.5 * k));
  }
  y[5] = 0.0;
  const LogLinearFit f = fit_log_linear(t, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.skipped == 1);
  CHECK(f.samples == 40);
  CHECK(max_pairwise_gap({1.0, 3.0, 2.5}) == 2.0);
  CHECK(max_pairwise_gap({}) == 0.0);

  const Grid g = Grid::with_spacing(-5, 5, 0.5);
  const FieldState s = sample(g, 0, [](double x) { return x; }, [](double x) { return -x; });
  CHECK(sup_over(g, s, Species::U, 0, 5) == 5.0);
  CHECK(sup_over(g, s, Species::V, -2, 2) == 2.0);
}

TEST_CASE("segregation metric") {
  const Grid g = Grid::with_spacing(-50, 50, 0.1);
  SUBCASE("exact (1, 0) state") {
    const FieldState s = sample(g, 10, [](double) { return 1.0; }, [](double) { return 0.0; });
    bool truncated = true;
    CHECK(segregation_value(g, s, 0.5, &truncated) == 0.0);
    CHECK_FALSE(truncated);
    segregation_value(g, s, 10.0, &truncated);
    CHECK(truncated);
  }
  SUBCASE("failed invasion does not decay") {
    InitialCondition ic;
    ic.scenario = Scenario::A1;
    ic.u_lo = -1;
    ic.u_hi = 1;
    ic.u_amplitude = 0.01;
    ic.v_lo = -1;
    ic.v_hi = 1;
    const SimulationSetup s{kBase, g, 0.004, 40, output_schedule(0, 40, 1)};
    const SegregationSeries seg = segregation_metric(simulate(s, ic), 0.1);
    CHECK(seg.values.back() > 0.9);
    CHECK_FALSE((seg.fit.slope < -0.01 && seg.fit.r2 > 0.9));
  }
  SUBCASE("cone must stay inside the bistable speed") {
    Trajectory tr;
    tr.grid = g;
    tr.snapshots.push_back(sample(g, 1, [](double) { return 1.0; }, [](double) { return 0.0; }));
    CHECK_THROWS_AS(segregation_metric(tr, 0.3, 0.25), Error);
  }
}

TEST_CASE("terrace detection") {
  SUBCASE("equal single-species speeds rejected") {
    SpeedSet sp = canonical_speeds(kBase).resolved(0.25);
    Trajectory tr;
    CHECK_THROWS_AS(detect_terrace(tr, sp), Error);
  }
  SUBCASE("single-species run has one front") {
    const ModelParams p{0.25, 1, 1.2, 20};
    const Grid g = Grid::with_spacing(-20, 150, 0.1);
    const SimulationSetup s{p, g, 0.004, 60, output_schedule(0, 60, 1)};
    const Trajectory tr = simulate(s, kpp_initial(g));
    const TerraceReport rep = detect_terrace(tr, canonical_speeds(p).resolved(0.62));
    CHECK_FALSE(rep.terrace);
    CHECK_FALSE(rep.diagnostics.empty());
  }
}
