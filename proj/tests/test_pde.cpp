#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lvfront/error.hpp"
#include "lvfront/front.hpp"
#include "lvfront/pde.hpp"

using namespace lvf;

namespace {

const ModelParams kBase{1, 1, 2, 3};

double sup(const std::vector<double>& f) { return *std::max_element(f.begin(), f.end()); }
double inf(const std::vector<double>& f) { return *std::min_element(f.begin(), f.end()); }

// Sum of random Gaussian bumps, the hand-rolled generator for smooth data.
std::vector<double> bumps(std::mt19937_64& rng, const Grid& g, int count, double amp) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> f(g.n, 0.0);
  for (int k = 0; k < count; ++k) {
    const double c = g.x_min + (g.x_max - g.x_min) * (0.1 + 0.8 * U(rng));
    const double w = 0.5 + 4.0 * U(rng), h = amp * U(rng);
    for (std::size_t i = 0; i < g.n; ++i) f[i] += h * std::exp(-std::pow((g.x(i) - c) / w, 2));
  }
  return f;
}

FieldState uniform(const Grid& g, double u, double v) {
  FieldState s;
  s.u.assign(g.n, u);
  s.v.assign(g.n, v);
  return s;
}

}  // namespace

TEST_CASE("grid") {
  const Grid g = Grid::with_spacing(-50, 50, 0.1);
  CHECK(g.n == 1001);
  CHECK(g.dx() == doctest::Approx(0.1));
  CHECK(g.x(500) == doctest::Approx(0.0));
  Grid bad;
  bad.n = 10;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(Grid::with_spacing(1, 0, 0.1), Error);
}

TEST_CASE("initial data scenarios") {
  const Grid g = Grid::with_spacing(-50, 50, 0.1);
  SUBCASE("A2 compact supports") {
    InitialCondition ic;
    const FieldState s = make_initial(g, ic);
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.x(i);
      if (std::abs(x) > 5.0 + 1e-12) CHECK(s.u[i] == 0.0);
      if (x < 10.0 - 1e-12 || x > 20.0 + 1e-12) CHECK(s.v[i] == 0.0);
    }
    CHECK(sup(s.u) == 1.0);
    CHECK(sup(s.v) == 1.0);
  }
  SUBCASE("A1 positive lower bound") {
    InitialCondition ic;
    ic.scenario = Scenario::A1;
    ic.v_background = 1.0;
    ic.v_pocket = 1.0;
    CHECK(inf(make_initial(g, ic).v) == 1.0);
    ic.v_pocket = 0.0;
    CHECK_THROWS_AS(make_initial(g, ic), Error);
  }
  SUBCASE("simple data") {
    InitialCondition ic;
    ic.scenario = Scenario::SimpleIC;
    const FieldState s = make_initial(g, ic);
    CHECK(s.u.front() == 1.0);
    CHECK(s.v.back() == 1.0);
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < g.n; ++i) overlap += s.u[i] * s.v[i] != 0.0;
    CHECK(overlap == 0);
  }
  SUBCASE("margin rule") {
    InitialCondition ic;
    ic.u_lo = -49.5;
    try {
      make_initial(g, ic);
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("margin rule") != std::string::npos);
    }
  }
}

TEST_CASE("equilibria are exact fixed points") {
  const Grid g = Grid::with_spacing(-10, 10, 0.1);
  FieldState s = uniform(g, 0.0, 0.0);
  for (int k = 0; k < 100; ++k) s = step(s, g, kBase, 0.004);
  CHECK(sup(s.u) == 0.0);
  CHECK(sup(s.v) == 0.0);
  s = uniform(g, 1.0, 0.0);
  for (int k = 0; k < 100; ++k) s = step(s, g, kBase, 0.004);
  CHECK(inf(s.u) == 1.0);
  CHECK(sup(s.u) == 1.0);
  CHECK(sup(s.v) == 0.0);
}

TEST_CASE("stability bound enforced") {
  const Grid g = Grid::with_spacing(-10, 10, 0.1);
  CHECK_THROWS_AS(step(uniform(g, 0.5, 0.5), g, kBase, 0.01), Error);
  const double dt = max_stable_dt(kBase, 0.1, 1.0, 1.0);
  CHECK(2 * dt / 0.01 + dt * reaction_lipschitz(kBase, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(reaction_lipschitz(kBase, 1.0, 1.0) == doctest::Approx(std::max(1.0 * (1 + 2 + 2), 1 + 2 + 3.0)));
}

TEST_CASE("discrete minimal speed") {
  // The scheme's spreading speed tends to 2 sqrt(rd) under refinement.
  CHECK(discrete_kpp_speed(1, 1, 0.1, 0.004) < 2.0);
  CHECK(std::abs(discrete_kpp_speed(1, 1, 0.0125, 5e-5) - 2.0) < 2e-3);
  CHECK(std::abs(discrete_kpp_speed(4, 1, 0.01, 1e-5) - 4.0) < 4e-3);
  const double dt = kpp_matched_dt(1, 1, 0.1);
  CHECK(discrete_kpp_speed(1, 1, 0.1, dt) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("single-species KPP spreading of v") {
  const Grid g = Grid::with_spacing(-10, 150, 0.1);
  InitialCondition ic;
  ic.scenario = Scenario::Custom;
  ic.u_fn = [](double) { return 0.0; };
  ic.v_fn = [](double x) { return std::abs(x) < 3 ? 1.0 : 0.0; };
  const SimulationSetup s{kBase, g, 0.004, 50, output_schedule(0, 50, 0.5)};
  const Trajectory tr = simulate(s, ic);
  CHECK(sup(tr.snapshots.back().u) == 0.0);
  const SpeedEstimate e = estimate_speed(track_front(tr, Species::V, 0.5), 25, 50);
  CHECK(std::abs(e.speed - 2.0) / 2.0 < 0.03);
}

TEST_CASE("u front position bounded by the logarithmic lag") {
  const Grid g = Grid::with_spacing(-20, 250, 0.1);
  InitialCondition ic;
  ic.scenario = Scenario::Custom;
  ic.u_fn = [](double x) { return std::abs(x) < 3 ? 1.0 : 0.0; };
  ic.v_fn = [](double) { return 0.0; };
  const SimulationSetup s{kBase, g, 0.004, 100, {100.0}};
  const Trajectory tr = simulate(s, ic);
  const auto pos = level_set(g, tr.snapshots.back(), Species::U, 0.5);
  REQUIRE_FALSE(pos.empty());
  CHECK(pos.back() <= 200.0);
  CHECK(pos.back() >= 200.0 - 1.5 * std::log(100.0) - 10.0);
}

TEST_CASE("invariant box and decay of the excess over random data") {
  std::mt19937_64 rng(5);
  const Grid g = Grid::with_spacing(-20, 20, 0.1);
  for (int k = 0; k < 10; ++k) {
    FieldState init;
    init.u = bumps(rng, g, 3, 1.0);
    init.v = bumps(rng, g, 3, 1.0);
    for (auto& x : init.u) x += 1.0 + 0.3 * (k % 2);
    const double U0 = std::max(1.0, sup(init.u)), V0 = std::max(1.0, sup(init.v));
    const SimulationSetup s{kBase, g, 0.004, 20, output_schedule(0, 20, 0.25)};
    const Trajectory tr = simulate(s, init);
    for (const FieldState& st : tr.snapshots) {
      CHECK(inf(st.u) >= 0.0);
      CHECK(inf(st.v) >= 0.0);
      CHECK(sup(st.u) <= U0);
      CHECK(sup(st.v) <= V0);
      const double excess = sup(st.u) - 1.0;
      CHECK(excess <= (U0 - 1.0) * std::exp(-kBase.r * st.t * 0.95) + 1e-15);
    }
  }
}

TEST_CASE("reflection symmetry") {
  std::mt19937_64 rng(6);
  const Grid g = Grid::with_spacing(-20, 20, 0.1);
  FieldState a;
  a.u = bumps(rng, g, 4, 1.0);
  a.v = bumps(rng, g, 4, 1.0);
  FieldState b = a;
  std::reverse(b.u.begin(), b.u.end());
  std::reverse(b.v.begin(), b.v.end());
  const SimulationSetup s{kBase, g, 0.004, 10, {10.0}};
  const FieldState ea = simulate(s, a).snapshots.back();
  FieldState eb = simulate(s, b).snapshots.back();
  std::reverse(eb.u.begin(), eb.u.end());
  std::reverse(eb.v.begin(), eb.v.end());
  double diff = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) diff = std::max({diff, std::abs(ea.u[i] - eb.u[i]), std::abs(ea.v[i] - eb.v[i])});
  CHECK(diff < 1e-13);
}

TEST_CASE("pinned closure holds boundary values") {
  const Grid g = Grid::with_spacing(-30, 30, 0.1, Closure::Pinned, Closure::Pinned);
  InitialCondition ic;
  ic.scenario = Scenario::SimpleIC;
  const SimulationSetup s{kBase, g, 0.004, 10, {5.0, 10.0}};
  for (const FieldState& st : simulate(s, ic).snapshots) {
    CHECK(st.u.front() == 1.0);
    CHECK(st.v.back() == 1.0);
  }
}

TEST_CASE("simulation is deterministic and snapshots are ordered") {
  const Grid g = Grid::with_spacing(-30, 30, 0.1);
  const SimulationSetup s{kBase, g, 0.004, 5, output_schedule(0, 5, 0.5)};
  const Trajectory a = simulate(s, InitialCondition{}), b = simulate(s, InitialCondition{});
  REQUIRE(a.snapshots.size() == 11);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k].u == b.snapshots[k].u);
    CHECK(a.snapshots[k].v == b.snapshots[k].v);
    if (k) CHECK(a.snapshots[k].t > a.snapshots[k - 1].t);
  }
}

TEST_CASE("boundary guard") {
  const Grid g = Grid::with_spacing(-10, 10, 0.1);
  const SimulationSetup s{kBase, g, 0.004, 10, output_schedule(0, 10, 1)};
  InitialCondition ic;
  ic.u_lo = -2;
  ic.u_hi = 2;
  ic.v_lo = 4;
  ic.v_hi = 8;
  const Trajectory tr = simulate(s, ic);
  CHECK_FALSE(tr.warnings.empty());
}

TEST_CASE("comparison check") {
  std::mt19937_64 rng(7);
  const Grid g = Grid::with_spacing(-10, 9.9, 0.1);
  REQUIRE(g.n == 200);
  const SimulationSetup s{kBase, g, 0.004, 20, output_schedule(0, 20, 0.5)};
  FieldState lo;
  lo.u = bumps(rng, g, 3, 0.8);
  lo.v = bumps(rng, g, 3, 0.8);
  const Trajectory tl = simulate(s, lo);

  SUBCASE("reflexive") { CHECK(comparison_check(tl, tl).max_violation == 0.0); }

  SUBCASE("bump on u persists in order") {
    FieldState up = lo;
    const auto extra = bumps(rng, g, 1, 0.5);
    for (std::size_t i = 0; i < g.n; ++i) up.u[i] += extra[i];
    CHECK(comparison_check(simulate(s, up), tl).max_violation <= 1e-10);
  }

  SUBCASE("corrupted snapshot detected") {
    FieldState up = lo;
    for (auto& x : up.u) x += 0.2;
    Trajectory bad = simulate(s, up);
    auto& snap = bad.snapshots[10];
    std::swap(snap.u, snap.v);
    const ComparisonReport r = comparison_check(bad, tl);
    CHECK(r.max_violation > 0.0);
    CHECK(r.snapshot == 10);
    CHECK(r.t == doctest::Approx(5.0));
    CHECK(r.x == doctest::Approx(g.x(r.node)));
  }

  SUBCASE("mismatched discretization rejected") {
    SimulationSetup s2 = s;
    s2.dt = 0.002;
    CHECK_THROWS_AS(comparison_check(simulate(s2, lo), tl), Error);
  }
}
