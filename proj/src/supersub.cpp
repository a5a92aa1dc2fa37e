#include "lvfront/supersub.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "lvfront/error.hpp"

namespace lvf {

std::string to_string(Family f) {
  switch (f) {
    case Family::LowerSimple: return "lower_simple";
    case Family::UpperSimple: return "upper_simple";
    case Family::UpperTwoSided: return "upper_two_sided";
    case Family::LowerTwoSided: return "lower_two_sided";
    case Family::AppendixLower: return "appendix_lower";
  }
  return "lower_simple";
}

std::optional<Family> parse_family(const std::string& s) {
  for (Family f : {Family::LowerSimple, Family::UpperSimple, Family::UpperTwoSided, Family::LowerTwoSided,
                   Family::AppendixLower}) {
    if (s == to_string(f)) return f;
  }
  return std::nullopt;
}

bool is_lower(Family f) noexcept {
  return f == Family::LowerSimple || f == Family::LowerTwoSided || f == Family::AppendixLower;
}

ConstraintVerdict check_constraints(Family family, const ModelParams& m, const SuperSubParams& s,
                                    const WaveProfile* wave) {
  ConstraintVerdict v;
  auto need = [&](bool ok, const char* name) {
    if (!ok) v.failed.emplace_back(name);
  };
  need(s.p0 > 0.0, "p0 > 0");
  need(s.q0 > 0.0, "q0 > 0");
  need(s.rate > 0.0, "rate > 0");
  switch (family) {
    case Family::LowerSimple:
      need(s.rate < std::min({m.r, 1.0, (m.a - 1.0) * m.r}), "alpha < min{r, 1, (a-1)r}");
      need(s.p0 < s.q0 / m.b * (1.0 - s.rate) / 2.0, "p0 < (q0/b)(1-alpha)/2");
      need(s.shift1 > 0.0, "eta1 > 0");
      break;
    case Family::UpperSimple:
      need(s.rate < std::min({m.r, 1.0, m.b - 1.0}), "alpha < min{r, 1, b-1}");
      need(s.p0 < s.q0 * (1.0 - s.rate) / (2.0 * m.a), "p0 < q0(1-alpha)/(2a)");
      need(s.shift1 < 0.0, "eta1 < 0");
      break;
    case Family::UpperTwoSided:
      need(s.q0 > 2.0 * m.b * s.p0, "q0 > 2b p0");
      need(s.shift1 < 0.0, "zeta1 < 0");
      break;
    case Family::LowerTwoSided:
      need(s.q0 > 2.0 * m.b * (1.0 + s.q0) * s.p0, "q0 > 2b(1+q0) p0");
      need(s.shift1 > 0.0, "zeta1 > 0");
      break;
    case Family::AppendixLower: {
      need(s.epsilon > 0.0 && perturbed_is_bistable(m, s.epsilon), "0 < eps with the shifted system bistable");
      need(std::abs(s.p0 - m.a * s.q0) <= 1e-12 * std::max(1.0, s.p0), "p0 = a q0");
      need(s.shift1 > 0.0, "zeta1 > 0");
      if (wave == nullptr || wave->kind != WaveKind::PerturbedBistable) {
        v.failed.emplace_back("mu < min{lambda_u c_eps, lambda_v c_eps, r(a-1), b-1}");
        break;
      }
      const double ce = wave->speed;
      double bound = std::min(m.r * (m.a - 1.0), m.b - 1.0);
      if (perturbed_is_bistable(m, s.epsilon)) {
        const CharacteristicRoots cr = perturbed_roots(m, s.epsilon, ce);
        bound = std::min({bound, cr.lambda3 * ce, cr.lambda4 * ce});
      }
      need(s.rate < bound, "mu < min{lambda_u c_eps, lambda_v c_eps, r(a-1), b-1}");
      break;
    }
  }
  v.pass = v.failed.empty();
  return v;
}

// --- pair ---------------------------------------------------------------------

SuperSubPair::SuperSubPair(const ModelParams& params, const WaveProfile& wave, const SuperSubParams& ssp)
    : params_(params), ssp_(ssp), eval_(wave), c_(wave.speed) {
  params.validate();
  const bool appendix = ssp.family == Family::AppendixLower;
  if (appendix && wave.kind != WaveKind::PerturbedBistable) {
    fail(ErrorKind::Precondition, "pair: the appendix family needs a perturbed front");
  }
  if (!appendix && wave.kind != WaveKind::Bistable) {
    fail(ErrorKind::Precondition, "pair: this family needs the bistable front");
  }
  if (appendix && std::abs(wave.epsilon - ssp.epsilon) > 1e-14) {
    fail(ErrorKind::Precondition, "pair: perturbed front was computed for a different eps");
  }
  // The tail continuation is trusted up to this distance from the samples.
  xi_limit_ = 20.0 * wave.L;
}

double SuperSubPair::p(double t) const { return ssp_.p0 * std::exp(-ssp_.rate * t); }
double SuperSubPair::q(double t) const { return ssp_.q0 * std::exp(-ssp_.rate * t); }

double SuperSubPair::shift(double t) const {
  if (ssp_.family == Family::AppendixLower) return -ssp_.shift0 + ssp_.shift1 * std::exp(-ssp_.rate * t);
  return ssp_.shift0 - ssp_.shift1 * std::exp(-0.5 * ssp_.rate * t);
}

double SuperSubPair::front_position(double t) const {
  if (ssp_.family == Family::AppendixLower) return c_ * t + shift(t);
  return c_ * t - shift(t);
}

WaveSample SuperSubPair::wave_at(double xi) const {
  if (!(std::abs(xi) <= xi_limit_)) {
    std::ostringstream os;
    os << "pair: xi = " << xi << " is outside the extendable range [" << -xi_limit_ << ", " << xi_limit_ << "]";
    fail(ErrorKind::Precondition, os.str());
  }
  return eval_(xi);
}

PairValue SuperSubPair::operator()(double t, double x) const {
  PairValue out;
  const double pp = p(t), qq = q(t), z = shift(t);
  switch (ssp_.family) {
    case Family::LowerSimple: {
      const WaveSample w = wave_at(x - c_ * t + z);
      out.u_raw = w.U - pp;
      out.v_raw = (1.0 + qq) * w.V;
      break;
    }
    case Family::UpperSimple: {
      const WaveSample w = wave_at(x - c_ * t + z);
      out.u_raw = (1.0 + qq) * w.U;
      out.v_raw = w.V - pp;
      break;
    }
    case Family::UpperTwoSided:
    case Family::LowerTwoSided: {
      const WaveSample a = wave_at(x - c_ * t + z);
      const WaveSample b = wave_at(-x - c_ * t + z);
      // U+ + U- - 1 written through the deficit of the larger one
      const double base = a.U >= b.U ? b.U - a.DU : a.U - b.DU;
      const bool up = ssp_.family == Family::UpperTwoSided;
      out.u_raw = up ? base + pp : base - pp;
      out.v_raw = (up ? 1.0 - qq : 1.0 + qq) * (a.V + b.V);
      break;
    }
    case Family::AppendixLower: {
      const WaveSample a = wave_at(x - c_ * t - z);
      const WaveSample b = wave_at(-x - c_ * t - z);
      const double base = a.U >= b.U ? b.U - a.DU : a.U - b.DU;
      out.u_raw = base - pp;
      out.v_raw = a.V + b.V + qq;
      break;
    }
  }
  out.u = out.u_raw;
  out.v = out.v_raw;
  if (lower()) out.u = std::max(out.u_raw, 0.0);
  if (ssp_.family == Family::UpperSimple) out.v = std::max(out.v_raw, 0.0);
  return out;
}

ResidualValue SuperSubPair::residual(double t, double x) const {
  switch (ssp_.family) {
    case Family::LowerSimple:
    case Family::UpperSimple: return residual_simple(t, x);
    case Family::UpperTwoSided:
    case Family::LowerTwoSided: return residual_two_sided(t, x);
    case Family::AppendixLower: return residual_appendix(t, x);
  }
  return {};
}

namespace {

// Accumulates terms and the sum of their magnitudes.
struct Sum {
  double value = 0.0, scale = 0.0;
  Sum& operator+=(double x) {
    value += x;
    scale += std::abs(x);
    return *this;
  }
};

}  // namespace

// The wave identities d U'' = -c U' - f(U, V) and V'' = -c V' - g(U, V)
// remove the second derivatives; what is left is written through the
// deficits 1 - U and 1 - V so that no O(1) quantities cancel.
ResidualValue SuperSubPair::residual_simple(double t, double x) const {
  const double r = params_.r, a = params_.a, b = params_.b;
  const double al = ssp_.rate;
  const double pp = p(t), qq = q(t);
  const double dp = -al * pp, dq = -al * qq;
  const double deta = 0.5 * al * ssp_.shift1 * std::exp(-0.5 * al * t);
  const WaveSample w = wave_at(x - c_ * t + shift(t));
  ResidualValue out;
  Sum n1, n2;
  if (ssp_.family == Family::LowerSimple) {
    const double u = w.U - pp;
    if (u > 0.0) {
      n1 += deta * w.Up;
      n1 += -dp;
      n1 += -r * w.U * (pp - a * qq * w.V);
      n1 += r * pp * (w.DU + pp - a * (1.0 + qq) * w.V);
    } else {
      out.kink = true;
    }
    const double gap = u > 0.0 ? pp : w.U;  // U - u_lower
    n2 += dq * w.V;
    n2 += (1.0 + qq) * deta * w.Vp;
    n2 += (1.0 + qq) * w.V * (qq * w.V - b * gap);
  } else {
    const double v = w.V - pp;
    const double gap = v > 0.0 ? pp : w.V;  // V - v_upper
    n1 += dq * w.U;
    n1 += (1.0 + qq) * deta * w.Up;
    n1 += (1.0 + qq) * r * w.U * (qq * w.U - a * gap);
    if (v > 0.0) {
      n2 += deta * w.Vp;
      n2 += -dp;
      n2 += -w.V * (pp - b * qq * w.U);
      n2 += pp * (w.DV + pp - b * (1.0 + qq) * w.U);
    } else {
      out.kink = true;
    }
  }
  out.n1 = n1.value;
  out.scale1 = n1.scale;
  out.n2 = n2.value;
  out.scale2 = n2.scale;
  return out;
}

ResidualValue SuperSubPair::residual_two_sided(double t, double x) const {
  const double r = params_.r, a = params_.a, b = params_.b;
  const double be = ssp_.rate;
  const double ph = p(t), qh = q(t);
  const double dph = -be * ph, dqh = -be * qh;
  const double dz = 0.5 * be * ssp_.shift1 * std::exp(-0.5 * be * t);
  const double z = shift(t);
  // The pair is even in x; take the "+" front to be the farther one.
  const double ax = std::abs(x);
  const WaveSample P = wave_at(ax - c_ * t + z);
  const WaveSample M = wave_at(-ax - c_ * t + z);
  const double S = P.V + M.V;
  const double dU = P.Up + M.Up, dV = P.Vp + M.Vp;
  const double fM = r * (1.0 - M.DU) * (M.DU - a * M.V);  // f(U-, V-)
  const double X = P.DU - a * P.V;                        // 1 - U+ - a V+
  ResidualValue out;
  Sum n1, n2;
  if (ssp_.family == Family::UpperTwoSided) {
    const double delta = ph - M.DU;  // u_upper = U+ + delta
    const double s = P.U + delta;
    const double nu = M.V - qh * S;  // v_lower = V+ + nu
    n1 += dz * dU;
    n1 += dph;
    n1 += fM;
    n1 += -r * delta * X;
    n1 += r * s * (delta + a * nu);
    const double k = 1.0 - qh;
    n2 += -dqh * S;
    n2 += k * dz * dV;
    n2 += k * P.V * (M.V - qh * S + b * (ph - M.DU));
    n2 += k * M.V * (P.V - qh * S + b * (ph - P.DU));
  } else {
    const double delta = -ph - M.DU;
    const double s = P.U + delta;  // u_lower before truncation
    const double nu = M.V + qh * S;
    const bool pos = s > 0.0;
    if (pos) {
      n1 += dz * dU;
      n1 += -dph;
      n1 += fM;
      n1 += -r * delta * X;
      n1 += r * s * (delta + a * nu);
    } else {
      out.kink = true;
    }
    const double gp = pos ? ph + M.DU : P.U;  // U+ - u_lower
    const double gm = pos ? ph + P.DU : M.U;  // U- - u_lower
    const double k = 1.0 + qh;
    n2 += dqh * S;
    n2 += k * dz * dV;
    n2 += k * P.V * (M.V + qh * S - b * gp);
    n2 += k * M.V * (P.V + qh * S - b * gm);
  }
  out.n1 = n1.value;
  out.scale1 = n1.scale;
  out.n2 = n2.value;
  out.scale2 = n2.scale;
  return out;
}

ResidualValue SuperSubPair::residual_appendix(double t, double x) const {
  const double r = params_.r, a = params_.a, b = params_.b;
  const double eps = ssp_.epsilon, ku = 1.0 - eps;
  const double mu = ssp_.rate;
  const double pp = p(t), qq = q(t);
  const double dp = -mu * pp, dq = -mu * qq;
  const double dz = -mu * ssp_.shift1 * std::exp(-mu * t);
  const double z = shift(t);
  const double ax = std::abs(x);
  const WaveSample P = wave_at(ax - c_ * t - z);
  const WaveSample M = wave_at(-ax - c_ * t - z);
  const double dU = P.Up + M.Up, dV = P.Vp + M.Vp;
  const double delta = -(M.DU + pp);  // u_lower = U+ + delta
  const double s = P.U + delta;
  const double nu = M.V + qq;  // v_upper = V+ + nu
  const double X = P.DU - a * P.V;
  ResidualValue out;
  Sum n1, n2;
  const bool pos = s > 0.0;
  if (pos) {
    n1 += -dz * dU;
    n1 += -dp;
    n1 += r * (ku - M.DU) * (M.DU - a * M.V);
    n1 += -r * delta * X;
    n1 += -r * s * (eps - delta - a * nu);
  } else {
    out.kink = true;
  }
  const double ul = pos ? s : 0.0;
  const double gp = pos ? M.DU + pp : P.U;  // U+ - u_lower
  const double gm = pos ? P.DU + pp : M.U;  // U- - u_lower
  const double one_minus_v = (P.DV - eps) - M.V - qq;  // 1 - v_upper
  n2 += -dz * dV;
  n2 += dq;
  n2 += P.V * (eps + M.V + qq - b * gp);
  n2 += M.V * (eps + P.V + qq - b * gm);
  n2 += -qq * (one_minus_v - b * ul);
  out.n1 = n1.value;
  out.scale1 = n1.scale;
  out.n2 = n2.value;
  out.scale2 = n2.scale;
  return out;
}

ResidualValue SuperSubPair::residual_fd(double t, double x, double ht, double hx) const {
  const double d = params_.d, r = params_.r, a = params_.a, b = params_.b;
  const PairValue c0 = (*this)(t, x);
  PairValue xs[5], ts[5];
  for (int k = -2; k <= 2; ++k) {
    if (k == 0) continue;
    xs[k + 2] = (*this)(t, x + k * hx);
    ts[k + 2] = (*this)(t + k * ht, x);
  }
  xs[2] = ts[2] = c0;
  auto d1 = [&](const PairValue* f, double h, bool u) {
    auto g = [&](int i) { return u ? f[i].u_raw : f[i].v_raw; };
    return (-g(4) + 8.0 * g(3) - 8.0 * g(1) + g(0)) / (12.0 * h);
  };
  auto d2 = [&](const PairValue* f, double h, bool u) {
    auto g = [&](int i) { return u ? f[i].u_raw : f[i].v_raw; };
    return (-g(4) + 16.0 * g(3) - 30.0 * g(2) + 16.0 * g(1) - g(0)) / (12.0 * h * h);
  };
  ResidualValue out;
  const double u = c0.u, v = c0.v;
  const double ut = d1(ts, ht, true), uxx = d2(xs, hx, true);
  const double vt = d1(ts, ht, false), vxx = d2(xs, hx, false);
  const bool u_kink = lower() && c0.u_raw <= 0.0;
  const bool v_kink = ssp_.family == Family::UpperSimple && c0.v_raw <= 0.0;
  if (!u_kink) {
    out.n1 = ut - d * uxx - r * u * (1.0 - u - a * v);
    out.scale1 = std::abs(ut) + d * std::abs(uxx) + std::abs(r * u * (1.0 - u - a * v));
  }
  if (!v_kink) {
    out.n2 = vt - vxx - v * (1.0 - v - b * u);
    out.scale2 = std::abs(vt) + std::abs(vxx) + std::abs(v * (1.0 - v - b * u));
  }
  out.kink = u_kink || v_kink;
  return out;
}

SuperSubPair build_pair(Family family, const ModelParams& params, const WaveProfile& wave, SuperSubParams ssp) {
  ssp.family = family;
  return SuperSubPair(params, wave, ssp);
}

// --- lattice evaluation ------------------------------------------------------

std::vector<double> lattice_row(const SuperSubPair& pair, const Lattice& lat, double t) {
  std::vector<double> xs;
  const double X = pair.front_position(t);
  if (!pair.two_sided()) {
    const auto m = static_cast<long>(std::llround(lat.half_width / lat.dx));
    xs.reserve(static_cast<std::size_t>(2 * m + 1));
    for (long k = -m; k <= m; ++k) xs.push_back(X + static_cast<double>(k) * lat.dx);
    return xs;
  }
  const double half = std::max(X, 0.0) + lat.half_width;
  const auto m = static_cast<long>(std::ceil(half / lat.dx));
  xs.reserve(static_cast<std::size_t>(2 * m + 1));
  for (long k = -m; k <= m; ++k) xs.push_back(static_cast<double>(k) * lat.dx);
  return xs;
}

namespace {

struct RowResult {
  std::size_t points = 0, kinks = 0, v1 = 0, v2 = 0;
  std::optional<Violation> w1, w2;
};

void keep_worst(std::optional<Violation>& slot, const Violation& v) {
  if (!slot || v.value > slot->value) slot = v;
}

RowResult eval_row(const SuperSubPair& pair, const Lattice& lat, double t, ResidualMethod method) {
  RowResult rr;
  const bool lower = pair.lower();
  for (double x : lattice_row(pair, lat, t)) {
    const ResidualValue rv = method == ResidualMethod::Analytic ? pair.residual(t, x) : pair.residual_fd(t, x);
    ++rr.points;
    if (rv.kink) ++rr.kinks;
    // Lower pairs need N1 <= 0 <= N2; upper pairs the reverse.
    const double wrong1 = lower ? rv.n1 : -rv.n1;
    const double wrong2 = lower ? -rv.n2 : rv.n2;
    if (wrong1 > kResidualRelTol * rv.scale1 && wrong1 > 0.0) {
      ++rr.v1;
      keep_worst(rr.w1, {wrong1, t, x});
    }
    if (wrong2 > kResidualRelTol * rv.scale2 && wrong2 > 0.0) {
      ++rr.v2;
      keep_worst(rr.w2, {wrong2, t, x});
    }
  }
  return rr;
}

}  // namespace

ResidualReport evaluate_residuals(const SuperSubPair& pair, const Lattice& lat, ResidualMethod method,
                                  unsigned threads) {
  if (!(lat.dt > 0.0) || !(lat.dx > 0.0) || !(lat.t1 >= lat.t0) || !(lat.half_width > 0.0)) {
    fail(ErrorKind::InvalidParameter, "lattice: need dt > 0, dx > 0, t1 >= t0, half_width > 0");
  }
  ResidualReport rep;
  rep.family = pair.ssp().family;
  rep.lattice = lat;
  rep.method = method;
  const auto nt = static_cast<std::size_t>(std::llround((lat.t1 - lat.t0) / lat.dt)) + 1;
  rep.row_times.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) rep.row_times[k] = lat.t0 + static_cast<double>(k) * lat.dt;

  std::vector<RowResult> rows(nt);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(nt)));
  if (threads == 1) {
    for (std::size_t k = 0; k < nt; ++k) rows[k] = eval_row(pair, lat, rep.row_times[k], method);
  } else {
    // Rows are dealt round-robin; the reduction below runs in row order.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < nt; k += threads) rows[k] = eval_row(pair, lat, rep.row_times[k], method);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  rep.row_violations.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const RowResult& rr = rows[k];
    rep.points += rr.points;
    rep.kink_points += rr.kinks;
    rep.n1_violations += rr.v1;
    rep.n2_violations += rr.v2;
    if (rr.w1) keep_worst(rep.n1_worst, *rr.w1);
    if (rr.w2) keep_worst(rep.n2_worst, *rr.w2);
    rep.row_violations[k] = rr.v1 + rr.v2;
    if (rep.row_violations[k] > 0) rep.last_violation_time = rep.row_times[k];
  }
  if (!rep.last_violation_time) {
    rep.T_star = rep.row_times.front();
  } else if (*rep.last_violation_time < rep.row_times.back()) {
    rep.T_star = *rep.last_violation_time + lat.dt;
  }
  return rep;
}

CertificateResult invasion_certificate(const Grid& grid, const FieldState& initial, const SuperSubPair& pair,
                                       const ResidualReport& report, double T) {
  grid.validate();
  if (initial.u.size() != grid.n || initial.v.size() != grid.n) {
    fail(ErrorKind::Precondition, "certificate: initial data do not match the grid");
  }
  if (pair.ssp().family != Family::LowerTwoSided) {
    fail(ErrorKind::Precondition, "certificate: needs a two-sided lower pair");
  }
  if (!check_constraints(pair.ssp().family, pair.params(), pair.ssp()).pass) {
    fail(ErrorKind::Precondition, "certificate: pair parameters violate their constraints");
  }
  if (report.family != pair.ssp().family || !report.clean_from(T)) {
    fail(ErrorKind::Precondition, "certificate: residual report is not clean from the start time");
  }
  CertificateResult res;
  res.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    const PairValue pv = pair(T, x);
    const double mu = initial.u[i] - pv.u;
    const double mv = pv.v - initial.v[i];
    if (mu < res.margin) {
      res.margin = mu;
      res.worst_x = x;
      res.species = 'u';
    }
    if (mv < res.margin) {
      res.margin = mv;
      res.worst_x = x;
      res.species = 'v';
    }
  }
  res.certified = res.margin >= 0.0;
  return res;
}

}  // namespace lvf
