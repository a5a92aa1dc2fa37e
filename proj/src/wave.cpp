#include "lvfront/wave.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvfront/error.hpp"

namespace lvf {

std::string to_string(WaveKind kind) {
  switch (kind) {
    case WaveKind::Bistable: return "bistable";
    case WaveKind::KppU: return "kpp_u";
    case WaveKind::KppV: return "kpp_v";
    case WaveKind::PerturbedBistable: return "perturbed_bistable";
  }
  return "bistable";
}

std::string to_string(TailQuantity q) {
  switch (q) {
    case TailQuantity::U_Plus: return "U_plus";
    case TailQuantity::VDeficit_Plus: return "V_deficit_plus";
    case TailQuantity::V_Minus: return "V_minus";
    case TailQuantity::UDeficit_Minus: return "U_deficit_minus";
  }
  return "U_plus";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kMonotoneTol = 1e-9;
constexpr double kTailTarget = 1e-8;

// Reaction f = r U (ku - U - a V), g = V (kv - V - b U).
struct System {
  double d, r, a, b;
  double ku = 1.0, kv = 1.0;
};

struct Mesh {
  double L;
  std::size_t n;
  double h;
  std::size_t j0;  // phase node
};

Mesh make_mesh(double L, std::size_t n, double anchor) {
  if (!(L > 0.0)) fail(ErrorKind::InvalidParameter, "wave: L must be > 0");
  if (n < 17) fail(ErrorKind::InvalidParameter, "wave: n must be >= 17");
  Mesh m{L, n, 2.0 * L / static_cast<double>(n - 1), 0};
  const double pos = (anchor + L) / m.h;
  const long j0 = std::lround(pos);
  if (j0 < 1 || j0 > static_cast<long>(n) - 2 || std::abs(pos - static_cast<double>(j0)) > 1e-6) {
    std::ostringstream os;
    os << "wave: phase anchor " << anchor << " must be an interior node of the xi grid";
    fail(ErrorKind::InvalidParameter, os.str());
  }
  m.j0 = static_cast<std::size_t>(j0);
  return m;
}

double xi_at(const Mesh& m, std::size_t j) { return -m.L + static_cast<double>(j) * m.h; }

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// --- two-component bordered Newton ----------------------------------------

// Unknown layout: (U_j, V_j) interleaved for j = 1..n-2, then c.
struct TwoCompState {
  std::vector<double> U, V;  // full length n, including boundary values
  double c = 0.0;
};

Eigen::VectorXd pack(const TwoCompState& s) {
  const std::size_t m = s.U.size() - 2;
  Eigen::VectorXd x(2 * m + 1);
  for (std::size_t j = 1; j + 1 < s.U.size(); ++j) {
    x[2 * (j - 1)] = s.U[j];
    x[2 * (j - 1) + 1] = s.V[j];
  }
  x[2 * m] = s.c;
  return x;
}

void unpack(const Eigen::VectorXd& x, TwoCompState& s) {
  const std::size_t m = s.U.size() - 2;
  for (std::size_t j = 1; j + 1 < s.U.size(); ++j) {
    s.U[j] = x[2 * (j - 1)];
    s.V[j] = x[2 * (j - 1) + 1];
  }
  s.c = x[2 * m];
}

void set_boundary(const System& sys, TwoCompState& s) {
  s.U.front() = sys.ku;
  s.V.front() = 0.0;
  s.U.back() = 0.0;
  s.V.back() = sys.kv;
}

Eigen::VectorXd residual(const System& sys, const Mesh& mesh, const TwoCompState& s) {
  const std::size_t n = mesh.n;
  const std::size_t m = n - 2;
  const double h = mesh.h;
  const double ih2 = 1.0 / (h * h);
  const double i2h = 0.5 / h;
  Eigen::VectorXd F(2 * m + 1);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double U = s.U[j], V = s.V[j];
    const double Ux = (s.U[j + 1] - s.U[j - 1]) * i2h;
    const double Vx = (s.V[j + 1] - s.V[j - 1]) * i2h;
    const double Uxx = (s.U[j + 1] - 2.0 * U + s.U[j - 1]) * ih2;
    const double Vxx = (s.V[j + 1] - 2.0 * V + s.V[j - 1]) * ih2;
    F[2 * (j - 1)] = s.c * Ux + sys.d * Uxx + sys.r * U * (sys.ku - U - sys.a * V);
    F[2 * (j - 1) + 1] = s.c * Vx + Vxx + V * (sys.kv - V - sys.b * U);
  }
  F[2 * m] = s.U[mesh.j0] - 0.5 * sys.ku;
  return F;
}

SpMat jacobian(const System& sys, const Mesh& mesh, const TwoCompState& s) {
  const std::size_t n = mesh.n;
  const std::size_t m = n - 2;
  const double h = mesh.h;
  const double ih2 = 1.0 / (h * h);
  const double i2h = 0.5 / h;
  std::vector<Triplet> t;
  t.reserve(12 * m + 2);
  const auto iu = [](std::size_t j) { return static_cast<int>(2 * (j - 1)); };
  const auto iv = [](std::size_t j) { return static_cast<int>(2 * (j - 1) + 1); };
  const int ic = static_cast<int>(2 * m);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double U = s.U[j], V = s.V[j];
    const int ru = iu(j), rv = iv(j);
    // U equation
    t.emplace_back(ru, ru, -2.0 * sys.d * ih2 + sys.r * (sys.ku - 2.0 * U - sys.a * V));
    t.emplace_back(ru, rv, -sys.r * sys.a * U);
    if (j > 1) t.emplace_back(ru, iu(j - 1), sys.d * ih2 - s.c * i2h);
    if (j + 2 < n) t.emplace_back(ru, iu(j + 1), sys.d * ih2 + s.c * i2h);
    t.emplace_back(ru, ic, (s.U[j + 1] - s.U[j - 1]) * i2h);
    // V equation
    t.emplace_back(rv, rv, -2.0 * ih2 + (sys.kv - 2.0 * V - sys.b * U));
    t.emplace_back(rv, ru, -sys.b * V);
    if (j > 1) t.emplace_back(rv, iv(j - 1), ih2 - s.c * i2h);
    if (j + 2 < n) t.emplace_back(rv, iv(j + 1), ih2 + s.c * i2h);
    t.emplace_back(rv, ic, (s.V[j + 1] - s.V[j - 1]) * i2h);
  }
  t.emplace_back(ic, iu(mesh.j0), 1.0);
  SpMat J(ic + 1, ic + 1);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

struct NewtonOutcome {
  bool ok = false;
  int iterations = 0;
  double residual = 0.0;
};

// Damped Newton on F(x) = 0 with a backtracking step on the max norm.
template <class ResidualFn, class JacobianFn, class Apply>
NewtonOutcome newton(ResidualFn&& F, JacobianFn&& J, Apply&& apply, Eigen::VectorXd& x, double tol, int max_iter) {
  NewtonOutcome out;
  Eigen::VectorXd f = F(x);
  double norm = max_abs(f);
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  int polish = 0;
  for (int it = 0; it < max_iter; ++it) {
    if (!std::isfinite(norm)) break;
    if (norm < tol) {
      // One extra step tightens the far tails, whose values sit far below tol.
      if (polish++ > 0) {
        out.ok = true;
        break;
      }
    }
    SpMat Jm = J(x);
    if (!analyzed) {
      lu.analyzePattern(Jm);
      analyzed = true;
    }
    lu.factorize(Jm);
    if (lu.info() != Eigen::Success) break;
    Eigen::VectorXd dx = lu.solve(-f);
    if (lu.info() != Eigen::Success || !dx.allFinite()) break;
    double theta = 1.0;
    bool accepted = false;
    for (int k = 0; k < 12; ++k) {
      Eigen::VectorXd xt = x + theta * dx;
      apply(xt);
      Eigen::VectorXd ft = F(xt);
      const double nt = max_abs(ft);
      if (std::isfinite(nt) && (nt < norm || nt < tol)) {
        x = std::move(xt);
        f = std::move(ft);
        norm = nt;
        accepted = true;
        break;
      }
      theta *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted) {
      out.ok = norm < tol;
      break;
    }
  }
  if (!out.ok && norm < tol) out.ok = true;
  out.residual = norm;
  return out;
}

NewtonOutcome solve_two(const System& sys, const Mesh& mesh, TwoCompState& s, double tol, int max_iter) {
  set_boundary(sys, s);
  Eigen::VectorXd x = pack(s);
  TwoCompState work = s;
  auto F = [&](const Eigen::VectorXd& y) {
    unpack(y, work);
    return residual(sys, mesh, work);
  };
  auto J = [&](const Eigen::VectorXd& y) {
    unpack(y, work);
    return jacobian(sys, mesh, work);
  };
  auto apply = [](Eigen::VectorXd&) {};
  NewtonOutcome out = newton(F, J, apply, x, tol, max_iter);
  if (out.ok) unpack(x, s);
  return out;
}

TwoCompState tanh_ansatz(const System& sys, const Mesh& mesh, double anchor) {
  TwoCompState s;
  s.U.resize(mesh.n);
  s.V.resize(mesh.n);
  const double k = 0.5 * std::sqrt(sys.r * std::max(sys.a - 1.0, 0.05) / sys.d);
  for (std::size_t j = 0; j < mesh.n; ++j) {
    const double th = std::tanh(k * (xi_at(mesh, j) - anchor));
    s.U[j] = sys.ku * 0.5 * (1.0 - th);
    s.V[j] = sys.kv * 0.5 * (1.0 + th);
  }
  s.c = 0.0;
  set_boundary(sys, s);
  return s;
}

// Resample a state onto another mesh (same anchor), holding limits outside.
TwoCompState resample(const TwoCompState& src, const Mesh& from, const Mesh& to, const System& sys) {
  TwoCompState s;
  s.U.resize(to.n);
  s.V.resize(to.n);
  s.c = src.c;
  for (std::size_t j = 0; j < to.n; ++j) {
    const double pos = (xi_at(to, j) + from.L) / from.h;
    if (pos <= 0.0) {
      s.U[j] = sys.ku;
      s.V[j] = src.V.front();
    } else if (pos >= static_cast<double>(from.n - 1)) {
      s.U[j] = src.U.back();
      s.V[j] = sys.kv;
    } else {
      const auto k = static_cast<std::size_t>(pos);
      const double w = pos - static_cast<double>(k);
      s.U[j] = (1.0 - w) * src.U[k] + w * src.U[k + 1];
      s.V[j] = (1.0 - w) * src.V[k] + w * src.V[k + 1];
    }
  }
  set_boundary(sys, s);
  return s;
}

System lerp(const System& p, const System& q, double s) {
  return {p.d + s * (q.d - p.d), p.r + s * (q.r - p.r), p.a + s * (q.a - p.a), p.b + s * (q.b - p.b), q.ku, q.kv};
}

// Linear homotopy from a symmetric system that the ansatz reaches directly.
bool continuation(const System& target, const Mesh& mesh, double anchor, double tol, int max_iter, TwoCompState& s,
                  int& steps, std::string& note) {
  const double mm = std::max(target.a, target.b);
  System start{1.0, 1.0, mm, mm, target.ku, target.kv};
  s = tanh_ansatz(start, mesh, anchor);
  if (!solve_two(start, mesh, s, tol, max_iter).ok) {
    note = "continuation: symmetric start did not converge";
    return false;
  }
  // Up to 20 accepted steps; a failed step is retried once as two half steps.
  constexpr int kSteps = 20;
  steps = 0;
  for (int k = 1; k <= kSteps; ++k) {
    const double s0 = static_cast<double>(k - 1) / kSteps;
    const double s1 = static_cast<double>(k) / kSteps;
    TwoCompState trial = s;
    if (solve_two(lerp(start, target, s1), mesh, trial, tol, max_iter).ok) {
      s = std::move(trial);
      ++steps;
      continue;
    }
    trial = s;
    const double sm = 0.5 * (s0 + s1);
    if (!solve_two(lerp(start, target, sm), mesh, trial, tol, max_iter).ok ||
        !solve_two(lerp(start, target, s1), mesh, trial, tol, max_iter).ok) {
      std::ostringstream os;
      os << "continuation: stalled at homotopy parameter " << s0;
      note = os.str();
      return false;
    }
    s = std::move(trial);
    steps += 2;
  }
  return true;
}

double monotonicity_margin(const std::vector<double>& dec, const std::vector<double>& inc) {
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < dec.size(); ++j) {
    m = std::max(m, dec[j + 1] - dec[j]);
    if (!inc.empty()) m = std::max(m, inc[j] - inc[j + 1]);
  }
  return m;
}

void fill_derivatives(const std::vector<double>& y, double h, std::vector<double>& dy) {
  const std::size_t n = y.size();
  dy.assign(n, 0.0);
  if (n < 3) return;
  for (std::size_t j = 1; j + 1 < n; ++j) dy[j] = (y[j + 1] - y[j - 1]) / (2.0 * h);
  dy[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
  dy[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
}

CharacteristicRoots roots_for(const System& sys, double c) {
  CharacteristicRoots cr;
  cr.speed = c;
  const double ku = sys.ku, kv = sys.kv;
  cr.lambda1 = opposite_sign_roots(sys.d, c, sys.r * (ku - sys.a * kv)).negative;
  cr.lambda2 = opposite_sign_roots(1.0, c, -kv).negative;
  cr.lambda3 = opposite_sign_roots(sys.d, c, -sys.r * ku).positive;
  cr.lambda4 = opposite_sign_roots(1.0, c, kv - sys.b * ku).positive;
  cr.Lambda_plus = std::max(cr.lambda1, cr.lambda2);
  cr.Lambda_minus = std::min(cr.lambda3, cr.lambda4);
  cr.gamma_plus = roots_coincide(cr.lambda1, cr.lambda2) ? 1 : 0;
  cr.gamma_minus = roots_coincide(cr.lambda3, cr.lambda4) ? 1 : 0;
  return cr;
}

bool tails_resolved(const CharacteristicRoots& cr, double L) {
  return std::exp(-cr.Lambda_minus * L) < kTailTarget && std::exp(cr.Lambda_plus * L) < kTailTarget;
}

WaveProfile solve_system(const System& sys, const ModelParams& params, WaveKind kind, double eps,
                         const WaveSolveOptions& opt) {
  Mesh mesh = make_mesh(opt.L, opt.n, opt.phase_anchor);
  std::vector<std::string> notes;
  int cont_steps = 0;

  TwoCompState s = tanh_ansatz(sys, mesh, opt.phase_anchor);
  NewtonOutcome out = solve_two(sys, mesh, s, opt.tol, opt.max_newton);
  if (!out.ok) {
    std::string why;
    bool ok = false;
    if (opt.allow_continuation) {
      notes.push_back("direct Newton failed; continuing from the symmetric case");
      ok = continuation(sys, mesh, opt.phase_anchor, opt.tol, opt.max_newton, s, cont_steps, why);
    }
    if (!ok) {
      std::ostringstream os;
      os << "wave: Newton did not converge (last residual " << out.residual << ", last speed " << s.c << ")";
      if (!why.empty()) os << "; " << why;
      fail(ErrorKind::Numerical, os.str());
    }
    out = solve_two(sys, mesh, s, opt.tol, opt.max_newton);
  }

  // Enlarge the domain while the predicted tails at +-L are not negligible.
  for (int grow = 0; opt.auto_extend && grow < 3 && !tails_resolved(roots_for(sys, s.c), mesh.L); ++grow) {
    const auto half = static_cast<std::size_t>(std::llround(1.5 * mesh.L / mesh.h));
    Mesh bigger = make_mesh(static_cast<double>(half) * mesh.h, 2 * half + 1, opt.phase_anchor);
    TwoCompState t = resample(s, mesh, bigger, sys);
    NewtonOutcome o2 = solve_two(sys, bigger, t, opt.tol, opt.max_newton);
    if (!o2.ok) break;
    std::ostringstream os;
    os << "domain enlarged to L = " << bigger.L << " to resolve the tails";
    notes.push_back(os.str());
    mesh = bigger;
    s = std::move(t);
    out = o2;
  }

  WaveProfile p;
  p.kind = kind;
  p.params = params;
  p.speed = s.c;
  p.epsilon = eps;
  p.L = mesh.L;
  p.h = mesh.h;
  p.xi.resize(mesh.n);
  for (std::size_t j = 0; j < mesh.n; ++j) p.xi[j] = xi_at(mesh, j);
  p.xi[mesh.j0] = opt.phase_anchor;
  p.U = std::move(s.U);
  p.V = std::move(s.V);
  fill_derivatives(p.U, p.h, p.dU);
  fill_derivatives(p.V, p.h, p.dV);
  p.phase_anchor = opt.phase_anchor;
  p.left_U = sys.ku;
  p.left_V = 0.0;
  p.right_U = 0.0;
  p.right_V = sys.kv;
  p.residual = out.residual;
  p.newton_iterations = out.iterations;
  p.continuation_steps = cont_steps;
  p.monotonicity_margin = monotonicity_margin(p.U, p.V);
  p.notes = std::move(notes);
  if (p.monotonicity_margin > kMonotoneTol) {
    std::ostringstream os;
    os << "wave: converged profile is not monotone (margin " << p.monotonicity_margin << "); rejected as spurious";
    fail(ErrorKind::Numerical, os.str());
  }
  return p;
}

}  // namespace

WaveProfile solve_bistable_wave(const ModelParams& params, const WaveSolveOptions& opt) {
  params.validate();
  if (!params.strong_competition()) fail(ErrorKind::Precondition, "strong competition: bistable front needs a > 1 and b > 1");
  return solve_system(System{params.d, params.r, params.a, params.b, 1.0, 1.0}, params, WaveKind::Bistable, 0.0, opt);
}

bool perturbed_is_bistable(const ModelParams& p, double eps) noexcept {
  return eps >= 0.0 && eps < 1.0 && p.a * (1.0 + eps) > 1.0 - eps && p.b * (1.0 - eps) > 1.0 + eps;
}

CharacteristicRoots perturbed_roots(const ModelParams& params, double eps, double c) {
  params.validate();
  if (!perturbed_is_bistable(params, eps)) fail(ErrorKind::Precondition, "perturbed system is not bistable");
  return roots_for(System{params.d, params.r, params.a, params.b, 1.0 - eps, 1.0 + eps}, c);
}

WaveProfile solve_perturbed_wave(const ModelParams& params, double eps, const WaveSolveOptions& opt) {
  params.validate();
  if (!params.strong_competition()) fail(ErrorKind::Precondition, "strong competition: bistable front needs a > 1 and b > 1");
  if (!perturbed_is_bistable(params, eps)) {
    std::ostringstream os;
    os << "bistability: eps = " << eps << " violates a(1+eps) > 1-eps or b(1-eps) > 1+eps";
    fail(ErrorKind::Precondition, os.str());
  }
  const System sys{params.d, params.r, params.a, params.b, 1.0 - eps, 1.0 + eps};
  return solve_system(sys, params, WaveKind::PerturbedBistable, eps, opt);
}

// --- KPP --------------------------------------------------------------------

WaveProfile solve_kpp_profile(double d, double r, double c, const WaveSolveOptions& opt) {
  if (!(d > 0.0) || !(r > 0.0)) fail(ErrorKind::InvalidParameter, "positivity: d and r must be > 0");
  const double cmin = 2.0 * std::sqrt(r * d);
  if (c < cmin * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "kpp: speed " << c << " is below the minimal speed " << cmin;
    fail(ErrorKind::Precondition, os.str());
  }
  const Mesh mesh = make_mesh(opt.L, opt.n, opt.phase_anchor);
  const std::size_t n = mesh.n;
  const double h = mesh.h, ih2 = 1.0 / (h * h), i2h = 0.5 / h;

  // Unknowns w_1..w_{n-2} and the right boundary value beta, fixed by the phase.
  const double disc = std::max(c * c - 4.0 * r * d, 0.0);
  const double rate = (c - std::sqrt(disc)) / (2.0 * d);  // slow decay rate at +infinity
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = 0.5 * (1.0 - std::tanh(0.5 * rate * (xi_at(mesh, j) - opt.phase_anchor)));
  w[0] = 1.0;

  const std::size_t m = n - 2;
  Eigen::VectorXd x(m + 1);
  for (std::size_t j = 1; j + 1 < n; ++j) x[j - 1] = w[j];
  x[m] = w[n - 1];
  auto unpackw = [&](const Eigen::VectorXd& y) {
    for (std::size_t j = 1; j + 1 < n; ++j) w[j] = y[j - 1];
    w[n - 1] = y[m];
  };
  auto F = [&](const Eigen::VectorXd& y) {
    unpackw(y);
    Eigen::VectorXd f(m + 1);
    for (std::size_t j = 1; j + 1 < n; ++j) {
      f[j - 1] = d * (w[j + 1] - 2.0 * w[j] + w[j - 1]) * ih2 + c * (w[j + 1] - w[j - 1]) * i2h + r * w[j] * (1.0 - w[j]);
    }
    f[m] = w[mesh.j0] - 0.5;
    return f;
  };
  auto J = [&](const Eigen::VectorXd& y) {
    unpackw(y);
    std::vector<Triplet> t;
    t.reserve(3 * m + 2);
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const int row = static_cast<int>(j - 1);
      t.emplace_back(row, row, -2.0 * d * ih2 + r * (1.0 - 2.0 * w[j]));
      if (j > 1) t.emplace_back(row, row - 1, d * ih2 - c * i2h);
      // the last interior node couples to beta, which sits in column m
      t.emplace_back(row, j + 2 < n ? row + 1 : static_cast<int>(m), d * ih2 + c * i2h);
    }
    t.emplace_back(static_cast<int>(m), static_cast<int>(mesh.j0 - 1), 1.0);
    SpMat Jm(static_cast<int>(m + 1), static_cast<int>(m + 1));
    Jm.setFromTriplets(t.begin(), t.end());
    return Jm;
  };
  auto apply = [](Eigen::VectorXd&) {};
  const NewtonOutcome out = newton(F, J, apply, x, opt.tol, opt.max_newton);
  if (!out.ok) {
    std::ostringstream os;
    os << "kpp: Newton did not converge (last residual " << out.residual << ")";
    fail(ErrorKind::Numerical, os.str());
  }
  unpackw(x);

  WaveProfile p;
  p.kind = WaveKind::KppU;
  p.params = ModelParams{d, r, 1.0, 1.0};
  p.speed = c;
  p.L = mesh.L;
  p.h = h;
  p.xi.resize(n);
  for (std::size_t j = 0; j < n; ++j) p.xi[j] = xi_at(mesh, j);
  p.xi[mesh.j0] = opt.phase_anchor;
  p.U = w;
  p.V.assign(n, 0.0);
  fill_derivatives(p.U, h, p.dU);
  p.dV.assign(n, 0.0);
  p.phase_anchor = opt.phase_anchor;
  p.left_U = 1.0;
  p.left_V = 0.0;
  p.right_U = 0.0;
  p.right_V = 0.0;
  p.residual = out.residual;
  p.newton_iterations = out.iterations;
  p.monotonicity_margin = monotonicity_margin(p.U, {});
  if (p.monotonicity_margin > kMonotoneTol) {
    std::ostringstream os;
    os << "kpp: converged profile is not monotone (margin " << p.monotonicity_margin << ")";
    fail(ErrorKind::Numerical, os.str());
  }
  return p;
}

// --- tails --------------------------------------------------------------------

double DecayFit::relative_deviation() const noexcept {
  if (!valid || predicted_rate == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(measured_rate - predicted_rate) / std::abs(predicted_rate);
}

namespace {

bool is_kpp(const WaveProfile& p) { return p.kind == WaveKind::KppU || p.kind == WaveKind::KppV; }

Side side_of(TailQuantity q) {
  return (q == TailQuantity::U_Plus || q == TailQuantity::VDeficit_Plus) ? Side::PlusInfinity : Side::MinusInfinity;
}

bool is_deficit(TailQuantity q) { return q == TailQuantity::VDeficit_Plus || q == TailQuantity::UDeficit_Minus; }

double tail_sample(const WaveProfile& p, TailQuantity q, std::size_t j) {
  switch (q) {
    case TailQuantity::U_Plus: return p.U[j];
    case TailQuantity::VDeficit_Plus: return p.right_V - p.V[j];
    case TailQuantity::V_Minus: return p.V[j];
    case TailQuantity::UDeficit_Minus: return p.left_U - p.U[j];
  }
  return 0.0;
}

// Deficits are differences of O(1) numbers, so they lose relative accuracy sooner.
double tail_floor(TailQuantity q) { return is_deficit(q) ? 1e-9 : 1e-12; }
constexpr double kTailCeiling = 1e-3;

}  // namespace

DecayFit fit_tail_decay(const WaveProfile& profile, const CharacteristicRoots& roots, TailQuantity quantity) {
  DecayFit fit;
  fit.quantity = quantity;
  fit.side = side_of(quantity);
  const bool kpp = is_kpp(profile);
  switch (quantity) {
    case TailQuantity::U_Plus:
      fit.predicted_rate = roots.lambda1;
      fit.gamma = kpp ? roots.gamma_plus : 0;
      break;
    case TailQuantity::VDeficit_Plus:
      fit.predicted_rate = roots.Lambda_plus;
      fit.gamma = roots.gamma_plus;
      break;
    case TailQuantity::V_Minus:
      fit.predicted_rate = roots.lambda4;
      fit.gamma = 0;
      break;
    case TailQuantity::UDeficit_Minus:
      fit.predicted_rate = roots.Lambda_minus;
      fit.gamma = roots.gamma_minus;
      break;
  }
  if (kpp && (quantity == TailQuantity::VDeficit_Plus || quantity == TailQuantity::V_Minus)) {
    fit.reason = "single-species profile has no V tail";
    return fit;
  }
  const std::size_t n = profile.size();
  if (n < 3) {
    fit.reason = "profile too short";
    return fit;
  }
  const double lo = profile.xi.front(), hi = profile.xi.back();
  const double cut = 0.1 * (hi - lo);
  const double floor = std::max(tail_floor(quantity), 10.0 * std::numeric_limits<double>::epsilon());
  const bool plus = fit.side == Side::PlusInfinity;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  double wlo = std::numeric_limits<double>::infinity(), whi = -wlo;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = profile.xi[j];
    if (plus ? (x > hi - cut || x <= 0.0) : (x < lo + cut || x >= 0.0)) continue;
    const double q = tail_sample(profile, quantity, j);
    if (!(q >= floor && q <= kTailCeiling)) continue;
    double y = std::log(q);
    if (fit.gamma == 1) y -= std::log(std::abs(x));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
    wlo = std::min(wlo, x);
    whi = std::max(whi, x);
  }
  fit.samples = k;
  if (k < 30) {
    std::ostringstream os;
    os << "tail underflow: only " << k << " usable samples (need 30)";
    fit.reason = os.str();
    return fit;
  }
  const double kk = static_cast<double>(k);
  const double den = kk * sxx - sx * sx;
  if (!(den > 0.0)) {
    fit.reason = "degenerate fit window";
    return fit;
  }
  fit.measured_rate = (kk * sxy - sx * sy) / den;
  fit.amplitude = std::exp((sy - fit.measured_rate * sx) / kk);
  fit.window_lo = wlo;
  fit.window_hi = whi;
  fit.valid = true;
  return fit;
}

DecayFit fit_tail_decay(const WaveProfile& profile, const CharacteristicRoots& roots, Side side) {
  return fit_tail_decay(profile, roots, side == Side::PlusInfinity ? TailQuantity::U_Plus : TailQuantity::V_Minus);
}

// --- evaluation -----------------------------------------------------------------

namespace {

// Quantities below this level are taken from the tail model.
constexpr double kSwitchLevel = 1e-7;

CharacteristicRoots profile_roots(const WaveProfile& p) {
  switch (p.kind) {
    case WaveKind::Bistable: return char_roots(p.params, p.speed);
    case WaveKind::PerturbedBistable: return perturbed_roots(p.params, p.epsilon, p.speed);
    case WaveKind::KppU:
    case WaveKind::KppV: {
      const double d = p.params.d, r = p.params.r, c = p.speed;
      CharacteristicRoots cr;
      cr.speed = c;
      const double disc = std::max(c * c - 4.0 * r * d, 0.0);
      cr.lambda1 = -(c - std::sqrt(disc)) / (2.0 * d);
      cr.lambda2 = cr.lambda1;
      cr.lambda3 = opposite_sign_roots(d, c, -r).positive;
      cr.lambda4 = cr.lambda3;
      cr.Lambda_plus = cr.lambda1;
      cr.Lambda_minus = cr.lambda3;
      cr.gamma_plus = disc <= 1e-12 * c * c ? 1 : 0;
      cr.gamma_minus = 0;
      return cr;
    }
  }
  return {};
}

}  // namespace

double WaveEvaluator::Tail::value(double x) const {
  double v = anchor_q * std::exp(rate * (x - anchor_xi));
  if (gamma == 1) v *= std::abs(x) / std::abs(anchor_xi);
  return v;
}

double WaveEvaluator::Tail::slope(double x) const {
  double s = rate;
  if (gamma == 1) s += 1.0 / x;
  return value(x) * s;
}

WaveEvaluator::WaveEvaluator(const WaveProfile& profile) : profile_(&profile) {
  if (profile.size() < 4) fail(ErrorKind::Precondition, "evaluator: profile has too few samples");
  const CharacteristicRoots cr = profile_roots(profile);
  const bool kpp = is_kpp(profile);
  const std::size_t n = profile.size();
  for (int qi = 0; qi < 4; ++qi) {
    const auto q = static_cast<TailQuantity>(qi);
    Tail& t = tails_[qi];
    if (kpp && (q == TailQuantity::VDeficit_Plus || q == TailQuantity::V_Minus)) continue;
    t.fit = fit_tail_decay(profile, cr, q);
    const bool plus = side_of(q) == Side::PlusInfinity;
    // Innermost sample (walking outward from the phase) below the switch level.
    std::optional<std::size_t> idx;
    if (plus) {
      for (std::size_t j = 0; j < n; ++j) {
        if (profile.xi[j] > 0.0 && tail_sample(profile, q, j) < kSwitchLevel) {
          idx = j;
          break;
        }
      }
    } else {
      for (std::size_t j = n; j-- > 0;) {
        if (profile.xi[j] < 0.0 && tail_sample(profile, q, j) < kSwitchLevel) {
          idx = j;
          break;
        }
      }
    }
    if (!idx) idx = plus ? n - 1 : 0;
    const double qs = tail_sample(profile, q, *idx);
    if (!(qs > 0.0)) continue;  // value already exactly at its limit
    t.present = true;
    t.anchor_xi = profile.xi[*idx];
    t.anchor_q = qs;
    t.rate = t.fit.valid ? t.fit.measured_rate : t.fit.predicted_rate;
    t.gamma = t.fit.gamma;
  }
}

void WaveEvaluator::hermite(double x, double& U, double& Up, double& V, double& Vp) const {
  const WaveProfile& p = *profile_;
  const std::size_t n = p.size();
  const double h = p.h;
  double pos = (x - p.xi.front()) / h;
  pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
  auto k = static_cast<std::size_t>(pos);
  if (k >= n - 1) k = n - 2;
  const double s = pos - static_cast<double>(k);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double g00 = (6 * s2 - 6 * s) / h, g10 = 3 * s2 - 4 * s + 1, g01 = (-6 * s2 + 6 * s) / h, g11 = 3 * s2 - 2 * s;
  U = h00 * p.U[k] + h10 * h * p.dU[k] + h01 * p.U[k + 1] + h11 * h * p.dU[k + 1];
  Up = g00 * p.U[k] + g10 * p.dU[k] + g01 * p.U[k + 1] + g11 * p.dU[k + 1];
  V = h00 * p.V[k] + h10 * h * p.dV[k] + h01 * p.V[k + 1] + h11 * h * p.dV[k + 1];
  Vp = g00 * p.V[k] + g10 * p.dV[k] + g01 * p.V[k + 1] + g11 * p.dV[k + 1];
}

WaveSample WaveEvaluator::operator()(double x) const {
  const WaveProfile& p = *profile_;
  if (!std::isfinite(x)) fail(ErrorKind::Precondition, "evaluator: xi must be finite");
  WaveSample w{};
  double U, Up, V, Vp;
  hermite(x, U, Up, V, Vp);
  w.U = U;
  w.Up = Up;
  w.V = V;
  w.Vp = Vp;
  w.DU = p.left_U - U;
  w.DV = p.right_V - V;

  const Tail& up = tails_[static_cast<int>(TailQuantity::U_Plus)];
  const Tail& vd = tails_[static_cast<int>(TailQuantity::VDeficit_Plus)];
  const Tail& vm = tails_[static_cast<int>(TailQuantity::V_Minus)];
  const Tail& ud = tails_[static_cast<int>(TailQuantity::UDeficit_Minus)];

  if (up.present && x > up.anchor_xi) {
    w.U = up.value(x);
    w.Up = up.slope(x);
    w.DU = p.left_U - w.U;
  }
  if (ud.present && x < ud.anchor_xi) {
    w.DU = ud.value(x);
    w.U = p.left_U - w.DU;
    w.Up = -ud.slope(x);
  }
  if (vd.present && x > vd.anchor_xi) {
    w.DV = vd.value(x);
    w.V = p.right_V - w.DV;
    w.Vp = -vd.slope(x);
  }
  if (vm.present && x < vm.anchor_xi) {
    w.V = vm.value(x);
    w.Vp = vm.slope(x);
    w.DV = p.right_V - w.V;
  }
  return w;
}

double wave_equation_residual(const WaveProfile& p) {
  const std::size_t n = p.size();
  const double h = p.h;
  double worst = 0.0;
  const double ku = p.left_U;
  const double kv = p.kind == WaveKind::PerturbedBistable ? p.right_V : 1.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double Ux = (p.U[j + 1] - p.U[j - 1]) / (2 * h);
    const double Uxx = (p.U[j + 1] - 2 * p.U[j] + p.U[j - 1]) / (h * h);
    if (is_kpp(p)) {
      worst = std::max(worst, std::abs(p.params.d * Uxx + p.speed * Ux + p.params.r * p.U[j] * (1.0 - p.U[j])));
      continue;
    }
    const double Vx = (p.V[j + 1] - p.V[j - 1]) / (2 * h);
    const double Vxx = (p.V[j + 1] - 2 * p.V[j] + p.V[j - 1]) / (h * h);
    const auto& m = p.params;
    const double fu = p.speed * Ux + m.d * Uxx + m.r * p.U[j] * (ku - p.U[j] - m.a * p.V[j]);
    const double fv = p.speed * Vx + Vxx + p.V[j] * (kv - p.V[j] - m.b * p.U[j]);
    worst = std::max({worst, std::abs(fu), std::abs(fv)});
  }
  return worst;
}

}  // namespace lvf
