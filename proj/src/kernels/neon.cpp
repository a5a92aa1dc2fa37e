#include "lvfront/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

#include <algorithm>
#include <cmath>
#include <limits>
#endif

namespace lvf::kernels::neon {

#if defined(__aarch64__) && defined(__ARM_NEON)

bool compiled() noexcept { return true; }

// Explicit vmulq/vaddq keep the rounding sequence of the scalar reference;
// vfmaq would not.
void step_interior(const double* u, const double* v, double* un, double* vn, std::size_t n, const StepCoeffs& k) {
  if (n < 3) return;
  const float64x2_t two = vdupq_n_f64(2.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t lu = vdupq_n_f64(k.lu);
  const float64x2_t lv = vdupq_n_f64(k.lv);
  const float64x2_t ru = vdupq_n_f64(k.ru);
  const float64x2_t rv = vdupq_n_f64(k.rv);
  const float64x2_t a = vdupq_n_f64(k.a);
  const float64x2_t b = vdupq_n_f64(k.b);

  std::size_t i = 1;
  const std::size_t last = n - 1;
  for (; i + 2 <= last; i += 2) {
    const float64x2_t um = vld1q_f64(u + i - 1);
    const float64x2_t uc = vld1q_f64(u + i);
    const float64x2_t up = vld1q_f64(u + i + 1);
    const float64x2_t vm = vld1q_f64(v + i - 1);
    const float64x2_t vc = vld1q_f64(v + i);
    const float64x2_t vp = vld1q_f64(v + i + 1);

    float64x2_t du = vmulq_f64(lu, vaddq_f64(vsubq_f64(um, vmulq_f64(two, uc)), up));
    float64x2_t fu = vmulq_f64(vmulq_f64(ru, uc), vsubq_f64(vsubq_f64(one, uc), vmulq_f64(a, vc)));
    vst1q_f64(un + i, vaddq_f64(vaddq_f64(uc, du), fu));

    float64x2_t dv = vmulq_f64(lv, vaddq_f64(vsubq_f64(vm, vmulq_f64(two, vc)), vp));
    float64x2_t gv = vmulq_f64(vmulq_f64(rv, vc), vsubq_f64(vsubq_f64(one, vc), vmulq_f64(b, uc)));
    vst1q_f64(vn + i, vaddq_f64(vaddq_f64(vc, dv), gv));
  }
  for (; i < last; ++i) {
    step_node(u[i - 1], u[i], u[i + 1], v[i - 1], v[i], v[i + 1], k, un[i], vn[i]);
  }
}

double max_excess(const double* x, const double* y, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 2) {
    float64x2_t acc = vdupq_n_f64(m);
    for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    m = vmaxvq_f64(acc);
  }
  for (; i < n; ++i) m = std::max(m, x[i] - y[i]);
  return m;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
  double m = 0.0;
  std::size_t i = 0;
  if (n >= 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    m = vmaxvq_f64(acc);
  }
  for (; i < n; ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

#else

bool compiled() noexcept { return false; }
void step_interior(const double* u, const double* v, double* un, double* vn, std::size_t n, const StepCoeffs& k) {
  scalar::step_interior(u, v, un, vn, n, k);
}
double max_excess(const double* x, const double* y, std::size_t n) { return scalar::max_excess(x, y, n); }
double max_abs_diff(const double* x, const double* y, std::size_t n) { return scalar::max_abs_diff(x, y, n); }

#endif

}  // namespace lvf::kernels::neon
