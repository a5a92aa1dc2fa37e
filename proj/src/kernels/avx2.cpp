// Built with -mavx2 (and without -mfma) on x86-64; see src/CMakeLists.txt.

#include "lvfront/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#endif

namespace lvf::kernels::avx2 {

#if defined(__AVX2__)

bool compiled() noexcept { return true; }

void step_interior(const double* u, const double* v, double* un, double* vn, std::size_t n, const StepCoeffs& k) {
  if (n < 3) return;
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d lu = _mm256_set1_pd(k.lu);
  const __m256d lv = _mm256_set1_pd(k.lv);
  const __m256d ru = _mm256_set1_pd(k.ru);
  const __m256d rv = _mm256_set1_pd(k.rv);
  const __m256d a = _mm256_set1_pd(k.a);
  const __m256d b = _mm256_set1_pd(k.b);

  std::size_t i = 1;
  const std::size_t last = n - 1;
  for (; i + 4 <= last; i += 4) {
    const __m256d um = _mm256_loadu_pd(u + i - 1);
    const __m256d uc = _mm256_loadu_pd(u + i);
    const __m256d up = _mm256_loadu_pd(u + i + 1);
    const __m256d vm = _mm256_loadu_pd(v + i - 1);
    const __m256d vc = _mm256_loadu_pd(v + i);
    const __m256d vp = _mm256_loadu_pd(v + i + 1);

    // u + lu*((um - 2u) + up) + (ru*u)*((1 - u) - a*v)
    __m256d du = _mm256_add_pd(_mm256_sub_pd(um, _mm256_mul_pd(two, uc)), up);
    du = _mm256_mul_pd(lu, du);
    __m256d fu = _mm256_sub_pd(_mm256_sub_pd(one, uc), _mm256_mul_pd(a, vc));
    fu = _mm256_mul_pd(_mm256_mul_pd(ru, uc), fu);
    _mm256_storeu_pd(un + i, _mm256_add_pd(_mm256_add_pd(uc, du), fu));

    __m256d dv = _mm256_add_pd(_mm256_sub_pd(vm, _mm256_mul_pd(two, vc)), vp);
    dv = _mm256_mul_pd(lv, dv);
    __m256d gv = _mm256_sub_pd(_mm256_sub_pd(one, vc), _mm256_mul_pd(b, uc));
    gv = _mm256_mul_pd(_mm256_mul_pd(rv, vc), gv);
    _mm256_storeu_pd(vn + i, _mm256_add_pd(_mm256_add_pd(vc, dv), gv));
  }
  for (; i < last; ++i) {
    step_node(u[i - 1], u[i], u[i + 1], v[i - 1], v[i], v[i + 1], k, un[i], vn[i]);
  }
}

namespace {
double hmax(__m256d x) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, x);
  return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}
}  // namespace

double max_excess(const double* x, const double* y, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d acc = _mm256_set1_pd(m);
    for (; i + 4 <= n; i += 4) {
      acc = _mm256_max_pd(acc, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    m = hmax(acc);
  }
  for (; i < n; ++i) m = std::max(m, x[i] - y[i]);
  return m;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  double m = 0.0;
  std::size_t i = 0;
  if (n >= 4) {
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
      const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
      acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, diff));
    }
    m = hmax(acc);
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

}  // namespace lvf::kernels::avx2
