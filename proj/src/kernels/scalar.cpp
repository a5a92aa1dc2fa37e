#include <algorithm>
#include <cmath>
#include <limits>

#include "lvfront/kernels.hpp"

namespace lvf::kernels::scalar {

void step_interior(const double* u, const double* v, double* un, double* vn, std::size_t n, const StepCoeffs& k) {
  if (n < 3) return;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    step_node(u[i - 1], u[i], u[i + 1], v[i - 1], v[i], v[i + 1], k, un[i], vn[i]);
  }
}

double max_excess(const double* x, const double* y, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i] - y[i]);
  return m;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace lvf::kernels::scalar
