#pragma once

// Data-parallel inner loops of the explicit scheme and of the trajectory
// reductions. Every kernel has a scalar reference implementation; SIMD
// variants evaluate the same expression tree in the same order (no fused
// multiply-add), so their results are bit-identical to the reference.

#include <cstddef>
#include <span>
#include <string_view>

namespace lvf::kernels {

/// Coefficients of one forward-Euler update of both species.
///
///   u' = u + lu ((u_- - 2u) + u_+) + (ru u) ((1 - u) - a v)
///   v' = v + lv ((v_- - 2v) + v_+) + (rv v) ((1 - v) - b u)
struct StepCoeffs {
  double lu;  // d dt / dx^2
  double lv;  // dt / dx^2
  double ru;  // r dt
  double rv;  // dt
  double a;
  double b;
};

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

using StepInteriorFn = void (*)(const double* u, const double* v, double* un, double* vn, std::size_t n,
                                const StepCoeffs& k);
using ReduceFn = double (*)(const double* x, const double* y, std::size_t n);

struct KernelTable {
  Isa isa;
  // Updates nodes 1..n-2 from u, v into un, vn. Nodes 0 and n-1 are untouched.
  StepInteriorFn step_interior;
  // max_i (x_i - y_i); -infinity for n == 0.
  ReduceFn max_excess;
  // max_i |x_i - y_i|; 0 for n == 0.
  ReduceFn max_abs_diff;
};

/// Table for the best instruction set supported by the running CPU.
const KernelTable& active();

/// Table for a specific instruction set; nullptr when it is not compiled in
/// or not supported by the running CPU.
const KernelTable* table_for(Isa isa);

/// Single-node update shared by the boundary closure and the scalar kernel.
inline void step_node(double um, double u, double up, double vm, double v, double vp, const StepCoeffs& k,
                      double& un, double& vn) {
  un = u + k.lu * ((um - 2.0 * u) + up) + (k.ru * u) * ((1.0 - u) - k.a * v);
  vn = v + k.lv * ((vm - 2.0 * v) + vp) + (k.rv * v) * ((1.0 - v) - k.b * u);
}

namespace scalar {
void step_interior(const double* u, const double* v, double* un, double* vn, std::size_t n, const StepCoeffs& k);
double max_excess(const double* x, const double* y, std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
void step_interior(const double* u, const double* v, double* un, double* vn, std::size_t n, const StepCoeffs& k);
double max_excess(const double* x, const double* y, std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
}  // namespace avx2

namespace neon {
bool compiled() noexcept;
void step_interior(const double* u, const double* v, double* un, double* vn, std::size_t n, const StepCoeffs& k);
double max_excess(const double* x, const double* y, std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
}  // namespace neon

// Span conveniences over the active table.
inline double max_excess(std::span<const double> x, std::span<const double> y) {
  return active().max_excess(x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}
inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  return active().max_abs_diff(x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

}  // namespace lvf::kernels
