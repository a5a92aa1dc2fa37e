#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "lvfront/kernels.hpp"

using namespace lvf::kernels;

namespace {

bool bits_equal(const std::vector<double>& x, const std::vector<double>& y) {
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

std::vector<double> random_field(std::mt19937_64& rng, std::size_t n, double hi) {
  std::uniform_real_distribution<double> U(0.0, hi);
  std::vector<double> f(n);
  for (auto& x : f) x = U(rng);
  return f;
}

std::vector<const KernelTable*> simd_tables() {
  std::vector<const KernelTable*> out;
  for (Isa isa : {Isa::Avx2, Isa::Neon})
    if (const KernelTable* t = table_for(isa)) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("scalar table always available") {
  const KernelTable* t = table_for(Isa::Scalar);
  REQUIRE(t != nullptr);
  CHECK(t->isa == Isa::Scalar);
  MESSAGE("active kernels: " << to_string(active().isa));
}

TEST_CASE("step kernel matches the node formula") {
  std::mt19937_64 rng(1);
  const std::size_t n = 37;
  const auto u = random_field(rng, n, 1.5), v = random_field(rng, n, 1.5);
  const StepCoeffs k{0.4, 0.4, 0.004, 0.004, 2.0, 3.0};
  std::vector<double> un(n, -1.0), vn(n, -1.0);
  scalar::step_interior(u.data(), v.data(), un.data(), vn.data(), n, k);
  CHECK(un[0] == -1.0);
  CHECK(vn[n - 1] == -1.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double eu, ev;
    step_node(u[i - 1], u[i], u[i + 1], v[i - 1], v[i], v[i + 1], k, eu, ev);
    CHECK(un[i] == eu);
    CHECK(vn[i] == ev);
  }
}

TEST_CASE("SIMD step kernels are bit-identical to scalar") {
  std::mt19937_64 rng(2);
  const auto tables = simd_tables();
  if (tables.empty()) MESSAGE("no SIMD kernels on this machine");
  for (const KernelTable* t : tables) {
    for (std::size_t n : {3u, 4u, 5u, 6u, 7u, 8u, 9u, 17u, 64u, 1001u, 4097u}) {
      const auto u = random_field(rng, n, 1.2), v = random_field(rng, n, 1.2);
      const StepCoeffs k{0.37, 0.21, 0.0041, 0.0039, 2.3, 17.0};
      std::vector<double> su(n, 0.0), sv(n, 0.0), tu(n, 0.0), tv(n, 0.0);
      scalar::step_interior(u.data(), v.data(), su.data(), sv.data(), n, k);
      t->step_interior(u.data(), v.data(), tu.data(), tv.data(), n, k);
      CHECK_MESSAGE(bits_equal(su, tu), to_string(t->isa) << " n=" << n);
      CHECK_MESSAGE(bits_equal(sv, tv), to_string(t->isa) << " n=" << n);
    }
  }
}

TEST_CASE("SIMD reductions agree with scalar") {
  std::mt19937_64 rng(3);
  for (const KernelTable* t : simd_tables()) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 31u, 1000u}) {
      const auto x = random_field(rng, n, 2.0), y = random_field(rng, n, 2.0);
      CHECK(t->max_excess(x.data(), y.data(), n) == scalar::max_excess(x.data(), y.data(), n));
      CHECK(t->max_abs_diff(x.data(), y.data(), n) == scalar::max_abs_diff(x.data(), y.data(), n));
    }
  }
}

TEST_CASE("reduction edge cases") {
  CHECK(scalar::max_excess(nullptr, nullptr, 0) == -std::numeric_limits<double>::infinity());
  CHECK(scalar::max_abs_diff(nullptr, nullptr, 0) == 0.0);
  const std::vector<double> x{1.0, 5.0, 2.0}, y{2.0, 1.0, 4.0};
  CHECK(max_excess(x, y) == 4.0);
  CHECK(max_abs_diff(x, y) == 4.0);
}
