#include <cstdlib>
#include <string>

#include "lvfront/kernels.hpp"

namespace lvf::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

constexpr KernelTable kScalar{Isa::Scalar, scalar::step_interior, scalar::max_excess, scalar::max_abs_diff};
constexpr KernelTable kAvx2{Isa::Avx2, avx2::step_interior, avx2::max_excess, avx2::max_abs_diff};
constexpr KernelTable kNeon{Isa::Neon, neon::step_interior, neon::max_excess, neon::max_abs_diff};

const KernelTable& select() {
  // LVFRONT_ISA=scalar pins the reference path, e.g. for bisecting a mismatch.
  if (const char* env = std::getenv("LVFRONT_ISA"); env != nullptr && std::string(env) == "scalar") {
    return kScalar;
  }
  if (const KernelTable* t = table_for(Isa::Avx2)) return *t;
  if (const KernelTable* t = table_for(Isa::Neon)) return *t;
  return kScalar;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &kScalar;
    case Isa::Avx2: return avx2::compiled() && cpu_has_avx2() ? &kAvx2 : nullptr;
    case Isa::Neon: return neon::compiled() ? &kNeon : nullptr;
  }
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace lvf::kernels
