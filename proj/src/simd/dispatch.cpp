#include <atomic>
#include <cstdlib>
#include <string>

#include "tables.hpp"

namespace joco::simd {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(JOCO_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(JOCO_HAVE_NEON)
      return true;  // baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &detail::kScalarTable;
    case Isa::kAvx2:
#if defined(JOCO_HAVE_AVX2)
      return &detail::kAvx2Table;
#else
      return nullptr;
#endif
    case Isa::kNeon:
#if defined(JOCO_HAVE_NEON)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{table_for(detect_isa())};
  return slot;
}

}  // namespace

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* kernels_for(Isa isa) {
  return cpu_supports(isa) ? table_for(isa) : nullptr;
}

Isa detect_isa() {
  if (const char* forced = std::getenv("JOCO_SIMD")) {
    const std::string want(forced);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && cpu_supports(Isa::kAvx2)) return Isa::kAvx2;
    if (want == "neon" && cpu_supports(Isa::kNeon)) return Isa::kNeon;
  }
  if (cpu_supports(Isa::kAvx2)) return Isa::kAvx2;
  if (cpu_supports(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

const KernelTable& active() {
  return *active_slot().load(std::memory_order_relaxed);
}

bool set_active(Isa isa) {
  const KernelTable* t = kernels_for(isa);
  if (t == nullptr) return false;
  active_slot().store(t, std::memory_order_relaxed);
  return true;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

}  // namespace joco::simd
