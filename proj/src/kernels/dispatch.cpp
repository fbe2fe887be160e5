#include <atomic>
#include <cstdlib>
#include <string>

#include "snntrain/error.hpp"
#include "snntrain/kernels.hpp"

namespace snntrain::kernels {

#if defined(SNNTRAIN_WITH_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(SNNTRAIN_WITH_NEON)
const KernelTable& neon_table() noexcept;
#endif

const KernelTable* avx2_kernels() noexcept {
#if defined(SNNTRAIN_WITH_AVX2)
  if (__builtin_cpu_supports("avx2")) return &avx2_table();
#endif
  return nullptr;
}

const KernelTable* neon_kernels() noexcept {
#if defined(SNNTRAIN_WITH_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return &neon_table();
#else
  return nullptr;
#endif
}

KernelChoice parse_choice(std::string_view name) {
  if (name == "auto") return KernelChoice::Auto;
  if (name == "scalar") return KernelChoice::Scalar;
  if (name == "avx2") return KernelChoice::Avx2;
  if (name == "neon") return KernelChoice::Neon;
  throw ArgumentError("unknown kernel variant '" + std::string(name) + "' (auto|scalar|avx2|neon)");
}

const KernelTable& resolve(KernelChoice choice) {
  switch (choice) {
    case KernelChoice::Scalar: return scalar_kernels();
    case KernelChoice::Avx2:
      if (const auto* k = avx2_kernels()) return *k;
      throw ArgumentError("avx2 kernels are not available on this machine");
    case KernelChoice::Neon:
      if (const auto* k = neon_kernels()) return *k;
      throw ArgumentError("neon kernels are not available on this machine");
    case KernelChoice::Auto: break;
  }
  if (const auto* k = avx2_kernels()) return *k;
  if (const auto* k = neon_kernels()) return *k;
  return scalar_kernels();
}

namespace {

const KernelTable* initial_table() {
  const char* env = std::getenv("SNNTRAIN_KERNELS");
  if (env == nullptr || *env == '\0') return &resolve(KernelChoice::Auto);
  try {
    return &resolve(parse_choice(env));
  } catch (const ArgumentError&) {
    return &resolve(KernelChoice::Auto);
  }
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

void set_active(KernelChoice choice) { slot().store(&resolve(choice), std::memory_order_release); }

}  // namespace snntrain::kernels
