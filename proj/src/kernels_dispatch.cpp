#include <atomic>
#include <cstdlib>
#include <string_view>

#include "ncot/kernels.hpp"

namespace ncot::kernels {

const KernelTable* avx2_table_unchecked();

namespace {

bool host_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve_default() {
  if (const char* env = std::getenv("NCOT_SIMD")) {
    if (std::string_view(env) == "scalar") return &scalar_table();
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{resolve_default()};
  return current;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable* table = host_has_avx2() ? avx2_table_unchecked() : nullptr;
  return table;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select(Isa isa) {
  const KernelTable* t = isa == Isa::Scalar ? &scalar_table() : avx2_table();
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace ncot::kernels
