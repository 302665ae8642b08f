#include <atomic>
#include <cstdlib>
#include <string>

#include "ienergy/kernels.hpp"

namespace ienergy::kernels {

#ifndef IENERGY_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

const KernelTable* resolve(std::string_view name) {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") return avx2_kernels();
  if (name == "auto" || name.empty()) {
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot = [] {
    const char* env = std::getenv("IENERGY_SIMD");
    const KernelTable* t = resolve(env != nullptr ? env : "auto");
    return t != nullptr ? t : resolve("auto");
  }();
  return slot;
}

}  // namespace

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

bool select_kernels(std::string_view name) {
  const KernelTable* t = resolve(name);
  if (t == nullptr) return false;
  active_slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace ienergy::kernels
