#include "ltgp/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace ltgp::kernels {

namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("LTGP_ISA"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_supported() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && !avx2_supported()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

std::size_t subtree_start(std::span<const std::uint8_t> nodes, std::size_t root) {
  return active_isa() == Isa::avx2 ? avx2::subtree_start(nodes, root) : scalar::subtree_start(nodes, root);
}

std::optional<std::size_t> first_malformed(std::span<const std::uint8_t> nodes) {
  return active_isa() == Isa::avx2 ? avx2::first_malformed(nodes) : scalar::first_malformed(nodes);
}

std::size_t count_leaves(std::span<const std::uint8_t> nodes) {
  return active_isa() == Isa::avx2 ? avx2::count_leaves(nodes) : scalar::count_leaves(nodes);
}

}  // namespace ltgp::kernels
