#pragma once

// Byte-stream scans over postfix opcode buffers.
//
// Each kernel has a scalar reference implementation and an AVX2 variant; the
// dispatching entry points pick one at first use (AVX2 when the CPU reports it,
// unless LTGP_ISA=scalar is set in the environment). Both variants must return
// identical results for every input.
//
// Encoding assumed here: bytes 0..5 are leaves, 6..9 are binary functions,
// anything else is invalid.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace ltgp::kernels {

inline constexpr std::uint8_t kFirstFunction = 6;
inline constexpr std::uint8_t kOpcodeLimit = 10;
inline constexpr std::size_t kNotFound = static_cast<std::size_t>(-1);

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool avx2_supported() noexcept;
Isa active_isa() noexcept;
/// Overrides dispatch (tests and benchmarks). Requesting avx2 on a CPU without
/// it falls back to scalar.
void force_isa(Isa isa) noexcept;

/// Index of the first node of the subtree whose root is `root`, found by a
/// backward arity-counting scan. Returns kNotFound if the buffer ends before
/// the subtree closes (only possible for malformed input).
std::size_t subtree_start(std::span<const std::uint8_t> nodes, std::size_t root);

/// First offset at which the buffer stops being a single well-formed postfix
/// tree: an invalid opcode, a function with fewer than two pending operands,
/// or (at offset == size) more than one pending value at the end. Empty input
/// reports offset 0.
std::optional<std::size_t> first_malformed(std::span<const std::uint8_t> nodes);

std::size_t count_leaves(std::span<const std::uint8_t> nodes);

namespace scalar {
std::size_t subtree_start(std::span<const std::uint8_t> nodes, std::size_t root);
std::optional<std::size_t> first_malformed(std::span<const std::uint8_t> nodes);
std::size_t count_leaves(std::span<const std::uint8_t> nodes);
}  // namespace scalar

namespace avx2 {
std::size_t subtree_start(std::span<const std::uint8_t> nodes, std::size_t root);
std::optional<std::size_t> first_malformed(std::span<const std::uint8_t> nodes);
std::size_t count_leaves(std::span<const std::uint8_t> nodes);
}  // namespace avx2

}  // namespace ltgp::kernels
