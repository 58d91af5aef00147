#include "ltgp/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define LTGP_HAVE_X86 1
#include <immintrin.h>
#else
#define LTGP_HAVE_X86 0
#endif

namespace ltgp::kernels::avx2 {

#if LTGP_HAVE_X86

namespace {

constexpr std::size_t kBlock = 32;

// Bit i set iff byte i of the 32-byte block is a leaf opcode.
__attribute__((target("avx2"))) inline std::uint32_t leaf_mask(const std::uint8_t* p) {
  const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  const __m256i bound = _mm256_set1_epi8(static_cast<char>(kFirstFunction));
  // Opcodes are < 128, so a signed compare is exact for valid bytes; invalid
  // bytes >= 128 read as negative and count as leaves, which callers screen.
  return static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpgt_epi8(bound, v)));
}

__attribute__((target("avx2"))) inline bool all_valid(const std::uint8_t* p) {
  const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  const __m256i top = _mm256_set1_epi8(static_cast<char>(kOpcodeLimit - 1));
  const __m256i clipped = _mm256_max_epu8(v, top);
  return _mm256_movemask_epi8(_mm256_cmpeq_epi8(clipped, top)) == -1;
}

}  // namespace

__attribute__((target("avx2,popcnt"))) std::size_t subtree_start(std::span<const std::uint8_t> nodes,
                                                                  std::size_t root) {
  const std::uint8_t* data = nodes.data();
  std::int64_t pending = 1;
  std::size_t i = root + 1;  // nodes [i, root] consumed
  while (i > 0) {
    // With more than kBlock subtrees pending, the next kBlock steps cannot
    // close the scan: skip whole blocks by their net arity.
    if (pending > static_cast<std::int64_t>(kBlock) && i >= kBlock) {
      const int leaves = __builtin_popcount(leaf_mask(data + i - kBlock));
      pending += static_cast<std::int64_t>(kBlock) - 2 * leaves;
      i -= kBlock;
      continue;
    }
    --i;
    pending += data[i] >= kFirstFunction ? 1 : -1;
    if (pending == 0) return i;
  }
  return kNotFound;
}

__attribute__((target("avx2,popcnt"))) std::optional<std::size_t> first_malformed(
    std::span<const std::uint8_t> nodes) {
  if (nodes.empty()) return 0;
  const std::uint8_t* data = nodes.data();
  const std::size_t n = nodes.size();
  std::int64_t stack = 0;
  std::size_t i = 0;
  while (i < n) {
    if (stack > static_cast<std::int64_t>(kBlock) && i + kBlock <= n && all_valid(data + i)) {
      const int leaves = __builtin_popcount(leaf_mask(data + i));
      stack += 2 * leaves - static_cast<std::int64_t>(kBlock);
      i += kBlock;
      continue;
    }
    const std::uint8_t op = data[i];
    if (op >= kOpcodeLimit) return i;
    stack += op < kFirstFunction ? 1 : -1;
    if (stack < 1) return i;
    ++i;
  }
  if (stack != 1) return n;
  return std::nullopt;
}

__attribute__((target("avx2,popcnt"))) std::size_t count_leaves(std::span<const std::uint8_t> nodes) {
  const std::uint8_t* data = nodes.data();
  const std::size_t n = nodes.size();
  std::size_t leaves = 0;
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) leaves += __builtin_popcount(leaf_mask(data + i));
  for (; i < n; ++i) leaves += data[i] < kFirstFunction;
  return leaves;
}

#else

std::size_t subtree_start(std::span<const std::uint8_t> nodes, std::size_t root) {
  return scalar::subtree_start(nodes, root);
}
std::optional<std::size_t> first_malformed(std::span<const std::uint8_t> nodes) {
  return scalar::first_malformed(nodes);
}
std::size_t count_leaves(std::span<const std::uint8_t> nodes) { return scalar::count_leaves(nodes); }

#endif

}  // namespace ltgp::kernels::avx2
