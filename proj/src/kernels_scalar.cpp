#include "ltgp/kernels.hpp"

namespace ltgp::kernels::scalar {

std::size_t subtree_start(std::span<const std::uint8_t> nodes, std::size_t root) {
  // `pending` counts subtrees still to be closed while walking backwards.
  std::int64_t pending = 1;
  for (std::size_t i = root + 1; i-- > 0;) {
    pending += nodes[i] >= kFirstFunction ? 1 : -1;
    if (pending == 0) return i;
  }
  return kNotFound;
}

std::optional<std::size_t> first_malformed(std::span<const std::uint8_t> nodes) {
  if (nodes.empty()) return 0;
  std::int64_t stack = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::uint8_t op = nodes[i];
    if (op >= kOpcodeLimit) return i;
    stack += op < kFirstFunction ? 1 : -1;
    if (stack < 1) return i;
  }
  if (stack != 1) return nodes.size();
  return std::nullopt;
}

std::size_t count_leaves(std::span<const std::uint8_t> nodes) {
  std::size_t leaves = 0;
  for (std::uint8_t op : nodes) leaves += op < kFirstFunction;
  return leaves;
}

}  // namespace ltgp::kernels::scalar
