#pragma once

#include <cstdint>
#include <iosfwd>
#include <ranges>
#include <span>
#include <utility>
#include <vector>

namespace bmc {

/// Address of a node in the complete binary genealogical tree, heap layout:
/// the root is 0 and the children of u are 2u+1 (the "0" child) and 2u+2
/// (the "1" child).
class NodeId {
 public:
  constexpr NodeId() noexcept = default;
  constexpr explicit NodeId(std::uint64_t id) noexcept : id_(id) {}

  constexpr std::uint64_t value() const noexcept { return id_; }
  constexpr bool is_root() const noexcept { return id_ == 0; }

  constexpr auto operator<=>(const NodeId&) const noexcept = default;

 private:
  std::uint64_t id_ = 0;
};

inline constexpr NodeId kRoot{0};

/// floor(log2(id + 1)).
int generation(NodeId u) noexcept;

/// Throws std::domain_error("root has no parent") for the root.
NodeId parent(NodeId u);

std::pair<NodeId, NodeId> children(NodeId u) noexcept;

struct TreeSizes {
  std::uint64_t generation_size;  // |G_n| = 2^n
  std::uint64_t tree_size;        // |T_n| = 2^(n+1) - 1
  friend bool operator==(const TreeSizes&, const TreeSizes&) = default;
};

TreeSizes sizes(int n);

inline std::uint64_t generation_size(int n) { return sizes(n).generation_size; }
inline std::uint64_t tree_size(int n) { return sizes(n).tree_size; }

/// Nodes of generation n in id order: 2^n - 1, ..., 2^(n+1) - 2.
inline auto iter_generation(int n) {
  const auto first = sizes(n).generation_size - 1;
  return std::views::iota(first, 2 * first + 1) |
         std::views::transform([](std::uint64_t id) { return NodeId{id}; });
}

/// All nodes of T_n in id order: 0, ..., 2^(n+1) - 2.
inline auto iter_tree(int n) {
  return std::views::iota(std::uint64_t{0}, sizes(n).tree_size) |
         std::views::transform([](std::uint64_t id) { return NodeId{id}; });
}

/// Traits observed on the complete tree T_n, stored flat in heap order.
class TreeSample {
 public:
  /// Requires traits.size() == 2^(n+1) - 1 and every trait finite.
  TreeSample(int n, std::vector<double> traits);

  int generations() const noexcept { return n_; }
  std::size_t size() const noexcept { return traits_.size(); }

  double operator[](NodeId u) const { return traits_[u.value()]; }
  double at(NodeId u) const;

  std::span<const double> traits() const noexcept { return traits_; }
  /// Traits of G_m, m <= n.
  std::span<const double> generation_traits(int m) const;
  /// Traits of T_m, m <= n (a prefix of the flat array).
  std::span<const double> tree_traits(int m) const;

  friend bool operator==(const TreeSample&, const TreeSample&) = default;

 private:
  int n_;
  std::vector<double> traits_;
};

/// CSV with header `node_id,generation,trait`, one row per node in iter_tree order.
void write_tree_csv(std::ostream& out, const TreeSample& tree);
TreeSample read_tree_csv(std::istream& in);

}  // namespace bmc
