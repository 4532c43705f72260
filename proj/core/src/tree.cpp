#include "bmc/tree.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "bmc/csv.hpp"

namespace bmc {

int generation(NodeId u) noexcept {
  return std::bit_width(u.value() + 1) - 1;
}

NodeId parent(NodeId u) {
  if (u.is_root()) throw std::domain_error("root has no parent");
  return NodeId{(u.value() - 1) / 2};
}

std::pair<NodeId, NodeId> children(NodeId u) noexcept {
  return {NodeId{2 * u.value() + 1}, NodeId{2 * u.value() + 2}};
}

TreeSizes sizes(int n) {
  if (n < 0 || n > 62) throw std::out_of_range("generation count must lie in [0, 62]");
  const std::uint64_t g = std::uint64_t{1} << n;
  return {g, 2 * g - 1};
}

TreeSample::TreeSample(int n, std::vector<double> traits) : n_(n), traits_(std::move(traits)) {
  if (traits_.size() != tree_size(n)) {
    throw std::invalid_argument("tree of " + std::to_string(n) + " generations needs " +
                                std::to_string(tree_size(n)) + " traits, got " +
                                std::to_string(traits_.size()));
  }
  for (std::size_t i = 0; i < traits_.size(); ++i) {
    if (!std::isfinite(traits_[i])) {
      throw std::invalid_argument("non-finite trait at node " + std::to_string(i));
    }
  }
}

double TreeSample::at(NodeId u) const {
  if (u.value() >= traits_.size()) throw std::out_of_range("node outside the observed tree");
  return traits_[u.value()];
}

std::span<const double> TreeSample::generation_traits(int m) const {
  if (m < 0 || m > n_) throw std::out_of_range("generation outside the observed tree");
  const auto g = generation_size(m);
  return std::span<const double>(traits_).subspan(g - 1, g);
}

std::span<const double> TreeSample::tree_traits(int m) const {
  if (m < 0 || m > n_) throw std::out_of_range("generation outside the observed tree");
  return std::span<const double>(traits_).first(tree_size(m));
}

void write_tree_csv(std::ostream& out, const TreeSample& tree) {
  out << "node_id,generation,trait\n";
  for (auto u : iter_tree(tree.generations())) {
    out << u.value() << ',' << generation(u) << ',' << csv::format_double(tree[u]) << '\n';
  }
}

TreeSample read_tree_csv(std::istream& in) {
  csv::Reader reader(in, {"node_id", "generation", "trait"});
  std::vector<double> traits;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const auto id = csv::parse_uint(row[0]);
    if (id != traits.size()) {
      throw csv::ParseError("tree CSV line " + std::to_string(reader.line()) +
                            ": expected node_id " + std::to_string(traits.size()));
    }
    if (csv::parse_int(row[1]) != generation(NodeId{id})) {
      throw csv::ParseError("tree CSV line " + std::to_string(reader.line()) +
                            ": generation does not match node_id");
    }
    traits.push_back(csv::parse_double(row[2]));
  }
  if (traits.empty()) throw csv::ParseError("tree CSV has no rows");
  const int n = std::bit_width(traits.size() + 1) - 2;
  if (n < 0 || tree_size(n) != traits.size()) {
    throw csv::ParseError("tree CSV row count " + std::to_string(traits.size()) +
                          " is not 2^(n+1)-1");
  }
  return TreeSample(n, std::move(traits));
}

}  // namespace bmc
