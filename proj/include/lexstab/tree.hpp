// include/lexstab/tree.hpp
//
// Rooted phylogenies with branch lengths. A Tree is an immutable, indexed
// node array; build one with parse_newick() or TreeBuilder.

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lexstab {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct Node {
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  double length = 0.0;          // branch length to parent
  bool length_given = false;    // false if the input omitted it
  std::string label;
};

class Tree {
 public:
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  NodeId root() const noexcept { return root_; }
  bool is_tip(NodeId id) const { return nodes_.at(id).children.empty(); }

  /// Tips in left-to-right (Newick) order. Per-tip value vectors are indexed this way.
  const std::vector<NodeId>& tips() const noexcept { return tips_; }
  std::size_t tip_count() const noexcept { return tips_.size(); }
  std::vector<std::string> tip_labels() const;
  std::optional<NodeId> find_tip(std::string_view label) const;

  /// Children before parents; children visited in stored order.
  const std::vector<NodeId>& postorder() const noexcept { return postorder_; }
  /// Path length from the root; the root's own branch is not counted.
  const std::vector<double>& depths() const noexcept { return depths_; }
  double height() const noexcept { return height_; }

  /// Number of non-root branches whose length defaulted to 1.0.
  std::size_t defaulted_length_count() const noexcept;

  /// Weight floor used in place of zero branch lengths by comparative methods:
  /// 1e-8 times the tree height (1e-8 for a zero-height tree).
  double zero_length_floor() const noexcept;

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
  std::vector<NodeId> tips_;
  std::vector<NodeId> postorder_;
  std::vector<double> depths_;
  double height_ = 0.0;
};

/// Assembles a Tree node by node and validates every invariant on build().
class TreeBuilder {
 public:
  NodeId add_node(std::string label = {}, double length = 0.0, bool length_given = true);
  void attach(NodeId parent, NodeId child);
  std::size_t size() const noexcept { return nodes_.size(); }
  Node& at(NodeId id) { return nodes_.at(id); }

  /// Throws DomainError if the graph is not a rooted tree with unique,
  /// non-empty tip labels and finite non-negative lengths.
  Tree build() &&;

 private:
  std::vector<Node> nodes_;
};

struct TreeSummary {
  std::size_t tips = 0;
  std::size_t nodes = 0;
  double height = 0.0;
  bool is_binary = false;
  std::size_t polytomies = 0;  // internal nodes with more than two children
};

/// Reads one Newick statement terminated by ';'. Bracketed comments are
/// skipped; single-quoted labels are supported. Throws ParseError.
Tree parse_newick(std::string_view text);

/// Reads a Newick file (one tree). Throws IoError or ParseError.
Tree load_newick(const std::string& path);

/// Canonical form: stored child order, shortest round-trip lengths, the
/// root length only when the input gave one.
std::string write_newick(const Tree& tree);

/// Induced subtree on `keep`. Unary nodes are suppressed and their branch
/// lengths summed into the surviving branch. If the original root would be
/// left unary, the new root keeps the collapsed stem as its own (root) length,
/// so stem + depth in the result equals the original root-to-tip distance.
Tree prune_to_taxa(const Tree& tree, const std::set<std::string>& keep);

TreeSummary tree_summary(const Tree& tree);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace lexstab
