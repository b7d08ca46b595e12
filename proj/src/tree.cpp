#include "lexstab/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "lexstab/error.hpp"

namespace lexstab {

std::vector<std::string> Tree::tip_labels() const {
  std::vector<std::string> out;
  out.reserve(tips_.size());
  for (const NodeId t : tips_) out.push_back(nodes_[t].label);
  return out;
}

std::optional<NodeId> Tree::find_tip(std::string_view label) const {
  for (const NodeId t : tips_)
    if (nodes_[t].label == label) return t;
  return std::nullopt;
}

std::size_t Tree::defaulted_length_count() const noexcept {
  std::size_t n = 0;
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (i != root_ && !nodes_[i].length_given) ++n;
  return n;
}

double Tree::zero_length_floor() const noexcept {
  return height_ > 0.0 ? 1e-8 * height_ : 1e-8;
}

NodeId TreeBuilder::add_node(std::string label, double length, bool length_given) {
  Node n;
  n.label = std::move(label);
  n.length = length;
  n.length_given = length_given;
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

void TreeBuilder::attach(NodeId parent, NodeId child) {
  if (parent >= nodes_.size() || child >= nodes_.size() || parent == child)
    throw DomainError("invalid node index in attach");
  if (nodes_[child].parent != kNoNode) throw DomainError("node already has a parent");
  nodes_[child].parent = parent;
  nodes_[parent].children.push_back(child);
}

Tree TreeBuilder::build() && {
  if (nodes_.empty()) throw DomainError("empty tree");

  NodeId root = kNoNode;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].parent != kNoNode) continue;
    if (root != kNoNode) throw DomainError("tree has more than one root");
    root = i;
  }
  if (root == kNoNode) throw DomainError("tree has no root");

  // Preorder walk from the root; any node not reached is disconnected or on a cycle.
  std::vector<NodeId> preorder;
  preorder.reserve(nodes_.size());
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[id]) throw DomainError("tree contains a cycle");
    seen[id] = 1;
    preorder.push_back(id);
    const auto& ch = nodes_[id].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  if (preorder.size() != nodes_.size()) throw DomainError("tree is not connected");

  // Renumber in preorder so equal trees have equal node arrays.
  std::vector<NodeId> remap(nodes_.size());
  for (NodeId i = 0; i < preorder.size(); ++i) remap[preorder[i]] = i;

  Tree tree;
  tree.nodes_.resize(nodes_.size());
  for (NodeId old = 0; old < nodes_.size(); ++old) {
    Node& n = tree.nodes_[remap[old]];
    n = std::move(nodes_[old]);
    if (n.parent != kNoNode) n.parent = remap[n.parent];
    for (auto& c : n.children) c = remap[c];
  }
  tree.root_ = 0;

  std::unordered_set<std::string_view> labels;
  for (NodeId i = 0; i < tree.nodes_.size(); ++i) {
    const Node& n = tree.nodes_[i];
    if (!std::isfinite(n.length) || n.length < 0.0)
      throw DomainError("branch length must be finite and non-negative");
    if (n.children.empty()) {
      if (n.label.empty()) throw DomainError("tip without a label");
      if (!labels.insert(n.label).second) throw DomainError("duplicate tip label '" + n.label + "'");
      tree.tips_.push_back(i);
    }
  }

  // Reverse preorder with children in reverse: equivalent to a postorder that
  // visits children in stored order.
  tree.postorder_.reserve(tree.nodes_.size());
  std::vector<std::pair<NodeId, std::size_t>> walk{{0, 0}};
  while (!walk.empty()) {
    auto& [id, next] = walk.back();
    const auto& ch = tree.nodes_[id].children;
    if (next < ch.size()) {
      const NodeId c = ch[next++];
      walk.emplace_back(c, 0);
    } else {
      tree.postorder_.push_back(id);
      walk.pop_back();
    }
  }

  tree.depths_.assign(tree.nodes_.size(), 0.0);
  for (NodeId i = 1; i < tree.nodes_.size(); ++i) {
    // preorder numbering: parent index < child index
    tree.depths_[i] = tree.depths_[tree.nodes_[i].parent] + tree.nodes_[i].length;
  }
  for (const NodeId t : tree.tips_) tree.height_ = std::max(tree.height_, tree.depths_[t]);
  return tree;
}

Tree prune_to_taxa(const Tree& tree, const std::set<std::string>& keep) {
  if (keep.size() < 2) throw DomainError("need >= 2 taxa to prune");
  for (const auto& label : keep)
    if (!tree.find_tip(label)) throw DomainError("unknown taxon '" + label + "'");

  struct Sub {
    NodeId id;
    double length;
    bool given;
  };
  TreeBuilder builder;
  std::vector<std::optional<Sub>> result(tree.node_count());

  for (const NodeId id : tree.postorder()) {
    const Node& n = tree.node(id);
    const bool is_root = id == tree.root();
    if (n.children.empty()) {
      if (keep.count(n.label)) result[id] = Sub{builder.add_node(n.label, n.length, n.length_given), n.length, n.length_given};
    } else {
      std::vector<Sub> subs;
      for (const NodeId c : n.children)
        if (result[c]) subs.push_back(*result[c]);
      if (subs.size() == 1) {
        Sub s = subs.front();
        if (!is_root) {
          s.length = n.length + s.length;
          s.given = s.given || n.length_given;
        }
        result[id] = s;
      } else if (subs.size() > 1) {
        const NodeId nid = builder.add_node(n.label, n.length, n.length_given);
        for (const Sub& s : subs) {
          builder.at(s.id).length = s.length;
          builder.at(s.id).length_given = s.given;
          builder.attach(nid, s.id);
        }
        result[id] = Sub{nid, n.length, n.length_given};
      }
    }
    if (is_root && result[id]) {
      Node& r = builder.at(result[id]->id);
      r.length = result[id]->length;
      r.length_given = result[id]->given;
    }
  }
  return std::move(builder).build();
}

TreeSummary tree_summary(const Tree& tree) {
  TreeSummary s;
  s.tips = tree.tip_count();
  s.nodes = tree.node_count();
  s.height = tree.height();
  s.is_binary = true;
  for (const Node& n : tree.nodes()) {
    if (n.children.empty()) continue;
    if (n.children.size() != 2) s.is_binary = false;
    if (n.children.size() > 2) ++s.polytomies;
  }
  return s;
}

std::string format_real(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace lexstab
