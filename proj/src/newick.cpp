// Newick reader and writer.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "lexstab/error.hpp"
#include "lexstab/tree.hpp"

namespace lexstab {
namespace {

bool is_delimiter(char c) {
  switch (c) {
    case '(': case ')': case '[': case ']': case '\'': case ':': case ';': case ',':
      return true;
    default:
      return std::isspace(static_cast<unsigned char>(c)) != 0;
  }
}

class NewickReader {
 public:
  explicit NewickReader(std::string_view text) : text_(text) {}

  Tree read() {
    skip_blank();
    if (at_end()) throw ParseError("empty input", pos_);

    std::vector<NodeId> open;  // unclosed '(' nodes
    NodeId current = kNoNode;  // most recently completed subtree
    bool expect_subtree = true;

    while (true) {
      skip_blank();
      if (at_end()) {
        if (!open.empty()) throw ParseError("unbalanced parentheses", pos_);
        throw ParseError("missing ';'", pos_);
      }
      const char c = text_[pos_];

      if (expect_subtree) {
        if (c == '(') {
          const NodeId id = builder_.add_node({}, 1.0, false);
          if (!open.empty()) builder_.attach(open.back(), id);
          else if (root_started_) throw ParseError("unexpected '('", pos_);
          root_started_ = true;
          open.push_back(id);
          ++pos_;
          continue;
        }
        if (c == ')' || c == ',' || c == ';' || c == ':')
          throw ParseError("missing tip label", pos_);
        if (c == ']') throw ParseError("unexpected ']'", pos_);
        const std::size_t label_at = pos_;
        std::string label = read_label();
        if (!tip_labels_.insert(label).second)
          throw ParseError("duplicate tip label '" + label + "'", label_at);
        const NodeId id = builder_.add_node(std::move(label), 1.0, false);
        if (!open.empty()) builder_.attach(open.back(), id);
        else root_started_ = true;
        current = id;
        read_length(id);
        expect_subtree = false;
        continue;
      }

      switch (c) {
        case ',':
          if (open.empty()) throw ParseError("unexpected ','", pos_);
          ++pos_;
          expect_subtree = true;
          break;
        case ')': {
          if (open.empty()) throw ParseError("unbalanced parentheses", pos_);
          ++pos_;
          current = open.back();
          open.pop_back();
          skip_blank();
          if (!at_end() && (text_[pos_] == '\'' || !is_delimiter(text_[pos_])))
            builder_.at(current).label = read_label();
          read_length(current);
          break;
        }
        case ';': {
          if (!open.empty()) throw ParseError("unbalanced parentheses", pos_);
          ++pos_;
          skip_blank();
          if (!at_end()) throw ParseError("unexpected text after ';'", pos_);
          Node& root = builder_.at(current);
          if (!root.length_given) root.length = 0.0;
          try {
            return std::move(builder_).build();
          } catch (const DomainError& e) {
            throw ParseError(e.what(), 0);
          }
        }
        default:
          throw ParseError(std::string("unexpected '") + c + "'", pos_);
      }
    }
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  void skip_blank() {
    while (!at_end()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '[') {
        const std::size_t start = pos_;
        const auto close = text_.find(']', pos_);
        if (close == std::string_view::npos) throw ParseError("unterminated comment", start);
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  std::string read_label() {
    std::string out;
    if (text_[pos_] == '\'') {
      const std::size_t start = pos_++;
      while (true) {
        if (at_end()) throw ParseError("unterminated quoted label", start);
        const char c = text_[pos_++];
        if (c == '\'') {
          if (!at_end() && text_[pos_] == '\'') {
            out.push_back('\'');
            ++pos_;
          } else {
            break;
          }
        } else {
          out.push_back(c);
        }
      }
      if (out.empty()) throw ParseError("empty quoted label", start);
      return out;
    }
    while (!at_end() && !is_delimiter(text_[pos_])) out.push_back(text_[pos_++]);
    return out;
  }

  void read_length(NodeId id) {
    skip_blank();
    if (at_end() || text_[pos_] != ':') return;
    ++pos_;
    skip_blank();
    const std::size_t start = pos_;
    while (!at_end() && !is_delimiter(text_[pos_])) ++pos_;
    const std::string_view token = text_.substr(start, pos_ - start);
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    if (token.empty() || res.ec != std::errc{} || res.ptr != last || !std::isfinite(value))
      throw ParseError("non-numeric branch length", start);
    if (value < 0.0) throw ParseError("negative branch length", start);
    Node& n = builder_.at(id);
    n.length = value == 0.0 ? 0.0 : value;
    n.length_given = true;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  bool root_started_ = false;
  TreeBuilder builder_;
  std::unordered_set<std::string> tip_labels_;
};

bool needs_quotes(const std::string& label) {
  for (const char c : label)
    if (is_delimiter(c)) return true;
  return false;
}

void write_label(std::string& out, const std::string& label) {
  if (!needs_quotes(label)) {
    out += label;
    return;
  }
  out.push_back('\'');
  for (const char c : label) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
}

}  // namespace

Tree parse_newick(std::string_view text) { return NewickReader(text).read(); }

Tree load_newick(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read tree file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_newick(ss.str());
}

std::string write_newick(const Tree& tree) {
  std::string out;
  // Iterative writer; deep caterpillar trees must not exhaust the stack.
  struct Frame {
    NodeId id;
    std::size_t next;
  };
  std::vector<Frame> stack{{tree.root(), 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const Node& n = tree.node(f.id);
    if (!n.children.empty() && f.next < n.children.size()) {
      out.push_back(f.next == 0 ? '(' : ',');
      const NodeId c = n.children[f.next++];
      stack.push_back({c, 0});
      continue;
    }
    if (!n.children.empty()) out.push_back(')');
    write_label(out, n.label);
    if (f.id != tree.root() || n.length_given) {
      out.push_back(':');
      out += format_real(n.length);
    }
    stack.pop_back();
  }
  out.push_back(';');
  return out;
}

}  // namespace lexstab
