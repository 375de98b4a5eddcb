#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace forge::syntax {

using NodeId = std::int32_t;
inline constexpr NodeId no_node = -1;

/// One node of a concrete syntax tree. Node kinds follow tree-sitter naming:
/// named nodes carry a grammar kind ("identifier", "call_expression"),
/// anonymous nodes carry their token text ("(", "if", "<=").
struct Node {
    std::string kind;
    std::string field;
    bool named = true;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    NodeId parent = no_node;
    std::vector<NodeId> children;
};

/// Concrete syntax tree over a source buffer. Nodes are stored in post-order
/// (children before parents); the root is the last node.
class Tree {
  public:
    Tree() = default;
    explicit Tree(std::string source) : source_(std::move(source)) {}

    const std::string &source() const noexcept { return source_; }
    const std::vector<Node> &nodes() const noexcept { return nodes_; }
    const Node &node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    NodeId root() const noexcept { return nodes_.empty() ? no_node : static_cast<NodeId>(nodes_.size() - 1); }
    bool empty() const noexcept { return nodes_.empty(); }

    std::string_view text(NodeId id) const {
        const auto &n = node(id);
        return std::string_view(source_).substr(n.begin, n.end - n.begin);
    }

    /// Child with the given field name, or no_node.
    NodeId child(NodeId id, std::string_view field) const {
        for (auto c : node(id).children) {
            if (nodes_[static_cast<std::size_t>(c)].field == field) return c;
        }
        return no_node;
    }

    std::vector<NodeId> named_children(NodeId id) const {
        std::vector<NodeId> out;
        for (auto c : node(id).children) {
            if (nodes_[static_cast<std::size_t>(c)].named) out.push_back(c);
        }
        return out;
    }

    /// Pre-order visit of the subtree rooted at `id`.
    void visit(NodeId id, const std::function<void(NodeId)> &fn) const {
        if (id == no_node) return;
        fn(id);
        for (auto c : node(id).children) visit(c, fn);
    }

    /// Leaf-stripped s-expression over named nodes: "(kind (child) ...)".
    std::string sexp(NodeId id) const {
        std::string out;
        append_sexp(id, out);
        return out;
    }

    // Builder interface used by the parsers.
    std::size_t checkpoint() const noexcept { return nodes_.size(); }
    void rollback(std::size_t mark) { nodes_.resize(mark); }

    NodeId add(std::string kind, bool named, std::uint32_t begin, std::uint32_t end, std::vector<NodeId> children = {}) {
        const auto id = static_cast<NodeId>(nodes_.size());
        for (auto c : children) nodes_[static_cast<std::size_t>(c)].parent = id;
        Node n;
        n.kind = std::move(kind);
        n.named = named;
        n.begin = begin;
        n.end = end;
        n.children = std::move(children);
        nodes_.push_back(std::move(n));
        return id;
    }

    void set_field(NodeId id, std::string field) { nodes_.at(static_cast<std::size_t>(id)).field = std::move(field); }
    void set_kind(NodeId id, std::string kind) { nodes_.at(static_cast<std::size_t>(id)).kind = std::move(kind); }
    void set_named(NodeId id, bool named) { nodes_.at(static_cast<std::size_t>(id)).named = named; }

  private:
    void append_sexp(NodeId id, std::string &out) const {
        const auto &n = node(id);
        out += '(';
        out += n.kind;
        for (auto c : n.children) {
            if (!nodes_[static_cast<std::size_t>(c)].named) continue;
            out += ' ';
            append_sexp(c, out);
        }
        out += ')';
    }

    std::string source_;
    std::vector<Node> nodes_;
};

/// Outcome of parsing one source file. Parsing never throws on bad input;
/// unparseable regions become "ERROR" nodes.
struct ParseResult {
    Tree tree;
    std::size_t error_count = 0;  // ERROR nodes plus missing closing braces
    std::size_t item_count = 0;   // top-level items that parsed cleanly

    bool clean() const noexcept { return error_count == 0; }
    /// True when the file has content but nothing in it parsed.
    bool failed() const noexcept { return item_count == 0 && error_count > 0; }
};

} // namespace forge::syntax
