#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ulens {

using NodeId = std::uint32_t;

/// Cross-version identity of a function.
struct FunctionKey {
  std::string path;
  std::string name;

  auto operator<=>(const FunctionKey&) const = default;
  bool operator==(const FunctionKey&) const = default;
};

struct FunctionNode {
  NodeId id = 0;
  std::string path;
  std::string name;
  bool changed = false;
  bool vulnerable = false;
  bool critical = false;
  // Derived from edges when the graph is built; any input value is ignored.
  bool is_caller = false;
  bool is_callee = false;

  FunctionKey key() const { return {path, name}; }
  bool operator==(const FunctionNode&) const = default;
};

struct CallEdge {
  NodeId source = 0;
  NodeId target = 0;
  double weight = 1.0;

  bool operator==(const CallEdge&) const = default;
};

/// Immutable function-level call graph.
///
/// Node ids are dense (0..n-1, equal to the index in nodes()). Parallel edges
/// are collapsed on construction with their weights summed, keeping the order
/// of first occurrence. An undirected graph stores every edge with
/// source <= target. Adjacency lists are sorted by neighbour id.
class CallGraph {
 public:
  CallGraph() = default;

  /// Validates and normalises. Node ids in the input are overwritten with
  /// their index. Throws IntegrityError on duplicate keys, dangling edge
  /// endpoints, non-positive weights, or critical-but-unchanged nodes.
  CallGraph(std::vector<FunctionNode> nodes, std::vector<CallEdge> edges, bool directed = true);

  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  bool directed() const noexcept { return directed_; }
  bool empty() const noexcept { return nodes_.empty(); }

  const std::vector<FunctionNode>& nodes() const noexcept { return nodes_; }
  const std::vector<CallEdge>& edges() const noexcept { return edges_; }
  const FunctionNode& node(NodeId id) const { return nodes_.at(id); }

  std::optional<NodeId> find(const FunctionKey& key) const;

  /// Edge indices leaving / entering a node, ordered by the opposite endpoint.
  std::span<const std::size_t> out_edges(NodeId id) const;
  std::span<const std::size_t> in_edges(NodeId id) const;

  std::size_t out_degree(NodeId id) const { return out_edges(id).size(); }
  std::size_t in_degree(NodeId id) const { return in_edges(id).size(); }

  std::size_t self_loop_count() const noexcept { return self_loops_; }

  /// Copy with changed/vulnerable/critical flags replaced per node.
  CallGraph with_flags(std::span<const FunctionNode> flags_by_id) const;

  bool operator==(const CallGraph& other) const {
    return directed_ == other.directed_ && nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::vector<FunctionNode> nodes_;
  std::vector<CallEdge> edges_;
  bool directed_ = true;
  std::map<FunctionKey, NodeId> index_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<std::size_t> out_list_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<std::size_t> in_list_;
  std::size_t self_loops_ = 0;
};

/// Subgraph on `keep` (any order, duplicates ignored). Kept nodes are
/// renumbered in ascending original-id order; attributes and internal edges
/// are preserved. Throws DomainError for an id outside the graph.
CallGraph induced_subgraph(const CallGraph& g, std::span<const NodeId> keep);

/// Undirected view: one edge per unordered endpoint pair, reciprocal weights
/// summed. Idempotent on undirected input.
CallGraph undirected_projection(const CallGraph& g);

// Interchange format: one JSON object per line, schema "upgrade-lens/1".

CallGraph load_graph(std::string_view document);
std::string save_graph(const CallGraph& g);

/// Rows of `caller_path,caller_name,callee_path,callee_name`. A header row
/// with exactly those column names is skipped.
CallGraph import_codeql_edges(std::string_view rows);

CallGraph read_graph_file(const std::string& path);
void write_graph_file(const CallGraph& g, const std::string& path);

inline constexpr std::string_view kSchemaVersion = "upgrade-lens/1";

}  // namespace ulens
