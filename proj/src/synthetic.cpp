#include "upgrade_lens/synthetic.hpp"

#include <set>
#include <string>

#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/rng.hpp"

namespace ulens {

namespace {

std::vector<FunctionNode> numbered_nodes(std::size_t n) {
  std::vector<FunctionNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i].path = "synthetic/mod" + std::to_string(i % 97) + ".py";
    nodes[i].name = "f" + std::to_string(i);
  }
  return nodes;
}

}  // namespace

CallGraph synthetic_graph(std::size_t nodes, std::size_t edges, std::size_t components,
                          std::uint64_t seed) {
  if (nodes == 0) {
    if (edges != 0 || components != 0) throw DomainError("empty graph cannot have edges or components");
    return {};
  }
  if (components == 0 || components > nodes) throw DomainError("component count out of range");
  if (edges + components < nodes) throw DomainError("too few edges to connect the components");

  // Components 1..P-1 are as small as the edge budget allows (pairs, or
  // singletons when every component must be a lone node); the rest is one
  // large component that absorbs the extra edges.
  const std::size_t small = components - 1;
  const std::size_t small_size = nodes >= 2 * small + 1 ? 2 : 1;
  const std::size_t giant = nodes - small * small_size;
  const std::size_t tree_edges = nodes - components;
  const std::size_t extra = edges - tree_edges;
  const std::size_t capacity = giant * (giant - 1) - (giant - 1);
  if (extra > capacity) throw DomainError("edge count exceeds what the component layout can hold");

  SplitMix64 rng(seed);
  std::vector<CallEdge> out;
  out.reserve(edges);
  std::set<std::pair<NodeId, NodeId>> used;
  auto add = [&](NodeId a, NodeId b) {
    used.emplace(a, b);
    out.push_back({a, b, 1.0});
  };

  // Random recursive tree on the giant component, random orientation.
  for (std::size_t v = 1; v < giant; ++v) {
    const auto parent = static_cast<NodeId>(rng.below(v));
    if (rng.next() & 1)
      add(parent, static_cast<NodeId>(v));
    else
      add(static_cast<NodeId>(v), parent);
  }
  for (std::size_t c = 0; c < small; ++c) {
    const auto first = static_cast<NodeId>(giant + c * small_size);
    if (small_size == 2) add(first, first + 1);
  }
  for (std::size_t added = 0; added < extra;) {
    const auto a = static_cast<NodeId>(rng.below(giant));
    const auto b = static_cast<NodeId>(rng.below(giant));
    if (a == b || used.count({a, b})) continue;
    add(a, b);
    ++added;
  }
  return CallGraph(numbered_nodes(nodes), std::move(out));
}

CallGraph random_digraph(std::size_t nodes, double edge_probability, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<CallEdge> edges;
  for (std::size_t a = 0; a < nodes; ++a)
    for (std::size_t b = 0; b < nodes; ++b)
      if (a != b && rng.uniform() < edge_probability)
        edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), 1.0});
  return CallGraph(numbered_nodes(nodes), std::move(edges));
}

}  // namespace ulens
