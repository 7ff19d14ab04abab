#pragma once

#include <cstdint>

#include "upgrade_lens/graph.hpp"

namespace ulens {

/// Seeded simple digraph with exactly `nodes` nodes, `edges` edges and
/// `components` weak components (no self-loops). Requires
/// nodes - components <= edges and enough room for the extra edges.
CallGraph synthetic_graph(std::size_t nodes, std::size_t edges, std::size_t components,
                          std::uint64_t seed);

/// Seeded G(n, p) digraph without self-loops.
CallGraph random_digraph(std::size_t nodes, double edge_probability, std::uint64_t seed);

}  // namespace ulens
