#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "upgrade_lens/graph.hpp"

namespace ulens {

struct DegreeCounts {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t total = 0;

  bool operator==(const DegreeCounts&) const = default;
};

enum class ClosenessMode { undirected, in, out };
enum class ComponentKind { weak, strong };

using ComponentList = std::vector<std::vector<NodeId>>;

/// Per-node in/out/total degree. On an undirected graph "out" counts edges
/// stored with the node as source. Self-loops count once in each direction.
std::vector<DegreeCounts> degree_centrality(const CallGraph& g);

/// Hop-distance closeness with reachable-set scaling:
/// ((r-1)/(n-1)) * ((r-1)/S) for r-1 reachable peers at total distance S.
/// `undirected` ignores edge direction; `in` uses distances towards the node,
/// `out` distances away from it.
std::vector<double> closeness_centrality(const CallGraph& g,
                                         ClosenessMode mode = ClosenessMode::undirected);

/// Brandes betweenness over hop distances. Directed graphs count ordered
/// pairs, undirected graphs unordered pairs. Normalisation divides by
/// (n-1)(n-2), halved for undirected input; n < 3 yields zeros.
///
/// Sources are processed in fixed-size blocks; within a block the per-source
/// dependency vectors may be computed by `threads` workers, and are always
/// accumulated in ascending source order, so results are bitwise identical
/// for every thread count.
std::vector<double> betweenness_centrality(const CallGraph& g, bool normalized = false,
                                           unsigned threads = 1);

struct ClusteringResult {
  std::vector<double> per_node;
  double average = 0.0;
};

/// Local clustering on the undirected projection without self-loops.
ClusteringResult clustering_coefficients(const CallGraph& g);

/// Components sorted by smallest member; members ascending.
ComponentList connected_components(const CallGraph& g, ComponentKind kind = ComponentKind::weak);

/// Newman degree assortativity on the undirected projection, self-loops
/// excluded. nullopt when there are no edges or degree variance is zero.
std::optional<double> degree_assortativity(const CallGraph& g);

/// E - N + 2P with P the weak component count.
long long cyclomatic_complexity(std::size_t edges, std::size_t nodes, std::size_t components);
long long cyclomatic_complexity(const CallGraph& g);

/// 2m / (n(n-1)); zero for n < 2.
double density(std::size_t nodes, std::size_t edges);
double density(const CallGraph& g);

/// 2m / n; zero for an empty graph.
double average_degree(std::size_t nodes, std::size_t edges);

/// Row-wise Euclidean norms. Throws DomainError on ragged input or F = 0.
std::vector<double> feature_norms(std::span<const std::vector<double>> features);

template <typename Derived>
Eigen::VectorXd feature_norms(const Eigen::MatrixBase<Derived>& features) {
  return features.rowwise().norm();
}

struct MetricsOptions {
  ClosenessMode closeness_mode = ClosenessMode::undirected;
  unsigned threads = 1;
};

/// One column of a comparison table.
struct MetricsReport {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  double avg_degree = 0.0;
  double density = 0.0;
  std::size_t n_components = 0;
  double avg_clustering = 0.0;
  std::optional<double> assortativity;
  double avg_betweenness = 0.0;             // unnormalised, directed
  double avg_betweenness_normalized = 0.0;  // divided by (n-1)(n-2)
  double avg_closeness = 0.0;
  long long cyclomatic = 0;
  std::size_t n_strong_components = 0;
  std::size_t self_loops = 0;
  bool empty = true;

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport metrics_report(const CallGraph& g, const MetricsOptions& options = {});

}  // namespace ulens
