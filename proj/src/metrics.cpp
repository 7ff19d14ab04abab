#include "upgrade_lens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "upgrade_lens/errors.hpp"

namespace ulens {

namespace {

using Adjacency = std::vector<std::vector<NodeId>>;

// Sorted, deduplicated neighbour lists without self-loops.
Adjacency out_adjacency(const CallGraph& g) {
  Adjacency adj(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    for (auto k : g.out_edges(v))
      if (g.edges()[k].target != v) adj[v].push_back(g.edges()[k].target);
  return adj;
}

Adjacency in_adjacency(const CallGraph& g) {
  Adjacency adj(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    for (auto k : g.in_edges(v))
      if (g.edges()[k].source != v) adj[v].push_back(g.edges()[k].source);
  return adj;
}

Adjacency undirected_adjacency(const CallGraph& g) {
  Adjacency adj(g.num_nodes());
  for (const auto& e : g.edges()) {
    if (e.source == e.target) continue;
    adj[e.source].push_back(e.target);
    adj[e.target].push_back(e.source);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

Adjacency traversal_adjacency(const CallGraph& g) {
  return g.directed() ? out_adjacency(g) : undirected_adjacency(g);
}

constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);

// Single-source dependency accumulation (Brandes). Writes delta[v] for v != s.
void brandes_source(const Adjacency& adj, NodeId s, std::vector<double>& delta,
                    std::vector<std::size_t>& dist, std::vector<double>& sigma,
                    std::vector<NodeId>& order, std::vector<NodeId>& queue) {
  std::fill(dist.begin(), dist.end(), kUnreached);
  std::fill(sigma.begin(), sigma.end(), 0.0);
  std::fill(delta.begin(), delta.end(), 0.0);
  order.clear();
  queue.clear();

  dist[s] = 0;
  sigma[s] = 1.0;
  queue.push_back(s);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    order.push_back(v);
    for (NodeId w : adj[v]) {
      if (dist[w] == kUnreached) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
      if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId w = *it;
    // Shortest-path successors of w sit exactly one hop further out.
    for (NodeId x : adj[w])
      if (dist[x] == dist[w] + 1) delta[w] += sigma[w] / sigma[x] * (1.0 + delta[x]);
  }
  delta[s] = 0.0;
}

}  // namespace

std::vector<DegreeCounts> degree_centrality(const CallGraph& g) {
  std::vector<DegreeCounts> out(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    out[v].in = g.in_degree(v);
    out[v].out = g.out_degree(v);
    out[v].total = out[v].in + out[v].out;
  }
  return out;
}

std::vector<double> closeness_centrality(const CallGraph& g, ClosenessMode mode) {
  const auto n = g.num_nodes();
  std::vector<double> result(n, 0.0);
  if (n < 2) return result;

  Adjacency adj;
  if (mode == ClosenessMode::undirected || !g.directed())
    adj = undirected_adjacency(g);
  else if (mode == ClosenessMode::out)
    adj = out_adjacency(g);
  else
    adj = in_adjacency(g);  // BFS over reversed edges gives distances towards v

  std::vector<std::size_t> dist(n, kUnreached);
  std::vector<NodeId> queue;
  queue.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kUnreached);
    queue.clear();
    dist[s] = 0;
    queue.push_back(s);
    std::size_t total = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId v = queue[head];
      total += dist[v];
      for (NodeId w : adj[v]) {
        if (dist[w] != kUnreached) continue;
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
    const double reached = static_cast<double>(queue.size() - 1);
    if (total > 0)
      result[s] = (reached / static_cast<double>(n - 1)) * (reached / static_cast<double>(total));
  }
  return result;
}

std::vector<double> betweenness_centrality(const CallGraph& g, bool normalized, unsigned threads) {
  const auto n = g.num_nodes();
  std::vector<double> bc(n, 0.0);
  if (n == 0) return bc;
  const auto adj = traversal_adjacency(g);

  constexpr std::size_t kBlock = 64;
  threads = std::max(1u, threads);
  std::vector<std::vector<double>> partial(std::min<std::size_t>(kBlock, n), std::vector<double>(n));

  auto run_range = [&](std::size_t base, std::size_t first, std::size_t last) {
    std::vector<std::size_t> dist(n);
    std::vector<double> sigma(n);
    std::vector<NodeId> order, queue;
    order.reserve(n);
    queue.reserve(n);
    for (std::size_t s = first; s < last; ++s)
      brandes_source(adj, static_cast<NodeId>(s), partial[s - base], dist, sigma, order, queue);
  };

  for (std::size_t base = 0; base < n; base += kBlock) {
    const std::size_t end = std::min(n, base + kBlock);
    const std::size_t count = end - base;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (workers <= 1) {
      run_range(base, base, end);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (count + workers - 1) / workers;
      for (unsigned t = 0; t < workers; ++t) {
        const std::size_t first = base + t * chunk;
        const std::size_t last = std::min(end, first + chunk);
        if (first < last) pool.emplace_back(run_range, base, first, last);
      }
    }
    for (std::size_t s = base; s < end; ++s) {
      const auto& d = partial[s - base];
      for (std::size_t v = 0; v < n; ++v) bc[v] += d[v];
    }
  }

  if (!g.directed())
    for (auto& x : bc) x /= 2.0;

  if (normalized) {
    if (n < 3) return std::vector<double>(n, 0.0);
    double scale = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    if (!g.directed()) scale /= 2.0;
    for (auto& x : bc) x /= scale;
  }
  return bc;
}

ClusteringResult clustering_coefficients(const CallGraph& g) {
  const auto n = g.num_nodes();
  ClusteringResult result;
  result.per_node.assign(n, 0.0);
  if (n == 0) return result;
  const auto adj = undirected_adjacency(g);

  std::vector<char> mark(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    const auto k = adj[v].size();
    if (k < 2) continue;
    for (NodeId u : adj[v]) mark[u] = 1;
    std::size_t links = 0;  // each triangle seen twice
    for (NodeId u : adj[v])
      for (NodeId w : adj[u])
        if (mark[w]) ++links;
    for (NodeId u : adj[v]) mark[u] = 0;
    result.per_node[v] =
        static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  double sum = 0.0;
  for (double c : result.per_node) sum += c;
  result.average = sum / static_cast<double>(n);
  return result;
}

ComponentList connected_components(const CallGraph& g, ComponentKind kind) {
  const auto n = g.num_nodes();
  ComponentList comps;
  if (kind == ComponentKind::weak) {
    const auto adj = undirected_adjacency(g);
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < n; ++s) {
      if (seen[s]) continue;
      std::vector<NodeId> comp;
      seen[s] = 1;
      stack.push_back(s);
      while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        comp.push_back(v);
        for (NodeId w : adj[v])
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
    return comps;
  }

  // Iterative Tarjan.
  const auto adj = traversal_adjacency(g);
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kNone), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeId> stack;
  std::vector<std::pair<NodeId, std::size_t>> call;
  std::size_t counter = 0;
  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < adj[v].size()) {
        const NodeId w = adj[v][next++];
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const NodeId done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<NodeId> comp;
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

std::optional<double> degree_assortativity(const CallGraph& g) {
  const auto adj = undirected_adjacency(g);
  // Every non-loop undirected edge contributes both (j,k) and (k,j).
  __int128 ends = 0, sum = 0, sum_sq = 0, sum_prod = 0;
  for (NodeId v = 0; v < adj.size(); ++v) {
    const auto dv = static_cast<__int128>(adj[v].size());
    for (NodeId w : adj[v]) {
      const auto dw = static_cast<__int128>(adj[w].size());
      ++ends;
      sum += dv;
      sum_sq += dv * dv;
      sum_prod += dv * dw;
    }
  }
  if (ends == 0) return std::nullopt;
  const __int128 var = ends * sum_sq - sum * sum;
  if (var == 0) return std::nullopt;
  const __int128 cov = ends * sum_prod - sum * sum;
  return static_cast<double>(static_cast<long double>(cov) / static_cast<long double>(var));
}

long long cyclomatic_complexity(std::size_t edges, std::size_t nodes, std::size_t components) {
  return static_cast<long long>(edges) - static_cast<long long>(nodes) +
         2 * static_cast<long long>(components);
}

long long cyclomatic_complexity(const CallGraph& g) {
  return cyclomatic_complexity(g.num_edges(), g.num_nodes(), connected_components(g).size());
}

double density(std::size_t nodes, std::size_t edges) {
  if (nodes < 2) return 0.0;
  return 2.0 * static_cast<double>(edges) /
         (static_cast<double>(nodes) * static_cast<double>(nodes - 1));
}

double density(const CallGraph& g) { return density(g.num_nodes(), g.num_edges()); }

double average_degree(std::size_t nodes, std::size_t edges) {
  if (nodes == 0) return 0.0;
  return 2.0 * static_cast<double>(edges) / static_cast<double>(nodes);
}

std::vector<double> feature_norms(std::span<const std::vector<double>> features) {
  std::vector<double> norms;
  norms.reserve(features.size());
  if (features.empty()) return norms;
  const auto dim = features.front().size();
  if (dim == 0) throw DomainError("feature vectors must have at least one component");
  for (const auto& row : features) {
    if (row.size() != dim) throw DomainError("feature vector dimension mismatch");
    double s = 0.0;
    for (double x : row) s += x * x;
    norms.push_back(std::sqrt(s));
  }
  return norms;
}

MetricsReport metrics_report(const CallGraph& g, const MetricsOptions& options) {
  MetricsReport r;
  r.n_nodes = g.num_nodes();
  r.n_edges = g.num_edges();
  r.empty = g.empty();
  r.self_loops = g.self_loop_count();
  r.avg_degree = average_degree(r.n_nodes, r.n_edges);
  r.density = density(r.n_nodes, r.n_edges);
  r.n_components = connected_components(g, ComponentKind::weak).size();
  r.n_strong_components = connected_components(g, ComponentKind::strong).size();
  r.cyclomatic = cyclomatic_complexity(r.n_edges, r.n_nodes, r.n_components);
  r.assortativity = degree_assortativity(g);
  if (r.empty) return r;

  const double n = static_cast<double>(r.n_nodes);
  auto mean = [n](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / n;
  };
  r.avg_clustering = clustering_coefficients(g).average;
  const auto bc = betweenness_centrality(g, false, options.threads);
  r.avg_betweenness = mean(bc);
  if (r.n_nodes >= 3) {
    double scale = (n - 1.0) * (n - 2.0);
    if (!g.directed()) scale /= 2.0;
    r.avg_betweenness_normalized = r.avg_betweenness / scale;
  }
  r.avg_closeness = mean(closeness_centrality(g, options.closeness_mode));
  return r;
}

}  // namespace ulens
