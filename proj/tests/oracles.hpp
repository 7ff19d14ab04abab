#pragma once

// Brute-force reference implementations. Deliberately naive: dense matrices,
// Floyd-Warshall distances and explicit pair enumeration, sharing no code
// with the library's traversal routines.

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "upgrade_lens/graph.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<long long>>;
constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

inline ulens::CallGraph make_graph(std::size_t n, std::vector<std::pair<int, int>> edges,
                                   bool directed = true) {
  std::vector<ulens::FunctionNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i].path = "t.py";
    nodes[i].name = "n" + std::to_string(i);
  }
  std::vector<ulens::CallEdge> es;
  for (auto [a, b] : edges)
    es.push_back({static_cast<ulens::NodeId>(a), static_cast<ulens::NodeId>(b), 1.0});
  return ulens::CallGraph(std::move(nodes), std::move(es), directed);
}

// Adjacency matrix without self-loops; symmetric when `symmetric`.
inline std::vector<std::vector<int>> adjacency(const ulens::CallGraph& g, bool symmetric) {
  const auto n = g.num_nodes();
  std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
  for (const auto& e : g.edges()) {
    if (e.source == e.target) continue;
    a[e.source][e.target] = 1;
    if (symmetric || !g.directed()) a[e.target][e.source] = 1;
  }
  return a;
}

inline Matrix floyd(const std::vector<std::vector<int>>& a) {
  const auto n = a.size();
  Matrix d(n, std::vector<long long>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j]) d[i][j] = std::min(d[i][j], 1LL);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// sigma[s][t]: number of shortest s-t paths, by layering on distance.
inline std::vector<std::vector<double>> path_counts(const std::vector<std::vector<int>>& a,
                                                    const Matrix& d) {
  const auto n = a.size();
  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    sigma[s][s] = 1.0;
    for (long long layer = 1; layer < static_cast<long long>(n); ++layer)
      for (std::size_t t = 0; t < n; ++t) {
        if (d[s][t] != layer) continue;
        for (std::size_t u = 0; u < n; ++u)
          if (a[u][t] && d[s][u] == layer - 1) sigma[s][t] += sigma[s][u];
      }
  }
  return sigma;
}

inline std::vector<double> betweenness(const ulens::CallGraph& g) {
  const bool directed = g.directed();
  const auto a = adjacency(g, !directed);
  const auto d = floyd(a);
  const auto sigma = path_counts(a, d);
  const auto n = a.size();
  std::vector<double> bc(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < n; ++t) {
        if (s == t || s == v || t == v) continue;
        if (d[s][t] >= kInf || d[s][v] >= kInf || d[v][t] >= kInf) continue;
        if (d[s][v] + d[v][t] != d[s][t]) continue;
        bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
      }
  if (!directed)
    for (auto& x : bc) x /= 2.0;
  return bc;
}

// mode: 0 undirected, 1 in, 2 out
inline std::vector<double> closeness(const ulens::CallGraph& g, int mode) {
  const auto n = g.num_nodes();
  const auto d = floyd(adjacency(g, mode == 0));
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t v = 0; v < n; ++v) {
    long long sum = 0, reach = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      const long long dist = mode == 1 ? d[u][v] : d[v][u];
      if (dist >= kInf) continue;
      sum += dist;
      ++reach;
    }
    if (sum > 0)
      out[v] = (double(reach) / double(n - 1)) * (double(reach) / double(sum));
  }
  return out;
}

inline std::vector<double> clustering(const ulens::CallGraph& g) {
  const auto a = adjacency(g, true);
  const auto n = a.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    long long k = 0, tri = 0;
    for (std::size_t u = 0; u < n; ++u) k += a[v][u];
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t w = u + 1; w < n; ++w)
        if (a[v][u] && a[v][w] && a[u][w]) ++tri;
    if (k >= 2) c[v] = 2.0 * double(tri) / (double(k) * double(k - 1));
  }
  return c;
}

// Components as sets, via reachability closure.
inline std::set<std::set<ulens::NodeId>> components(const ulens::CallGraph& g, bool strong) {
  auto a = adjacency(g, !strong);
  const auto d = floyd(a);
  const auto n = a.size();
  std::set<std::set<ulens::NodeId>> out;
  for (std::size_t v = 0; v < n; ++v) {
    std::set<ulens::NodeId> comp;
    for (std::size_t u = 0; u < n; ++u)
      if (d[v][u] < kInf && d[u][v] < kInf) comp.insert(static_cast<ulens::NodeId>(u));
    out.insert(comp);
  }
  return out;
}

// Newman's r from the joint distribution e_jk of remaining degrees at edge ends.
inline std::optional<double> assortativity(const ulens::CallGraph& g) {
  const auto a = adjacency(g, true);
  const auto n = a.size();
  std::vector<int> deg(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u) deg[v] += a[v][u];
  int kmax = 0;
  for (int k : deg) kmax = std::max(kmax, k);
  std::vector<std::vector<double>> e(kmax + 1, std::vector<double>(kmax + 1, 0.0));
  double ends = 0;
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u)
      if (a[v][u]) {
        e[deg[v] - 1][deg[u] - 1] += 1.0;
        ends += 1.0;
      }
  if (ends == 0) return std::nullopt;
  std::vector<double> q(kmax + 1, 0.0);
  for (int j = 0; j <= kmax; ++j)
    for (int k = 0; k <= kmax; ++k) {
      e[j][k] /= ends;
      q[j] += e[j][k];
    }
  double mean = 0, sq = 0;
  for (int j = 0; j <= kmax; ++j) {
    mean += j * q[j];
    sq += double(j) * j * q[j];
  }
  const double var = sq - mean * mean;
  if (std::abs(var) < 1e-15) return std::nullopt;
  double num = 0;
  for (int j = 0; j <= kmax; ++j)
    for (int k = 0; k <= kmax; ++k) num += double(j) * k * (e[j][k] - q[j] * q[k]);
  return num / var;
}

}  // namespace oracle
