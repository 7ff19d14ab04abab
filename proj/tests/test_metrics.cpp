#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/metrics.hpp"
#include "upgrade_lens/synthetic.hpp"

using namespace ulens;
using oracle::make_graph;

namespace {

const auto kPath3 = make_graph(3, {{0, 1}, {1, 2}}, false);
const auto kStar4 = make_graph(4, {{0, 1}, {0, 2}, {0, 3}}, false);
const auto kTriangle = make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, false);

std::set<std::set<NodeId>> as_sets(const ComponentList& comps) {
  std::set<std::set<NodeId>> out;
  for (const auto& c : comps) out.emplace(c.begin(), c.end());
  return out;
}

}  // namespace

TEST_CASE("degree_centrality") {
  for (const auto& d : degree_centrality(kTriangle)) CHECK(d.total == 2);
  const auto iso = make_graph(1, {});
  CHECK(degree_centrality(iso)[0] == DegreeCounts{0, 0, 0});

  const auto g = random_digraph(30, 0.1, 7);
  std::size_t total = 0;
  for (const auto& d : degree_centrality(g)) {
    CHECK(d.total == d.in + d.out);
    total += d.total;
  }
  CHECK(total == 2 * g.num_edges());
}

TEST_CASE("average degree and density reproduce the published base columns") {
  CHECK(average_degree(19569, 37615) == doctest::Approx(3.8443).epsilon(1e-4));
  CHECK(average_degree(9621, 15186) == doctest::Approx(3.1568).epsilon(1e-4));
  CHECK(density(2, 1) == 1.0);
  CHECK(density(1, 0) == 0.0);
  CHECK(density(0, 0) == 0.0);
  // published densities carry 4-5 significant digits
  CHECK(std::abs(density(9621, 15186) - 0.0003281) < 1e-7);
  CHECK(std::abs(density(19569, 37615) - 0.00019646) < 1e-7);
  CHECK(std::abs(density(15908, 29449) - 0.00023275) < 1e-7);
}

TEST_CASE("closeness_centrality anchors") {
  const auto cc = closeness_centrality(kPath3);
  CHECK(cc[1] == 1.0);
  CHECK(cc[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(closeness_centrality(make_graph(1, {}))[0] == 0.0);
  CHECK(closeness_centrality(kStar4)[0] == 1.0);

  // Directed modes on a one-way chain 0->1->2.
  const auto chain = make_graph(3, {{0, 1}, {1, 2}});
  const auto out = closeness_centrality(chain, ClosenessMode::out);
  const auto in = closeness_centrality(chain, ClosenessMode::in);
  CHECK(out[0] == doctest::Approx(2.0 / 3.0));
  CHECK(out[2] == 0.0);
  CHECK(in[2] == doctest::Approx(2.0 / 3.0));
  CHECK(in[0] == 0.0);
  // node 1 reaches one peer at distance 1 out of n-1 = 2
  CHECK(out[1] == doctest::Approx(0.5));
}

TEST_CASE("betweenness_centrality anchors") {
  CHECK(betweenness_centrality(kPath3)[1] == 1.0);
  CHECK(betweenness_centrality(kStar4)[0] == 3.0);
  for (NodeId leaf = 1; leaf < 4; ++leaf) CHECK(betweenness_centrality(kStar4)[leaf] == 0.0);
  // normalised star centre: 3 / ((3*2)/2) = 1
  CHECK(betweenness_centrality(kStar4, true)[0] == 1.0);
  CHECK(betweenness_centrality(make_graph(2, {{0, 1}}), true) == std::vector<double>{0.0, 0.0});

  // leaves of a random tree carry no through-paths
  const auto tree = make_graph(6, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}}, false);
  const auto bc = betweenness_centrality(tree);
  for (NodeId leaf : {3u, 4u, 5u}) CHECK(bc[leaf] == 0.0);
}

TEST_CASE("betweenness is bitwise identical across thread counts") {
  const auto g = random_digraph(150, 0.04, 99);
  const auto one = betweenness_centrality(g, false, 1);
  for (unsigned t : {2u, 3u, 8u}) CHECK(betweenness_centrality(g, false, t) == one);
}

TEST_CASE("clustering_coefficients") {
  const auto tri = clustering_coefficients(kTriangle);
  CHECK(tri.average == 1.0);
  CHECK(clustering_coefficients(kStar4).average == 0.0);

  // triangle 0-1-2 plus pendant 3 on corner 2
  const auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}});
  const auto c = clustering_coefficients(g);
  CHECK(c.per_node[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(c.per_node[3] == 0.0);
  CHECK(c.average == doctest::Approx((1.0 + 1.0 + 1.0 / 3.0 + 0.0) / 4.0).epsilon(1e-15));

  // self-loops do not count towards k
  const auto looped = make_graph(3, {{0, 1}, {1, 2}, {0, 2}, {0, 0}});
  CHECK(clustering_coefficients(looped).per_node[0] == 1.0);
}

TEST_CASE("connected_components") {
  CHECK(connected_components(make_graph(4, {{0, 1}, {2, 3}})).size() == 2);
  const auto arc = make_graph(2, {{0, 1}});
  CHECK(connected_components(arc, ComponentKind::weak).size() == 1);
  CHECK(connected_components(arc, ComponentKind::strong).size() == 2);
  CHECK(connected_components(make_graph(3, {{0, 1}, {1, 2}, {2, 0}}), ComponentKind::strong).size() ==
        1);
}

TEST_CASE("degree_assortativity") {
  CHECK(*degree_assortativity(kPath3) == -1.0);
  CHECK(*degree_assortativity(kStar4) == -1.0);
  CHECK_FALSE(degree_assortativity(make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})).has_value());
  CHECK_FALSE(degree_assortativity(make_graph(3, {})).has_value());
  // directed input is projected first
  CHECK(*degree_assortativity(make_graph(3, {{0, 1}, {2, 1}})) == -1.0);
}

TEST_CASE("cyclomatic_complexity") {
  CHECK(cyclomatic_complexity(make_graph(1, {})) == 1);
  CHECK(cyclomatic_complexity(15186, 9621, 327) == 6219);
  CHECK(cyclomatic_complexity(37615, 19569, 440) == 18926);
  CHECK(cyclomatic_complexity(29449, 15908, 337) == 14215);
}

TEST_CASE("feature_norms") {
  const std::vector<std::vector<double>> rows{{0, 0}, {3, 4}};
  CHECK(feature_norms(rows) == std::vector<double>{0.0, 5.0});

  // 8-dimensional vector; sum of squares written out by hand = 204
  const std::vector<std::vector<double>> eight{{1, 2, 3, 4, 5, 6, 7, 8}};
  CHECK(feature_norms(eight)[0] == doctest::Approx(std::sqrt(204.0)).epsilon(1e-15));

  const std::vector<std::vector<double>> ragged{{1, 2}, {1}};
  CHECK_THROWS_AS(feature_norms(ragged), DomainError);

  Eigen::MatrixXd m(2, 2);
  m << 3, 4, 0, 0;
  CHECK(feature_norms(m)(0) == 5.0);
}

TEST_CASE("metrics_report") {
  SUBCASE("empty graph") {
    const auto r = metrics_report(CallGraph{});
    CHECK(r.empty);
    CHECK(r.n_nodes == 0);
    CHECK(r.avg_degree == 0.0);
    CHECK(r.cyclomatic == 0);
    CHECK_FALSE(r.assortativity.has_value());
  }
  SUBCASE("synthetic graph with a published base-column shape") {
    const auto g = synthetic_graph(9621, 15186, 327, 1);
    CHECK(g.num_nodes() == 9621);
    CHECK(g.num_edges() == 15186);
    CHECK(connected_components(g).size() == 327);
    // aggregate-only fields; skip centralities for speed
    CHECK(cyclomatic_complexity(g) == 6219);
    CHECK(average_degree(g.num_nodes(), g.num_edges()) == doctest::Approx(3.1568).epsilon(1e-4));
  }
  SUBCASE("random graph against brute force") {
    const auto g = random_digraph(30, 0.12, 2024);
    const auto r = metrics_report(g);
    const double n = 30.0;
    double bc = 0, cc = 0, cl = 0;
    for (double x : oracle::betweenness(g)) bc += x;
    for (double x : oracle::closeness(g, 0)) cc += x;
    for (double x : oracle::clustering(g)) cl += x;
    CHECK(r.avg_betweenness == doctest::Approx(bc / n).epsilon(1e-12));
    CHECK(r.avg_betweenness_normalized == doctest::Approx(bc / n / (29.0 * 28.0)).epsilon(1e-12));
    CHECK(r.avg_closeness == doctest::Approx(cc / n).epsilon(1e-12));
    CHECK(r.avg_clustering == doctest::Approx(cl / n).epsilon(1e-12));
    CHECK(r.n_components == oracle::components(g, false).size());
    CHECK(r.n_strong_components == oracle::components(g, true).size());
    CHECK(r.avg_degree * n == doctest::Approx(2.0 * double(g.num_edges())));
    CHECK(r.cyclomatic == (long long)g.num_edges() - 30 + 2 * (long long)r.n_components);
    CHECK(*r.assortativity == doctest::Approx(*oracle::assortativity(g)).epsilon(1e-10));
  }
}

TEST_CASE("removing an isolated node leaves other metrics unchanged") {
  auto g = random_digraph(20, 0.15, 5);
  auto nodes = g.nodes();
  FunctionNode extra;
  extra.path = "iso.py";
  extra.name = "lonely";
  nodes.push_back(extra);
  const CallGraph with_iso(nodes, g.edges());
  const auto bc0 = betweenness_centrality(g);
  const auto bc1 = betweenness_centrality(with_iso);
  const auto cl0 = clustering_coefficients(g).per_node;
  const auto cl1 = clustering_coefficients(with_iso).per_node;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    CHECK(bc0[v] == bc1[v]);
    CHECK(cl0[v] == cl1[v]);
  }
}

TEST_CASE("oracle agreement on seeded random graphs") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 3 + seed % 30;
    const double p = 0.05 + 0.25 * double(seed % 7) / 6.0;
    const auto g = random_digraph(n, p, seed);
    const auto u = undirected_projection(g);
    const auto bc = betweenness_centrality(g);
    const auto bcu = betweenness_centrality(u);
    const auto ob = oracle::betweenness(g);
    const auto obu = oracle::betweenness(u);
    for (std::size_t v = 0; v < n; ++v) {
      CHECK(bc[v] == doctest::Approx(ob[v]).epsilon(1e-12));
      CHECK(bcu[v] == doctest::Approx(obu[v]).epsilon(1e-12));
    }
    for (int mode = 0; mode < 3; ++mode) {
      const auto cc = closeness_centrality(g, static_cast<ClosenessMode>(mode));
      const auto oc = oracle::closeness(g, mode);
      for (std::size_t v = 0; v < n; ++v) CHECK(std::abs(cc[v] - oc[v]) < 1e-12);
    }
    CHECK(as_sets(connected_components(g, ComponentKind::weak)) == oracle::components(g, false));
    CHECK(as_sets(connected_components(g, ComponentKind::strong)) == oracle::components(g, true));
  }
}
