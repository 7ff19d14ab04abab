#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "oracles.hpp"
#include "stat_oracles.hpp"
#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/rng.hpp"
#include "upgrade_lens/stats.hpp"
#include "upgrade_lens/synthetic.hpp"

using namespace ulens;

namespace {

std::vector<double> draws(SplitMix64& rng, std::size_t n, double scale, double shift) {
  std::vector<double> v(n);
  for (auto& x : v) x = shift + scale * rng.uniform();
  return v;
}

}  // namespace

using stat_oracle::ks_oracle;
using stat_oracle::kolmogorov_oracle;
using stat_oracle::welch_oracle;

TEST_CASE("special functions against reference values") {
  // reference values from scipy.special.betainc / scipy.stats
  CHECK(incomplete_beta(2.5, 0.5, 0.3) == doctest::Approx(0.018927124071945658).epsilon(1e-12));
  CHECK(incomplete_beta(20, 30, 0.45) == doctest::Approx(0.7671113932134301).epsilon(1e-12));
  CHECK(student_t_cdf(-2.5, 7.3) == doctest::Approx(0.019825117332800207).epsilon(1e-10));
  CHECK(student_t_cdf(1.2, 3.0) == doctest::Approx(0.8418689426509476).epsilon(1e-10));
  CHECK(student_t_cdf(-12, 40) == doctest::Approx(3.912085652127985e-15).epsilon(1e-9));
  const std::pair<double, double> ks_ref[] = {
      {0.3, 0.9999906941986655}, {0.5, 0.9639452436648751}, {1.0, 0.26999967167735456},
      {1.18, 0.1234538094297657}, {1.5, 0.022217962616525127}, {2.0, 0.0006709252557796953},
      {3.0, 3.045995948942526e-08}};
  for (auto [lambda, q] : ks_ref) CHECK(kolmogorov_survival(lambda) == doctest::Approx(q).epsilon(1e-10));
  CHECK(kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("welch_t_test") {
  SUBCASE("identical samples") {
    const std::vector<double> a{1, 2, 3};
    const auto r = welch_t_test(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("zero variance, different means") {
    const std::vector<double> a{0, 0, 0}, b{1, 1, 1};
    const auto r = welch_t_test(a, b);
    CHECK(r.degenerate);
    CHECK(std::isinf(r.statistic));
    CHECK(r.statistic < 0);
    CHECK(r.p_value == 0.0);
  }
  SUBCASE("closed form") {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10};
    const auto r = welch_t_test(a, b);
    const auto [t, df] = welch_oracle(a, b);
    CHECK(std::abs(r.statistic - t) < 1e-10);
    CHECK(std::abs(r.degrees_of_freedom - df) < 1e-10);
    // scipy.stats.ttest_ind(equal_var=False)
    CHECK(r.statistic == doctest::Approx(-1.8973665961010275).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.10753119493062718).epsilon(1e-9));
  }
  SUBCASE("too small") {
    const std::vector<double> a{1}, b{1, 2};
    CHECK_THROWS_AS(welch_t_test(a, b), DomainError);
  }
  SUBCASE("antisymmetry and shift invariance") {
    SplitMix64 rng(5);
    for (int i = 0; i < 20; ++i) {
      auto a = draws(rng, 12, 1.0, 0.0), b = draws(rng, 9, 2.0, 0.3);
      const auto ab = welch_t_test(a, b), ba = welch_t_test(b, a);
      CHECK(ab.statistic == -ba.statistic);
      CHECK(ab.p_value == ba.p_value);
      for (auto& x : a) x += 0.25;
      for (auto& x : b) x += 0.25;
      const auto shifted = welch_t_test(a, b);
      CHECK(shifted.statistic == doctest::Approx(ab.statistic).epsilon(1e-9));
    }
  }
}

TEST_CASE("ks_two_sample") {
  SUBCASE("identical samples") {
    const std::vector<double> a{3, 1, 2};
    const auto r = ks_two_sample(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("disjoint supports") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    CHECK(ks_two_sample(a, b).statistic == 1.0);
  }
  SUBCASE("shifted uniform draws match the EDF scan exactly") {
    SplitMix64 rng(2024);
    auto a = draws(rng, 100, 1.0, 0.0);
    auto b = a;
    for (auto& x : b) x += 0.5;
    const auto r = ks_two_sample(a, b);
    CHECK(r.statistic == ks_oracle(a, b));
  }
  SUBCASE("reference p-value") {
    const std::vector<double> a{0.1, 0.5, 0.3, 0.9, 0.7, 0.2, 0.35, 0.8};
    const std::vector<double> b{0.4, 1.1, 0.8, 1.5, 1.2, 0.95};
    const auto r = ks_two_sample(a, b);
    CHECK(r.statistic == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // scipy.stats.kstwobign.sf(sqrt(48/14) * 2/3)
    CHECK(r.p_value == doctest::Approx(0.09493347897299229).epsilon(1e-10));
  }
  SUBCASE("ties across samples") {
    const std::vector<double> a{1, 1, 2, 2}, b{1, 2, 2, 3};
    CHECK(ks_two_sample(a, b).statistic == ks_oracle(a, b));
  }
  SUBCASE("monotone transform invariance") {
    SplitMix64 rng(9);
    auto a = draws(rng, 30, 1.0, 0.0), b = draws(rng, 25, 1.0, 0.2);
    const auto r = ks_two_sample(a, b);
    for (auto& x : a) x = std::exp(3 * x);
    for (auto& x : b) x = std::exp(3 * x);
    CHECK(ks_two_sample(a, b).statistic == r.statistic);
  }
}

TEST_CASE("p-values fall as one sample moves away") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = draws(rng, 40, 1.0, 0.0);
    const auto base = a;
    double last_t = 2.0, last_ks = 2.0;
    for (double offset = 0.0; offset <= 2.0; offset += 0.1) {
      auto b = base;
      for (auto& x : b) x += offset;
      const auto t = welch_t_test(a, b);
      const auto ks = ks_two_sample(a, b);
      CHECK(t.p_value <= last_t);
      CHECK(ks.p_value <= last_ks);
      last_t = t.p_value;
      last_ks = ks.p_value;
    }
  }
}

TEST_CASE("oracle agreement on seeded sample pairs") {
  SplitMix64 rng(31337);
  for (int i = 0; i < 50; ++i) {
    const std::size_t na = 2 + rng.below(60), nb = 2 + rng.below(60);
    const auto a = draws(rng, na, 1.0 + rng.uniform(), 0.0);
    const auto b = draws(rng, nb, 1.0 + rng.uniform(), 0.5 * rng.uniform());
    const auto w = welch_t_test(a, b);
    const auto [t, df] = welch_oracle(a, b);
    CHECK(std::abs(w.statistic - t) < 1e-10);
    const boost::math::students_t dist(df);
    const double p = 2.0 * boost::math::cdf(dist, -std::abs(t));
    CHECK(std::abs(w.p_value - p) < 1e-6);

    const auto ks = ks_two_sample(a, b);
    const double d = ks_oracle(a, b);
    CHECK(std::abs(ks.statistic - d) < 1e-10);
    const double en = double(na) * double(nb) / double(na + nb);
    CHECK(std::abs(ks.p_value - kolmogorov_oracle(std::sqrt(en) * d)) < 1e-6);
  }
}

TEST_CASE("closeness_histogram") {
  SUBCASE("two values, two bins") {
    const std::vector<double> v{0, 1};
    const auto h = closeness_histogram(v, 2);
    CHECK(h.counts == std::vector<std::size_t>{1, 1});
    CHECK(h.edges == std::vector<double>{0.0, 0.5, 1.0});
  }
  SUBCASE("constant sample") {
    const std::vector<double> v{0.3, 0.3, 0.3};
    const auto h = closeness_histogram(v, 10);
    CHECK(h.counts == std::vector<std::size_t>{3});
  }
  SUBCASE("empty sample") { CHECK(closeness_histogram({}, 5).counts.empty()); }
  SUBCASE("zero bins") {
    const std::vector<double> v{1};
    CHECK_THROWS_AS(closeness_histogram(v, 0), DomainError);
  }
  SUBCASE("naive binning oracle") {
    SplitMix64 rng(1000);
    const auto v = draws(rng, 1000, 1.0, 0.0);
    const auto h = closeness_histogram(v, 50);
    REQUIRE(h.counts.size() == 50);
    std::size_t total = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      std::size_t c = 0;
      for (double x : v) {
        const bool last = i == 49;
        if (x >= h.edges[i] && (x < h.edges[i + 1] || (last && x <= h.edges[i + 1]))) ++c;
      }
      CHECK(h.counts[i] == c);
      total += h.counts[i];
    }
    CHECK(total == 1000);
  }
}

TEST_CASE("compare_changed_vs_all") {
  const auto g = random_digraph(40, 0.08, 4);
  BodyHashes h;
  for (const auto& n : g.nodes()) h[n.key()] = {"x", "x"};

  SUBCASE("all nodes changed") {
    for (auto& [k, v] : h) v.upgraded = "y";
    const auto r = compare_changed_vs_all(diff_versions(g, g, h));
    CHECK(r.ks.statistic == 0.0);
    CHECK(r.welch.statistic == 0.0);
  }
  SUBCASE("composition of closeness and both tests") {
    for (NodeId id : {1u, 7u, 12u, 20u, 33u}) h[g.node(id).key()].upgraded = "y";
    const auto cmp = diff_versions(g, g, h);
    REQUIRE(cmp.changed_ids.size() == 5);
    const auto r = compare_changed_vs_all(cmp);
    const auto cc = closeness_centrality(g);
    std::vector<double> a;
    for (NodeId id : {1u, 7u, 12u, 20u, 33u}) a.push_back(cc[id]);
    CHECK(r.welch.statistic == welch_t_test(a, cc).statistic);
    CHECK(r.ks.statistic == ks_two_sample(a, cc).statistic);
    CHECK(r.ks.p_value == ks_two_sample(a, cc).p_value);
    CHECK(r.sample_b.size() == 40);

    const auto rest = compare_changed_vs_all(cmp, SampleMode::changed_vs_unchanged);
    CHECK(rest.sample_b.size() == 35);
  }
  SUBCASE("empty changed set") {
    CHECK_THROWS_AS(compare_changed_vs_all(diff_versions(g, g, h)), DomainError);
  }
}
