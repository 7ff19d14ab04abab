#pragma once

#include <span>
#include <vector>

#include "upgrade_lens/diff.hpp"
#include "upgrade_lens/metrics.hpp"

namespace ulens {

enum class TestKind { welch_t, ks_two_sample };

struct StatTestResult {
  double statistic = 0.0;  // +-inf when degenerate
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  TestKind kind = TestKind::welch_t;
  double degrees_of_freedom = 0.0;  // Welch only
  bool degenerate = false;          // both samples constant with different means
};

/// Two-sided Welch t-test. Requires two or more values per sample.
StatTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// Q(sqrt(n_a n_b / (n_a + n_b)) D). Less accurate below ~20 values per sample.
StatTestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Kolmogorov limiting survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1 entries
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max], last bin closed. A constant sample
/// gives one bin; an empty sample gives an empty histogram.
Histogram closeness_histogram(std::span<const double> values, std::size_t bins);

enum class SampleMode { changed_vs_all, changed_vs_unchanged };

struct SubgraphTests {
  StatTestResult welch;
  StatTestResult ks;
  std::vector<double> sample_a;
  std::vector<double> sample_b;
};

/// Closeness (computed on the whole upgraded graph) of changed nodes against
/// all nodes, or against unchanged nodes. Throws DomainError when the
/// changed set is empty.
SubgraphTests compare_changed_vs_all(const UpgradeComparison& cmp,
                                     SampleMode mode = SampleMode::changed_vs_all,
                                     ClosenessMode closeness = ClosenessMode::undirected);

}  // namespace ulens
