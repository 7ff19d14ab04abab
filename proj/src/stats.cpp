#include "upgrade_lens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "upgrade_lens/errors.hpp"

namespace ulens {

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

Moments moments(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.variance = ss / static_cast<double>(xs.size() - 1);
  return m;
}

// Lentz's method for the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 1000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw DomainError("incomplete_beta: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  double q;
  if (lambda < 1.18) {
    // Jacobi-theta form of the CDF converges fast for small lambda.
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::pow(y, (2.0 * k - 1) * (2.0 * k - 1));
      sum += term;
      if (term < 1e-20 * sum) break;
    }
    q = 1.0 - std::sqrt(2.0 * pi) / lambda * sum;
  } else {
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      sum += sign * term;
      sign = -sign;
      if (term < 1e-20) break;
    }
    q = 2.0 * sum;
  }
  return std::clamp(q, 0.0, 1.0);
}

StatTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DomainError("welch_t_test needs at least two values per sample");
  StatTestResult r;
  r.kind = TestKind::welch_t;
  r.n_a = a.size();
  r.n_b = b.size();
  const auto ma = moments(a);
  const auto mb = moments(b);
  const double va = ma.variance / static_cast<double>(r.n_a);
  const double vb = mb.variance / static_cast<double>(r.n_b);
  const double se2 = va + vb;
  if (se2 == 0.0) {
    if (ma.mean == mb.mean) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = ma.mean < mb.mean ? -std::numeric_limits<double>::infinity()
                                      : std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.degenerate = true;
    }
    return r;
  }
  r.statistic = (ma.mean - mb.mean) / std::sqrt(se2);
  r.degrees_of_freedom =
      se2 * se2 / (va * va / static_cast<double>(r.n_a - 1) + vb * vb / static_cast<double>(r.n_b - 1));
  const double df = r.degrees_of_freedom;
  r.p_value = std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + r.statistic * r.statistic)), 0.0, 1.0);
  return r;
}

StatTestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j]))
      x = sa[i];
    else
      x = sb[j];
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }

  StatTestResult r;
  r.kind = TestKind::ks_two_sample;
  r.n_a = sa.size();
  r.n_b = sb.size();
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(na * nb / (na + nb)) * d);
  return r;
}

Histogram closeness_histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw DomainError("histogram needs at least one bin");
  Histogram h;
  if (values.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    h.edges = {lo, hi};
    h.counts = {values.size()};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double x : values) {
    // first edge strictly greater than x, excluding the closing edge
    const auto it = std::upper_bound(h.edges.begin(), h.edges.end() - 1, x);
    const auto bin = static_cast<std::size_t>(it - h.edges.begin()) - 1;
    ++h.counts[std::min(bin, bins - 1)];
  }
  return h;
}

SubgraphTests compare_changed_vs_all(const UpgradeComparison& cmp, SampleMode mode,
                                     ClosenessMode closeness) {
  if (cmp.changed_ids.empty()) throw DomainError("no changed functions to compare");
  const auto cc = closeness_centrality(cmp.upgraded, closeness);
  SubgraphTests out;
  std::vector<bool> is_changed(cc.size(), false);
  for (NodeId id : cmp.changed_ids) {
    is_changed.at(id) = true;
    out.sample_a.push_back(cc[id]);
  }
  for (NodeId id = 0; id < cc.size(); ++id)
    if (mode == SampleMode::changed_vs_all || !is_changed[id]) out.sample_b.push_back(cc[id]);
  if (out.sample_b.empty()) throw DomainError("comparison sample is empty");
  out.welch = welch_t_test(out.sample_a, out.sample_b);
  out.ks = ks_two_sample(out.sample_a, out.sample_b);
  return out;
}

}  // namespace ulens
