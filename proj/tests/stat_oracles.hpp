#pragma once

// Closed-form and brute-force references for the two-sample tests.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace stat_oracle {

// Welch statistic and df written out from the textbook formula.
inline std::pair<double, double> welch_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v;
    return s / double(x.size());
  };
  auto var = [&](const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return s / double(x.size() - 1);
  };
  const double qa = var(a) / double(a.size()), qb = var(b) / double(b.size());
  const double t = (mean(a) - mean(b)) / std::sqrt(qa + qb);
  const double df = (qa + qb) * (qa + qb) /
                    (qa * qa / double(a.size() - 1) + qb * qb / double(b.size() - 1));
  return {t, df};
}

// sup over all sample points of |F_a - F_b| by direct counting.
inline double ks_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  auto scan = [&](double x) {
    std::size_t ca = 0, cb = 0;
    for (double v : a) ca += v <= x;
    for (double v : b) cb += v <= x;
    d = std::max(d, std::abs(double(ca) / double(a.size()) - double(cb) / double(b.size())));
  };
  for (double x : a) scan(x);
  for (double x : b) scan(x);
  return d;
}

// Alternating series only, summed until terms vanish.
inline double kolmogorov_oracle(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0;
  for (int k = 1; k < 100000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

}  // namespace stat_oracle
