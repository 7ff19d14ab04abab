#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "upgrade_lens/errors.hpp"

namespace ulens {

struct PcaResult {
  Eigen::MatrixXd coordinates;  // n x k
  Eigen::VectorXd variances;    // k, non-increasing
  Eigen::MatrixXd components;   // F x k, orthonormal columns
  Eigen::Index rank = 0;
  bool rank_deficient = false;  // k exceeded the numerical rank
};

struct PcaOptions {
  double tolerance = 1e-10;
  int max_iterations = 100000;
};

/// Projects the centred rows of `data` onto the top-k covariance
/// eigenvectors, found by power iteration with deflation. Each component is
/// signed so that its largest-magnitude loading is positive.
template <typename Derived>
PcaResult pca_project(const Eigen::MatrixBase<Derived>& data, Eigen::Index k, const PcaOptions& options = {}) {
  using Eigen::Index;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Index n = data.rows();
  const Index f = data.cols();
  if (n < 2) throw DomainError("pca_project needs at least two rows");
  if (k < 1 || k > f) throw DomainError("pca_project: k must be between 1 and the column count");

  const MatrixXd x = data.template cast<double>();
  const MatrixXd centred = x.rowwise() - x.colwise().mean();
  MatrixXd cov = centred.transpose() * centred / static_cast<double>(n - 1);

  PcaResult out;
  out.components = MatrixXd::Zero(f, k);
  out.variances = VectorXd::Zero(k);
  const double scale = std::max(1.0, cov.diagonal().maxCoeff());
  const double rank_floor = 1e-12 * scale;

  for (Index c = 0; c < k; ++c) {
    // deterministic start; nudged off any already-found direction
    VectorXd v = VectorXd::LinSpaced(f, 1.0, 2.0);
    for (Index p = 0; p < c; ++p) v -= v.dot(out.components.col(p)) * out.components.col(p);
    if (v.norm() < 1e-12) v = VectorXd::Unit(f, c);
    v.normalize();

    double lambda = 0.0;
    for (int it = 0; it < options.max_iterations; ++it) {
      VectorXd w = cov * v;
      for (Index p = 0; p < c; ++p) w -= w.dot(out.components.col(p)) * out.components.col(p);
      lambda = v.dot(w);
      if ((w - lambda * v).norm() <= options.tolerance * scale) break;
      const double len = w.norm();
      if (len < rank_floor) {
        lambda = 0.0;
        break;
      }
      v = w / len;
    }
    if (lambda <= rank_floor) {
      out.rank_deficient = true;
      break;
    }
    Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    out.components.col(c) = v;
    out.variances(c) = lambda;
    out.rank = c + 1;
  }
  out.coordinates = centred * out.components;
  return out;
}

}  // namespace ulens
