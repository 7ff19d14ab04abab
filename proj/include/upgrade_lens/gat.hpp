#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "upgrade_lens/graph.hpp"
#include "upgrade_lens/metrics.hpp"

namespace ulens {

/// Columns of the per-node feature matrix.
enum FeatureColumn : Eigen::Index {
  kInDegree = 0,
  kOutDegree,
  kTotalDegree,
  kCloseness,
  kBetweenness,
  kClustering,
  kChangedFlag,
  kVulnerableFlag,
  kFeatureCount
};

/// n x 8. Structural columns are min-max scaled to [0, 1] (constant columns
/// become 0); the two flag columns are 0/1.
struct NodeFeatures {
  Eigen::MatrixXd matrix;
};

// Elementwise activations usable on any Eigen expression.

template <typename Derived>
auto leaky_relu(const Eigen::ArrayBase<Derived>& x, typename Derived::Scalar slope) {
  return (x > 0).select(x, slope * x);
}

template <typename Derived>
auto elu(const Eigen::ArrayBase<Derived>& x) {
  return (x > 0).select(x, x.exp() - 1);
}

/// Maps a vector onto [0, 1]; a constant vector maps to zeros.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> minmax_scale(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(v.size());
  if (v.size() == 0) return out;
  const Scalar lo = v.minCoeff();
  const Scalar hi = v.maxCoeff();
  if (!(hi > lo)) return out;
  out = (v.array() - lo) / (hi - lo);
  return out;
}

NodeFeatures build_features(const CallGraph& g, ClosenessMode closeness = ClosenessMode::undirected);

struct AttentionParams {
  Eigen::MatrixXd W;  // F' x F
  Eigen::VectorXd a;  // 2F'
  double leaky_slope = 0.2;

  /// W = I (F' = F), a = ones: the untrained default.
  static AttentionParams identity(Eigen::Index features = kFeatureCount);
};

/// Relative importance of degree, feature norm and closeness in beta.
struct BetaWeights {
  double degree = 1.0;
  double norm = 1.0;
  double closeness = 1.0;
};

/// Per-node composite s_v, a convex combination of min-max scaled total
/// degree, feature-row norm and closeness. The weights are normalised by
/// their sum and snapped to a 2^-32 grid, so any positive rescaling of
/// `weights` produces bitwise identical output.
Eigen::VectorXd composite_scores(const NodeFeatures& f, const BetaWeights& weights);

/// beta for every edge (indexed like g.edges()): the mean of the endpoint
/// composites. Throws DomainError for negative or all-zero weights.
std::vector<double> beta_weights(const CallGraph& g, const NodeFeatures& f, const BetaWeights& weights);

/// Edge-indexed attention quantities; edges are g.edges() order.
struct AttentionMap {
  std::vector<double> logits;       // e_ij after LeakyReLU
  std::vector<double> alpha;        // softmax over the source's out-neighbours
  std::vector<double> beta;
  std::vector<double> alpha_prime;  // alpha * beta, not renormalised
};

AttentionMap attention_coefficients(const CallGraph& g, const NodeFeatures& f,
                                    const AttentionParams& p, std::span<const double> beta);

/// h'_i = ELU(sum_j alpha'_ij W h_j) over out-neighbours; rows of sink nodes are zero.
Eigen::MatrixXd aggregate(const CallGraph& g, const NodeFeatures& f, const AttentionParams& p,
                          const AttentionMap& att);

struct ScoreSummary {
  std::size_t critical_count = 0;       // NC
  std::optional<double> max_critical;   // MSC
  std::optional<double> min_critical;   // mSC
  std::optional<double> mean_critical;  // ASC
  double mean_all = 0.0;                // AGS
};

struct GatScores {
  std::vector<double> raw;    // total revised attention received
  std::vector<double> score;  // min-max of raw; 0.5 everywhere when raw is constant
  ScoreSummary summary;
};

GatScores node_scores(const CallGraph& g, const AttentionMap& att, std::span<const NodeId> critical);

// Training

using NodePairs = std::vector<std::pair<NodeId, NodeId>>;

/// For every edge (i, j), `per_edge` pairs (i, k) with k drawn uniformly
/// (SplitMix64) among nodes that are neither i nor an out-neighbour of i.
NodePairs sample_negatives(const CallGraph& g, std::size_t per_edge, std::uint64_t seed);

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd dW;
  Eigen::VectorXd da;
};

/// Edge-reconstruction loss
///   -sum_E log sigmoid(h'_i . h'_j) - sum_neg log(1 - sigmoid(h'_i . h'_k))
/// and its analytic gradient with respect to W and a.
LossGradient reconstruction_loss(const CallGraph& g, const NodeFeatures& f, const AttentionParams& p,
                                 std::span<const double> beta, const NodePairs& negatives);

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.05;
  std::size_t negative_samples = 1;
  std::uint64_t seed = 42;
};

struct TrainResult {
  AttentionParams params;
  std::vector<double> loss_history;  // loss before each epoch, plus the final loss
};

/// Full-batch gradient descent with step halving whenever a step would
/// raise the loss, so the recorded loss never increases. Throws DomainError
/// for graphs without edges or with fewer than two nodes.
TrainResult train_attention(const CallGraph& g, const NodeFeatures& f, std::span<const double> beta,
                            const TrainConfig& config,
                            const std::optional<AttentionParams>& initial = std::nullopt);

}  // namespace ulens
