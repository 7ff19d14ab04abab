#include "upgrade_lens/gat.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/rng.hpp"

namespace ulens {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Forward {
  MatrixXd z;  // rows: W h_i
  VectorXd pre;
  AttentionMap att;
  MatrixXd u;  // pre-activation aggregate
  MatrixXd h;  // ELU(u)
};

void check_dimensions(const CallGraph& g, const NodeFeatures& f, const AttentionParams& p,
                      std::span<const double> beta) {
  if (f.matrix.rows() != static_cast<Index>(g.num_nodes()))
    throw DomainError("feature matrix row count does not match the graph");
  if (p.W.cols() != f.matrix.cols()) throw DomainError("W column count must equal the feature count");
  if (p.a.size() != 2 * p.W.rows()) throw DomainError("attention vector must have 2F' entries");
  if (beta.size() != g.num_edges()) throw DomainError("beta must have one entry per edge");
}

Forward forward(const CallGraph& g, const NodeFeatures& f, const AttentionParams& p,
                std::span<const double> beta) {
  check_dimensions(g, f, p, beta);
  const Index fp = p.W.rows();
  const auto m = g.num_edges();
  Forward fw;
  fw.z = f.matrix * p.W.transpose();
  const VectorXd src_term = fw.z * p.a.head(fp);
  const VectorXd dst_term = fw.z * p.a.tail(fp);

  auto& att = fw.att;
  fw.pre.resize(static_cast<Index>(m));
  att.logits.resize(m);
  att.alpha.assign(m, 0.0);
  att.beta.assign(beta.begin(), beta.end());
  att.alpha_prime.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& e = g.edges()[k];
    const double s = src_term(e.source) + dst_term(e.target);
    fw.pre(static_cast<Index>(k)) = s;
    att.logits[k] = s > 0 ? s : p.leaky_slope * s;
  }

  fw.u = MatrixXd::Zero(static_cast<Index>(g.num_nodes()), fp);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto out = g.out_edges(i);
    if (out.empty()) continue;
    double top = att.logits[out.front()];
    for (auto k : out) top = std::max(top, att.logits[k]);
    double denom = 0.0;
    for (auto k : out) denom += std::exp(att.logits[k] - top);
    for (auto k : out) {
      att.alpha[k] = std::exp(att.logits[k] - top) / denom;
      att.alpha_prime[k] = att.alpha[k] * att.beta[k];
      fw.u.row(i) += att.alpha_prime[k] * fw.z.row(g.edges()[k].target);
    }
  }
  fw.h = elu(fw.u.array()).matrix();
  return fw;
}

// Normalised weight, snapped so that rescaled inputs give identical bits.
double snapped_ratio(double part, double total) {
  const long double ratio = static_cast<long double>(part) / static_cast<long double>(total);
  constexpr long double kGrid = 4294967296.0L;  // 2^32
  return static_cast<double>(std::nearbyint(ratio * kGrid) / kGrid);
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

NodeFeatures build_features(const CallGraph& g, ClosenessMode closeness) {
  const auto n = static_cast<Index>(g.num_nodes());
  MatrixXd raw(n, kFeatureCount);
  const auto deg = degree_centrality(g);
  const auto cc = closeness_centrality(g, closeness);
  const auto bc = betweenness_centrality(g);
  const auto cl = clustering_coefficients(g).per_node;
  for (Index v = 0; v < n; ++v) {
    const auto& node = g.node(static_cast<NodeId>(v));
    raw(v, kInDegree) = static_cast<double>(deg[v].in);
    raw(v, kOutDegree) = static_cast<double>(deg[v].out);
    raw(v, kTotalDegree) = static_cast<double>(deg[v].total);
    raw(v, kCloseness) = cc[v];
    raw(v, kBetweenness) = bc[v];
    raw(v, kClustering) = cl[v];
    raw(v, kChangedFlag) = node.changed ? 1.0 : 0.0;
    raw(v, kVulnerableFlag) = node.vulnerable ? 1.0 : 0.0;
  }
  NodeFeatures f;
  f.matrix = raw;
  for (Index c = kInDegree; c <= kClustering; ++c) f.matrix.col(c) = minmax_scale(raw.col(c));
  return f;
}

AttentionParams AttentionParams::identity(Index features) {
  AttentionParams p;
  p.W = MatrixXd::Identity(features, features);
  p.a = VectorXd::Ones(2 * features);
  return p;
}

Eigen::VectorXd composite_scores(const NodeFeatures& f, const BetaWeights& weights) {
  const double total = weights.degree + weights.norm + weights.closeness;
  if (weights.degree < 0 || weights.norm < 0 || weights.closeness < 0 || !(total > 0) ||
      !std::isfinite(total))
    throw DomainError("beta weights must be non-negative and not all zero");
  const double wd = snapped_ratio(weights.degree, total);
  const double wn = snapped_ratio(weights.norm, total);
  const double wc = snapped_ratio(weights.closeness, total);

  const VectorXd degree = minmax_scale(f.matrix.col(kTotalDegree));
  const VectorXd norm = minmax_scale(VectorXd(f.matrix.rowwise().norm()));
  const VectorXd close = minmax_scale(f.matrix.col(kCloseness));
  VectorXd s = wd * degree + wn * norm + wc * close;
  // snapped weights may sum to a hair above 1
  return s.cwiseMin(1.0).cwiseMax(0.0);
}

std::vector<double> beta_weights(const CallGraph& g, const NodeFeatures& f, const BetaWeights& weights) {
  if (f.matrix.rows() != static_cast<Index>(g.num_nodes()))
    throw DomainError("feature matrix row count does not match the graph");
  const VectorXd s = composite_scores(f, weights);
  std::vector<double> beta(g.num_edges());
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const auto& e = g.edges()[k];
    beta[k] = 0.5 * (s(e.source) + s(e.target));
  }
  return beta;
}

AttentionMap attention_coefficients(const CallGraph& g, const NodeFeatures& f,
                                    const AttentionParams& p, std::span<const double> beta) {
  return forward(g, f, p, beta).att;
}

Eigen::MatrixXd aggregate(const CallGraph& g, const NodeFeatures& f, const AttentionParams& p,
                          const AttentionMap& att) {
  check_dimensions(g, f, p, att.beta);
  if (att.alpha_prime.size() != g.num_edges()) throw DomainError("attention map does not match the graph");
  const MatrixXd z = f.matrix * p.W.transpose();
  MatrixXd u = MatrixXd::Zero(static_cast<Index>(g.num_nodes()), p.W.rows());
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    for (auto k : g.out_edges(i)) u.row(i) += att.alpha_prime[k] * z.row(g.edges()[k].target);
  return elu(u.array()).matrix();
}

GatScores node_scores(const CallGraph& g, const AttentionMap& att, std::span<const NodeId> critical) {
  const auto n = g.num_nodes();
  if (att.alpha_prime.size() != g.num_edges()) throw DomainError("attention map does not match the graph");
  for (NodeId id : critical)
    if (id >= n) throw DomainError("critical node id " + std::to_string(id) + " not in graph");

  GatScores out;
  out.raw.assign(n, 0.0);
  for (NodeId v = 0; v < n; ++v)
    for (auto k : g.in_edges(v)) out.raw[v] += att.alpha_prime[k];

  out.score.assign(n, 0.5);
  if (n > 0) {
    const auto [lo, hi] = std::minmax_element(out.raw.begin(), out.raw.end());
    if (*hi > *lo)
      for (std::size_t v = 0; v < n; ++v) out.score[v] = (out.raw[v] - *lo) / (*hi - *lo);
  }

  auto& s = out.summary;
  double total = 0.0;
  for (double x : out.score) total += x;
  s.mean_all = n > 0 ? total / static_cast<double>(n) : 0.0;

  const std::set<NodeId> unique(critical.begin(), critical.end());
  s.critical_count = unique.size();
  if (!unique.empty()) {
    double mx = 0.0, mn = 1.0, sum = 0.0;
    for (NodeId id : unique) {
      mx = std::max(mx, out.score[id]);
      mn = std::min(mn, out.score[id]);
      sum += out.score[id];
    }
    s.max_critical = mx;
    s.min_critical = mn;
    s.mean_critical = sum / static_cast<double>(unique.size());
  }
  return out;
}

NodePairs sample_negatives(const CallGraph& g, std::size_t per_edge, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const auto n = g.num_nodes();
  NodePairs out;
  if (n < 2) return out;
  auto is_neighbour = [&](NodeId i, NodeId k) {
    for (auto e : g.out_edges(i))
      if (g.edges()[e].target == k) return true;
    return false;
  };
  for (const auto& e : g.edges()) {
    for (std::size_t r = 0; r < per_edge; ++r) {
      for (int attempt = 0; attempt < 32; ++attempt) {
        const auto k = static_cast<NodeId>(rng.below(n));
        if (k == e.source || is_neighbour(e.source, k)) continue;
        out.emplace_back(e.source, k);
        break;
      }
    }
  }
  return out;
}

LossGradient reconstruction_loss(const CallGraph& g, const NodeFeatures& f, const AttentionParams& p,
                                 std::span<const double> beta, const NodePairs& negatives) {
  const auto fw = forward(g, f, p, beta);
  const Index n = static_cast<Index>(g.num_nodes());
  const Index fp = p.W.rows();

  LossGradient out;
  MatrixXd d_h = MatrixXd::Zero(n, fp);
  auto pair_term = [&](NodeId i, NodeId j, double label) {
    const double x = fw.h.row(i).dot(fw.h.row(j));
    out.loss -= label > 0 ? log_sigmoid(x) : log_sigmoid(-x);
    const double gx = sigmoid(x) - label;
    d_h.row(i) += gx * fw.h.row(j);
    d_h.row(j) += gx * fw.h.row(i);
  };
  for (const auto& e : g.edges()) pair_term(e.source, e.target, 1.0);
  for (const auto& [i, k] : negatives) pair_term(i, k, 0.0);

  // through ELU
  const MatrixXd d_u = (fw.u.array() > 0).select(d_h.array(), d_h.array() * fw.u.array().exp()).matrix();

  MatrixXd d_z = MatrixXd::Zero(n, fp);
  VectorXd d_a = VectorXd::Zero(2 * fp);
  const auto& att = fw.att;
  std::vector<double> d_alpha(g.num_edges(), 0.0);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto out_edges = g.out_edges(i);
    if (out_edges.empty()) continue;
    double weighted = 0.0;
    for (auto k : out_edges) {
      const NodeId j = g.edges()[k].target;
      d_z.row(j) += att.alpha_prime[k] * d_u.row(i);
      d_alpha[k] = att.beta[k] * d_u.row(i).dot(fw.z.row(j));
      weighted += att.alpha[k] * d_alpha[k];
    }
    for (auto k : out_edges) {
      const NodeId j = g.edges()[k].target;
      const double d_logit = att.alpha[k] * (d_alpha[k] - weighted);
      const double d_pre = fw.pre(static_cast<Index>(k)) > 0 ? d_logit : p.leaky_slope * d_logit;
      d_a.head(fp) += d_pre * fw.z.row(i).transpose();
      d_a.tail(fp) += d_pre * fw.z.row(j).transpose();
      d_z.row(i) += d_pre * p.a.head(fp).transpose();
      d_z.row(j) += d_pre * p.a.tail(fp).transpose();
    }
  }
  out.dW = d_z.transpose() * f.matrix;
  out.da = d_a;
  return out;
}

TrainResult train_attention(const CallGraph& g, const NodeFeatures& f, std::span<const double> beta,
                            const TrainConfig& config, const std::optional<AttentionParams>& initial) {
  if (g.num_nodes() < 2 || g.num_edges() == 0)
    throw DomainError("training needs at least two nodes and one edge");
  if (!(config.learning_rate > 0)) throw DomainError("learning rate must be positive");

  TrainResult result;
  result.params = initial.value_or(AttentionParams::identity(f.matrix.cols()));
  const auto negatives = sample_negatives(g, config.negative_samples, config.seed);

  auto current = reconstruction_loss(g, f, result.params, beta, negatives);
  result.loss_history.push_back(current.loss);
  double step = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
      AttentionParams trial = result.params;
      trial.W -= step * current.dW;
      trial.a -= step * current.da;
      auto next = reconstruction_loss(g, f, trial, beta, negatives);
      if (next.loss <= current.loss) {
        result.params = std::move(trial);
        current = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    result.loss_history.push_back(current.loss);
    if (!accepted) break;
  }
  return result;
}

}  // namespace ulens
