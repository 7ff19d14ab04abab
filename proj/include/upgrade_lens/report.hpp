#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "upgrade_lens/diff.hpp"
#include "upgrade_lens/gat.hpp"
#include "upgrade_lens/osv.hpp"
#include "upgrade_lens/pca.hpp"
#include "upgrade_lens/stats.hpp"

namespace ulens::report {

struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string render_csv(const TextTable& t);
/// Space-padded columns: first column left-aligned, the rest right-aligned.
std::string render_aligned(const TextTable& t);

/// Shortest text that reads back to the same double.
std::string exact(double x);

struct MetricsOptions {
  bool normalized_bc = false;  // which betweenness average the tables show
};

/// One metric per row, one comparison column per table column. `exact`
/// selects round-trip numbers (CSV) instead of six decimals (text).
TextTable comparison_rows(const ComparisonTable& table, const MetricsOptions& options, bool exact_numbers);
std::string comparison_json(const ComparisonTable& table);

std::string stats_json(const SubgraphTests& tests);
std::string stats_text(const SubgraphTests& tests);

std::string histogram_csv(const Histogram& h);

std::string scores_csv(const CallGraph& g, const GatScores& scores);
std::string summary_json(const ScoreSummary& s);
std::string summary_text(const ScoreSummary& s);
std::string pca_csv(const CallGraph& g, const PcaResult& pca);

std::string plans_csv(std::span<const RemediationPlan> plans);
std::string plans_json(std::span<const RemediationPlan> plans, std::span<const std::string> sbom_warnings);
std::string plans_text(std::span<const RemediationPlan> plans);

/// Standalone SVG; one `<rect class="bar">` per bin. Empty histograms give
/// a "no data" placeholder.
std::string render_histogram_svg(const Histogram& h, const std::string& title);

/// Scatter of the first two columns of `points` (the second is taken as 0
/// when absent). Rows listed in `highlight` are drawn as
/// `<circle class="highlight">`, all others as `<circle class="point">`.
std::string render_scatter_svg(const Eigen::MatrixXd& points, std::span<const NodeId> highlight,
                               const std::string& title);

}  // namespace ulens::report
