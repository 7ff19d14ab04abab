#include "upgrade_lens/commands.hpp"

#include <memory>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "upgrade_lens/diff.hpp"
#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/extract.hpp"
#include "upgrade_lens/io.hpp"
#include "upgrade_lens/osv.hpp"
#include "upgrade_lens/pca.hpp"
#include "upgrade_lens/report.hpp"
#include "upgrade_lens/sbom.hpp"
#include "upgrade_lens/stats.hpp"

namespace ulens::commands {

namespace {

void prepare(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw DomainError("cannot create output directory " + out.string());
}

void put(const fs::path& out, const char* name, std::string_view text) { io::write_text((out / name).string(), text); }

// Interchange JSONL, or a CodeQL edge table when the file ends in .csv.
CallGraph read_graph(const fs::path& p) {
  if (p.extension() == ".csv") return import_codeql_edges(io::read_text(p.string()));
  return read_graph_file(p.string());
}

std::string lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + '\n';
  return out;
}

void write_comparison(const fs::path& out, const ComparisonTable& table, bool normalized_bc) {
  const report::MetricsOptions opts{normalized_bc};
  put(out, "comparison.json", report::comparison_json(table));
  put(out, "comparison.csv", report::render_csv(report::comparison_rows(table, opts, true)));
  put(out, "comparison.txt", report::render_aligned(report::comparison_rows(table, opts, false)));
}

}  // namespace

ClosenessMode parse_closeness_mode(std::string_view text) {
  if (text == "undirected") return ClosenessMode::undirected;
  if (text == "in") return ClosenessMode::in;
  if (text == "out") return ClosenessMode::out;
  throw DomainError(fmt::format("unknown closeness mode '{}' (undirected|in|out)", text));
}

BetaWeights parse_weights(std::string_view text) {
  std::vector<double> w;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    const std::string part(text.substr(pos, comma - pos));
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (part.empty() || used != part.size()) throw DomainError(fmt::format("bad weight '{}' in --weights", part));
    w.push_back(v);
    pos = comma + 1;
  }
  if (w.size() != 3) throw DomainError("--weights needs exactly three values d,n,c");
  const BetaWeights out{w[0], w[1], w[2]};
  if (out.degree < 0 || out.norm < 0 || out.closeness < 0 || out.degree + out.norm + out.closeness <= 0)
    throw DomainError("--weights must be non-negative and not all zero");
  return out;
}

std::vector<std::string> extract(const ExtractOptions& o) {
  auto result = extract_call_graph(o.source);
  prepare(o.out);
  write_graph_file(result.graph, (o.out / "graph.jsonl").string());
  put(o.out, "digests.csv", format_digests(result.digests));
  put(o.out, "warnings.txt", lines(result.warnings));
  return result.warnings;
}

std::vector<std::string> metrics(const MetricsOptions& o) {
  if (o.bins < 1) throw DomainError("--bins must be at least 1");
  const auto g = read_graph(o.graph);
  prepare(o.out);
  const ulens::MetricsOptions mopts{o.closeness, 1};
  ComparisonTable table{{{"Graph", metrics_report(g, mopts), std::nullopt}}};
  const report::MetricsOptions ropts{o.normalized_bc};
  put(o.out, "metrics.json", report::comparison_json(table));
  put(o.out, "metrics.csv", report::render_csv(report::comparison_rows(table, ropts, true)));
  put(o.out, "metrics.txt", report::render_aligned(report::comparison_rows(table, ropts, false)));

  const auto hist = closeness_histogram(closeness_centrality(g, o.closeness), o.bins);
  put(o.out, "closeness_histogram.csv", report::histogram_csv(hist));
  put(o.out, "closeness_histogram.svg", report::render_histogram_svg(hist, "Closeness Centrality Histogram"));
  return {};
}

std::vector<std::string> diff(const DiffOptions& o) {
  const auto base = read_graph(o.base);
  const auto upgraded = read_graph(o.upgraded);
  BodyHashes hashes;
  if (o.hashes) {
    if (o.base_digests || o.upgraded_digests) throw DomainError("give --hashes or the two digest files, not both");
    hashes = parse_body_hashes(io::read_text(o.hashes->string()));
  } else if (o.base_digests && o.upgraded_digests) {
    hashes = merge_digests(parse_digests(io::read_text(o.base_digests->string())),
                           parse_digests(io::read_text(o.upgraded_digests->string())));
  } else {
    throw DomainError("diff needs --hashes or both --base-digests and --upgraded-digests");
  }

  auto cmp = diff_versions(base, upgraded, hashes);
  if (o.diagnostics) {
    std::vector<FunctionKey> keys;
    for (const auto& d : parse_diagnostics(io::read_text(o.diagnostics->string()))) keys.push_back(d.function);
    cmp = mark_critical(std::move(cmp), keys);
  }

  prepare(o.out);
  const std::vector<UpgradeComparison> variants{cmp};
  write_comparison(o.out, comparison_table(base, variants, {o.closeness, 1}), o.normalized_bc);

  report::TextTable changed{{"id", "path", "name", "critical"}, {}};
  for (NodeId id : cmp.changed_ids) {
    const auto& n = cmp.upgraded.node(id);
    changed.rows.push_back({std::to_string(id), n.path, n.name, n.critical ? "1" : "0"});
  }
  put(o.out, "changed.csv", report::render_csv(changed));

  const auto parts = partition_subgraphs(cmp);
  write_graph_file(parts.changed, (o.out / "changed.jsonl").string());
  write_graph_file(parts.unchanged, (o.out / "unchanged.jsonl").string());
  write_graph_file(cmp.upgraded, (o.out / "upgraded_marked.jsonl").string());

  std::vector<std::string> warnings;
  try {
    const auto tests = compare_changed_vs_all(cmp, SampleMode::changed_vs_all, o.closeness);
    put(o.out, "stats.json", report::stats_json(tests));
    put(o.out, "stats.txt", report::stats_text(tests));
  } catch (const DomainError& e) {
    warnings.push_back(std::string("statistical tests skipped: ") + e.what());
    put(o.out, "stats.json", nlohmann::ordered_json{{"skipped", e.what()}}.dump(2) + "\n");
    put(o.out, "stats.txt", fmt::format("Statistical tests skipped: {}\n", e.what()));
  }
  return warnings;
}

std::vector<std::string> score(const ScoreOptions& o) {
  const auto g = read_graph(o.graph);
  prepare(o.out);
  const auto f = build_features(g, o.closeness);
  const auto beta = beta_weights(g, f, o.weights);
  auto params = AttentionParams::identity();
  std::vector<std::string> warnings;
  if (o.train) {
    const TrainConfig cfg{o.epochs, TrainConfig{}.learning_rate, TrainConfig{}.negative_samples, o.seed};
    const auto trained = train_attention(g, f, beta, cfg);
    params = trained.params;
    report::TextTable t{{"epoch", "loss"}, {}};
    for (std::size_t i = 0; i < trained.loss_history.size(); ++i)
      t.rows.push_back({std::to_string(i), report::exact(trained.loss_history[i])});
    put(o.out, "training.csv", report::render_csv(t));
  }
  const auto att = attention_coefficients(g, f, params, beta);
  std::vector<NodeId> critical, highlight;
  for (const auto& n : g.nodes()) {
    if (n.critical) critical.push_back(n.id);
    if (n.critical || n.vulnerable) highlight.push_back(n.id);
  }
  const auto scores = node_scores(g, att, critical);
  put(o.out, "scores.csv", report::scores_csv(g, scores));
  put(o.out, "summary.json", report::summary_json(scores.summary));
  put(o.out, "summary.txt", report::summary_text(scores.summary));

  PcaResult pca;
  if (g.num_nodes() >= 2) {
    const auto embeddings = aggregate(g, f, params, att);
    pca = pca_project(embeddings, std::min<Eigen::Index>(2, embeddings.cols()));
    if (pca.rank_deficient)
      warnings.push_back(fmt::format("embeddings have rank {}; trailing PCA columns are zero", pca.rank));
  } else {
    warnings.push_back("PCA needs at least two nodes");
  }
  put(o.out, "pca.csv", report::pca_csv(g, pca));
  put(o.out, "pca.svg", report::render_scatter_svg(pca.coordinates, highlight, "GAT embeddings (PCA)"));
  return warnings;
}

std::vector<std::string> scan(const ScanOptions& o) {
  const auto sbom = parse_sbom(io::read_text(o.sbom.string()));
  std::unique_ptr<OsvTransport> transport;
  if (o.transport == "fixture") {
    if (!o.fixtures) throw DomainError("--transport fixture needs --fixtures DIR");
    transport = std::make_unique<FixtureTransport>(*o.fixtures);
  } else if (o.transport == "live") {
    transport = std::make_unique<LiveTransport>();
  } else {
    throw DomainError(fmt::format("unknown transport '{}' (live|fixture)", o.transport));
  }
  const auto records = query_osv_all(sbom.packages, *transport);
  const auto plans = map_vulnerabilities(sbom.packages, records);
  prepare(o.out);
  put(o.out, "plans.json", report::plans_json(plans, sbom.warnings));
  put(o.out, "plans.csv", report::plans_csv(plans));
  put(o.out, "plans.txt", report::plans_text(plans));
  return sbom.warnings;
}

}  // namespace ulens::commands
