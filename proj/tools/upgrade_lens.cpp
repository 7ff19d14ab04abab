// upgrade-lens: call-graph metrics, upgrade diffs, attention scores and SBOM scans.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

#include "upgrade_lens/commands.hpp"
#include "upgrade_lens/errors.hpp"

namespace {

namespace cmd = ulens::commands;

enum Exit { kOk = 0, kInternal = 1, kInput = 2, kDomain = 3, kTransport = 4 };

int fail(int code, const char* kind, const std::string& message, std::size_t line = 0, std::size_t column = 0) {
  nlohmann::ordered_json rec;
  rec["error"] = kind;
  rec["message"] = message;
  if (line) rec["line"] = line;
  if (column) rec["column"] = column;
  rec["exit_code"] = code;
  std::cerr << rec.dump() << '\n';
  return code;
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << nlohmann::ordered_json{{"warning", w}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Call-graph analysis for dependency upgrades", "upgrade-lens"};
  app.require_subcommand(1);

  std::string closeness = "undirected";
  std::string weights = "1,1,1";
  std::size_t bins = 50;
  bool normalized_bc = false;

  cmd::ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Build a call graph from a Python source tree");
  extract->add_option("source", ex.source, "Source root")->required();
  extract->add_option("--out", ex.out, "Output directory")->required();

  cmd::MetricsOptions me;
  auto* metrics = app.add_subcommand("metrics", "Graph metrics report and closeness histogram");
  metrics->add_option("graph", me.graph, "Graph file (.jsonl interchange or .csv CodeQL edges)")->required();
  metrics->add_option("--out", me.out, "Output directory")->required();
  metrics->add_option("--bins", bins, "Histogram bins")->capture_default_str();
  metrics->add_flag("--normalized-bc", normalized_bc, "Report normalized betweenness");
  metrics->add_option("--closeness-mode", closeness, "undirected|in|out")->capture_default_str();

  cmd::DiffOptions di;
  auto* diff = app.add_subcommand("diff", "Compare base and upgraded graphs");
  diff->add_option("--base", di.base, "Base graph")->required();
  diff->add_option("--upgraded", di.upgraded, "Upgraded graph")->required();
  diff->add_option("--hashes", di.hashes, "path,name,base_digest,upgraded_digest rows");
  diff->add_option("--base-digests", di.base_digests, "digests.csv of the base version");
  diff->add_option("--upgraded-digests", di.upgraded_digests, "digests.csv of the upgraded version");
  diff->add_option("--diagnostics", di.diagnostics, "path,name,message rows naming broken functions");
  diff->add_option("--out", di.out, "Output directory")->required();
  diff->add_flag("--normalized-bc", normalized_bc, "Report normalized betweenness");
  diff->add_option("--closeness-mode", closeness, "undirected|in|out")->capture_default_str();

  cmd::ScoreOptions sc;
  auto* score = app.add_subcommand("score", "Attention-based importance scores");
  score->add_option("graph", sc.graph, "Graph file")->required();
  score->add_option("--out", sc.out, "Output directory")->required();
  score->add_option("--weights", weights, "Beta weights d,n,c")->capture_default_str();
  score->add_option("--seed", sc.seed, "Seed for training negatives")->capture_default_str();
  score->add_flag("--train", sc.train, "Fit W and a before scoring");
  score->add_option("--epochs", sc.epochs, "Training epochs")->capture_default_str();
  score->add_option("--closeness-mode", closeness, "undirected|in|out")->capture_default_str();

  cmd::ScanOptions sn;
  auto* scan = app.add_subcommand("scan", "Match an SBOM against OSV advisories");
  scan->add_option("sbom", sn.sbom, "CycloneDX JSON or SPDX tag-value document")->required();
  scan->add_option("--transport", sn.transport, "live|fixture")->capture_default_str();
  scan->add_option("--fixtures", sn.fixtures, "Recorded OSV responses for --transport fixture");
  scan->add_option("--out", sn.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kInput, "usage", e.what());
  }

  try {
    const auto mode = cmd::parse_closeness_mode(closeness);
    std::vector<std::string> warnings;
    if (*extract) {
      warnings = cmd::extract(ex);
    } else if (*metrics) {
      me.bins = bins;
      me.normalized_bc = normalized_bc;
      me.closeness = mode;
      warnings = cmd::metrics(me);
    } else if (*diff) {
      di.normalized_bc = normalized_bc;
      di.closeness = mode;
      warnings = cmd::diff(di);
    } else if (*score) {
      sc.weights = cmd::parse_weights(weights);
      sc.closeness = mode;
      warnings = cmd::score(sc);
    } else if (*scan) {
      warnings = cmd::scan(sn);
    }
    report_warnings(warnings);
    return kOk;
  } catch (const ulens::ParseError& e) {
    return fail(kInput, "parse", e.what(), e.line(), e.column());
  } catch (const ulens::IntegrityError& e) {
    return fail(kInput, "integrity", e.what());
  } catch (const ulens::DomainError& e) {
    return fail(kDomain, "domain", e.what());
  } catch (const ulens::TransportError& e) {
    return fail(kTransport, "transport", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
}
