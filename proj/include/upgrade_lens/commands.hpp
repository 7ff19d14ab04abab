#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "upgrade_lens/gat.hpp"
#include "upgrade_lens/metrics.hpp"

// Workflows behind the `upgrade-lens` subcommands. Each reads its inputs,
// writes its reports into `out` (created if missing) and returns the
// warnings it collected. Errors surface as the library exception types.
namespace ulens::commands {

namespace fs = std::filesystem;

ClosenessMode parse_closeness_mode(std::string_view text);
BetaWeights parse_weights(std::string_view text);  // "d,n,c"

struct ExtractOptions {
  fs::path source;
  fs::path out;
};
/// graph.jsonl, digests.csv, warnings.txt
std::vector<std::string> extract(const ExtractOptions& o);

struct MetricsOptions {
  fs::path graph;
  fs::path out;
  std::size_t bins = 50;
  bool normalized_bc = false;
  ClosenessMode closeness = ClosenessMode::undirected;
};
/// metrics.{json,csv,txt}, closeness_histogram.{csv,svg}
std::vector<std::string> metrics(const MetricsOptions& o);

struct DiffOptions {
  fs::path base;
  fs::path upgraded;
  std::optional<fs::path> hashes;            // path,name,base_digest,upgraded_digest
  std::optional<fs::path> base_digests;      // path,name,digest (with upgraded_digests)
  std::optional<fs::path> upgraded_digests;
  std::optional<fs::path> diagnostics;       // path,name,message
  fs::path out;
  bool normalized_bc = false;
  ClosenessMode closeness = ClosenessMode::undirected;
};
/// comparison.{json,csv,txt}, changed.csv, {changed,unchanged,upgraded_marked}.jsonl, stats.{json,txt}
std::vector<std::string> diff(const DiffOptions& o);

struct ScoreOptions {
  fs::path graph;
  fs::path out;
  BetaWeights weights;
  std::uint64_t seed = 42;
  bool train = false;
  std::size_t epochs = 100;
  ClosenessMode closeness = ClosenessMode::undirected;
};
/// scores.csv, summary.{json,txt}, pca.{csv,svg}, and training.csv when training
std::vector<std::string> score(const ScoreOptions& o);

struct ScanOptions {
  fs::path sbom;
  std::string transport = "fixture";  // or "live"
  std::optional<fs::path> fixtures;
  fs::path out;
};
/// plans.{json,csv,txt}
std::vector<std::string> scan(const ScanOptions& o);

}  // namespace ulens::commands
