#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "upgrade_lens/graph.hpp"
#include "upgrade_lens/metrics.hpp"

namespace ulens {

/// Body digests of one function in the two versions; absent where the
/// function does not exist in that version.
struct DigestPair {
  std::optional<std::string> base;
  std::optional<std::string> upgraded;
};

using BodyHashes = std::map<FunctionKey, DigestPair>;
using DigestTable = std::map<FunctionKey, std::string>;

/// SHA-256 (hex) of the body text with all whitespace removed.
std::string body_digest(std::string_view body);

struct UpgradeComparison {
  CallGraph base;
  CallGraph upgraded;               // carries the changed/critical flags
  std::vector<NodeId> changed_ids;  // ids in `upgraded`, ascending
  std::vector<NodeId> critical_ids; // subset of changed_ids, ascending
  bool broken = false;
  std::string label;                // column heading; derived from `broken` when empty
};

/// Marks upgraded nodes that were added, whose digest differs, or that
/// neighboured (in the base graph) a function deleted by the upgrade.
/// Throws IntegrityError when `hashes` lacks a digest the rule needs.
UpgradeComparison diff_versions(const CallGraph& base, const CallGraph& upgraded,
                                const BodyHashes& hashes);

/// Named functions become critical (and changed). Throws DomainError listing
/// every diagnostic that does not resolve in the upgraded graph.
UpgradeComparison mark_critical(UpgradeComparison cmp, std::span<const FunctionKey> diagnostics);

struct Partition {
  CallGraph changed;
  CallGraph unchanged;
  std::size_t cross_edges = 0;  // edges with one endpoint on each side
};

Partition partition_subgraphs(const UpgradeComparison& cmp);

struct ComparisonColumn {
  std::string heading;
  MetricsReport report;
  std::optional<std::size_t> cross_edges;
};

struct ComparisonTable {
  std::vector<ComparisonColumn> columns;
};

/// Base column followed by an unchanged and a changed column per variant.
ComparisonTable comparison_table(const CallGraph& base, std::span<const UpgradeComparison> variants,
                                 const MetricsOptions& options = {});

std::string variant_label(const UpgradeComparison& cmp);

// Input files

struct Diagnostic {
  FunctionKey function;
  std::string message;
};

/// Rows of `path,name,message`; the message may itself contain commas.
std::vector<Diagnostic> parse_diagnostics(std::string_view text);

/// Rows of `path,name,base_digest,upgraded_digest`, empty cells for absent.
BodyHashes parse_body_hashes(std::string_view text);

/// Rows of `path,name,digest` for a single version.
DigestTable parse_digests(std::string_view text);
std::string format_digests(const DigestTable& digests);

BodyHashes merge_digests(const DigestTable& base, const DigestTable& upgraded);

}  // namespace ulens
