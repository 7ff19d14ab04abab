#include "upgrade_lens/diff.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>

#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/io.hpp"

namespace ulens {

namespace {

std::string describe(const FunctionKey& key) { return key.path + "::" + key.name; }

std::vector<NodeId> flagged(const CallGraph& g, bool FunctionNode::*flag) {
  std::vector<NodeId> ids;
  for (const auto& node : g.nodes())
    if (node.*flag) ids.push_back(node.id);
  return ids;
}

}  // namespace

std::string body_digest(std::string_view body) {
  std::string compact;
  compact.reserve(body.size());
  for (char c : body)
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);

  return io::sha256_hex(compact);
}

UpgradeComparison diff_versions(const CallGraph& base, const CallGraph& upgraded,
                                const BodyHashes& hashes) {
  auto lookup = [&](const FunctionKey& key) -> const DigestPair& {
    auto it = hashes.find(key);
    if (it == hashes.end()) throw IntegrityError("no body digest for " + describe(key));
    return it->second;
  };

  auto nodes = upgraded.nodes();
  for (auto& node : nodes) {
    node.changed = false;
    node.critical = false;
  }

  for (auto& node : nodes) {
    const auto key = node.key();
    const auto& digest = lookup(key);
    if (!digest.upgraded) throw IntegrityError("no upgraded digest for " + describe(key));
    if (!base.find(key)) {
      node.changed = true;
      continue;
    }
    if (!digest.base) throw IntegrityError("no base digest for " + describe(key));
    node.changed = *digest.base != *digest.upgraded;
  }

  // Deleted functions: former neighbours that survive are affected.
  for (const auto& gone : base.nodes()) {
    if (upgraded.find(gone.key())) continue;
    if (!lookup(gone.key()).base) throw IntegrityError("no base digest for " + describe(gone.key()));
    auto touch = [&](NodeId other) {
      if (auto id = upgraded.find(base.node(other).key())) nodes[*id].changed = true;
    };
    for (auto k : base.out_edges(gone.id)) touch(base.edges()[k].target);
    for (auto k : base.in_edges(gone.id)) touch(base.edges()[k].source);
  }

  UpgradeComparison cmp;
  cmp.base = base;
  cmp.upgraded = upgraded.with_flags(nodes);
  cmp.changed_ids = flagged(cmp.upgraded, &FunctionNode::changed);
  return cmp;
}

UpgradeComparison mark_critical(UpgradeComparison cmp, std::span<const FunctionKey> diagnostics) {
  auto nodes = cmp.upgraded.nodes();
  std::vector<std::string> unresolved;
  for (const auto& key : diagnostics) {
    auto id = cmp.upgraded.find(key);
    if (!id) {
      unresolved.push_back(describe(key));
      continue;
    }
    nodes[*id].critical = true;
    nodes[*id].changed = true;
  }
  if (!unresolved.empty()) {
    std::string msg = "diagnostics name unknown functions:";
    for (const auto& u : unresolved) msg += " " + u;
    throw DomainError(msg);
  }
  cmp.upgraded = cmp.upgraded.with_flags(nodes);
  cmp.changed_ids = flagged(cmp.upgraded, &FunctionNode::changed);
  cmp.critical_ids = flagged(cmp.upgraded, &FunctionNode::critical);
  cmp.broken = !cmp.critical_ids.empty();
  return cmp;
}

Partition partition_subgraphs(const UpgradeComparison& cmp) {
  const auto& g = cmp.upgraded;
  std::vector<bool> is_changed(g.num_nodes(), false);
  for (NodeId id : cmp.changed_ids) is_changed.at(id) = true;
  std::vector<NodeId> rest;
  for (NodeId id = 0; id < g.num_nodes(); ++id)
    if (!is_changed[id]) rest.push_back(id);

  Partition p;
  p.changed = induced_subgraph(g, cmp.changed_ids);
  p.unchanged = induced_subgraph(g, rest);
  p.cross_edges = g.num_edges() - p.changed.num_edges() - p.unchanged.num_edges();
  return p;
}

std::string variant_label(const UpgradeComparison& cmp) {
  if (!cmp.label.empty()) return cmp.label;
  return cmp.broken ? "Broken Upgrade" : "Non Broken Upgrade";
}

ComparisonTable comparison_table(const CallGraph& base, std::span<const UpgradeComparison> variants,
                                 const MetricsOptions& options) {
  ComparisonTable table;
  table.columns.push_back({"Base", metrics_report(base, options), std::nullopt});
  for (const auto& cmp : variants) {
    const auto part = partition_subgraphs(cmp);
    const auto label = variant_label(cmp);
    table.columns.push_back({label + " / Unchanged", metrics_report(part.unchanged, options),
                             part.cross_edges});
    table.columns.push_back({label + " / Changed", metrics_report(part.changed, options),
                             part.cross_edges});
  }
  return table;
}

std::vector<Diagnostic> parse_diagnostics(std::string_view text) {
  std::vector<Diagnostic> out;
  for (auto& row : io::parse_csv(text)) {
    auto& f = row.fields;
    if (f.size() < 2 || f[0].empty() || f[1].empty())
      throw ParseError("diagnostic row needs path and name", row.line, 0);
    Diagnostic d{{f[0], f[1]}, {}};
    for (std::size_t i = 2; i < f.size(); ++i) {
      if (i > 2) d.message += ',';
      d.message += f[i];
    }
    out.push_back(std::move(d));
  }
  return out;
}

BodyHashes parse_body_hashes(std::string_view text) {
  BodyHashes out;
  for (auto& row : io::parse_csv(text)) {
    auto& f = row.fields;
    if (f.size() != 4) throw ParseError("expected path,name,base_digest,upgraded_digest", row.line, 0);
    DigestPair pair;
    if (!f[2].empty()) pair.base = f[2];
    if (!f[3].empty()) pair.upgraded = f[3];
    if (!out.emplace(FunctionKey{f[0], f[1]}, std::move(pair)).second)
      throw IntegrityError("duplicate digest row on line " + std::to_string(row.line));
  }
  return out;
}

DigestTable parse_digests(std::string_view text) {
  DigestTable out;
  for (auto& row : io::parse_csv(text)) {
    auto& f = row.fields;
    if (f.size() != 3 || f[2].empty()) throw ParseError("expected path,name,digest", row.line, 0);
    if (!out.emplace(FunctionKey{f[0], f[1]}, f[2]).second)
      throw IntegrityError("duplicate digest row on line " + std::to_string(row.line));
  }
  return out;
}

std::string format_digests(const DigestTable& digests) {
  std::string out;
  for (const auto& [key, digest] : digests)
    out += io::csv_field(key.path) + "," + io::csv_field(key.name) + "," + digest + "\n";
  return out;
}

BodyHashes merge_digests(const DigestTable& base, const DigestTable& upgraded) {
  BodyHashes out;
  for (const auto& [key, d] : base) out[key].base = d;
  for (const auto& [key, d] : upgraded) out[key].upgraded = d;
  return out;
}

}  // namespace ulens
