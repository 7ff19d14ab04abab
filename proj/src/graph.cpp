#include "upgrade_lens/graph.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/io.hpp"

namespace ulens {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<NodeId, NodeId>& p) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(p.first) << 32) | p.second);
  }
};

std::string describe(const FunctionKey& key) { return key.path + "::" + key.name; }

}  // namespace

CallGraph::CallGraph(std::vector<FunctionNode> nodes, std::vector<CallEdge> edges, bool directed)
    : nodes_(std::move(nodes)), directed_(directed) {
  const auto n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = nodes_[i];
    node.id = static_cast<NodeId>(i);
    node.is_caller = false;
    node.is_callee = false;
    if (node.critical && !node.changed)
      throw IntegrityError("critical function is not marked changed: " + describe(node.key()));
    if (!index_.emplace(node.key(), node.id).second)
      throw IntegrityError("duplicate function: " + describe(node.key()));
  }

  std::unordered_map<std::pair<NodeId, NodeId>, std::size_t, PairHash> seen;
  edges_.reserve(edges.size());
  for (auto e : edges) {
    if (e.source >= n || e.target >= n)
      throw IntegrityError("edge references unknown node id");
    if (!(e.weight > 0.0)) throw IntegrityError("edge weight must be positive");
    if (!directed_ && e.source > e.target) std::swap(e.source, e.target);
    auto [it, inserted] = seen.try_emplace({e.source, e.target}, edges_.size());
    if (inserted)
      edges_.push_back(e);
    else
      edges_[it->second].weight += e.weight;
  }

  std::vector<std::size_t> out_count(n, 0), in_count(n, 0);
  for (const auto& e : edges_) {
    ++out_count[e.source];
    ++in_count[e.target];
    nodes_[e.source].is_caller = true;
    nodes_[e.target].is_callee = true;
    if (e.source == e.target) ++self_loops_;
  }
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] = out_offsets_[i] + out_count[i];
    in_offsets_[i + 1] = in_offsets_[i] + in_count[i];
  }
  out_list_.resize(edges_.size());
  in_list_.resize(edges_.size());
  std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    out_list_[out_fill[edges_[k].source]++] = k;
    in_list_[in_fill[edges_[k].target]++] = k;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(out_list_.begin() + out_offsets_[i], out_list_.begin() + out_offsets_[i + 1],
              [&](std::size_t a, std::size_t b) { return edges_[a].target < edges_[b].target; });
    std::sort(in_list_.begin() + in_offsets_[i], in_list_.begin() + in_offsets_[i + 1],
              [&](std::size_t a, std::size_t b) { return edges_[a].source < edges_[b].source; });
  }
}

std::optional<NodeId> CallGraph::find(const FunctionKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> CallGraph::out_edges(NodeId id) const {
  return {out_list_.data() + out_offsets_.at(id), out_offsets_.at(id + 1) - out_offsets_[id]};
}

std::span<const std::size_t> CallGraph::in_edges(NodeId id) const {
  return {in_list_.data() + in_offsets_.at(id), in_offsets_.at(id + 1) - in_offsets_[id]};
}

CallGraph CallGraph::with_flags(std::span<const FunctionNode> flags_by_id) const {
  if (flags_by_id.size() != nodes_.size()) throw DomainError("flag vector size mismatch");
  auto nodes = nodes_;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].changed = flags_by_id[i].changed;
    nodes[i].vulnerable = flags_by_id[i].vulnerable;
    nodes[i].critical = flags_by_id[i].critical;
  }
  return CallGraph(std::move(nodes), edges_, directed_);
}

CallGraph induced_subgraph(const CallGraph& g, std::span<const NodeId> keep) {
  const auto n = g.num_nodes();
  std::vector<bool> kept(n, false);
  for (NodeId id : keep) {
    if (id >= n) throw DomainError("induced_subgraph: node id " + std::to_string(id) + " not in graph");
    kept[id] = true;
  }
  constexpr auto kAbsent = static_cast<NodeId>(-1);
  std::vector<NodeId> remap(n, kAbsent);
  std::vector<FunctionNode> nodes;
  for (NodeId id = 0; id < n; ++id) {
    if (!kept[id]) continue;
    remap[id] = static_cast<NodeId>(nodes.size());
    nodes.push_back(g.node(id));
  }
  std::vector<CallEdge> edges;
  for (const auto& e : g.edges()) {
    if (remap[e.source] == kAbsent || remap[e.target] == kAbsent) continue;
    edges.push_back({remap[e.source], remap[e.target], e.weight});
  }
  return CallGraph(std::move(nodes), std::move(edges), g.directed());
}

CallGraph undirected_projection(const CallGraph& g) {
  if (!g.directed()) return g;
  return CallGraph(g.nodes(), g.edges(), false);
}

// ---------------------------------------------------------------------------
// Interchange format

namespace {

using json = nlohmann::json;

const json& require(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end())
    throw ParseError(std::string("missing field '") + field + "'", line, 0);
  return *it;
}

std::string require_string(const json& obj, const char* field, std::size_t line) {
  const auto& v = require(obj, field, line);
  if (!v.is_string()) throw ParseError(std::string("field '") + field + "' must be a string", line, 0);
  return v.get<std::string>();
}

bool optional_bool(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) return false;
  if (!it->is_boolean()) throw ParseError(std::string("field '") + field + "' must be a boolean", line, 0);
  return it->get<bool>();
}

FunctionKey require_ref(const json& obj, const char* field, std::size_t line) {
  const auto& v = require(obj, field, line);
  if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string())
    throw ParseError(std::string("field '") + field + "' must be [path, name]", line, 0);
  return {v[0].get<std::string>(), v[1].get<std::string>()};
}

}  // namespace

CallGraph load_graph(std::string_view document) {
  std::vector<FunctionNode> nodes;
  std::map<FunctionKey, NodeId> ids;
  std::vector<std::pair<std::size_t, json>> calls;
  bool saw_header = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    auto end = document.find('\n', pos);
    if (end == std::string_view::npos) end = document.size();
    auto line = document.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == document.size()) break;
      continue;
    }

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& err) {
      throw ParseError(std::string("malformed record: ") + err.what(), line_no, err.byte);
    }
    if (!rec.is_object()) throw ParseError("record must be an object", line_no, 1);

    if (!saw_header) {
      auto it = rec.find("schema");
      if (it == rec.end() || !it->is_string())
        throw ParseError("first record must be the schema header", line_no, 1);
      if (it->get<std::string>() != kSchemaVersion)
        throw ParseError("unsupported schema " + it->get<std::string>(), line_no, 1);
      saw_header = true;
      continue;
    }

    const auto kind = require_string(rec, "kind", line_no);
    if (kind == "fn") {
      FunctionNode node;
      node.path = require_string(rec, "path", line_no);
      node.name = require_string(rec, "name", line_no);
      node.changed = optional_bool(rec, "changed", line_no);
      node.vulnerable = optional_bool(rec, "vulnerable", line_no);
      node.critical = optional_bool(rec, "critical", line_no);
      const auto id = static_cast<NodeId>(nodes.size());
      if (!ids.emplace(node.key(), id).second)
        throw IntegrityError("duplicate function on line " + std::to_string(line_no) + ": " +
                             node.path + "::" + node.name);
      nodes.push_back(std::move(node));
    } else if (kind == "call") {
      calls.emplace_back(line_no, std::move(rec));
    } else {
      throw ParseError("unknown record kind '" + kind + "'", line_no, 1);
    }
    if (end == document.size()) break;
  }
  if (!saw_header && !nodes.empty()) throw ParseError("missing schema header", 1, 1);

  std::vector<CallEdge> edges;
  edges.reserve(calls.size());
  for (const auto& [line, rec] : calls) {
    const auto from = require_ref(rec, "from", line);
    const auto to = require_ref(rec, "to", line);
    double count = 1.0;
    if (auto it = rec.find("count"); it != rec.end()) {
      if (!it->is_number()) throw ParseError("field 'count' must be a number", line, 0);
      count = it->get<double>();
    }
    auto src = ids.find(from);
    auto dst = ids.find(to);
    if (src == ids.end() || dst == ids.end())
      throw IntegrityError("call on line " + std::to_string(line) + " references unknown function " +
                           (src == ids.end() ? from.path + "::" + from.name : to.path + "::" + to.name));
    edges.push_back({src->second, dst->second, count});
  }
  return CallGraph(std::move(nodes), std::move(edges));
}

std::string save_graph(const CallGraph& g) {
  std::string out;
  out += json{{"schema", kSchemaVersion}}.dump();
  out += '\n';
  for (const auto& node : g.nodes()) {
    nlohmann::ordered_json rec;
    rec["kind"] = "fn";
    rec["path"] = node.path;
    rec["name"] = node.name;
    rec["changed"] = node.changed;
    rec["vulnerable"] = node.vulnerable;
    rec["critical"] = node.critical;
    out += rec.dump();
    out += '\n';
  }
  for (const auto& e : g.edges()) {
    const auto& s = g.node(e.source);
    const auto& t = g.node(e.target);
    nlohmann::ordered_json rec;
    rec["kind"] = "call";
    rec["from"] = {s.path, s.name};
    rec["to"] = {t.path, t.name};
    rec["count"] = e.weight;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

CallGraph import_codeql_edges(std::string_view rows) {
  std::vector<FunctionNode> nodes;
  std::map<FunctionKey, NodeId> ids;
  std::vector<CallEdge> edges;

  auto intern = [&](FunctionKey key) {
    auto [it, inserted] = ids.try_emplace(key, static_cast<NodeId>(nodes.size()));
    if (inserted) {
      FunctionNode node;
      node.path = std::move(key.path);
      node.name = std::move(key.name);
      nodes.push_back(std::move(node));
    }
    return it->second;
  };

  bool first = true;
  for (auto& row : io::parse_csv(rows)) {
    auto& f = row.fields;
    if (first) {
      first = false;
      if (f == std::vector<std::string>{"caller_path", "caller_name", "callee_path", "callee_name"})
        continue;
    }
    if (f.size() != 4)
      throw ParseError("expected 4 fields, found " + std::to_string(f.size()), row.line, 0);
    for (std::size_t i = 0; i < 4; ++i)
      if (f[i].empty()) throw ParseError("empty field", row.line, i + 1);
    const auto caller = intern({f[0], f[1]});
    const auto callee = intern({f[2], f[3]});
    edges.push_back({caller, callee, 1.0});
  }
  return CallGraph(std::move(nodes), std::move(edges));
}

CallGraph read_graph_file(const std::string& path) { return load_graph(io::read_text(path)); }

void write_graph_file(const CallGraph& g, const std::string& path) {
  io::write_text(path, save_graph(g));
}

}  // namespace ulens
