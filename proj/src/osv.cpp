#include "upgrade_lens/osv.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/io.hpp"
#include "upgrade_lens/version.hpp"

namespace ulens {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Tracks whether any comparison fell back to byte order.
class VersionComparer {
 public:
  bool less(const std::string& a, const std::string& b) {
    const auto r = compare_versions(a, b);
    if (r.lexicographic) note(parse_semver(a) ? b : a);
    return r.order < 0;
  }
  bool less_equal(const std::string& a, const std::string& b) { return !less(b, a); }

  void note(const std::string& v) {
    if (std::find(flagged_.begin(), flagged_.end(), v) == flagged_.end()) flagged_.push_back(v);
  }
  std::vector<std::string> diagnostics() const {
    std::vector<std::string> out;
    for (const auto& v : flagged_) out.push_back(fmt::format("version '{}' is not semver; compared lexicographically", v));
    return out;
  }

 private:
  std::vector<std::string> flagged_;
};

bool is_zero(const std::optional<std::string>& v) { return !v || *v == "0"; }

bool contains(const VersionRange& r, const std::string& v, VersionComparer& cmp) {
  if (!is_zero(r.introduced) && cmp.less(v, *r.introduced)) return false;
  if (r.fixed) return cmp.less(v, *r.fixed);
  if (r.last_affected) return cmp.less_equal(v, *r.last_affected);
  return true;
}

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(c == '_' || c == '.' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

const json& require(const json& obj, const char* key, json::value_t type, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->type() != type)
    throw ParseError(fmt::format("OSV response: {} needs '{}' of the right type", where, key));
  return *it;
}

std::optional<std::string> opt_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(fmt::format("OSV response: '{}' must be a string", key));
  return it->get<std::string>();
}

std::vector<VersionRange> ranges_of(const json& affected, const char* where) {
  std::vector<VersionRange> out;
  auto rit = affected.find("ranges");
  if (rit == affected.end()) return out;
  if (!rit->is_array()) throw ParseError(fmt::format("OSV response: {} ranges must be an array", where));
  for (const auto& range : *rit) {
    if (!range.is_object()) throw ParseError("OSV response: range must be an object");
    if (opt_string(range, "type").value_or("") == "GIT") continue;  // commit hashes, not versions
    const auto& events = require(range, "events", json::value_t::array, "range");
    std::optional<VersionRange> open;
    for (const auto& ev : events) {
      if (!ev.is_object()) throw ParseError("OSV response: event must be an object");
      if (auto v = opt_string(ev, "introduced")) {
        if (open) out.push_back(*open);
        open = VersionRange{*v, std::nullopt, std::nullopt};
      } else if (auto f = opt_string(ev, "fixed")) {
        if (!open) open = VersionRange{};
        open->fixed = *f;
        out.push_back(*open);
        open.reset();
      } else if (auto l = opt_string(ev, "last_affected")) {
        if (!open) open = VersionRange{};
        open->last_affected = *l;
        out.push_back(*open);
        open.reset();
      }
    }
    if (open) out.push_back(*open);
  }
  return out;
}

bool affects_package(const json& affected, const SbomPackage& pkg) {
  auto it = affected.find("package");
  if (it == affected.end() || !it->is_object()) return true;
  if (auto purl = opt_string(*it, "purl"); purl && pkg.purl) {
    // OSV purls carry no version; compare the versionless prefix
    const auto cut = pkg.purl->rfind('@');
    if (*purl == pkg.purl->substr(0, cut)) return true;
  }
  if (auto name = opt_string(*it, "name")) return fold(*name) == fold(pkg.name);
  return true;
}

}  // namespace

FixtureTransport::FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_))
    throw DomainError("fixture directory does not exist: " + dir_.string());
}

std::string FixtureTransport::fixture_name(std::string_view body) { return io::sha256_hex(body) + ".json"; }

std::string FixtureTransport::post(const std::string&, const std::string& body) {
  const auto file = dir_ / fixture_name(body);
  if (!std::filesystem::exists(file)) return "{}";
  return io::read_text(file.string());
}

std::string osv_request_body(const SbomPackage& pkg) {
  ordered_json body;
  if (pkg.purl) {
    (void)parse_purl(*pkg.purl);
    body["package"]["purl"] = *pkg.purl;
    return body.dump();
  }
  if (pkg.ecosystem.empty())
    throw DomainError(fmt::format("package {}@{} has neither purl nor ecosystem", pkg.name, pkg.version));
  body["package"]["name"] = pkg.name;
  body["package"]["ecosystem"] = pkg.ecosystem;
  body["version"] = pkg.version;
  return body.dump();
}

std::vector<VulnerabilityRecord> parse_osv_response(std::string_view body, const SbomPackage& pkg) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("OSV response is not valid JSON: ") + e.what(), 0, e.byte);
  }
  if (!doc.is_object()) throw ParseError("OSV response must be an object");
  std::vector<VulnerabilityRecord> out;
  auto vit = doc.find("vulns");
  if (vit == doc.end()) return out;
  if (!vit->is_array()) throw ParseError("OSV response: 'vulns' must be an array");

  for (const auto& v : *vit) {
    if (!v.is_object()) throw ParseError("OSV response: vulnerability must be an object");
    VulnerabilityRecord rec;
    rec.id = require(v, "id", json::value_t::string, "vulnerability").get<std::string>();
    if (rec.id.empty()) throw ParseError("OSV response: empty vulnerability id");
    rec.package = pkg;
    rec.summary = opt_string(v, "summary").value_or("");

    std::vector<VersionRange> matching, all;
    if (auto ait = v.find("affected"); ait != v.end()) {
      if (!ait->is_array()) throw ParseError("OSV response: 'affected' must be an array");
      for (const auto& a : *ait) {
        if (!a.is_object()) throw ParseError("OSV response: affected entry must be an object");
        auto r = ranges_of(a, rec.id.c_str());
        all.insert(all.end(), r.begin(), r.end());
        if (affects_package(a, pkg)) matching.insert(matching.end(), r.begin(), r.end());
      }
    }
    rec.affected_ranges = matching.empty() ? all : matching;

    VersionComparer cmp;
    for (const auto& r : rec.affected_ranges)
      for (const auto* v : {&r.introduced, &r.fixed, &r.last_affected})
        if (*v && v->value().empty()) rec.diagnostics.push_back("empty version string in affected range");
    // smallest fix above the current version that no affected range covers
    for (const auto& r : rec.affected_ranges) {
      if (!r.fixed || r.fixed->empty() || !cmp.less(pkg.version, *r.fixed)) continue;
      const bool covered = std::any_of(rec.affected_ranges.begin(), rec.affected_ranges.end(),
                                       [&](const VersionRange& o) { return contains(o, *r.fixed, cmp); });
      if (covered) continue;
      if (!rec.fixed_version || cmp.less(*r.fixed, *rec.fixed_version)) rec.fixed_version = r.fixed;
    }
    for (auto& d : cmp.diagnostics()) rec.diagnostics.push_back(std::move(d));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<VulnerabilityRecord> query_osv(const SbomPackage& pkg, OsvTransport& transport) {
  const auto body = osv_request_body(pkg);
  return parse_osv_response(transport.post("/v1/query", body), pkg);
}

std::vector<std::vector<VulnerabilityRecord>> query_osv_all(std::span<const SbomPackage> packages,
                                                            OsvTransport& transport,
                                                            std::size_t max_in_flight) {
  // validate everything before the first request goes out
  std::vector<std::string> bodies;
  for (const auto& p : packages) bodies.push_back(osv_request_body(p));

  std::vector<std::vector<VulnerabilityRecord>> out(packages.size());
  std::vector<std::exception_ptr> errors(packages.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    // after the first failure the scan is lost anyway; send nothing new
    for (std::size_t i; !failed && (i = next.fetch_add(1)) < packages.size();) {
      try {
        out[i] = parse_osv_response(transport.post("/v1/query", bodies[i]), packages[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto n = std::min(std::max<std::size_t>(max_in_flight, 1), packages.size());
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<RemediationPlan> map_vulnerabilities(std::span<const SbomPackage> sbom,
                                                 std::span<const std::vector<VulnerabilityRecord>> records) {
  if (sbom.size() != records.size()) throw DomainError("records must have one entry per SBOM package");
  std::vector<RemediationPlan> plans;
  for (std::size_t i = 0; i < sbom.size(); ++i) {
    if (records[i].empty()) continue;
    RemediationPlan plan;
    plan.package = sbom[i];
    plan.vulnerabilities = records[i];
    VersionComparer cmp;
    for (const auto& rec : records[i]) {
      for (const auto& d : rec.diagnostics) plan.diagnostics.push_back(rec.id + ": " + d);
      if (!rec.fixed_version) continue;
      if (!plan.target_version || cmp.less(*plan.target_version, *rec.fixed_version))
        plan.target_version = rec.fixed_version;
    }
    if (!plan.target_version) {
      plan.no_fix = true;
    } else {
      for (const auto& rec : records[i])
        if (!rec.fixed_version) plan.diagnostics.push_back(rec.id + ": no fixed version published");
    }
    for (auto& d : cmp.diagnostics()) plan.diagnostics.push_back(std::move(d));
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace ulens
