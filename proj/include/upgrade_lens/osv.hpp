#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "upgrade_lens/sbom.hpp"

namespace ulens {

/// One affected interval [introduced, fixed) or [introduced, last_affected].
/// A missing `introduced` (or "0") means "from the first release".
struct VersionRange {
  std::optional<std::string> introduced;
  std::optional<std::string> fixed;
  std::optional<std::string> last_affected;

  bool operator==(const VersionRange&) const = default;
};

struct VulnerabilityRecord {
  std::string id;
  SbomPackage package;
  std::vector<VersionRange> affected_ranges;
  std::optional<std::string> fixed_version;
  std::string summary;
  std::vector<std::string> diagnostics;

  bool operator==(const VulnerabilityRecord&) const = default;
};

/// Sends one POST to the OSV API and returns the response body.
class OsvTransport {
 public:
  virtual ~OsvTransport() = default;
  virtual std::string post(const std::string& path, const std::string& body) = 0;
};

/// Replays recorded responses from `<dir>/<sha256(body)>.json`. Requests
/// without a recording get an empty response object.
class FixtureTransport final : public OsvTransport {
 public:
  explicit FixtureTransport(std::filesystem::path dir);
  std::string post(const std::string& path, const std::string& body) override;
  static std::string fixture_name(std::string_view body);

 private:
  std::filesystem::path dir_;
};

struct RetryPolicy {
  int attempts = 3;
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(2000),
                                                 std::chrono::milliseconds(4000)};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
  std::chrono::seconds timeout{10};
};

/// HTTPS (or plain HTTP) client. Connection failures, 429 and 5xx are retried
/// per the policy, then reported as TransportError.
class LiveTransport final : public OsvTransport {
 public:
  explicit LiveTransport(std::string base_url = default_base_url(), RetryPolicy policy = {});
  std::string post(const std::string& path, const std::string& body) override;

  /// $UPGRADE_LENS_OSV_URL, else https://api.osv.dev
  static std::string default_base_url();

 private:
  std::string base_url_;
  RetryPolicy policy_;
};

/// {"package":{"purl":...}} when a purl is present, else name/ecosystem/version.
/// Throws DomainError for a malformed purl or a package with neither purl nor ecosystem.
std::string osv_request_body(const SbomPackage& pkg);

/// Parses a /v1/query response. Throws ParseError on malformed JSON or schema.
std::vector<VulnerabilityRecord> parse_osv_response(std::string_view body, const SbomPackage& pkg);

std::vector<VulnerabilityRecord> query_osv(const SbomPackage& pkg, OsvTransport& transport);

/// Queries every package with at most `max_in_flight` concurrent requests.
/// Result i belongs to packages[i].
std::vector<std::vector<VulnerabilityRecord>> query_osv_all(std::span<const SbomPackage> packages,
                                                            OsvTransport& transport,
                                                            std::size_t max_in_flight = 4);

struct RemediationPlan {
  SbomPackage package;
  std::vector<VulnerabilityRecord> vulnerabilities;
  std::optional<std::string> target_version;
  bool no_fix = false;
  std::vector<std::string> diagnostics;

  bool operator==(const RemediationPlan&) const = default;
};

/// One plan per package with at least one vulnerability, in SBOM order.
/// `records[i]` must belong to `sbom[i]`.
std::vector<RemediationPlan> map_vulnerabilities(std::span<const SbomPackage> sbom,
                                                 std::span<const std::vector<VulnerabilityRecord>> records);

}  // namespace ulens
