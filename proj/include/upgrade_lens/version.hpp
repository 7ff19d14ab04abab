#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ulens {

/// Semantic version with an arbitrary number of release components.
/// Accepts a leading "v" and fewer than three components ("1.2" == "1.2.0").
struct SemVer {
  std::vector<std::uint64_t> release;
  std::vector<std::string> prerelease;  // dot-separated identifiers after '-'
};

std::optional<SemVer> parse_semver(std::string_view text);

std::strong_ordering compare_semver(const SemVer& a, const SemVer& b);

struct VersionOrder {
  std::strong_ordering order = std::strong_ordering::equal;
  bool lexicographic = false;  // at least one side was not semver
};

/// Semver ordering when both sides parse, byte-wise comparison otherwise.
VersionOrder compare_versions(std::string_view a, std::string_view b);

}  // namespace ulens
