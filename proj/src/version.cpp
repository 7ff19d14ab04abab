#include "upgrade_lens/version.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace ulens {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool identifier_chars(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
  });
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::strong_ordering compare_identifier(const std::string& a, const std::string& b) {
  const bool na = all_digits(a), nb = all_digits(b);
  if (na && nb) {
    if (a.size() != b.size()) return a.size() <=> b.size();  // no leading zeros assumed
    return a <=> b;
  }
  if (na != nb) return na ? std::strong_ordering::less : std::strong_ordering::greater;
  return a <=> b;
}

}  // namespace

std::optional<SemVer> parse_semver(std::string_view text) {
  if (!text.empty() && (text.front() == 'v' || text.front() == 'V')) text.remove_prefix(1);
  if (const auto plus = text.find('+'); plus != std::string_view::npos) {
    for (auto id : split(text.substr(plus + 1), '.'))
      if (!identifier_chars(id)) return std::nullopt;
    text = text.substr(0, plus);
  }
  std::string_view pre;
  if (const auto dash = text.find('-'); dash != std::string_view::npos) {
    pre = text.substr(dash + 1);
    text = text.substr(0, dash);
    if (pre.empty()) return std::nullopt;
  }
  SemVer v;
  for (auto part : split(text, '.')) {
    if (!all_digits(part)) return std::nullopt;
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), n);
    if (ec != std::errc{}) return std::nullopt;
    v.release.push_back(n);
  }
  if (!pre.empty())
    for (auto id : split(pre, '.')) {
      if (!identifier_chars(id)) return std::nullopt;
      v.prerelease.emplace_back(id);
    }
  return v;
}

std::strong_ordering compare_semver(const SemVer& a, const SemVer& b) {
  const auto n = std::max(a.release.size(), b.release.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = i < a.release.size() ? a.release[i] : 0;
    const auto y = i < b.release.size() ? b.release[i] : 0;
    if (x != y) return x <=> y;
  }
  // a release outranks any of its pre-releases
  if (a.prerelease.empty() || b.prerelease.empty())
    return b.prerelease.size() == a.prerelease.size() ? std::strong_ordering::equal
           : a.prerelease.empty()                     ? std::strong_ordering::greater
                                                      : std::strong_ordering::less;
  const auto m = std::min(a.prerelease.size(), b.prerelease.size());
  for (std::size_t i = 0; i < m; ++i)
    if (auto c = compare_identifier(a.prerelease[i], b.prerelease[i]); c != 0) return c;
  return a.prerelease.size() <=> b.prerelease.size();
}

VersionOrder compare_versions(std::string_view a, std::string_view b) {
  const auto sa = parse_semver(a);
  const auto sb = parse_semver(b);
  if (sa && sb) return {compare_semver(*sa, *sb), false};
  return {a <=> b, true};
}

}  // namespace ulens
