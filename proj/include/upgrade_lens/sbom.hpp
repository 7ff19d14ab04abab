#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ulens {

/// Package URL: pkg:type/namespace/name@version?qualifiers#subpath
struct Purl {
  std::string type;
  std::string namespace_;  // percent-decoded, '/'-joined
  std::string name;        // percent-decoded
  std::optional<std::string> version;
  std::map<std::string, std::string> qualifiers;
  std::string subpath;

  bool operator==(const Purl&) const = default;
};

/// Throws DomainError for anything that is not a well-formed purl.
Purl parse_purl(std::string_view text);

struct SbomPackage {
  std::string name;
  std::string version;
  std::string ecosystem;  // the purl type, verbatim; empty without a purl
  std::optional<std::string> purl;

  bool operator==(const SbomPackage&) const = default;
};

struct SbomParseResult {
  std::vector<SbomPackage> packages;
  std::vector<std::string> warnings;  // one per skipped component
};

/// CycloneDX JSON (components[].name/version/purl) or SPDX tag-value
/// (PackageName / PackageVersion / ExternalRef purl). Components without a
/// version, or whose purl disagrees with name/version, are skipped with a
/// warning. Anything else is a ParseError.
SbomParseResult parse_sbom(std::string_view document);

}  // namespace ulens
