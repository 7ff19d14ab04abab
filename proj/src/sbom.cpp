#include "upgrade_lens/sbom.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "upgrade_lens/errors.hpp"

namespace ulens {

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s, std::string_view whole) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size()) throw DomainError(fmt::format("malformed purl '{}': truncated escape", whole));
    const int hi = hex_value(s[i + 1]), lo = hex_value(s[i + 2]);
    if (hi < 0 || lo < 0) throw DomainError(fmt::format("malformed purl '{}': bad escape", whole));
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 2;
  }
  return out;
}

bool valid_type(std::string_view t) {
  if (t.empty() || std::isdigit(static_cast<unsigned char>(t.front()))) return false;
  return std::all_of(t.begin(), t.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-';
  });
}

// Python package names compare case-insensitively with '-', '_' and '.' folded.
std::string fold_name(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(c == '_' || c == '.' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

bool name_matches(const std::string& name, const Purl& p) {
  if (name == p.name) return true;
  if (!p.namespace_.empty() && (name == p.namespace_ + "/" + p.name || name == p.namespace_ + ":" + p.name))
    return true;
  return p.type == "pypi" && fold_name(name) == fold_name(p.name);
}

struct RawComponent {
  std::string name;
  std::optional<std::string> version;
  std::optional<std::string> purl;
};

SbomParseResult finish(const std::vector<RawComponent>& raw) {
  SbomParseResult out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& c = raw[i];
    const auto label = fmt::format("component {} ({})", i + 1, c.name.empty() ? "<unnamed>" : c.name);
    if (c.name.empty()) {
      out.warnings.push_back(label + ": missing name, skipped");
      continue;
    }
    if (!c.version || c.version->empty()) {
      out.warnings.push_back(label + ": missing version, skipped");
      continue;
    }
    SbomPackage pkg{c.name, *c.version, "", c.purl};
    if (c.purl) {
      Purl p;
      try {
        p = parse_purl(*c.purl);
      } catch (const DomainError& e) {
        out.warnings.push_back(label + ": " + e.what() + ", skipped");
        continue;
      }
      if (!name_matches(c.name, p) || (p.version && *p.version != c.version)) {
        out.warnings.push_back(label + ": purl " + *c.purl + " disagrees with name/version, skipped");
        continue;
      }
      pkg.ecosystem = p.type;
    }
    out.packages.push_back(std::move(pkg));
  }
  return out;
}

std::optional<std::string> string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(fmt::format("CycloneDX field '{}' must be a string", key));
  return it->get<std::string>();
}

void collect_cyclonedx(const json& components, std::vector<RawComponent>& out) {
  if (!components.is_array()) throw ParseError("CycloneDX 'components' must be an array");
  for (const auto& c : components) {
    if (!c.is_object()) throw ParseError("CycloneDX component must be an object");
    out.push_back({string_field(c, "name").value_or(""), string_field(c, "version"), string_field(c, "purl")});
    if (auto nested = c.find("components"); nested != c.end()) collect_cyclonedx(*nested, out);
  }
}

SbomParseResult parse_cyclonedx(const json& doc) {
  std::vector<RawComponent> raw;
  if (auto it = doc.find("components"); it != doc.end()) collect_cyclonedx(*it, raw);
  return finish(raw);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

SbomParseResult parse_spdx_tag_value(std::string_view text) {
  std::vector<RawComponent> raw;
  bool in_text = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (in_text) {
      if (line.find("</text>") != std::string_view::npos) in_text = false;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("SPDX line is not 'Tag: Value'", line_no, 1);
    const auto tag = trim(line.substr(0, colon));
    const auto value = trim(line.substr(colon + 1));
    if (value.starts_with("<text>") && value.find("</text>") == std::string_view::npos) {
      in_text = true;
      continue;
    }
    if (tag == "PackageName") {
      raw.push_back({std::string(value), std::nullopt, std::nullopt});
    } else if (tag == "PackageVersion") {
      if (raw.empty()) throw ParseError("PackageVersion before any PackageName", line_no, 1);
      raw.back().version = std::string(value);
    } else if (tag == "ExternalRef") {
      // ExternalRef: PACKAGE-MANAGER purl pkg:...
      std::vector<std::string_view> parts;
      std::size_t p = 0;
      while (p < value.size()) {
        while (p < value.size() && value[p] == ' ') ++p;
        const auto q = std::min(value.find(' ', p), value.size());
        if (q > p) parts.push_back(value.substr(p, q - p));
        p = q;
      }
      if (parts.size() == 3 && parts[1] == "purl") {
        if (raw.empty()) throw ParseError("ExternalRef before any PackageName", line_no, 1);
        raw.back().purl = std::string(parts[2]);
      }
    }
  }
  return finish(raw);
}

}  // namespace

Purl parse_purl(std::string_view text) {
  const std::string whole(text);
  if (text.size() < 4 || lower(text.substr(0, 4)) != "pkg:")
    throw DomainError(fmt::format("malformed purl '{}': missing pkg: scheme", whole));
  text.remove_prefix(4);
  while (!text.empty() && text.front() == '/') text.remove_prefix(1);

  Purl p;
  if (const auto hash = text.rfind('#'); hash != std::string_view::npos) {
    p.subpath = percent_decode(text.substr(hash + 1), whole);
    text = text.substr(0, hash);
  }
  if (const auto q = text.rfind('?'); q != std::string_view::npos) {
    auto qs = text.substr(q + 1);
    text = text.substr(0, q);
    while (!qs.empty()) {
      const auto amp = std::min(qs.find('&'), qs.size());
      const auto pair = qs.substr(0, amp);
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw DomainError(fmt::format("malformed purl '{}': bad qualifier", whole));
      p.qualifiers[lower(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1), whole);
      qs = amp < qs.size() ? qs.substr(amp + 1) : std::string_view{};
    }
  }
  const auto last_slash = text.rfind('/');
  if (const auto at = text.rfind('@'); at != std::string_view::npos &&
                                        (last_slash == std::string_view::npos || at > last_slash)) {
    p.version = percent_decode(text.substr(at + 1), whole);
    if (p.version->empty()) throw DomainError(fmt::format("malformed purl '{}': empty version", whole));
    text = text.substr(0, at);
  }
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw DomainError(fmt::format("malformed purl '{}': missing name", whole));
  p.type = lower(text.substr(0, slash));
  if (!valid_type(p.type)) throw DomainError(fmt::format("malformed purl '{}': bad type", whole));
  auto rest = text.substr(slash + 1);
  while (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
  const auto name_start = rest.rfind('/');
  if (name_start != std::string_view::npos) {
    for (auto seg = rest.substr(0, name_start); !seg.empty();) {
      const auto s = std::min(seg.find('/'), seg.size());
      if (s > 0) {
        if (!p.namespace_.empty()) p.namespace_ += '/';
        p.namespace_ += percent_decode(seg.substr(0, s), whole);
      }
      seg = s < seg.size() ? seg.substr(s + 1) : std::string_view{};
    }
    rest = rest.substr(name_start + 1);
  }
  p.name = percent_decode(rest, whole);
  if (p.name.empty()) throw DomainError(fmt::format("malformed purl '{}': missing name", whole));
  return p;
}

SbomParseResult parse_sbom(std::string_view document) {
  const auto body = trim(document);
  if (body.starts_with("{")) {
    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("SBOM is not valid JSON: ") + e.what(), 0, e.byte);
    }
    const auto format = doc.value("bomFormat", std::string{});
    if (format == "CycloneDX" || (format.empty() && doc.contains("components")))
      return parse_cyclonedx(doc);
    throw ParseError("unrecognised SBOM format: expected CycloneDX JSON");
  }
  if (body.find("SPDXVersion:") != std::string_view::npos) return parse_spdx_tag_value(document);
  throw ParseError("unrecognised SBOM format: expected CycloneDX JSON or SPDX tag-value");
}

}  // namespace ulens
