#include "upgrade_lens/extract.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>

#include "upgrade_lens/errors.hpp"
#include "upgrade_lens/io.hpp"

namespace ulens {

namespace {

// ---- lexical preprocessing ------------------------------------------------

// Blanks comments and string literals (keeping newlines) so later passes see
// only code.
std::string sanitize(std::string_view src, const std::string& path, std::vector<std::string>& warnings) {
  std::string out(src);
  std::size_t i = 0;
  std::size_t line = 1;
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to; ++k)
      if (out[k] != '\n') out[k] = ' ';
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == '#') {
      const auto end = std::min(src.find('\n', i), src.size());
      blank(i, end);
      i = end;
    } else if (c == '"' || c == '\'') {
      const std::size_t start = i;
      const bool triple = src.substr(i, 3) == std::string(3, c);
      const std::string_view close = triple ? std::string_view(&src[i], 3) : std::string_view(&src[i], 1);
      i += close.size();
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '\\') {
          if (i + 1 < src.size() && src[i + 1] == '\n') ++line;
          i += 2;
          continue;
        }
        if (!triple && src[i] == '\n') break;
        if (src.substr(i, close.size()) == close) {
          i += close.size();
          closed = true;
          break;
        }
        if (src[i] == '\n') ++line;
        ++i;
      }
      i = std::min(i, src.size());
      if (!closed) warnings.push_back(fmt::format("{}:{}: unterminated string literal", path, line));
      blank(start, i);
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    auto l = text.substr(pos, end - pos);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back(l);
    pos = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::size_t indent_of(std::string_view s) {
  std::size_t col = 0;
  for (char c : s) {
    if (c == ' ')
      ++col;
    else if (c == '\t')
      col = (col / 8 + 1) * 8;
    else if (c == '\f')
      col = 0;
    else
      break;
  }
  return col;
}

struct LogicalLine {
  std::size_t first = 0;  // physical line indices, 0-based
  std::size_t last = 0;
  std::size_t indent = 0;
  std::string code;  // physical lines joined by spaces, trimmed
};

std::vector<LogicalLine> logical_lines(const std::vector<std::string_view>& lines) {
  std::vector<LogicalLine> out;
  std::optional<LogicalLine> cur;
  int depth = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto l = lines[i];
    if (!cur) {
      if (is_blank(l)) continue;
      cur = LogicalLine{i, i, indent_of(l), {}};
    }
    bool continued = false;
    for (char c : l) {
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') depth = std::max(0, depth - 1);
    }
    auto trimmed = l;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.remove_suffix(1);
    if (!trimmed.empty() && trimmed.back() == '\\') {
      continued = true;
      trimmed.remove_suffix(1);
    }
    if (!cur->code.empty()) cur->code += ' ';
    cur->code += trimmed;
    cur->last = i;
    if (depth == 0 && !continued) {
      const auto s = cur->code.find_first_not_of(" \t\f");
      cur->code = s == std::string::npos ? "" : cur->code.substr(s);
      out.push_back(std::move(*cur));
      cur.reset();
    }
  }
  if (cur) {
    const auto s = cur->code.find_first_not_of(" \t\f");
    cur->code = s == std::string::npos ? "" : cur->code.substr(s);
    out.push_back(std::move(*cur));
  }
  return out;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string_view skip_ws(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

std::optional<std::string_view> take_ident(std::string_view& s) {
  if (s.empty() || !ident_start(s.front())) return std::nullopt;
  std::size_t n = 1;
  while (n < s.size() && ident_char(s[n])) ++n;
  auto id = s.substr(0, n);
  s.remove_prefix(n);
  return id;
}

// Index just past the ':' that ends a compound-statement header.
std::size_t header_end(std::string_view code) {
  int depth = 0;
  for (std::size_t i = 0; i < code.size(); ++i) {
    const char c = code[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ':' && depth == 0) return i + 1;
  }
  return code.size();
}

const std::set<std::string_view> kKeywords{
    "False",  "None",   "True",    "and",   "as",       "assert", "async",  "await", "break",
    "case",   "class",  "continue", "def",  "del",      "elif",   "else",   "except", "finally",
    "for",    "from",   "global",  "if",    "import",   "in",     "is",     "lambda", "match",
    "nonlocal", "not",  "or",      "pass",  "raise",    "return", "try",    "while",  "with",
    "yield"};

struct CallSite {
  std::vector<std::string> chain;
  bool on_value = false;  // preceded by '.', e.g. f().g()
};

std::vector<CallSite> find_calls(std::string_view code) {
  std::vector<CallSite> out;
  std::size_t i = 0;
  while (i < code.size()) {
    const char c = code[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < code.size() && (ident_char(code[i]) || code[i] == '.')) ++i;
      continue;
    }
    if (!ident_start(c)) {
      ++i;
      continue;
    }
    // previous non-space character decides whether this is an attribute of a value
    std::size_t p = i;
    while (p > 0 && std::isspace(static_cast<unsigned char>(code[p - 1]))) --p;
    const bool after_dot = p > 0 && code[p - 1] == '.';

    CallSite site;
    site.on_value = after_dot;
    auto rest = code.substr(i);
    while (true) {
      auto id = take_ident(rest);
      site.chain.emplace_back(*id);
      auto look = skip_ws(rest);
      if (!look.empty() && look.front() == '.') {
        auto after = skip_ws(look.substr(1));
        if (!after.empty() && ident_start(after.front())) {
          rest = after;
          continue;
        }
      }
      break;
    }
    i = code.size() - rest.size();
    const auto look = skip_ws(rest);
    if (look.empty() || look.front() != '(') continue;
    if (site.chain.size() == 1 && kKeywords.contains(site.chain[0])) continue;
    if (!site.on_value && kKeywords.contains(site.chain[0])) continue;
    out.push_back(std::move(site));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::size_t from = 0, std::size_t to = std::string::npos) {
  std::string out;
  for (std::size_t i = from; i < std::min(to, parts.size()); ++i) {
    if (!out.empty()) out += '.';
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_dots(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find('.', start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---- per-file model -------------------------------------------------------

struct Def {
  std::string qual;
  std::size_t first = 0, last = 0;  // physical lines
  std::size_t indent = 0;
  bool is_class = false;
  std::map<std::string, std::size_t> children;  // direct child defs/classes by name
  std::vector<std::pair<std::vector<std::size_t>, CallSite>> calls;  // (scope chain, call)
};

struct FileModel {
  std::string path;
  std::string module;
  std::string package;  // for relative imports
  std::vector<std::string_view> raw_lines;
  std::vector<Def> defs;
  std::map<std::string, std::size_t> top;  // module-level names
  std::map<std::string, std::string> module_alias;  // name -> module
  std::map<std::string, std::pair<std::string, std::string>> from_alias;  // name -> (module, attr)
};

std::string module_of(const std::string& path) {
  std::string m = path.substr(0, path.size() - 3);
  std::replace(m.begin(), m.end(), '/', '.');
  if (m == "__init__") return "";
  if (m.ends_with(".__init__")) m.resize(m.size() - 9);
  return m;
}

std::string resolve_relative(const FileModel& f, std::string_view dotted) {
  std::size_t level = 0;
  while (level < dotted.size() && dotted[level] == '.') ++level;
  if (level == 0) return std::string(dotted);
  auto parts = f.package.empty() ? std::vector<std::string>{} : split_dots(f.package);
  for (std::size_t k = 1; k < level && !parts.empty(); ++k) parts.pop_back();
  std::string base = join(parts);
  const auto tail = dotted.substr(level);
  if (tail.empty()) return base;
  return base.empty() ? std::string(tail) : base + "." + std::string(tail);
}

void parse_imports(FileModel& f, std::string_view code) {
  auto strip = [](std::string_view s) {
    s = skip_ws(s);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto items = [&](std::string_view list) {
    std::vector<std::pair<std::string, std::string>> out;  // (target, alias)
    std::string buf(list);
    for (char& c : buf)
      if (c == '(' || c == ')') c = ' ';
    std::string_view rest = buf;
    while (!rest.empty()) {
      const auto comma = std::min(rest.find(','), rest.size());
      auto item = strip(rest.substr(0, comma));
      rest = comma < rest.size() ? rest.substr(comma + 1) : std::string_view{};
      if (item.empty()) continue;
      std::string target(item), alias;
      if (const auto as = item.find(" as "); as != std::string_view::npos) {
        target = std::string(strip(item.substr(0, as)));
        alias = std::string(strip(item.substr(as + 4)));
      }
      out.emplace_back(target, alias);
    }
    return out;
  };

  if (code.starts_with("import ")) {
    for (auto& [target, alias] : items(code.substr(7))) {
      if (!alias.empty())
        f.module_alias[alias] = target;
      else
        f.module_alias[target] = target;  // dotted chains are matched by prefix
    }
  } else if (code.starts_with("from ")) {
    auto rest = skip_ws(code.substr(5));
    const auto sp = rest.find(" import ");
    if (sp == std::string_view::npos) return;
    const auto mod = resolve_relative(f, strip(rest.substr(0, sp)));
    for (auto& [target, alias] : items(rest.substr(sp + 8))) {
      if (target == "*") continue;
      f.from_alias[alias.empty() ? target : alias] = {mod, target};
    }
  }
}

FileModel scan_file(const SourceFile& src, std::vector<std::string>& warnings) {
  FileModel f;
  f.path = src.path;
  f.module = module_of(src.path);
  f.package = src.path.ends_with("__init__.py") ? f.module
                                                : f.module.substr(0, f.module.rfind('.') == std::string::npos
                                                                         ? 0
                                                                         : f.module.rfind('.'));
  const auto clean = sanitize(src.text, src.path, warnings);
  f.raw_lines = split_lines(src.text);
  const auto clean_lines = split_lines(clean);
  const auto logical = logical_lines(clean_lines);

  std::vector<std::size_t> stack;  // indices into f.defs
  std::size_t prev_last = 0;
  auto close_top = [&] {
    auto& d = f.defs[stack.back()];
    std::size_t end = std::max(prev_last, d.first);
    // trailing comments belong to whatever follows
    while (end > d.first) {
      auto raw = f.raw_lines[end];
      auto t = skip_ws(raw);
      if (is_blank(raw) || t.starts_with("#"))
        --end;
      else
        break;
    }
    d.last = end;
    stack.pop_back();
  };

  for (const auto& ll : logical) {
    if (ll.code.empty()) continue;
    while (!stack.empty() && ll.indent <= f.defs[stack.back()].indent) close_top();
    prev_last = ll.last;
    std::string_view code = ll.code;
    if (code.starts_with("@")) continue;

    auto head = code;
    if (head.starts_with("async ")) head = skip_ws(head.substr(6));
    const bool is_def = head.starts_with("def ");
    const bool is_class = head.starts_with("class ");
    if (is_def || is_class) {
      auto rest = skip_ws(head.substr(is_def ? 4 : 6));
      auto name = take_ident(rest);
      if (name) {
        Def d;
        d.first = ll.first;
        d.last = ll.last;
        d.indent = ll.indent;
        d.is_class = is_class;
        d.qual = stack.empty() ? std::string(*name) : f.defs[stack.back()].qual + "." + std::string(*name);
        const auto index = f.defs.size();
        auto& siblings = stack.empty() ? f.top : f.defs[stack.back()].children;
        if (!siblings.contains(std::string(*name))) siblings[std::string(*name)] = index;
        f.defs.push_back(std::move(d));
        stack.push_back(index);
        // a body on the header line belongs to the new definition
        const auto body = code.substr(header_end(code));
        if (!is_class && !skip_ws(body).empty())
          for (auto& call : find_calls(body)) f.defs[index].calls.push_back({stack, std::move(call)});
        continue;
      }
    }
    if (code.starts_with("import ") || code.starts_with("from ")) {
      parse_imports(f, code);
      continue;
    }
    // attribute calls to the innermost enclosing function
    auto owner = std::find_if(stack.rbegin(), stack.rend(), [&](std::size_t k) { return !f.defs[k].is_class; });
    if (owner == stack.rend()) continue;
    for (auto& call : find_calls(code)) f.defs[*owner].calls.push_back({stack, std::move(call)});
  }
  prev_last = f.raw_lines.empty() ? 0 : f.raw_lines.size() - 1;
  while (!stack.empty()) close_top();
  return f;
}

// ---- cross-file resolution ------------------------------------------------

struct Target {
  std::optional<std::pair<std::size_t, std::size_t>> local;  // (file, def)
  std::string external;
};

class Resolver {
 public:
  explicit Resolver(const std::vector<FileModel>& files) : files_(files) {
    for (std::size_t i = 0; i < files.size(); ++i) modules_[files[i].module] = i;
  }

  Target resolve(std::size_t fi, const std::vector<std::size_t>& scope, const CallSite& call) const {
    const auto& f = files_[fi];
    const auto text = join(call.chain);
    if (call.on_value) return external("." + text);
    const auto& head = call.chain[0];

    if (call.chain.size() == 1) {
      // enclosing function scopes, innermost first; class bodies are not scopes for lookup
      for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
        const auto& d = f.defs[*it];
        if (d.is_class) continue;
        if (auto c = d.children.find(head); c != d.children.end()) return callable(fi, c->second, text);
      }
      if (auto t = f.top.find(head); t != f.top.end()) return callable(fi, t->second, f.module + "." + head);
      if (auto a = f.from_alias.find(head); a != f.from_alias.end()) return from_module(a->second.first, {a->second.second});
      return external(text);
    }

    // Class.method in this file or imported by name
    if (call.chain.size() == 2) {
      if (auto t = f.top.find(head); t != f.top.end() && f.defs[t->second].is_class)
        return member(fi, t->second, call.chain[1], f.module + "." + text);
    }
    if (auto a = f.from_alias.find(head); a != f.from_alias.end()) {
      const auto& [mod, attr] = a->second;
      // `from pkg import mod` binds a module
      if (modules_.contains(mod.empty() ? attr : mod + "." + attr)) {
        std::vector<std::string> tail(call.chain.begin() + 1, call.chain.end());
        return from_module(mod.empty() ? attr : mod + "." + attr, tail);
      }
      std::vector<std::string> tail{attr};
      tail.insert(tail.end(), call.chain.begin() + 1, call.chain.end());
      return from_module(mod, tail);
    }
    // import a.b.c / import a.b as c: longest dotted prefix naming an imported module
    for (std::size_t len = call.chain.size() - 1; len >= 1; --len) {
      const auto prefix = join(call.chain, 0, len);
      if (auto m = f.module_alias.find(prefix); m != f.module_alias.end()) {
        std::vector<std::string> tail(call.chain.begin() + static_cast<long>(len), call.chain.end());
        return from_module(m->second, tail);
      }
    }
    return external(text);
  }

 private:
  static Target external(std::string name) { return {std::nullopt, std::move(name)}; }

  // A def is called directly; a class is called through its __init__.
  Target callable(std::size_t fi, std::size_t di, const std::string& label) const {
    const auto& d = files_[fi].defs[di];
    if (!d.is_class) return {std::pair{fi, di}, {}};
    return member(fi, di, "__init__", label);
  }

  Target member(std::size_t fi, std::size_t cls, const std::string& name, const std::string& label) const {
    const auto& c = files_[fi].defs[cls];
    if (auto m = c.children.find(name); m != c.children.end() && !files_[fi].defs[m->second].is_class)
      return {std::pair{fi, m->second}, {}};
    return external(label);
  }

  Target from_module(const std::string& mod, const std::vector<std::string>& tail) const {
    const auto label = mod.empty() ? join(tail) : mod + "." + join(tail);
    if (tail.size() > 1) {
      const auto sub = mod.empty() ? tail[0] : mod + "." + tail[0];
      if (modules_.contains(sub)) return from_module(sub, {tail.begin() + 1, tail.end()});
    }
    auto it = modules_.find(mod);
    if (it == modules_.end() || tail.empty() || tail.size() > 2) return external(label);
    const auto fi = it->second;
    const auto& f = files_[fi];
    auto t = f.top.find(tail[0]);
    if (t == f.top.end()) return external(label);
    if (tail.size() == 1) return callable(fi, t->second, label);
    if (!f.defs[t->second].is_class) return external(label);
    return member(fi, t->second, tail[1], label);
  }

  const std::vector<FileModel>& files_;
  std::map<std::string, std::size_t> modules_;
};

std::string def_text(const FileModel& f, const Def& d) {
  std::string out;
  for (std::size_t l = d.first; l <= d.last && l < f.raw_lines.size(); ++l) {
    out += f.raw_lines[l];
    out += '\n';
  }
  return out;
}

}  // namespace

bool PythonAdapter::accepts(const std::filesystem::path& file) const { return file.extension() == ".py"; }

ExtractResult PythonAdapter::extract(const std::vector<SourceFile>& sources) const {
  std::vector<std::string> warnings;
  std::vector<FileModel> files;
  for (const auto& s : sources) files.push_back(scan_file(s, warnings));

  // node per non-class def; duplicates of (path, name) merge into the first
  std::vector<FunctionNode> nodes;
  std::map<FunctionKey, NodeId> ids;
  std::map<FunctionKey, std::string> bodies;
  std::vector<std::vector<NodeId>> def_node(files.size());
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    const auto& f = files[fi];
    def_node[fi].assign(f.defs.size(), 0);
    for (std::size_t di = 0; di < f.defs.size(); ++di) {
      const auto& d = f.defs[di];
      if (d.is_class) continue;
      const FunctionKey key{f.path, d.qual};
      auto [it, inserted] = ids.try_emplace(key, static_cast<NodeId>(nodes.size()));
      if (inserted) {
        FunctionNode n;
        n.path = key.path;
        n.name = key.name;
        nodes.push_back(std::move(n));
      } else {
        warnings.push_back(fmt::format("{}:{}: duplicate definition of {} merged", f.path, d.first + 1, d.qual));
      }
      def_node[fi][di] = it->second;
      bodies[key] += def_text(f, d);
    }
  }

  const Resolver resolver(files);
  std::vector<std::pair<NodeId, std::variant<NodeId, std::string>>> raw_edges;
  std::set<std::string> externals;
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    const auto& f = files[fi];
    for (std::size_t di = 0; di < f.defs.size(); ++di) {
      for (const auto& [scope, call] : f.defs[di].calls) {
        const auto t = resolver.resolve(fi, scope, call);
        if (t.local) {
          raw_edges.emplace_back(def_node[fi][di], def_node[t.local->first][t.local->second]);
        } else {
          externals.insert(t.external);
          raw_edges.emplace_back(def_node[fi][di], t.external);
        }
      }
    }
  }
  for (const auto& name : externals) {
    FunctionNode n;
    n.path = std::string(kExternalPath);
    n.name = name;
    ids[n.key()] = static_cast<NodeId>(nodes.size());
    bodies[n.key()] = name;
    nodes.push_back(std::move(n));
  }

  std::vector<CallEdge> edges;
  for (const auto& [from, to] : raw_edges) {
    const NodeId target = std::holds_alternative<NodeId>(to)
                              ? std::get<NodeId>(to)
                              : ids.at(FunctionKey{std::string(kExternalPath), std::get<std::string>(to)});
    edges.push_back({from, target, 1.0});
  }

  ExtractResult out{CallGraph(std::move(nodes), std::move(edges)), {}, std::move(warnings)};
  for (const auto& [key, body] : bodies) out.digests[key] = body_digest(body);
  return out;
}

ExtractResult extract_call_graph(const std::filesystem::path& root, const SourceAdapter& adapter) {
  namespace fs = std::filesystem;
  std::vector<std::string> warnings;
  std::vector<std::string> rel_paths;
  if (!fs::is_directory(root)) throw DomainError("source root is not a directory: " + root.string());
  for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
       it != fs::recursive_directory_iterator(); ++it) {
    std::error_code ec;
    if (!it->is_regular_file(ec) || !adapter.accepts(it->path())) continue;
    rel_paths.push_back(fs::relative(it->path(), root).generic_string());
  }
  std::sort(rel_paths.begin(), rel_paths.end());

  std::vector<SourceFile> files;
  for (const auto& rel : rel_paths) {
    std::ifstream in(root / rel, std::ios::binary);
    if (!in) {
      warnings.push_back(rel + ": unreadable, skipped");
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
      warnings.push_back(rel + ": read error, skipped");
      continue;
    }
    files.push_back({rel, buf.str()});
  }
  auto result = adapter.extract(files);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  result.warnings = std::move(warnings);
  return result;
}

ExtractResult extract_call_graph(const std::filesystem::path& root) { return extract_call_graph(root, PythonAdapter{}); }

}  // namespace ulens
