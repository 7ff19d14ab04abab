#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "upgrade_lens/diff.hpp"
#include "upgrade_lens/graph.hpp"

namespace ulens {

/// Path used for call targets that are not defined in the scanned tree.
inline constexpr std::string_view kExternalPath = "<external>";

struct SourceFile {
  std::string path;  // relative to the scanned root, '/'-separated
  std::string text;
};

struct ExtractResult {
  CallGraph graph;
  DigestTable digests;  // one per node, function bodies hashed with body_digest
  std::vector<std::string> warnings;
};

/// A language front end. Receives every accepted file of a tree, sorted by path.
class SourceAdapter {
 public:
  virtual ~SourceAdapter() = default;
  virtual bool accepts(const std::filesystem::path& file) const = 0;
  virtual ExtractResult extract(const std::vector<SourceFile>& files) const = 0;
};

/// Lexical extractor for Python syntax.
///
/// Nodes are `def` statements named by their dotted nesting (`Class.method`,
/// `outer.inner`). A call `f(...)` resolves, in order, to a def nested in an
/// enclosing function, a module-level def or class of the same file, or a
/// name brought in by `from m import f`; `m.f(...)` resolves through
/// `import m` aliases and `C.f(...)` through module-level classes. Calling a
/// class resolves to its `__init__` when present. Every other call,
/// including attribute calls on values (`self.x()`, `obj.y()`), targets a
/// node on the `<external>` path named by the call text. Calls outside any
/// function body are ignored.
class PythonAdapter final : public SourceAdapter {
 public:
  bool accepts(const std::filesystem::path& file) const override;
  ExtractResult extract(const std::vector<SourceFile>& files) const override;
};

/// Reads every file under `root` accepted by the adapter, in lexicographic
/// relative-path order. Unreadable files become warnings.
ExtractResult extract_call_graph(const std::filesystem::path& root, const SourceAdapter& adapter);
ExtractResult extract_call_graph(const std::filesystem::path& root);  // PythonAdapter

}  // namespace ulens
