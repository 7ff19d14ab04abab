#include "upgrade_lens/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "upgrade_lens/io.hpp"

namespace ulens::report {

namespace {

using nlohmann::ordered_json;

std::string fixed(double x) { return fmt::format("{:.6f}", x); }

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// JSON has no infinities; they appear as strings.
ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

ordered_json optional_number(const std::optional<double>& x) { return x ? number(*x) : ordered_json(nullptr); }

ordered_json report_json(const MetricsReport& r) {
  ordered_json j;
  j["nodes"] = r.n_nodes;
  j["edges"] = r.n_edges;
  j["average_degree"] = number(r.avg_degree);
  j["density"] = number(r.density);
  j["connected_components"] = r.n_components;
  j["strong_components"] = r.n_strong_components;
  j["average_clustering"] = number(r.avg_clustering);
  j["assortativity"] = optional_number(r.assortativity);
  j["average_betweenness"] = number(r.avg_betweenness);
  j["average_betweenness_normalized"] = number(r.avg_betweenness_normalized);
  j["average_closeness"] = number(r.avg_closeness);
  j["cyclomatic_complexity"] = r.cyclomatic;
  j["self_loops"] = r.self_loops;
  return j;
}

ordered_json test_json(const StatTestResult& t) {
  ordered_json j;
  j["test"] = t.kind == TestKind::welch_t ? "welch_t" : "ks_two_sample";
  j["statistic"] = number(t.statistic);
  j["p_value"] = number(t.p_value);
  j["n_a"] = t.n_a;
  j["n_b"] = t.n_b;
  if (t.kind == TestKind::welch_t) j["degrees_of_freedom"] = number(t.degrees_of_freedom);
  j["degenerate"] = t.degenerate;
  return j;
}

std::string svg_open(int w, int h, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text class=\"title\" x=\"{2}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      "font-size=\"14\">{3}</text>\n",
      w, h, w / 2, title);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr int kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
constexpr double kPlotW = kWidth - kLeft - kRight, kPlotH = kHeight - kTop - kBottom;

std::string axes(const std::string& x_lo, const std::string& x_hi, const std::string& y_lo,
                 const std::string& y_hi) {
  std::string s;
  s += fmt::format("<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft,
                   kTop + kPlotH, kLeft + kPlotW);
  s += fmt::format("<line class=\"axis\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft,
                   kTop, kTop + kPlotH);
  const auto label = "font-family=\"sans-serif\" font-size=\"11\"";
  s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"start\" {}>{}</text>\n", kLeft,
                   kTop + kPlotH + 16, label, x_lo);
  s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\" {}>{}</text>\n", kLeft + kPlotW,
                   kTop + kPlotH + 16, label, x_hi);
  s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\" {}>{}</text>\n", kLeft - 6,
                   kTop + kPlotH, label, y_lo);
  s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\" {}>{}</text>\n", kLeft - 6,
                   kTop + 10, label, y_hi);
  return s;
}

std::string placeholder(const std::string& title) {
  return svg_open(kWidth, kHeight, escape_xml(title)) +
         fmt::format("<text class=\"empty\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"14\">no data</text>\n</svg>\n",
                     kWidth / 2, kHeight / 2);
}

}  // namespace

std::string exact(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

std::string render_csv(const TextTable& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += io::csv_field(cells[i]);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::string render_aligned(const TextTable& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  auto measure = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) width[i] = std::max(width[i], cells[i].size());
  };
  measure(t.header);
  for (const auto& r : t.rows) measure(r);
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) l += "  ";
      l += i == 0 ? fmt::format("{:<{}}", cells[i], width[i]) : fmt::format("{:>{}}", cells[i], width[i]);
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

TextTable comparison_rows(const ComparisonTable& table, const MetricsOptions& options, bool exact_numbers) {
  TextTable t;
  t.header.push_back("Metric");
  for (const auto& c : table.columns) t.header.push_back(c.heading);
  const auto real = [&](double x) { return exact_numbers ? exact(x) : fixed(x); };
  auto row = [&](std::string name, auto cell) {
    std::vector<std::string> r{std::move(name)};
    for (const auto& c : table.columns) r.push_back(cell(c));
    t.rows.push_back(std::move(r));
  };
  row("Nodes", [](const ComparisonColumn& c) { return std::to_string(c.report.n_nodes); });
  row("Edges", [](const ComparisonColumn& c) { return std::to_string(c.report.n_edges); });
  row("Average degree", [&](const ComparisonColumn& c) { return real(c.report.avg_degree); });
  row("Density", [&](const ComparisonColumn& c) { return real(c.report.density); });
  row("Connected components", [](const ComparisonColumn& c) { return std::to_string(c.report.n_components); });
  row("Average clustering", [&](const ComparisonColumn& c) { return real(c.report.avg_clustering); });
  row("Assortativity", [&](const ComparisonColumn& c) {
    return c.report.assortativity ? real(*c.report.assortativity) : std::string("undefined");
  });
  row(options.normalized_bc ? "Average betweenness (normalized)" : "Average betweenness",
      [&](const ComparisonColumn& c) {
        return real(options.normalized_bc ? c.report.avg_betweenness_normalized : c.report.avg_betweenness);
      });
  row("Average closeness", [&](const ComparisonColumn& c) { return real(c.report.avg_closeness); });
  row("Cyclomatic complexity", [](const ComparisonColumn& c) { return std::to_string(c.report.cyclomatic); });
  if (std::any_of(table.columns.begin(), table.columns.end(), [](const auto& c) { return c.cross_edges.has_value(); }))
    row("Cross edges", [](const ComparisonColumn& c) {
      return c.cross_edges ? std::to_string(*c.cross_edges) : std::string("-");
    });
  return t;
}

std::string comparison_json(const ComparisonTable& table) {
  ordered_json cols = ordered_json::array();
  for (const auto& c : table.columns) {
    ordered_json j;
    j["heading"] = c.heading;
    j["metrics"] = report_json(c.report);
    if (c.cross_edges) j["cross_edges"] = *c.cross_edges;
    cols.push_back(std::move(j));
  }
  ordered_json doc;
  doc["columns"] = std::move(cols);
  return doc.dump(2) + "\n";
}

std::string stats_json(const SubgraphTests& tests) {
  ordered_json doc;
  doc["welch_t"] = test_json(tests.welch);
  doc["ks_two_sample"] = test_json(tests.ks);
  return doc.dump(2) + "\n";
}

std::string stats_text(const SubgraphTests& tests) {
  TextTable t{{"Test", "Statistic", "p-value", "n_a", "n_b"}, {}};
  t.rows.push_back({"Welch t", fixed(tests.welch.statistic), exact(tests.welch.p_value),
                    std::to_string(tests.welch.n_a), std::to_string(tests.welch.n_b)});
  t.rows.push_back({"Kolmogorov-Smirnov", fixed(tests.ks.statistic), exact(tests.ks.p_value),
                    std::to_string(tests.ks.n_a), std::to_string(tests.ks.n_b)});
  return render_aligned(t);
}

std::string histogram_csv(const Histogram& h) {
  TextTable t{{"bin", "lower", "upper", "count"}, {}};
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    t.rows.push_back({std::to_string(i), exact(h.edges[i]), exact(h.edges[i + 1]), std::to_string(h.counts[i])});
  return render_csv(t);
}

std::string scores_csv(const CallGraph& g, const GatScores& scores) {
  TextTable t{{"id", "path", "name", "raw", "score", "critical"}, {}};
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    t.rows.push_back({std::to_string(v), g.node(v).path, g.node(v).name, exact(scores.raw[v]),
                      exact(scores.score[v]), g.node(v).critical ? "1" : "0"});
  return render_csv(t);
}

std::string summary_json(const ScoreSummary& s) {
  ordered_json j;
  j["NC"] = s.critical_count;
  j["MSC"] = optional_number(s.max_critical);
  j["mSC"] = optional_number(s.min_critical);
  j["ASC"] = optional_number(s.mean_critical);
  j["AGS"] = number(s.mean_all);
  return j.dump(2) + "\n";
}

std::string summary_text(const ScoreSummary& s) {
  auto opt = [](const std::optional<double>& x) { return x ? fmt::format("{:.4f}", *x) : std::string("-"); };
  TextTable t{{"NC", "MSC", "mSC", "ASC", "AGS"},
              {{std::to_string(s.critical_count), opt(s.max_critical), opt(s.min_critical), opt(s.mean_critical),
                fmt::format("{:.4f}", s.mean_all)}}};
  return render_aligned(t);
}

std::string pca_csv(const CallGraph& g, const PcaResult& pca) {
  TextTable t{{"id", "path", "name"}, {}};
  for (Eigen::Index c = 0; c < pca.coordinates.cols(); ++c) t.header.push_back(fmt::format("pc{}", c + 1));
  for (NodeId v = 0; v < g.num_nodes() && static_cast<Eigen::Index>(v) < pca.coordinates.rows(); ++v) {
    std::vector<std::string> r{std::to_string(v), g.node(v).path, g.node(v).name};
    for (Eigen::Index c = 0; c < pca.coordinates.cols(); ++c) r.push_back(exact(pca.coordinates(v, c)));
    t.rows.push_back(std::move(r));
  }
  return render_csv(t);
}

std::string plans_csv(std::span<const RemediationPlan> plans) {
  TextTable t{{"package", "version", "ecosystem", "target_version", "no_fix", "vulnerabilities", "diagnostics"}, {}};
  for (const auto& p : plans) {
    std::vector<std::string> ids, diags(p.diagnostics.begin(), p.diagnostics.end());
    for (const auto& v : p.vulnerabilities) ids.push_back(v.id + (v.fixed_version ? "@" + *v.fixed_version : ""));
    t.rows.push_back({p.package.name, p.package.version, p.package.ecosystem, p.target_version.value_or(""),
                      p.no_fix ? "1" : "0", join(ids, ";"), join(diags, ";")});
  }
  return render_csv(t);
}

std::string plans_json(std::span<const RemediationPlan> plans, std::span<const std::string> sbom_warnings) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : plans) {
    ordered_json j;
    j["package"] = {{"name", p.package.name},
                    {"version", p.package.version},
                    {"ecosystem", p.package.ecosystem},
                    {"purl", p.package.purl ? ordered_json(*p.package.purl) : ordered_json(nullptr)}};
    j["target_version"] = p.target_version ? ordered_json(*p.target_version) : ordered_json(nullptr);
    j["no_fix"] = p.no_fix;
    ordered_json vulns = ordered_json::array();
    for (const auto& v : p.vulnerabilities) {
      ordered_json r;
      r["id"] = v.id;
      r["summary"] = v.summary;
      r["fixed_version"] = v.fixed_version ? ordered_json(*v.fixed_version) : ordered_json(nullptr);
      ordered_json ranges = ordered_json::array();
      for (const auto& range : v.affected_ranges) {
        ordered_json x = ordered_json::object();
        if (range.introduced) x["introduced"] = *range.introduced;
        if (range.fixed) x["fixed"] = *range.fixed;
        if (range.last_affected) x["last_affected"] = *range.last_affected;
        ranges.push_back(std::move(x));
      }
      r["affected_ranges"] = std::move(ranges);
      vulns.push_back(std::move(r));
    }
    j["vulnerabilities"] = std::move(vulns);
    j["diagnostics"] = p.diagnostics;
    arr.push_back(std::move(j));
  }
  ordered_json doc;
  doc["plans"] = std::move(arr);
  doc["sbom_warnings"] = std::vector<std::string>(sbom_warnings.begin(), sbom_warnings.end());
  return doc.dump(2) + "\n";
}

std::string plans_text(std::span<const RemediationPlan> plans) {
  if (plans.empty()) return "No vulnerable packages.\n";
  TextTable t{{"Package", "Version", "Target", "Advisories"}, {}};
  for (const auto& p : plans)
    t.rows.push_back({p.package.name, p.package.version, p.no_fix ? "no fix" : p.target_version.value_or(""),
                      std::to_string(p.vulnerabilities.size())});
  return render_aligned(t);
}

std::string render_histogram_svg(const Histogram& h, const std::string& title) {
  if (h.counts.empty()) return placeholder(title);
  const auto top = *std::max_element(h.counts.begin(), h.counts.end());
  std::string s = svg_open(kWidth, kHeight, escape_xml(title));
  s += axes(fmt::format("{:.4g}", h.edges.front()), fmt::format("{:.4g}", h.edges.back()), "0", std::to_string(top));
  const double bar_w = kPlotW / static_cast<double>(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double height = top > 0 ? kPlotH * static_cast<double>(h.counts[i]) / static_cast<double>(top) : 0.0;
    s += fmt::format(
        "<rect class=\"bar\" x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"steelblue\"/>\n",
        kLeft + bar_w * static_cast<double>(i), kTop + kPlotH - height, bar_w, height);
  }
  return s + "</svg>\n";
}

std::string render_scatter_svg(const Eigen::MatrixXd& points, std::span<const NodeId> highlight,
                               const std::string& title) {
  if (points.rows() == 0 || points.cols() == 0) return placeholder(title);
  const Eigen::VectorXd xs = points.col(0);
  const Eigen::VectorXd ys = points.cols() > 1 ? Eigen::VectorXd(points.col(1)) : Eigen::VectorXd::Zero(points.rows());
  auto scale = [](double v, double lo, double hi, double len) {
    return hi > lo ? (v - lo) / (hi - lo) * len : len / 2;
  };
  const double x_lo = xs.minCoeff(), x_hi = xs.maxCoeff(), y_lo = ys.minCoeff(), y_hi = ys.maxCoeff();
  std::string s = svg_open(kWidth, kHeight, escape_xml(title));
  s += axes(fmt::format("{:.4g}", x_lo), fmt::format("{:.4g}", x_hi), fmt::format("{:.4g}", y_lo),
            fmt::format("{:.4g}", y_hi));
  const std::set<NodeId> marked(highlight.begin(), highlight.end());
  std::string front;  // highlighted points drawn last so they stay visible
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double cx = kLeft + scale(xs(i), x_lo, x_hi, kPlotW);
    const double cy = kTop + kPlotH - scale(ys(i), y_lo, y_hi, kPlotH);
    if (marked.contains(static_cast<NodeId>(i)))
      front += fmt::format("<circle class=\"highlight\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"4\" fill=\"red\"/>\n", cx, cy);
    else
      s += fmt::format("<circle class=\"point\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"3\" fill=\"steelblue\"/>\n", cx, cy);
  }
  return s + front + "</svg>\n";
}

}  // namespace ulens::report
