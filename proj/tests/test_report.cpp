#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include "upgrade_lens/report.hpp"

using namespace ulens;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

std::vector<double> bar_heights(const std::string& svg) {
  static const std::regex bar(R"re(<rect class="bar"[^>]* height="([0-9.]+)")re");
  std::vector<double> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), bar), end; it != end; ++it)
    out.push_back(std::stod((*it)[1]));
  return out;
}

}  // namespace

TEST_CASE("histogram svg has one bar per bin") {
  const std::vector<double> v{0.1, 0.2, 0.9};
  const auto svg = report::render_histogram_svg(closeness_histogram(v, 2), "t");
  CHECK(bar_heights(svg).size() == 2);
  CHECK(svg.starts_with("<svg"));
}

TEST_CASE("bar heights are proportional to counts") {
  std::vector<double> v;
  for (int i = 0; i < 500; ++i) v.push_back(std::sqrt(i / 499.0));
  const auto h = closeness_histogram(v, 50);
  const auto heights = bar_heights(report::render_histogram_svg(h, "t"));
  REQUIRE(heights.size() == 50);
  const auto peak = *std::max_element(h.counts.begin(), h.counts.end());
  const double tallest = *std::max_element(heights.begin(), heights.end());
  for (std::size_t i = 0; i < 50; ++i)
    CHECK(heights[i] == doctest::Approx(tallest * h.counts[i] / peak).epsilon(1e-3));
}

TEST_CASE("empty histogram renders a placeholder") {
  const auto svg = report::render_histogram_svg(Histogram{}, "t");
  CHECK(bar_heights(svg).empty());
  CHECK(svg.find("no data") != std::string::npos);
}

TEST_CASE("scatter highlights") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 1, 2, 0, 3, 3;
  const std::vector<NodeId> hi{2};
  const auto svg = report::render_scatter_svg(pts, hi, "p");
  CHECK(count(svg, "class=\"highlight\"") == 1);
  CHECK(count(svg, "class=\"point\"") == 3);
}

TEST_CASE("csv quoting and exact numbers") {
  report::TextTable t{{"a", "b"}, {{"x,y", "plain"}, {"say \"hi\"", ""}}};
  CHECK(report::render_csv(t) == "a,b\n\"x,y\",plain\n\"say \"\"hi\"\"\",\n");
  CHECK(report::exact(0.1) == "0.1");
  CHECK(std::stod(report::exact(1.0 / 3)) == 1.0 / 3);
}
