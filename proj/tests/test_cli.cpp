#include <doctest.h>

#include <nlohmann/json.hpp>

#include "pipeline.hpp"

using pipeline::cli;
using pipeline::fresh_dir;

namespace {

nlohmann::json last_error(const pipeline::Run& r) {
  const auto end = r.err.find_last_not_of('\n');
  const auto start = r.err.rfind('\n', end);
  return nlohmann::json::parse(r.err.substr(start == std::string::npos ? 0 : start + 1, end + 1));
}

}  // namespace

TEST_CASE("end-to-end outputs match the verified expectations") {
  const auto out = fresh_dir("e2e");
  REQUIRE(pipeline::run_e2e(out) == 0);
  const auto expected = pipeline::kFixtures + "/e2e/expected/";
  for (const auto* file : {"diff/changed.csv", "diff/comparison.csv", "score/summary.json"}) {
    CAPTURE(file);
    const auto name = std::filesystem::path(file).filename().string();
    CHECK(ulens::io::read_text((out / file).string()) == ulens::io::read_text(expected + name));
  }
  for (const auto* file : {"metrics/closeness_histogram.svg", "score/pca.svg", "diff/stats.json"}) {
    CAPTURE(file);
    CHECK(std::filesystem::exists(out / file));
  }
}

TEST_CASE("reruns are byte-identical") {
  const auto a = fresh_dir("rerun_a"), b = fresh_dir("rerun_b");
  REQUIRE(pipeline::run_e2e(a) == 0);
  REQUIRE(pipeline::run_e2e(b) == 0);
  const auto sa = pipeline::snapshot(a), sb = pipeline::snapshot(b);
  CHECK(sa.size() > 15);
  CHECK(sa == sb);
}

TEST_CASE("training reruns are byte-identical") {
  const auto a = fresh_dir("train_a"), b = fresh_dir("train_b");
  const auto graph = pipeline::kFixtures + "/pysrc_expected.jsonl";
  REQUIRE(cli({"score", graph, "--train", "--epochs", "5", "--out", a.string()}).exit_code == 0);
  REQUIRE(cli({"score", graph, "--train", "--epochs", "5", "--out", b.string()}).exit_code == 0);
  CHECK(pipeline::snapshot(a) == pipeline::snapshot(b));
}

TEST_CASE("empty source tree") {
  const auto src = fresh_dir("empty_src"), out = fresh_dir("empty_out");
  REQUIRE(cli({"extract", src.string(), "--out", (out / "x").string()}).exit_code == 0);
  CHECK(ulens::io::read_text((out / "x/graph.jsonl").string()) == "{\"schema\":\"upgrade-lens/1\"}\n");
  CHECK(cli({"metrics", (out / "x/graph.jsonl").string(), "--out", (out / "m").string()}).exit_code == 0);
}

TEST_CASE("singleton graph scores 0.5") {
  const auto dir = fresh_dir("single");
  ulens::io::write_text((dir / "g.jsonl").string(),
                        "{\"schema\":\"upgrade-lens/1\"}\n{\"kind\":\"fn\",\"path\":\"a.py\",\"name\":\"f\"}\n");
  REQUIRE(cli({"score", (dir / "g.jsonl").string(), "--out", (dir / "s").string()}).exit_code == 0);
  const auto summary = nlohmann::json::parse(ulens::io::read_text((dir / "s/summary.json").string()));
  CHECK(summary["AGS"] == 0.5);
  CHECK(summary["NC"] == 0);
}

TEST_CASE("exit codes and error records") {
  const auto dir = fresh_dir("codes");
  const auto graph = pipeline::kFixtures + "/pysrc_expected.jsonl";

  SUBCASE("usage errors") {
    const auto r = cli({"metrics"});
    CHECK(r.exit_code == 2);
    CHECK(last_error(r)["error"] == "usage");
    CHECK(cli({"frobnicate"}).exit_code == 2);
  }
  SUBCASE("malformed input") {
    ulens::io::write_text((dir / "bad.jsonl").string(), "{\"schema\":\"upgrade-lens/1\"}\n{not json\n");
    const auto r = cli({"metrics", (dir / "bad.jsonl").string(), "--out", (dir / "m").string()});
    CHECK(r.exit_code == 2);
    const auto e = last_error(r);
    CHECK(e["error"] == "parse");
    CHECK(e["line"] == 2);
  }
  SUBCASE("dangling edge") {
    ulens::io::write_text((dir / "dangling.jsonl").string(),
                          "{\"schema\":\"upgrade-lens/1\"}\n"
                          "{\"kind\":\"call\",\"from\":[\"a.py\",\"f\"],\"to\":[\"a.py\",\"g\"],\"count\":1}\n");
    const auto r = cli({"metrics", (dir / "dangling.jsonl").string(), "--out", (dir / "m").string()});
    CHECK(r.exit_code == 2);
    CHECK(last_error(r)["error"] == "integrity");
  }
  SUBCASE("diagnostic naming an unknown function") {
    const auto e2e = pipeline::kFixtures + "/e2e/";
    REQUIRE(cli({"extract", e2e + "v1", "--out", (dir / "v1").string()}).exit_code == 0);
    REQUIRE(cli({"extract", e2e + "v2", "--out", (dir / "v2").string()}).exit_code == 0);
    ulens::io::write_text((dir / "diag.csv").string(), "app/core.py,no_such_function,boom\n");
    const auto r = cli({"diff", "--base", (dir / "v1/graph.jsonl").string(), "--upgraded",
                        (dir / "v2/graph.jsonl").string(), "--base-digests", (dir / "v1/digests.csv").string(),
                        "--upgraded-digests", (dir / "v2/digests.csv").string(), "--diagnostics",
                        (dir / "diag.csv").string(), "--out", (dir / "d").string()});
    CHECK(r.exit_code == 3);
    CHECK(last_error(r)["error"] == "domain");
  }
  SUBCASE("bad option values") {
    CHECK(cli({"metrics", graph, "--bins", "0", "--out", (dir / "m").string()}).exit_code == 3);
    CHECK(cli({"score", graph, "--weights", "1,-1,1", "--out", (dir / "s").string()}).exit_code == 3);
    CHECK(cli({"score", graph, "--closeness-mode", "sideways", "--out", (dir / "s").string()}).exit_code == 3);
    CHECK(cli({"scan", pipeline::kFixtures + "/sbom/bom.cdx.json", "--out", (dir / "p").string()}).exit_code == 3);
  }
  SUBCASE("unreachable OSV endpoint") {
    const auto r = cli({"scan", pipeline::kFixtures + "/sbom/bom.cdx.json", "--transport", "live", "--out",
                        (dir / "p").string()},
                       "UPGRADE_LENS_OSV_URL=http://127.0.0.1:9");
    CHECK(r.exit_code == 4);
    CHECK(last_error(r)["error"] == "transport");
  }
}

TEST_CASE("fixture scan through the CLI") {
  const auto dir = fresh_dir("scan");
  REQUIRE(cli({"scan", pipeline::kFixtures + "/sbom/bom.cdx.json", "--transport", "fixture", "--fixtures",
               pipeline::kFixtures + "/sbom/osv", "--out", dir.string()})
              .exit_code == 0);
  CHECK(ulens::io::read_text((dir / "plans.csv").string()) ==
        ulens::io::read_text(pipeline::kFixtures + "/sbom/expected_plans.csv"));
}
