#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "bcc/io.hpp"
#include "bcc/simulation.hpp"

using namespace bcc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("bcc_test_" + tag + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("csv parsing") {
  SECTION("quoted fields with delimiters, quotes, and newlines") {
    const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n\"f\ng\",h,i\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "d\"e"});
    CHECK(rows[1] == std::vector<std::string>{"f\ng", "h", "i"});
  }

  SECTION("unterminated quotes are an error") {
    CHECK_THROWS_AS(parse_csv("a,\"b\nc,d"), DataError);
  }

  SECTION("escape round-trip") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("with,comma") == "\"with,comma\"");
    CHECK(csv_escape("with\"quote") == "\"with\"\"quote\"");
    const auto parsed = parse_csv(csv_escape("a,\"b\nc") + "\n");
    CHECK(parsed[0][0] == "a,\"b\nc");
  }
}

TEST_CASE("ingestion") {
  TempDir dir("ingest");

  SECTION("objects align on the first file's ID order") {
    write_text(dir.file("one.csv"), "id,x\nb,1\na,2\nc,3\n");
    write_text(dir.file("two.csv"), "id,y\nc,30\nb,10\na,20\n");
    const auto data = ingest({{dir.file("one.csv")}, {dir.file("two.csv")}});
    CHECK(data.ids == std::vector<std::string>{"b", "a", "c"});
    CHECK(data.sources[0].values(0, 0) == 1.0);
    CHECK(data.sources[1].values(0, 0) == 10.0);
    CHECK(data.sources[1].values(2, 0) == 30.0);
  }

  SECTION("alignment keeps only the shared IDs") {
    write_text(dir.file("one.csv"), "id,x\na,1\nb,2\nc,3\n");
    write_text(dir.file("two.csv"), "id,y\nb,20\nc,30\nd,40\n");
    const auto data = ingest({{dir.file("one.csv")}, {dir.file("two.csv")}});
    CHECK(data.ids == std::vector<std::string>{"b", "c"});
  }

  SECTION("an empty intersection reports per-file counts") {
    write_text(dir.file("one.csv"), "id,x\na,1\nb,2\n");
    write_text(dir.file("two.csv"), "id,y\nc,1\nd,2\ne,3\n");
    CHECK_THROWS_MATCHES(
        ingest({{dir.file("one.csv")}, {dir.file("two.csv")}}), DataError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("=2") &&
                                        Catch::Matchers::ContainsSubstring("=3")));
  }

  SECTION("non-numeric cells carry coordinates") {
    write_text(dir.file("bad.csv"), "id,x,y\na,1,2\nb,NaN,4\n");
    CHECK_THROWS_MATCHES(
        ingest({{dir.file("bad.csv")}}), DataError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("row 3") &&
                                        Catch::Matchers::ContainsSubstring("column 2")));
  }

  SECTION("duplicate IDs are named") {
    write_text(dir.file("dup.csv"), "id,x\na,1\nb,2\na,3\n");
    CHECK_THROWS_MATCHES(ingest({{dir.file("dup.csv")}}), DataError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("'a'")));
  }

  SECTION("standardization centers and scales after alignment") {
    write_text(dir.file("one.csv"), "id,x\na,2\nb,4\nc,6\n");
    SourceSpec spec{dir.file("one.csv")};
    spec.standardize = true;
    const auto data = ingest({spec});
    CHECK(column_mean(data.sources[0].values, 0) == Catch::Approx(0.0).margin(1e-14));
    CHECK(column_variance(data.sources[0].values, 0) == Catch::Approx(1.0).epsilon(1e-12));
  }

  SECTION("transposed files read objects from the header") {
    write_text(dir.file("t.csv"), "feature,a,b,c\nf1,1,2,3\nf2,4,5,6\n");
    SourceSpec spec{dir.file("t.csv")};
    spec.transpose = true;
    const auto data = ingest({spec});
    CHECK(data.ids == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(data.sources[0].values.cols() == 2);
    CHECK(data.sources[0].values(1, 0) == 2.0);
    CHECK(data.sources[0].values(2, 1) == 6.0);
  }

  SECTION("a dataset round-trips through its own serialization") {
    Rng rng(179);
    auto [data, truth] = generate_two_cluster_data(0.8, 2, 10, 1.5, rng);
    write_source_csv(dir.file("s1.csv"), data, 0);
    write_source_csv(dir.file("s2.csv"), data, 1);
    const auto again = ingest({{dir.file("s1.csv")}, {dir.file("s2.csv")}});
    CHECK(again.ids == data.ids);
    for (int m = 0; m < 2; ++m)
      CHECK(again.sources[m].values == data.sources[m].values);
  }
}

TEST_CASE("fit outputs") {
  TempDir dir("outputs");
  Rng rng(181);
  auto [data, truth] = generate_two_cluster_data(0.85, 2, 12, 2.0, rng);
  ChainConfig config;
  config.iterations = 40;
  config.burn_in = 10;
  config.seed = 191;
  config.model = {12, 2, 2, false};
  const auto draws = run_chain(data, config);
  const auto result = summarize_clusterings(draws);
  RunManifest manifest;
  manifest.subcommand = "fit";
  manifest.output_directory = dir.path.string();
  write_outputs(draws, result, manifest, data.ids, dir.path.string(), true);

  SECTION("clusters.csv has one row per object and one column per clustering") {
    const auto table = read_csv(dir.file("clusters.csv"));
    CHECK(table.header == std::vector<std::string>{"id", "C", "L1", "L2"});
    CHECK(table.rows.size() == 12);
    for (const auto& row : table.rows) REQUIRE(row.size() == 4);
  }

  SECTION("trace files cover every sweep") {
    const auto alpha = read_csv(dir.file("trace_alpha.csv"));
    CHECK(alpha.header.size() == 3);  // iteration + one per source
    CHECK(alpha.rows.size() == 40);
    const auto pi = read_csv(dir.file("trace_pi.csv"));
    CHECK(pi.header.size() == 3);  // iteration + one per cluster
    CHECK(pi.rows.size() == 40);
  }

  SECTION("summary floats round-trip exactly") {
    nlohmann::json summary;
    std::ifstream in(dir.file("summary.json"));
    in >> summary;
    const double alpha0 = summary["alpha_posterior_mean"][0].get<double>();
    double expected = 0.0;
    for (int it = 10; it < 40; ++it) expected += draws.alpha_trace(it, 0);
    expected /= 30.0;
    CHECK(alpha0 == expected);  // exact, not approximate
  }

  SECTION("coincidence matrix is square with unit diagonal") {
    const auto table = read_csv(dir.file("coincidence_C.csv"));
    CHECK(table.header.size() == 13);
    CHECK(table.rows.size() == 12);
    for (int i = 0; i < 12; ++i) CHECK(table.rows[i][i + 1] == "1");
  }

  SECTION("manifest records the run") {
    nlohmann::json manifest_json;
    std::ifstream in(dir.file("manifest.json"));
    in >> manifest_json;
    CHECK(manifest_json["subcommand"] == "fit");
    CHECK(manifest_json["schema_version"] == "1");
  }
}

TEST_CASE("17-digit doubles round-trip") {
  Rng rng(193);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.uniform01() - 0.5) * std::pow(10.0, int(rng.uniform01() * 20) - 10);
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
}
