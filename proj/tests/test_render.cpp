// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fabscope/format.hpp"
#include "fabscope/render.hpp"
#include "support.hpp"

using namespace fabscope;
using testing::frontier;

namespace {

bool contains(const std::string& s, std::string_view needle) {
  return s.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(37.5) == "37.5");
  CHECK(format_number(174.0) == "174");
  CHECK(format_number(0.123456) == "0.1235");
  CHECK(format_number(-2.0) == "-2");
  for (double v : {0.1, 17.4, 2242079.0 / 10875.0, 1e-9, 123456789.125})
    CHECK(std::stod(format_exact(v)) == v);
}

TEST_CASE("route and matrix rendering") {
  CHECK(contains(render_route(widest_route(frontier(), 1, 7)), "1-0-6-7"));
  const auto m = all_pairs_matrix(frontier(), MatrixMetric::hops);
  const auto csv = render_matrix(m, OutputFormat::csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 64);
  CHECK(contains(csv, "0,7,2"));
  const auto table = render_matrix(m, OutputFormat::table);
  CHECK(table.starts_with("hops"));
  CHECK(parse_output_format("csv") == OutputFormat::csv);
  CHECK_FALSE(parse_output_format("xml"));
}

TEST_CASE("records render to canonical csv") {
  const auto recs = testing::fixture("paper/zero_copy.csv");
  CHECK(render_records(recs, OutputFormat::csv) == serialize_csv(recs));
  CHECK(contains(render_records(recs, OutputFormat::table), "stream_local"));
}

TEST_CASE("report and anomaly rendering") {
  const auto recs = testing::fixture("paper/p2p.csv");
  const auto rep = validate(recs, frontier(), testing::bundled_profile());
  const auto table = render_report(recs, rep, OutputFormat::table);
  CHECK(contains(table, "pass"));
  const auto anomalies = render_anomalies(recs, rep.anomalies, OutputFormat::table);
  CHECK(contains(anomalies, "sdma_capped"));
  CHECK(contains(anomalies, "fired"));
}

TEST_CASE("topology summary and neighbors") {
  const auto summary = render_topology_summary(frontier());
  CHECK(contains(summary, "8"));
  CHECK(contains(render_neighbors(frontier(), gcd(0)), "quad"));
}
