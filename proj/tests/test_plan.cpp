// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>
#include <json.hpp>

#include <set>

#include "fabscope/plan.hpp"
#include "support.hpp"

using namespace fabscope;
using testing::frontier;

namespace {

std::size_t count_bench(const BenchmarkPlan& p, std::string_view name) {
  return static_cast<std::size_t>(std::count_if(p.cases.begin(), p.cases.end(),
                                                [&](const PlanCase& c) { return c.benchmark == name; }));
}

}  // namespace

TEST_CASE("size sweep") {
  CHECK(size_sweep(256, 2048) == std::vector<std::uint64_t>{256, 512, 1024, 2048});
  CHECK(size_sweep(4096, 4096) == std::vector<std::uint64_t>{4096});
  CHECK(size_sweep(256, 8ull << 30).size() == 26);
}

TEST_CASE("p2p suite covers every unordered pair with SDMA on and off") {
  const auto plan = emit_plan(Suite::p2p, frontier());
  std::set<std::tuple<int, int, bool>> bw;
  std::set<std::pair<int, int>> lat;
  for (const auto& c : plan.cases) {
    if (c.benchmark != "p2p" || c.tool != "p2pBandwidthLatencyTest") continue;
    if (c.metric == Metric::latency_us) {
      lat.insert({c.src.id, c.dst.id});
      CHECK(c.sizes == std::vector<std::uint64_t>{16});
    } else {
      bw.insert({c.src.id, c.dst.id, c.sdma});
      CHECK(c.env.at("HSA_ENABLE_PEER_SDMA") == (c.sdma ? "1" : "0"));
      CHECK(c.sizes.front() == 256);
      CHECK(c.sizes.back() == 8ull << 30);
    }
  }
  CHECK(bw.size() == 56);
  CHECK(lat.size() == 28);
  CHECK(count_bench(plan, "p2p_stream") == 3);
  CHECK(count_bench(plan, "stream_local") == 1);
  CHECK(plan.cases.size() == 94);
  for (const auto& c : plan.cases) CHECK(c.repetitions == kDefaultRepetitions);
}

TEST_CASE("cpu_gpu suite") {
  const auto plan = emit_plan(Suite::cpu_gpu, frontier());
  CHECK(plan.cases.size() == 40);
  for (const auto& c : plan.cases) {
    CHECK_FALSE(c.src.is_gcd());
    REQUIRE(c.numa_domain);
    CHECK(*c.numa_domain == frontier().device(gcd(c.dst.id)).numa_domain);
    REQUIRE(c.alloc);
    // Every emitted combination must be a valid row of the movement table.
    CHECK_NOTHROW(resolve_movement(*c.alloc, c.xnack, c.api));
  }
  for (const auto& c : plan.cases)
    if (c.benchmark == "h2d_managed_migration") CHECK(c.env.at("HSA_XNACK") == "1");
}

TEST_CASE("mpi_p2p suite") {
  const auto plan = emit_plan(Suite::mpi_p2p, frontier());
  CHECK(plan.cases.size() == 21);
  CHECK(count_bench(plan, "mpi_p2p") == 14);
  for (const auto& c : plan.cases)
    if (c.benchmark == "mpi_p2p") CHECK(c.env.at("HSA_ENABLE_SDMA") == (c.sdma ? "1" : "0"));
}

TEST_CASE("collectives suite") {
  const auto plan = emit_plan(Suite::collectives, frontier());
  CHECK(plan.cases.size() == 70);
  for (const auto& c : plan.cases) {
    REQUIRE(c.collective);
    CHECK(c.benchmark == c.backend + "_" + std::string(to_string(*c.collective)));
    CHECK(parse_collective_benchmark(c.benchmark));
    CHECK(c.gcds.size() >= 2);
  }
}

TEST_CASE("multi-GPU stream suite placements") {
  const auto plan = emit_plan(Suite::multi_gpu_stream, frontier());
  std::vector<std::pair<std::string, std::vector<int>>> got;
  for (const auto& c : plan.cases) {
    got.emplace_back(c.placement, c.gcds);
    CHECK(c.env.at("HIP_VISIBLE_DEVICES").size() == 2 * c.gcds.size() - 1);
  }
  const std::vector<std::pair<std::string, std::vector<int>>> want{
      {"single", {0}},
      {"spread", {0, 2}},
      {"same_gpu", {0, 1}},
      {"spread", {0, 2, 4, 6}},
      {"spread", {0, 1, 2, 3, 4, 5, 6, 7}}};
  CHECK(got == want);
}

TEST_CASE("plan json") {
  const auto plan = emit_plan(Suite::multi_gpu_stream, frontier());
  const auto doc = nlohmann::json::parse(plan.to_json());
  CHECK(doc.at("suite") == "multi_gpu_stream");
  REQUIRE(doc.at("cases").size() == plan.cases.size());
  const auto& first = doc.at("cases").at(0);
  CHECK(first.at("benchmark") == "multi_stream");
  CHECK(first.at("tool") == "stream");
  CHECK(first.at("src") == "host");
  CHECK(first.at("sizes").at(0) == 8000000000ull);
  CHECK(first.at("env").at("HIP_VISIBLE_DEVICES") == "0");
  CHECK(parse_suite("collectives") == Suite::collectives);
  CHECK_FALSE(parse_suite("all"));
}
