// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fabscope/topology.hpp"
#include "support.hpp"

using namespace fabscope;
using testing::expect_error;
using testing::frontier;
using nlohmann::json;

namespace {

json default_doc() {
  std::ifstream in(testing::source_path("data/frontier-node.json"));
  return json::parse(in);
}

std::string rule_of(const json& doc, ErrorCode code) {
  return expect_error([&] { Topology::load(doc.dump()); }, code).rule();
}

void erase_link(json& doc, int a, int b) {
  auto& links = doc["links"];
  for (auto it = links.begin(); it != links.end(); ++it) {
    if ((*it)["a"] == a && (*it)["b"] == b) {
      links.erase(it);
      return;
    }
  }
  FAIL("link not found");
}

std::set<std::pair<int, int>> pairs_of(const Topology& t, LinkTier tier) {
  std::set<std::pair<int, int>> out;
  for (const auto& l : t.links())
    if (l.tier == tier) out.insert(std::minmax(l.a.id, l.b.id));
  return out;
}

}  // namespace

TEST_CASE("tier table defaults and bidirectional doubling") {
  const TierTable tiers;
  CHECK(tiers.at(LinkTier::single) == 50.0);
  CHECK(tiers.at(LinkTier::dual) == 100.0);
  CHECK(tiers.at(LinkTier::quad) == 200.0);
  CHECK(tiers.at(LinkTier::cpu) == 36.0);
  for (auto tier : kAllTiers) CHECK(tiers.bandwidth(tier, Direction::bidir) == 2 * tiers.at(tier));
  CHECK(links_count(LinkTier::quad) == 4);
  CHECK(links_count(LinkTier::cpu) == 1);
  CHECK(parse_link_tier("dual") == LinkTier::dual);
  CHECK_FALSE(parse_link_tier("octo"));
}

TEST_CASE("bundled node shape") {
  const auto& t = frontier();
  CHECK(t.count(DeviceKind::gcd) == 8);
  CHECK(t.count(DeviceKind::numa) == 4);
  CHECK(pairs_of(t, LinkTier::quad) ==
        std::set<std::pair<int, int>>{{0, 1}, {2, 3}, {4, 5}, {6, 7}});
  CHECK(pairs_of(t, LinkTier::dual) == std::set<std::pair<int, int>>{{0, 6}, {2, 4}});
  CHECK(pairs_of(t, LinkTier::single) ==
        std::set<std::pair<int, int>>{{0, 2}, {1, 3}, {1, 5}, {3, 7}, {4, 6}, {5, 7}});
  CHECK(std::count_if(t.links().begin(), t.links().end(),
                      [](const Link& l) { return l.tier == LinkTier::cpu; }) == 8);
  CHECK(t.memory().hbm_gbps == 1600.0);
  CHECK(t.memory().cpu_mem_gbps == 204.8);
  CHECK(t.memory().cpu_mem_latency_ns == 96.0);

  for (int id : t.gcd_ids()) {
    int gcd_degree = 0;
    for (const auto& n : t.neighbors(gcd(id))) gcd_degree += n.device.kind == DeviceKind::gcd;
    CHECK(gcd_degree == 3);
  }
}

TEST_CASE("neighbors of GCD0 and GCD7") {
  const auto& t = frontier();
  const std::vector<Neighbor> n0{{gcd(1), LinkTier::quad},
                                 {gcd(2), LinkTier::single},
                                 {gcd(6), LinkTier::dual},
                                 {numa(t.device(gcd(0)).numa_domain), LinkTier::cpu}};
  CHECK(t.neighbors(gcd(0)) == n0);
  const std::vector<Neighbor> n7{{gcd(3), LinkTier::single},
                                 {gcd(5), LinkTier::single},
                                 {gcd(6), LinkTier::quad},
                                 {numa(t.device(gcd(7)).numa_domain), LinkTier::cpu}};
  CHECK(t.neighbors(gcd(7)) == n7);
  expect_error([&] { t.neighbors(gcd(8)); }, ErrorCode::unknown_device);
}

TEST_CASE("isolated device has no neighbors") {
  const auto t = Topology::build({{gcd(0), 0, 0}, {gcd(1), 0, 0}, {gcd(2), 1, 1}},
                                 {{gcd(0), gcd(1), LinkTier::quad}}, {}, {}, Checks::graph);
  CHECK(t.neighbors(gcd(2)).empty());
}

TEST_CASE("theoretical bandwidth") {
  const auto& t = frontier();
  CHECK(t.theoretical_bandwidth(gcd(0), gcd(1), Direction::bidir) == 400.0);
  CHECK(t.theoretical_bandwidth(gcd(0), gcd(6), Direction::unidir) == 100.0);
  CHECK(t.theoretical_bandwidth(gcd(0), gcd(2), Direction::unidir) == 50.0);
  CHECK_FALSE(t.theoretical_bandwidth(gcd(0), gcd(7), Direction::unidir));
  CHECK(t.theoretical_bandwidth(gcd(3), numa(t.device(gcd(3)).numa_domain), Direction::bidir) ==
        72.0);
  expect_error([&] { t.theoretical_bandwidth(gcd(0), gcd(0), Direction::unidir); },
               ErrorCode::invalid_argument);
  expect_error([&] { t.theoretical_bandwidth(gcd(0), gcd(42), Direction::unidir); },
               ErrorCode::unknown_device);

  std::vector<DeviceRef> all;
  for (const auto& d : t.devices()) all.push_back(d.ref);
  for (auto a : all)
    for (auto b : all) {
      if (a == b) continue;
      for (auto dir : {Direction::unidir, Direction::bidir})
        CHECK(t.theoretical_bandwidth(a, b, dir) == t.theoretical_bandwidth(b, a, dir));
    }
}

TEST_CASE("numa mapping is a bijection over physical GPUs") {
  const auto& t = frontier();
  std::set<int> domains;
  for (int gpu = 0; gpu < 4; ++gpu) {
    const auto& a = t.device(gcd(2 * gpu));
    const auto& b = t.device(gcd(2 * gpu + 1));
    CHECK(a.physical_gpu == b.physical_gpu);
    CHECK(a.numa_domain == b.numa_domain);
    domains.insert(a.numa_domain);
  }
  CHECK(domains == std::set<int>{0, 1, 2, 3});
}

TEST_CASE("to_json round trip") {
  const auto& t = frontier();
  const auto again = Topology::load(t.to_json());
  CHECK(again.to_json() == t.to_json());
  CHECK(again.links().size() == t.links().size());
}

TEST_CASE("invariant violations name their rule") {
  {
    auto doc = default_doc();
    erase_link(doc, 2, 3);
    CHECK(rule_of(doc, ErrorCode::invariant) == "missing sibling link");
  }
  {
    auto doc = default_doc();
    doc["links"].push_back({{"a", 1}, {"b", 1}, {"tier", "single"}});
    CHECK(rule_of(doc, ErrorCode::invariant) == "self link");
  }
  {
    auto doc = default_doc();
    doc["links"].push_back({{"a", 1}, {"b", 0}, {"tier", "single"}});
    CHECK(rule_of(doc, ErrorCode::invariant) == "duplicate link");
  }
  {
    auto doc = default_doc();
    doc["links"].push_back({{"a", 0}, {"b", 9}, {"tier", "single"}});
    CHECK(rule_of(doc, ErrorCode::invariant) == "unknown device");
  }
  {
    auto doc = default_doc();
    doc["links"].push_back({{"a", 0}, {"b", 3}, {"tier", "cpu"}});
    CHECK(rule_of(doc, ErrorCode::invariant) == "cpu link endpoints");
  }
  {
    auto doc = default_doc();
    doc["links"].push_back({{"a", 0}, {"b", "numa:1"}, {"tier", "single"}});
    CHECK(rule_of(doc, ErrorCode::invariant) == "gcd link endpoints");
  }
  {
    auto doc = default_doc();
    doc["tiers"]["dual"] = 0;
    CHECK(rule_of(doc, ErrorCode::invariant) == "non-positive bandwidth");
  }
  {
    auto doc = default_doc();
    for (auto& d : doc["devices"])
      if (d["kind"] == "gcd" && d["id"] == 7) d["physical_gpu"] = 2;
    CHECK(rule_of(doc, ErrorCode::invariant) == "sibling count");
  }
  {
    auto doc = default_doc();
    for (auto& d : doc["devices"])
      if (d["kind"] == "gcd" && (d["id"] == 0 || d["id"] == 1)) d["numa_domain"] = 2;
    CHECK(rule_of(doc, ErrorCode::invariant) == "numa mapping");
  }
  {
    auto doc = default_doc();
    for (auto& l : doc["links"])
      if (l["a"] == 2 && l["b"] == 4) l["tier"] = "quad";
    CHECK(rule_of(doc, ErrorCode::invariant) == "quad link count");
  }
}

TEST_CASE("disconnected gcd graph is rejected") {
  std::vector<Device> devs;
  std::vector<Link> links;
  for (int g = 0; g < 2; ++g) {
    devs.push_back({gcd(2 * g), g, g});
    devs.push_back({gcd(2 * g + 1), g, g});
    devs.push_back({numa(g), -1, -1});
    links.push_back({gcd(2 * g), gcd(2 * g + 1), LinkTier::quad});
    links.push_back({gcd(2 * g), numa(g), LinkTier::cpu});
    links.push_back({gcd(2 * g + 1), numa(g), LinkTier::cpu});
  }
  const auto e = expect_error([&] { Topology::build(devs, links); }, ErrorCode::invariant);
  CHECK(e.rule() == "gcd graph disconnected");
  links.push_back({gcd(1), gcd(2), LinkTier::single});
  CHECK(Topology::build(devs, links).count(DeviceKind::gcd) == 4);
}

TEST_CASE("schema violations name their rule") {
  CHECK(expect_error([] { Topology::load("{not json"); }, ErrorCode::schema).rule() ==
        "json syntax");
  {
    auto doc = default_doc();
    doc.erase("links");
    CHECK(rule_of(doc, ErrorCode::schema) == "missing field");
  }
  {
    auto doc = default_doc();
    doc["links"][0]["tier"] = "octo";
    CHECK(rule_of(doc, ErrorCode::schema) == "unknown tier");
  }
  {
    auto doc = default_doc();
    doc["devices"][0]["kind"] = "fpga";
    CHECK(rule_of(doc, ErrorCode::schema) == "unknown device kind");
  }
  {
    auto doc = default_doc();
    doc["links"][0]["a"] = "pci:0";
    CHECK(rule_of(doc, ErrorCode::schema) == "link endpoint");
  }
  {
    auto doc = default_doc();
    doc["memory"]["hbm_gbps"] = "fast";
    CHECK(rule_of(doc, ErrorCode::schema) == "field type");
  }
  expect_error([] { Topology::load_file("/nonexistent/topology.json"); }, ErrorCode::io);
}
