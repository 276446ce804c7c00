// SPDX-License-Identifier: Apache-2.0
#include "fabscope/plan.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "fabscope/error.hpp"

namespace fabscope {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::uint64_t KiB = 1024;
constexpr std::uint64_t MiB = 1024 * KiB;
constexpr std::uint64_t GiB = 1024 * MiB;
constexpr std::uint64_t kStreamBufferBytes = 8'000'000'000ull;  // 8 GB per buffer
constexpr std::uint64_t kLatencyProbeBytes = 16;

std::string join_ids(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

// GCDs grouped by physical GPU, both levels in ascending order.
std::vector<std::vector<int>> gcds_by_gpu(const Topology& t) {
  std::map<int, std::vector<int>> groups;
  for (int id : t.gcd_ids()) groups[t.device(gcd(id)).physical_gpu].push_back(id);
  std::vector<std::vector<int>> out;
  for (auto& [gpu, ids] : groups) out.push_back(std::move(ids));
  return out;
}

void cpu_gpu_cases(const Topology& t, std::vector<PlanCase>& cases) {
  const auto sweep = size_sweep(4 * KiB, 1 * GiB);
  struct Row {
    std::string_view benchmark;
    std::string_view tool;
    AllocKind alloc;
    Api api;
    std::optional<bool> xnack;
  };
  const Row rows[] = {
      {bench::h2d_pageable, "comm_scope", AllocKind::pageable, Api::explicit_copy, std::nullopt},
      {bench::h2d_pinned, "comm_scope", AllocKind::pinned_noncoherent, Api::explicit_copy,
       std::nullopt},
      {bench::h2d_managed_zero_copy, "comm_scope", AllocKind::managed, Api::zero_copy_kernel,
       false},
      {bench::h2d_managed_migration, "comm_scope", AllocKind::managed, Api::page_migration,
       true},
      {bench::h2d_pinned_zero_copy, "stream", AllocKind::pinned_coherent, Api::zero_copy_kernel,
       std::nullopt},
  };
  for (int id : t.gcd_ids()) {
    for (const auto& row : rows) {
      PlanCase c;
      c.benchmark = std::string(row.benchmark);
      c.tool = std::string(row.tool);
      c.src = Placement::host();
      c.dst = Placement::on_gcd(id);
      c.alloc = row.alloc;
      c.api = row.api;
      c.sdma = row.api == Api::explicit_copy;
      c.xnack = row.xnack.value_or(false);
      if (row.xnack) c.env["HSA_XNACK"] = *row.xnack ? "1" : "0";
      c.sizes = sweep;
      c.numa_domain = t.device(gcd(id)).numa_domain;
      cases.push_back(std::move(c));
    }
  }
}

void p2p_cases(const Topology& t, std::vector<PlanCase>& cases) {
  const auto ids = t.gcd_ids();
  const auto sweep = size_sweep(256, 8 * GiB);
  auto peer = [](int a, int b) {
    PlanCase c;
    c.src = Placement::on_gcd(a);
    c.dst = Placement::on_gcd(b);
    c.alloc = AllocKind::device;
    return c;
  };

  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      for (bool sdma : {true, false}) {
        auto c = peer(ids[i], ids[j]);
        c.benchmark = std::string(bench::p2p);
        c.tool = "p2pBandwidthLatencyTest";
        c.api = Api::explicit_copy;
        c.sdma = sdma;
        c.env["HSA_ENABLE_PEER_SDMA"] = sdma ? "1" : "0";
        c.sizes = sweep;
        cases.push_back(std::move(c));
      }
      auto lat = peer(ids[i], ids[j]);
      lat.benchmark = std::string(bench::p2p);
      lat.tool = "p2pBandwidthLatencyTest";
      lat.api = Api::explicit_copy;
      lat.metric = Metric::latency_us;
      lat.sizes = {kLatencyProbeBytes};
      lat.env["HSA_ENABLE_PEER_SDMA"] = "1";
      cases.push_back(std::move(lat));
    }
  }
  if (ids.empty()) return;

  // Per-link-tier sweeps and kernel access from the first GCD to its peers.
  const int origin = ids.front();
  for (const auto& n : t.neighbors(gcd(origin))) {
    if (n.device.kind != DeviceKind::gcd) continue;
    for (bool sdma : {true, false}) {
      auto c = peer(origin, n.device.id);
      c.benchmark = std::string(bench::p2p);
      c.tool = "comm_scope";
      c.api = Api::explicit_copy;
      c.sdma = sdma;
      c.env["HSA_ENABLE_PEER_SDMA"] = sdma ? "1" : "0";
      c.sizes = sweep;
      cases.push_back(std::move(c));
    }
    auto k = peer(origin, n.device.id);
    k.benchmark = std::string(bench::p2p_stream);
    k.tool = "stream";
    k.api = Api::zero_copy_kernel;
    k.sdma = false;
    k.metric = Metric::bandwidth_bidir_gbps;
    k.sizes = size_sweep(1 * MiB, 8 * GiB);
    cases.push_back(std::move(k));
  }
  auto local = peer(origin, origin);
  local.benchmark = std::string(bench::stream_local);
  local.tool = "stream";
  local.api = std::nullopt;
  local.sdma = false;
  local.metric = Metric::bandwidth_bidir_gbps;
  local.sizes = size_sweep(1 * MiB, 8 * GiB);
  cases.push_back(std::move(local));
}

void mpi_p2p_cases(const Topology& t, std::vector<PlanCase>& cases) {
  const auto ids = t.gcd_ids();
  if (ids.empty()) return;
  const int origin = ids.front();
  for (int other : ids) {
    if (other == origin) continue;
    for (bool sdma : {true, false}) {
      PlanCase c;
      c.benchmark = std::string(bench::mpi_p2p);
      c.tool = "osu_bw";
      c.src = Placement::on_gcd(origin);
      c.dst = Placement::on_gcd(other);
      c.alloc = AllocKind::device;
      c.api = Api::mpi_p2p;
      c.sdma = sdma;
      c.env["HSA_ENABLE_SDMA"] = sdma ? "1" : "0";
      c.env["MPICH_GPU_SUPPORT_ENABLED"] = "1";
      c.sizes = {1 * GiB};
      cases.push_back(std::move(c));
    }
    PlanCase direct;
    direct.benchmark = std::string(bench::p2p_stream);
    direct.tool = "stream";
    direct.src = Placement::on_gcd(origin);
    direct.dst = Placement::on_gcd(other);
    direct.alloc = AllocKind::device;
    direct.api = Api::zero_copy_kernel;
    direct.sdma = false;
    direct.sizes = {1 * GiB};
    cases.push_back(std::move(direct));
  }
}

void collective_cases(const Topology& t, std::vector<PlanCase>& cases) {
  const auto ids = t.gcd_ids();
  for (std::string_view backend : {"mpi", "rccl"}) {
    for (auto op : kAllCollectives) {
      for (std::size_t n = 2; n <= ids.size(); ++n) {
        PlanCase c;
        c.backend = std::string(backend);
        c.benchmark = c.backend + "_" + std::string(to_string(op));
        c.tool = backend == "mpi" ? "osu_collectives" : "rccl-tests";
        c.collective = op;
        c.gcds.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));
        c.src = Placement::on_gcd(c.gcds.front());
        c.dst = Placement::on_gcd(c.gcds.back());
        c.alloc = AllocKind::device;
        c.sdma = true;
        c.metric = Metric::latency_us;
        c.sizes = {1 * MiB};
        c.env["HIP_VISIBLE_DEVICES"] = join_ids(c.gcds);
        if (backend == "mpi") c.env["MPICH_GPU_SUPPORT_ENABLED"] = "1";
        cases.push_back(std::move(c));
      }
    }
  }
}

void multi_stream_cases(const Topology& t, std::vector<PlanCase>& cases) {
  const auto gpus = gcds_by_gpu(t);
  if (gpus.empty()) return;
  auto make = [&](std::vector<int> ids, std::string placement) {
    PlanCase c;
    c.benchmark = std::string(bench::multi_stream);
    c.tool = "stream";
    c.src = Placement::host();
    c.dst = Placement::on_gcd(ids.front());
    c.alloc = AllocKind::pinned_coherent;
    c.api = Api::zero_copy_kernel;
    c.sdma = false;
    c.metric = Metric::bandwidth_bidir_gbps;
    c.sizes = {kStreamBufferBytes};
    c.env["HIP_VISIBLE_DEVICES"] = join_ids(ids);
    c.gcds = std::move(ids);
    c.placement = std::move(placement);
    cases.push_back(std::move(c));
  };
  // Spread: one GCD per physical GPU first, then the siblings.
  std::vector<int> spread_order;
  for (const auto& g : gpus) spread_order.push_back(g.front());
  for (const auto& g : gpus)
    for (std::size_t i = 1; i < g.size(); ++i) spread_order.push_back(g[i]);

  const std::size_t total = spread_order.size();
  for (std::size_t n = 1; n <= total; n *= 2) {
    std::vector<int> ids(spread_order.begin(), spread_order.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(ids.begin(), ids.end());
    make(ids, n == 1 ? "single" : "spread");
    if (n == 2 && gpus.front().size() >= 2)
      make({gpus.front()[0], gpus.front()[1]}, "same_gpu");
  }
}

ojson placement_json(Placement p) {
  return p.is_gcd() ? ojson("gcd:" + std::to_string(p.id)) : ojson("host");
}

}  // namespace

std::string_view to_string(Suite suite) {
  switch (suite) {
    case Suite::cpu_gpu: return "cpu_gpu";
    case Suite::p2p: return "p2p";
    case Suite::mpi_p2p: return "mpi_p2p";
    case Suite::collectives: return "collectives";
    case Suite::multi_gpu_stream: return "multi_gpu_stream";
  }
  return "?";
}

std::optional<Suite> parse_suite(std::string_view name) {
  for (auto s : {Suite::cpu_gpu, Suite::p2p, Suite::mpi_p2p, Suite::collectives,
                 Suite::multi_gpu_stream})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::vector<std::uint64_t> size_sweep(std::uint64_t from, std::uint64_t to) {
  std::vector<std::uint64_t> out;
  for (auto s = from; s <= to && s != 0; s *= 2) out.push_back(s);
  return out;
}

BenchmarkPlan emit_plan(Suite suite, const Topology& t) {
  BenchmarkPlan plan;
  plan.suite = suite;
  switch (suite) {
    case Suite::cpu_gpu: cpu_gpu_cases(t, plan.cases); break;
    case Suite::p2p: p2p_cases(t, plan.cases); break;
    case Suite::mpi_p2p: mpi_p2p_cases(t, plan.cases); break;
    case Suite::collectives: collective_cases(t, plan.cases); break;
    case Suite::multi_gpu_stream: multi_stream_cases(t, plan.cases); break;
  }
  return plan;
}

std::string BenchmarkPlan::to_json() const {
  ojson doc;
  doc["suite"] = std::string(to_string(suite));
  doc["cases"] = ojson::array();
  for (const auto& c : cases) {
    ojson j;
    j["benchmark"] = c.benchmark;
    j["tool"] = c.tool;
    j["src"] = placement_json(c.src);
    j["dst"] = placement_json(c.dst);
    j["alloc"] = c.alloc ? ojson(std::string(to_string(*c.alloc))) : ojson(nullptr);
    j["api"] = c.api ? ojson(std::string(to_string(*c.api))) : ojson(nullptr);
    j["sdma"] = c.sdma;
    j["xnack"] = c.xnack;
    j["metric"] = std::string(to_string(c.metric));
    if (c.numa_domain) j["numa_domain"] = *c.numa_domain;
    if (!c.gcds.empty()) j["gcds"] = c.gcds;
    if (!c.placement.empty()) j["placement"] = c.placement;
    if (c.collective) {
      j["collective"] = std::string(to_string(*c.collective));
      j["backend"] = c.backend;
    }
    j["sizes"] = c.sizes;
    j["env"] = ojson::object();
    for (const auto& [k, v] : c.env) j["env"][k] = v;
    j["repetitions"] = c.repetitions;
    doc["cases"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace fabscope
