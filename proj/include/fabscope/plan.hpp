// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fabscope/collectives.hpp"
#include "fabscope/measurements.hpp"
#include "fabscope/topology.hpp"
#include "fabscope/xfer_model.hpp"

namespace fabscope {

enum class Suite : std::uint8_t { cpu_gpu, p2p, mpi_p2p, collectives, multi_gpu_stream };
std::string_view to_string(Suite suite);
std::optional<Suite> parse_suite(std::string_view name);

inline constexpr int kDefaultRepetitions = 100;

/// One benchmark case of a plan manifest. `benchmark` uses the same names the
/// validator understands, so results can be fed straight back in.
struct PlanCase {
  std::string benchmark;
  std::string tool;  // the external benchmark expected to produce the row
  Placement src;
  Placement dst;
  std::optional<AllocKind> alloc;
  std::optional<Api> api;
  bool sdma = true;
  bool xnack = false;
  Metric metric = Metric::bandwidth_unidir_gbps;
  std::vector<std::uint64_t> sizes;
  std::map<std::string, std::string> env;
  int repetitions = kDefaultRepetitions;
  std::optional<int> numa_domain;    // host buffer placement (closest domain)
  std::vector<int> gcds;             // multi-GPU and collective participants
  std::string placement;             // "spread" / "same_gpu" for multi-GPU runs
  std::optional<CollectiveKind> collective;
  std::string backend;               // "mpi" / "rccl" for collectives
};

struct BenchmarkPlan {
  Suite suite = Suite::p2p;
  std::vector<PlanCase> cases;

  std::string to_json() const;
};

/// Doubling sweep from `from` to `to` inclusive (both powers of two).
std::vector<std::uint64_t> size_sweep(std::uint64_t from, std::uint64_t to);

BenchmarkPlan emit_plan(Suite suite, const Topology& t);

}  // namespace fabscope
