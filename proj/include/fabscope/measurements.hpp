// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fabscope/collectives.hpp"
#include "fabscope/topology.hpp"
#include "fabscope/xfer_model.hpp"

namespace fabscope {

inline constexpr std::string_view kCsvHeader =
    "benchmark,src_kind,src_id,dst_kind,dst_id,size_bytes,metric,value,env";

inline constexpr double kDefaultTolerance = 0.10;

// Environment keys accepted in the env column; anything else must start "x-".
inline constexpr std::string_view kRecognizedEnvKeys[] = {
    "HSA_ENABLE_SDMA", "HSA_ENABLE_PEER_SDMA", "HSA_XNACK", "HIP_VISIBLE_DEVICES",
    "MPICH_GPU_SUPPORT_ENABLED"};

// `group` endpoints carry a participant count in the id column.
enum class EndpointKind : std::uint8_t { host, gcd, numa, group };
std::string_view to_string(EndpointKind kind);

struct Endpoint {
  EndpointKind kind = EndpointKind::gcd;
  int id = 0;

  bool operator==(const Endpoint&) const = default;
};

enum class Metric : std::uint8_t { bandwidth_unidir_gbps, bandwidth_bidir_gbps, latency_us };
std::string_view to_string(Metric metric);
std::optional<Metric> parse_metric(std::string_view name);

struct MeasurementRecord {
  std::string benchmark;
  Endpoint src;
  Endpoint dst;
  std::uint64_t size_bytes = 0;
  Metric metric = Metric::bandwidth_unidir_gbps;
  double value = 0.0;
  std::vector<std::pair<std::string, std::string>> env;  // in document order
  std::size_t line = 0;  // 1-based source line; not part of equality
  std::string source;    // file name when read from disk; not part of equality

  bool operator==(const MeasurementRecord& o) const {
    return benchmark == o.benchmark && src == o.src && dst == o.dst &&
           size_bytes == o.size_bytes && metric == o.metric && value == o.value &&
           env == o.env;
  }

  std::optional<std::string_view> env_value(std::string_view key) const;
};

/// Parses a measurement CSV. Blank lines are skipped; every error names its line.
std::vector<MeasurementRecord> ingest_csv(std::string_view document);
std::vector<MeasurementRecord> ingest_csv_file(const std::filesystem::path& path);

/// Canonical CSV (header plus one row per record, '\n' line endings).
std::string serialize_csv(std::span<const MeasurementRecord> records);

/// Benchmark names understood by the validator. Collective rows are named
/// "<backend>_<op>", e.g. "rccl_allreduce".
namespace bench {
inline constexpr std::string_view stream_local = "stream_local";
inline constexpr std::string_view h2d_pageable = "h2d_pageable";
inline constexpr std::string_view h2d_pinned = "h2d_pinned";
inline constexpr std::string_view h2d_pinned_zero_copy = "h2d_pinned_zero_copy";
inline constexpr std::string_view h2d_managed_zero_copy = "h2d_managed_zero_copy";
inline constexpr std::string_view h2d_managed_migration = "h2d_managed_migration";
inline constexpr std::string_view p2p = "p2p";
inline constexpr std::string_view p2p_stream = "p2p_stream";
inline constexpr std::string_view mpi_p2p = "mpi_p2p";
inline constexpr std::string_view multi_stream = "multi_stream";
}  // namespace bench

struct CollectiveBenchmark {
  std::string backend;
  CollectiveKind op;
};
std::optional<CollectiveBenchmark> parse_collective_benchmark(std::string_view name);

/// Latency series of one backend from collective latency rows.
LatencySeries collective_series(std::span<const MeasurementRecord> records,
                                std::string_view backend);

enum class Verdict : std::uint8_t { pass, fail, unmodeled };
std::string_view to_string(Verdict verdict);

struct RecordVerdict {
  std::size_t index = 0;  // position in the validated span
  std::optional<double> predicted;
  std::optional<double> relative_error;
  Verdict verdict = Verdict::unmodeled;
  std::string rule;
};

enum class AnomalyStatus : std::uint8_t { fired, clear, inconclusive };
std::string_view to_string(AnomalyStatus status);

struct AnomalyFinding {
  std::string signature;  // sdma_capped, numa_non_scaling, routing_outlier
  AnomalyStatus status = AnomalyStatus::inconclusive;
  std::vector<std::size_t> evidence;  // record indices
  std::vector<std::string> missing;   // what coverage was lacking
  std::string detail;
};

struct ValidationReport {
  double tolerance = kDefaultTolerance;
  std::vector<RecordVerdict> verdicts;  // one per record, input order
  std::vector<AnomalyFinding> anomalies;

  std::size_t count(Verdict v) const;
};

ValidationReport validate(std::span<const MeasurementRecord> records, const Topology& t,
                          const CalibrationProfile& profile,
                          double tolerance = kDefaultTolerance);

/// Checks the three signatures; every signature appears exactly once.
std::vector<AnomalyFinding> detect_anomalies(std::span<const MeasurementRecord> records,
                                             const Topology& t);

}  // namespace fabscope
