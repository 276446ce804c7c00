// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "fabscope/routing.hpp"
#include "fabscope/topology.hpp"

namespace fabscope {

enum class AllocKind : std::uint8_t {
  pageable,
  pinned_noncoherent,
  pinned_coherent,
  managed,
  device,
};

enum class Api : std::uint8_t {
  explicit_copy,
  zero_copy_kernel,
  page_migration,
  mpi_p2p,
};

enum class Movement : std::uint8_t { explicit_transfer, zero_copy, implicit_migration };

std::string_view to_string(AllocKind kind);
std::string_view to_string(Api api);
std::string_view to_string(Movement movement);  // "explicit", "zero_copy", "implicit"
std::optional<AllocKind> parse_alloc_kind(std::string_view name);
std::optional<Api> parse_api(std::string_view name);

struct MovementResolution {
  Movement movement;
  bool coherent;

  bool operator==(const MovementResolution&) const = default;
};

/// Looks up how data moves for an allocation kind. `api == nullopt` means
/// plain kernel access with no movement call. Combinations outside the
/// movement table throw `invalid_spec`, naming the closest valid rows.
MovementResolution resolve_movement(AllocKind alloc, bool xnack,
                                    std::optional<Api> api);

struct Placement {
  enum class Kind : std::uint8_t { host, gcd };
  Kind kind = Kind::host;
  int id = 0;

  static Placement host() { return {Kind::host, 0}; }
  static Placement on_gcd(int id) { return {Kind::gcd, id}; }
  bool is_gcd() const { return kind == Kind::gcd; }
  bool operator==(const Placement&) const = default;
};

std::string to_string(Placement p);  // "host" or "gcd:3"

struct TransferSpec {
  Placement src;
  Placement dst;
  std::uint64_t size_bytes = 1ull << 30;
  AllocKind alloc = AllocKind::device;
  Api api = Api::explicit_copy;
  bool sdma = true;
  bool xnack = false;
};

/// Measured plateaus and efficiency factors. Defaults are the values of the
/// bundled `mi250x-paper.json`; the per-GCD host bandwidth has no default.
struct CalibrationProfile {
  double memcpy_h2d_pinned_gbps = 28.3;
  std::optional<double> memcpy_h2d_pageable_gbps;
  bool memcpy_h2d_pageable_unstable = true;
  double zero_copy_h2d_gbps = 25.5;
  double page_migration_gbps = 2.8;
  double sdma_cap_gbps = 50.0;
  double sdma_link_efficiency = 0.75;
  double kernel_bidir_efficiency = 0.435;
  std::pair<double, double> mpi_overhead_factor_range = {0.85, 0.90};
  double local_stream_gbps = 1400.0;
  std::optional<double> cpu_gpu_per_gcd_bidir_gbps;

  /// Throws `invariant` if a factor is outside (0, 1] or a bandwidth <= 0.
  void validate() const;

  static CalibrationProfile load(std::string_view json_text);
  static CalibrationProfile load_file(const std::filesystem::path& path);
  std::string to_json() const;
};

enum class LatencyTier : std::uint8_t { A, B, C, D };
std::string_view to_string(LatencyTier tier);

struct PerfPrediction {
  std::optional<double> bandwidth_gbps;  // absent when unstable
  Direction direction = Direction::unidir;
  std::optional<std::pair<double, double>> interval;
  std::optional<LatencyTier> latency_tier;
  std::string rule;
  std::optional<Route> route;
  bool unstable = false;
  bool small_transfer = false;
};

/// Below this size the plateau values do not apply (GPU cache effects).
inline constexpr std::uint64_t kSmallTransferBytes = 32ull << 20;

PerfPrediction predict_h2d(const TransferSpec& spec,
                           const CalibrationProfile& profile,
                           double cpu_link_gbps = 36.0);

/// Convenience overload using the topology's host link capacity.
PerfPrediction predict_h2d(const TransferSpec& spec, const Topology& t,
                           const CalibrationProfile& profile);

PerfPrediction predict_p2p(const TransferSpec& spec, const Topology& t,
                           const CalibrationProfile& profile,
                           int max_hops = kDefaultMaxHops);

/// Kernel-driven unidirectional peer bandwidth over the widest route.
double zero_copy_unidir_gbps(const Topology& t, const CalibrationProfile& profile,
                             int a, int b, int max_hops = kDefaultMaxHops);

LatencyTier classify_latency_tier(const Topology& t, int a, int b);

/// Aggregate host<->GPU bidirectional bandwidth; each NUMA domain contributes
/// at most one GCD's worth.
PerfPrediction predict_multi_gpu(std::span<const int> gcds, const Topology& t,
                                 const CalibrationProfile& profile);

/// STREAM copy on local HBM.
PerfPrediction predict_local_stream(const Topology& t,
                                    const CalibrationProfile& profile);

/// n_gpus * 2 * bytes / elapsed, in decimal GB/s.
double stream_bandwidth(double elapsed_s, double bytes_per_buffer, int n_gpus);

}  // namespace fabscope
