// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fabscope/topology.hpp"
#include "fabscope/xfer_model.hpp"

namespace fabscope {

enum class CollectiveKind : std::uint8_t {
  reduce,
  broadcast,
  allreduce,
  reduce_scatter,
  allgather,
};

inline constexpr CollectiveKind kAllCollectives[] = {
    CollectiveKind::reduce, CollectiveKind::broadcast, CollectiveKind::allreduce,
    CollectiveKind::reduce_scatter, CollectiveKind::allgather};

/// Smallest measured GCD-to-GCD latency on the reference node, in microseconds.
inline constexpr double kReferenceMinLatencyUs = 8.7;

std::string_view to_string(CollectiveKind op);
std::optional<CollectiveKind> parse_collective(std::string_view name);

/// 1 for reduce/broadcast (all-to-one or one-to-all), 2 for the all-to-all ops.
int passes(CollectiveKind op);

double lower_bound_us(CollectiveKind op, double l_min_us = kReferenceMinLatencyUs);

struct CollectiveEstimate {
  CollectiveKind op = CollectiveKind::reduce;
  double lower_bound_us = 0.0;
  std::optional<double> ring_estimate_us;
  int participants = 0;
  std::uint64_t message_bytes = 0;
  int steps = 0;
  double per_step_us = 0.0;
  double edge_bandwidth_gbps = 0.0;  // slowest ring edge
  std::string rule;
};

/// Ring schedule in participant order: passes * (n - 1) steps, each moving
/// message_bytes / n over the slowest edge at the zero-copy kernel rate.
/// The lower bound in the result uses `hop_latency_us` as the minimum latency.
CollectiveEstimate simulate_ring(CollectiveKind op, std::span<const int> participants,
                                 std::uint64_t message_bytes, const Topology& t,
                                 const CalibrationProfile& profile,
                                 double hop_latency_us = kReferenceMinLatencyUs);

struct LatencySeries {
  std::string label;
  std::map<std::pair<CollectiveKind, int>, double> points_us;  // (op, participants)
};

struct ComparisonRow {
  CollectiveKind op;
  int participants;
  double a_us;
  double b_us;
  std::optional<std::string> winner;  // nullopt = tie
  double ratio;                       // slower / faster, 1 on ties
};

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  std::vector<ComparisonRow> rows;
  std::map<CollectiveKind, std::optional<std::string>> op_winner;  // majority per op
  std::optional<std::string> overall_winner;
  std::vector<CollectiveKind> exceptions;  // ops whose winner differs from the overall one
};

/// Throws grid_mismatch unless both series cover the same grid.
ComparisonReport compare_backends(const LatencySeries& a, const LatencySeries& b);

}  // namespace fabscope
