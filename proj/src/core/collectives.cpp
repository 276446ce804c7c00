// SPDX-License-Identifier: Apache-2.0
#include "fabscope/collectives.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "fabscope/error.hpp"
#include "fabscope/format.hpp"
#include "fabscope/routing.hpp"

namespace fabscope {

std::string_view to_string(CollectiveKind op) {
  switch (op) {
    case CollectiveKind::reduce: return "reduce";
    case CollectiveKind::broadcast: return "broadcast";
    case CollectiveKind::allreduce: return "allreduce";
    case CollectiveKind::reduce_scatter: return "reduce_scatter";
    case CollectiveKind::allgather: return "allgather";
  }
  return "?";
}

std::optional<CollectiveKind> parse_collective(std::string_view name) {
  for (auto op : kAllCollectives)
    if (to_string(op) == name) return op;
  return std::nullopt;
}

int passes(CollectiveKind op) {
  switch (op) {
    case CollectiveKind::reduce:
    case CollectiveKind::broadcast:
      return 1;
    case CollectiveKind::allreduce:
    case CollectiveKind::reduce_scatter:
    case CollectiveKind::allgather:
      return 2;
  }
  return 0;
}

double lower_bound_us(CollectiveKind op, double l_min_us) {
  if (!(l_min_us > 0.0))
    throw Error(ErrorCode::invalid_argument, "minimum latency must be positive");
  return passes(op) * l_min_us;
}

CollectiveEstimate simulate_ring(CollectiveKind op, std::span<const int> participants,
                                 std::uint64_t message_bytes, const Topology& t,
                                 const CalibrationProfile& profile,
                                 double hop_latency_us) {
  const auto n = participants.size();
  if (n < 2) throw Error(ErrorCode::invalid_argument, "ring needs at least two participants");
  if (message_bytes == 0) throw Error(ErrorCode::invalid_argument, "message_bytes must be > 0");
  if (std::set<int>(participants.begin(), participants.end()).size() != n)
    throw Error(ErrorCode::invalid_argument, "ring participants must be distinct");

  double slowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const int from = participants[i];
    const int to = participants[(i + 1) % n];
    slowest = std::min(slowest, zero_copy_unidir_gbps(t, profile, from, to));
  }

  CollectiveEstimate e;
  e.op = op;
  e.participants = static_cast<int>(n);
  e.message_bytes = message_bytes;
  e.lower_bound_us = lower_bound_us(op, hop_latency_us);
  e.steps = passes(op) * static_cast<int>(n - 1);
  e.edge_bandwidth_gbps = slowest;
  // bytes / (GB/s) -> seconds; * 1e6 -> microseconds.
  const double chunk_us = (static_cast<double>(message_bytes) / static_cast<double>(n)) /
                          (slowest * 1e9) * 1e6;
  e.per_step_us = hop_latency_us + chunk_us;
  e.ring_estimate_us = e.steps * e.per_step_us;
  e.rule = "ring schedule model (not the library's algorithm): " + std::to_string(e.steps) +
           " steps x (" + format_number(hop_latency_us) + " us + chunk over slowest edge " +
           format_number(slowest) + " GB/s)";
  return e;
}

ComparisonReport compare_backends(const LatencySeries& a, const LatencySeries& b) {
  std::vector<std::string> missing;
  for (const auto& [key, _] : a.points_us)
    if (!b.points_us.contains(key))
      missing.push_back(std::string(to_string(key.first)) + "/" + std::to_string(key.second) +
                        " missing from " + b.label);
  for (const auto& [key, _] : b.points_us)
    if (!a.points_us.contains(key))
      missing.push_back(std::string(to_string(key.first)) + "/" + std::to_string(key.second) +
                        " missing from " + a.label);
  if (!missing.empty()) {
    std::string msg = "latency series grids differ:";
    for (const auto& m : missing) msg += " " + m + ";";
    throw Error(ErrorCode::grid_mismatch, msg, "grid mismatch");
  }

  ComparisonReport r;
  r.label_a = a.label;
  r.label_b = b.label;
  std::map<CollectiveKind, std::pair<int, int>> wins;
  for (const auto& [key, a_us] : a.points_us) {
    const double b_us = b.points_us.at(key);
    ComparisonRow row{key.first, key.second, a_us, b_us, std::nullopt, 1.0};
    auto& tally = wins[key.first];
    if (a_us < b_us) {
      row.winner = a.label;
      row.ratio = b_us / a_us;
      ++tally.first;
    } else if (b_us < a_us) {
      row.winner = b.label;
      row.ratio = a_us / b_us;
      ++tally.second;
    }
    r.rows.push_back(row);
  }

  int ops_a = 0;
  int ops_b = 0;
  for (const auto& [op, tally] : wins) {
    if (tally.first > tally.second) {
      r.op_winner[op] = a.label;
      ++ops_a;
    } else if (tally.second > tally.first) {
      r.op_winner[op] = b.label;
      ++ops_b;
    } else {
      r.op_winner[op] = std::nullopt;
    }
  }
  if (ops_a > ops_b) r.overall_winner = a.label;
  else if (ops_b > ops_a) r.overall_winner = b.label;
  if (r.overall_winner) {
    for (const auto& [op, winner] : r.op_winner)
      if (winner != r.overall_winner) r.exceptions.push_back(op);
  }
  return r;
}

}  // namespace fabscope
