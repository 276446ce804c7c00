// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fabscope/topology.hpp"

namespace fabscope {

/// Only three-hop detours are needed to reach the widest route on the
/// eight-GCD node.
inline constexpr int kDefaultMaxHops = 3;

/// A GCD-to-GCD path over GCD-GCD links only; host links are never used.
struct Route {
  std::vector<int> hops;  // endpoints first and last
  double bottleneck_gbps = 0.0;

  int hop_count() const { return static_cast<int>(hops.size()) - 1; }
  bool operator==(const Route&) const = default;
};

/// "1-0-6-7".
std::string format_hops(const Route& route);

/// Minimum-hop route; ties go to the lexicographically smallest sequence.
Route shortest_hop_route(const Topology& t, int a, int b);

/// Route maximising the bottleneck bandwidth among simple routes of at most
/// `max_hops` links; ties go to fewer hops, then lexicographic order.
Route widest_route(const Topology& t, int a, int b,
                   int max_hops = kDefaultMaxHops);

struct PairClassification {
  int a = 0;
  int b = 0;
  int shortest_hops = 0;
  Route widest;
  bool routing_mismatch = false;  // widest.hop_count() > shortest_hops
};

PairClassification classify_pair(const Topology& t, int a, int b,
                                 int max_hops = kDefaultMaxHops);

enum class MatrixMetric { hops, widest_bw, mismatch };
std::string_view to_string(MatrixMetric metric);
std::optional<MatrixMetric> parse_matrix_metric(std::string_view name);

/// Square, symmetric matrix over the GCDs of a topology (ascending ids).
struct PairMatrix {
  MatrixMetric metric = MatrixMetric::hops;
  std::vector<int> ids;
  std::vector<double> values;  // row-major

  std::size_t size() const { return ids.size(); }
  double at(std::size_t row, std::size_t col) const {
    return values[row * ids.size() + col];
  }
};

/// Diagonal: 0 hops, local HBM bandwidth, no mismatch.
PairMatrix all_pairs_matrix(const Topology& t, MatrixMetric metric,
                            int max_hops = kDefaultMaxHops);

}  // namespace fabscope
