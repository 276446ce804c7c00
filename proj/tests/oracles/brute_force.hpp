// SPDX-License-Identifier: Apache-2.0
// Exhaustive reference implementations used to check the routing module.
// Deliberately naive: enumerate every simple path and pick by comparison.
#pragma once

#include <map>
#include <optional>
#include <vector>

#include "fabscope/topology.hpp"

namespace oracle {

struct Path {
  std::vector<int> hops;
  double bottleneck = 0.0;
};

/// GCD-only adjacency read straight from the link list.
class Graph {
 public:
  explicit Graph(const fabscope::Topology& t);

  /// Every simple path from a to b with at most `max_links` links.
  std::vector<Path> all_paths(int a, int b, int max_links) const;

  std::vector<int> nodes() const;

 private:
  std::map<int, std::map<int, double>> adj_;
};

/// Fewest links, then lexicographically smallest sequence.
std::optional<Path> shortest(const Graph& g, int a, int b);

/// Largest bottleneck, then fewest links, then lexicographically smallest.
std::optional<Path> widest(const Graph& g, int a, int b, int max_links);

}  // namespace oracle
