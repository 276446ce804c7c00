// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "fabscope/topology.hpp"

namespace oracle {

/// Random connected graph of `n` GCDs: a random spanning tree plus extra
/// edges with probability `density`, every edge on a random GCD tier.
fabscope::Topology random_topology(std::mt19937_64& rng, int n = 8, double density = 0.3);

/// Complete graph of `n` GCDs, every edge on `tier`.
fabscope::Topology uniform_clique(int n, fabscope::LinkTier tier);

}  // namespace oracle
