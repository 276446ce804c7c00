// SPDX-License-Identifier: Apache-2.0
#include "brute_force.hpp"

#include <algorithm>
#include <limits>

namespace oracle {

Graph::Graph(const fabscope::Topology& t) {
  for (const auto& d : t.devices())
    if (d.ref.kind == fabscope::DeviceKind::gcd) adj_[d.ref.id];
  for (const auto& l : t.links()) {
    if (l.tier == fabscope::LinkTier::cpu) continue;
    const double bw = t.tiers().at(l.tier);
    adj_[l.a.id][l.b.id] = bw;
    adj_[l.b.id][l.a.id] = bw;
  }
}

std::vector<int> Graph::nodes() const {
  std::vector<int> out;
  for (const auto& [id, _] : adj_) out.push_back(id);
  return out;
}

std::vector<Path> Graph::all_paths(int a, int b, int max_links) const {
  std::vector<Path> out;
  std::vector<int> stack{a};
  auto dfs = [&](auto&& self, double bottleneck) -> void {
    const int u = stack.back();
    if (u == b) {
      out.push_back({stack, bottleneck});
      return;
    }
    if (static_cast<int>(stack.size()) - 1 == max_links) return;
    for (const auto& [v, bw] : adj_.at(u)) {
      if (std::find(stack.begin(), stack.end(), v) != stack.end()) continue;
      stack.push_back(v);
      self(self, std::min(bottleneck, bw));
      stack.pop_back();
    }
  };
  dfs(dfs, std::numeric_limits<double>::infinity());
  return out;
}

std::optional<Path> shortest(const Graph& g, int a, int b) {
  const auto paths = g.all_paths(a, b, static_cast<int>(g.nodes().size()));
  if (paths.empty()) return std::nullopt;
  return *std::min_element(paths.begin(), paths.end(), [](const Path& x, const Path& y) {
    if (x.hops.size() != y.hops.size()) return x.hops.size() < y.hops.size();
    return x.hops < y.hops;
  });
}

std::optional<Path> widest(const Graph& g, int a, int b, int max_links) {
  const auto paths = g.all_paths(a, b, max_links);
  if (paths.empty()) return std::nullopt;
  return *std::min_element(paths.begin(), paths.end(), [](const Path& x, const Path& y) {
    if (x.bottleneck != y.bottleneck) return x.bottleneck > y.bottleneck;
    if (x.hops.size() != y.hops.size()) return x.hops.size() < y.hops.size();
    return x.hops < y.hops;
  });
}

}  // namespace oracle
