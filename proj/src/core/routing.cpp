// SPDX-License-Identifier: Apache-2.0
#include "fabscope/routing.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>

#include "fabscope/error.hpp"

namespace fabscope {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

struct Edge {
  std::size_t to;
  double gbps;
};

// Dense view of the GCD-only subgraph. Adjacency lists are sorted by GCD id
// so the first admissible neighbour is always the lexicographically smallest.
class GcdGraph {
 public:
  explicit GcdGraph(const Topology& t) : ids_(t.gcd_ids()) {
    for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = i;
    adj_.resize(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      for (const auto& n : t.neighbors(gcd(ids_[i]))) {
        if (n.device.kind != DeviceKind::gcd) continue;
        adj_[i].push_back({index_.at(n.device.id), t.tiers().at(n.tier)});
      }
    }
  }

  std::size_t index_of(const Topology& t, int id) const {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    if (t.contains(numa(id)) && !t.contains(gcd(id)))
      throw Error(ErrorCode::invalid_argument, "route endpoint must be a gcd");
    throw Error(ErrorCode::unknown_device, "unknown gcd " + std::to_string(id));
  }

  // Hop distances to `target` using only edges of at least `min_gbps`.
  std::vector<int> distances_to(std::size_t target, double min_gbps) const {
    std::vector<int> dist(ids_.size(), kUnreached);
    std::queue<std::size_t> q;
    dist[target] = 0;
    q.push(target);
    while (!q.empty()) {
      const auto cur = q.front();
      q.pop();
      for (const auto& e : adj_[cur]) {
        if (e.gbps < min_gbps || dist[e.to] != kUnreached) continue;
        dist[e.to] = dist[cur] + 1;
        q.push(e.to);
      }
    }
    return dist;
  }

  // Lexicographically smallest shortest path from `from` to `to` in the
  // filtered subgraph, or nullopt if it needs more than `max_hops` links.
  std::optional<Route> smallest_shortest_path(std::size_t from, std::size_t to,
                                              double min_gbps,
                                              int max_hops) const {
    const auto dist = distances_to(to, min_gbps);
    if (dist[from] == kUnreached || dist[from] > max_hops) return std::nullopt;
    Route r;
    r.bottleneck_gbps = std::numeric_limits<double>::infinity();
    std::size_t cur = from;
    r.hops.push_back(ids_[cur]);
    while (cur != to) {
      for (const auto& e : adj_[cur]) {
        if (e.gbps >= min_gbps && dist[e.to] == dist[cur] - 1) {
          r.bottleneck_gbps = std::min(r.bottleneck_gbps, e.gbps);
          cur = e.to;
          break;
        }
      }
      r.hops.push_back(ids_[cur]);
    }
    return r;
  }

  std::vector<double> distinct_bandwidths_desc() const {
    std::vector<double> out;
    for (const auto& list : adj_)
      for (const auto& e : list) out.push_back(e.gbps);
    std::sort(out.begin(), out.end(), std::greater<>());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  const std::vector<int>& ids() const { return ids_; }

 private:
  std::vector<int> ids_;
  std::map<int, std::size_t> index_;
  std::vector<std::vector<Edge>> adj_;
};

void require_distinct(int a, int b) {
  if (a == b)
    throw Error(ErrorCode::invalid_argument,
                "route endpoints must differ (" + std::to_string(a) + ")");
}

Route shortest_in(const GcdGraph& g, const Topology& t, int a, int b) {
  const auto from = g.index_of(t, a);
  const auto to = g.index_of(t, b);
  auto r = g.smallest_shortest_path(from, to, 0.0, kUnreached - 1);
  if (!r)
    throw Error(ErrorCode::no_route, "no route between gcd " + std::to_string(a) +
                                         " and gcd " + std::to_string(b));
  return *r;
}

// Highest threshold whose filtered subgraph still connects the pair within
// the hop budget gives the optimal bottleneck; the shortest path inside that
// subgraph realises it with the fewest hops.
Route widest_in(const GcdGraph& g, const Topology& t, int a, int b, int max_hops) {
  const auto from = g.index_of(t, a);
  const auto to = g.index_of(t, b);
  for (double threshold : g.distinct_bandwidths_desc()) {
    if (auto r = g.smallest_shortest_path(from, to, threshold, max_hops)) return *r;
  }
  throw Error(ErrorCode::no_route, "no route between gcd " + std::to_string(a) +
                                       " and gcd " + std::to_string(b) + " within " +
                                       std::to_string(max_hops) + " hops");
}

}  // namespace

std::string format_hops(const Route& route) {
  std::string out;
  for (std::size_t i = 0; i < route.hops.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(route.hops[i]);
  }
  return out;
}

Route shortest_hop_route(const Topology& t, int a, int b) {
  require_distinct(a, b);
  return shortest_in(GcdGraph(t), t, a, b);
}

Route widest_route(const Topology& t, int a, int b, int max_hops) {
  require_distinct(a, b);
  if (max_hops < 1) throw Error(ErrorCode::invalid_argument, "max_hops must be >= 1");
  return widest_in(GcdGraph(t), t, a, b, max_hops);
}

PairClassification classify_pair(const Topology& t, int a, int b, int max_hops) {
  require_distinct(a, b);
  PairClassification c;
  c.a = a;
  c.b = b;
  c.shortest_hops = shortest_hop_route(t, a, b).hop_count();
  c.widest = widest_route(t, a, b, max_hops);
  c.routing_mismatch = c.widest.hop_count() > c.shortest_hops;
  return c;
}

std::string_view to_string(MatrixMetric metric) {
  switch (metric) {
    case MatrixMetric::hops: return "hops";
    case MatrixMetric::widest_bw: return "widest_bw";
    case MatrixMetric::mismatch: return "mismatch";
  }
  return "?";
}

std::optional<MatrixMetric> parse_matrix_metric(std::string_view name) {
  for (auto m : {MatrixMetric::hops, MatrixMetric::widest_bw, MatrixMetric::mismatch})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

PairMatrix all_pairs_matrix(const Topology& t, MatrixMetric metric, int max_hops) {
  const GcdGraph g(t);
  PairMatrix m;
  m.metric = metric;
  m.ids = g.ids();
  const auto n = m.ids.size();
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (metric == MatrixMetric::widest_bw) m.values[i * n + i] = t.memory().hbm_gbps;
    for (std::size_t j = i + 1; j < n; ++j) {
      const int a = m.ids[i];
      const int b = m.ids[j];
      double v = 0.0;
      switch (metric) {
        case MatrixMetric::hops:
          v = shortest_in(g, t, a, b).hop_count();
          break;
        case MatrixMetric::widest_bw:
          v = widest_in(g, t, a, b, max_hops).bottleneck_gbps;
          break;
        case MatrixMetric::mismatch:
          v = widest_in(g, t, a, b, max_hops).hop_count() >
                      shortest_in(g, t, a, b).hop_count()
                  ? 1.0
                  : 0.0;
          break;
      }
      m.values[i * n + j] = v;
      m.values[j * n + i] = v;
    }
  }
  return m;
}

}  // namespace fabscope
