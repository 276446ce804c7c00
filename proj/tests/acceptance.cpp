// SPDX-License-Identifier: Apache-2.0
// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fabscope/collectives.hpp"
#include "fabscope/format.hpp"
#include "fabscope/measurements.hpp"
#include "fabscope/routing.hpp"
#include "fabscope/xfer_model.hpp"
#include "oracles/brute_force.hpp"
#include "oracles/random_records.hpp"
#include "oracles/random_topology.hpp"
#include "support.hpp"

using namespace fabscope;

namespace {

// Tolerances.
constexpr double kTierTolerance = 0.04;       // criterion 2
constexpr double kStreamTolerance = 0.005;    // criterion 4
constexpr double kRingTolerance = 0.01;       // criterion 7

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

using Pair = std::pair<int, int>;
const std::set<Pair> kSingle{{0, 2}, {1, 3}, {1, 5}, {3, 7}, {4, 6}, {5, 7}};
const std::set<Pair> kWide{{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 6}, {2, 4}};
const std::set<Pair> kMismatch{{1, 7}, {3, 5}};

TransferSpec peer(int a, int b, Api api = Api::explicit_copy, bool sdma = true) {
  TransferSpec s;
  s.src = Placement::on_gcd(a);
  s.dst = Placement::on_gcd(b);
  s.api = api;
  s.sdma = sdma;
  return s;
}

TransferSpec h2d(AllocKind alloc, Api api, bool xnack) {
  TransferSpec s;
  s.src = Placement::host();
  s.dst = Placement::on_gcd(0);
  s.alloc = alloc;
  s.api = api;
  s.xnack = xnack;
  return s;
}

std::string pair_name(int a, int b) { return std::to_string(a) + "-" + std::to_string(b); }

bool within(double value, double lo, double hi) { return value >= lo && value <= hi; }

Outcome topology_routing() {
  Outcome o;
  const auto& t = testing::frontier();
  const oracle::Graph g(t);
  const auto m = all_pairs_matrix(t, MatrixMetric::hops);
  double max_hops = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) {
      max_hops = std::max(max_hops, m.at(i, j));
      const int a = m.ids[i];
      const int b = m.ids[j];
      const double want = a == b ? 0.0 : oracle::shortest(g, a, b)->hops.size() - 1.0;
      o.require(m.at(i, j) == want, "hop matrix differs from brute force at " + pair_name(a, b));
    }
  o.require(max_hops <= 2, "hop matrix entry above 2");
  const auto w = widest_route(t, 1, 7);
  o.require(format_hops(w) == "1-0-6-7" && w.bottleneck_gbps == 100.0,
            "widest 1-7 is " + format_hops(w));
  std::set<Pair> mismatched;
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b)
      if (classify_pair(t, a, b).routing_mismatch) mismatched.insert({a, b});
  o.require(mismatched == kMismatch, "mismatch set differs");
  if (o.ok) o.detail = "hop matrix max 2 equals brute force; 1-7 widest 1-0-6-7 @ 100; mismatch {1-7, 3-5}";
  return o;
}

Outcome sdma_tiers() {
  Outcome o;
  const auto& t = testing::frontier();
  const auto& p = testing::bundled_profile();
  for (auto [a, b] : kSingle) {
    const double bw = *predict_p2p(peer(a, b), t, p).bandwidth_gbps;
    o.require(bw == 37.5, pair_name(a, b) + " predicted " + format_number(bw));
    o.require(within(bw, 37.0 * (1 - kTierTolerance), 38.0 * (1 + kTierTolerance)),
              pair_name(a, b) + " outside the 37-38 tier");
  }
  for (auto [a, b] : kWide) {
    const double bw = *predict_p2p(peer(a, b), t, p).bandwidth_gbps;
    o.require(bw == 50.0, pair_name(a, b) + " predicted " + format_number(bw));
    o.require(std::abs(bw - 50.0) <= 50.0 * kTierTolerance, pair_name(a, b) + " off 50");
  }
  if (o.ok) o.detail = "single-link pairs 37.5, dual/quad pairs 50 GB/s (tol 4%)";
  return o;
}

Outcome utilization() {
  Outcome o;
  const auto& t = testing::frontier();
  const auto& p = testing::bundled_profile();
  const std::pair<Pair, double> cases[] = {{{0, 2}, 0.75}, {{0, 6}, 0.50}, {{0, 1}, 0.25}};
  for (const auto& [pr, want] : cases) {
    const double bw = *predict_p2p(peer(pr.first, pr.second), t, p).bandwidth_gbps;
    const double theo = *t.theoretical_bandwidth(gcd(pr.first), gcd(pr.second), Direction::unidir);
    o.require(bw / theo == want, pair_name(pr.first, pr.second) + " utilization " +
                                     format_number(bw / theo));
  }
  if (o.ok) o.detail = "single 75%, dual 50%, quad 25% (exact)";
  return o;
}

Outcome zero_copy() {
  Outcome o;
  const auto& t = testing::frontier();
  const auto& p = testing::bundled_profile();
  for (int dst : {1, 2, 6}) {
    const double bw = *predict_p2p(peer(0, dst, Api::zero_copy_kernel), t, p).bandwidth_gbps;
    const double frac = bw / *t.theoretical_bandwidth(gcd(0), gcd(dst), Direction::bidir);
    o.require(within(frac, 0.43, 0.44), "0-" + std::to_string(dst) + " at " +
                                            format_number(100 * frac) + "%");
  }
  const double local = *predict_local_stream(t, p).bandwidth_gbps;
  o.require(std::abs(local - 1400.0) <= 1400.0 * kStreamTolerance, "local stream " + format_number(local));
  o.require(std::abs(local / t.memory().hbm_gbps - 0.875) <= 0.875 * kStreamTolerance,
            "local stream fraction " + format_number(local / t.memory().hbm_gbps));
  if (o.ok) o.detail = "GCD0->{1,2,6} at 43.5% of bidirectional link; local 1400 = 87.5% of 1600";
  return o;
}

Outcome cpu_gpu() {
  Outcome o;
  const auto& t = testing::frontier();
  const auto& p = testing::bundled_profile();
  auto bw = [&](AllocKind a, Api api, bool xnack) {
    return predict_h2d(h2d(a, api, xnack), t, p).bandwidth_gbps;
  };
  o.require(bw(AllocKind::pinned_noncoherent, Api::explicit_copy, false) == 28.3, "pinned");
  o.require(bw(AllocKind::managed, Api::zero_copy_kernel, false) == 25.5, "managed zero-copy");
  o.require(bw(AllocKind::managed, Api::page_migration, true) == 2.8, "page migration");
  const auto pageable = predict_h2d(h2d(AllocKind::pageable, Api::explicit_copy, false), t, p);
  o.require(pageable.unstable && !pageable.bandwidth_gbps, "pageable not unstable");
  if (o.ok) o.detail = "28.3 / 25.5 / 2.8 GB/s exact, pageable unstable";
  return o;
}

Outcome aggregation() {
  Outcome o;
  const auto& t = testing::frontier();
  auto p = testing::bundled_profile();
  p.cpu_gpu_per_gcd_bidir_gbps = 1.0;
  const std::pair<std::vector<int>, double> cases[] = {
      {{0}, 1}, {{0, 1}, 1}, {{0, 2}, 2}, {{0, 2, 4, 6}, 4}, {{0, 1, 2, 3, 4, 5, 6, 7}, 4}};
  std::string got;
  for (const auto& [ids, want] : cases) {
    const double v = *predict_multi_gpu(ids, t, p).bandwidth_gbps;
    got += (got.empty() ? "" : ",") + format_number(v);
    o.require(v == want, "aggregate " + format_number(v) + " for " + std::to_string(ids.size()) +
                             " gcds");
  }
  if (o.ok) o.detail = "unit B1 -> " + got;
  return o;
}

Outcome collective_bounds() {
  Outcome o;
  for (auto op : kAllCollectives) {
    const double want = passes(op) == 1 ? 8.7 : 17.4;
    o.require(lower_bound_us(op) == want, std::string(to_string(op)) + " bound");
    const std::vector<int> ring{0, 1};
    const auto e = simulate_ring(op, ring, 1, testing::frontier(), testing::bundled_profile(), 8.7);
    o.require(std::abs(*e.ring_estimate_us - want) <= want * kRingTolerance,
              std::string(to_string(op)) + " ring " + format_number(*e.ring_estimate_us));
  }
  if (o.ok) o.detail = "1-pass 8.7 us, 2-pass 17.4 us; n=2 ring within 1% of bound";
  return o;
}

Outcome latency_tiers() {
  Outcome o;
  const auto& t = testing::frontier();
  std::set<Pair> a, b, d;
  for (int x = 0; x < 8; ++x)
    for (int y = x + 1; y < 8; ++y) {
      switch (classify_latency_tier(t, x, y)) {
        case LatencyTier::A: a.insert({x, y}); break;
        case LatencyTier::B: b.insert({x, y}); break;
        case LatencyTier::D: d.insert({x, y}); break;
        case LatencyTier::C: break;
      }
      o.require(classify_latency_tier(t, x, y) == classify_latency_tier(t, y, x),
                "asymmetric tier " + pair_name(x, y));
    }
  o.require(a == kSingle, "tier A set differs");
  o.require(b == kWide, "tier B set differs");
  o.require(d == kMismatch, "tier D set differs");
  if (o.ok) o.detail = "A = six single-link pairs, B = quad+dual pairs, D = {1-7, 3-5}";
  return o;
}

Outcome anomalies() {
  Outcome o;
  const auto& t = testing::frontier();
  std::set<std::string> fired;
  for (const auto& f : detect_anomalies(testing::reference_fixtures(), t))
    if (f.status == AnomalyStatus::fired) fired.insert(f.signature);
  o.require(fired == std::set<std::string>{"sdma_capped", "numa_non_scaling", "routing_outlier"},
            "reference fixtures fired " + std::to_string(fired.size()) + " signatures");
  for (const auto& f : detect_anomalies(testing::healthy_fixtures(), t))
    o.require(f.status != AnomalyStatus::fired, "healthy fixture fired " + f.signature);
  if (o.ok) o.detail = "reference: all three fire; healthy: none";
  return o;
}

Outcome properties() {
  Outcome o;
  std::mt19937_64 rng(0xacce);
  for (int trial = 0; trial < 200 && o.ok; ++trial) {
    const auto t = oracle::random_topology(rng);
    const oracle::Graph g(t);
    for (int a : t.gcd_ids())
      for (int b : t.gcd_ids()) {
        if (a == b) continue;
        const auto want = oracle::widest(g, a, b, 7);
        const auto got = widest_route(t, a, b, 7);
        o.require(want && got.hops == want->hops && got.bottleneck_gbps == want->bottleneck,
                  "widest mismatch in random topology " + std::to_string(trial));
      }
    const auto m = all_pairs_matrix(t, MatrixMetric::widest_bw, 7);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j)
        o.require(m.at(i, j) == m.at(j, i), "asymmetric matrix");
  }

  const auto& prof = testing::bundled_profile();
  for (auto api : {Api::explicit_copy, Api::zero_copy_kernel, Api::mpi_p2p})
    for (bool sdma : {true, false}) {
      double prev = 0.0;
      for (auto tier : {LinkTier::single, LinkTier::dual, LinkTier::quad}) {
        const auto t = Topology::build({{gcd(0), 0, 0}, {gcd(1), 1, 1}},
                                       {{gcd(0), gcd(1), tier}}, {}, {}, Checks::graph);
        const double bw = *predict_p2p(peer(0, 1, api, sdma), t, prof).bandwidth_gbps;
        o.require(bw >= prev, "prediction decreases with tier");
        prev = bw;
      }
    }

  for (int doc = 0; doc < 100; ++doc) {
    const auto recs = oracle::random_document(rng);
    const auto text = serialize_csv(recs);
    o.require(ingest_csv(text) == recs && serialize_csv(ingest_csv(text)) == text,
              "csv round trip failed on document " + std::to_string(doc));
  }
  if (o.ok)
    o.detail = "200 random topologies match brute force; symmetric matrices; tier-monotone; "
               "100 csv round trips";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"topology/routing reproduction", topology_routing},
      {"SDMA bandwidth tiers", sdma_tiers},
      {"utilization ratios", utilization},
      {"zero-copy kernel efficiency", zero_copy},
      {"CPU-GPU peaks", cpu_gpu},
      {"aggregation law", aggregation},
      {"collective bounds", collective_bounds},
      {"latency tiers", latency_tiers},
      {"anomaly detection", anomalies},
      {"property suites", properties},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.ok;
    std::printf("%s criterion %d (%s): %s\n", o.ok ? "PASS" : "FAIL", n, name, o.detail.c_str());
  }
  std::printf("%d/%d criteria passed\n", n - failures, n);
  return failures == 0 ? 0 : 1;
}
