// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "fabscope/error.hpp"
#include "fabscope/format.hpp"
#include "fabscope/measurements.hpp"
#include "fabscope/routing.hpp"

namespace fabscope {

namespace {

using PairKey = std::pair<int, int>;

PairKey unordered(int a, int b) { return a < b ? PairKey{a, b} : PairKey{b, a}; }

std::string pair_name(PairKey p) {
  return std::to_string(p.first) + "-" + std::to_string(p.second);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

bool env_off(const MeasurementRecord& r, std::string_view key) {
  const auto v = r.env_value(key);
  return v && *v == "0";
}

bool sdma_enabled(const MeasurementRecord& r, bool peer) {
  if (env_off(r, "HSA_ENABLE_SDMA")) return false;
  return !(peer && env_off(r, "HSA_ENABLE_PEER_SDMA"));
}

std::optional<std::vector<int>> visible_devices(const MeasurementRecord& r) {
  const auto v = r.env_value("HIP_VISIBLE_DEVICES");
  if (!v || v->empty()) return std::nullopt;
  std::vector<int> ids;
  std::string_view rest = *v;
  while (true) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    int id = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), id);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty())
      return std::nullopt;
    ids.push_back(id);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ids;
}

bool is_gcd_pair(const MeasurementRecord& r, const Topology& t) {
  return r.src.kind == EndpointKind::gcd && r.dst.kind == EndpointKind::gcd &&
         r.src.id != r.dst.id && t.contains(gcd(r.src.id)) && t.contains(gcd(r.dst.id));
}

bool is_p2p_latency(const MeasurementRecord& r, const Topology& t) {
  return r.benchmark == bench::p2p && r.metric == Metric::latency_us && is_gcd_pair(r, t);
}

bool is_bandwidth(Metric m) { return m != Metric::latency_us; }

struct LatencyTierStats {
  std::map<LatencyTier, double> medians;  // A, B, D only when present
};

class Validator {
 public:
  Validator(std::span<const MeasurementRecord> records, const Topology& t,
            const CalibrationProfile& profile, double tolerance)
      : records_(records), t_(t), profile_(profile), tolerance_(tolerance) {
    std::map<LatencyTier, std::vector<double>> by_tier;
    std::optional<double> lowest;
    for (const auto& r : records_) {
      if (!is_p2p_latency(r, t_)) continue;
      by_tier[tier_of(r.src.id, r.dst.id)].push_back(r.value);
      lowest = lowest ? std::min(*lowest, r.value) : r.value;
    }
    for (auto& [tier, values] : by_tier)
      if (tier != LatencyTier::C) tier_medians_[tier] = median(values);
    l_min_us_ = lowest.value_or(kReferenceMinLatencyUs);
  }

  RecordVerdict judge(std::size_t index) const {
    RecordVerdict v;
    v.index = index;
    try {
      judge_into(records_[index], v);
    } catch (const Error& e) {
      v.verdict = Verdict::unmodeled;
      v.predicted.reset();
      v.relative_error.reset();
      v.rule = std::string("not modeled: ") + e.what();
    }
    return v;
  }

 private:
  LatencyTier tier_of(int a, int b) const {
    const auto key = unordered(a, b);
    auto it = tier_cache_.find(key);
    if (it != tier_cache_.end()) return it->second;
    const auto tier = classify_latency_tier(t_, a, b);
    tier_cache_.emplace(key, tier);
    return tier;
  }

  void against(RecordVerdict& v, double predicted, double measured, std::string rule) const {
    v.predicted = predicted;
    v.relative_error = std::abs(measured - predicted) / predicted;
    v.verdict = *v.relative_error <= tolerance_ ? Verdict::pass : Verdict::fail;
    v.rule = std::move(rule);
  }

  static void unmodeled(RecordVerdict& v, std::string why) {
    v.verdict = Verdict::unmodeled;
    v.rule = "not modeled: " + std::move(why);
  }

  void judge_into(const MeasurementRecord& r, RecordVerdict& v) const {
    const auto& b = r.benchmark;
    if (b == bench::stream_local) return judge_local(r, v);
    if (b.starts_with("h2d_")) return judge_h2d(r, v);
    if (b == bench::p2p || b == bench::p2p_stream || b == bench::mpi_p2p)
      return judge_peer(r, v);
    if (b == bench::multi_stream) return judge_multi(r, v);
    if (auto coll = parse_collective_benchmark(b)) return judge_collective(r, *coll, v);
    unmodeled(v, "unknown benchmark '" + b + "'");
  }

  void judge_local(const MeasurementRecord& r, RecordVerdict& v) const {
    if (!is_bandwidth(r.metric)) return unmodeled(v, "local stream latency");
    const auto p = predict_local_stream(t_, profile_);
    against(v, *p.bandwidth_gbps, r.value, p.rule);
  }

  void judge_h2d(const MeasurementRecord& r, RecordVerdict& v) const {
    if (r.src.kind != EndpointKind::host || r.dst.kind != EndpointKind::gcd)
      return unmodeled(v, "h2d rows need src=host and dst=gcd");
    if (r.metric != Metric::bandwidth_unidir_gbps)
      return unmodeled(v, "h2d rows are modeled as unidirectional bandwidth");

    TransferSpec spec;
    spec.src = Placement::host();
    spec.dst = Placement::on_gcd(r.dst.id);
    spec.size_bytes = r.size_bytes;
    const auto& b = r.benchmark;
    if (b == bench::h2d_pageable) {
      spec.alloc = AllocKind::pageable;
      spec.api = Api::explicit_copy;
    } else if (b == bench::h2d_pinned) {
      spec.alloc = AllocKind::pinned_noncoherent;
      spec.api = Api::explicit_copy;
    } else if (b == bench::h2d_pinned_zero_copy) {
      spec.alloc = AllocKind::pinned_coherent;
      spec.api = Api::zero_copy_kernel;
    } else if (b == bench::h2d_managed_zero_copy) {
      spec.alloc = AllocKind::managed;
      spec.api = Api::zero_copy_kernel;
    } else if (b == bench::h2d_managed_migration) {
      spec.alloc = AllocKind::managed;
      spec.api = Api::page_migration;
      spec.xnack = true;
    } else {
      return unmodeled(v, "unknown benchmark '" + b + "'");
    }
    if (const auto x = r.env_value("HSA_XNACK"); x && spec.alloc == AllocKind::managed) {
      if ((*x == "1") != spec.xnack)
        return unmodeled(v, "HSA_XNACK=" + std::string(*x) + " contradicts " + b);
    }
    if (spec.size_bytes < kSmallTransferBytes)
      return unmodeled(v, "small-transfer regime (< 32 MiB)");
    const auto p = predict_h2d(spec, t_, profile_);
    if (p.unstable) return unmodeled(v, p.rule);
    against(v, *p.bandwidth_gbps, r.value, p.rule);
  }

  void judge_peer(const MeasurementRecord& r, RecordVerdict& v) const {
    if (!is_gcd_pair(r, t_)) return unmodeled(v, "peer rows need two distinct known gcds");
    if (r.metric == Metric::latency_us) {
      if (r.benchmark != bench::p2p) return unmodeled(v, "latency only modeled for p2p");
      return judge_latency_tier(r, v);
    }
    if (r.size_bytes < kSmallTransferBytes)
      return unmodeled(v, "small-transfer regime (< 32 MiB)");

    TransferSpec spec;
    spec.src = Placement::on_gcd(r.src.id);
    spec.dst = Placement::on_gcd(r.dst.id);
    spec.size_bytes = r.size_bytes;
    spec.alloc = AllocKind::device;
    const bool bidir = r.metric == Metric::bandwidth_bidir_gbps;

    if (r.benchmark == bench::p2p_stream) {
      spec.api = Api::zero_copy_kernel;
      const auto p = predict_p2p(spec, t_, profile_);
      const double predicted = bidir ? *p.bandwidth_gbps : 0.5 * *p.bandwidth_gbps;
      return against(v, predicted, r.value,
                     bidir ? p.rule : p.rule + "; halved for unidirectional");
    }
    if (bidir) return unmodeled(v, "bidirectional explicit copies are not modeled");
    const bool mpi = r.benchmark == bench::mpi_p2p;
    spec.api = mpi ? Api::mpi_p2p : Api::explicit_copy;
    spec.sdma = sdma_enabled(r, !mpi);
    const auto p = predict_p2p(spec, t_, profile_);
    if (!p.interval) return against(v, *p.bandwidth_gbps, r.value, p.rule);

    // Interval prediction: distance to the nearest end of the band.
    const auto [lo, hi] = *p.interval;
    v.predicted = *p.bandwidth_gbps;
    v.relative_error = r.value < lo ? (lo - r.value) / lo
                       : r.value > hi ? (r.value - hi) / hi
                                      : 0.0;
    v.verdict = *v.relative_error <= tolerance_ ? Verdict::pass : Verdict::fail;
    v.rule = p.rule;
  }

  void judge_latency_tier(const MeasurementRecord& r, RecordVerdict& v) const {
    const auto tier = tier_of(r.src.id, r.dst.id);
    if (tier == LatencyTier::C)
      return unmodeled(v, "latency tier C carries no ordering constraint");
    const auto mine = tier_medians_.at(tier);
    bool ordered = true;
    std::string others;
    for (const auto& [other, med] : tier_medians_) {
      if (other == tier) continue;
      if (!others.empty()) others += ", ";
      others += std::string(to_string(other)) + "=" + format_number(med);
      if ((other < tier && !(med < mine)) || (other > tier && !(mine < med))) ordered = false;
    }
    if (others.empty())
      return unmodeled(v, "only latency tier " + std::string(to_string(tier)) +
                              " present; ordering cannot be checked");
    v.verdict = ordered ? Verdict::pass : Verdict::fail;
    v.rule = "latency tier " + std::string(to_string(tier)) + " median " +
             format_number(mine) + " us vs " + others + " (expect A < B < D)";
  }

  void judge_multi(const MeasurementRecord& r, RecordVerdict& v) const {
    if (r.metric != Metric::bandwidth_bidir_gbps)
      return unmodeled(v, "multi-GPU stream is modeled as bidirectional bandwidth");
    const auto ids = visible_devices(r);
    if (!ids) return unmodeled(v, "HIP_VISIBLE_DEVICES missing or malformed");
    if (!profile_.cpu_gpu_per_gcd_bidir_gbps)
      return unmodeled(v, "cpu_gpu_per_gcd_bidir_gbps not calibrated");
    const auto p = predict_multi_gpu(*ids, t_, profile_);
    against(v, *p.bandwidth_gbps, r.value, p.rule);
  }

  void judge_collective(const MeasurementRecord& r, const CollectiveBenchmark& coll,
                        RecordVerdict& v) const {
    if (r.metric != Metric::latency_us)
      return unmodeled(v, "collectives are modeled as latency");
    const double bound = lower_bound_us(coll.op, l_min_us_);
    v.predicted = bound;
    v.relative_error = r.value >= bound ? 0.0 : (bound - r.value) / bound;
    v.verdict = *v.relative_error <= tolerance_ ? Verdict::pass : Verdict::fail;
    v.rule = "lower bound " + std::to_string(passes(coll.op)) + " pass(es) x " +
             format_number(l_min_us_) + " us";
  }

  std::span<const MeasurementRecord> records_;
  const Topology& t_;
  const CalibrationProfile& profile_;
  double tolerance_;
  std::map<LatencyTier, double> tier_medians_;
  double l_min_us_ = kReferenceMinLatencyUs;
  mutable std::map<PairKey, LatencyTier> tier_cache_;
};

AnomalyFinding sdma_capped(std::span<const MeasurementRecord> records, const Topology& t) {
  AnomalyFinding f;
  f.signature = "sdma_capped";
  std::vector<double> quad;
  std::vector<double> dual;
  std::set<PairKey> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.benchmark != bench::p2p || r.metric != Metric::bandwidth_unidir_gbps) continue;
    if (!is_gcd_pair(r, t) || !sdma_enabled(r, true) || r.size_bytes < kSmallTransferBytes)
      continue;
    const auto tier = t.link_tier(gcd(r.src.id), gcd(r.dst.id));
    if (tier == LinkTier::quad) quad.push_back(r.value);
    else if (tier == LinkTier::dual) dual.push_back(r.value);
    else continue;
    f.evidence.push_back(i);
    seen.insert(unordered(r.src.id, r.dst.id));
  }
  for (const auto& l : t.links()) {
    if (l.tier != LinkTier::quad && l.tier != LinkTier::dual) continue;
    const auto key = unordered(l.a.id, l.b.id);
    if (!seen.contains(key))
      f.missing.push_back(std::string(to_string(l.tier)) + " pair " + pair_name(key));
  }
  if (quad.empty() || dual.empty()) {
    f.status = AnomalyStatus::inconclusive;
    f.detail = "needs SDMA explicit-copy bandwidth on both quad and dual links";
    return f;
  }
  const double q = median(quad);
  const double d = median(dual);
  const double dual_cap = t.tiers().at(LinkTier::dual);
  const bool flat = std::abs(q - d) <= 0.10 * std::max(q, d);
  const bool low = q < 0.6 * dual_cap && d < 0.6 * dual_cap;
  f.status = flat && low ? AnomalyStatus::fired : AnomalyStatus::clear;
  f.detail = "quad median " + format_number(q) + " GB/s, dual median " + format_number(d) +
             " GB/s, dual link capacity " + format_number(dual_cap) + " GB/s/dir";
  return f;
}

AnomalyFinding numa_non_scaling(std::span<const MeasurementRecord> records, const Topology& t) {
  AnomalyFinding f;
  f.signature = "numa_non_scaling";
  std::vector<double> single;
  std::vector<double> same_gpu;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.benchmark != bench::multi_stream || !is_bandwidth(r.metric)) continue;
    const auto ids = visible_devices(r);
    if (!ids) continue;
    const bool known = std::all_of(ids->begin(), ids->end(),
                                   [&](int id) { return t.contains(gcd(id)); });
    if (!known) continue;
    if (ids->size() == 1) {
      single.push_back(r.value);
      f.evidence.push_back(i);
    } else if (ids->size() == 2 && (*ids)[0] != (*ids)[1] &&
               t.device(gcd((*ids)[0])).physical_gpu == t.device(gcd((*ids)[1])).physical_gpu) {
      same_gpu.push_back(r.value);
      f.evidence.push_back(i);
    }
  }
  if (single.empty()) f.missing.push_back("1-gcd multi_stream run");
  if (same_gpu.empty()) f.missing.push_back("2-gcd same-GPU multi_stream run");
  if (!f.missing.empty()) {
    f.status = AnomalyStatus::inconclusive;
    f.detail = "needs 1-gcd and same-GPU 2-gcd aggregate bandwidth";
    return f;
  }
  const double one = median(single);
  const double two = median(same_gpu);
  f.status = std::abs(two - one) <= 0.10 * one ? AnomalyStatus::fired : AnomalyStatus::clear;
  f.detail = "1-gcd median " + format_number(one) + " GB/s, same-GPU 2-gcd median " +
             format_number(two) + " GB/s";
  return f;
}

AnomalyFinding routing_outlier(std::span<const MeasurementRecord> records, const Topology& t) {
  AnomalyFinding f;
  f.signature = "routing_outlier";
  std::map<PairKey, std::vector<double>> by_pair;
  std::map<PairKey, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!is_p2p_latency(r, t)) continue;
    const auto key = unordered(r.src.id, r.dst.id);
    by_pair[key].push_back(r.value);
    rows[key].push_back(i);
  }
  const auto m = all_pairs_matrix(t, MatrixMetric::mismatch);
  std::vector<PairKey> mismatch;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (m.at(i, j) != 0.0) mismatch.push_back({m.ids[i], m.ids[j]});

  if (by_pair.empty()) {
    f.status = AnomalyStatus::inconclusive;
    f.detail = "no p2p latency records";
    for (const auto& p : mismatch) f.missing.push_back("pair " + pair_name(p));
    return f;
  }
  std::vector<double> pair_medians;
  for (const auto& [key, values] : by_pair) pair_medians.push_back(median(values));
  const double matrix_median = median(pair_medians);

  std::vector<std::string> outliers;
  for (const auto& p : mismatch) {
    auto it = by_pair.find(p);
    if (it == by_pair.end()) {
      f.missing.push_back("pair " + pair_name(p));
      continue;
    }
    const double value = median(it->second);
    if (value > 1.5 * matrix_median) {
      outliers.push_back(pair_name(p) + "=" + format_number(value));
      const auto& idx = rows.at(p);
      f.evidence.insert(f.evidence.end(), idx.begin(), idx.end());
    }
  }
  std::sort(f.evidence.begin(), f.evidence.end());
  if (!outliers.empty()) f.status = AnomalyStatus::fired;
  else if (!f.missing.empty()) f.status = AnomalyStatus::inconclusive;
  else f.status = AnomalyStatus::clear;
  f.detail = "matrix median " + format_number(matrix_median) + " us, threshold " +
             format_number(1.5 * matrix_median) + " us";
  for (std::size_t i = 0; i < outliers.size(); ++i)
    f.detail += (i ? ", " : "; outliers ") + outliers[i];
  return f;
}

}  // namespace

std::optional<CollectiveBenchmark> parse_collective_benchmark(std::string_view name) {
  const auto underscore = name.find('_');
  if (underscore == std::string_view::npos || underscore == 0) return std::nullopt;
  const auto op = parse_collective(name.substr(underscore + 1));
  if (!op) return std::nullopt;
  return CollectiveBenchmark{std::string(name.substr(0, underscore)), *op};
}

LatencySeries collective_series(std::span<const MeasurementRecord> records,
                                std::string_view backend) {
  LatencySeries s;
  s.label = std::string(backend);
  std::map<std::pair<CollectiveKind, int>, std::vector<double>> samples;
  for (const auto& r : records) {
    if (r.metric != Metric::latency_us || r.dst.kind != EndpointKind::group) continue;
    const auto coll = parse_collective_benchmark(r.benchmark);
    if (!coll || coll->backend != backend) continue;
    samples[{coll->op, r.dst.id}].push_back(r.value);
  }
  for (auto& [key, values] : samples) s.points_us[key] = median(std::move(values));
  return s;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::unmodeled: return "unmodeled";
  }
  return "?";
}

std::string_view to_string(AnomalyStatus status) {
  switch (status) {
    case AnomalyStatus::fired: return "fired";
    case AnomalyStatus::clear: return "clear";
    case AnomalyStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

std::size_t ValidationReport::count(Verdict v) const {
  return static_cast<std::size_t>(std::count_if(
      verdicts.begin(), verdicts.end(), [v](const RecordVerdict& x) { return x.verdict == v; }));
}

ValidationReport validate(std::span<const MeasurementRecord> records, const Topology& t,
                          const CalibrationProfile& profile, double tolerance) {
  if (!(tolerance >= 0.0))
    throw Error(ErrorCode::invalid_argument, "tolerance must be non-negative");
  const Validator validator(records, t, profile, tolerance);
  ValidationReport report;
  report.tolerance = tolerance;
  report.verdicts.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) report.verdicts.push_back(validator.judge(i));
  report.anomalies = detect_anomalies(records, t);
  return report;
}

std::vector<AnomalyFinding> detect_anomalies(std::span<const MeasurementRecord> records,
                                             const Topology& t) {
  return {sdma_capped(records, t), numa_non_scaling(records, t), routing_outlier(records, t)};
}

}  // namespace fabscope
