// SPDX-License-Identifier: Apache-2.0
#include "fabscope/xfer_model.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fabscope/error.hpp"
#include "fabscope/format.hpp"

namespace fabscope {

namespace {

using nlohmann::json;

// One row of the host-allocation movement table, plus the hipMalloc rows used
// for GPU-to-GPU traffic. `xnack` absent means "either setting".
struct MovementRow {
  AllocKind alloc;
  std::optional<bool> xnack;
  std::array<std::optional<Api>, 2> apis;  // accepted calls; nullopt = kernel access
  bool accepts_kernel_access;
  MovementResolution result;
  std::string_view label;
};

constexpr MovementRow kRows[] = {
    {AllocKind::pinned_noncoherent, std::nullopt, {Api::explicit_copy, std::nullopt}, false,
     {Movement::explicit_transfer, false}, "pinned_noncoherent/explicit_copy -> explicit"},
    {AllocKind::pageable, std::nullopt, {Api::explicit_copy, std::nullopt}, false,
     {Movement::explicit_transfer, false}, "pageable/explicit_copy -> explicit"},
    {AllocKind::pinned_coherent, std::nullopt, {Api::zero_copy_kernel, std::nullopt}, true,
     {Movement::zero_copy, true}, "pinned_coherent/kernel access -> zero_copy"},
    {AllocKind::managed, false, {Api::zero_copy_kernel, std::nullopt}, true,
     {Movement::zero_copy, true}, "managed/xnack=0/kernel access -> zero_copy"},
    {AllocKind::managed, true, {Api::page_migration, std::nullopt}, true,
     {Movement::implicit_migration, true}, "managed/xnack=1/page_migration -> implicit"},
    {AllocKind::device, std::nullopt, {Api::explicit_copy, Api::mpi_p2p}, false,
     {Movement::explicit_transfer, false}, "device/explicit_copy|mpi_p2p -> explicit"},
    {AllocKind::device, std::nullopt, {Api::zero_copy_kernel, std::nullopt}, true,
     {Movement::zero_copy, false}, "device/peer kernel access -> zero_copy"},
};

bool row_accepts(const MovementRow& row, std::optional<Api> api) {
  if (!api) return row.accepts_kernel_access;
  return std::find(row.apis.begin(), row.apis.end(), api) != row.apis.end();
}

std::string describe(AllocKind alloc, bool xnack, std::optional<Api> api) {
  return "(" + std::string(to_string(alloc)) + ", xnack=" + (xnack ? "1" : "0") +
         ", " + (api ? std::string(to_string(*api)) : std::string("kernel access")) + ")";
}

[[noreturn]] void fail_profile(const std::string& rule, const std::string& what) {
  throw Error(ErrorCode::invariant, "calibration profile: " + rule + ": " + what, rule);
}

[[noreturn]] void fail_profile_schema(const std::string& rule, const std::string& what) {
  throw Error(ErrorCode::schema, "calibration profile schema: " + rule + ": " + what, rule);
}

void require_gcd(const Topology& t, Placement p, const char* role) {
  if (!p.is_gcd())
    throw Error(ErrorCode::invalid_spec, std::string(role) + " must be a gcd placement");
  (void)t.device(gcd(p.id));
}

std::string route_note(const Route& r) {
  return "widest route " + format_hops(r) + " (" + format_number(r.bottleneck_gbps) +
         " GB/s/dir bottleneck; peer copies assumed to follow the bandwidth-maximizing "
         "route)";
}

}  // namespace

std::string_view to_string(AllocKind kind) {
  switch (kind) {
    case AllocKind::pageable: return "pageable";
    case AllocKind::pinned_noncoherent: return "pinned_noncoherent";
    case AllocKind::pinned_coherent: return "pinned_coherent";
    case AllocKind::managed: return "managed";
    case AllocKind::device: return "device";
  }
  return "?";
}

std::string_view to_string(Api api) {
  switch (api) {
    case Api::explicit_copy: return "explicit_copy";
    case Api::zero_copy_kernel: return "zero_copy_kernel";
    case Api::page_migration: return "page_migration";
    case Api::mpi_p2p: return "mpi_p2p";
  }
  return "?";
}

std::string_view to_string(Movement movement) {
  switch (movement) {
    case Movement::explicit_transfer: return "explicit";
    case Movement::zero_copy: return "zero_copy";
    case Movement::implicit_migration: return "implicit";
  }
  return "?";
}

std::optional<AllocKind> parse_alloc_kind(std::string_view name) {
  for (auto k : {AllocKind::pageable, AllocKind::pinned_noncoherent,
                 AllocKind::pinned_coherent, AllocKind::managed, AllocKind::device})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::optional<Api> parse_api(std::string_view name) {
  for (auto a : {Api::explicit_copy, Api::zero_copy_kernel, Api::page_migration,
                 Api::mpi_p2p})
    if (to_string(a) == name) return a;
  return std::nullopt;
}

std::string to_string(Placement p) {
  return p.is_gcd() ? "gcd:" + std::to_string(p.id) : std::string("host");
}

std::string_view to_string(LatencyTier tier) {
  switch (tier) {
    case LatencyTier::A: return "A";
    case LatencyTier::B: return "B";
    case LatencyTier::C: return "C";
    case LatencyTier::D: return "D";
  }
  return "?";
}

MovementResolution resolve_movement(AllocKind alloc, bool xnack, std::optional<Api> api) {
  for (const auto& row : kRows) {
    if (row.alloc != alloc) continue;
    if (row.xnack && *row.xnack != xnack) continue;
    if (row_accepts(row, api)) return row.result;
  }
  // Closest rows: same allocation kind first, otherwise the same call.
  std::vector<std::string_view> closest;
  for (const auto& row : kRows)
    if (row.alloc == alloc) closest.push_back(row.label);
  if (closest.empty()) {
    for (const auto& row : kRows)
      if (row_accepts(row, api)) closest.push_back(row.label);
  }
  std::string msg = "combination " + describe(alloc, xnack, api) +
                    " is not in the movement table; closest valid rows:";
  for (std::size_t i = 0; i < closest.size(); ++i)
    msg += (i ? "; " : " ") + std::string(closest[i]);
  throw Error(ErrorCode::invalid_spec, msg, "movement table");
}

void CalibrationProfile::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0)) fail_profile("non-positive bandwidth", name);
  };
  auto factor = [](const char* name, double v) {
    if (!(v > 0.0 && v <= 1.0)) fail_profile("factor out of range", name);
  };
  positive("memcpy_h2d_pinned_gbps", memcpy_h2d_pinned_gbps);
  if (memcpy_h2d_pageable_gbps) positive("memcpy_h2d_pageable_gbps", *memcpy_h2d_pageable_gbps);
  positive("zero_copy_h2d_gbps", zero_copy_h2d_gbps);
  positive("page_migration_gbps", page_migration_gbps);
  positive("sdma_cap_gbps", sdma_cap_gbps);
  positive("local_stream_gbps", local_stream_gbps);
  if (cpu_gpu_per_gcd_bidir_gbps)
    positive("cpu_gpu_per_gcd_bidir_gbps", *cpu_gpu_per_gcd_bidir_gbps);
  factor("sdma_link_efficiency", sdma_link_efficiency);
  factor("kernel_bidir_efficiency", kernel_bidir_efficiency);
  factor("mpi_overhead_factor_range[0]", mpi_overhead_factor_range.first);
  factor("mpi_overhead_factor_range[1]", mpi_overhead_factor_range.second);
  if (mpi_overhead_factor_range.first > mpi_overhead_factor_range.second)
    fail_profile("factor out of range", "mpi_overhead_factor_range is reversed");
}

CalibrationProfile CalibrationProfile::load(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema,
                std::string("calibration profile schema: not JSON: ") + e.what(),
                "json syntax");
  }
  if (!doc.is_object()) fail_profile_schema("document", "top level must be an object");

  auto number = [&](const char* key) -> double {
    if (!doc.contains(key)) fail_profile_schema("missing field", key);
    if (!doc.at(key).is_number()) fail_profile_schema("field type", key);
    return doc.at(key).get<double>();
  };

  CalibrationProfile p;
  p.memcpy_h2d_pinned_gbps = number("memcpy_h2d_pinned_gbps");
  p.zero_copy_h2d_gbps = number("zero_copy_h2d_gbps");
  p.page_migration_gbps = number("page_migration_gbps");
  p.sdma_cap_gbps = number("sdma_cap_gbps");
  p.sdma_link_efficiency = number("sdma_link_efficiency");
  p.kernel_bidir_efficiency = number("kernel_bidir_efficiency");
  p.local_stream_gbps = number("local_stream_gbps");

  if (!doc.contains("memcpy_h2d_pageable_gbps"))
    fail_profile_schema("missing field", "memcpy_h2d_pageable_gbps");
  const auto& pageable = doc.at("memcpy_h2d_pageable_gbps");
  if (pageable.is_number()) {
    p.memcpy_h2d_pageable_gbps = pageable.get<double>();
    p.memcpy_h2d_pageable_unstable = false;
  } else if (pageable.is_object()) {
    if (pageable.contains("value") && pageable.at("value").is_number())
      p.memcpy_h2d_pageable_gbps = pageable.at("value").get<double>();
    else if (pageable.contains("value") && !pageable.at("value").is_null())
      fail_profile_schema("field type", "memcpy_h2d_pageable_gbps.value");
    p.memcpy_h2d_pageable_unstable = pageable.value("unstable", true);
  } else if (pageable.is_null()) {
    p.memcpy_h2d_pageable_unstable = true;
  } else {
    fail_profile_schema("field type", "memcpy_h2d_pageable_gbps");
  }

  if (!doc.contains("mpi_overhead_factor_range"))
    fail_profile_schema("missing field", "mpi_overhead_factor_range");
  const auto& range = doc.at("mpi_overhead_factor_range");
  if (!range.is_array() || range.size() != 2 || !range[0].is_number() ||
      !range[1].is_number())
    fail_profile_schema("field type", "mpi_overhead_factor_range");
  p.mpi_overhead_factor_range = {range[0].get<double>(), range[1].get<double>()};

  if (doc.contains("cpu_gpu_per_gcd_bidir_gbps")) {
    const auto& b1 = doc.at("cpu_gpu_per_gcd_bidir_gbps");
    if (b1.is_number()) p.cpu_gpu_per_gcd_bidir_gbps = b1.get<double>();
    else if (!b1.is_null()) fail_profile_schema("field type", "cpu_gpu_per_gcd_bidir_gbps");
  }

  p.validate();
  return p;
}

CalibrationProfile CalibrationProfile::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open calibration profile: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load(buf.str());
}

std::string CalibrationProfile::to_json() const {
  json doc;
  doc["memcpy_h2d_pinned_gbps"] = memcpy_h2d_pinned_gbps;
  doc["memcpy_h2d_pageable_gbps"] = {
      {"value", memcpy_h2d_pageable_gbps ? json(*memcpy_h2d_pageable_gbps) : json(nullptr)},
      {"unstable", memcpy_h2d_pageable_unstable}};
  doc["zero_copy_h2d_gbps"] = zero_copy_h2d_gbps;
  doc["page_migration_gbps"] = page_migration_gbps;
  doc["sdma_cap_gbps"] = sdma_cap_gbps;
  doc["sdma_link_efficiency"] = sdma_link_efficiency;
  doc["kernel_bidir_efficiency"] = kernel_bidir_efficiency;
  doc["mpi_overhead_factor_range"] = {mpi_overhead_factor_range.first,
                                      mpi_overhead_factor_range.second};
  doc["local_stream_gbps"] = local_stream_gbps;
  doc["cpu_gpu_per_gcd_bidir_gbps"] =
      cpu_gpu_per_gcd_bidir_gbps ? json(*cpu_gpu_per_gcd_bidir_gbps) : json(nullptr);
  return doc.dump(2);
}

PerfPrediction predict_h2d(const TransferSpec& spec, const CalibrationProfile& profile,
                           double cpu_link_gbps) {
  if (spec.src.is_gcd() || !spec.dst.is_gcd())
    throw Error(ErrorCode::invalid_spec, "h2d prediction needs src=host and dst=gcd");
  if (spec.alloc == AllocKind::device || spec.api == Api::mpi_p2p)
    throw Error(ErrorCode::invalid_spec,
                "h2d prediction needs a host allocation and a host transfer api");
  const auto how = resolve_movement(spec.alloc, spec.xnack, spec.api);

  PerfPrediction p;
  p.direction = Direction::unidir;
  p.small_transfer = spec.size_bytes < kSmallTransferBytes;

  double value = 0.0;
  switch (how.movement) {
    case Movement::explicit_transfer:
      if (spec.alloc == AllocKind::pageable) {
        if (profile.memcpy_h2d_pageable_unstable || !profile.memcpy_h2d_pageable_gbps) {
          p.unstable = true;
          p.rule = "pageable explicit copy: unstable, no point estimate";
          return p;
        }
        value = *profile.memcpy_h2d_pageable_gbps;
        p.rule = "pageable explicit copy plateau";
      } else {
        value = profile.memcpy_h2d_pinned_gbps;
        p.rule = "pinned explicit copy plateau";
      }
      break;
    case Movement::zero_copy:
      value = profile.zero_copy_h2d_gbps;
      p.rule = "zero-copy kernel access plateau (" + std::string(to_string(spec.alloc)) + ")";
      break;
    case Movement::implicit_migration:
      value = profile.page_migration_gbps;
      p.rule = "managed page migration plateau (xnack=1)";
      break;
  }
  if (value > cpu_link_gbps) {
    value = cpu_link_gbps;
    p.rule += ", clamped to host link capacity " + format_number(cpu_link_gbps) + " GB/s";
  }
  if (p.small_transfer) p.rule += "; small-transfer regime (< 32 MiB), plateau may not hold";
  p.bandwidth_gbps = value;
  return p;
}

PerfPrediction predict_h2d(const TransferSpec& spec, const Topology& t,
                           const CalibrationProfile& profile) {
  if (spec.dst.is_gcd()) (void)t.device(gcd(spec.dst.id));
  return predict_h2d(spec, profile, t.tiers().at(LinkTier::cpu));
}

double zero_copy_unidir_gbps(const Topology& t, const CalibrationProfile& profile, int a,
                             int b, int max_hops) {
  return profile.kernel_bidir_efficiency * widest_route(t, a, b, max_hops).bottleneck_gbps;
}

PerfPrediction predict_p2p(const TransferSpec& spec, const Topology& t,
                           const CalibrationProfile& profile, int max_hops) {
  require_gcd(t, spec.src, "src");
  require_gcd(t, spec.dst, "dst");
  if (spec.src.id == spec.dst.id)
    throw Error(ErrorCode::invalid_spec, "p2p prediction needs two distinct gcds");
  if (spec.alloc != AllocKind::device)
    throw Error(ErrorCode::invalid_spec, "p2p prediction needs alloc=device");
  (void)resolve_movement(spec.alloc, spec.xnack, spec.api);

  PerfPrediction p;
  const auto route = widest_route(t, spec.src.id, spec.dst.id, max_hops);
  const double bottleneck = route.bottleneck_gbps;
  p.route = route;
  p.latency_tier = classify_latency_tier(t, spec.src.id, spec.dst.id);
  p.small_transfer = spec.size_bytes < kSmallTransferBytes;

  const double kernel_unidir = profile.kernel_bidir_efficiency * bottleneck;
  const bool sdma_path =
      (spec.api == Api::explicit_copy || spec.api == Api::mpi_p2p) && spec.sdma;
  if (sdma_path) {
    const double scaled = profile.sdma_link_efficiency * bottleneck;
    p.bandwidth_gbps = std::min(scaled, profile.sdma_cap_gbps);
    p.direction = Direction::unidir;
    p.rule = std::string(to_string(spec.api)) + " via SDMA: min(" +
             format_number(profile.sdma_link_efficiency) + " x " +
             format_number(bottleneck) + ", cap " + format_number(profile.sdma_cap_gbps) +
             ") GB/s";
  } else if (spec.api == Api::zero_copy_kernel) {
    p.bandwidth_gbps = profile.kernel_bidir_efficiency * 2.0 * bottleneck;
    p.direction = Direction::bidir;
    p.rule = "zero-copy kernel: " + format_number(profile.kernel_bidir_efficiency) +
             " x bidirectional " + format_number(2.0 * bottleneck) + " GB/s";
  } else if (spec.api == Api::mpi_p2p) {
    const auto [lo, hi] = profile.mpi_overhead_factor_range;
    p.interval = std::pair{lo * kernel_unidir, hi * kernel_unidir};
    p.bandwidth_gbps = 0.5 * (lo + hi) * kernel_unidir;
    p.direction = Direction::unidir;
    p.rule = "mpi_p2p without SDMA: [" + format_number(lo) + ", " + format_number(hi) +
             "] x zero-copy kernel unidirectional " + format_number(kernel_unidir) +
             " GB/s";
  } else {
    // explicit_copy with SDMA disabled runs a blit kernel.
    p.bandwidth_gbps = kernel_unidir;
    p.direction = Direction::unidir;
    p.rule = "explicit_copy without SDMA (blit kernel): " +
             format_number(profile.kernel_bidir_efficiency) + " x " +
             format_number(bottleneck) + " GB/s";
  }
  p.rule += "; " + route_note(route);
  if (p.small_transfer) p.rule += "; small-transfer regime (< 32 MiB), plateau may not hold";
  return p;
}

// Mismatch is checked first: the copy engine's route, not the direct link,
// sets the latency.
LatencyTier classify_latency_tier(const Topology& t, int a, int b) {
  const auto c = classify_pair(t, a, b);
  if (c.routing_mismatch) return LatencyTier::D;
  if (const auto tier = t.link_tier(gcd(a), gcd(b))) {
    return *tier == LinkTier::single ? LatencyTier::A : LatencyTier::B;
  }
  return LatencyTier::C;
}

PerfPrediction predict_multi_gpu(std::span<const int> gcds, const Topology& t,
                                 const CalibrationProfile& profile) {
  if (gcds.empty())
    throw Error(ErrorCode::invalid_argument, "multi-GPU prediction needs at least one gcd");
  std::map<int, int> per_domain;
  std::set<int> unique(gcds.begin(), gcds.end());
  for (int id : unique) ++per_domain[t.device(gcd(id)).numa_domain];
  if (!profile.cpu_gpu_per_gcd_bidir_gbps)
    throw Error(ErrorCode::missing_calibration,
                "cpu_gpu_per_gcd_bidir_gbps is not set in the calibration profile");
  const double per_gcd = *profile.cpu_gpu_per_gcd_bidir_gbps;

  double aggregate = 0.0;
  for (const auto& [domain, count] : per_domain)
    aggregate += std::min(per_gcd * count, per_gcd);

  PerfPrediction p;
  p.bandwidth_gbps = aggregate;
  p.direction = Direction::bidir;
  p.rule = "numa aggregation: " + std::to_string(unique.size()) + " gcds over " +
           std::to_string(per_domain.size()) + " numa domains x " + format_number(per_gcd) +
           " GB/s per domain";
  return p;
}

PerfPrediction predict_local_stream(const Topology& t, const CalibrationProfile& profile) {
  PerfPrediction p;
  p.bandwidth_gbps = std::min(profile.local_stream_gbps, t.memory().hbm_gbps);
  p.direction = Direction::bidir;
  p.rule = "local STREAM copy plateau (" +
           format_number(100.0 * *p.bandwidth_gbps / t.memory().hbm_gbps) + "% of HBM " +
           format_number(t.memory().hbm_gbps) + " GB/s)";
  return p;
}

double stream_bandwidth(double elapsed_s, double bytes_per_buffer, int n_gpus) {
  if (!(elapsed_s > 0.0) || !(bytes_per_buffer > 0.0) || n_gpus < 1)
    throw Error(ErrorCode::invalid_argument,
                "stream_bandwidth needs elapsed > 0, bytes > 0, n_gpus >= 1");
  return static_cast<double>(n_gpus) * 2.0 * bytes_per_buffer / elapsed_s / 1e9;
}

}  // namespace fabscope
