// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fabscope {

// Link bundles between dies. `cpu` is the single die-to-host link.
enum class LinkTier : std::uint8_t { single, dual, quad, cpu };

inline constexpr std::array<LinkTier, 4> kAllTiers = {
    LinkTier::single, LinkTier::dual, LinkTier::quad, LinkTier::cpu};

constexpr int links_count(LinkTier tier) {
  switch (tier) {
    case LinkTier::single: return 1;
    case LinkTier::dual: return 2;
    case LinkTier::quad: return 4;
    case LinkTier::cpu: return 1;
  }
  return 0;
}

std::string_view to_string(LinkTier tier);
std::optional<LinkTier> parse_link_tier(std::string_view name);

enum class Direction : std::uint8_t { unidir, bidir };
std::string_view to_string(Direction dir);

// GCD ids and NUMA ids live in separate namespaces; ordering puts every GCD
// before every NUMA domain.
enum class DeviceKind : std::uint8_t { gcd, numa };
std::string_view to_string(DeviceKind kind);

struct DeviceRef {
  DeviceKind kind = DeviceKind::gcd;
  int id = 0;

  auto operator<=>(const DeviceRef&) const = default;
};

constexpr DeviceRef gcd(int id) { return {DeviceKind::gcd, id}; }
constexpr DeviceRef numa(int id) { return {DeviceKind::numa, id}; }

/// Renders as "3" for a GCD and "numa:3" for a NUMA domain.
std::string to_string(DeviceRef ref);

struct Device {
  DeviceRef ref;
  int physical_gpu = -1;  // gcd only
  int numa_domain = -1;   // gcd only
};

struct Link {
  DeviceRef a;
  DeviceRef b;
  LinkTier tier = LinkTier::single;
};

struct TierTable {
  // Indexed by LinkTier; per-direction GB/s (1 GB/s = 1e9 bytes/s).
  std::array<double, 4> per_direction_gbps = {50.0, 100.0, 200.0, 36.0};

  double at(LinkTier tier) const {
    return per_direction_gbps[static_cast<std::size_t>(tier)];
  }
  double bandwidth(LinkTier tier, Direction dir) const {
    return dir == Direction::bidir ? 2.0 * at(tier) : at(tier);
  }
};

struct MemorySpec {
  double hbm_gbps = 1600.0;
  double cpu_mem_gbps = 204.8;
  double cpu_mem_latency_ns = 96.0;
};

struct Neighbor {
  DeviceRef device;
  LinkTier tier;

  bool operator==(const Neighbor&) const = default;
};

/// Which invariants `Topology::build` enforces. `graph` checks only what
/// makes the object a well-formed tiered graph; `node` additionally checks
/// the multi-GPU node shape (sibling quad links, one host link per GCD,
/// GPU-to-NUMA bijection, connected GCD graph).
enum class Checks : std::uint8_t { graph, node };

/// Immutable node graph of GCDs, NUMA domains and tiered links.
/// Safe for concurrent reads once constructed.
class Topology {
 public:
  static Topology build(std::vector<Device> devices, std::vector<Link> links,
                        TierTable tiers = {}, MemorySpec memory = {},
                        Checks checks = Checks::node);

  /// Parses and fully validates a topology JSON document.
  static Topology load(std::string_view json_text);
  static Topology load_file(const std::filesystem::path& path);

  std::span<const Device> devices() const { return devices_; }
  std::span<const Link> links() const { return links_; }
  const TierTable& tiers() const { return tiers_; }
  const MemorySpec& memory() const { return memory_; }

  bool contains(DeviceRef ref) const;
  const Device& device(DeviceRef ref) const;
  std::vector<int> gcd_ids() const;
  std::size_t count(DeviceKind kind) const;

  std::optional<LinkTier> link_tier(DeviceRef a, DeviceRef b) const;
  std::optional<double> theoretical_bandwidth(DeviceRef a, DeviceRef b,
                                              Direction dir) const;
  /// Directly linked devices, GCDs first then NUMA domains, ascending id.
  std::vector<Neighbor> neighbors(DeviceRef ref) const;

  std::string to_json() const;

 private:
  Topology() = default;

  std::vector<Device> devices_;
  std::vector<Link> links_;
  TierTable tiers_;
  MemorySpec memory_;
  std::map<DeviceRef, std::vector<Neighbor>> adjacency_;
};

}  // namespace fabscope
