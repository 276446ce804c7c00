// SPDX-License-Identifier: Apache-2.0
#include "fabscope/topology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fabscope/error.hpp"

namespace fabscope {

namespace {

using nlohmann::json;

[[noreturn]] void fail_schema(const std::string& rule, const std::string& what) {
  throw Error(ErrorCode::schema, "topology schema: " + rule + ": " + what, rule);
}

[[noreturn]] void fail_invariant(const std::string& rule,
                                 const std::string& what) {
  throw Error(ErrorCode::invariant, "topology invariant: " + rule + ": " + what,
              rule);
}

std::pair<DeviceRef, DeviceRef> ordered(DeviceRef a, DeviceRef b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

DeviceRef parse_endpoint(const json& node) {
  if (node.is_number_integer()) return gcd(node.get<int>());
  if (!node.is_string()) fail_schema("link endpoint", "expected integer or \"kind:id\"");
  const auto text = node.get<std::string>();
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail_schema("link endpoint", "malformed '" + text + "'");
  const auto kind = text.substr(0, colon);
  int id = 0;
  try {
    std::size_t used = 0;
    id = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    fail_schema("link endpoint", "malformed id in '" + text + "'");
  }
  if (kind == "gcd") return gcd(id);
  if (kind == "numa") return numa(id);
  fail_schema("link endpoint", "unknown kind in '" + text + "'");
}

json endpoint_json(DeviceRef ref) {
  if (ref.kind == DeviceKind::gcd) return ref.id;
  return "numa:" + std::to_string(ref.id);
}

template <typename T>
T require(const json& obj, const char* key, const char* context) {
  if (!obj.contains(key)) fail_schema("missing field", std::string(context) + "." + key);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail_schema("field type", std::string(context) + "." + key);
  }
}

void check_graph(const std::vector<Device>& devices,
                 const std::vector<Link>& links, const TierTable& tiers,
                 const MemorySpec& memory) {
  for (auto tier : kAllTiers) {
    if (!(tiers.at(tier) > 0.0))
      fail_invariant("non-positive bandwidth", std::string(to_string(tier)));
  }
  if (!(memory.hbm_gbps > 0.0) || !(memory.cpu_mem_gbps > 0.0) ||
      !(memory.cpu_mem_latency_ns > 0.0))
    fail_invariant("non-positive bandwidth", "memory");

  std::set<DeviceRef> ids;
  for (const auto& d : devices) {
    if (d.ref.id < 0) fail_invariant("negative device id", to_string(d.ref));
    if (!ids.insert(d.ref).second)
      fail_invariant("duplicate device", to_string(d.ref));
  }
  std::set<std::pair<DeviceRef, DeviceRef>> seen;
  for (const auto& l : links) {
    const std::string name = to_string(l.a) + "-" + to_string(l.b);
    if (!ids.contains(l.a) || !ids.contains(l.b))
      fail_invariant("unknown device", "link " + name);
    if (l.a == l.b) fail_invariant("self link", name);
    if (!seen.insert(ordered(l.a, l.b)).second)
      fail_invariant("duplicate link", name);
    const int gcd_ends = (l.a.kind == DeviceKind::gcd) + (l.b.kind == DeviceKind::gcd);
    if (l.tier == LinkTier::cpu && gcd_ends != 1)
      fail_invariant("cpu link endpoints", name);
    if (l.tier != LinkTier::cpu && gcd_ends != 2)
      fail_invariant("gcd link endpoints", name);
  }
}

void check_node(const std::vector<Device>& devices,
                const std::map<DeviceRef, std::vector<Neighbor>>& adjacency) {
  std::map<int, std::vector<int>> gpu_members;
  std::set<int> numa_ids;
  for (const auto& d : devices) {
    if (d.ref.kind == DeviceKind::numa) numa_ids.insert(d.ref.id);
    else gpu_members[d.physical_gpu].push_back(d.ref.id);
  }
  for (const auto& [gpu, members] : gpu_members) {
    if (gpu < 0 || members.size() != 2)
      fail_invariant("sibling count",
                     "physical_gpu " + std::to_string(gpu) + " has " +
                         std::to_string(members.size()) + " gcds");
  }

  std::map<int, int> gpu_to_numa;
  std::set<int> used_numa;
  for (const auto& d : devices) {
    if (d.ref.kind != DeviceKind::gcd) continue;
    const auto& members = gpu_members.at(d.physical_gpu);
    const int sibling = members[0] == d.ref.id ? members[1] : members[0];
    const auto& adj = adjacency.at(d.ref);

    const auto quads = std::count_if(adj.begin(), adj.end(), [](const Neighbor& n) {
      return n.tier == LinkTier::quad;
    });
    const bool has_sibling_quad =
        std::any_of(adj.begin(), adj.end(), [&](const Neighbor& n) {
          return n.tier == LinkTier::quad && n.device == gcd(sibling);
        });
    if (!has_sibling_quad)
      fail_invariant("missing sibling link", "gcd " + std::to_string(d.ref.id));
    if (quads != 1)
      fail_invariant("quad link count", "gcd " + std::to_string(d.ref.id));

    std::vector<DeviceRef> cpu_peers;
    for (const auto& n : adj)
      if (n.tier == LinkTier::cpu) cpu_peers.push_back(n.device);
    if (cpu_peers.size() != 1)
      fail_invariant("cpu link count", "gcd " + std::to_string(d.ref.id));
    if (d.numa_domain < 0 || cpu_peers.front() != numa(d.numa_domain))
      fail_invariant("numa mapping",
                     "gcd " + std::to_string(d.ref.id) +
                         " cpu link does not reach its declared numa_domain");

    auto [it, inserted] = gpu_to_numa.emplace(d.physical_gpu, d.numa_domain);
    if (!inserted && it->second != d.numa_domain)
      fail_invariant("numa mapping", "physical_gpu " +
                                         std::to_string(d.physical_gpu) +
                                         " spans two numa domains");
  }
  for (const auto& [gpu, domain] : gpu_to_numa) {
    if (!used_numa.insert(domain).second)
      fail_invariant("numa mapping",
                     "numa " + std::to_string(domain) + " shared by two GPUs");
  }
  if (used_numa != numa_ids)
    fail_invariant("numa mapping", "gpu to numa mapping is not a bijection");

  // GCD-only connectivity.
  std::vector<int> gcds;
  for (const auto& d : devices)
    if (d.ref.kind == DeviceKind::gcd) gcds.push_back(d.ref.id);
  if (gcds.empty()) return;
  std::set<int> reached{gcds.front()};
  std::vector<int> frontier{gcds.front()};
  while (!frontier.empty()) {
    const int cur = frontier.back();
    frontier.pop_back();
    for (const auto& n : adjacency.at(gcd(cur))) {
      if (n.device.kind == DeviceKind::gcd && reached.insert(n.device.id).second)
        frontier.push_back(n.device.id);
    }
  }
  if (reached.size() != gcds.size())
    fail_invariant("gcd graph disconnected",
                   std::to_string(gcds.size() - reached.size()) +
                       " gcds unreachable");
}

}  // namespace

std::string_view to_string(LinkTier tier) {
  switch (tier) {
    case LinkTier::single: return "single";
    case LinkTier::dual: return "dual";
    case LinkTier::quad: return "quad";
    case LinkTier::cpu: return "cpu";
  }
  return "?";
}

std::optional<LinkTier> parse_link_tier(std::string_view name) {
  for (auto tier : kAllTiers)
    if (to_string(tier) == name) return tier;
  return std::nullopt;
}

std::string_view to_string(Direction dir) {
  return dir == Direction::bidir ? "bidir" : "unidir";
}

std::string_view to_string(DeviceKind kind) {
  return kind == DeviceKind::gcd ? "gcd" : "numa";
}

std::string to_string(DeviceRef ref) {
  if (ref.kind == DeviceKind::gcd) return std::to_string(ref.id);
  return "numa:" + std::to_string(ref.id);
}

Topology Topology::build(std::vector<Device> devices, std::vector<Link> links,
                         TierTable tiers, MemorySpec memory, Checks checks) {
  check_graph(devices, links, tiers, memory);

  Topology t;
  for (const auto& d : devices) t.adjacency_[d.ref];
  for (const auto& l : links) {
    t.adjacency_[l.a].push_back({l.b, l.tier});
    t.adjacency_[l.b].push_back({l.a, l.tier});
  }
  for (auto& [ref, adj] : t.adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.device < y.device; });
  }
  if (checks == Checks::node) check_node(devices, t.adjacency_);

  std::sort(devices.begin(), devices.end(),
            [](const Device& x, const Device& y) { return x.ref < y.ref; });
  t.devices_ = std::move(devices);
  t.links_ = std::move(links);
  t.tiers_ = tiers;
  t.memory_ = memory;
  return t;
}

Topology Topology::load(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, std::string("topology schema: not JSON: ") + e.what(),
                "json syntax");
  }
  if (!doc.is_object()) fail_schema("document", "top level must be an object");
  for (const char* key : {"devices", "links"}) {
    if (!doc.contains(key) || !doc.at(key).is_array())
      fail_schema("missing field", std::string(key) + " (array)");
  }

  TierTable tiers;
  if (doc.contains("tiers")) {
    const auto& node = doc.at("tiers");
    if (!node.is_object()) fail_schema("field type", "tiers");
    for (const auto& [name, value] : node.items()) {
      const auto tier = parse_link_tier(name);
      if (!tier) fail_schema("unknown tier", name);
      if (!value.is_number()) fail_schema("field type", "tiers." + name);
      tiers.per_direction_gbps[static_cast<std::size_t>(*tier)] = value.get<double>();
    }
  }

  MemorySpec memory;
  if (doc.contains("memory")) {
    const auto& node = doc.at("memory");
    if (!node.is_object()) fail_schema("field type", "memory");
    auto read = [&](const char* key, double& out) {
      if (!node.contains(key)) return;
      if (!node.at(key).is_number()) fail_schema("field type", std::string("memory.") + key);
      out = node.at(key).get<double>();
    };
    read("hbm_gbps", memory.hbm_gbps);
    read("cpu_mem_gbps", memory.cpu_mem_gbps);
    read("cpu_mem_latency_ns", memory.cpu_mem_latency_ns);
  }

  std::vector<Device> devices;
  for (const auto& node : doc.at("devices")) {
    if (!node.is_object()) fail_schema("field type", "devices[]");
    Device d;
    d.ref.id = require<int>(node, "id", "devices[]");
    const auto kind = require<std::string>(node, "kind", "devices[]");
    if (kind == "gcd") {
      d.ref.kind = DeviceKind::gcd;
      d.physical_gpu = require<int>(node, "physical_gpu", "devices[gcd]");
      d.numa_domain = require<int>(node, "numa_domain", "devices[gcd]");
    } else if (kind == "numa") {
      d.ref.kind = DeviceKind::numa;
    } else {
      fail_schema("unknown device kind", kind);
    }
    devices.push_back(d);
  }

  std::vector<Link> links;
  for (const auto& node : doc.at("links")) {
    if (!node.is_object()) fail_schema("field type", "links[]");
    for (const char* key : {"a", "b", "tier"})
      if (!node.contains(key)) fail_schema("missing field", std::string("links[].") + key);
    Link l;
    l.a = parse_endpoint(node.at("a"));
    l.b = parse_endpoint(node.at("b"));
    const auto tier_name = require<std::string>(node, "tier", "links[]");
    const auto tier = parse_link_tier(tier_name);
    if (!tier) fail_schema("unknown tier", tier_name);
    l.tier = *tier;
    links.push_back(l);
  }

  return build(std::move(devices), std::move(links), tiers, memory, Checks::node);
}

Topology Topology::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open topology file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load(buf.str());
}

bool Topology::contains(DeviceRef ref) const { return adjacency_.contains(ref); }

const Device& Topology::device(DeviceRef ref) const {
  auto it = std::lower_bound(devices_.begin(), devices_.end(), ref,
                             [](const Device& d, DeviceRef r) { return d.ref < r; });
  if (it == devices_.end() || it->ref != ref)
    throw Error(ErrorCode::unknown_device, "unknown device " + to_string(ref));
  return *it;
}

std::vector<int> Topology::gcd_ids() const {
  std::vector<int> ids;
  for (const auto& d : devices_)
    if (d.ref.kind == DeviceKind::gcd) ids.push_back(d.ref.id);
  return ids;
}

std::size_t Topology::count(DeviceKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      devices_.begin(), devices_.end(),
      [kind](const Device& d) { return d.ref.kind == kind; }));
}

std::optional<LinkTier> Topology::link_tier(DeviceRef a, DeviceRef b) const {
  for (const auto& n : neighbors(a)) {
    if (n.device == b) return n.tier;
  }
  if (!contains(b)) throw Error(ErrorCode::unknown_device, "unknown device " + to_string(b));
  return std::nullopt;
}

std::optional<double> Topology::theoretical_bandwidth(DeviceRef a, DeviceRef b,
                                                      Direction dir) const {
  if (a == b)
    throw Error(ErrorCode::invalid_argument,
                "theoretical_bandwidth needs two distinct devices");
  const auto tier = link_tier(a, b);
  if (!tier) return std::nullopt;
  return tiers_.bandwidth(*tier, dir);
}

std::vector<Neighbor> Topology::neighbors(DeviceRef ref) const {
  auto it = adjacency_.find(ref);
  if (it == adjacency_.end())
    throw Error(ErrorCode::unknown_device, "unknown device " + to_string(ref));
  return it->second;
}

std::string Topology::to_json() const {
  json doc;
  doc["tiers"] = json::object();
  for (auto tier : kAllTiers) doc["tiers"][std::string(to_string(tier))] = tiers_.at(tier);
  doc["memory"] = {{"hbm_gbps", memory_.hbm_gbps},
                   {"cpu_mem_gbps", memory_.cpu_mem_gbps},
                   {"cpu_mem_latency_ns", memory_.cpu_mem_latency_ns}};
  doc["devices"] = json::array();
  for (const auto& d : devices_) {
    json node = {{"id", d.ref.id}, {"kind", std::string(to_string(d.ref.kind))}};
    if (d.ref.kind == DeviceKind::gcd) {
      node["physical_gpu"] = d.physical_gpu;
      node["numa_domain"] = d.numa_domain;
    }
    doc["devices"].push_back(node);
  }
  doc["links"] = json::array();
  for (const auto& l : links_) {
    doc["links"].push_back({{"a", endpoint_json(l.a)},
                            {"b", endpoint_json(l.b)},
                            {"tier", std::string(to_string(l.tier))}});
  }
  return doc.dump(2);
}

}  // namespace fabscope
