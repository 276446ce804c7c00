// SPDX-License-Identifier: Apache-2.0
#include "fabscope/fabscope.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "fabscope/collectives.hpp"
#include "fabscope/error.hpp"
#include "fabscope/measurements.hpp"
#include "fabscope/plan.hpp"
#include "fabscope/render.hpp"
#include "fabscope/routing.hpp"
#include "fabscope/topology.hpp"
#include "fabscope/xfer_model.hpp"

#ifndef FABSCOPE_DATA_DIR
#define FABSCOPE_DATA_DIR "data"
#endif
#ifndef FABSCOPE_VERSION
#define FABSCOPE_VERSION "0.0.0"
#endif

struct fabscope_topology {
  fabscope::Topology value;
};
struct fabscope_profile {
  fabscope::CalibrationProfile value;
};
struct fabscope_matrix {
  fabscope::PairMatrix value;
};
struct fabscope_prediction {
  fabscope::PerfPrediction value;
};
struct fabscope_records {
  std::vector<fabscope::MeasurementRecord> value;
};
struct fabscope_report {
  std::vector<fabscope::MeasurementRecord> records;
  fabscope::ValidationReport value;
};
struct fabscope_comparison {
  fabscope::ComparisonReport value;
};

namespace {

using namespace fabscope;

struct LastError {
  std::string message;
  std::string rule;
  std::size_t line = 0;
};

thread_local LastError g_last;

fabscope_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return FABSCOPE_ERR_INVALID_ARGUMENT;
    case ErrorCode::schema: return FABSCOPE_ERR_SCHEMA;
    case ErrorCode::invariant: return FABSCOPE_ERR_INVARIANT;
    case ErrorCode::unknown_device: return FABSCOPE_ERR_UNKNOWN_DEVICE;
    case ErrorCode::no_route: return FABSCOPE_ERR_NO_ROUTE;
    case ErrorCode::invalid_spec: return FABSCOPE_ERR_INVALID_SPEC;
    case ErrorCode::parse: return FABSCOPE_ERR_PARSE;
    case ErrorCode::grid_mismatch: return FABSCOPE_ERR_GRID_MISMATCH;
    case ErrorCode::io: return FABSCOPE_ERR_IO;
    case ErrorCode::missing_calibration: return FABSCOPE_ERR_MISSING_CALIBRATION;
  }
  return FABSCOPE_ERR_INTERNAL;
}

fabscope_status set_error(fabscope_status status, std::string message, std::string rule = {},
                          std::size_t line = 0) {
  g_last = {std::move(message), std::move(rule), line};
  return status;
}

// Runs `fn`, translating exceptions into a status and the thread's last error.
template <typename Fn>
fabscope_status guard(Fn&& fn) {
  try {
    g_last = {};
    fn();
    return FABSCOPE_OK;
  } catch (const Error& e) {
    return set_error(to_status(e.code()), e.what(), e.rule(), e.line());
  } catch (const std::bad_alloc&) {
    return set_error(FABSCOPE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FABSCOPE_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(FABSCOPE_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  require(out != nullptr, "out");
  *out = dup_string(s);
}

OutputFormat to_format(fabscope_format f) {
  return f == FABSCOPE_FORMAT_CSV ? OutputFormat::csv : OutputFormat::table;
}

DeviceRef to_ref(fabscope_device d) {
  if (d.kind != FABSCOPE_DEVICE_GCD && d.kind != FABSCOPE_DEVICE_NUMA)
    throw Error(ErrorCode::invalid_argument, "unknown device kind");
  return {d.kind == FABSCOPE_DEVICE_NUMA ? DeviceKind::numa : DeviceKind::gcd, d.id};
}

std::optional<Api> to_api(fabscope_api api) {
  switch (api) {
    case FABSCOPE_API_EXPLICIT_COPY: return Api::explicit_copy;
    case FABSCOPE_API_ZERO_COPY_KERNEL: return Api::zero_copy_kernel;
    case FABSCOPE_API_PAGE_MIGRATION: return Api::page_migration;
    case FABSCOPE_API_MPI_P2P: return Api::mpi_p2p;
    case FABSCOPE_API_NONE: return std::nullopt;
  }
  throw Error(ErrorCode::invalid_argument, "unknown api value");
}

AllocKind to_alloc(fabscope_alloc alloc) {
  if (alloc < FABSCOPE_ALLOC_PAGEABLE || alloc > FABSCOPE_ALLOC_DEVICE)
    throw Error(ErrorCode::invalid_argument, "unknown allocation kind");
  return static_cast<AllocKind>(alloc);
}

CollectiveKind to_collective(fabscope_collective op) {
  if (op < FABSCOPE_COLL_REDUCE || op > FABSCOPE_COLL_ALLGATHER)
    throw Error(ErrorCode::invalid_argument, "unknown collective");
  return static_cast<CollectiveKind>(op);
}

TransferSpec to_spec(const fabscope_transfer* s) {
  require(s != nullptr, "transfer spec");
  TransferSpec spec;
  spec.src = s->src_is_gcd ? Placement::on_gcd(s->src_id) : Placement::host();
  spec.dst = s->dst_is_gcd ? Placement::on_gcd(s->dst_id) : Placement::host();
  spec.size_bytes = s->size_bytes;
  spec.alloc = to_alloc(s->alloc);
  const auto api = to_api(s->api);
  if (!api) throw Error(ErrorCode::invalid_spec, "a transfer needs a movement api");
  spec.api = *api;
  spec.sdma = s->sdma != 0;
  spec.xnack = s->xnack != 0;
  return spec;
}

Route find_route(const Topology& t, int a, int b, fabscope_objective objective, int max_hops) {
  if (objective == FABSCOPE_OBJECTIVE_HOPS) return shortest_hop_route(t, a, b);
  if (objective == FABSCOPE_OBJECTIVE_BANDWIDTH)
    return widest_route(t, a, b, max_hops > 0 ? max_hops : kDefaultMaxHops);
  throw Error(ErrorCode::invalid_argument, "unknown route objective");
}

fabscope_prediction* wrap(PerfPrediction p) { return new fabscope_prediction{std::move(p)}; }

template <typename T, typename Parse>
void parse_into(Parse&& parse, const char* name, int* out) {
  const auto v = parse(std::string_view(name));
  if (!v) throw Error(ErrorCode::invalid_argument, std::string("unknown name '") + name + "'");
  *out = static_cast<int>(*v);
}

}  // namespace

extern "C" {

const char* fabscope_version(void) { return FABSCOPE_VERSION; }

const char* fabscope_status_string(fabscope_status status) {
  switch (status) {
    case FABSCOPE_OK: return "ok";
    case FABSCOPE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FABSCOPE_ERR_SCHEMA: return "schema error";
    case FABSCOPE_ERR_INVARIANT: return "invariant violated";
    case FABSCOPE_ERR_UNKNOWN_DEVICE: return "unknown device";
    case FABSCOPE_ERR_NO_ROUTE: return "no route";
    case FABSCOPE_ERR_INVALID_SPEC: return "invalid transfer spec";
    case FABSCOPE_ERR_PARSE: return "parse error";
    case FABSCOPE_ERR_GRID_MISMATCH: return "grid mismatch";
    case FABSCOPE_ERR_IO: return "i/o error";
    case FABSCOPE_ERR_MISSING_CALIBRATION: return "missing calibration";
    case FABSCOPE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* fabscope_last_error(void) { return g_last.message.c_str(); }
const char* fabscope_last_error_rule(void) { return g_last.rule.c_str(); }
size_t fabscope_last_error_line(void) { return g_last.line; }
void fabscope_string_free(char* s) { std::free(s); }

const char* fabscope_bundled_topology_path(void) {
  return FABSCOPE_DATA_DIR "/frontier-node.json";
}
const char* fabscope_bundled_profile_path(void) { return FABSCOPE_DATA_DIR "/mi250x-paper.json"; }

fabscope_status fabscope_parse_enum(fabscope_enum_kind kind, const char* name, int* out) {
  return guard([&] {
    require(name != nullptr, "name");
    require(out != nullptr, "out");
    switch (kind) {
      case FABSCOPE_ENUM_ALLOC: return parse_into<AllocKind>(parse_alloc_kind, name, out);
      case FABSCOPE_ENUM_API:
        if (std::string_view(name) == "none" || std::string_view(name) == "kernel") {
          *out = FABSCOPE_API_NONE;
          return;
        }
        return parse_into<Api>(parse_api, name, out);
      case FABSCOPE_ENUM_COLLECTIVE:
        return parse_into<CollectiveKind>(parse_collective, name, out);
      case FABSCOPE_ENUM_MATRIX_METRIC:
        return parse_into<MatrixMetric>(parse_matrix_metric, name, out);
      case FABSCOPE_ENUM_FORMAT: return parse_into<OutputFormat>(parse_output_format, name, out);
      case FABSCOPE_ENUM_TIER: return parse_into<LinkTier>(parse_link_tier, name, out);
      case FABSCOPE_ENUM_METRIC: return parse_into<Metric>(parse_metric, name, out);
    }
    throw Error(ErrorCode::invalid_argument, "unknown enum kind");
  });
}

// ---- topology ----

fabscope_status fabscope_topology_load_file(const char* path, fabscope_topology** out) {
  return guard([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "out");
    *out = new fabscope_topology{Topology::load_file(path)};
  });
}

fabscope_status fabscope_topology_load_string(const char* json, fabscope_topology** out) {
  return guard([&] {
    require(json != nullptr, "json");
    require(out != nullptr, "out");
    *out = new fabscope_topology{Topology::load(json)};
  });
}

void fabscope_topology_free(fabscope_topology* t) { delete t; }

fabscope_status fabscope_topology_gcd_ids(const fabscope_topology* t, int* ids, size_t capacity,
                                          size_t* count) {
  return guard([&] {
    require(t != nullptr, "topology");
    require(count != nullptr, "count");
    const auto all = t->value.gcd_ids();
    for (std::size_t i = 0; i < all.size() && i < capacity; ++i) ids[i] = all[i];
    *count = all.size();
  });
}

fabscope_status fabscope_topology_render(const fabscope_topology* t, char** out) {
  return guard([&] {
    require(t != nullptr, "topology");
    emit(out, render_topology_summary(t->value));
  });
}

fabscope_status fabscope_theoretical_bandwidth(const fabscope_topology* t, fabscope_device a,
                                               fabscope_device b, fabscope_direction dir,
                                               double* gbps, int* linked) {
  return guard([&] {
    require(t != nullptr, "topology");
    require(gbps != nullptr && linked != nullptr, "outputs");
    const auto bw = t->value.theoretical_bandwidth(
        to_ref(a), to_ref(b), dir == FABSCOPE_BIDIR ? Direction::bidir : Direction::unidir);
    *linked = bw.has_value() ? 1 : 0;
    if (bw) *gbps = *bw;
  });
}

fabscope_status fabscope_neighbors(const fabscope_topology* t, fabscope_device d,
                                   fabscope_neighbor* out, size_t capacity, size_t* count) {
  return guard([&] {
    require(t != nullptr, "topology");
    require(count != nullptr, "count");
    const auto all = t->value.neighbors(to_ref(d));
    for (std::size_t i = 0; i < all.size() && i < capacity; ++i) {
      out[i].device = {all[i].device.kind == DeviceKind::numa ? FABSCOPE_DEVICE_NUMA
                                                              : FABSCOPE_DEVICE_GCD,
                       all[i].device.id};
      out[i].tier = static_cast<fabscope_tier>(all[i].tier);
    }
    *count = all.size();
  });
}

fabscope_status fabscope_neighbors_render(const fabscope_topology* t, fabscope_device d,
                                          char** out) {
  return guard([&] {
    require(t != nullptr, "topology");
    emit(out, render_neighbors(t->value, to_ref(d)));
  });
}

fabscope_status fabscope_parse_device(const char* text, fabscope_device* out) {
  return guard([&] {
    require(text != nullptr, "text");
    require(out != nullptr, "out");
    std::string_view s(text);
    fabscope_device d{FABSCOPE_DEVICE_GCD, 0};
    if (s.starts_with("numa:")) {
      d.kind = FABSCOPE_DEVICE_NUMA;
      s.remove_prefix(5);
    } else if (s.starts_with("gcd:")) {
      s.remove_prefix(4);
    }
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d.id);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || d.id < 0)
      throw Error(ErrorCode::invalid_argument, std::string("bad device '") + text + "'");
    *out = d;
  });
}

// ---- routing ----

fabscope_status fabscope_route(const fabscope_topology* t, int a, int b,
                               fabscope_objective objective, int max_hops, int* hops,
                               size_t capacity, size_t* hop_len, double* bottleneck_gbps) {
  return guard([&] {
    require(t != nullptr, "topology");
    require(hop_len != nullptr, "hop_len");
    const auto route = find_route(t->value, a, b, objective, max_hops);
    for (std::size_t i = 0; i < route.hops.size() && i < capacity; ++i) hops[i] = route.hops[i];
    *hop_len = route.hops.size();
    if (bottleneck_gbps) *bottleneck_gbps = route.bottleneck_gbps;
  });
}

fabscope_status fabscope_route_render(const fabscope_topology* t, int a, int b,
                                      fabscope_objective objective, int max_hops, char** out) {
  return guard([&] {
    require(t != nullptr, "topology");
    emit(out, render_route(find_route(t->value, a, b, objective, max_hops)));
  });
}

fabscope_status fabscope_matrix_compute(const fabscope_topology* t, fabscope_matrix_metric metric,
                                        int max_hops, fabscope_matrix** out) {
  return guard([&] {
    require(t != nullptr, "topology");
    require(out != nullptr, "out");
    if (metric < FABSCOPE_MATRIX_HOPS || metric > FABSCOPE_MATRIX_MISMATCH)
      throw Error(ErrorCode::invalid_argument, "unknown matrix metric");
    *out = new fabscope_matrix{all_pairs_matrix(t->value, static_cast<MatrixMetric>(metric),
                                                max_hops > 0 ? max_hops : kDefaultMaxHops)};
  });
}

void fabscope_matrix_free(fabscope_matrix* m) { delete m; }
size_t fabscope_matrix_size(const fabscope_matrix* m) { return m ? m->value.size() : 0; }
int fabscope_matrix_id(const fabscope_matrix* m, size_t index) { return m->value.ids.at(index); }
double fabscope_matrix_value(const fabscope_matrix* m, size_t row, size_t col) {
  return m->value.at(row, col);
}

fabscope_status fabscope_matrix_render(const fabscope_matrix* m, fabscope_format format,
                                       char** out) {
  return guard([&] {
    require(m != nullptr, "matrix");
    emit(out, render_matrix(m->value, to_format(format)));
  });
}

// ---- transfer model ----

fabscope_status fabscope_profile_load_file(const char* path, fabscope_profile** out) {
  return guard([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "out");
    *out = new fabscope_profile{CalibrationProfile::load_file(path)};
  });
}

fabscope_status fabscope_profile_load_string(const char* json, fabscope_profile** out) {
  return guard([&] {
    require(json != nullptr, "json");
    require(out != nullptr, "out");
    *out = new fabscope_profile{CalibrationProfile::load(json)};
  });
}

fabscope_status fabscope_profile_with_per_gcd_bidir(const fabscope_profile* base, double gbps,
                                                    fabscope_profile** out) {
  return guard([&] {
    require(base != nullptr, "profile");
    require(out != nullptr, "out");
    auto p = base->value;
    p.cpu_gpu_per_gcd_bidir_gbps = gbps;
    p.validate();
    *out = new fabscope_profile{std::move(p)};
  });
}

void fabscope_profile_free(fabscope_profile* p) { delete p; }

fabscope_status fabscope_resolve_movement(fabscope_alloc alloc, int xnack, fabscope_api api,
                                          fabscope_movement* movement, int* coherent) {
  return guard([&] {
    require(movement != nullptr && coherent != nullptr, "outputs");
    const auto r = resolve_movement(to_alloc(alloc), xnack != 0, to_api(api));
    *movement = static_cast<fabscope_movement>(r.movement);
    *coherent = r.coherent ? 1 : 0;
  });
}

fabscope_status fabscope_predict_h2d(const fabscope_transfer* spec, const fabscope_topology* t,
                                     const fabscope_profile* p, fabscope_prediction** out) {
  return guard([&] {
    require(t != nullptr && p != nullptr, "topology and profile");
    require(out != nullptr, "out");
    *out = wrap(predict_h2d(to_spec(spec), t->value, p->value));
  });
}

fabscope_status fabscope_predict_p2p(const fabscope_transfer* spec, const fabscope_topology* t,
                                     const fabscope_profile* p, int max_hops,
                                     fabscope_prediction** out) {
  return guard([&] {
    require(t != nullptr && p != nullptr, "topology and profile");
    require(out != nullptr, "out");
    *out = wrap(predict_p2p(to_spec(spec), t->value, p->value,
                            max_hops > 0 ? max_hops : kDefaultMaxHops));
  });
}

fabscope_status fabscope_predict_multi_gpu(const fabscope_topology* t, const fabscope_profile* p,
                                           const int* gcds, size_t n, fabscope_prediction** out) {
  return guard([&] {
    require(t != nullptr && p != nullptr, "topology and profile");
    require(gcds != nullptr || n == 0, "gcds");
    require(out != nullptr, "out");
    *out = wrap(predict_multi_gpu(std::span<const int>(gcds, n), t->value, p->value));
  });
}

fabscope_status fabscope_predict_local_stream(const fabscope_topology* t,
                                              const fabscope_profile* p,
                                              fabscope_prediction** out) {
  return guard([&] {
    require(t != nullptr && p != nullptr, "topology and profile");
    require(out != nullptr, "out");
    *out = wrap(predict_local_stream(t->value, p->value));
  });
}

void fabscope_prediction_free(fabscope_prediction* p) { delete p; }

int fabscope_prediction_has_bandwidth(const fabscope_prediction* p) {
  return p && p->value.bandwidth_gbps ? 1 : 0;
}
double fabscope_prediction_bandwidth(const fabscope_prediction* p) {
  return p && p->value.bandwidth_gbps ? *p->value.bandwidth_gbps : 0.0;
}
fabscope_direction fabscope_prediction_direction(const fabscope_prediction* p) {
  return p && p->value.direction == Direction::bidir ? FABSCOPE_BIDIR : FABSCOPE_UNIDIR;
}
int fabscope_prediction_unstable(const fabscope_prediction* p) {
  return p && p->value.unstable ? 1 : 0;
}
int fabscope_prediction_interval(const fabscope_prediction* p, double* lo, double* hi) {
  if (!p || !p->value.interval) return 0;
  if (lo) *lo = p->value.interval->first;
  if (hi) *hi = p->value.interval->second;
  return 1;
}
char fabscope_prediction_latency_tier(const fabscope_prediction* p) {
  if (!p || !p->value.latency_tier) return '\0';
  return to_string(*p->value.latency_tier)[0];
}
const char* fabscope_prediction_rule(const fabscope_prediction* p) {
  return p ? p->value.rule.c_str() : "";
}

fabscope_status fabscope_prediction_render(const fabscope_prediction* p, char** out) {
  return guard([&] {
    require(p != nullptr, "prediction");
    emit(out, render_prediction(p->value));
  });
}

fabscope_status fabscope_latency_tier(const fabscope_topology* t, int a, int b, char* tier) {
  return guard([&] {
    require(t != nullptr, "topology");
    require(tier != nullptr, "tier");
    *tier = to_string(classify_latency_tier(t->value, a, b))[0];
  });
}

fabscope_status fabscope_stream_bandwidth(double elapsed_s, double bytes_per_buffer, int n_gpus,
                                          double* gbps) {
  return guard([&] {
    require(gbps != nullptr, "gbps");
    *gbps = stream_bandwidth(elapsed_s, bytes_per_buffer, n_gpus);
  });
}

// ---- collectives ----

int fabscope_collective_passes(fabscope_collective op) {
  if (op < FABSCOPE_COLL_REDUCE || op > FABSCOPE_COLL_ALLGATHER) return 0;
  return passes(static_cast<CollectiveKind>(op));
}

fabscope_status fabscope_collective_lower_bound(fabscope_collective op, double l_min_us,
                                                double* out_us) {
  return guard([&] {
    require(out_us != nullptr, "out");
    *out_us = lower_bound_us(to_collective(op), l_min_us);
  });
}

fabscope_status fabscope_simulate_ring(fabscope_collective op, const int* participants, size_t n,
                                       uint64_t message_bytes, const fabscope_topology* t,
                                       const fabscope_profile* p, double hop_latency_us,
                                       fabscope_collective_estimate* out, char** rendered) {
  return guard([&] {
    require(t != nullptr && p != nullptr, "topology and profile");
    require(participants != nullptr || n == 0, "participants");
    require(out != nullptr, "out");
    const auto e = simulate_ring(to_collective(op), std::span<const int>(participants, n),
                                 message_bytes, t->value, p->value, hop_latency_us);
    out->lower_bound_us = e.lower_bound_us;
    out->has_ring = e.ring_estimate_us ? 1 : 0;
    out->ring_estimate_us = e.ring_estimate_us.value_or(0.0);
    out->participants = e.participants;
    out->message_bytes = e.message_bytes;
    out->steps = e.steps;
    out->per_step_us = e.per_step_us;
    out->edge_bandwidth_gbps = e.edge_bandwidth_gbps;
    if (rendered) *rendered = dup_string(render_estimate(e));
  });
}

fabscope_status fabscope_compare_backends(const fabscope_records* records, const char* backend_a,
                                          const char* backend_b, fabscope_comparison** out) {
  return guard([&] {
    require(records != nullptr, "records");
    require(backend_a != nullptr && backend_b != nullptr, "backend names");
    require(out != nullptr, "out");
    const auto a = collective_series(records->value, backend_a);
    const auto b = collective_series(records->value, backend_b);
    *out = new fabscope_comparison{compare_backends(a, b)};
  });
}

void fabscope_comparison_free(fabscope_comparison* c) { delete c; }
size_t fabscope_comparison_rows(const fabscope_comparison* c) {
  return c ? c->value.rows.size() : 0;
}

const char* fabscope_comparison_winner(const fabscope_comparison* c, fabscope_collective op) {
  if (!c || op < FABSCOPE_COLL_REDUCE || op > FABSCOPE_COLL_ALLGATHER) return nullptr;
  const auto it = c->value.op_winner.find(static_cast<CollectiveKind>(op));
  if (it == c->value.op_winner.end() || !it->second) return nullptr;
  return it->second->c_str();
}

fabscope_status fabscope_comparison_render(const fabscope_comparison* c, fabscope_format format,
                                           char** out) {
  return guard([&] {
    require(c != nullptr, "comparison");
    emit(out, render_comparison(c->value, to_format(format)));
  });
}

// ---- measurements ----

fabscope_status fabscope_records_parse(const char* csv, fabscope_records** out) {
  return guard([&] {
    require(csv != nullptr, "csv");
    require(out != nullptr, "out");
    *out = new fabscope_records{ingest_csv(csv)};
  });
}

fabscope_status fabscope_records_load_file(const char* path, fabscope_records** out) {
  return guard([&] {
    require(path != nullptr, "path");
    require(out != nullptr, "out");
    *out = new fabscope_records{ingest_csv_file(path)};
  });
}

fabscope_status fabscope_records_append(fabscope_records* dst, const fabscope_records* src) {
  return guard([&] {
    require(dst != nullptr && src != nullptr, "records");
    if (dst == src) {
      const auto copy = src->value;
      dst->value.insert(dst->value.end(), copy.begin(), copy.end());
    } else {
      dst->value.insert(dst->value.end(), src->value.begin(), src->value.end());
    }
  });
}

void fabscope_records_free(fabscope_records* r) { delete r; }
size_t fabscope_records_count(const fabscope_records* r) { return r ? r->value.size() : 0; }

fabscope_status fabscope_records_get(const fabscope_records* r, size_t index,
                                     fabscope_record_view* out) {
  return guard([&] {
    require(r != nullptr, "records");
    require(out != nullptr, "out");
    if (index >= r->value.size())
      throw Error(ErrorCode::invalid_argument, "record index out of range");
    const auto& rec = r->value[index];
    out->benchmark = rec.benchmark.c_str();
    out->src_kind = to_string(rec.src.kind).data();
    out->src_id = rec.src.id;
    out->dst_kind = to_string(rec.dst.kind).data();
    out->dst_id = rec.dst.id;
    out->size_bytes = rec.size_bytes;
    out->metric = static_cast<fabscope_metric>(rec.metric);
    out->value = rec.value;
    out->line = rec.line;
    out->source = rec.source.c_str();
  });
}

fabscope_status fabscope_records_render(const fabscope_records* r, fabscope_format format,
                                        char** out) {
  return guard([&] {
    require(r != nullptr, "records");
    emit(out, render_records(r->value, to_format(format)));
  });
}

fabscope_status fabscope_validate(const fabscope_records* r, const fabscope_topology* t,
                                  const fabscope_profile* p, double tolerance,
                                  fabscope_report** out) {
  return guard([&] {
    require(r != nullptr && t != nullptr && p != nullptr, "records, topology and profile");
    require(out != nullptr, "out");
    auto report = validate(r->value, t->value, p->value,
                           tolerance < 0.0 ? kDefaultTolerance : tolerance);
    *out = new fabscope_report{r->value, std::move(report)};
  });
}

fabscope_status fabscope_detect_anomalies(const fabscope_records* r, const fabscope_topology* t,
                                          fabscope_report** out) {
  return guard([&] {
    require(r != nullptr && t != nullptr, "records and topology");
    require(out != nullptr, "out");
    ValidationReport report;
    report.anomalies = detect_anomalies(r->value, t->value);
    *out = new fabscope_report{r->value, std::move(report)};
  });
}

void fabscope_report_free(fabscope_report* rep) { delete rep; }
size_t fabscope_report_size(const fabscope_report* rep) {
  return rep ? rep->value.verdicts.size() : 0;
}
size_t fabscope_report_count(const fabscope_report* rep, fabscope_verdict v) {
  if (!rep || v < FABSCOPE_VERDICT_PASS || v > FABSCOPE_VERDICT_UNMODELED) return 0;
  return rep->value.count(static_cast<Verdict>(v));
}
fabscope_verdict fabscope_report_verdict(const fabscope_report* rep, size_t index) {
  return static_cast<fabscope_verdict>(rep->value.verdicts.at(index).verdict);
}
size_t fabscope_report_anomaly_count(const fabscope_report* rep) {
  return rep ? rep->value.anomalies.size() : 0;
}

fabscope_status fabscope_report_anomaly(const fabscope_report* rep, size_t index,
                                        const char** signature, fabscope_anomaly_status* status) {
  return guard([&] {
    require(rep != nullptr, "report");
    if (index >= rep->value.anomalies.size())
      throw Error(ErrorCode::invalid_argument, "anomaly index out of range");
    const auto& f = rep->value.anomalies[index];
    if (signature) *signature = f.signature.c_str();
    if (status) *status = static_cast<fabscope_anomaly_status>(f.status);
  });
}

fabscope_status fabscope_report_render(const fabscope_report* rep, fabscope_format format,
                                       char** out) {
  return guard([&] {
    require(rep != nullptr, "report");
    emit(out, render_report(rep->records, rep->value, to_format(format)));
  });
}

fabscope_status fabscope_report_render_anomalies(const fabscope_report* rep,
                                                 fabscope_format format, char** out) {
  return guard([&] {
    require(rep != nullptr, "report");
    emit(out, render_anomalies(rep->records, rep->value.anomalies, to_format(format)));
  });
}

fabscope_status fabscope_plan_emit(const char* suite, const fabscope_topology* t,
                                   char** json_out, size_t* case_count) {
  return guard([&] {
    require(suite != nullptr, "suite");
    require(t != nullptr, "topology");
    const auto s = parse_suite(suite);
    if (!s)
      throw Error(ErrorCode::invalid_argument,
                  std::string("unknown suite '") + suite +
                      "' (cpu_gpu, p2p, mpi_p2p, collectives, multi_gpu_stream)");
    const auto plan = emit_plan(*s, t->value);
    emit(json_out, plan.to_json());
    if (case_count) *case_count = plan.cases.size();
  });
}

}  // extern "C"
