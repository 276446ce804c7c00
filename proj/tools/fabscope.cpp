// SPDX-License-Identifier: Apache-2.0
// fabscope command-line tool. Talks to the library through the C API only.
#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabscope/fabscope.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 1;
constexpr int kExitUsage = 2;

// Input problems reported by the library; the message is already set.
struct ApiFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(fabscope_status s) {
  if (s == FABSCOPE_OK) return;
  std::string msg = fabscope_status_string(s);
  const std::string detail = fabscope_last_error();
  if (!detail.empty()) msg += ": " + detail;
  throw ApiFailure(msg);
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TopologyPtr =
    std::unique_ptr<fabscope_topology, Deleter<fabscope_topology, fabscope_topology_free>>;
using ProfilePtr =
    std::unique_ptr<fabscope_profile, Deleter<fabscope_profile, fabscope_profile_free>>;
using RecordsPtr =
    std::unique_ptr<fabscope_records, Deleter<fabscope_records, fabscope_records_free>>;
using ReportPtr = std::unique_ptr<fabscope_report, Deleter<fabscope_report, fabscope_report_free>>;
using PredictionPtr =
    std::unique_ptr<fabscope_prediction, Deleter<fabscope_prediction, fabscope_prediction_free>>;
using MatrixPtr = std::unique_ptr<fabscope_matrix, Deleter<fabscope_matrix, fabscope_matrix_free>>;
using ComparisonPtr =
    std::unique_ptr<fabscope_comparison, Deleter<fabscope_comparison, fabscope_comparison_free>>;

// Takes ownership of a library string and prints it.
void print_owned(char* s) {
  std::fputs(s, stdout);
  fabscope_string_free(s);
}

template <typename Enum>
Enum parse_enum(fabscope_enum_kind kind, const std::string& name) {
  int v = 0;
  check(fabscope_parse_enum(kind, name.c_str(), &v));
  return static_cast<Enum>(v);
}

// "1048576", "4KiB", "1MiB", "8GiB", "1GB" and so on.
std::uint64_t parse_size(const std::string& text) {
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr == text.data())
    throw CLI::ValidationError("size", "'" + text + "' is not a byte count");
  const std::string unit(ptr, text.data() + text.size());
  static const std::pair<const char*, std::uint64_t> units[] = {
      {"", 1},           {"B", 1},          {"KiB", 1ull << 10}, {"MiB", 1ull << 20},
      {"GiB", 1ull << 30}, {"KB", 1000ull}, {"MB", 1000000ull},  {"GB", 1000000000ull}};
  for (const auto& [name, mult] : units)
    if (unit == name) return n * mult;
  throw CLI::ValidationError("size", "unknown unit '" + unit + "'");
}

struct Config {
  std::string topology_path;
  std::string profile_path;
  std::string format = "table";
};

class Session {
 public:
  explicit Session(const Config& cfg) : cfg_(cfg) {}

  fabscope_format format() const {
    return parse_enum<fabscope_format>(FABSCOPE_ENUM_FORMAT, cfg_.format);
  }

  const fabscope_topology* topology() {
    if (!topology_) {
      fabscope_topology* t = nullptr;
      check(fabscope_topology_load_file(topology_path().c_str(), &t));
      topology_.reset(t);
    }
    return topology_.get();
  }

  const fabscope_profile* profile() {
    if (!profile_) {
      const std::string path =
          cfg_.profile_path.empty() ? fabscope_bundled_profile_path() : cfg_.profile_path;
      fabscope_profile* p = nullptr;
      check(fabscope_profile_load_file(path.c_str(), &p));
      profile_.reset(p);
    }
    return profile_.get();
  }

  std::string topology_path() const {
    if (!cfg_.topology_path.empty()) return cfg_.topology_path;
    if (const char* env = std::getenv("FABRIC_SCOPE_TOPOLOGY"); env && *env) return env;
    return fabscope_bundled_topology_path();
  }

 private:
  const Config& cfg_;
  TopologyPtr topology_;
  ProfilePtr profile_;
};

RecordsPtr load_records(const std::vector<std::string>& paths) {
  fabscope_records* all = nullptr;
  check(fabscope_records_parse("", &all));
  RecordsPtr out(all);
  for (const auto& path : paths) {
    fabscope_records* r = nullptr;
    check(fabscope_records_load_file(path.c_str(), &r));
    RecordsPtr part(r);
    check(fabscope_records_append(out.get(), part.get()));
  }
  return out;
}

fabscope_transfer make_transfer(bool src_gcd, int src, bool dst_gcd, int dst,
                                const std::string& size, const std::string& alloc,
                                const std::string& api, const std::string& sdma, bool xnack) {
  fabscope_transfer t{};
  t.src_is_gcd = src_gcd ? 1 : 0;
  t.src_id = src;
  t.dst_is_gcd = dst_gcd ? 1 : 0;
  t.dst_id = dst;
  t.size_bytes = parse_size(size);
  t.alloc = parse_enum<fabscope_alloc>(FABSCOPE_ENUM_ALLOC, alloc);
  t.api = parse_enum<fabscope_api>(FABSCOPE_ENUM_API, api);
  t.sdma = sdma == "on" ? 1 : 0;
  t.xnack = xnack ? 1 : 0;
  return t;
}

std::vector<int> participants(const std::vector<int>& gcds, int count) {
  if (!gcds.empty()) return gcds;
  std::vector<int> out;
  for (int i = 0; i < count; ++i) out.push_back(i);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interconnect model, predictions and measurement validation for a multi-GCD node",
               "fabscope"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fabscope_version()));

  Config cfg;
  app.add_option("--topology", cfg.topology_path,
                 "Topology JSON (default: $FABRIC_SCOPE_TOPOLOGY or the bundled node)");
  app.add_option("--profile", cfg.profile_path, "Calibration profile JSON (default: bundled)");
  app.add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"table", "csv"}));

  Session session(cfg);
  int exit_code = kExitOk;

  // topo
  auto* topo = app.add_subcommand("topo", "Topology inspection");
  topo->require_subcommand(1);
  auto* topo_validate = topo->add_subcommand("validate", "Load and check a topology file");
  std::string validate_path;
  topo_validate->add_option("file", validate_path, "Topology JSON (default: --topology)");
  topo_validate->callback([&] {
    if (!validate_path.empty()) cfg.topology_path = validate_path;
    char* s = nullptr;
    check(fabscope_topology_render(session.topology(), &s));
    print_owned(s);
  });

  auto* topo_matrix = topo->add_subcommand("matrix", "All-pairs GCD matrix");
  std::string metric = "hops";
  int matrix_hops = 0;
  topo_matrix->add_option("--metric", metric, "hops, widest_bw or mismatch")
      ->check(CLI::IsMember({"hops", "widest_bw", "mismatch"}));
  topo_matrix->add_option("--max-hops", matrix_hops, "Route length limit for widest routes")
      ->check(CLI::PositiveNumber);
  topo_matrix->callback([&] {
    fabscope_matrix* m = nullptr;
    check(fabscope_matrix_compute(
        session.topology(),
        parse_enum<fabscope_matrix_metric>(FABSCOPE_ENUM_MATRIX_METRIC, metric), matrix_hops,
        &m));
    MatrixPtr owned(m);
    char* s = nullptr;
    check(fabscope_matrix_render(m, session.format(), &s));
    print_owned(s);
  });

  auto* topo_neighbors = topo->add_subcommand("neighbors", "Directly linked devices");
  std::string neighbor_of;
  topo_neighbors->add_option("device", neighbor_of, "GCD id, gcd:N or numa:N")->required();
  topo_neighbors->callback([&] {
    fabscope_device d{};
    check(fabscope_parse_device(neighbor_of.c_str(), &d));
    char* s = nullptr;
    check(fabscope_neighbors_render(session.topology(), d, &s));
    print_owned(s);
  });

  // route
  auto* route = app.add_subcommand("route", "Route between two GCDs");
  int route_a = 0, route_b = 0, route_hops = 0;
  std::string objective = "hops";
  route->add_option("a", route_a, "Source GCD")->required();
  route->add_option("b", route_b, "Destination GCD")->required();
  route->add_option("--objective", objective, "hops or bandwidth")
      ->check(CLI::IsMember({"hops", "bandwidth"}));
  route->add_option("--max-hops", route_hops, "Route length limit for --objective bandwidth")
      ->check(CLI::PositiveNumber);
  route->callback([&] {
    char* s = nullptr;
    check(fabscope_route_render(
        session.topology(), route_a, route_b,
        objective == "bandwidth" ? FABSCOPE_OBJECTIVE_BANDWIDTH : FABSCOPE_OBJECTIVE_HOPS,
        route_hops, &s));
    print_owned(s);
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Model predictions");
  predict->require_subcommand(1);
  std::string size = "1GiB", alloc, api, sdma = "on";
  bool xnack = false;
  auto print_prediction = [](fabscope_prediction* p) {
    PredictionPtr owned(p);
    char* s = nullptr;
    check(fabscope_prediction_render(p, &s));
    print_owned(s);
  };

  auto* p_h2d = predict->add_subcommand("h2d", "Host to GCD transfer");
  int h2d_gcd = 0;
  bool d2h = false;
  p_h2d->add_option("--gcd", h2d_gcd, "Target GCD")->required();
  p_h2d->add_option("--alloc", alloc, "Host allocation kind")->required();
  p_h2d->add_option("--api", api, "explicit_copy, zero_copy_kernel or page_migration")
      ->required();
  p_h2d->add_option("--size", size, "Transfer size (e.g. 1GiB)");
  p_h2d->add_flag("--xnack", xnack, "GPU page-fault retry enabled");
  p_h2d->add_flag("--d2h", d2h, "GCD to host instead");
  p_h2d->callback([&] {
    const auto t = d2h ? make_transfer(true, h2d_gcd, false, 0, size, alloc, api, sdma, xnack)
                       : make_transfer(false, 0, true, h2d_gcd, size, alloc, api, sdma, xnack);
    fabscope_prediction* p = nullptr;
    check(fabscope_predict_h2d(&t, session.topology(), session.profile(), &p));
    print_prediction(p);
  });

  auto* p_p2p = predict->add_subcommand("p2p", "GCD to GCD transfer");
  int p2p_src = 0, p2p_dst = 0, p2p_hops = 0;
  std::string p2p_api = "explicit_copy";
  p_p2p->add_option("--src", p2p_src, "Source GCD")->required();
  p_p2p->add_option("--dst", p2p_dst, "Destination GCD")->required();
  p_p2p->add_option("--api", p2p_api, "explicit_copy, zero_copy_kernel or mpi_p2p");
  p_p2p->add_option("--size", size, "Transfer size (e.g. 1GiB)");
  p_p2p->add_option("--sdma", sdma, "Copy engines on or off")
      ->check(CLI::IsMember({"on", "off"}));
  p_p2p->add_option("--max-hops", p2p_hops, "Route length limit")->check(CLI::PositiveNumber);
  p_p2p->callback([&] {
    const auto t =
        make_transfer(true, p2p_src, true, p2p_dst, size, "device", p2p_api, sdma, false);
    fabscope_prediction* p = nullptr;
    check(fabscope_predict_p2p(&t, session.topology(), session.profile(), p2p_hops, &p));
    print_prediction(p);
  });

  auto* p_multi = predict->add_subcommand("multi", "Aggregate host bandwidth over several GCDs");
  std::vector<int> multi_gcds;
  std::optional<double> per_gcd;
  p_multi->add_option("--gcds", multi_gcds, "Participating GCDs (e.g. 0,2,4,6)")
      ->required()
      ->delimiter(',');
  p_multi->add_option("--per-gcd-bidir", per_gcd,
                      "Single-GCD bidirectional host bandwidth (overrides the profile)")
      ->check(CLI::PositiveNumber);
  p_multi->callback([&] {
    const fabscope_profile* profile = session.profile();
    ProfilePtr override_profile;
    if (per_gcd) {
      fabscope_profile* p = nullptr;
      check(fabscope_profile_with_per_gcd_bidir(profile, *per_gcd, &p));
      override_profile.reset(p);
      profile = p;
    }
    fabscope_prediction* p = nullptr;
    check(fabscope_predict_multi_gpu(session.topology(), profile, multi_gcds.data(),
                                     multi_gcds.size(), &p));
    print_prediction(p);
  });

  auto* p_stream = predict->add_subcommand("stream", "STREAM copy on local HBM");
  p_stream->callback([&] {
    fabscope_prediction* p = nullptr;
    check(fabscope_predict_local_stream(session.topology(), session.profile(), &p));
    print_prediction(p);
  });

  // latency-tier
  auto* tier = app.add_subcommand("latency-tier", "Latency tier of a GCD pair");
  int tier_a = 0, tier_b = 0;
  tier->add_option("a", tier_a, "First GCD")->required();
  tier->add_option("b", tier_b, "Second GCD")->required();
  tier->callback([&] {
    char c = 0;
    check(fabscope_latency_tier(session.topology(), tier_a, tier_b, &c));
    std::printf("%d-%d tier %c\n", tier_a, tier_b, c);
  });

  // collective
  auto* coll = app.add_subcommand("collective", "Collective latency bounds and comparison");
  coll->require_subcommand(1);
  std::string op;
  auto* c_bound = coll->add_subcommand("bound", "Latency lower bound");
  double l_min = 8.7;
  c_bound->add_option("--op", op, "Collective operation")->required();
  c_bound->add_option("--l-min", l_min, "Minimum point-to-point latency in us");
  c_bound->callback([&] {
    const auto kind = parse_enum<fabscope_collective>(FABSCOPE_ENUM_COLLECTIVE, op);
    double us = 0;
    check(fabscope_collective_lower_bound(kind, l_min, &us));
    std::printf("%s passes %d lower_bound %g us\n", op.c_str(), fabscope_collective_passes(kind),
                us);
  });

  auto* c_sim = coll->add_subcommand("simulate", "Ring schedule estimate");
  std::vector<int> ring_gcds;
  int ring_n = 8;
  std::string ring_bytes = "1MiB";
  double hop_latency = 8.7;
  c_sim->add_option("--op", op, "Collective operation")->required();
  c_sim->add_option("--gcds", ring_gcds, "Ring order (default 0..n-1)")->delimiter(',');
  c_sim->add_option("-n,--participants", ring_n, "Participant count when --gcds is absent")
      ->check(CLI::Range(2, 64));
  c_sim->add_option("--bytes", ring_bytes, "Message size (e.g. 1MiB)");
  c_sim->add_option("--hop-latency", hop_latency, "Per-step latency in us");
  c_sim->callback([&] {
    const auto kind = parse_enum<fabscope_collective>(FABSCOPE_ENUM_COLLECTIVE, op);
    const auto ring = participants(ring_gcds, ring_n);
    fabscope_collective_estimate e{};
    char* s = nullptr;
    check(fabscope_simulate_ring(kind, ring.data(), ring.size(), parse_size(ring_bytes),
                                 session.topology(), session.profile(), hop_latency, &e, &s));
    print_owned(s);
  });

  auto* c_cmp = coll->add_subcommand("compare", "Compare two backends on measured latencies");
  std::vector<std::string> cmp_data;
  std::string backend_a = "mpi", backend_b = "rccl";
  c_cmp->add_option("--data", cmp_data, "Measurement CSV files")->required();
  c_cmp->add_option("--a", backend_a, "First backend");
  c_cmp->add_option("--b", backend_b, "Second backend");
  c_cmp->callback([&] {
    const auto records = load_records(cmp_data);
    fabscope_comparison* c = nullptr;
    check(fabscope_compare_backends(records.get(), backend_a.c_str(), backend_b.c_str(), &c));
    ComparisonPtr owned(c);
    char* s = nullptr;
    check(fabscope_comparison_render(c, session.format(), &s));
    print_owned(s);
  });

  // plan
  auto* plan = app.add_subcommand("plan", "Benchmark plans");
  plan->require_subcommand(1);
  auto* plan_emit = plan->add_subcommand("emit", "Emit a plan manifest as JSON");
  std::string suite, plan_out;
  plan_emit->add_option("--suite", suite, "cpu_gpu, p2p, mpi_p2p, collectives, multi_gpu_stream")
      ->required();
  plan_emit->add_option("-o,--output", plan_out, "Write to a file instead of stdout");
  plan_emit->callback([&] {
    char* json = nullptr;
    std::size_t cases = 0;
    check(fabscope_plan_emit(suite.c_str(), session.topology(), &json, &cases));
    if (plan_out.empty()) {
      print_owned(json);
      std::printf("\n");
      return;
    }
    std::ofstream out(plan_out, std::ios::binary);
    out << json << '\n';
    fabscope_string_free(json);
    if (!out) throw ApiFailure("cannot write " + plan_out);
    std::printf("%zu cases written to %s\n", cases, plan_out.c_str());
  });

  // ingest / validate / anomalies
  std::vector<std::string> data;
  auto* ingest = app.add_subcommand("ingest", "Parse measurement CSVs and print them");
  ingest->add_option("--data", data, "Measurement CSV files")->required();
  ingest->callback([&] {
    const auto records = load_records(data);
    char* s = nullptr;
    check(fabscope_records_render(records.get(), session.format(), &s));
    print_owned(s);
  });

  auto* validate = app.add_subcommand("validate", "Compare measurements with the model");
  double tolerance = 0.10;
  validate->add_option("--data", data, "Measurement CSV files")->required();
  validate->add_option("--tolerance", tolerance, "Relative error tolerance")
      ->check(CLI::NonNegativeNumber);
  validate->callback([&] {
    const auto records = load_records(data);
    fabscope_report* r = nullptr;
    check(fabscope_validate(records.get(), session.topology(), session.profile(), tolerance, &r));
    ReportPtr owned(r);
    char* s = nullptr;
    check(fabscope_report_render(r, session.format(), &s));
    print_owned(s);
    if (fabscope_report_count(r, FABSCOPE_VERDICT_FAIL) > 0) exit_code = kExitFailures;
  });

  auto* anomalies = app.add_subcommand("anomalies", "Check measurements for known anomalies");
  anomalies->add_option("--data", data, "Measurement CSV files")->required();
  anomalies->callback([&] {
    const auto records = load_records(data);
    fabscope_report* r = nullptr;
    check(fabscope_detect_anomalies(records.get(), session.topology(), &r));
    ReportPtr owned(r);
    char* s = nullptr;
    check(fabscope_report_render_anomalies(r, session.format(), &s));
    print_owned(s);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fflush(stdout);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const ApiFailure& e) {
    std::fflush(stdout);
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return exit_code;
}
