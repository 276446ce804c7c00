// SPDX-License-Identifier: Apache-2.0
#include "fabscope/render.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "fabscope/format.hpp"

namespace fabscope {

namespace {

using Row = std::vector<std::string>;

// Left-aligned columns separated by two spaces; no trailing whitespace.
std::string table(const Row& header, const std::vector<Row>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto grow = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], r[i].size());
  };
  grow(header);
  for (const auto& r : rows) grow(r);
  std::string out;
  auto emit = [&](const Row& r) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    out += line + '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string csv(const Row& header, const std::vector<Row>& rows) {
  std::string out;
  auto emit = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_field(r[i]);
    }
    out += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

std::string render(const Row& header, const std::vector<Row>& rows, OutputFormat format) {
  return format == OutputFormat::csv ? csv(header, rows) : table(header, rows);
}

std::string endpoint(const Endpoint& e) {
  return std::string(to_string(e.kind)) + ":" + std::to_string(e.id);
}

std::string opt_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("-");
}

// "p2p.csv:7" for file records, "7" for in-memory ones.
std::string location(const MeasurementRecord& r) {
  return r.source.empty() ? std::to_string(r.line) : r.source + ":" + std::to_string(r.line);
}

std::string lines_of(std::span<const MeasurementRecord> records,
                     const std::vector<std::size_t>& indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ' ';
    const auto& r = records[indices[i]];
    out += r.line ? location(r) : "#" + std::to_string(indices[i]);
  }
  return out;
}

}  // namespace

std::optional<OutputFormat> parse_output_format(std::string_view name) {
  if (name == "table") return OutputFormat::table;
  if (name == "csv") return OutputFormat::csv;
  return std::nullopt;
}

std::string render_topology_summary(const Topology& t) {
  std::size_t per_tier[4] = {0, 0, 0, 0};
  for (const auto& l : t.links()) ++per_tier[static_cast<std::size_t>(l.tier)];
  std::ostringstream out;
  out << "topology ok: " << t.count(DeviceKind::gcd) << " gcds, " << t.count(DeviceKind::numa)
      << " numa domains, " << t.links().size() << " links\n";
  for (auto tier : kAllTiers) {
    out << "  " << to_string(tier) << ": " << per_tier[static_cast<std::size_t>(tier)]
        << " links x " << format_number(t.tiers().at(tier)) << " GB/s/dir\n";
  }
  out << "  memory: hbm " << format_number(t.memory().hbm_gbps) << " GB/s, cpu "
      << format_number(t.memory().cpu_mem_gbps) << " GB/s, cpu latency "
      << format_number(t.memory().cpu_mem_latency_ns) << " ns\n";
  return out.str();
}

std::string render_neighbors(const Topology& t, DeviceRef ref) {
  std::vector<Row> rows;
  for (const auto& n : t.neighbors(ref))
    rows.push_back({to_string(n.device), std::string(to_string(n.tier)),
                    format_number(t.tiers().at(n.tier))});
  return table({"neighbor", "tier", "gbps_per_dir"}, rows);
}

std::string render_matrix(const PairMatrix& m, OutputFormat format) {
  if (format == OutputFormat::csv) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j)
        rows.push_back({std::to_string(m.ids[i]), std::to_string(m.ids[j]),
                        format_number(m.at(i, j))});
    return csv({"src", "dst", "value"}, rows);
  }
  Row header{std::string(to_string(m.metric))};
  for (int id : m.ids) header.push_back(std::to_string(id));
  std::vector<Row> rows;
  for (std::size_t i = 0; i < m.size(); ++i) {
    Row r{std::to_string(m.ids[i])};
    for (std::size_t j = 0; j < m.size(); ++j) r.push_back(format_number(m.at(i, j)));
    rows.push_back(std::move(r));
  }
  return table(header, rows);
}

std::string render_route(const Route& route) {
  return format_hops(route) + " bottleneck " + format_number(route.bottleneck_gbps) +
         " GB/s/dir\n";
}

std::string render_prediction(const PerfPrediction& p) {
  std::ostringstream out;
  if (p.unstable) {
    out << "bandwidth: unstable\n";
  } else if (p.bandwidth_gbps) {
    out << "bandwidth: " << format_number(*p.bandwidth_gbps) << " GB/s "
        << to_string(p.direction) << "\n";
  }
  if (p.interval)
    out << "interval: [" << format_number(p.interval->first) << ", "
        << format_number(p.interval->second) << "] GB/s\n";
  if (p.latency_tier) out << "latency tier: " << to_string(*p.latency_tier) << "\n";
  if (p.route) out << "route: " << render_route(*p.route);
  if (p.small_transfer) out << "small transfer: yes\n";
  out << "rule: " << p.rule << "\n";
  return out.str();
}

std::string render_estimate(const CollectiveEstimate& e) {
  std::ostringstream out;
  out << "op: " << to_string(e.op) << " (" << passes(e.op) << " pass"
      << (passes(e.op) > 1 ? "es" : "") << ")\n";
  out << "participants: " << e.participants << "\n";
  out << "message: " << e.message_bytes << " bytes\n";
  out << "lower bound: " << format_number(e.lower_bound_us) << " us\n";
  if (e.ring_estimate_us) {
    out << "ring estimate: " << format_number(*e.ring_estimate_us) << " us (" << e.steps
        << " steps x " << format_number(e.per_step_us) << " us)\n";
    out << "slowest edge: " << format_number(e.edge_bandwidth_gbps) << " GB/s\n";
  }
  if (!e.rule.empty()) out << "rule: " << e.rule << "\n";
  return out.str();
}

std::string render_comparison(const ComparisonReport& r, OutputFormat format) {
  std::vector<Row> rows;
  for (const auto& row : r.rows) {
    rows.push_back({std::string(to_string(row.op)), std::to_string(row.participants),
                    format_number(row.a_us), format_number(row.b_us),
                    row.winner.value_or("tie"), format_number(row.ratio)});
  }
  std::string out = render(
      {"collective", "participants", r.label_a + "_us", r.label_b + "_us", "winner", "ratio"},
      rows, format);
  if (format == OutputFormat::csv) return out;
  out += "\nper-collective winner:\n";
  for (const auto& [op, winner] : r.op_winner)
    out += "  " + std::string(to_string(op)) + ": " + winner.value_or("tie") + "\n";
  out += "overall: " + r.overall_winner.value_or("tie") + "\n";
  out += "exceptions:";
  if (r.exceptions.empty()) out += " none";
  for (auto op : r.exceptions) out += " " + std::string(to_string(op));
  out += "\n";
  return out;
}

std::string render_records(std::span<const MeasurementRecord> records, OutputFormat format) {
  if (format == OutputFormat::csv) return serialize_csv(records);
  std::vector<Row> rows;
  for (const auto& r : records) {
    std::string env;
    for (std::size_t i = 0; i < r.env.size(); ++i)
      env += (i ? ";" : "") + r.env[i].first + "=" + r.env[i].second;
    rows.push_back({location(r), r.benchmark, endpoint(r.src), endpoint(r.dst),
                    std::to_string(r.size_bytes), std::string(to_string(r.metric)),
                    format_number(r.value), env.empty() ? "-" : env});
  }
  return table({"location", "benchmark", "src", "dst", "size_bytes", "metric", "value", "env"},
               rows) +
         std::to_string(records.size()) + " records\n";
}

std::string render_report(std::span<const MeasurementRecord> records,
                          const ValidationReport& report, OutputFormat format) {
  std::vector<Row> rows;
  for (const auto& v : report.verdicts) {
    const auto& r = records[v.index];
    rows.push_back({location(r), r.benchmark, endpoint(r.src), endpoint(r.dst),
                    std::string(to_string(r.metric)), format_number(r.value),
                    opt_number(v.predicted),
                    v.relative_error ? format_number(*v.relative_error) : "-",
                    std::string(to_string(v.verdict)), v.rule});
  }
  const Row header{"location", "benchmark", "src",     "dst",     "metric",
                   "measured", "predicted", "rel_err", "verdict", "rule"};
  if (format == OutputFormat::csv) return csv(header, rows);

  std::string out = table(header, rows);
  out += "\nsummary: " + std::to_string(report.verdicts.size()) + " records, " +
         std::to_string(report.count(Verdict::pass)) + " pass, " +
         std::to_string(report.count(Verdict::fail)) + " fail, " +
         std::to_string(report.count(Verdict::unmodeled)) + " unmodeled (tolerance " +
         format_number(report.tolerance * 100.0) + "%)\n\n";
  out += render_anomalies(records, report.anomalies, OutputFormat::table);
  return out;
}

std::string render_anomalies(std::span<const MeasurementRecord> records,
                             std::span<const AnomalyFinding> findings, OutputFormat format) {
  std::vector<Row> rows;
  for (const auto& f : findings) {
    std::string missing;
    for (std::size_t i = 0; i < f.missing.size(); ++i)
      missing += (i ? "; " : "") + f.missing[i];
    rows.push_back({f.signature, std::string(to_string(f.status)), f.detail,
                    f.evidence.empty() ? "-" : lines_of(records, f.evidence),
                    missing.empty() ? "-" : missing});
  }
  const Row header{"signature", "status", "detail", "evidence", "missing"};
  if (format == OutputFormat::csv) return csv(header, rows);

  std::string out;
  std::vector<std::string> fired;
  for (const auto& f : findings)
    if (f.status == AnomalyStatus::fired) fired.push_back(f.signature);
  out += "anomalies:";
  if (fired.empty()) out += " none";
  for (const auto& s : fired) out += " " + s;
  out += "\n";
  for (const auto& f : findings) {
    out += "  " + f.signature + ": " + std::string(to_string(f.status));
    if (!f.detail.empty()) out += " (" + f.detail + ")";
    out += "\n";
    if (!f.evidence.empty()) out += "    evidence: " + lines_of(records, f.evidence) + "\n";
    if (!f.missing.empty()) {
      out += "    missing:";
      for (const auto& m : f.missing) out += " " + m + ";";
      out.pop_back();
      out += "\n";
    }
  }
  return out;
}

}  // namespace fabscope
