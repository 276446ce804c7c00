// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fabscope/error.hpp"
#include "fabscope/format.hpp"
#include "fabscope/measurements.hpp"

namespace fabscope {

namespace {

constexpr std::size_t kColumns = 9;

[[noreturn]] void fail_line(std::size_t line, const std::string& rule, const std::string& what) {
  throw Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + rule + ": " + what,
              rule, line);
}

template <typename Int>
Int parse_int(std::string_view text, std::size_t line, const char* column) {
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    fail_line(line, "malformed row", std::string(column) + " '" + std::string(text) +
                                         "' is not a non-negative integer");
  if constexpr (std::is_signed_v<Int>) {
    if (v < 0)
      fail_line(line, "malformed row", std::string(column) + " must be non-negative");
  }
  return v;
}

std::optional<EndpointKind> parse_endpoint_kind(std::string_view name) {
  for (auto k : {EndpointKind::host, EndpointKind::gcd, EndpointKind::numa, EndpointKind::group})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

bool recognized_env_key(std::string_view key) {
  if (key.starts_with("x-") && key.size() > 2) return true;
  return std::find(std::begin(kRecognizedEnvKeys), std::end(kRecognizedEnvKeys), key) !=
         std::end(kRecognizedEnvKeys);
}

// Splits into at most `kColumns` fields; the env column keeps any further
// commas (e.g. HIP_VISIBLE_DEVICES=0,2).
std::vector<std::string_view> split_row(std::string_view row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (fields.size() + 1 < kColumns) {
    const auto comma = row.find(',', start);
    if (comma == std::string_view::npos) break;
    fields.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
  fields.push_back(row.substr(start));
  return fields;
}

MeasurementRecord parse_row(std::string_view row, std::size_t line) {
  const auto f = split_row(row);
  if (f.size() != kColumns)
    fail_line(line, "malformed row",
              "expected " + std::to_string(kColumns) + " columns, got " +
                  std::to_string(f.size()));

  MeasurementRecord r;
  r.line = line;
  r.benchmark = std::string(f[0]);
  if (r.benchmark.empty()) fail_line(line, "malformed row", "empty benchmark");

  const auto src_kind = parse_endpoint_kind(f[1]);
  const auto dst_kind = parse_endpoint_kind(f[3]);
  if (!src_kind) fail_line(line, "malformed row", "unknown src_kind '" + std::string(f[1]) + "'");
  if (!dst_kind) fail_line(line, "malformed row", "unknown dst_kind '" + std::string(f[3]) + "'");
  r.src = {*src_kind, parse_int<int>(f[2], line, "src_id")};
  r.dst = {*dst_kind, parse_int<int>(f[4], line, "dst_id")};
  r.size_bytes = parse_int<std::uint64_t>(f[5], line, "size_bytes");

  const auto metric = parse_metric(f[6]);
  if (!metric) fail_line(line, "unknown metric", "'" + std::string(f[6]) + "'");
  r.metric = *metric;

  const auto vtext = f[7];
  auto [ptr, ec] = std::from_chars(vtext.data(), vtext.data() + vtext.size(), r.value);
  if (ec != std::errc() || ptr != vtext.data() + vtext.size() || vtext.empty() ||
      !std::isfinite(r.value))
    fail_line(line, "malformed row", "value '" + std::string(vtext) + "' is not a number");
  if (!(r.value > 0.0))
    fail_line(line, "non-positive value", "value " + std::string(vtext) + " must be > 0");

  std::string_view env = f[8];
  while (!env.empty()) {
    const auto semi = env.find(';');
    const auto item = env.substr(0, semi);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      fail_line(line, "malformed env", "'" + std::string(item) + "' is not key=value");
    const auto key = item.substr(0, eq);
    if (!recognized_env_key(key))
      fail_line(line, "unknown env key", "'" + std::string(key) + "' (use an x- prefix)");
    r.env.emplace_back(std::string(key), std::string(item.substr(eq + 1)));
    if (semi == std::string_view::npos) break;
    env.remove_prefix(semi + 1);
    if (env.empty()) fail_line(line, "malformed env", "trailing ';'");
  }
  return r;
}

}  // namespace

std::string_view to_string(EndpointKind kind) {
  switch (kind) {
    case EndpointKind::host: return "host";
    case EndpointKind::gcd: return "gcd";
    case EndpointKind::numa: return "numa";
    case EndpointKind::group: return "group";
  }
  return "?";
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::bandwidth_unidir_gbps: return "bandwidth_unidir_gbps";
    case Metric::bandwidth_bidir_gbps: return "bandwidth_bidir_gbps";
    case Metric::latency_us: return "latency_us";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (auto m : {Metric::bandwidth_unidir_gbps, Metric::bandwidth_bidir_gbps, Metric::latency_us})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::optional<std::string_view> MeasurementRecord::env_value(std::string_view key) const {
  for (const auto& [k, v] : env)
    if (k == key) return std::string_view(v);
  return std::nullopt;
}

std::vector<MeasurementRecord> ingest_csv(std::string_view document) {
  std::vector<MeasurementRecord> out;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!document.empty()) {
    const auto nl = document.find('\n');
    auto line = document.substr(0, nl);
    document = nl == std::string_view::npos ? std::string_view{} : document.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (!header_seen) {
      if (line != kCsvHeader)
        fail_line(line_no, "header mismatch", "expected '" + std::string(kCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    out.push_back(parse_row(line, line_no));
  }
  return out;
}

std::vector<MeasurementRecord> ingest_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open measurement file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    auto records = ingest_csv(buf.str());
    const auto name = path.filename().string();
    for (auto& r : records) r.source = name;
    return records;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.rule(), e.line());
  }
}

std::string serialize_csv(std::span<const MeasurementRecord> records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.benchmark;
    out += ',';
    out += to_string(r.src.kind);
    out += ',' + std::to_string(r.src.id) + ',';
    out += to_string(r.dst.kind);
    out += ',' + std::to_string(r.dst.id) + ',' + std::to_string(r.size_bytes) + ',';
    out += to_string(r.metric);
    out += ',' + format_exact(r.value) + ',';
    for (std::size_t i = 0; i < r.env.size(); ++i) {
      if (i) out += ';';
      out += r.env[i].first + '=' + r.env[i].second;
    }
    out += '\n';
  }
  return out;
}

}  // namespace fabscope
