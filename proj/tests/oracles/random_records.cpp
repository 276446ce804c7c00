// SPDX-License-Identifier: Apache-2.0
#include "oracles/random_records.hpp"

#include <cmath>
#include <iterator>
#include <string>
#include <string_view>

namespace oracle {

namespace {

std::string random_token(std::mt19937_64& rng, std::size_t max_len, bool allow_comma) {
  static constexpr std::string_view kChars = "abcdefghijklmnopqrstuvwxyz0123456789_-.";
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, kChars.size() - 1);
  std::string s;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) {
    if (allow_comma && rng() % 6 == 0) s += ',';
    else s += kChars[pick(rng)];
  }
  return s;
}

}  // namespace

fabscope::MeasurementRecord random_record(std::mt19937_64& rng) {
  using namespace fabscope;
  static constexpr std::string_view kBench[] = {
      "p2p", "p2p_stream", "mpi_p2p", "h2d_pinned", "multi_stream", "rccl_allreduce",
      "mpi_broadcast", "stream_local"};
  static constexpr EndpointKind kKinds[] = {EndpointKind::host, EndpointKind::gcd,
                                            EndpointKind::numa, EndpointKind::group};
  static constexpr Metric kMetrics[] = {Metric::bandwidth_unidir_gbps,
                                        Metric::bandwidth_bidir_gbps, Metric::latency_us};
  MeasurementRecord r;
  r.benchmark = rng() % 5 ? std::string(kBench[rng() % std::size(kBench)])
                          : "x" + random_token(rng, 12, false);
  r.src = {kKinds[rng() % 4], static_cast<int>(rng() % 64)};
  r.dst = {kKinds[rng() % 4], static_cast<int>(rng() % 64)};
  r.size_bytes = rng() >> (rng() % 64);
  r.metric = kMetrics[rng() % 3];
  std::uniform_real_distribution<double> mantissa(1.0, 10.0);
  std::uniform_int_distribution<int> exponent(-12, 12);
  r.value = mantissa(rng) * std::pow(10.0, exponent(rng));
  for (std::size_t i = 0, n = rng() % 4; i < n; ++i) {
    std::string key = rng() % 2
                          ? std::string(kRecognizedEnvKeys[rng() % std::size(kRecognizedEnvKeys)])
                          : "x-" + random_token(rng, 8, false) + "k";
    r.env.emplace_back(std::move(key), random_token(rng, 10, true));
  }
  return r;
}

std::vector<fabscope::MeasurementRecord> random_document(std::mt19937_64& rng) {
  std::vector<fabscope::MeasurementRecord> recs;
  for (std::size_t i = 0, n = 1 + rng() % 40; i < n; ++i) recs.push_back(random_record(rng));
  return recs;
}

}  // namespace oracle
