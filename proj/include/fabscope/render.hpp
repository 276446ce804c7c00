// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "fabscope/collectives.hpp"
#include "fabscope/measurements.hpp"
#include "fabscope/routing.hpp"
#include "fabscope/topology.hpp"
#include "fabscope/xfer_model.hpp"

namespace fabscope {

enum class OutputFormat : std::uint8_t { table, csv };
std::optional<OutputFormat> parse_output_format(std::string_view name);

std::string render_topology_summary(const Topology& t);
std::string render_neighbors(const Topology& t, DeviceRef ref);
/// csv: "src,dst,value" triples, diagonal included.
std::string render_matrix(const PairMatrix& m, OutputFormat format);
std::string render_route(const Route& route);
std::string render_prediction(const PerfPrediction& p);
std::string render_estimate(const CollectiveEstimate& e);
std::string render_comparison(const ComparisonReport& r, OutputFormat format);
/// csv: the canonical measurement CSV.
std::string render_records(std::span<const MeasurementRecord> records, OutputFormat format);
std::string render_report(std::span<const MeasurementRecord> records,
                          const ValidationReport& report, OutputFormat format);
std::string render_anomalies(std::span<const MeasurementRecord> records,
                             std::span<const AnomalyFinding> findings, OutputFormat format);

}  // namespace fabscope
