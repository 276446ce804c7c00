// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "fabscope/error.hpp"
#include "fabscope/measurements.hpp"
#include "fabscope/topology.hpp"
#include "fabscope/xfer_model.hpp"

#ifndef FABSCOPE_SOURCE_DIR
#error "FABSCOPE_SOURCE_DIR must point at the source tree"
#endif

namespace testing {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(FABSCOPE_SOURCE_DIR) / rel;
}

inline const fabscope::Topology& frontier() {
  static const auto t = fabscope::Topology::load_file(source_path("data/frontier-node.json"));
  return t;
}

inline const fabscope::CalibrationProfile& bundled_profile() {
  static const auto p =
      fabscope::CalibrationProfile::load_file(source_path("data/mi250x-paper.json"));
  return p;
}

inline std::vector<fabscope::MeasurementRecord> fixture(const std::string& rel) {
  return fabscope::ingest_csv_file(source_path("fixtures/" + rel));
}

inline std::vector<fabscope::MeasurementRecord> reference_fixtures() {
  std::vector<fabscope::MeasurementRecord> all;
  for (const char* f : {"collectives.csv", "cpu_gpu.csv", "latency.csv", "mpi_p2p.csv",
                        "multi_gpu.csv", "p2p.csv", "p2p_sweep.csv", "zero_copy.csv"}) {
    auto part = fixture(std::string("paper/") + f);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

inline std::vector<fabscope::MeasurementRecord> healthy_fixtures() {
  std::vector<fabscope::MeasurementRecord> all;
  for (const char* f : {"latency.csv", "multi_gpu.csv", "p2p.csv"}) {
    auto part = fixture(std::string("healthy/") + f);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

// Runs `fn`, expecting a fabscope::Error with the given code; returns it.
template <typename Fn>
fabscope::Error expect_error(Fn&& fn, fabscope::ErrorCode code) {
  try {
    fn();
  } catch (const fabscope::Error& e) {
    if (e.code() != code)
      throw std::runtime_error(std::string("wrong error code for: ") + e.what());
    return e;
  }
  throw std::runtime_error("expected an error, none thrown");
}

}  // namespace testing
