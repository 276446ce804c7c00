// SPDX-License-Identifier: Apache-2.0
// Hand trace of the 8-rank allreduce ring (order 0..7, 1 MiB) on the bundled
// node and profile, worked out by hand and with exact fractions.
//
// ring edge  widest route  bottleneck (GB/s/dir)
//   0-1      0-1           200
//   1-2      1-0-2          50
//   2-3      2-3           200
//   3-4      3-2-4         100
//   4-5      4-5           200
//   5-6      5-4-6          50
//   6-7      6-7           200
//   7-0      7-6-0         100
//
// slowest edge 50 GB/s/dir; kernel unidirectional rate 0.435 * 2 * 50 / 2 = 21.75 GB/s
// chunk = 2^20 / 8 = 131072 bytes -> 131072 / 21.75e9 s = 6.026298850574713 us
// step  = 8.7 + 6.026298850574713 = 14.726298850574713 us
// steps = 2 passes * (8 - 1) = 14
// total = 14 * step = 2242079 / 10875 us = 206.168183908046 us
#pragma once

namespace oracle::ring8 {

inline constexpr int kSteps = 14;
inline constexpr double kSlowestEdgeGbps = 21.75;
inline constexpr double kChunkUs = 6.026298850574713;
inline constexpr double kStepUs = 14.726298850574713;
inline constexpr double kTotalUs = 2242079.0 / 10875.0;

}  // namespace oracle::ring8
