// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fabscope/collectives.hpp"
#include "fabscope/measurements.hpp"
#include "oracles/ring_trace.hpp"
#include "support.hpp"

using namespace fabscope;
using testing::expect_error;
using testing::frontier;
using testing::bundled_profile;

TEST_CASE("lower bounds") {
  CHECK(passes(CollectiveKind::reduce) == 1);
  CHECK(passes(CollectiveKind::broadcast) == 1);
  CHECK(passes(CollectiveKind::allreduce) == 2);
  CHECK(passes(CollectiveKind::reduce_scatter) == 2);
  CHECK(passes(CollectiveKind::allgather) == 2);
  CHECK(lower_bound_us(CollectiveKind::reduce) == 8.7);
  CHECK(lower_bound_us(CollectiveKind::broadcast) == 8.7);
  CHECK(lower_bound_us(CollectiveKind::allreduce) == 17.4);
  CHECK(lower_bound_us(CollectiveKind::allgather, 10.0) == 20.0);
  expect_error([] { lower_bound_us(CollectiveKind::reduce, 0.0); }, ErrorCode::invalid_argument);
  CHECK(parse_collective("reduce_scatter") == CollectiveKind::reduce_scatter);
  CHECK_FALSE(parse_collective("alltoall"));
}

TEST_CASE("eight-GCD allreduce ring matches the hand trace") {
  const std::vector<int> ring{0, 1, 2, 3, 4, 5, 6, 7};
  const auto e =
      simulate_ring(CollectiveKind::allreduce, ring, 1ull << 20, frontier(), bundled_profile());
  CHECK(e.steps == oracle::ring8::kSteps);
  CHECK(e.edge_bandwidth_gbps == doctest::Approx(oracle::ring8::kSlowestEdgeGbps));
  CHECK(e.per_step_us == doctest::Approx(oracle::ring8::kStepUs).epsilon(1e-12));
  CHECK(*e.ring_estimate_us == doctest::Approx(oracle::ring8::kTotalUs).epsilon(1e-12));
  CHECK(e.lower_bound_us == 17.4);
  CHECK(*e.ring_estimate_us >= e.lower_bound_us);
}

TEST_CASE("two-rank ring converges to the bound as the message shrinks") {
  const std::vector<int> pair{0, 1};
  for (auto op : kAllCollectives) {
    const auto e = simulate_ring(op, pair, 1, frontier(), bundled_profile(), 8.7);
    CHECK(*e.ring_estimate_us == doctest::Approx(lower_bound_us(op)).epsilon(0.01));
    CHECK(*e.ring_estimate_us >= lower_bound_us(op));
  }
}

TEST_CASE("ring argument errors") {
  const auto& t = frontier();
  const auto& p = bundled_profile();
  expect_error([&] { simulate_ring(CollectiveKind::reduce, std::vector<int>{0}, 8, t, p); },
               ErrorCode::invalid_argument);
  expect_error([&] { simulate_ring(CollectiveKind::reduce, std::vector<int>{0, 1}, 0, t, p); },
               ErrorCode::invalid_argument);
  expect_error([&] { simulate_ring(CollectiveKind::reduce, std::vector<int>{0, 0}, 8, t, p); },
               ErrorCode::invalid_argument);
  expect_error([&] { simulate_ring(CollectiveKind::reduce, std::vector<int>{0, 8}, 8, t, p); },
               ErrorCode::unknown_device);
}

TEST_CASE("backend comparison") {
  LatencySeries a{"mpi", {}};
  LatencySeries b{"rccl", {}};
  for (int n = 2; n <= 4; ++n) {
    a.points_us[{CollectiveKind::allreduce, n}] = 40.0 + n;
    b.points_us[{CollectiveKind::allreduce, n}] = 20.0 + n;
    a.points_us[{CollectiveKind::reduce, n}] = 30.0;
    b.points_us[{CollectiveKind::reduce, n}] = 15.0;
    a.points_us[{CollectiveKind::broadcast, n}] = 10.0;
    b.points_us[{CollectiveKind::broadcast, n}] = 12.0;
  }
  const auto r = compare_backends(a, b);
  CHECK(r.rows.size() == 9);
  CHECK(r.overall_winner == "rccl");
  CHECK(r.exceptions == std::vector<CollectiveKind>{CollectiveKind::broadcast});
  CHECK(r.op_winner.at(CollectiveKind::broadcast) == "mpi");
  for (const auto& row : r.rows) CHECK(row.ratio >= 1.0);

  b.points_us.erase({CollectiveKind::reduce, 3});
  const auto e = expect_error([&] { compare_backends(a, b); }, ErrorCode::grid_mismatch);
  CHECK(e.rule() == "grid mismatch");
  CHECK(std::string(e.what()).find("reduce/3 missing from rccl") != std::string::npos);
}

TEST_CASE("comparison of the collective fixture") {
  const auto recs = testing::fixture("paper/collectives.csv");
  const auto r = compare_backends(collective_series(recs, "mpi"), collective_series(recs, "rccl"));
  CHECK(r.rows.size() == 35);
  CHECK(r.overall_winner == "rccl");
  CHECK(r.exceptions == std::vector<CollectiveKind>{CollectiveKind::broadcast});
  for (const auto& rec : recs) {
    const auto parsed = parse_collective_benchmark(rec.benchmark);
    REQUIRE(parsed);
    CHECK(rec.value >= lower_bound_us(parsed->op));
  }
}

TEST_CASE("tie handling") {
  LatencySeries a{"x", {{{CollectiveKind::reduce, 2}, 9.0}}};
  LatencySeries b{"y", {{{CollectiveKind::reduce, 2}, 9.0}}};
  const auto r = compare_backends(a, b);
  CHECK_FALSE(r.rows[0].winner);
  CHECK(r.rows[0].ratio == 1.0);
  CHECK_FALSE(r.overall_winner);
  CHECK(r.exceptions.empty());
}
