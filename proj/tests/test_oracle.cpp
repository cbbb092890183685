#include "seqoff/oracle.hpp"

#include "seqoff/fastdp.hpp"
#include "seqoff/slow.hpp"

#include <doctest.h>

#include "instances.hpp"

#include <cmath>

using namespace seqoff;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("the frequency-grid scan agrees with the closed form it checks") {
  const auto ref =
      oracle::slow_grid(testing::default_profile(), testing::default_params(), 60.0, 10000, 2000);
  REQUIRE(ref.feasible);
  // the scan can only approach the closed form from above, within resolution
  CHECK(ref.closed_form_max_excess >= -1e-12);
  CHECK(ref.closed_form_max_excess <= 0.02);
}

TEST_CASE("the grid oracle reproduces the solver optimum") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  for (const double h : {40.0, 60.0}) {
    const auto ref = oracle::slow_grid(profile, params, h);
    const auto sol = slow::solve(profile, params, h);
    REQUIRE(ref.feasible);
    CHECK(ref.n == sol.n_star);
    CHECK(std::abs(sol.energy_j - ref.energy_j) <= 1e-3 * ref.energy_j);
  }
}

TEST_CASE("both sides agree on infeasible instances") {
  const auto profile = testing::default_profile();
  SystemParams params = testing::default_params();
  params.deadline_s = 0.05;
  const auto ref = oracle::slow_grid(profile, params, 60.0, 1000, 500);
  CHECK_FALSE(ref.feasible);
  CHECK_THROWS_AS(slow::solve(profile, params, 60.0), InfeasibleError);
}

TEST_CASE("random instances stay reproducible across streams with equal seeds") {
  RandomStream a(5), b(5);
  const auto x = oracle::random_instance(a);
  const auto y = oracle::random_instance(b);
  CHECK(x.gain == y.gain);
  CHECK(x.params.deadline_s == y.params.deadline_s);
  CHECK(x.profile.cycles() == y.profile.cycles());
}

TEST_CASE("single-state channel reduces the recursion to a deterministic split") {
  // one sub-task, two blocks, one channel state: the value is a plain
  // minimization over the grid of first-block amounts; local computing
  // misses the deadline (25 Mcycles at 500 MHz needs 0.05 s), so the
  // stopping value is the forced-offload value
  TaskProfile profile(Vector{{25e6}}, Vector{{12800.0}});
  SystemParams params = testing::tiny_params();
  params.deadline_s = 0.04;
  const auto dist = GainDistribution::discrete(Vector{{40.0}}, Vector{{1.0}});
  const Vector grid = fastdp::make_d_grid(12800.0, 64);
  const auto ref = oracle::dp_enumerate(profile, params, dist, grid);

  const double t_last = 0.04 - 25e6 / params.f_e_hz - params.coherence_s;
  const int d_idx = 64;
  double direct = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= d_idx; ++j) {
    direct = std::min(direct,
                      block_energy_j(grid[j], 40.0, params.coherence_s, params.bandwidth_hz) +
                          block_energy_j(grid[d_idx - j], 40.0, t_last, params.bandwidth_hz));
  }
  CHECK(ref.q_first[0](d_idx, 0) == doctest::Approx(direct).epsilon(1e-15));
  CHECK(ref.z[0] == doctest::Approx(direct).epsilon(1e-15));
  CHECK(ref.policy_tree_value == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("enumeration rejects instances it cannot certify") {
  const auto params = testing::tiny_params();
  const Vector grid = fastdp::make_d_grid(12800.0, 64);
  // off-grid input size
  TaskProfile off_grid(Vector{{10e6}}, Vector{{12345.0}});
  CHECK_THROWS(oracle::dp_enumerate(off_grid, params, testing::tiny_dist(), grid));
  // continuous channel
  TaskProfile ok(Vector{{10e6}}, Vector{{12800.0}});
  CHECK_THROWS(oracle::dp_enumerate(ok, params, testing::default_dist(), grid));
}

TEST_CASE("finite-difference scans") {
  Vector affine(10);
  for (int i = 0; i < 10; ++i) affine[i] = 3.0 - 0.5 * i;
  CHECK(oracle::convexity_scan(affine, oracle::ScanMode::convexity) == 0.0);
  CHECK(oracle::convexity_scan(affine, oracle::ScanMode::monotone_nonincreasing) == -0.5);

  Vector convex(257);
  for (int i = 0; i <= 256; ++i) convex[i] = block_energy_j(i * 100.0, 50.0, 0.02, 1e6);
  CHECK(oracle::convexity_scan(convex, oracle::ScanMode::convexity) >=
        -1e-12 * convex.maxCoeff());

  // a corrupted entry is flagged by both modes
  Vector corrupted = convex;
  corrupted[100] += 0.25 * convex.maxCoeff();
  CHECK(oracle::convexity_scan(corrupted, oracle::ScanMode::convexity) < 0.0);
  CHECK(oracle::convexity_scan(corrupted, oracle::ScanMode::monotone_nonincreasing) > 0.0);

  CHECK_THROWS(oracle::convexity_scan(Vector{{1.0, 2.0}}, oracle::ScanMode::convexity));
}

TEST_SUITE_END();
