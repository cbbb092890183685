#include "seqoff/oracle.hpp"
#include "seqoff/types.hpp"

#include <doctest.h>

#include "instances.hpp"

#include <cmath>
#include <numbers>

using namespace seqoff;

TEST_SUITE_BEGIN("core");

TEST_CASE("local computing time") {
  CHECK(local_time(7e6, 5e8).seconds() == doctest::Approx(0.014).epsilon(1e-12));
  CHECK(local_time(3e9, 3e9).seconds() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(local_time(12345.0, 12345.0).seconds() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(local_time(1e6, 0.0), std::domain_error);

  // time * frequency recovers the cycle count
  RandomStream stream(7);
  for (int i = 0; i < 200; ++i) {
    const double l = 1e3 + stream.next_uniform() * 1e10;
    const double f = 1e5 + stream.next_uniform() * 1e10;
    CHECK(std::abs(local_time(l, f).seconds() * f - l) <= 1e-12 * l);
  }
}

TEST_CASE("local computing energy") {
  CHECK(local_energy(7e6, 5e8, 1e-28).joules() == doctest::Approx(1.75e-4).epsilon(1e-12));
  CHECK(local_energy(1e7, 0.0, 1e-28).joules() == 0.0);
  CHECK(local_energy(0.0, 1e9, 1e-28).joules() == 0.0);
}

TEST_CASE("block offloading energy") {
  CHECK(block_energy(0.0, Gain(50.0), Duration(0.02), 1e6).joules() == 0.0);
  // d = W t ln2 makes the exponential term exactly 1, so e = t/h
  const double d = 1e6 * 0.02 * std::numbers::ln2;
  CHECK(block_energy(d, Gain(50.0), Duration(0.02), 1e6).joules() ==
        doctest::Approx(4.0e-4).epsilon(1e-12));
  CHECK_THROWS_AS(block_energy(1.0, Gain(0.0), Duration(0.02), 1e6), std::domain_error);
  CHECK_THROWS_AS(block_energy(1.0, Gain(50.0), Duration(0.0), 1e6), std::domain_error);
}

TEST_CASE("block energy is convex and increasing in the amount") {
  Vector values(257);
  for (int i = 0; i <= 256; ++i) {
    values[i] = block_energy_j(i * 200.0, 50.0, 0.02, 1e6);
  }
  const double scale = values.maxCoeff();
  CHECK(oracle::convexity_scan(values, oracle::ScanMode::convexity) >= -1e-12 * scale);
  // increasing: the negated sequence never increases
  CHECK(oracle::convexity_scan(-values, oracle::ScanMode::monotone_nonincreasing) <= 0.0);
}

TEST_CASE("block energy never increases with the block duration") {
  for (const double d : {500.0, 5e3, 2e4}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 200; ++k) {
      const double t = 0.02 * k / 200.0;
      const double e = block_energy_j(d, 50.0, t, 1e6);
      CHECK(e <= prev * (1.0 + 1e-12));
      CHECK(e >= 0.0);
      CHECK(std::isfinite(e));
      prev = e;
    }
  }
}

TEST_CASE("bits to nats") {
  CHECK(bits_to_nats(36000.0) == doctest::Approx(24953.3).epsilon(1e-5));
  CHECK(bits_to_nats(36000.0) == 36000.0 * std::numbers::ln2);
  CHECK(bits_to_nats(0.0) == 0.0);
  CHECK(bits_to_nats(1.0 / std::numbers::ln2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("prefix and suffix schedule sums") {
  const TaskProfile profile = testing::default_profile();
  CHECK(edge_suffix_time(profile, 1, 3e9).seconds() == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(edge_suffix_time(profile, 3, 3e9).seconds() ==
        doctest::Approx(0.0776666666666667).epsilon(1e-12));
  CHECK(local_prefix_time(profile, 1, 5e8).seconds() == 0.0);
  CHECK(local_prefix_time(profile, 3, 5e8).seconds() == doctest::Approx(0.074).epsilon(1e-12));
  CHECK_THROWS_AS(edge_suffix_time(profile, 0, 3e9), std::out_of_range);
  CHECK_THROWS_AS(local_prefix_time(profile, 11, 5e8), std::out_of_range);
}

TEST_CASE("profile and parameter invariants") {
  CHECK_THROWS(TaskProfile(Vector{{1.0, 2.0}}, Vector{{1.0}}));
  CHECK_THROWS(TaskProfile(Vector{{0.0}}, Vector{{1.0}}));
  CHECK_THROWS(TaskProfile(Vector{{1.0}}, Vector{{-2.0}}));

  SystemParams p = testing::default_params();
  CHECK_NOTHROW(p.validate());
  p.f_e_hz = p.f_max_hz;  // edge must be strictly faster
  CHECK_THROWS_AS(p.validate(), std::domain_error);
  p = testing::default_params();
  p.f_l_hz = p.f_max_hz * 2.0;
  CHECK_THROWS_AS(p.validate(), std::domain_error);
  p = testing::default_params();
  p.k0 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::domain_error);
}

TEST_SUITE_END();
