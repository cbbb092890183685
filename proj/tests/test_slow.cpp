#include "seqoff/slow.hpp"

#include <doctest.h>

#include "instances.hpp"

#include <cmath>
#include <limits>

using namespace seqoff;

namespace {

double objective(const TaskProfile& profile, const SystemParams& params, int n, double h,
                 double tau) {
  return slow::offload_energy_j(profile, params, n, h, tau) +
         slow::optimal_freqs(profile, params, n, tau).energy_j;
}

}  // namespace

TEST_SUITE_BEGIN("slow");

TEST_CASE("offload duration budget") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  CHECK(slow::tau_budget(profile, params, 3) ==
        doctest::Approx(0.1983333333333333).epsilon(1e-12));
  CHECK(slow::tau_budget(profile, params, 1) == doctest::Approx(0.26).epsilon(1e-12));

  SystemParams tight = params;
  tight.deadline_s = 0.05;  // below the n = 1 edge suffix of 0.09 s
  for (int n = 1; n <= profile.size(); ++n) CHECK(slow::tau_budget(profile, tight, n) <= 0.0);
}

TEST_CASE("closed-form prefix frequency") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();

  const auto alloc = slow::optimal_freqs(profile, params, 3, 0.1);
  CHECK(alloc.freq_hz == doctest::Approx(3.7e7 / 0.1723333333333333).epsilon(1e-12));
  CHECK(alloc.energy_j ==
        doctest::Approx(1e-28 * std::pow(3.7e7, 3) / std::pow(0.1723333333333333, 2))
            .epsilon(1e-12));

  CHECK(slow::optimal_freqs(profile, params, 1, 0.1).energy_j == 0.0);

  // at the budget endpoint the closed form lands exactly on f_max
  const double budget = slow::tau_budget(profile, params, 3);
  CHECK(slow::optimal_freqs(profile, params, 3, budget).freq_hz ==
        doctest::Approx(params.f_max_hz).epsilon(1e-9));

  CHECK_THROWS_AS(slow::optimal_freqs(profile, params, 3, budget * 1.01), std::domain_error);
  CHECK_THROWS_AS(slow::optimal_freqs(profile, params, 3, 0.0), std::domain_error);
}

TEST_CASE("inner solve matches a dense grid scan") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  for (const int n : {2, 3, 5}) {
    for (const double h : {40.0, 60.0}) {
      const auto inner = slow::inner_solve(profile, params, n, h);
      REQUIRE(inner.feasible);

      const double budget = slow::tau_budget(profile, params, n);
      double grid_best = std::numeric_limits<double>::infinity();
      const int points = 1000000;
      for (int k = 1; k <= points; ++k) {
        grid_best = std::min(grid_best, objective(profile, params, n, h, budget * k / points));
      }
      CHECK(std::abs(inner.energy_j - grid_best) <= 1e-3 * grid_best);
      // minimizer beats both interval endpoints
      CHECK(inner.energy_j <= objective(profile, params, n, h, budget) * (1.0 + 1e-12));
      CHECK(inner.energy_j <= objective(profile, params, n, h, budget * 1e-4));
    }
  }
}

TEST_CASE("golden-section iteration count stays within the log bound") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  const double tol = 1e-6;
  for (const int n : {2, 4, 7}) {
    const auto inner = slow::inner_solve(profile, params, n, 50.0, tol);
    REQUIRE(inner.feasible);
    const double budget = slow::tau_budget(profile, params, n);
    const int bound =
        static_cast<int>(std::ceil(std::log(budget / tol) / std::log(1.0 / 0.618))) + 2;
    CHECK(inner.iterations <= bound);
  }
}

TEST_CASE("doubling the gain never increases the optimum") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  for (const int n : {1, 2, 3}) {
    double prev = std::numeric_limits<double>::infinity();
    for (const double h : {20.0, 40.0, 80.0, 160.0}) {
      const auto inner = slow::inner_solve(profile, params, n, h);
      REQUIRE(inner.feasible);
      CHECK(inner.energy_j <= prev * (1.0 + 1e-12));
      prev = inner.energy_j;
    }
  }
}

TEST_CASE("solve returns the argmin with reconstructed power and frequencies") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  const auto sol = slow::solve(profile, params, 60.0);

  // smallest index attaining the minimum wins
  double best = std::numeric_limits<double>::infinity();
  int first_argmin = 0;
  for (const auto& r : sol.per_index) {
    if (r.feasible && r.energy_j < best) {
      best = r.energy_j;
      first_argmin = r.n;
    }
  }
  CHECK(sol.n_star == first_argmin);
  CHECK(sol.energy_j == best);

  // transmit power reproduces the offloading term
  const double d_n = profile.input_nats()[sol.n_star - 1];
  const double offload_j = sol.transmit_power_w * sol.tau_t_s;
  CHECK(offload_j == doctest::Approx(slow::offload_energy_j(profile, params, sol.n_star, 60.0,
                                                            sol.tau_t_s))
                         .epsilon(1e-12));
  CHECK(sol.transmit_power_w ==
        doctest::Approx(std::expm1(d_n / (params.bandwidth_hz * sol.tau_t_s)) / 60.0)
            .epsilon(1e-12));

  // deadline exactly active, equal prefix frequencies within the cap
  CHECK(sol.time_total_s == doctest::Approx(params.deadline_s).epsilon(1e-9));
  REQUIRE(sol.n_star >= 2);
  CHECK(sol.freqs_hz.size() == sol.n_star - 1);
  CHECK(sol.freqs_hz.maxCoeff() == sol.freqs_hz.minCoeff());
  CHECK(sol.freqs_hz[0] <= params.f_max_hz * (1.0 + 1e-9));
}

TEST_CASE("no feasible perturbation of the offload duration improves a solution") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  for (const double h : {30.0, 60.0, 120.0}) {
    const auto sol = slow::solve(profile, params, h);
    const double budget = slow::tau_budget(profile, params, sol.n_star);
    for (const double sgn : {-1.0, 1.0}) {
      const double tau = sol.tau_t_s * (1.0 + sgn * 1e-4);
      if (!(tau > 0.0) || tau > budget) continue;
      CHECK(objective(profile, params, sol.n_star, h, tau) >= sol.energy_j * (1.0 - 1e-6));
    }
  }
}

TEST_CASE("energy never increases along relaxing parameter sweeps") {
  const auto profile = testing::default_profile();
  auto run = [&](auto&& mutate, const std::vector<double>& values) {
    double prev = std::numeric_limits<double>::infinity();
    for (const double v : values) {
      SystemParams p = testing::default_params();
      mutate(p, v);
      const double e = slow::solve(profile, p, 60.0).energy_j;
      CHECK(e <= prev * (1.0 + 1e-9));
      prev = e;
    }
  };
  run([](SystemParams& p, double v) { p.f_e_hz = v; },
      {2.4e9, 2.6e9, 2.8e9, 3.0e9, 3.2e9, 3.4e9, 3.6e9});
  run([](SystemParams& p, double v) { p.deadline_s = v; },
      {0.30, 0.32, 0.34, 0.36, 0.38, 0.40});
}

TEST_CASE("an unmeetable deadline raises an infeasible-instance error") {
  const auto profile = testing::default_profile();
  SystemParams params = testing::default_params();
  params.deadline_s = 0.05;
  CHECK_THROWS_WITH_AS(slow::solve(profile, params, 60.0) /* 0.05 < 0.09 suffix */,
                       doctest::Contains("deadline"), InfeasibleError);
}

TEST_CASE("the full-local note appears when running locally would be cheaper") {
  // single cheap sub-task with a huge input: offloading is expensive, local is
  // nearly free, but full-local execution is outside the optimization space
  TaskProfile profile(Vector{{1e6}}, Vector{{5e5}});
  SystemParams params = testing::default_params();
  params.deadline_s = 0.3;
  const auto sol = slow::solve(profile, params, 0.5);
  CHECK(sol.full_local_feasible);
  const double f_req = 1e6 / 0.3;
  CHECK(sol.full_local_energy_j == doctest::Approx(params.k0 * 1e6 * f_req * f_req));
  CHECK(sol.full_local_energy_j < sol.energy_j);
}

TEST_SUITE_END();
