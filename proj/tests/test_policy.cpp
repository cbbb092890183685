#include "seqoff/policy.hpp"

#include "seqoff/oracle.hpp"
#include "seqoff/slow.hpp"

#include <doctest.h>

#include "instances.hpp"

#include <cmath>

using namespace seqoff;

namespace {

const fastdp::QzTables& default_tables() {
  static const fastdp::QzTables tables = fastdp::build(
      testing::default_profile(), testing::default_params(), testing::default_dist(), {128, 64});
  return tables;
}

const fastdp::QzTables& tiny_tables() {
  static const fastdp::QzTables tables = fastdp::build(
      testing::tiny_profile(), testing::tiny_params(), testing::tiny_dist(), {64, 2});
  return tables;
}

}  // namespace

TEST_SUITE_BEGIN("policy");

TEST_CASE("decide prefers offloading on a strong channel and waiting on a weak one") {
  const auto& t = default_tables();
  const double best_gain = t.quad.nodes()[t.quad.size() - 1];
  CHECK(policy::decide(t, 1, best_gain) == policy::Action::offload);
  CHECK(policy::decide(t, 1, 1e-3) == policy::Action::continue_local);
  // stage 7 has no admissible local branch: offloading is forced at any gain
  CHECK(policy::decide(t, 7, 1e-3) == policy::Action::offload);
}

TEST_CASE("exact ties continue locally") {
  // hand-built single-stage tables with the offload value set exactly equal
  // to the local branch
  TaskProfile profile(Vector{{1e6}}, Vector{{100.0}});
  SystemParams params = testing::default_params();
  params.deadline_s = 0.05;
  QuadratureRule quad(Vector{{50.0}}, Vector{{1.0}});
  fastdp::QzTables t(profile, params, testing::default_dist(),
                     fastdp::make_d_grid(100.0, 50), quad);
  t.schedules = {fastdp::schedule(profile, params, 1)};
  REQUIRE(t.schedules[0].feasible);
  const double local_value = local_energy(1e6, params.f_l_hz, params.k0).joules();
  fastdp::StageTables st;
  st.m_blocks = t.schedules[0].m_star;
  st.q.assign(st.m_blocks, Matrix::Constant(51, 1, local_value));
  st.qbar = Matrix::Constant(st.m_blocks, 51, local_value);
  t.stages = {st};
  t.local_ok = {1};
  t.z = Vector::Zero(2);
  t.z_h = Matrix::Zero(1, 1);
  CHECK(policy::decide(t, 1, 50.0) == policy::Action::continue_local);
}

TEST_CASE("a degenerate single-gain channel yields identical episodes") {
  const auto profile = testing::tiny_profile();
  const auto params = testing::tiny_params();
  const auto dist = GainDistribution::discrete(Vector{{40.0}}, Vector{{1.0}});
  const auto tables = fastdp::build(profile, params, dist, {64, 4});
  const auto a = policy::run_episode(tables, dist, 1);
  const auto b = policy::run_episode(tables, dist, 999);
  CHECK(a.energy_j == b.energy_j);
  CHECK(a.time_total_s == b.time_total_s);
  CHECK(a.offload_stage == b.offload_stage);
  REQUIRE(a.per_block.size() == b.per_block.size());
  for (std::size_t i = 0; i < a.per_block.size(); ++i) {
    CHECK(a.per_block[i].nats == b.per_block[i].nats);
  }
}

TEST_CASE("episode traces keep the one-climb shape and conserve the upload") {
  const auto& t = tiny_tables();
  const auto& dist = testing::tiny_dist();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto tr = policy::run_episode(t, dist, seed);
    if (tr.offload_stage == 0) {
      CHECK(tr.per_block.empty());
      for (const auto d : tr.decisions) CHECK(d == policy::Action::continue_local);
      CHECK(tr.time_total_s <= t.params.deadline_s + 1e-9);
      continue;
    }
    CHECK(tr.decisions.size() == static_cast<std::size_t>(tr.offload_stage));
    for (std::size_t i = 0; i + 1 < tr.decisions.size(); ++i) {
      CHECK(tr.decisions[i] == policy::Action::continue_local);
    }
    CHECK(tr.decisions.back() == policy::Action::offload);

    double sent = 0.0;
    for (const auto& b : tr.per_block) {
      sent += b.nats;
      CHECK(b.nats >= 0.0);
    }
    const double d_n = t.profile.input_nats()[tr.offload_stage - 1];
    CHECK(std::abs(sent - d_n) <= 1e-9 * d_n);
    CHECK(tr.time_total_s <= t.params.deadline_s + 1e-9);
  }
}

TEST_CASE("enumerable instance: episode mean matches the stopping value") {
  const auto& t = tiny_tables();
  const auto& dist = testing::tiny_dist();
  const auto ref = oracle::dp_enumerate(t.profile, t.params, dist, t.d_grid);
  CHECK(std::abs(ref.policy_tree_value - t.z[0]) <= 1e-9 * t.z[0]);

  const auto ev = policy::evaluate(t, dist, 20000, 7);
  CHECK(ev.deadline_violations == 0);
  CHECK(ev.infeasible_episodes == 0);
  CHECK(std::abs(ev.mean_j - t.z[0]) <= 3.0 * ev.stderr_j);
}

TEST_CASE("evaluate with one episode reduces to run_episode") {
  const auto& t = tiny_tables();
  const auto& dist = testing::tiny_dist();
  const auto ev = policy::evaluate(t, dist, 1, 33);
  const auto tr = policy::run_episode(t, dist, 33);
  CHECK(ev.mean_j == tr.energy_j);
  CHECK(ev.stderr_j == 0.0);
}

TEST_CASE("doubling the episode count shrinks the standard error like 1/sqrt(2)") {
  const auto& t = tiny_tables();
  const auto& dist = testing::tiny_dist();
  const auto a = policy::evaluate(t, dist, 20000, 11);
  const auto b = policy::evaluate(t, dist, 40000, 11);
  const double ratio = b.stderr_j / a.stderr_j;
  CHECK(ratio >= 0.707 * 0.8);
  CHECK(ratio <= 0.707 * 1.2);
}

TEST_CASE("the stopping rule beats every static policy on the enumerable instance") {
  const auto& t = tiny_tables();
  const auto ref = oracle::dp_enumerate(t.profile, t.params, testing::tiny_dist(), t.d_grid);
  for (Index n = 0; n < ref.static_values.size(); ++n) {
    CHECK(ref.z[0] <= ref.static_values[n] + 1e-12);
  }
  CHECK(ref.z[0] <= ref.full_local_value + 1e-12);
}

TEST_CASE("default operating point: Monte Carlo agrees with the tables") {
  const auto& t = default_tables();
  const auto ev = policy::evaluate(t, testing::default_dist(), 10000, 20240901);
  CHECK(ev.deadline_violations == 0);
  CHECK(std::abs(ev.mean_j - t.z[0]) <= 3.0 * ev.stderr_j);
}

TEST_CASE("binary baseline picks the cheaper branch") {
  const auto profile = testing::default_profile();

  // a huge deadline makes nearly-idle local computing unbeatable
  SystemParams lazy = testing::default_params();
  lazy.deadline_s = 50.0;
  const auto local_wins = policy::baseline_binary(profile, lazy, 60.0);
  CHECK(local_wins.choice == policy::BinaryChoice::full_local);
  CHECK(local_wins.energy_j ==
        doctest::Approx(lazy.k0 * profile.total_cycles() * std::pow(270e6 / 50.0, 2)));

  // an excellent channel makes offloading everything nearly free
  const auto offload_wins =
      policy::baseline_binary(profile, testing::default_params(), 1e6);
  CHECK(offload_wins.choice == policy::BinaryChoice::full_offload);
}

TEST_CASE("baselines never beat the joint optimum (slow fading)") {
  const auto profile = testing::default_profile();
  const auto params = testing::default_params();
  const auto sol = slow::solve(profile, params, 60.0);

  const auto binary = policy::baseline_binary(profile, params, 60.0);
  CHECK(sol.energy_j <= binary.energy_j + 1e-9);

  const double p_fix = policy::default_fixed_power(profile, params, testing::default_dist());
  const auto fixed = policy::baseline_fixed(profile, params, 60.0, p_fix);
  CHECK(sol.energy_j <= fixed.energy_j + 1e-9);

  // restricting to the optimal power itself still cannot win
  const auto self_power = policy::baseline_fixed(profile, params, 60.0, sol.transmit_power_w);
  CHECK(sol.energy_j <= self_power.energy_j + 1e-12 * sol.energy_j);
}

TEST_CASE("baselines never beat the stopping value (fast fading)") {
  const auto& t = default_tables();
  const auto binary = policy::baseline_binary(t);
  CHECK(t.z[0] <= binary.energy_j + 1e-9);
  const double p_fix =
      policy::default_fixed_power(t.profile, t.params, testing::default_dist());
  const auto fixed = policy::baseline_fixed(t, p_fix);
  CHECK(t.z[0] <= fixed.energy_j + 1e-9);
}

TEST_CASE("fixed baseline steps down like a staircase along the edge-frequency sweep") {
  const auto profile = testing::default_profile();
  const double p_fix =
      policy::default_fixed_power(profile, testing::default_params(), testing::default_dist());
  double prev = std::numeric_limits<double>::infinity();
  int plateaus = 0, drops = 0;
  for (double fe = 2.4e9; fe <= 3.61e9; fe += 0.1e9) {
    SystemParams params = testing::default_params();
    params.f_e_hz = fe;
    const auto fixed = policy::baseline_fixed(profile, params, 60.0, p_fix);
    if (std::isfinite(prev)) {
      CHECK(fixed.energy_j <= prev * (1.0 + 1e-12));
      if (fixed.energy_j == doctest::Approx(prev).epsilon(1e-12)) {
        ++plateaus;
      } else {
        ++drops;
      }
    }
    prev = fixed.energy_j;
  }
  CHECK(plateaus > 0);  // flat between changes of the chosen offload index
}

TEST_CASE("infeasible baselines raise infeasible-instance errors") {
  const auto profile = testing::default_profile();
  SystemParams params = testing::default_params();
  params.deadline_s = 0.05;
  CHECK_THROWS_AS(policy::baseline_binary(profile, params, 60.0), InfeasibleError);
  CHECK_THROWS_AS(policy::baseline_fixed(profile, params, 60.0, 0.01), InfeasibleError);
}

TEST_SUITE_END();
