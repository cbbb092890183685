#include "seqoff/policy.hpp"

#include "seqoff/slow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqoff::policy {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Action decide(const fastdp::QzTables& tables, int n, double gain) {
  check_stage_index(tables.profile, n);
  const bool off_ok = tables.schedules[n - 1].feasible;
  const bool loc_ok = tables.local_ok[n - 1] != 0;
  if (!off_ok && !loc_ok) {
    throw InfeasibleError("stage " + std::to_string(n) +
                          " has no feasible branch; the instance cannot meet its deadline");
  }
  if (!off_ok) return Action::continue_local;
  if (!loc_ok) return Action::offload;

  const double d_n = tables.profile.input_nats()[n - 1];
  const double offload_value = fastdp::q_lookup(tables, n, 1, d_n, gain);
  const double local_value =
      local_energy(tables.profile.cycles()[n - 1], tables.params.f_l_hz, tables.params.k0)
          .joules() +
      tables.z[n];
  return offload_value < local_value ? Action::offload : Action::continue_local;
}

EpisodeTrace run_episode(const fastdp::QzTables& tables, const GainDistribution& dist,
                         std::uint64_t seed) {
  const TaskProfile& profile = tables.profile;
  const SystemParams& params = tables.params;
  RandomStream stream(seed);

  EpisodeTrace trace;
  trace.seed = seed;

  for (int n = 1; n <= profile.size(); ++n) {
    const double h = sample(dist, stream).value();
    trace.stage_gains.push_back(h);
    const Action act = decide(tables, n, h);
    trace.decisions.push_back(act);
    if (act == Action::continue_local) {
      trace.energy_j +=
          local_energy(profile.cycles()[n - 1], params.f_l_hz, params.k0).joules();
      continue;
    }

    trace.offload_stage = n;
    const fastdp::BlockSchedule& sched = tables.schedules[n - 1];
    double remaining = profile.input_nats()[n - 1];
    for (int m = 1; m <= sched.m_star; ++m) {
      const double h_m = (m == 1) ? h : sample(dist, stream).value();
      const double t_m = (m < sched.m_star) ? params.coherence_s : sched.t_star_s;
      double nats = remaining;
      if (m < sched.m_star) {
        nats = std::clamp(fastdp::policy_lookup(tables, n, m, remaining, h_m), 0.0, remaining);
      }
      const double joules = block_energy_j(nats, h_m, t_m, params.bandwidth_hz);
      trace.per_block.push_back({m, h_m, nats, joules});
      trace.energy_j += joules;
      remaining -= nats;
    }
    trace.time_total_s = local_prefix_time(profile, n, params.f_l_hz).seconds() +
                         (sched.m_star - 1) * params.coherence_s + sched.t_star_s +
                         edge_suffix_time(profile, n, params.f_e_hz).seconds();
    return trace;
  }

  // Every stage ran locally.
  trace.time_total_s = profile.total_cycles() / params.f_l_hz;
  return trace;
}

Evaluation evaluate(const fastdp::QzTables& tables, const GainDistribution& dist, int episodes,
                    std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: need at least one episode");
  Evaluation ev;
  ev.episodes = episodes;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < episodes; ++i) {
    try {
      const EpisodeTrace trace = run_episode(tables, dist, seed + static_cast<std::uint64_t>(i));
      sum += trace.energy_j;
      sumsq += trace.energy_j * trace.energy_j;
      if (trace.time_total_s > tables.params.deadline_s + 1e-9) ++ev.deadline_violations;
    } catch (const InfeasibleError&) {
      ++ev.infeasible_episodes;
    }
  }
  const int ok = episodes - ev.infeasible_episodes;
  if (ok > 0) {
    ev.mean_j = sum / ok;
    if (ok > 1) {
      const double var = std::max(0.0, (sumsq - sum * sum / ok) / (ok - 1));
      ev.stderr_j = std::sqrt(var / ok);
    }
  }
  return ev;
}

namespace {

// Minimal deadline-meeting common frequency for running everything locally.
BinaryBaseline full_local_branch(const TaskProfile& profile, const SystemParams& params) {
  BinaryBaseline b;
  const double f_required = profile.total_cycles() / params.deadline_s;
  if (f_required <= params.f_max_hz) {
    b.feasible = true;
    b.energy_j = params.k0 * profile.total_cycles() * f_required * f_required;
    b.choice = BinaryChoice::full_local;
  }
  return b;
}

BinaryBaseline pick_binary(BinaryBaseline local, bool offload_feasible, double offload_j) {
  if (offload_feasible && (!local.feasible || offload_j < local.energy_j)) {
    local.feasible = true;
    local.energy_j = offload_j;
    local.choice = BinaryChoice::full_offload;
  }
  if (!local.feasible) {
    throw InfeasibleError("binary baseline: neither full-local nor full-offload is feasible");
  }
  return local;
}

}  // namespace

BinaryBaseline baseline_binary(const TaskProfile& profile, const SystemParams& params,
                               double gain) {
  const auto inner = slow::inner_solve(profile, params, 1, gain);
  return pick_binary(full_local_branch(profile, params), inner.feasible, inner.energy_j);
}

BinaryBaseline baseline_binary(const fastdp::QzTables& tables) {
  const bool off = tables.schedules[0].feasible;
  double expected = kInf;
  if (off) {
    expected = fastdp::interp_linear(tables.d_grid, tables.stages[0].qbar.row(0).transpose(),
                                     tables.profile.input_nats()[0]);
  }
  return pick_binary(full_local_branch(tables.profile, tables.params), off, expected);
}

FixedBaseline baseline_fixed(const TaskProfile& profile, const SystemParams& params, double gain,
                             double p_fix_w) {
  detail::require_positive(p_fix_w, "baseline_fixed transmit power");
  detail::require_positive(gain, "baseline_fixed gain");
  const double rate = params.bandwidth_hz * std::log1p(p_fix_w * gain);

  FixedBaseline best;
  for (int n = 1; n <= profile.size(); ++n) {
    const double t_off = profile.input_nats()[n - 1] / rate;
    const double total = local_prefix_time(profile, n, params.f_l_hz).seconds() + t_off +
                         edge_suffix_time(profile, n, params.f_e_hz).seconds();
    if (total > params.deadline_s) continue;
    const double energy = local_prefix_energy_j(profile, n, params.f_l_hz, params.k0) +
                          p_fix_w * t_off;
    if (!best.feasible || energy < best.energy_j) best = {true, energy, n};
  }
  if (!best.feasible) {
    throw InfeasibleError("fixed baseline: no offload index meets the deadline at p_fix");
  }
  return best;
}

namespace {

// Per-block cost at fixed transmit power: linear in the sent amount up to the
// block capacity, +inf beyond. The final block instead falls back to
// Shannon-optimal power past capacity (the two prices agree exactly at the
// capacity point), so the baseline always delivers and stays comparable.
Matrix fixed_cost_matrix(const Vector& d_grid, const QuadratureRule& quad, double bandwidth_hz,
                         double block_s, double p_fix_w, bool terminal) {
  Matrix cost(d_grid.size(), quad.size());
  for (Index j = 0; j < quad.size(); ++j) {
    const double h = quad.nodes()[j];
    const double rate = bandwidth_hz * std::log1p(p_fix_w * h);
    const double capacity = rate * block_s;
    for (Index i = 0; i < d_grid.size(); ++i) {
      const double d = d_grid[i];
      if (d <= capacity) {
        cost(i, j) = p_fix_w * d / rate;
      } else {
        cost(i, j) = terminal ? block_energy_j(d, h, block_s, bandwidth_hz) : kInf;
      }
    }
  }
  return cost;
}

}  // namespace

FixedBaseline baseline_fixed(const fastdp::QzTables& tables, double p_fix_w) {
  detail::require_positive(p_fix_w, "baseline_fixed transmit power");
  const TaskProfile& profile = tables.profile;
  const SystemParams& params = tables.params;

  const Matrix cost_tau = fixed_cost_matrix(tables.d_grid, tables.quad, params.bandwidth_hz,
                                            params.coherence_s, p_fix_w, false);
  fastdp::StageBuildOptions opts;
  opts.keep_q_layers = false;
  opts.keep_policy = false;

  FixedBaseline best;
  for (int n = 1; n <= profile.size(); ++n) {
    const fastdp::BlockSchedule& sched = tables.schedules[n - 1];
    if (!sched.feasible) continue;
    const Matrix cost_last = fixed_cost_matrix(tables.d_grid, tables.quad, params.bandwidth_hz,
                                               sched.t_star_s, p_fix_w, true);
    const fastdp::StageTables st = fastdp::build_stage_from_costs(
        tables.d_grid, tables.quad, cost_tau, cost_last, sched.m_star, opts);
    const double expected = fastdp::interp_linear(tables.d_grid, st.qbar.row(0).transpose(),
                                                  profile.input_nats()[n - 1]);
    if (!std::isfinite(expected)) continue;
    const double energy =
        local_prefix_energy_j(profile, n, params.f_l_hz, params.k0) + expected;
    if (!best.feasible || energy < best.energy_j) best = {true, energy, n};
  }
  if (!best.feasible) {
    throw InfeasibleError("fixed baseline: no offload index meets the deadline at p_fix");
  }
  return best;
}

double default_fixed_power(const TaskProfile& profile, const SystemParams& params,
                           const GainDistribution& dist, double tol_s) {
  return slow::solve(profile, params, dist.mean(), tol_s).transmit_power_w;
}

}  // namespace seqoff::policy
