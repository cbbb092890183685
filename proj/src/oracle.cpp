#include "seqoff/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace seqoff::oracle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SlowGridResult slow_grid(const TaskProfile& profile, const SystemParams& params, double gain,
                         int tau_points, int freq_points) {
  params.validate();
  detail::require_positive(gain, "slow_grid gain");
  if (tau_points < 100 || freq_points < 100) {
    throw std::invalid_argument("slow_grid: grids too coarse to be a reference");
  }

  SlowGridResult best;
  const int check_stride = std::max(1, tau_points / 100);
  for (int n = 1; n <= profile.size(); ++n) {
    const double suffix = edge_suffix_time(profile, n, params.f_e_hz).seconds();
    const double budget = params.deadline_s -
                          local_prefix_time(profile, n, params.f_max_hz).seconds() - suffix;
    if (budget <= 0.0) continue;
    const double d_n = profile.input_nats()[n - 1];
    const double prefix_cycles = (n == 1) ? 0.0 : profile.cycles().head(n - 1).sum();

    for (int k = 1; k <= tau_points; ++k) {
      const double tau = budget * k / tau_points;
      const double window = params.deadline_s - suffix - tau;
      const double local_j =
          (n == 1) ? 0.0
                   : params.k0 * prefix_cycles * prefix_cycles * prefix_cycles / (window * window);
      const double energy =
          block_energy_j(d_n, gain, tau, params.bandwidth_hz) + local_j;
      if (!best.feasible || energy < best.energy_j) {
        best.feasible = true;
        best.n = n;
        best.tau_t_s = tau;
        best.energy_j = energy;
      }

      // Independent closed-form check: a plain scan over shared frequencies
      // must approach the claimed prefix energy from above.
      if (n >= 2 && k % check_stride == 0) {
        double scan_min = kInf;
        for (int j = 1; j <= freq_points; ++j) {
          const double f = params.f_max_hz * j / freq_points;
          if (prefix_cycles / f > window) continue;  // misses the deadline
          scan_min = std::min(scan_min, params.k0 * prefix_cycles * f * f);
        }
        if (std::isfinite(scan_min) && local_j > 0.0) {
          best.closed_form_max_excess =
              std::max(best.closed_form_max_excess, scan_min / local_j - 1.0);
        }
      }
    }
  }
  return best;
}

namespace {

struct EnumContext {
  const TaskProfile& profile;
  const SystemParams& params;
  Vector gains;
  Vector probs;
  const Vector& grid;
  double step = 0.0;

  struct Stage {
    bool feasible = false;
    int m_blocks = 0;
    double t_last = 0.0;
    std::vector<Matrix> q;     // per layer, (D+1) x S
    std::vector<Vector> qbar;  // per layer
  };
  std::vector<Stage> stages;
  std::vector<int> d_index;  // grid index of each d_n
  std::vector<char> local_ok;
  Vector z;
  long paths = 0;
  long path_cap = 0;

  int index_of(double d) const {
    const double r = d / step;
    const long i = std::lround(r);
    if (std::abs(r - static_cast<double>(i)) > 1e-6 || i < 0 || i >= grid.size()) {
      throw std::invalid_argument("dp_enumerate: input size " + std::to_string(d) +
                                  " does not sit on the d grid");
    }
    return static_cast<int>(i);
  }

  double block_j(int d_idx, int s, double duration) const {
    return block_energy_j(grid[d_idx], gains[s], duration, params.bandwidth_hz);
  }

  // Smallest-index minimizer over the grid of one within-block step.
  std::pair<int, double> inner_min(const Stage& st, int layer, int d_idx, int s) const {
    int best = 0;
    double bv = kInf;
    for (int j = 0; j <= d_idx; ++j) {
      const double v = block_j(j, s, params.coherence_s) + st.qbar[layer + 1][d_idx - j];
      if (v < bv) {
        bv = v;
        best = j;
      }
    }
    return {best, bv};
  }

  // Expected realized energy of the within-window policy, resolving the
  // minimization afresh at every visited state.
  double walk_blocks(int n, int layer, int d_idx, int s) {
    const Stage& st = stages[n - 1];
    if (layer == st.m_blocks - 1) {
      if (++paths > path_cap) throw std::runtime_error("dp_enumerate: path cap exceeded");
      return block_j(d_idx, s, st.t_last);
    }
    const auto [j, cost_now] = inner_min(st, layer, d_idx, s);
    double expected_rest = 0.0;
    for (int s2 = 0; s2 < gains.size(); ++s2) {
      expected_rest += probs[s2] * walk_blocks(n, layer + 1, d_idx - j, s2);
    }
    return block_j(j, s, params.coherence_s) + expected_rest;
  }

  double walk_stages(int n) {
    if (n > profile.size()) return 0.0;
    const Stage& st = stages[n - 1];
    const double local_step =
        local_energy(profile.cycles()[n - 1], params.f_l_hz, params.k0).joules();
    double expected = 0.0;
    for (int s = 0; s < gains.size(); ++s) {
      const double offload_value =
          st.feasible ? st.q[0](d_index[n - 1], s) : kInf;
      const double local_value = local_ok[n - 1] ? local_step + z[n] : kInf;
      double branch;
      if (st.feasible && offload_value < local_value) {
        branch = walk_blocks(n, 0, d_index[n - 1], s);
      } else {
        branch = local_step + walk_stages_memo(n + 1);
      }
      expected += probs[s] * branch;
    }
    return expected;
  }

  // The continue branch does not depend on the measured gain; memoize it so
  // the walk stays within the path cap.
  std::vector<double> continue_memo;
  double walk_stages_memo(int n) {
    if (n > profile.size()) return 0.0;
    if (std::isnan(continue_memo[n - 1])) continue_memo[n - 1] = walk_stages(n);
    return continue_memo[n - 1];
  }
};

}  // namespace

DpEnumeration dp_enumerate(const TaskProfile& profile, const SystemParams& params,
                           const GainDistribution& discrete_dist, const Vector& d_grid,
                           long path_cap) {
  params.validate();
  if (discrete_dist.kind() != DistKind::discrete) {
    throw std::invalid_argument("dp_enumerate: needs a discrete channel");
  }
  if (discrete_dist.gains().size() > 4 || profile.size() > 3) {
    throw std::invalid_argument("dp_enumerate: instance too large (<= 4 states, N <= 3)");
  }

  const int N = profile.size();
  const int S = static_cast<int>(discrete_dist.gains().size());
  const int top = static_cast<int>(d_grid.size()) - 1;

  EnumContext ctx{profile, params, discrete_dist.gains(), discrete_dist.probs(), d_grid};
  ctx.step = d_grid[top] / top;
  ctx.path_cap = path_cap;
  ctx.stages.resize(N);
  ctx.local_ok.assign(N, 0);
  ctx.continue_memo.assign(N, std::numeric_limits<double>::quiet_NaN());
  for (int n = 1; n <= N; ++n) ctx.d_index.push_back(ctx.index_of(profile.input_nats()[n - 1]));

  // Schedules and the backward Q recursion, all by plain scans.
  for (int n = 1; n <= N; ++n) {
    double prefix_t = 0.0, prefix_suffix = 0.0;
    for (int i = 0; i < n - 1; ++i) prefix_t += profile.cycles()[i] / params.f_l_hz;
    for (int i = n - 1; i < N; ++i) prefix_suffix += profile.cycles()[i] / params.f_e_hz;
    const double budget = params.deadline_s - prefix_t - prefix_suffix;
    auto& st = ctx.stages[n - 1];
    if (budget <= 0.0) continue;
    int m = static_cast<int>(std::ceil(budget / params.coherence_s - 1e-9));
    if (m < 1) m = 1;
    double t_last = budget - (m - 1) * params.coherence_s;
    if (t_last > params.coherence_s) t_last = params.coherence_s;
    if (m > 4) throw std::invalid_argument("dp_enumerate: window too long (M* <= 4)");
    st.feasible = true;
    st.m_blocks = m;
    st.t_last = t_last;

    st.q.assign(m, Matrix(top + 1, S));
    st.qbar.assign(m, Vector(top + 1));
    for (int i = 0; i <= top; ++i) {
      for (int s = 0; s < S; ++s) st.q[m - 1](i, s) = ctx.block_j(i, s, t_last);
    }
    for (int layer = m - 1; layer-- > 0;) {
      for (int i = 0; i <= top; ++i) {
        double acc = 0.0;
        for (int s = 0; s < S; ++s) acc += ctx.probs[s] * st.q[layer + 1](i, s);
        st.qbar[layer + 1][i] = acc;
      }
      for (int i = 0; i <= top; ++i) {
        for (int s = 0; s < S; ++s) {
          st.q[layer](i, s) = ctx.inner_min(st, layer, i, s).second;
        }
      }
    }
    for (int i = 0; i <= top; ++i) {
      double acc = 0.0;
      for (int s = 0; s < S; ++s) acc += ctx.probs[s] * st.q[0](i, s);
      st.qbar[0][i] = acc;
    }
  }

  // Stopping values with the reachability mask.
  DpEnumeration out;
  out.z = Vector::Constant(N + 1, kInf);
  out.z[N] = 0.0;
  out.z_h = Matrix::Constant(N, S, kInf);
  double all_local_t = 0.0;
  for (int i = 0; i < N; ++i) all_local_t += profile.cycles()[i] / params.f_l_hz;
  bool alive_next = false;
  for (int n = N; n >= 1; --n) {
    const bool loc_ok = (n == N) ? (all_local_t <= params.deadline_s) : alive_next;
    const bool off_ok = ctx.stages[n - 1].feasible;
    ctx.local_ok[n - 1] = loc_ok ? 1 : 0;
    alive_next = off_ok || loc_ok;
    if (!alive_next) continue;
    const double local_value =
        loc_ok ? local_energy(profile.cycles()[n - 1], params.f_l_hz, params.k0).joules() +
                     out.z[n]
               : kInf;
    double acc = 0.0;
    for (int s = 0; s < S; ++s) {
      const double offload_value =
          off_ok ? ctx.stages[n - 1].q[0](ctx.d_index[n - 1], s) : kInf;
      out.z_h(n - 1, s) = std::min(offload_value, local_value);
      acc += ctx.probs[s] * out.z_h(n - 1, s);
    }
    out.z[n - 1] = acc;
  }
  if (!alive_next) throw InfeasibleError("dp_enumerate: stage 1 has no feasible branch");
  ctx.z = out.z;

  out.policy_tree_value = ctx.walk_stages(1);

  out.static_values = Vector::Constant(N, kInf);
  for (int n = 1; n <= N; ++n) {
    if (!ctx.stages[n - 1].feasible) continue;
    double prefix_e = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      prefix_e += params.k0 * profile.cycles()[i] * params.f_l_hz * params.f_l_hz;
    }
    out.static_values[n - 1] = prefix_e + ctx.stages[n - 1].qbar[0][ctx.d_index[n - 1]];
  }
  out.full_local_value = (all_local_t <= params.deadline_s)
                             ? params.k0 * profile.total_cycles() * params.f_l_hz * params.f_l_hz
                             : kInf;

  for (int n = 1; n <= N; ++n) {
    if (ctx.stages[n - 1].feasible) {
      out.q_first.push_back(ctx.stages[n - 1].q[0]);
      out.qbar_first.push_back(ctx.stages[n - 1].qbar[0]);
    } else {
      out.q_first.emplace_back();
      out.qbar_first.emplace_back();
    }
  }
  return out;
}

RandomInstance random_instance(RandomStream& stream, int max_subtasks) {
  auto log_uniform = [&](double lo, double hi) {
    return lo * std::exp(stream.next_uniform() * std::log(hi / lo));
  };
  const int n = 1 + static_cast<int>(stream.next_u64() % static_cast<unsigned>(max_subtasks));
  Vector cycles(n), nats(n);
  for (int i = 0; i < n; ++i) {
    cycles[i] = log_uniform(5e6, 5e7);
    nats[i] = log_uniform(3e3, 3.5e4);
  }
  SystemParams params;
  params.bandwidth_hz = log_uniform(5e5, 2e6);
  params.k0 = log_uniform(3e-29, 3e-28);
  params.f_max_hz = log_uniform(3e8, 8e8);
  params.f_l_hz = params.f_max_hz;
  params.f_e_hz = params.f_max_hz * log_uniform(4.0, 8.0);
  params.deadline_s = log_uniform(0.1, 0.5);
  params.coherence_s = 0.02;
  return {TaskProfile(std::move(cycles), std::move(nats)), params, log_uniform(20.0, 80.0)};
}

double convexity_scan(const Vector& values, ScanMode mode) {
  if (values.size() < 3) {
    throw std::invalid_argument("convexity_scan: need at least 3 points");
  }
  if (mode == ScanMode::convexity) {
    double worst = kInf;
    for (Index i = 1; i + 1 < values.size(); ++i) {
      worst = std::min(worst, values[i + 1] - 2.0 * values[i] + values[i - 1]);
    }
    return worst;
  }
  double worst = -kInf;
  for (Index i = 0; i + 1 < values.size(); ++i) {
    worst = std::max(worst, values[i + 1] - values[i]);
  }
  return worst;
}

}  // namespace seqoff::oracle
