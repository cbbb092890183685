#include "seqoff/slow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqoff::slow {

namespace {

constexpr double kTauFloor = 1e-9;  // the objective diverges like e^{d/(W tau)} near 0

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

// Golden-section search on [lo, hi]; endpoints participate in the final
// selection so boundary minima are returned exactly.
template <class Fn>
GoldenResult golden_minimize(Fn&& f, double lo, double hi, double tol) {
  constexpr double invphi = 0.6180339887498949;
  GoldenResult best{lo, f(lo), 0};
  const double fhi = f(hi);
  if (fhi < best.fx) best = {hi, fhi, 0};

  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  int iterations = 0;
  while (b - a > tol) {
    ++iterations;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  if (fc < best.fx) best = {c, fc, 0};
  if (fd < best.fx) best = {d, fd, 0};
  best.iterations = iterations;
  return best;
}

}  // namespace

double tau_budget(const TaskProfile& profile, const SystemParams& params, int n) {
  check_stage_index(profile, n);
  return params.deadline_s - local_prefix_time(profile, n, params.f_max_hz).seconds() -
         edge_suffix_time(profile, n, params.f_e_hz).seconds();
}

PrefixAllocation optimal_freqs(const TaskProfile& profile, const SystemParams& params, int n,
                               double tau_t_s) {
  check_stage_index(profile, n);
  if (n == 1) return {0.0, 0.0};
  const double budget = tau_budget(profile, params, n);
  if (!(tau_t_s > 0.0) || tau_t_s > budget * (1.0 + 1e-12)) {
    throw std::domain_error("optimal_freqs: tau_t outside (0, budget]");
  }
  const double prefix_cycles = profile.cycles().head(n - 1).sum();
  const double window =
      params.deadline_s - edge_suffix_time(profile, n, params.f_e_hz).seconds() - tau_t_s;
  const double freq = prefix_cycles / window;
  return {freq, params.k0 * prefix_cycles * freq * freq};
}

double offload_energy_j(const TaskProfile& profile, const SystemParams& params, int n,
                        double gain, double tau_t_s) {
  check_stage_index(profile, n);
  return block_energy_j(profile.input_nats()[n - 1], gain, tau_t_s, params.bandwidth_hz);
}

InnerResult inner_solve(const TaskProfile& profile, const SystemParams& params, int n,
                        double gain, double tol_s) {
  check_stage_index(profile, n);
  detail::require_positive(gain, "inner_solve gain");
  detail::require_positive(tol_s, "inner_solve tolerance");
  const double budget = tau_budget(profile, params, n);
  if (budget <= 0.0) return {};

  if (n == 1) {
    // No local prefix: the objective is strictly decreasing in tau_t, so the
    // minimizer sits exactly at the budget endpoint.
    return {true, budget, offload_energy_j(profile, params, 1, gain, budget), 0};
  }

  auto objective = [&](double tau) {
    return offload_energy_j(profile, params, n, gain, tau) +
           optimal_freqs(profile, params, n, tau).energy_j;
  };
  const auto r = golden_minimize(objective, std::min(kTauFloor, budget * 0.5), budget, tol_s);
  return {true, r.x, r.fx, r.iterations};
}

SlowSolution solve(const TaskProfile& profile, const SystemParams& params, double gain,
                   double tol_s) {
  params.validate();
  detail::require_positive(gain, "solve gain");

  SlowSolution sol;
  double best = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= profile.size(); ++n) {
    const InnerResult inner = inner_solve(profile, params, n, gain, tol_s);
    sol.per_index.push_back({n, inner.feasible,
                             inner.feasible ? inner.energy_j
                                            : std::numeric_limits<double>::infinity(),
                             inner.tau_t_s});
    if (inner.feasible && inner.energy_j < best) {
      best = inner.energy_j;
      sol.n_star = n;
      sol.tau_t_s = inner.tau_t_s;
      sol.energy_j = inner.energy_j;
    }
  }
  if (sol.n_star == 0) {
    throw InfeasibleError(
        "no offload index can meet the deadline T_th=" + std::to_string(params.deadline_s) +
        " s: the edge suffix plus local prefix at f_max exceeds it for every n");
  }

  const double d_n = profile.input_nats()[sol.n_star - 1];
  sol.transmit_power_w =
      std::expm1(d_n / (params.bandwidth_hz * sol.tau_t_s)) / gain;
  if (sol.n_star >= 2) {
    const auto alloc = optimal_freqs(profile, params, sol.n_star, sol.tau_t_s);
    sol.freqs_hz = Vector::Constant(sol.n_star - 1, alloc.freq_hz);
    sol.time_total_s = local_prefix_time(profile, sol.n_star, alloc.freq_hz).seconds() +
                       sol.tau_t_s +
                       edge_suffix_time(profile, sol.n_star, params.f_e_hz).seconds();
  } else {
    sol.freqs_hz = Vector();
    sol.time_total_s =
        sol.tau_t_s + edge_suffix_time(profile, 1, params.f_e_hz).seconds();
  }

  const double f_required = profile.total_cycles() / params.deadline_s;
  if (f_required <= params.f_max_hz) {
    sol.full_local_feasible = true;
    sol.full_local_energy_j = params.k0 * profile.total_cycles() * f_required * f_required;
  }
  return sol;
}

}  // namespace seqoff::slow
