#include "seqoff/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace seqoff::ergodic {

double power_at(double zeta, double gain) {
  if (zeta < 0.0) throw std::domain_error("power_at: zeta must be >= 0");
  detail::require_positive(gain, "power_at gain");
  return std::max(zeta - 1.0 / gain, 0.0);
}

namespace {

double delivered_rate(const QuadratureRule& quad, double zeta) {
  double acc = 0.0;
  for (Index i = 0; i < quad.size(); ++i) {
    acc += quad.weights()[i] * std::log1p(power_at(zeta, quad.nodes()[i]) * quad.nodes()[i]);
  }
  return acc;
}

double mean_power(const QuadratureRule& quad, double zeta) {
  double acc = 0.0;
  for (Index i = 0; i < quad.size(); ++i) {
    acc += quad.weights()[i] * power_at(zeta, quad.nodes()[i]);
  }
  return acc;
}

}  // namespace

WaterFillingSolution solve_wf(const QuadratureRule& quad, double rate_target, double horizon_s,
                              double tol, int max_iter) {
  detail::require_positive(rate_target, "solve_wf rate target");
  detail::require_positive(horizon_s, "solve_wf horizon");
  detail::require_positive(tol, "solve_wf tolerance");

  const double mean_gain = quad.nodes().dot(quad.weights());
  double zeta = 1.0 / mean_gain + rate_target;

  // The rate delivered by the threshold profile is nondecreasing in zeta and
  // zero demand needs zeta <= 1/h_max, so zeta = 0 always under-delivers.
  double lo = 0.0;                                            // residual < 0 here
  double hi = std::numeric_limits<double>::quiet_NaN();       // residual > 0 once seen
  double residual = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    residual = delivered_rate(quad, zeta) - rate_target;
    if (residual < 0.0) {
      lo = std::max(lo, zeta);
    } else if (residual > 0.0) {
      hi = std::isnan(hi) ? zeta : std::min(hi, zeta);
    }

    const double primal = mean_power(quad, zeta);
    const bool gap_ok = std::abs(zeta * residual) <= 1e-7 * std::max(primal, 1e-300);
    const bool bracket_tight = !std::isnan(hi) && (hi - lo) <= 1e-13 * std::max(1.0, hi);
    if (std::abs(residual) <= tol && gap_ok && (bracket_tight || std::abs(residual) <= 1e-13)) {
      converged = true;
      break;
    }

    if (!std::isnan(hi)) {
      zeta = 0.5 * (lo + hi);  // root bracketed: bisection from here on
    } else {
      // Dual subgradient ascent with diminishing steps, scale-matched to the
      // rate; the harmonic sum diverges, so the root always gets bracketed.
      const double step = rate_target / static_cast<double>(it + 1);
      zeta = std::max(zeta - step * residual, 0.0);
    }
  }
  if (!converged) {
    throw std::runtime_error("solve_wf: no convergence within " + std::to_string(max_iter) +
                             " iterations; rate residual " + std::to_string(residual));
  }

  WaterFillingSolution sol;
  sol.zeta = zeta;
  sol.power_w = Vector(quad.size());
  for (Index i = 0; i < quad.size(); ++i) sol.power_w[i] = power_at(zeta, quad.nodes()[i]);
  sol.mean_power_w = sol.power_w.dot(quad.weights());
  sol.energy_j = sol.mean_power_w * horizon_s;
  sol.rate_residual = delivered_rate(quad, zeta) - rate_target;
  sol.iterations = it + 1;
  return sol;
}

WaterFillingSolution solve_wf(const GainDistribution& dist, double rate_target, double horizon_s,
                              double tol, int max_iter, int node_count) {
  return solve_wf(make_quadrature(dist, node_count), rate_target, horizon_s, tol, max_iter);
}

OfflineSelection offline_select(const TaskProfile& profile, const SystemParams& params,
                                const GainDistribution& dist, int node_count) {
  params.validate();
  const QuadratureRule quad = make_quadrature(dist, node_count);

  OfflineSelection sel;
  for (int n = 1; n <= profile.size(); ++n) {
    OfflineIndexReport report;
    report.n = n;
    const double budget = params.deadline_s -
                          local_prefix_time(profile, n, params.f_l_hz).seconds() -
                          edge_suffix_time(profile, n, params.f_e_hz).seconds();
    if (budget > 0.0) {
      const double rate = profile.input_nats()[n - 1] / (budget * params.bandwidth_hz);
      const WaterFillingSolution wf = solve_wf(quad, rate, budget);
      report.feasible = true;
      report.offload_j = wf.energy_j;
      report.total_j =
          local_prefix_energy_j(profile, n, params.f_l_hz, params.k0) + wf.energy_j;
      if (sel.n_star == 0 || report.total_j < sel.total_j) {
        sel.n_star = n;
        sel.total_j = report.total_j;
      }
    }
    sel.per_index.push_back(report);
  }
  if (sel.n_star == 0) {
    throw InfeasibleError("offline_select: every offload index has a nonpositive budget");
  }
  return sel;
}

}  // namespace seqoff::ergodic
