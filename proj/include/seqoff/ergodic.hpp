#pragma once

// Zero-coherence-time limit: water-filling transmit power against the gain
// distribution under a mean-rate constraint, solved through the dual
// multiplier, plus the offline offload-index selection it enables.

#include "seqoff/channel.hpp"
#include "seqoff/types.hpp"

#include <vector>

namespace seqoff::ergodic {

struct WaterFillingSolution {
  double zeta = 0.0;        // dual multiplier
  Vector power_w;           // p(h) = (zeta - 1/h)^+ at the quadrature nodes
  double mean_power_w = 0.0;
  double energy_j = 0.0;    // mean power times the offload window
  double rate_residual = 0.0;  // E{ln(1+ph)} - rate target, nats/s/Hz
  int iterations = 0;
};

/// Threshold power profile (zeta - 1/h)^+.
double power_at(double zeta, double gain);

/// Finds the multiplier making E{ln(1 + p(h) h)} meet rate_target:
/// diminishing-step subgradient updates, switching to bisection once the
/// residual sign change brackets the root. Throws on non-convergence within
/// max_iter, carrying the residual in the message.
WaterFillingSolution solve_wf(const QuadratureRule& quad, double rate_target, double horizon_s,
                              double tol = 1e-6, int max_iter = 100000);

WaterFillingSolution solve_wf(const GainDistribution& dist, double rate_target, double horizon_s,
                              double tol = 1e-6, int max_iter = 100000, int node_count = 128);

struct OfflineIndexReport {
  int n = 0;
  bool feasible = false;
  double offload_j = 0.0;  // Q(n)
  double total_j = 0.0;
};

struct OfflineSelection {
  int n_star = 0;
  double total_j = 0.0;
  std::vector<OfflineIndexReport> per_index;
};

/// Offline policy of the ergodic limit: per index n, water-filling energy
/// over the offload budget B(n), plus the local prefix energy at f_l; returns
/// the argmin (ties toward smaller n).
OfflineSelection offline_select(const TaskProfile& profile, const SystemParams& params,
                                const GainDistribution& dist, int node_count = 128);

}  // namespace seqoff::ergodic
