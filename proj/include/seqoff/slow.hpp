#pragma once

// Slow-fading joint optimizer. For each offload index n the inner problem is
// a single-variable convex minimization over the offload duration tau_t --
// the local CPU frequencies collapse to one closed-form value that keeps the
// deadline exactly active -- solved by golden-section search; the outer
// problem picks the cheapest n.

#include "seqoff/types.hpp"

#include <vector>

namespace seqoff::slow {

struct InnerResult {
  bool feasible = false;
  double tau_t_s = 0.0;
  double energy_j = 0.0;
  int iterations = 0;
};

struct IndexReport {
  int n = 0;
  bool feasible = false;
  double energy_j = 0.0;
  double tau_t_s = 0.0;
};

struct SlowSolution {
  int n_star = 0;
  double tau_t_s = 0.0;
  double transmit_power_w = 0.0;
  Vector freqs_hz;  // n_star - 1 equal entries
  double energy_j = 0.0;
  double time_total_s = 0.0;
  std::vector<IndexReport> per_index;
  // Fully-local execution is outside the optimization space; when it would be
  // both feasible and cheaper the CLI surfaces a note driven by these fields.
  bool full_local_feasible = false;
  double full_local_energy_j = 0.0;
};

/// Air time available for uploading d_n when sub-tasks before n run at f_max
/// and the suffix runs at the edge. Nonpositive means index n is infeasible.
double tau_budget(const TaskProfile& profile, const SystemParams& params, int n);

/// Closed-form common CPU frequency for the local prefix given the offload
/// duration, with the deadline exactly active, and the prefix energy it
/// costs. For n = 1 the frequency is undefined and the energy is zero.
struct PrefixAllocation {
  double freq_hz = 0.0;
  double energy_j = 0.0;
};
PrefixAllocation optimal_freqs(const TaskProfile& profile, const SystemParams& params, int n,
                               double tau_t_s);

/// Offloading energy term tau * (e^{d_n/(W tau)} - 1) / h.
double offload_energy_j(const TaskProfile& profile, const SystemParams& params, int n,
                        double gain, double tau_t_s);

/// Golden-section minimization of offload + prefix energy over tau_t.
InnerResult inner_solve(const TaskProfile& profile, const SystemParams& params, int n,
                        double gain, double tol_s = 1e-6);

/// Evaluates every offload index and returns the argmin (ties toward smaller
/// n). Throws InfeasibleError when no index meets the deadline.
SlowSolution solve(const TaskProfile& profile, const SystemParams& params, double gain,
                   double tol_s = 1e-6);

}  // namespace seqoff::slow
