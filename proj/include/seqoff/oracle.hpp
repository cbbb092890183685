#pragma once

// Brute-force reference implementations for the verify suites and tests.
// These deliberately reuse only the core/channel primitives and plain loops,
// never the solver code paths they cross-check.

#include "seqoff/channel.hpp"
#include "seqoff/types.hpp"

#include <vector>

namespace seqoff::oracle {

struct SlowGridResult {
  bool feasible = false;
  int n = 0;
  double tau_t_s = 0.0;
  double energy_j = 0.0;
  // Worst relative excess of the frequency-grid scan over the closed-form
  // prefix energy across the sampled offload durations (the scan can never
  // fall below the optimum; large deviations flag a closed-form bug).
  double closed_form_max_excess = 0.0;
};

/// Exhaustive scan over every offload index and a uniform grid of offload
/// durations, with local frequencies from the closed form; a shared-frequency
/// grid scan independently double-checks the closed form itself.
SlowGridResult slow_grid(const TaskProfile& profile, const SystemParams& params, double gain,
                         int tau_points = 100000, int freq_points = 10000);

struct DpEnumeration {
  Vector z;                    // Z_n for n = 1..N+1 (last entry 0); +inf when infeasible
  Matrix z_h;                  // N x S
  std::vector<Matrix> q_first;           // per n, layer-1 table (D+1) x S
  std::vector<Vector> qbar_first;        // per n, expected layer-1 values over h
  double policy_tree_value = 0.0;        // forward enumeration of the stopping policy
  Vector static_values;                  // expected energy of each always-offload-at-n policy
  double full_local_value = 0.0;         // +inf when the all-local schedule misses T_th
};

/// Exact evaluation of the block recursion and the stopping values on a
/// finite channel: expectations by full enumeration, inner minimization by
/// full grid scan, plus a forward walk of every channel path under the
/// stopping rule. Input sizes must sit on the grid so the walk stays exact.
DpEnumeration dp_enumerate(const TaskProfile& profile, const SystemParams& params,
                           const GainDistribution& discrete_dist, const Vector& d_grid,
                           long path_cap = 10000000);

struct RandomInstance {
  TaskProfile profile;
  SystemParams params;
  double gain = 0.0;
};

/// Small random instance (N <= max_subtasks) with parameters scattered
/// log-uniformly around the default operating point, for oracle-equivalence
/// sweeps. Feasibility is not guaranteed; callers filter.
RandomInstance random_instance(RandomStream& stream, int max_subtasks = 5);

enum class ScanMode {
  convexity,              // most negative second difference
  monotone_nonincreasing  // most positive forward difference
};

/// Extreme finite difference over a uniformly tabulated axis: the most
/// negative second difference (convexity mode, >= -tol means convex) or the
/// most positive forward difference (monotone mode, <= tol means
/// nonincreasing). Needs at least 3 points.
double convexity_scan(const Vector& values, ScanMode mode);

}  // namespace seqoff::oracle
