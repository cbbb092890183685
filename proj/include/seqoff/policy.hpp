#pragma once

// Online execution of the tabulated stopping policy against sampled
// channels, Monte-Carlo evaluation, and the two comparison baselines
// (approximate reconstructions of the binary-offloading and fixed-resource
// strategies from the literature).

#include "seqoff/channel.hpp"
#include "seqoff/fastdp.hpp"
#include "seqoff/types.hpp"

#include <cstdint>
#include <vector>

namespace seqoff::policy {

enum class Action { continue_local, offload };

struct BlockRecord {
  int block = 0;
  double gain = 0.0;
  double nats = 0.0;
  double joules = 0.0;
};

/// One simulated run. One-climb shape by construction: a local prefix, at
/// most one offload event, nothing after it. offload_stage == 0 means the
/// whole task ran locally.
struct EpisodeTrace {
  std::vector<Action> decisions;
  std::vector<double> stage_gains;  // measured h at each visited stage
  int offload_stage = 0;
  std::vector<BlockRecord> per_block;
  double energy_j = 0.0;
  double time_total_s = 0.0;
  std::uint64_t seed = 0;
};

/// Offload iff the tabulated offloading cost at (d_n, h) is strictly below
/// the continue-local value k0 l_n f_l^2 + Z_{n+1}; ties continue locally.
/// Branches masked as infeasible force the other one.
Action decide(const fastdp::QzTables& tables, int n, double gain);

EpisodeTrace run_episode(const fastdp::QzTables& tables, const GainDistribution& dist,
                         std::uint64_t seed);

struct Evaluation {
  double mean_j = 0.0;
  double stderr_j = 0.0;
  int deadline_violations = 0;
  int infeasible_episodes = 0;
  int episodes = 0;
};

/// K i.i.d. episodes on sub-streams seed+i with an ordered reduction.
Evaluation evaluate(const fastdp::QzTables& tables, const GainDistribution& dist, int episodes,
                    std::uint64_t seed);

enum class BinaryChoice { full_local, full_offload };

struct BinaryBaseline {
  bool feasible = false;
  double energy_j = 0.0;
  BinaryChoice choice = BinaryChoice::full_local;
};

/// Binary offloading: full-local at the minimal deadline-meeting common
/// frequency vs full offload at n = 1, whichever is cheaper. Slow-fading
/// variant solves the n = 1 inner problem at the given gain.
BinaryBaseline baseline_binary(const TaskProfile& profile, const SystemParams& params,
                               double gain);
/// Fast-fading variant prices full offload as the expected n = 1 table value.
BinaryBaseline baseline_binary(const fastdp::QzTables& tables);

struct FixedBaseline {
  bool feasible = false;
  double energy_j = 0.0;
  int n = 0;
};

/// Fixed resources: every local sub-task at f_l and transmit power p_fix,
/// offload index chosen as the cheapest feasible one.
FixedBaseline baseline_fixed(const TaskProfile& profile, const SystemParams& params, double gain,
                             double p_fix_w);
/// Fast-fading variant: expected energy through the block recursion with
/// per-block costs priced at p_fix. Non-terminal blocks may send at most the
/// fixed-power capacity; the final block falls back to Shannon-optimal power
/// so delivery is always possible.
FixedBaseline baseline_fixed(const fastdp::QzTables& tables, double p_fix_w);

/// Default p_fix: the optimal slow-fading transmit power at h = E[h].
double default_fixed_power(const TaskProfile& profile, const SystemParams& params,
                           const GainDistribution& dist, double tol_s = 1e-6);

}  // namespace seqoff::policy
