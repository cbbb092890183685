#pragma once

// Offline table construction for fast fading: the deadline-tight block
// schedule per offload index, the backward Q recursion over fading blocks
// (minimal expected offloading energy with d nats left and the current gain
// measured), and the stopping values Z that drive the online policy.
//
// All minimizations run on a shared uniform d grid, so an enumeration oracle
// can reproduce the tables bit-for-bit with independent code; piecewise
// linear interpolation serves lookups between nodes.

#include "seqoff/channel.hpp"
#include "seqoff/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace seqoff::fastdp {

struct BlockSchedule {
  int n = 0;
  bool feasible = false;
  double budget_s = 0.0;  // B(n): deadline minus local prefix at f_l minus edge suffix
  int m_star = 0;         // M*(n) fading blocks
  double t_star_s = 0.0;  // final-block duration in (0, tau]
};

/// Deadline-tight schedule: B(n) split as (M*-1) full blocks plus a final
/// block of t* = B - (M*-1) tau, with exact multiples resolved as t* = tau.
BlockSchedule schedule(const TaskProfile& profile, const SystemParams& params, int n);

struct GridSpec {
  int d_intervals = 256;
  int h_nodes = 128;
};

/// Uniform grid of intervals+1 points on [0, max_nats].
Vector make_d_grid(double max_nats, int intervals);

struct StageBuildOptions {
  bool keep_q_layers = true;  // retain every layer (else only layer m = 1)
  bool keep_policy = true;
};

/// DP tables for one offload window. Layer m holds the minimal expected
/// energy with m-th block starting, d nats left (rows) and the block's gain
/// just measured (columns). +inf entries are the infeasible sentinel.
struct StageTables {
  int m_blocks = 0;
  double t_last_s = 0.0;
  double coherence_s = 0.0;
  bool all_layers = true;
  std::vector<Matrix> q;       // retained layers, (D+1) x H
  std::vector<Matrix> policy;  // within-block nats for layers 1..M-1
  Matrix qbar;                 // M x (D+1); row m-1 = expectation of layer m over h
  bool overflow_warning = false;
  bool scan_fallback = false;

  const Matrix& q_layer(int m) const;
  const Matrix& policy_layer(int m) const;
};

/// Per-block cost of sending d_grid[i] nats at quadrature node j within one
/// block of the given duration (Shannon-optimal transmit power).
Matrix block_cost_matrix(const Vector& d_grid, const QuadratureRule& quad, double bandwidth_hz,
                         double block_s);

/// Backward recursion from explicit per-block cost tables. cost_full applies
/// to blocks 1..M-1, cost_last to the final block. The inner minimization
/// over the sent amount runs on the d grid itself, by golden-ratio index
/// search when the next layer's expectation is convex and by full scan
/// otherwise.
StageTables build_stage_from_costs(const Vector& d_grid, const QuadratureRule& quad,
                                   const Matrix& cost_full, const Matrix& cost_last, int m_blocks,
                                   const StageBuildOptions& opts = {});

/// Tables for an M-block window whose blocks last coherence_s except the
/// final one (t_last_s).
StageTables build_stage(const Vector& d_grid, const QuadratureRule& quad, double bandwidth_hz,
                        double coherence_s, int m_blocks, double t_last_s,
                        const StageBuildOptions& opts = {});

/// Everything the online policy needs: per-stage schedules and Q tables, the
/// stopping values Z_n(h) / Z_n, and the reachability mask for the
/// continue-local branch.
struct QzTables {
  QzTables(TaskProfile profile_, SystemParams params_, GainDistribution dist_, Vector d_grid_,
           QuadratureRule quad_)
      : profile(std::move(profile_)),
        params(std::move(params_)),
        dist(std::move(dist_)),
        d_grid(std::move(d_grid_)),
        quad(std::move(quad_)) {}

  TaskProfile profile;
  SystemParams params;
  GainDistribution dist;
  Vector d_grid;
  QuadratureRule quad;
  std::vector<BlockSchedule> schedules;  // per n
  std::vector<StageTables> stages;       // per n; empty when infeasible
  std::vector<std::uint8_t> local_ok;    // continue-local admissible at stage n
  Matrix z_h;                            // N x H, +inf rows where unreachable-infeasible
  Vector z;                              // N+1 entries; z[n-1] = Z_n, z[N] = Z_{N+1} = 0
  std::uint64_t params_hash = 0;
};

QzTables build(const TaskProfile& profile, const SystemParams& params,
               const GainDistribution& dist, const GridSpec& grid = {},
               std::uint64_t params_hash = 0);

/// Bilinear interpolation inside the node hull, flat in h beyond the first
/// and last node, exact at nodes. Returns joules (+inf sentinel possible).
double q_lookup(const QzTables& tables, int n, int m, double d_nats, double gain);

/// Stored argmin of the within-block minimization, same interpolation rules.
double policy_lookup(const QzTables& tables, int n, int m, double d_nats, double gain);

// Interpolation helpers shared with the policy runner and oracle checks.
double interp_d(const Matrix& table, const Vector& d_grid, double d_nats, Index h_col);
double interp_linear(const Vector& xs, const Vector& ys, double x);
double bilinear(const Matrix& table, const Vector& d_grid, const Vector& h_nodes, double d_nats,
                double gain);

/// Persists manifest.json plus one CSV per (n, m) matrix; the stored params
/// hash guards simulate runs against stale tables.
void save(const QzTables& tables, const std::string& dir);
QzTables load(const std::string& dir);

}  // namespace seqoff::fastdp
