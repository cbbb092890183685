#pragma once

// Experiment configuration: JSON schema validation, unit conversion at the
// boundary (Mcycles -> cycles, kbits -> nats, once), and the canonical
// parameter hash that guards simulations against stale tables.

#include "seqoff/channel.hpp"
#include "seqoff/fastdp.hpp"
#include "seqoff/types.hpp"

#include <cstdint>
#include <string>

namespace seqoff {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int d_intervals = 256;
  int h_nodes = 128;
  double golden_tol_s = 1e-6;
  double wf_tol = 1e-6;
  int wf_max_iter = 100000;
  std::uint64_t seed = 20240901;
  int episodes = 10000;
};

struct ExperimentConfig {
  TaskProfile profile;  // cycles and nats, already converted
  SystemParams params;
  GainDistribution dist;
  SolverConfig solver;
  std::uint64_t params_hash = 0;  // over task + system + channel + grid
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

/// FNV-1a over a canonical rendering of everything that shapes the tables.
std::uint64_t compute_params_hash(const TaskProfile& profile, const SystemParams& params,
                                  const GainDistribution& dist, const SolverConfig& solver);

std::string hash_hex(std::uint64_t hash);

}  // namespace seqoff
