#include "seqoff/config.hpp"

#include "seqoff/json_support.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace seqoff {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at " + where + ": " + what);
}

const nlohmann::json& field(const nlohmann::json& j, const std::string& where,
                            const std::string& key) {
  if (!j.contains(key)) fail(where, "missing field \"" + key + "\"");
  return j.at(key);
}

double number(const nlohmann::json& j, const std::string& where, const std::string& key) {
  const auto& v = field(j, where, key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

Vector number_array(const nlohmann::json& j, const std::string& where, const std::string& key) {
  const auto& v = field(j, where, key);
  if (!v.is_array() || v.empty()) fail(where + "." + key, "expected a nonempty array");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(where + "." + key, "expected numbers");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

void hash_double(std::uint64_t& h, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g;", v);
  hash_bytes(h, buf, std::char_traits<char>::length(buf));
}

}  // namespace

std::uint64_t compute_params_hash(const TaskProfile& profile, const SystemParams& params,
                                  const GainDistribution& dist, const SolverConfig& solver) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Index i = 0; i < profile.size(); ++i) hash_double(h, profile.cycles()[i]);
  for (Index i = 0; i < profile.size(); ++i) hash_double(h, profile.input_nats()[i]);
  hash_double(h, params.bandwidth_hz);
  hash_double(h, params.k0);
  hash_double(h, params.f_max_hz);
  hash_double(h, params.f_l_hz);
  hash_double(h, params.f_e_hz);
  hash_double(h, params.deadline_s);
  hash_double(h, params.coherence_s);
  if (dist.kind() == DistKind::exponential) {
    hash_bytes(h, "exp;", 4);
    hash_double(h, dist.mean());
  } else {
    hash_bytes(h, "disc;", 5);
    for (Index i = 0; i < dist.gains().size(); ++i) {
      hash_double(h, dist.gains()[i]);
      hash_double(h, dist.probs()[i]);
    }
  }
  hash_double(h, solver.d_intervals);
  hash_double(h, solver.h_nodes);
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ExperimentConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  const auto& task = field(j, "$", "task");
  Vector cycles = number_array(task, "task", "cycles_mcycles") * 1e6;
  Vector data_kbits = number_array(task, "task", "data_kbits");
  if (cycles.size() != data_kbits.size()) {
    fail("task", "cycles_mcycles and data_kbits must have the same length");
  }
  Vector nats(data_kbits.size());
  for (Index i = 0; i < data_kbits.size(); ++i) nats[i] = bits_to_nats(data_kbits[i] * 1e3);

  const auto& sys = field(j, "$", "system");
  SystemParams params;
  params.bandwidth_hz = number(sys, "system", "bandwidth_hz");
  params.k0 = number(sys, "system", "k0");
  params.f_max_hz = number(sys, "system", "f_max_hz");
  params.f_l_hz = number(sys, "system", "f_l_hz");
  params.f_e_hz = number(sys, "system", "f_e_hz");
  params.deadline_s = number(sys, "system", "deadline_s");
  params.coherence_s = number(sys, "system", "coherence_s");

  SolverConfig solver;
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("d_intervals")) solver.d_intervals = s.at("d_intervals").get<int>();
    if (s.contains("h_nodes")) solver.h_nodes = s.at("h_nodes").get<int>();
    if (s.contains("golden_tol_s")) solver.golden_tol_s = s.at("golden_tol_s").get<double>();
    if (s.contains("wf_tol")) solver.wf_tol = s.at("wf_tol").get<double>();
    if (s.contains("wf_max_iter")) solver.wf_max_iter = s.at("wf_max_iter").get<int>();
    if (s.contains("seed")) solver.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("episodes")) solver.episodes = s.at("episodes").get<int>();
  }

  try {
    params.validate();
    TaskProfile profile(std::move(cycles), std::move(nats));
    GainDistribution dist = dist_from_json(field(j, "$", "channel"));
    ExperimentConfig cfg{std::move(profile), params, std::move(dist), solver, 0};
    cfg.params_hash = compute_params_hash(cfg.profile, cfg.params, cfg.dist, cfg.solver);
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace seqoff
