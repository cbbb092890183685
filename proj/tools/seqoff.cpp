// seqoff: energy-optimal task offloading for a sequentially dependent
// computation chain in a mobile-edge-computing system.
//
// Subcommands: solve-slow, build-tables, simulate, ergodic, sweep, verify.
// Exit codes: 0 success, 1 usage/config error, 2 infeasible instance,
// 3 verification failure.

#include "seqoff/config.hpp"
#include "seqoff/ergodic.hpp"
#include "seqoff/fastdp.hpp"
#include "seqoff/json_support.hpp"
#include "seqoff/oracle.hpp"
#include "seqoff/policy.hpp"
#include "seqoff/slow.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace seqoff;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitVerifyFailed = 3;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------- solve-slow

int cmd_solve_slow(const std::string& config_path, double gain, double tol,
                   const std::string& out_path) {
  const ExperimentConfig cfg = load_config(config_path);
  const double t0 = now_ms();
  slow::SlowSolution sol;
  try {
    sol = slow::solve(cfg.profile, cfg.params, gain, tol);
  } catch (const InfeasibleError& e) {
    nlohmann::json j{{"config_hash", hash_hex(cfg.params_hash)},
                     {"feasible", false},
                     {"reason", e.what()}};
    write_text(out_path, j.dump(2) + "\n");
    return kExitInfeasible;
  }
  const double elapsed = now_ms() - t0;

  nlohmann::json j;
  j["config_hash"] = hash_hex(cfg.params_hash);
  j["feasible"] = true;
  j["n_star"] = sol.n_star;
  j["tau_t_s"] = sol.tau_t_s;
  j["transmit_power_w"] = sol.transmit_power_w;
  j["freqs_hz"] = std::vector<double>(sol.freqs_hz.begin(), sol.freqs_hz.end());
  j["energy_j"] = sol.energy_j;
  j["time_total_s"] = sol.time_total_s;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : sol.per_index) {
    per.push_back({{"n", r.n},
                   {"feasible", r.feasible},
                   {"energy_j", r.feasible ? r.energy_j : -1.0},
                   {"tau_t_s", r.tau_t_s}});
  }
  j["per_index"] = per;
  if (sol.full_local_feasible && sol.full_local_energy_j < sol.energy_j) {
    j["note"] = "fully-local execution (outside the optimization space) would be cheaper: " +
                fmt17(sol.full_local_energy_j) + " J";
  }
  write_text(out_path, j.dump(2) + "\n");
  std::cerr << "solve-slow wall time: " << elapsed << " ms\n";
  return kExitOk;
}

// -------------------------------------------------------------- build-tables

int cmd_build_tables(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig cfg = load_config(config_path);
  const double t0 = now_ms();
  fastdp::GridSpec grid{cfg.solver.d_intervals, cfg.solver.h_nodes};
  const fastdp::QzTables tables =
      fastdp::build(cfg.profile, cfg.params, cfg.dist, grid, cfg.params_hash);
  fastdp::save(tables, out_dir);
  std::cerr << "build-tables wall time: " << (now_ms() - t0) << " ms, Z_1="
            << fmt17(tables.z[0]) << " J\n";
  for (int n = 1; n <= cfg.profile.size(); ++n) {
    if (tables.schedules[n - 1].feasible && tables.stages[n - 1].overflow_warning) {
      std::cerr << "warning: stage " << n << " tables clipped non-finite block energies\n";
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const std::string& config_path, const std::string& tables_dir, int episodes,
                 std::uint64_t seed, const std::string& out_prefix) {
  const ExperimentConfig cfg = load_config(config_path);
  const fastdp::QzTables tables = fastdp::load(tables_dir);
  if (tables.params_hash != cfg.params_hash) {
    std::cerr << "stale tables: directory " << tables_dir << " was built for params hash "
              << hash_hex(tables.params_hash) << " but the config hashes to "
              << hash_hex(cfg.params_hash) << "; rerun build-tables\n";
    return kExitUsage;
  }

  std::ofstream trace(out_prefix + "_trace.csv");
  if (!trace) throw std::runtime_error("cannot write " + out_prefix + "_trace.csv");
  trace << "# config_hash=" << hash_hex(cfg.params_hash) << "\n";
  trace << "episode,stage,action,gain,nats_sent,joules,cum_time_s\n";

  double sum = 0.0, sumsq = 0.0;
  int violations = 0, infeasible = 0;
  long decisions = 0;
  const double t0 = now_ms();
  for (int e = 0; e < episodes; ++e) {
    policy::EpisodeTrace tr;
    try {
      tr = policy::run_episode(tables, cfg.dist, seed + static_cast<std::uint64_t>(e));
    } catch (const InfeasibleError&) {
      ++infeasible;
      continue;
    }
    sum += tr.energy_j;
    sumsq += tr.energy_j * tr.energy_j;
    if (tr.time_total_s > cfg.params.deadline_s + 1e-9) ++violations;
    decisions += static_cast<long>(tr.decisions.size());

    double cum = 0.0;
    for (std::size_t s = 0; s < tr.decisions.size(); ++s) {
      if (tr.decisions[s] == policy::Action::continue_local) {
        const int n = static_cast<int>(s) + 1;
        cum += cfg.profile.cycles()[n - 1] / cfg.params.f_l_hz;
        trace << e << "," << n << ",local," << fmt17(tr.stage_gains[s]) << ",0,"
              << fmt17(local_energy(cfg.profile.cycles()[n - 1], cfg.params.f_l_hz,
                                    cfg.params.k0)
                           .joules())
              << "," << fmt17(cum) << "\n";
      }
    }
    for (const auto& b : tr.per_block) {
      const auto& sched = tables.schedules[tr.offload_stage - 1];
      cum += (b.block < sched.m_star) ? cfg.params.coherence_s : sched.t_star_s;
      trace << e << "," << tr.offload_stage << ",offload," << fmt17(b.gain) << ","
            << fmt17(b.nats) << "," << fmt17(b.joules) << "," << fmt17(cum) << "\n";
    }
  }
  const double elapsed = now_ms() - t0;

  const int ok = episodes - infeasible;
  const double mean = ok > 0 ? sum / ok : 0.0;
  double se = 0.0;
  if (ok > 1) {
    se = std::sqrt(std::max(0.0, (sumsq - sum * sum / ok) / (ok - 1)) / ok);
  }

  std::ofstream summary(out_prefix + "_summary.csv");
  if (!summary) throw std::runtime_error("cannot write " + out_prefix + "_summary.csv");
  summary << "# config_hash=" << hash_hex(cfg.params_hash) << "\n";
  summary << "episodes,mean_energy_J,stderr_J,deadline_violations,infeasible_episodes,"
             "z1_tables_J\n";
  summary << episodes << "," << fmt17(mean) << "," << fmt17(se) << "," << violations << ","
          << infeasible << "," << fmt17(tables.z[0]) << "\n";

  if (decisions > 0) {
    std::cerr << "simulate: " << episodes << " episodes, mean per-decision latency "
              << (elapsed / static_cast<double>(decisions)) << " ms\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------------- ergodic

int cmd_ergodic(const std::string& config_path, int n, const std::string& out_path) {
  const ExperimentConfig cfg = load_config(config_path);
  check_stage_index(cfg.profile, n);
  const double budget = cfg.params.deadline_s -
                        local_prefix_time(cfg.profile, n, cfg.params.f_l_hz).seconds() -
                        edge_suffix_time(cfg.profile, n, cfg.params.f_e_hz).seconds();
  if (budget <= 0.0) {
    std::cerr << "offload window for n=" << n << " is nonpositive (" << budget << " s)\n";
    return kExitInfeasible;
  }
  const double rate =
      cfg.profile.input_nats()[n - 1] / (budget * cfg.params.bandwidth_hz);
  const ergodic::WaterFillingSolution wf = ergodic::solve_wf(
      cfg.dist, rate, budget, cfg.solver.wf_tol, cfg.solver.wf_max_iter, cfg.solver.h_nodes);

  nlohmann::json j;
  j["config_hash"] = hash_hex(cfg.params_hash);
  j["n"] = n;
  j["budget_s"] = budget;
  j["rate_target_nats_per_s_hz"] = rate;
  j["zeta"] = wf.zeta;
  j["mean_power_w"] = wf.mean_power_w;
  j["energy_j"] = wf.energy_j;
  j["rate_residual"] = wf.rate_residual;
  j["iterations"] = wf.iterations;
  write_text(out_path, j.dump(2) + "\n");
  return kExitOk;
}

// --------------------------------------------------------------------- sweep

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const std::string& method,
              const std::string& regime, double gain, const std::string& out_path) {
  const ExperimentConfig cfg = load_config(config_path);
  if (param != "fe" && param != "tth") {
    std::cerr << "unknown sweep parameter \"" << param << "\" (expected fe or tth)\n";
    return kExitUsage;
  }
  if (method != "proposed" && method != "binary" && method != "fixed") {
    std::cerr << "unknown method \"" << method << "\"\n";
    return kExitUsage;
  }
  if (regime != "slow" && regime != "fast") {
    std::cerr << "unknown regime \"" << regime << "\"\n";
    return kExitUsage;
  }
  if (regime == "slow" && !(gain > 0.0)) {
    std::cerr << "slow regime needs --h\n";
    return kExitUsage;
  }

  // Fixed resources stay fixed across the sweep: transmit power tuned once at
  // the base operating point against the mean gain.
  double p_fix = 0.0;
  if (method == "fixed") {
    p_fix = policy::default_fixed_power(cfg.profile, cfg.params, cfg.dist,
                                        cfg.solver.golden_tol_s);
  }

  std::ostringstream csv;
  csv << "# config_hash=" << hash_hex(cfg.params_hash) << "\n";
  csv << "param_value,method,mean_energy_J,stderr_J\n";
  for (const double v : values) {
    SystemParams params = cfg.params;
    if (param == "fe") {
      params.f_e_hz = v;
    } else {
      params.deadline_s = v;
    }
    double energy = std::numeric_limits<double>::infinity();
    try {
      if (regime == "slow") {
        if (method == "proposed") {
          energy = slow::solve(cfg.profile, params, gain, cfg.solver.golden_tol_s).energy_j;
        } else if (method == "binary") {
          energy = policy::baseline_binary(cfg.profile, params, gain).energy_j;
        } else {
          energy = policy::baseline_fixed(cfg.profile, params, gain, p_fix).energy_j;
        }
      } else {
        fastdp::GridSpec grid{cfg.solver.d_intervals, cfg.solver.h_nodes};
        const fastdp::QzTables tables = fastdp::build(cfg.profile, params, cfg.dist, grid);
        if (method == "proposed") {
          energy = tables.z[0];
        } else if (method == "binary") {
          energy = policy::baseline_binary(tables).energy_j;
        } else {
          energy = policy::baseline_fixed(tables, p_fix).energy_j;
        }
      }
    } catch (const InfeasibleError&) {
      // keep +inf for this point
    }
    csv << fmt17(v) << "," << method << "," << fmt17(energy) << ",0\n";
  }
  write_text(out_path, csv.str());
  return kExitOk;
}

// -------------------------------------------------------------------- verify

class Verifier {
 public:
  void check(bool ok, const std::string& name, const std::string& detail = "") {
    if (ok) {
      std::cout << "ok   " << name << "\n";
    } else {
      ++failures_;
      std::cout << "FAIL " << name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
    }
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

void verify_slow(const ExperimentConfig& cfg, Verifier& v) {
  RandomStream stream(cfg.solver.seed);
  int compared = 0;
  double worst = 0.0;
  while (compared < 10) {
    const oracle::RandomInstance inst = oracle::random_instance(stream);
    const auto ref = oracle::slow_grid(inst.profile, inst.params, inst.gain, 100000, 2000);
    bool solver_feasible = true;
    double solved = 0.0;
    try {
      solved = slow::solve(inst.profile, inst.params, inst.gain).energy_j;
    } catch (const InfeasibleError&) {
      solver_feasible = false;
    }
    if (solver_feasible != ref.feasible) {
      v.check(false, "slow/oracle-feasibility-agreement");
      return;
    }
    if (!ref.feasible) continue;
    worst = std::max(worst, std::abs(solved - ref.energy_j) / ref.energy_j);
    ++compared;
  }
  v.check(worst <= 1e-3, "slow/oracle-equivalence-10-instances",
          "worst relative gap " + fmt17(worst));

  for (const double h : {40.0, 60.0}) {
    const auto sol = slow::solve(cfg.profile, cfg.params, h);
    bool post = true;
    if (sol.n_star >= 2) {
      post = std::abs(sol.time_total_s - cfg.params.deadline_s) <=
             1e-9 * cfg.params.deadline_s;
      post = post && sol.freqs_hz[0] <= cfg.params.f_max_hz * (1.0 + 1e-9);
    }
    v.check(post, "slow/deadline-active-h" + std::to_string(static_cast<int>(h)));

    // No feasible nudge of the offload duration may improve the energy.
    const double budget = slow::tau_budget(cfg.profile, cfg.params, sol.n_star);
    bool kkt = true;
    for (const double sgn : {-1.0, 1.0}) {
      const double tau = sol.tau_t_s * (1.0 + sgn * 1e-4);
      if (!(tau > 0.0) || tau > budget) continue;
      const double e = slow::offload_energy_j(cfg.profile, cfg.params, sol.n_star, h, tau) +
                       slow::optimal_freqs(cfg.profile, cfg.params, sol.n_star, tau).energy_j;
      kkt = kkt && e >= sol.energy_j * (1.0 - 1e-6);
    }
    v.check(kkt, "slow/kkt-perturbation-h" + std::to_string(static_cast<int>(h)));
  }

  auto nonincreasing_over = [&](const std::string& name, auto&& mutate,
                                const std::vector<double>& vals) {
    double prev = std::numeric_limits<double>::infinity();
    bool mono = true;
    for (const double x : vals) {
      SystemParams p = cfg.params;
      mutate(p, x);
      const double e = slow::solve(cfg.profile, p, 60.0).energy_j;
      mono = mono && e <= prev * (1.0 + 1e-9);
      prev = e;
    }
    v.check(mono, name);
  };
  nonincreasing_over("slow/energy-nonincreasing-in-fe",
                     [](SystemParams& p, double x) { p.f_e_hz = x; },
                     {2.4e9, 2.7e9, 3.0e9, 3.3e9, 3.6e9});
  nonincreasing_over("slow/energy-nonincreasing-in-tth",
                     [](SystemParams& p, double x) { p.deadline_s = x; },
                     {0.30, 0.325, 0.35, 0.375, 0.40});
}

void verify_dp(const ExperimentConfig& cfg, Verifier& v) {
  // Tiny discrete instance sized for exact enumeration.
  TaskProfile tiny(Vector{{10e6, 12e6, 8e6}}, Vector{{8000.0, 12800.0, 6400.0}});
  SystemParams tp;
  tp.bandwidth_hz = 1e6;
  tp.k0 = 1e-28;
  tp.f_max_hz = 5e8;
  tp.f_l_hz = 5e8;
  tp.f_e_hz = 3e9;
  tp.deadline_s = 0.08;
  tp.coherence_s = 0.02;
  const GainDistribution two_state =
      GainDistribution::discrete(Vector{{20.0, 80.0}}, Vector{{0.5, 0.5}});
  const fastdp::GridSpec tiny_grid{64, 2};
  const fastdp::QzTables tables = fastdp::build(tiny, tp, two_state, tiny_grid);
  const auto ref = oracle::dp_enumerate(tiny, tp, two_state, tables.d_grid);
  v.check(std::abs(tables.z[0] - ref.z[0]) <= 1e-9 * ref.z[0], "dp/z1-matches-enumeration",
          fmt17(tables.z[0]) + " vs " + fmt17(ref.z[0]));
  v.check(std::abs(ref.policy_tree_value - ref.z[0]) <= 1e-9 * ref.z[0],
          "dp/policy-tree-equals-z1");
  const double static_best = std::min(ref.static_values.minCoeff(), ref.full_local_value);
  v.check(ref.z[0] <= static_best + 1e-12, "dp/stopping-beats-static");

  const auto ev = policy::evaluate(tables, two_state, 10000, cfg.solver.seed);
  v.check(std::abs(ev.mean_j - tables.z[0]) <= 3.0 * std::max(ev.stderr_j, 1e-15),
          "dp/monte-carlo-mean-3sigma",
          fmt17(ev.mean_j) + " vs " + fmt17(tables.z[0]) + " se " + fmt17(ev.stderr_j));
  v.check(ev.deadline_violations == 0, "dp/zero-deadline-violations");

  // Monotonicity of the stage value in the final-block duration and in the
  // number of remaining blocks, on a reduced grid of the configured instance.
  const Vector d_grid = fastdp::make_d_grid(cfg.profile.max_input_nats(), 64);
  const QuadratureRule quad = make_quadrature(cfg.dist, 32);
  const fastdp::BlockSchedule sched = fastdp::schedule(cfg.profile, cfg.params, 1);
  if (sched.feasible) {
    double worst_t = -std::numeric_limits<double>::infinity();
    Matrix prev;
    for (const double t : {0.005, 0.010, 0.015, 0.020}) {
      const auto st = fastdp::build_stage(d_grid, quad, cfg.params.bandwidth_hz,
                                          cfg.params.coherence_s, sched.m_star, t);
      if (prev.size() > 0) worst_t = std::max(worst_t, (st.q_layer(1) - prev).maxCoeff());
      prev = st.q_layer(1);
    }
    v.check(worst_t <= 1e-6, "dp/value-nonincreasing-in-final-block", fmt17(worst_t));

    const auto full = fastdp::build_stage(d_grid, quad, cfg.params.bandwidth_hz,
                                          cfg.params.coherence_s, sched.m_star,
                                          cfg.params.coherence_s);
    double worst_m = -std::numeric_limits<double>::infinity();
    for (int m = sched.m_star; m >= 2; --m) {
      // layer m of an all-full-block window is the (M - m + 1)-block value, so
      // earlier layers (more remaining blocks) must be pointwise no larger
      worst_m = std::max(worst_m, (full.q_layer(m - 1) - full.q_layer(m)).maxCoeff());
    }
    v.check(worst_m <= 1e-6, "dp/value-nonincreasing-in-blocks", fmt17(worst_m));

    double worst_convex = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= sched.m_star; ++m) {
      const Vector row = full.qbar.row(m - 1).transpose();
      worst_convex = std::min(
          worst_convex, oracle::convexity_scan(row, oracle::ScanMode::convexity));
    }
    v.check(worst_convex >= -1e-6 * full.qbar.maxCoeff(), "dp/qbar-convex-in-d",
            fmt17(worst_convex));
  }
}

void verify_ergodic(const ExperimentConfig& cfg, Verifier& v) {
  const GainDistribution two_state =
      GainDistribution::discrete(Vector{{1.0, 3.0}}, Vector{{0.5, 0.5}});
  const auto wf = ergodic::solve_wf(two_state, 0.5 * std::log(3.0), 1.0);
  v.check(std::abs(wf.zeta - 1.0) <= 1e-9 && std::abs(wf.mean_power_w - 1.0 / 3.0) <= 1e-9,
          "ergodic/two-state-closed-form",
          "zeta " + fmt17(wf.zeta) + ", mean power " + fmt17(wf.mean_power_w));

  bool residuals_ok = true;
  double prev_power = -1.0;
  bool increasing = true;
  for (const double rate : {0.2, 0.5, 1.0, 2.0}) {
    const auto sol = ergodic::solve_wf(cfg.dist, rate, 1.0, cfg.solver.wf_tol,
                                       cfg.solver.wf_max_iter, cfg.solver.h_nodes);
    residuals_ok = residuals_ok && std::abs(sol.rate_residual) <= cfg.solver.wf_tol &&
                   std::abs(sol.zeta * sol.rate_residual) <= 1e-6 * sol.mean_power_w;
    increasing = increasing && sol.mean_power_w > prev_power;
    prev_power = sol.mean_power_w;
  }
  v.check(residuals_ok, "ergodic/rate-residual-and-gap");
  v.check(increasing, "ergodic/mean-power-increasing-in-rate");

  try {
    const auto sel = ergodic::offline_select(cfg.profile, cfg.params, cfg.dist,
                                             cfg.solver.h_nodes);
    v.check(sel.n_star >= 1, "ergodic/offline-selects-an-index");
  } catch (const InfeasibleError& e) {
    v.check(false, "ergodic/offline-selects-an-index", e.what());
  }
}

int cmd_verify(const std::string& config_path, const std::string& suite) {
  const ExperimentConfig cfg = load_config(config_path);
  Verifier v;
  if (suite == "slow" || suite == "all") verify_slow(cfg, v);
  if (suite == "dp" || suite == "all") verify_dp(cfg, v);
  if (suite == "ergodic" || suite == "all") verify_ergodic(cfg, v);
  if (suite != "slow" && suite != "dp" && suite != "ergodic" && suite != "all") {
    std::cerr << "unknown suite \"" << suite << "\"\n";
    return kExitUsage;
  }
  std::cout << (v.failures() == 0 ? "verify: all checks passed\n"
                                  : "verify: " + std::to_string(v.failures()) + " failures\n");
  return v.failures() == 0 ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-optimal sequential task offloading"};
  app.set_help_flag("--help", "print help");  // --h is the channel gain
  app.require_subcommand(1);

  std::string config_path, out_path, tables_dir, param, method = "proposed",
                                                        regime = "slow", suite = "all";
  double gain = 0.0, tol = 1e-6;
  int episodes = -1, stage_n = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<double> values;

  auto* solve_cmd = app.add_subcommand("solve-slow", "joint optimum under slow fading");
  solve_cmd->set_help_flag("--help", "print help");
  solve_cmd->add_option("--config", config_path)->required();
  solve_cmd->add_option("--h", gain, "measured normalized channel gain")->required();
  solve_cmd->add_option("--tol", tol, "golden-section tolerance, seconds");
  solve_cmd->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* build_cmd = app.add_subcommand("build-tables", "offline fast-fading tables");
  build_cmd->add_option("--config", config_path)->required();
  build_cmd->add_option("--out", tables_dir, "table directory")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "online policy Monte Carlo");
  sim_cmd->add_option("--config", config_path)->required();
  sim_cmd->add_option("--tables", tables_dir)->required();
  sim_cmd->add_option("--episodes", episodes);
  sim_cmd->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  sim_cmd->add_option("--out", out_path, "output prefix for trace/summary CSVs")->required();

  auto* erg_cmd = app.add_subcommand("ergodic", "zero-coherence-time water-filling");
  erg_cmd->add_option("--config", config_path)->required();
  erg_cmd->add_option("--n", stage_n, "offload index")->required();
  erg_cmd->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep CSV");
  sweep_cmd->set_help_flag("--help", "print help");
  sweep_cmd->add_option("--config", config_path)->required();
  sweep_cmd->add_option("--param", param, "fe or tth")->required();
  sweep_cmd->add_option("--values", values, "sweep values")->required()->delimiter(',');
  sweep_cmd->add_option("--method", method, "proposed, binary, or fixed");
  sweep_cmd->add_option("--regime", regime, "slow or fast");
  sweep_cmd->add_option("--h", gain, "channel gain for the slow regime");
  sweep_cmd->add_option("--out", out_path)->required();

  auto* verify_cmd = app.add_subcommand("verify", "oracle property suites");
  verify_cmd->add_option("--config", config_path)->required();
  verify_cmd->add_option("--suite", suite, "slow, dp, ergodic, or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve_slow(config_path, gain, tol, out_path);
    if (build_cmd->parsed()) return cmd_build_tables(config_path, tables_dir);
    if (sim_cmd->parsed()) {
      const ExperimentConfig cfg = load_config(config_path);
      if (episodes < 0) episodes = cfg.solver.episodes;
      if (!seed_given) seed = cfg.solver.seed;
      return cmd_simulate(config_path, tables_dir, episodes, seed, out_path);
    }
    if (erg_cmd->parsed()) return cmd_ergodic(config_path, stage_n, out_path);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(config_path, param, values, method, regime, gain, out_path);
    }
    if (verify_cmd->parsed()) return cmd_verify(config_path, suite);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
