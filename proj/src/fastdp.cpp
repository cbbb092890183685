#include "seqoff/fastdp.hpp"

#include "seqoff/json_support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace seqoff::fastdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int worker_count() {
  if (const char* env = std::getenv("SEQOFF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(begin, end) over disjoint column ranges; each range writes only its
// own columns, so the result is identical for any worker count.
template <class Fn>
void parallel_columns(Index cols, Fn&& fn) {
  const int workers = std::min<Index>(worker_count(), cols);
  if (workers <= 1) {
    fn(Index{0}, cols);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const Index begin = cols * w / workers;
    const Index end = cols * (w + 1) / workers;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

template <class Fn>
std::pair<int, double> argmin_scan(Fn&& f, int hi) {
  int best = 0;
  double fb = f(0);
  for (int j = 1; j <= hi; ++j) {
    const double v = f(j);
    if (v < fb) {
      fb = v;
      best = j;
    }
  }
  return {best, fb};
}

bool convex_enough(const Vector& v) {
  if (!v.allFinite()) return false;
  const double scale = v.cwiseAbs().maxCoeff();
  const double tol = 1e-6 * std::max(scale, 1e-300);
  for (Index i = 1; i + 1 < v.size(); ++i) {
    if (v[i + 1] - 2.0 * v[i] + v[i - 1] < -tol) return false;
  }
  return true;
}

double snap(double a) {
  if (a < 1e-9) return 0.0;
  if (a > 1.0 - 1e-9) return 1.0;
  return a;
}

}  // namespace

BlockSchedule schedule(const TaskProfile& profile, const SystemParams& params, int n) {
  check_stage_index(profile, n);
  params.validate();
  BlockSchedule s;
  s.n = n;
  const double budget = params.deadline_s -
                        local_prefix_time(profile, n, params.f_l_hz).seconds() -
                        edge_suffix_time(profile, n, params.f_e_hz).seconds();
  s.budget_s = budget;
  if (budget <= 0.0) return s;

  const double tau = params.coherence_s;
  const double ratio = budget / tau;
  int m = static_cast<int>(std::ceil(ratio - 1e-9));
  if (m < 1) m = 1;
  double t = budget - (m - 1) * tau;
  if (t > tau) t = tau;  // exact multiple resolved as a full final block
  s.feasible = true;
  s.m_star = m;
  s.t_star_s = t;
  return s;
}

Vector make_d_grid(double max_nats, int intervals) {
  detail::require_positive(max_nats, "d grid maximum");
  if (intervals < 1) throw std::invalid_argument("d grid needs at least one interval");
  return Vector::LinSpaced(intervals + 1, 0.0, max_nats);
}

const Matrix& StageTables::q_layer(int m) const {
  if (m < 1 || m > m_blocks) throw std::out_of_range("q_layer: m outside 1..M*");
  if (all_layers) return q[m - 1];
  if (m != 1) throw std::logic_error("q_layer: only layer 1 was retained");
  return q[0];
}

const Matrix& StageTables::policy_layer(int m) const {
  if (m < 1 || m >= m_blocks) throw std::out_of_range("policy_layer: m outside 1..M*-1");
  if (policy.empty()) throw std::logic_error("policy_layer: policy tables were not retained");
  return policy[m - 1];
}

Matrix block_cost_matrix(const Vector& d_grid, const QuadratureRule& quad, double bandwidth_hz,
                         double block_s) {
  detail::require_positive(bandwidth_hz, "block_cost_matrix bandwidth");
  detail::require_positive(block_s, "block_cost_matrix duration");
  Matrix cost(d_grid.size(), quad.size());
  for (Index j = 0; j < quad.size(); ++j) {
    const double h = quad.nodes()[j];
    for (Index i = 0; i < d_grid.size(); ++i) {
      cost(i, j) = block_energy_j(d_grid[i], h, block_s, bandwidth_hz);
    }
  }
  return cost;
}

StageTables build_stage_from_costs(const Vector& d_grid, const QuadratureRule& quad,
                                   const Matrix& cost_full, const Matrix& cost_last, int m_blocks,
                                   const StageBuildOptions& opts) {
  const Index rows = d_grid.size();
  const Index hs = quad.size();
  if (m_blocks < 1) throw std::invalid_argument("build_stage_from_costs: m_blocks must be >= 1");
  if (cost_last.rows() != rows || cost_last.cols() != hs ||
      (m_blocks > 1 && (cost_full.rows() != rows || cost_full.cols() != hs))) {
    throw std::invalid_argument("build_stage_from_costs: cost table shape mismatch");
  }

  StageTables st;
  st.m_blocks = m_blocks;
  st.all_layers = opts.keep_q_layers;
  st.qbar = Matrix(m_blocks, rows);
  if (opts.keep_q_layers) st.q.resize(m_blocks);
  if (opts.keep_policy && m_blocks > 1) st.policy.resize(m_blocks - 1);

  Matrix layer = cost_last;
  if (!layer.allFinite()) st.overflow_warning = true;
  st.qbar.row(m_blocks - 1) = (layer * quad.weights()).transpose();
  if (opts.keep_q_layers) st.q[m_blocks - 1] = layer;

  for (int m = m_blocks - 1; m >= 1; --m) {
    const Vector next_qbar = st.qbar.row(m).transpose();
    const bool fallback = !convex_enough(next_qbar);
    st.scan_fallback = st.scan_fallback || fallback;

    Matrix qm(rows, hs);
    Matrix pol(rows, hs);
    parallel_columns(hs, [&](Index col_begin, Index col_end) {
      for (Index jh = col_begin; jh < col_end; ++jh) {
        const auto cost_col = cost_full.col(jh);
        if (fallback) {
          for (Index i = 0; i < rows; ++i) {
            auto f = [&](int j) { return cost_col[j] + next_qbar[i - j]; };
            const auto [bj, bv] = argmin_scan(f, static_cast<int>(i));
            qm(i, jh) = bv;
            pol(i, jh) = d_grid[bj];
          }
          continue;
        }
        // Convex block cost plus convex continuation: the smallest-index
        // minimizer is nondecreasing in the remaining amount, so one forward
        // pointer covers the whole column.
        Index j = 0;
        for (Index i = 0; i < rows; ++i) {
          double best = cost_col[j] + next_qbar[i - j];
          while (j < i) {
            const double v = cost_col[j + 1] + next_qbar[i - j - 1];
            if (v < best) {
              best = v;
              ++j;
            } else {
              break;
            }
          }
          qm(i, jh) = best;
          pol(i, jh) = d_grid[j];
        }
      }
    });
    if (!qm.allFinite()) st.overflow_warning = true;
    st.qbar.row(m - 1) = (qm * quad.weights()).transpose();
    if (opts.keep_policy && m_blocks > 1) st.policy[m - 1] = std::move(pol);
    if (opts.keep_q_layers) {
      st.q[m - 1] = std::move(qm);
    } else if (m == 1) {
      st.q = {std::move(qm)};
    }
  }
  if (!opts.keep_q_layers && m_blocks == 1) st.q = {std::move(layer)};
  return st;
}

StageTables build_stage(const Vector& d_grid, const QuadratureRule& quad, double bandwidth_hz,
                        double coherence_s, int m_blocks, double t_last_s,
                        const StageBuildOptions& opts) {
  detail::require_positive(t_last_s, "build_stage final-block duration");
  if (t_last_s > coherence_s * (1.0 + 1e-12)) {
    throw std::invalid_argument("build_stage: final block longer than the coherence time");
  }
  const Matrix cost_last = block_cost_matrix(d_grid, quad, bandwidth_hz, t_last_s);
  Matrix cost_full;
  if (m_blocks > 1) {
    cost_full = (t_last_s == coherence_s)
                    ? cost_last
                    : block_cost_matrix(d_grid, quad, bandwidth_hz, coherence_s);
  }
  StageTables st = build_stage_from_costs(d_grid, quad, cost_full, cost_last, m_blocks, opts);
  st.t_last_s = t_last_s;
  st.coherence_s = coherence_s;
  return st;
}

QzTables build(const TaskProfile& profile, const SystemParams& params,
               const GainDistribution& dist, const GridSpec& grid, std::uint64_t params_hash) {
  params.validate();
  if (grid.d_intervals < 32) throw std::invalid_argument("build: need at least 32 d intervals");
  const int N = profile.size();

  QzTables t(profile, params, dist, make_d_grid(profile.max_input_nats(), grid.d_intervals),
             make_quadrature(dist, grid.h_nodes));
  t.params_hash = params_hash;
  t.schedules.resize(N);
  t.stages.resize(N);

  const Matrix cost_tau =
      block_cost_matrix(t.d_grid, t.quad, params.bandwidth_hz, params.coherence_s);
  for (int n = 1; n <= N; ++n) {
    const BlockSchedule s = schedule(profile, params, n);
    t.schedules[n - 1] = s;
    if (!s.feasible) continue;
    const Matrix cost_last =
        (s.t_star_s == params.coherence_s)
            ? cost_tau
            : block_cost_matrix(t.d_grid, t.quad, params.bandwidth_hz, s.t_star_s);
    t.stages[n - 1] = build_stage_from_costs(t.d_grid, t.quad, cost_tau, cost_last, s.m_star);
    t.stages[n - 1].t_last_s = s.t_star_s;
    t.stages[n - 1].coherence_s = params.coherence_s;
  }

  // Stopping values, backward. The continue-local branch is admitted only
  // when some later option can still meet the deadline (the recursion would
  // otherwise paint the policy into a corner).
  const Index hs = t.quad.size();
  t.local_ok.assign(N, 0);
  t.z = Vector::Constant(N + 1, kInf);
  t.z[N] = 0.0;
  t.z_h = Matrix::Constant(N, hs, kInf);

  const bool full_local_ok =
      profile.total_cycles() / params.f_l_hz <= params.deadline_s;
  bool alive_next = false;  // alive(n+1)
  for (int n = N; n >= 1; --n) {
    const bool loc_ok = (n == N) ? full_local_ok : alive_next;
    const bool off_ok = t.schedules[n - 1].feasible;
    t.local_ok[n - 1] = loc_ok ? 1 : 0;
    const bool alive = off_ok || loc_ok;
    alive_next = alive;
    if (!alive) continue;

    const double d_n = profile.input_nats()[n - 1];
    const double local_value =
        loc_ok ? local_energy(profile.cycles()[n - 1], params.f_l_hz, params.k0).joules() + t.z[n]
               : kInf;
    for (Index jh = 0; jh < hs; ++jh) {
      const double offload_value =
          off_ok ? interp_d(t.stages[n - 1].q_layer(1), t.d_grid, d_n, jh) : kInf;
      t.z_h(n - 1, jh) = std::min(offload_value, local_value);
    }
    t.z[n - 1] = t.z_h.row(n - 1) * t.quad.weights();
  }
  if (!alive_next) {
    throw InfeasibleError("no branch at stage 1 can meet the deadline: offloading is "
                          "infeasible for every n and full-local execution exceeds T_th");
  }
  return t;
}

double interp_d(const Matrix& table, const Vector& d_grid, double d, Index h_col) {
  const Index top = d_grid.size() - 1;
  if (d < 0.0 || d > d_grid[top] * (1.0 + 1e-12)) {
    throw std::out_of_range("interp_d: d outside the tabulated grid");
  }
  const double step = d_grid[top] / static_cast<double>(top);
  Index i = std::min<Index>(static_cast<Index>(d / step), top - 1);
  while (i > 0 && d < d_grid[i]) --i;
  while (i < top - 1 && d > d_grid[i + 1]) ++i;
  const double a = snap((d - d_grid[i]) / (d_grid[i + 1] - d_grid[i]));
  if (a == 0.0) return table(i, h_col);
  if (a == 1.0) return table(i + 1, h_col);
  return (1.0 - a) * table(i, h_col) + a * table(i + 1, h_col);
}

double interp_linear(const Vector& xs, const Vector& ys, double x) {
  const Index n = xs.size();
  if (x <= xs[0]) return ys[0];
  if (x >= xs[n - 1]) return ys[n - 1];
  Index lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const Index mid = (lo + hi) / 2;
    (xs[mid] <= x ? lo : hi) = mid;
  }
  const double a = snap((x - xs[lo]) / (xs[lo + 1] - xs[lo]));
  if (a == 0.0) return ys[lo];
  if (a == 1.0) return ys[lo + 1];
  return (1.0 - a) * ys[lo] + a * ys[lo + 1];
}

double bilinear(const Matrix& table, const Vector& d_grid, const Vector& h_nodes, double d,
                double gain) {
  const Index hs = h_nodes.size();
  if (gain <= h_nodes[0]) return interp_d(table, d_grid, d, 0);
  if (gain >= h_nodes[hs - 1]) return interp_d(table, d_grid, d, hs - 1);
  Index lo = 0, hi = hs - 1;
  while (hi - lo > 1) {
    const Index mid = (lo + hi) / 2;
    (h_nodes[mid] <= gain ? lo : hi) = mid;
  }
  const double a = snap((gain - h_nodes[lo]) / (h_nodes[lo + 1] - h_nodes[lo]));
  if (a == 0.0) return interp_d(table, d_grid, d, lo);
  if (a == 1.0) return interp_d(table, d_grid, d, lo + 1);
  return (1.0 - a) * interp_d(table, d_grid, d, lo) + a * interp_d(table, d_grid, d, lo + 1);
}

double q_lookup(const QzTables& tables, int n, int m, double d_nats, double gain) {
  check_stage_index(tables.profile, n);
  if (!tables.schedules[n - 1].feasible) {
    throw std::logic_error("q_lookup: stage " + std::to_string(n) + " has no offload window");
  }
  detail::require_positive(gain, "q_lookup gain");
  return bilinear(tables.stages[n - 1].q_layer(m), tables.d_grid, tables.quad.nodes(), d_nats,
                  gain);
}

double policy_lookup(const QzTables& tables, int n, int m, double d_nats, double gain) {
  check_stage_index(tables.profile, n);
  if (!tables.schedules[n - 1].feasible) {
    throw std::logic_error("policy_lookup: stage " + std::to_string(n) + " has no offload window");
  }
  detail::require_positive(gain, "policy_lookup gain");
  return bilinear(tables.stages[n - 1].policy_layer(m), tables.d_grid, tables.quad.nodes(),
                  d_nats, gain);
}

namespace {

namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const Vector& d_grid,
                      std::uint64_t hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  out << "# params_hash=" << hex << "\n";
  out << "d_nats";
  for (Index j = 0; j < m.cols(); ++j) out << ",h" << j;
  out << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    out << fmt17(d_grid[i]);
    for (Index j = 0; j < m.cols(); ++j) out << "," << fmt17(m(i, j));
    out << "\n";
  }
}

Matrix read_matrix_csv(const fs::path& path, Index rows, Index cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Matrix m(rows, cols);
  std::string line;
  Index i = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("d_nats", 0) == 0) continue;
    if (i >= rows) throw std::runtime_error("too many rows in " + path.string());
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // d column
    for (Index j = 0; j < cols; ++j) {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error("short row in " + path.string());
      }
      m(i, j) = std::strtod(cell.c_str(), nullptr);
    }
    ++i;
  }
  if (i != rows) throw std::runtime_error("row count mismatch in " + path.string());
  return m;
}

}  // namespace

void save(const QzTables& t, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);

  nlohmann::json manifest;
  manifest["format"] = "seqoff-qz-tables-v1";
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(t.params_hash));
  manifest["params_hash"] = std::string(hex);
  manifest["task"] = task_to_json(t.profile);
  manifest["system"] = system_to_json(t.params);
  manifest["channel"] = dist_to_json(t.dist);
  manifest["grid"] = {{"d_max_nats", t.d_grid[t.d_grid.size() - 1]},
                      {"d_intervals", t.d_grid.size() - 1}};
  manifest["h_nodes"] = std::vector<double>(t.quad.nodes().begin(), t.quad.nodes().end());
  manifest["h_weights"] = std::vector<double>(t.quad.weights().begin(), t.quad.weights().end());
  nlohmann::json scheds = nlohmann::json::array();
  for (const auto& s : t.schedules) {
    scheds.push_back({{"n", s.n},
                      {"feasible", s.feasible},
                      {"budget_s", s.budget_s},
                      {"m_star", s.m_star},
                      {"t_star_s", s.t_star_s}});
  }
  manifest["schedules"] = scheds;
  manifest["local_ok"] = t.local_ok;
  // stringified so the +inf sentinel survives the JSON round trip
  std::vector<std::string> zrepr;
  for (Index i = 0; i < t.z.size(); ++i) zrepr.push_back(fmt17(t.z[i]));
  manifest["z"] = zrepr;

  std::ofstream mf(base / "manifest.json");
  if (!mf) throw std::runtime_error("cannot write manifest.json in " + dir);
  mf << manifest.dump(2) << "\n";

  write_matrix_csv(base / "z_h.csv", t.z_h, Vector::LinSpaced(t.z_h.rows(), 1, t.z_h.rows()),
                   t.params_hash);
  for (int n = 1; n <= t.profile.size(); ++n) {
    if (!t.schedules[n - 1].feasible) continue;
    const StageTables& st = t.stages[n - 1];
    for (int m = 1; m <= st.m_blocks; ++m) {
      write_matrix_csv(base / ("q_n" + std::to_string(n) + "_m" + std::to_string(m) + ".csv"),
                       st.q_layer(m), t.d_grid, t.params_hash);
      if (m < st.m_blocks) {
        write_matrix_csv(
            base / ("policy_n" + std::to_string(n) + "_m" + std::to_string(m) + ".csv"),
            st.policy_layer(m), t.d_grid, t.params_hash);
      }
    }
    write_matrix_csv(base / ("qbar_n" + std::to_string(n) + ".csv"), st.qbar.transpose(),
                     t.d_grid, t.params_hash);
  }
}

QzTables load(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream mf(base / "manifest.json");
  if (!mf) throw std::runtime_error("cannot read manifest.json in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(mf);

  TaskProfile profile = task_from_json(manifest.at("task"));
  SystemParams params = system_from_json(manifest.at("system"));
  GainDistribution dist = dist_from_json(manifest.at("channel"));

  const auto h_nodes = manifest.at("h_nodes").get<std::vector<double>>();
  const auto h_weights = manifest.at("h_weights").get<std::vector<double>>();
  QuadratureRule quad(Eigen::Map<const Vector>(h_nodes.data(), h_nodes.size()),
                      Eigen::Map<const Vector>(h_weights.data(), h_weights.size()));
  const Index intervals = manifest.at("grid").at("d_intervals").get<Index>();
  Vector d_grid = make_d_grid(manifest.at("grid").at("d_max_nats").get<double>(),
                              static_cast<int>(intervals));

  QzTables t(std::move(profile), params, dist, std::move(d_grid), quad);
  t.params_hash = std::stoull(manifest.at("params_hash").get<std::string>(), nullptr, 16);

  const int N = t.profile.size();
  t.schedules.resize(N);
  t.stages.resize(N);
  for (const auto& js : manifest.at("schedules")) {
    BlockSchedule s;
    s.n = js.at("n").get<int>();
    s.feasible = js.at("feasible").get<bool>();
    s.budget_s = js.at("budget_s").get<double>();
    s.m_star = js.at("m_star").get<int>();
    s.t_star_s = js.at("t_star_s").get<double>();
    t.schedules[s.n - 1] = s;
  }
  t.local_ok = manifest.at("local_ok").get<std::vector<std::uint8_t>>();
  const auto zrepr = manifest.at("z").get<std::vector<std::string>>();
  t.z = Vector(zrepr.size());
  for (std::size_t i = 0; i < zrepr.size(); ++i) t.z[i] = std::strtod(zrepr[i].c_str(), nullptr);

  const Index rows = t.d_grid.size();
  const Index hs = t.quad.size();
  t.z_h = read_matrix_csv(base / "z_h.csv", N, hs);
  for (int n = 1; n <= N; ++n) {
    const BlockSchedule& s = t.schedules[n - 1];
    if (!s.feasible) continue;
    StageTables st;
    st.m_blocks = s.m_star;
    st.t_last_s = s.t_star_s;
    st.coherence_s = params.coherence_s;
    st.all_layers = true;
    st.q.resize(s.m_star);
    if (s.m_star > 1) st.policy.resize(s.m_star - 1);
    for (int m = 1; m <= s.m_star; ++m) {
      st.q[m - 1] = read_matrix_csv(
          base / ("q_n" + std::to_string(n) + "_m" + std::to_string(m) + ".csv"), rows, hs);
      if (m < s.m_star) {
        st.policy[m - 1] = read_matrix_csv(
            base / ("policy_n" + std::to_string(n) + "_m" + std::to_string(m) + ".csv"), rows,
            hs);
      }
    }
    st.qbar =
        read_matrix_csv(base / ("qbar_n" + std::to_string(n) + ".csv"), rows, s.m_star)
            .transpose();
    t.stages[n - 1] = std::move(st);
  }
  return t;
}

}  // namespace seqoff::fastdp
