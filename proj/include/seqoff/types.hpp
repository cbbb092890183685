#pragma once

// Domain types and the elementary energy/time primitives shared by every
// solver: local computing cost, Shannon block offloading cost, unit
// conversion, and prefix/suffix schedule sums over a sequential task chain.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seqoff {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when no offloading index can meet the deadline.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double require_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::domain_error(std::string(what) + " must be finite and >= 0, got " +
                            std::to_string(v));
  }
  return v;
}

inline double require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw std::domain_error(std::string(what) + " must be finite and > 0, got " +
                            std::to_string(v));
  }
  return v;
}

}  // namespace detail

/// Nonnegative timespan in seconds.
class Duration {
 public:
  Duration() = default;
  explicit Duration(double seconds) : s_(detail::require_nonneg(seconds, "Duration")) {}
  double seconds() const { return s_; }
  friend bool operator<(Duration a, Duration b) { return a.s_ < b.s_; }
  friend bool operator<=(Duration a, Duration b) { return a.s_ <= b.s_; }

 private:
  double s_ = 0.0;
};

/// Nonnegative amount of energy in joules.
class Energy {
 public:
  Energy() = default;
  explicit Energy(double joules) : j_(detail::require_nonneg(joules, "Energy")) {}
  double joules() const { return j_; }
  friend Energy operator+(Energy a, Energy b) { return Energy(a.j_ + b.j_); }
  friend bool operator<(Energy a, Energy b) { return a.j_ < b.j_; }
  friend bool operator<=(Energy a, Energy b) { return a.j_ <= b.j_; }

 private:
  double j_ = 0.0;
};

/// Normalized channel gain: received SNR per unit transmit power.
class Gain {
 public:
  Gain() = default;
  explicit Gain(double value) : g_(detail::require_nonneg(value, "Gain")) {}
  double value() const { return g_; }

 private:
  double g_ = 0.0;
};

/// The sequential task chain: per sub-task CPU cycles and input sizes in nats.
/// Sub-task i is executable only after sub-task i-1 has completed.
class TaskProfile {
 public:
  TaskProfile(Vector cycles, Vector input_nats)
      : cycles_(std::move(cycles)), input_nats_(std::move(input_nats)) {
    if (cycles_.size() < 1 || cycles_.size() != input_nats_.size()) {
      throw std::invalid_argument("TaskProfile: need N >= 1 and matching list lengths");
    }
    for (Index i = 0; i < cycles_.size(); ++i) {
      detail::require_positive(cycles_[i], "TaskProfile cycles");
      detail::require_positive(input_nats_[i], "TaskProfile input nats");
    }
  }

  int size() const { return static_cast<int>(cycles_.size()); }
  const Vector& cycles() const { return cycles_; }
  const Vector& input_nats() const { return input_nats_; }
  double total_cycles() const { return cycles_.sum(); }
  double max_input_nats() const { return input_nats_.maxCoeff(); }

 private:
  Vector cycles_;
  Vector input_nats_;
};

/// Physical constants of the system: channel bandwidth, switched-capacitance
/// coefficient, device/edge CPU frequencies, deadline, and coherence time.
struct SystemParams {
  double bandwidth_hz = 0.0;   // W
  double k0 = 0.0;             // J*s^2/cycle
  double f_max_hz = 0.0;       // device CPU frequency cap
  double f_l_hz = 0.0;         // device CPU frequency in fast fading
  double f_e_hz = 0.0;         // edge CPU frequency, > f_max
  double deadline_s = 0.0;     // T_th
  double coherence_s = 0.0;    // tau

  void validate() const {
    detail::require_positive(bandwidth_hz, "bandwidth_hz");
    detail::require_positive(k0, "k0");
    detail::require_positive(f_max_hz, "f_max_hz");
    detail::require_positive(f_l_hz, "f_l_hz");
    detail::require_positive(f_e_hz, "f_e_hz");
    detail::require_positive(deadline_s, "deadline_s");
    detail::require_positive(coherence_s, "coherence_s");
    if (f_l_hz > f_max_hz) throw std::domain_error("SystemParams: need f_l <= f_max");
    if (f_e_hz <= f_max_hz) throw std::domain_error("SystemParams: need f_e > f_max");
  }
};

/// Time to run `cycles` CPU cycles at frequency `hz`.
inline Duration local_time(double cycles, double hz) {
  detail::require_positive(cycles, "local_time cycles");
  detail::require_positive(hz, "local_time frequency");
  return Duration(cycles / hz);
}

/// Energy to run `cycles` CPU cycles at frequency `hz`: k0 * l * f^2.
/// Zero cycles or zero frequency cost nothing.
inline Energy local_energy(double cycles, double hz, double k0) {
  detail::require_nonneg(cycles, "local_energy cycles");
  detail::require_nonneg(hz, "local_energy frequency");
  detail::require_positive(k0, "local_energy k0");
  return Energy(k0 * cycles * hz * hz);
}

/// Energy to upload `nats` within a fading block of duration `t` at gain `h`:
/// (e^{d/(W t)} - 1) * t / h. Strictly increasing and convex in d,
/// nonincreasing in t. Overflows to +inf for extreme d/(W t); callers that
/// tabulate treat non-finite values as an infeasible sentinel.
inline double block_energy_j(double nats, double gain, double t_s, double bandwidth_hz) {
  return std::expm1(nats / (bandwidth_hz * t_s)) * t_s / gain;
}

inline Energy block_energy(double nats, Gain h, Duration t, double bandwidth_hz) {
  detail::require_nonneg(nats, "block_energy nats");
  detail::require_positive(bandwidth_hz, "block_energy bandwidth");
  if (h.value() <= 0.0) throw std::domain_error("block_energy: gain must be > 0");
  if (t.seconds() <= 0.0) throw std::domain_error("block_energy: duration must be > 0");
  return Energy(block_energy_j(nats, h.value(), t.seconds(), bandwidth_hz));
}

/// Input sizes arrive in bits; all rate formulas use natural-log units.
inline double bits_to_nats(double bits) {
  detail::require_nonneg(bits, "bits_to_nats bits");
  return bits * std::numbers::ln2;
}

inline void check_stage_index(const TaskProfile& profile, int n) {
  if (n < 1 || n > profile.size()) {
    throw std::out_of_range("stage index n=" + std::to_string(n) + " outside 1.." +
                            std::to_string(profile.size()));
  }
}

/// Sum_{i=n..N} l_i / f_e: edge time for the offloaded suffix.
inline Duration edge_suffix_time(const TaskProfile& profile, int n, double f_e_hz) {
  check_stage_index(profile, n);
  detail::require_positive(f_e_hz, "edge_suffix_time frequency");
  const Index first = n - 1;
  return Duration(profile.cycles().segment(first, profile.size() - first).sum() / f_e_hz);
}

/// Sum_{i<n} l_i / f: device time for the local prefix (zero when n = 1).
inline Duration local_prefix_time(const TaskProfile& profile, int n, double f_hz) {
  check_stage_index(profile, n);
  detail::require_positive(f_hz, "local_prefix_time frequency");
  if (n == 1) return Duration(0.0);
  return Duration(profile.cycles().head(n - 1).sum() / f_hz);
}

/// Sum_{i<n} k0 * l_i * f^2: device energy for the local prefix.
inline double local_prefix_energy_j(const TaskProfile& profile, int n, double f_hz, double k0) {
  check_stage_index(profile, n);
  if (n == 1) return 0.0;
  return k0 * f_hz * f_hz * profile.cycles().head(n - 1).sum();
}

}  // namespace seqoff
