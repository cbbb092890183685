#pragma once

// Channel-gain distributions: density-free description through quantiles,
// deterministic quadrature for expectations over the gain, and seeded
// sampling for Monte-Carlo episodes.

#include "seqoff/types.hpp"

#include <cstdint>
#include <stdexcept>

namespace seqoff {

enum class DistKind { exponential, discrete };

/// Gain distribution: exponential(mean) for Rayleigh fading, or a finite
/// discrete distribution (first-class so oracles can enumerate exactly).
class GainDistribution {
 public:
  static GainDistribution exponential(double mean);
  /// Support gains must be strictly increasing and positive; probabilities
  /// must sum to 1 within 1e-12.
  static GainDistribution discrete(Vector gains, Vector probs);

  DistKind kind() const { return kind_; }
  /// Analytic mean E[h].
  double mean() const;
  /// Generalized inverse CDF; u must lie in (0, 1).
  double quantile(double u) const;

  const Vector& gains() const;  // discrete only
  const Vector& probs() const;  // discrete only

 private:
  GainDistribution() = default;
  DistKind kind_ = DistKind::exponential;
  double mean_ = 0.0;
  Vector gains_;
  Vector probs_;
};

/// SplitMix64 stream. Identical seeds produce identical sequences; episode
/// sub-streams are decorrelated counter offsets of the base seed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(seed + 0xd1b54a32d192ed03ULL * (index + 1));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw on the open interval (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// One i.i.d. draw (inverse-CDF of a uniform for the exponential case).
Gain sample(const GainDistribution& dist, RandomStream& stream);

/// Nodes and weights realizing E[g(h)]. Discrete distributions are carried
/// exactly; exponential ones through probability-integral-transform midpoint
/// quadrature truncated at the 1 - tail_prob quantile.
class QuadratureRule {
 public:
  QuadratureRule(Vector nodes, Vector weights);

  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }
  Index size() const { return nodes_.size(); }

  template <class Fn>
  double expect(Fn&& g) const {
    double acc = 0.0;
    for (Index i = 0; i < nodes_.size(); ++i) {
      const double v = g(nodes_[i]);
      if (!std::isfinite(v)) {
        throw std::domain_error("QuadratureRule: integrand non-finite at node " +
                                std::to_string(nodes_[i]));
      }
      acc += weights_[i] * v;
    }
    return acc;
  }

 private:
  Vector nodes_;
  Vector weights_;
};

QuadratureRule make_quadrature(const GainDistribution& dist, int node_count,
                               double tail_prob = 1e-7);

/// E[g(h)] through a fresh rule with `node_count` nodes.
template <class Fn>
double expectation(const GainDistribution& dist, Fn&& g, int node_count = 128) {
  return make_quadrature(dist, node_count).expect(std::forward<Fn>(g));
}

}  // namespace seqoff
