#include "seqoff/channel.hpp"

#include <cmath>

namespace seqoff {

GainDistribution GainDistribution::exponential(double mean) {
  detail::require_positive(mean, "exponential mean");
  GainDistribution d;
  d.kind_ = DistKind::exponential;
  d.mean_ = mean;
  return d;
}

GainDistribution GainDistribution::discrete(Vector gains, Vector probs) {
  if (gains.size() < 1 || gains.size() != probs.size()) {
    throw std::invalid_argument("discrete distribution: need matching nonempty arrays");
  }
  for (Index i = 0; i < gains.size(); ++i) {
    detail::require_positive(gains[i], "discrete gain");
    detail::require_nonneg(probs[i], "discrete probability");
    if (i > 0 && gains[i] <= gains[i - 1]) {
      throw std::invalid_argument("discrete gains must be strictly increasing");
    }
  }
  if (std::abs(probs.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("discrete probabilities must sum to 1");
  }
  GainDistribution d;
  d.kind_ = DistKind::discrete;
  d.gains_ = std::move(gains);
  d.probs_ = std::move(probs);
  d.mean_ = d.gains_.dot(d.probs_);
  return d;
}

double GainDistribution::mean() const { return mean_; }

double GainDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("quantile: u must lie in (0,1), got " + std::to_string(u));
  }
  if (kind_ == DistKind::exponential) {
    return -mean_ * std::log1p(-u);
  }
  double cdf = 0.0;
  for (Index i = 0; i < gains_.size(); ++i) {
    cdf += probs_[i];
    if (u <= cdf) return gains_[i];
  }
  return gains_[gains_.size() - 1];  // u above accumulated mass by rounding
}

const Vector& GainDistribution::gains() const {
  if (kind_ != DistKind::discrete) throw std::logic_error("gains(): not a discrete distribution");
  return gains_;
}

const Vector& GainDistribution::probs() const {
  if (kind_ != DistKind::discrete) throw std::logic_error("probs(): not a discrete distribution");
  return probs_;
}

Gain sample(const GainDistribution& dist, RandomStream& stream) {
  return Gain(dist.quantile(stream.next_uniform()));
}

QuadratureRule::QuadratureRule(Vector nodes, Vector weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.size() < 1 || nodes_.size() != weights_.size()) {
    throw std::invalid_argument("QuadratureRule: need matching nonempty arrays");
  }
  for (Index i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i] <= nodes_[i - 1]) {
      throw std::invalid_argument("QuadratureRule: nodes must be strictly increasing");
    }
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("QuadratureRule: weights must sum to 1");
  }
}

QuadratureRule make_quadrature(const GainDistribution& dist, int node_count, double tail_prob) {
  if (dist.kind() == DistKind::discrete) {
    return QuadratureRule(dist.gains(), dist.probs());
  }
  if (node_count < 1) throw std::invalid_argument("make_quadrature: node_count must be >= 1");
  const double span = 1.0 - tail_prob;
  Vector nodes(node_count), weights(node_count);
  for (int k = 0; k < node_count; ++k) {
    const double u = span * (k + 0.5) / node_count;
    nodes[k] = dist.quantile(u);
    weights[k] = 1.0 / node_count;
  }
  return QuadratureRule(std::move(nodes), std::move(weights));
}

}  // namespace seqoff
