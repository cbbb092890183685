#include "seqoff/json_support.hpp"

namespace seqoff {

namespace {

Vector vector_from_json(const nlohmann::json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

std::vector<double> to_std(const Vector& v) { return {v.begin(), v.end()}; }

}  // namespace

nlohmann::json dist_to_json(const GainDistribution& dist) {
  if (dist.kind() == DistKind::exponential) {
    return {{"kind", "exponential"}, {"mean", dist.mean()}};
  }
  return {{"kind", "discrete"}, {"gains", to_std(dist.gains())}, {"probs", to_std(dist.probs())}};
}

GainDistribution dist_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "exponential") {
    return GainDistribution::exponential(j.at("mean").get<double>());
  }
  if (kind == "discrete") {
    return GainDistribution::discrete(vector_from_json(j.at("gains")),
                                      vector_from_json(j.at("probs")));
  }
  throw std::invalid_argument("channel.kind must be \"exponential\" or \"discrete\", got \"" +
                              kind + "\"");
}

nlohmann::json task_to_json(const TaskProfile& profile) {
  return {{"cycles", to_std(profile.cycles())}, {"input_nats", to_std(profile.input_nats())}};
}

TaskProfile task_from_json(const nlohmann::json& j) {
  return TaskProfile(vector_from_json(j.at("cycles")), vector_from_json(j.at("input_nats")));
}

nlohmann::json system_to_json(const SystemParams& p) {
  return {{"bandwidth_hz", p.bandwidth_hz}, {"k0", p.k0},
          {"f_max_hz", p.f_max_hz},         {"f_l_hz", p.f_l_hz},
          {"f_e_hz", p.f_e_hz},             {"deadline_s", p.deadline_s},
          {"coherence_s", p.coherence_s}};
}

SystemParams system_from_json(const nlohmann::json& j) {
  SystemParams p;
  p.bandwidth_hz = j.at("bandwidth_hz").get<double>();
  p.k0 = j.at("k0").get<double>();
  p.f_max_hz = j.at("f_max_hz").get<double>();
  p.f_l_hz = j.at("f_l_hz").get<double>();
  p.f_e_hz = j.at("f_e_hz").get<double>();
  p.deadline_s = j.at("deadline_s").get<double>();
  p.coherence_s = j.at("coherence_s").get<double>();
  p.validate();
  return p;
}

}  // namespace seqoff
