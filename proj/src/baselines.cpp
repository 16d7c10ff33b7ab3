#include "smi/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "smi/errors.hpp"

namespace smi::baselines {

double percentile_threshold(std::vector<double> aux_scores, double percentile) {
  if (aux_scores.empty()) throw domain_error("percentile_threshold needs a nonempty list");
  if (!(percentile > 0.0 && percentile < 100.0)) {
    throw domain_error("percentile must lie in (0, 100)");
  }
  std::sort(aux_scores.begin(), aux_scores.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(percentile * static_cast<double>(aux_scores.size()) / 100.0 - 1e-9));
  const std::size_t index = std::clamp<std::size_t>(rank, 1, aux_scores.size());
  return aux_scores[index - 1];
}

SampleVerdicts sample_level_classify(const std::vector<scoring::MetricValue>& scores,
                                     double threshold) {
  SampleVerdicts verdicts;
  verdicts.total = scores.size();
  for (const scoring::MetricValue& s : scores) {
    const bool member = s.value < threshold;
    verdicts.member_by_id[s.sample_id] = member;
    if (member) ++verdicts.positives;
  }
  return verdicts;
}

inference::Decision dataset_level_vote(const SampleVerdicts& verdicts) {
  if (verdicts.total == 0) throw domain_error("dataset_level_vote needs at least one sample");
  return 2 * verdicts.positives > verdicts.total ? inference::Decision::member
                                                 : inference::Decision::non_member;
}

DdiResult ddi_decide(const std::vector<double>& candidate_scores,
                     const std::vector<double>& aux_scores, double alpha, double switch_point) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
  const auto candidate = inference::ScoreSet::from_values(candidate_scores);
  const auto aux = inference::ScoreSet::from_values(aux_scores);
  const inference::ZTestResult one_tailed = z_test_one_tailed(candidate, aux, switch_point);
  DdiResult result;
  result.z = one_tailed.z;
  // Two-sided p = 2 * (1 - Phi(|z|)), formed in log space.
  result.log_p = std::log(2.0) + stats::log_normal_tail(std::fabs(one_tailed.z), switch_point);
  result.decision = result.log_p < std::log(alpha) ? inference::Decision::member
                                                   : inference::Decision::non_member;
  return result;
}

}  // namespace smi::baselines
