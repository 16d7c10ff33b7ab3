#pragma once

#include <map>
#include <string>
#include <vector>

#include "smi/inference.hpp"
#include "smi/scoring.hpp"

namespace smi::baselines {

// Sample-level threshold calibrated on the auxiliary set: scores below the
// percentile are called member.
struct ThresholdRule {
  scoring::MetricId metric;
  double percentile = 45.0;
};

struct SampleVerdicts {
  std::map<std::string, bool> member_by_id;
  std::size_t positives = 0;
  std::size_t total = 0;

  double positive_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(positives) / static_cast<double>(total);
  }
};

// Nearest-rank percentile: the value at 1-based index ceil(p/100 * n) of
// the ascending sort.
double percentile_threshold(std::vector<double> aux_scores, double percentile);

// member <=> value < threshold (strict).
SampleVerdicts sample_level_classify(const std::vector<scoring::MetricValue>& scores,
                                     double threshold);

// member <=> strictly more than half the samples are predicted member.
inference::Decision dataset_level_vote(const SampleVerdicts& verdicts);

struct DdiResult {
  inference::Decision decision = inference::Decision::non_member;
  double z = 0.0;
  double log_p = 0.0;  // natural log of the two-sided p-value
};

// Two-sample two-sided z test between candidate and auxiliary membership
// scores; member <=> p < alpha.
DdiResult ddi_decide(const std::vector<double>& candidate_scores,
                     const std::vector<double>& aux_scores, double alpha = 0.01,
                     double switch_point = stats::kDefaultAsymptoticSwitch);

}  // namespace smi::baselines
