#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle_normal.hpp"
#include "smi/baselines.hpp"
#include "smi/errors.hpp"
#include "smi/harness.hpp"
#include "smi/rng.hpp"

using namespace smi;
using namespace smi::baselines;

namespace {

// List with exact mean mu and exact sample sd — see test_stats for the trick.
std::vector<double> exact_set(double mu, double sd, std::size_t n) {
  const double step = sd * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i) values.push_back(i % 2 == 0 ? mu + step : mu - step);
  return values;
}

std::vector<scoring::MetricValue> as_metrics(const std::vector<double>& values) {
  std::vector<scoring::MetricValue> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back(scoring::MetricValue{"id" + std::to_string(i), "anll_suffix", values[i]});
  }
  return out;
}

}  // namespace

TEST_CASE("percentile_threshold: nearest rank") {
  std::vector<double> grid;
  for (int i = 1; i <= 100; ++i) grid.push_back(i);
  CHECK(percentile_threshold(grid, 45) == 45.0);
  CHECK(percentile_threshold({7.0}, 45) == 7.0);
  CHECK(percentile_threshold({7.0}, 99) == 7.0);
  CHECK(percentile_threshold({3.0, 1.0, 2.0}, 50) == 2.0);
  CHECK_THROWS_AS(percentile_threshold({}, 45), domain_error);
  CHECK_THROWS_AS(percentile_threshold({1.0}, 0), domain_error);
}

TEST_CASE("percentile_threshold: permutation invariance") {
  Rng rng(4);
  std::vector<double> values;
  for (int i = 0; i < 37; ++i) values.push_back(rng.normal(0, 1));
  const double want = percentile_threshold(values, 45);
  for (int trial = 0; trial < 20; ++trial) {
    rng.shuffle(values);
    CHECK(percentile_threshold(values, 45) == want);
  }
}

TEST_CASE("sample_level_classify: strict inequality") {
  const auto verdicts = sample_level_classify(as_metrics({1.0, 2.0, 3.0}), 2.0);
  CHECK(verdicts.positives == 1);
  CHECK(verdicts.positive_fraction() == doctest::Approx(1.0 / 3.0));
  CHECK(verdicts.member_by_id.at("id0"));
  CHECK_FALSE(verdicts.member_by_id.at("id1"));  // equal is not below

  CHECK(sample_level_classify(as_metrics({5.0, 6.0}), 1.0).positives == 0);
  // Saturated threshold: everything member.
  CHECK(sample_level_classify(as_metrics({5.0, 6.0}), 7.0).positives == 2);
}

TEST_CASE("dataset_level_vote: strict majority") {
  SampleVerdicts v;
  v.total = 500;
  v.positives = 251;
  CHECK(dataset_level_vote(v) == inference::Decision::member);
  v.positives = 250;
  CHECK(dataset_level_vote(v) == inference::Decision::non_member);
  v.positives = 0;
  CHECK(dataset_level_vote(v) == inference::Decision::non_member);
  v.total = 0;
  CHECK_THROWS_AS(dataset_level_vote(v), domain_error);
}

TEST_CASE("vote is monotone in the threshold") {
  Rng rng(6);
  std::vector<double> values;
  for (int i = 0; i < 101; ++i) values.push_back(rng.normal(2.0, 1.0));
  bool was_member = false;
  for (double threshold = -1.0; threshold < 6.0; threshold += 0.25) {
    const bool member =
        dataset_level_vote(sample_level_classify(as_metrics(values), threshold)) ==
        inference::Decision::member;
    if (was_member) CHECK(member);  // raising the threshold never flips member -> non
    was_member = member;
  }
}

TEST_CASE("ddi_decide: identical distributions are a clean null") {
  const auto values = exact_set(2.0, 1.0, 100);
  const auto result = ddi_decide(values, values, 0.01);
  CHECK(result.z == 0.0);
  CHECK(result.log_p == doctest::Approx(0.0).epsilon(1e-15));  // two-sided p = 1
  CHECK(result.decision == inference::Decision::non_member);
}

TEST_CASE("ddi_decide: 0.5-sigma gap at n=500 fires the false positive") {
  const auto candidate = exact_set(2.0, 1.0, 500);
  const auto aux = exact_set(2.5, 1.0, 500);
  const auto result = ddi_decide(candidate, aux, 0.01);
  CHECK(std::fabs(result.z) == doctest::Approx(7.905694150420949).epsilon(1e-12));
  // Two-sided p ~ 2.66e-15 (frozen from the oracle), far below alpha.
  const double want =
      std::log(2.0) + static_cast<double>(smi_test::oracle_log_normal_tail(7.905694150420949L));
  CHECK(result.log_p == doctest::Approx(want).epsilon(1e-6));
  CHECK(result.decision == inference::Decision::member);
}

TEST_CASE("ddi_decide: the same gap at n=10 is not significant") {
  const auto candidate = exact_set(2.0, 1.0, 10);
  const auto aux = exact_set(2.5, 1.0, 10);
  const auto result = ddi_decide(candidate, aux, 0.01);
  CHECK(std::fabs(result.z) == doctest::Approx(1.118033988749895).epsilon(1e-12));
  CHECK(std::exp(result.log_p) == doctest::Approx(0.26355247728297276).epsilon(1e-9));
  CHECK(result.decision == inference::Decision::non_member);
}

TEST_CASE("ddi log_p decreases linearly in n on a fixed mean gap") {
  inference::PValueSeries series;
  series.K = 0;
  for (std::size_t n = 100; n <= 1000; n += 100) {
    const auto result = ddi_decide(exact_set(2.0, 1.0, n), exact_set(2.5, 1.0, n), 0.01);
    series.points.emplace_back(n, result.log_p);
    ++series.K;
  }
  const auto fit = inference::slope_fit(series);
  CHECK(fit.beta < 0.0);
  CHECK(fit.r_squared >= 0.9);
}

TEST_CASE("threshold trichotomy: the three dataset-level outcome regions") {
  // Member samples ~ N(2, 1), non-member ~ N(3, 1): medians 2 and 3.
  Rng rng(8);
  const auto make_sets = [&](double mean) {
    std::vector<std::vector<double>> sets;
    for (int s = 0; s < 20; ++s) {
      std::vector<double> values;
      for (int i = 0; i < 400; ++i) values.push_back(rng.normal(mean, 1.0));
      sets.push_back(std::move(values));
    }
    return sets;
  };
  const auto member_sets = make_sets(2.0);
  const auto non_member_sets = make_sets(3.0);

  const auto run = [&](double threshold) {
    std::vector<harness::SetVerdict> verdicts;
    for (const auto& [sets, is_member] :
         {std::pair{&member_sets, true}, std::pair{&non_member_sets, false}}) {
      for (const auto& values : *sets) {
        const auto v = sample_level_classify(as_metrics(values), threshold);
        verdicts.push_back(harness::SetVerdict{
            "", is_member, dataset_level_vote(v) == inference::Decision::member, 0, 0, 0, 0});
      }
    }
    return harness::make_eval_result("anll_dataset", verdicts);
  };

  // Left region (below both medians): nothing is member -> 0.000 (0.000/0.000).
  const auto left = run(1.3);
  CHECK(left.f1 == 0.0);
  CHECK(left.recall == 0.0);
  CHECK(left.precision == 0.0);
  // Middle region: perfect classification.
  const auto middle = run(2.5);
  CHECK(middle.f1 == doctest::Approx(1.0));
  // Right region: everything member -> 0.667 (1.000/0.500).
  const auto right = run(3.7);
  CHECK(right.recall == doctest::Approx(1.0));
  CHECK(right.precision == doctest::Approx(0.5));
  CHECK(right.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}
