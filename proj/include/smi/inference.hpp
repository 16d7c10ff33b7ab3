#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smi/stats.hpp"

namespace smi::inference {

// Summary of one set of per-sample scores (suffix A-NLL in the main flow).
// sd is the sample standard deviation (n-1 denominator).
struct ScoreSet {
  std::vector<double> values;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;

  static ScoreSet from_values(std::vector<double> values);
  // Summary-only construction, used when raw values are not needed
  // (the paired statistic requires raw values).
  static ScoreSet from_summary(double mean, double sd, std::size_t n);
};

enum class TailMethod { exact_cdf, asymptotic };

struct ZTestResult {
  double z = 0.0;
  double log_p = 0.0;  // natural log of the one-tailed p-value, <= 0
  TailMethod method = TailMethod::exact_cdf;
};

struct PValueSeries {
  int K = 0;
  // (n_i, log p_i) with n_i = round(i*N/K), strictly increasing, n_K = N.
  std::vector<std::pair<std::size_t, double>> points;
  std::string set_name;

  std::vector<std::size_t> grid() const;
};

struct SlopeFit {
  double beta = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct SmiConfig {
  int K = 10;
  double epsilon_1 = 0.01;
  double epsilon_2 = 10.0;
  double asymptotic_switch = stats::kDefaultAsymptoticSwitch;
  bool paired = false;
};

enum class Decision { member, non_member };

struct Verdict {
  std::string set_name;
  Decision decision = Decision::non_member;
  double beta = 0.0;
  double beta_aux = 0.0;
  double log_p_K = 0.0;
  double log_p_K_aux = 0.0;
  bool slope_met = false;
  bool pvalue_met = false;
  SmiConfig config;
};

struct LinearityCheck {
  double fitted_slope = 0.0;
  double r_squared = 0.0;
};

// One-tailed two-sample z test of H1: mu_org < mu_para, p = Phi(z) with
//   z = (mu_org - mu_para) / sqrt(sd_org^2/n_org + sd_para^2/n_para).
// log_p is computed in log space; |z| beyond `switch_point` takes the
// asymptotic tail branch.
ZTestResult z_test_one_tailed(const ScoreSet& original, const ScoreSet& paraphrased,
                              double switch_point = stats::kDefaultAsymptoticSwitch);

// Same hypothesis on per-sample differences d_i = org_i - para_i:
//   z = mean(d) / (sd(d)/sqrt(n)).
// Requires the two lists to be paired by sample.
ZTestResult z_test_paired(const std::vector<double>& original,
                          const std::vector<double>& paraphrased,
                          double switch_point = stats::kDefaultAsymptoticSwitch);

// Series of K log p-values over nested prefixes n_i = round(i*N/K) of a
// fixed sample order. The order is an explicit permutation of 0..N-1;
// callers normally obtain one from seeded_order().
PValueSeries p_value_series(const std::vector<double>& original,
                            const std::vector<double>& paraphrased, int K,
                            const std::vector<std::size_t>& order,
                            const SmiConfig& cfg = {});

// Convenience overload: seeded shuffle applied once, then as above.
PValueSeries p_value_series(const std::vector<double>& original,
                            const std::vector<double>& paraphrased, int K,
                            std::uint64_t order_seed, const SmiConfig& cfg = {});

std::vector<std::size_t> seeded_order(std::size_t n, std::uint64_t seed);

// Least-squares fit of log p against n.
SlopeFit slope_fit(const PValueSeries& series);

// Membership decision:
//   slope_met  <=>  beta < beta' - epsilon_1
//   pvalue_met <=>  log p_K < log p'_K - epsilon_2
//   member     <=>  both hold.
Verdict smi_decide(const PValueSeries& candidate_series, const PValueSeries& aux_series,
                   const SmiConfig& cfg);

// Fit of log p on n reported as a linearity diagnostic (K >= 3).
LinearityCheck linearity_check(const PValueSeries& series);

}  // namespace smi::inference
