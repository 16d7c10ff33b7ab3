#include "smi/inference.hpp"

#include <algorithm>
#include <cmath>

#include "smi/errors.hpp"
#include "smi/rng.hpp"

namespace smi::inference {

ScoreSet ScoreSet::from_values(std::vector<double> values) {
  if (values.size() < 2) {
    throw domain_error("score set needs at least 2 values, got " +
                       std::to_string(values.size()));
  }
  ScoreSet s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.values = std::move(values);
  return s;
}

ScoreSet ScoreSet::from_summary(double mean, double sd, std::size_t n) {
  if (n < 2) throw domain_error("score set needs n >= 2");
  ScoreSet s;
  s.n = n;
  s.mean = mean;
  s.sd = sd;
  return s;
}

std::vector<std::size_t> PValueSeries::grid() const {
  std::vector<std::size_t> g;
  g.reserve(points.size());
  for (const auto& p : points) g.push_back(p.first);
  return g;
}

namespace {

ZTestResult from_z(double z, double switch_point) {
  ZTestResult r;
  r.z = z;
  r.log_p = stats::log_normal_cdf(z, switch_point);
  r.method = std::fabs(z) > switch_point ? TailMethod::asymptotic
                                         : TailMethod::exact_cdf;
  return r;
}

}  // namespace

ZTestResult z_test_one_tailed(const ScoreSet& original, const ScoreSet& paraphrased,
                              double switch_point) {
  if (original.n < 2 || paraphrased.n < 2) {
    throw domain_error("z test needs n >= 2 in both sets");
  }
  const double var_org = original.sd * original.sd + stats::kVarianceFloor;
  const double var_para = paraphrased.sd * paraphrased.sd + stats::kVarianceFloor;
  const double se = std::sqrt(var_org / static_cast<double>(original.n) +
                              var_para / static_cast<double>(paraphrased.n));
  return from_z((original.mean - paraphrased.mean) / se, switch_point);
}

ZTestResult z_test_paired(const std::vector<double>& original,
                          const std::vector<double>& paraphrased,
                          double switch_point) {
  if (original.size() != paraphrased.size()) {
    throw domain_error("paired z test needs lists of equal length");
  }
  const std::size_t n = original.size();
  if (n < 2) throw domain_error("paired z test needs n >= 2");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += original[i] - paraphrased[i];
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = original[i] - paraphrased[i] - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1) + stats::kVarianceFloor;
  const double se = std::sqrt(var / static_cast<double>(n));
  return from_z(mean / se, switch_point);
}

std::vector<std::size_t> seeded_order(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return rng.permutation(n);
}

PValueSeries p_value_series(const std::vector<double>& original,
                            const std::vector<double>& paraphrased, int K,
                            const std::vector<std::size_t>& order,
                            const SmiConfig& cfg) {
  const std::size_t N = original.size();
  if (paraphrased.size() != N) {
    throw domain_error("p_value_series needs paired lists of equal length");
  }
  if (K < 2) throw domain_error("p_value_series needs K >= 2");
  if (N < static_cast<std::size_t>(K)) {
    throw domain_error("p_value_series needs N >= K");
  }
  if (order.size() != N) throw domain_error("order must be a permutation of 0..N-1");

  std::vector<double> org(N), para(N);
  for (std::size_t i = 0; i < N; ++i) {
    org[i] = original[order[i]];
    para[i] = paraphrased[order[i]];
  }

  PValueSeries series;
  series.K = K;
  series.points.reserve(K);
  for (int i = 1; i <= K; ++i) {
    const auto n_i = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(N) / K));
    if (n_i < 2) throw domain_error("per-interval sample size n_1 must be >= 2");
    std::vector<double> o(org.begin(), org.begin() + n_i);
    std::vector<double> p(para.begin(), para.begin() + n_i);
    const ZTestResult t =
        cfg.paired ? z_test_paired(o, p, cfg.asymptotic_switch)
                   : z_test_one_tailed(ScoreSet::from_values(std::move(o)),
                                       ScoreSet::from_values(std::move(p)),
                                       cfg.asymptotic_switch);
    series.points.emplace_back(n_i, t.log_p);
  }
  return series;
}

PValueSeries p_value_series(const std::vector<double>& original,
                            const std::vector<double>& paraphrased, int K,
                            std::uint64_t order_seed, const SmiConfig& cfg) {
  return p_value_series(original, paraphrased, K,
                        seeded_order(original.size(), order_seed), cfg);
}

SlopeFit slope_fit(const PValueSeries& series) {
  const auto& pts = series.points;
  if (pts.size() < 2) throw domain_error("slope_fit needs at least 2 points");
  double xb = 0.0, yb = 0.0;
  for (const auto& [n, lp] : pts) {
    xb += static_cast<double>(n);
    yb += lp;
  }
  xb /= static_cast<double>(pts.size());
  yb /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [n, lp] : pts) {
    const double dx = static_cast<double>(n) - xb;
    sxy += dx * (lp - yb);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw domain_error("slope_fit needs at least two distinct n values");
  SlopeFit fit;
  fit.beta = sxy / sxx;
  fit.intercept = yb - fit.beta * xb;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [n, lp] : pts) {
    const double pred = fit.intercept + fit.beta * static_cast<double>(n);
    ss_res += (lp - pred) * (lp - pred);
    ss_tot += (lp - yb) * (lp - yb);
  }
  // A constant series is an exact fit of a flat line.
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

Verdict smi_decide(const PValueSeries& candidate_series, const PValueSeries& aux_series,
                   const SmiConfig& cfg) {
  if (candidate_series.K != aux_series.K ||
      candidate_series.grid() != aux_series.grid()) {
    throw domain_error("candidate and auxiliary series use different n_i grids");
  }
  Verdict v;
  v.set_name = candidate_series.set_name;
  v.config = cfg;
  v.beta = slope_fit(candidate_series).beta;
  v.beta_aux = slope_fit(aux_series).beta;
  v.log_p_K = candidate_series.points.back().second;
  v.log_p_K_aux = aux_series.points.back().second;
  v.slope_met = v.beta < v.beta_aux - cfg.epsilon_1;
  v.pvalue_met = v.log_p_K < v.log_p_K_aux - cfg.epsilon_2;
  v.decision = (v.slope_met && v.pvalue_met) ? Decision::member : Decision::non_member;
  return v;
}

LinearityCheck linearity_check(const PValueSeries& series) {
  if (series.points.size() < 3) throw domain_error("linearity_check needs K >= 3");
  const SlopeFit fit = slope_fit(series);
  return LinearityCheck{fit.beta, fit.r_squared};
}

}  // namespace smi::inference
