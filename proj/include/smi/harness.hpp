#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smi/corpus.hpp"
#include "smi/inference.hpp"

namespace smi::harness {

// Gaussian A-NLL generator with an additive paraphrase shift: member data
// shifts by member_shift after paraphrasing, non-member/aux data by
// non_member_shift. This is the minimal model of the phenomenon the
// detector keys on, with every parameter exposed.
struct SyntheticSpec {
  std::size_t n_member = 100;
  std::size_t n_non_member = 100;
  std::size_t n_aux = 100;
  std::size_t set_size = 500;            // N
  double base_mean = 3.0;                // mu0
  double base_sd = 1.0;                  // sigma0
  double member_shift = 0.3;             // delta_m
  double non_member_shift = 0.0;         // delta_n
  double shift_sd = 0.25;
  // Distribution shift of candidate sets' base mean relative to aux sets
  // (models a candidate that is non-member but differently distributed).
  double candidate_mean_offset = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticSet {
  std::string name;
  corpus::SetRole role = corpus::SetRole::candidate;
  bool is_member = false;                   // ground truth label
  std::size_t member_sample_count = 0;      // mixing bookkeeping
  std::vector<double> original;             // per-sample suffix A-NLL
  std::vector<double> paraphrased;
};

// 100/100/100 member/non-member/aux sets by default, deterministic in seed.
std::vector<SyntheticSet> generate_synthetic(const SyntheticSpec& spec);

struct MixSpec {
  double member_fraction = 0.0;  // r in [0, 1]
  std::size_t set_size = 500;
};

// round(r * set_size) member samples plus non-member fill, shuffled under
// seed; the exact composition is recorded on the returned set.
SyntheticSet mix_partial_membership(const SyntheticSet& member_pool,
                                    const SyntheticSet& non_member_pool, const MixSpec& spec,
                                    std::uint64_t seed);

struct MethodConfig {
  inference::SmiConfig smi;
  double percentile = 45.0;  // aux percentile for sample-level thresholds
  double ddi_alpha = 0.01;
  std::uint64_t seed = 0;    // base seed for series sample ordering
};

struct SetVerdict {
  std::string set_name;
  bool is_member = false;
  bool predicted_member = false;
  double beta = 0.0;
  double beta_aux = 0.0;
  double log_p = 0.0;
  double log_p_aux = 0.0;
};

struct EvalResult {
  std::string method;
  double f1 = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  std::vector<SetVerdict> per_set;
};

EvalResult make_eval_result(const std::string& method, std::vector<SetVerdict> per_set);

// Runs each method over every candidate set against its designated aux set
// (round-robin by index). Methods: "smi", "anll_dataset", "ddi".
// Positive class is member throughout.
std::vector<EvalResult> evaluate_methods(const std::vector<SyntheticSet>& sets,
                                         const std::vector<std::string>& methods,
                                         const MethodConfig& cfg);

// Re-runs evaluation with every set truncated to its first n samples.
std::vector<std::pair<std::size_t, EvalResult>> ablate_sample_size(
    const std::vector<SyntheticSet>& sets, const std::vector<std::size_t>& n_grid,
    const std::vector<std::string>& methods, const MethodConfig& cfg);

// Re-decides SMI verdicts from cached series per (epsilon_1, epsilon_2)
// pair; no re-scoring.
std::vector<std::pair<std::pair<double, double>, EvalResult>> ablate_margins(
    const std::vector<SyntheticSet>& sets, const std::vector<std::pair<double, double>>& grid,
    const MethodConfig& cfg);

// Plot data files with a stable column schema:
//   series.csv     n,log_p,set_name
//   histogram.csv  bin_lo,bin_hi,count_original,count_paraphrased
//   results.csv    method,axis,axis_value,f1,recall,precision
void emit_series_csv(const std::string& path, const std::vector<inference::PValueSeries>& series);
void emit_histogram_csv(const std::string& path, const std::vector<SyntheticSet>& sets,
                        double bin_width = 0.25);
void emit_results_csv(const std::string& path,
                      const std::vector<std::tuple<std::string, double, EvalResult>>& rows);

// Synthetic set JSONL (one set per line) used by `smi synth` / `smi evaluate`.
void write_synthetic_jsonl(const std::string& path, const std::vector<SyntheticSet>& sets);
std::vector<SyntheticSet> read_synthetic_jsonl(const std::string& path);

// Deterministic shortest round-trip formatting shared by report writers.
std::string format_double(double v);

}  // namespace smi::harness
