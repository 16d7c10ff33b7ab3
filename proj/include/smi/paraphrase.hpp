#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smi/backend.hpp"
#include "smi/corpus.hpp"

namespace smi::paraphrase {

struct ParaphraseConfig {
  std::string backend_endpoint;
  std::string model_id;
  double temperature = 0.7;
  int max_attempts = 3;
  std::pair<double, double> length_ratio_bounds = {0.5, 2.0};
  // Versioned in config so audits are reproducible.
  std::string prompt_template =
      "Paraphrase the following text, preserving its meaning. "
      "Output only the paraphrase. Text: ";
};

struct ParaphraseResult {
  std::string sample_id;
  std::string original_suffix;
  std::string paraphrased_suffix;
  int attempts_used = 0;
  bool valid = false;
  std::optional<std::string> rejection_reason;
};

// True iff candidate is nonempty, differs from the original after
// whitespace normalization, and len(candidate)/len(original) lies within
// bounds. The reason for a false verdict lands in `reason`.
bool validate_paraphrase(const std::string& original, const std::string& candidate,
                         std::pair<double, double> bounds, std::string* reason = nullptr);

// Deterministic prompt: template + suffix.
std::string build_paraphrase_prompt(const std::string& suffix, const ParaphraseConfig& cfg);

// Asks the backend to rewrite the sample's suffix, validating and retrying
// up to cfg.max_attempts. Never touches the prefix. An all-attempts-invalid
// outcome is reported through valid=false, not an exception.
ParaphraseResult paraphrase_suffix(const corpus::SplitSample& sample, const ParaphraseConfig& cfg,
                                   backend::Backend& be);

// Idempotence cache keyed by (sample_id, model_id, template hash).
class ParaphraseCache {
 public:
  explicit ParaphraseCache(std::string path);

  std::optional<ParaphraseResult> get(const std::string& sample_id, const std::string& model_id,
                                      const std::string& prompt_template) const;
  void put(const std::string& model_id, const std::string& prompt_template,
           const ParaphraseResult& result);

  std::size_t size() const { return entries_.size(); }

 private:
  std::string path_;
  std::map<std::string, ParaphraseResult> entries_;
};

}  // namespace smi::paraphrase
