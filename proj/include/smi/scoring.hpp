#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smi/backend.hpp"
#include "smi/corpus.hpp"
#include "smi/errors.hpp"

namespace smi::scoring {

enum class Variant { original, paraphrased };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct TokenScore {
  std::string token;
  double logprob = 0.0;  // natural log, <= 0
  std::size_t position = 1;
  bool imputed = false;  // the fallback constant was used
};

struct SequenceScore {
  std::string sample_id;
  Variant variant = Variant::original;
  std::vector<TokenScore> token_scores;  // ordered by position, contiguous
  std::size_t split_index = 1;           // first suffix position
  double anll_whole = 0.0;
  double anll_suffix = 0.0;
};

// Membership metric identifiers: anll_suffix | min_k (with k percent) | zlib_ratio.
struct MetricId {
  enum class Kind { anll_suffix, min_k, zlib_ratio };
  Kind kind = Kind::anll_suffix;
  double k_percent = 20.0;

  static MetricId parse(const std::string& name);
  std::string str() const;
};

struct MetricValue {
  std::string sample_id;
  std::string metric;
  double value = 0.0;
};

// -(1/T) * sum(logprob); >= 0 for logprobs <= 0.
double a_nll(const std::vector<TokenScore>& token_scores);

// Mean of -logprob over positions >= split_index.
double suffix_a_nll(const std::vector<TokenScore>& token_scores, std::size_t split_index);

// Mean of -logprob over the ceil(k% * T) tokens with smallest logprob.
double min_k_score(const std::vector<TokenScore>& token_scores, double k_percent);

// (total NLL in nats over token_scores) / (zlib-compressed byte length of text).
double zlib_ratio(const std::vector<TokenScore>& token_scores, const std::string& text);

// Compressed byte length used by zlib_ratio (zlib format, level 6).
std::size_t zlib_compressed_size(const std::string& text);

// Full-vocab scoring: echoes prefix+suffix through the backend and reads
// per-token logprobs; the suffix region is located by character-offset
// alignment against the known prefix/suffix boundary.
SequenceScore score_continuation(const corpus::SplitSample& sample, Variant variant,
                                 backend::Backend& be, const backend::BackendDescriptor& desc);

// Predicted-token-only scoring (chat-style backends): walks the suffix
// left to right; a prediction matching the target keeps its true logprob,
// anything else is imputed at -fallback_nll; the target token is appended
// to the prefix regardless.
SequenceScore score_predicted_only(const corpus::SplitSample& sample, Variant variant,
                                   backend::Backend& be, const backend::BackendDescriptor& desc,
                                   double fallback_nll);

// Carries partial progress out of a transport failure mid-sequence.
class resumable_error : public backend_error {
 public:
  resumable_error(const std::string& msg, std::vector<TokenScore> completed)
      : backend_error(msg, true), completed_positions(std::move(completed)) {}
  std::vector<TokenScore> completed_positions;
};

// Dispatches to the metric operations; zlib_ratio needs the scored text.
MetricValue aggregate_membership_score(const SequenceScore& score, const MetricId& metric,
                                       const std::string* text = nullptr);

// Append-only JSONL cache of SequenceScore keyed by
// (model_id, sample_id, variant, capability). Corrupt lines are skipped
// with a warning and re-scored on demand.
class ScoreCache {
 public:
  explicit ScoreCache(std::string path);

  std::optional<SequenceScore> get(const std::string& model_id, const std::string& sample_id,
                                   Variant variant, backend::Capability capability) const;
  void put(const std::string& model_id, const SequenceScore& score,
           backend::Capability capability);

  std::size_t size() const { return entries_.size(); }
  std::size_t skipped_lines() const { return skipped_; }

 private:
  std::string path_;
  std::map<std::string, SequenceScore> entries_;
  std::size_t skipped_ = 0;
};

}  // namespace smi::scoring
