#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smi/text.hpp"

namespace smi::corpus {

enum class DatasetMode { text, vqa };

struct ChatRound {
  std::string question;
  std::string response;
};

struct RawRecord {
  std::string id;
  std::string text;                  // text mode
  std::string image_ref;             // vqa mode, opaque
  std::string question;              // vqa mode, first round after extraction
  std::string response;              // vqa mode, first round after extraction
  std::vector<ChatRound> rounds;     // vqa mode, as ingested
  std::string source;
};

// A prepared sample: verbatim prefix, original suffix, and (after the
// paraphrase stage) a paraphrased suffix. Token counts refer to the
// preparation tokenizer; split_index is the 1-based token index where the
// suffix begins, so prefix_token_count == split_index - 1.
struct SplitSample {
  std::string id;
  std::string prefix_text;
  std::string suffix_text;
  std::size_t split_index = 1;
  std::size_t prefix_token_count = 0;
  std::size_t suffix_token_count = 0;
  std::optional<std::string> paraphrased_suffix;
  std::string image_ref;   // opaque passthrough
  std::string question;    // vqa conditioning context
};

enum class SetRole { candidate, auxiliary, validation };

struct CandidateSet {
  std::string name;
  SetRole role = SetRole::candidate;
  std::vector<SplitSample> samples;

  std::size_t size() const { return samples.size(); }
};

struct SubsetPlan {
  std::uint64_t seed = 0;
  std::size_t subset_size = 500;
  std::map<SetRole, std::size_t> counts = {
      {SetRole::candidate, 100}, {SetRole::auxiliary, 100}, {SetRole::validation, 100}};
};

struct PrepareOptions {
  DatasetMode mode = DatasetMode::text;
  std::size_t budget = 150;             // truncation budget in tokens
  std::size_t min_suffix_tokens = 10;   // shorter suffixes are discarded
};

struct Discard {
  std::string id;
  std::string reason;
};

// Reads one JSON object per line. Text mode requires {"id","text"}; vqa
// mode requires {"id","image_ref","rounds":[{"question","response"},...]}.
// Malformed lines raise parse_error naming the line, missing fields raise
// schema_error, duplicate ids raise integrity_error.
std::vector<RawRecord> ingest_jsonl(const std::string& path, DatasetMode mode);

// Keeps the maximal prefix of whole sentences whose cumulative token count
// fits the budget; a partial final sentence is removed entirely. Returns
// nullopt (a discard signal) when not even the first sentence fits.
std::optional<std::string> truncate_text_to_budget(const std::string& text,
                                                   std::size_t budget,
                                                   const text::WordTokenizer& tok);

// Record-level wrapper: truncates the text (text mode) or the first-round
// response (vqa mode).
std::optional<std::string> truncate_to_budget(const RawRecord& record, std::size_t budget,
                                              DatasetMode mode,
                                              const text::WordTokenizer& tok);

struct HalfSplit {
  std::string prefix_text;
  std::string suffix_text;
  std::size_t split_index = 1;
  std::size_t prefix_token_count = 0;
  std::size_t suffix_token_count = 0;
};

// Splits at the sentence boundary whose prefix token count is closest to
// half the total (ties prefer the smaller prefix). Returns a discard
// signal via `reason` when the text has too few sentences or tokens or the
// chosen suffix would be shorter than min_suffix_tokens.
std::optional<HalfSplit> split_half(const std::string& text, const text::WordTokenizer& tok,
                                    std::size_t min_suffix_tokens, std::string* reason = nullptr);

// Keeps only the first question/response round; throws schema_error when
// the record has no rounds.
RawRecord extract_first_round(const RawRecord& record);

// Full preparation of one record; returns the prepared sample or a discard.
struct PrepareOutcome {
  std::optional<SplitSample> sample;
  std::optional<Discard> discard;
};
PrepareOutcome prepare_record(const RawRecord& record, const PrepareOptions& opts,
                              const text::WordTokenizer& tok);

// Draws counts[source.role] subsets of subset_size samples each, without
// replacement inside a subset, deterministically from plan.seed.
std::vector<CandidateSet> sample_subsets(const CandidateSet& source, const SubsetPlan& plan);

// Prepared-split JSONL (the schema produced by `smi prepare` and consumed
// by the paraphrase/score stages).
void write_prepared_jsonl(const std::string& path, const std::vector<SplitSample>& samples);
std::vector<SplitSample> read_prepared_jsonl(const std::string& path);
void write_discards_jsonl(const std::string& path, const std::vector<Discard>& discards);

}  // namespace smi::corpus
