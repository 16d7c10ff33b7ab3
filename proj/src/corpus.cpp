#include "smi/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "smi/errors.hpp"
#include "smi/jsonl.hpp"
#include "smi/rng.hpp"

namespace smi::corpus {

using nlohmann::json;

namespace {

std::string require_string(const json& obj, const char* key, std::size_t line_no,
                           const std::string& path) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw schema_error(path + ":" + std::to_string(line_no) + ": missing string field \"" +
                       key + "\"");
  }
  return obj[key].get<std::string>();
}

const char* role_tag(SetRole role) {
  switch (role) {
    case SetRole::candidate: return "candidate";
    case SetRole::auxiliary: return "auxiliary";
    case SetRole::validation: return "validation";
  }
  return "?";
}

}  // namespace

std::vector<RawRecord> ingest_jsonl(const std::string& path, DatasetMode mode) {
  std::vector<RawRecord> records;
  std::set<std::string> seen;
  jsonl::for_each_line(path, [&](const json& obj, std::size_t line_no) {
    RawRecord rec;
    rec.source = path;
    rec.id = require_string(obj, "id", line_no, path);
    if (rec.id.empty()) {
      throw schema_error(path + ":" + std::to_string(line_no) + ": empty id");
    }
    if (!seen.insert(rec.id).second) {
      throw integrity_error(path + ":" + std::to_string(line_no) + ": duplicate id \"" +
                            rec.id + "\"");
    }
    if (mode == DatasetMode::text) {
      rec.text = require_string(obj, "text", line_no, path);
    } else {
      rec.image_ref = require_string(obj, "image_ref", line_no, path);
      if (!obj.contains("rounds") || !obj["rounds"].is_array()) {
        throw schema_error(path + ":" + std::to_string(line_no) +
                           ": missing array field \"rounds\"");
      }
      for (const auto& round : obj["rounds"]) {
        ChatRound r;
        r.question = require_string(round, "question", line_no, path);
        r.response = require_string(round, "response", line_no, path);
        rec.rounds.push_back(std::move(r));
      }
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::optional<std::string> truncate_text_to_budget(const std::string& text,
                                                   std::size_t budget,
                                                   const text::WordTokenizer& tok) {
  if (budget < 1) throw domain_error("truncation budget must be >= 1");
  if (text.empty()) return std::nullopt;
  std::string kept;
  std::size_t used = 0;
  for (const std::string& sentence : text::segment_sentences(text)) {
    const std::size_t n = tok.count(sentence);
    if (used + n > budget) break;
    kept += sentence;
    used += n;
  }
  while (!kept.empty() && std::isspace(static_cast<unsigned char>(kept.back()))) kept.pop_back();
  if (kept.empty()) return std::nullopt;
  return kept;
}

std::optional<std::string> truncate_to_budget(const RawRecord& record, std::size_t budget,
                                              DatasetMode mode,
                                              const text::WordTokenizer& tok) {
  return truncate_text_to_budget(mode == DatasetMode::text ? record.text : record.response,
                                 budget, tok);
}

std::optional<HalfSplit> split_half(const std::string& text, const text::WordTokenizer& tok,
                                    std::size_t min_suffix_tokens, std::string* reason) {
  const auto fail = [&](const char* why) -> std::optional<HalfSplit> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  const std::vector<std::string> sentences = text::segment_sentences(text);
  if (sentences.size() < 2) return fail("fewer than 2 sentences");

  std::vector<std::size_t> counts(sentences.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    counts[i] = tok.count(sentences[i]);
    total += counts[i];
  }
  if (total < 2 * min_suffix_tokens) return fail("fewer than 2x minimum suffix tokens");

  // Boundary after sentence j yields a prefix of cum(j) tokens; pick the
  // boundary closest to total/2, breaking ties toward the smaller prefix.
  const double half = static_cast<double>(total) / 2.0;
  std::size_t best_j = 0;
  double best_dist = 0.0;
  std::size_t cum = 0;
  for (std::size_t j = 0; j + 1 < sentences.size(); ++j) {
    cum += counts[j];
    const double dist = std::fabs(static_cast<double>(cum) - half);
    if (j == 0 || dist < best_dist) {
      best_j = j;
      best_dist = dist;
    }
  }

  HalfSplit split;
  std::size_t prefix_tokens = 0;
  for (std::size_t j = 0; j <= best_j; ++j) {
    split.prefix_text += sentences[j];
    prefix_tokens += counts[j];
  }
  for (std::size_t j = best_j + 1; j < sentences.size(); ++j) {
    split.suffix_text += sentences[j];
  }
  split.prefix_token_count = prefix_tokens;
  split.suffix_token_count = total - prefix_tokens;
  split.split_index = prefix_tokens + 1;
  if (split.suffix_token_count < min_suffix_tokens) return fail("suffix below minimum length");
  return split;
}

RawRecord extract_first_round(const RawRecord& record) {
  if (record.rounds.empty()) {
    throw schema_error("record \"" + record.id + "\" has no chat rounds");
  }
  RawRecord out = record;
  out.question = record.rounds.front().question;
  out.response = record.rounds.front().response;
  out.rounds = {record.rounds.front()};
  return out;
}

PrepareOutcome prepare_record(const RawRecord& record, const PrepareOptions& opts,
                              const text::WordTokenizer& tok) {
  const auto discard = [&](const std::string& why) {
    PrepareOutcome out;
    out.discard = Discard{record.id, why};
    return out;
  };

  if (opts.mode == DatasetMode::text) {
    const auto truncated = truncate_text_to_budget(record.text, opts.budget, tok);
    if (!truncated) return discard("no complete sentence fits the token budget");
    std::string reason;
    const auto split = split_half(*truncated, tok, opts.min_suffix_tokens, &reason);
    if (!split) return discard(reason);
    SplitSample sample;
    sample.id = record.id;
    sample.prefix_text = split->prefix_text;
    sample.suffix_text = split->suffix_text;
    sample.split_index = split->split_index;
    sample.prefix_token_count = split->prefix_token_count;
    sample.suffix_token_count = split->suffix_token_count;
    PrepareOutcome out;
    out.sample = std::move(sample);
    return out;
  }

  // VQA: the image and question are the conditioning prefix and stay
  // untouched; the first-round response is the suffix to paraphrase.
  const RawRecord first = extract_first_round(record);
  const auto truncated = truncate_text_to_budget(first.response, opts.budget, tok);
  if (!truncated) return discard("no complete sentence fits the token budget");
  const std::size_t suffix_tokens = tok.count(*truncated);
  if (suffix_tokens < opts.min_suffix_tokens) return discard("suffix below minimum length");
  SplitSample sample;
  sample.id = record.id;
  sample.prefix_text = "";
  sample.suffix_text = *truncated;
  sample.split_index = 1;
  sample.prefix_token_count = 0;
  sample.suffix_token_count = suffix_tokens;
  sample.image_ref = first.image_ref;
  sample.question = first.question;
  PrepareOutcome out;
  out.sample = std::move(sample);
  return out;
}

std::vector<CandidateSet> sample_subsets(const CandidateSet& source, const SubsetPlan& plan) {
  if (plan.subset_size > source.size()) {
    throw config_error("subset_size " + std::to_string(plan.subset_size) +
                       " exceeds source size " + std::to_string(source.size()));
  }
  const auto it = plan.counts.find(source.role);
  const std::size_t count = it != plan.counts.end() ? it->second : 0;

  std::vector<CandidateSet> subsets;
  subsets.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    Rng rng(derive_seed(plan.seed, std::string(role_tag(source.role)) + ":" + source.name, j));
    // Partial Fisher-Yates: the first subset_size slots are a uniform draw
    // without replacement.
    std::vector<std::size_t> idx(source.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < plan.subset_size; ++i) {
      const std::size_t k = i + rng.uniform_below(idx.size() - i);
      std::swap(idx[i], idx[k]);
    }
    CandidateSet subset;
    subset.name = source.name + "#" + std::to_string(j);
    subset.role = source.role;
    subset.samples.reserve(plan.subset_size);
    for (std::size_t i = 0; i < plan.subset_size; ++i) {
      subset.samples.push_back(source.samples[idx[i]]);
    }
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

void write_prepared_jsonl(const std::string& path, const std::vector<SplitSample>& samples) {
  jsonl::Writer out(path);
  for (const SplitSample& s : samples) {
    json obj = {
        {"id", s.id},
        {"prefix_text", s.prefix_text},
        {"suffix_text", s.suffix_text},
        {"split_index", s.split_index},
        {"prefix_token_count", s.prefix_token_count},
        {"suffix_token_count", s.suffix_token_count},
    };
    if (s.paraphrased_suffix) obj["paraphrased_suffix"] = *s.paraphrased_suffix;
    if (!s.image_ref.empty()) obj["image_ref"] = s.image_ref;
    if (!s.question.empty()) obj["question"] = s.question;
    out.write(obj);
  }
}

std::vector<SplitSample> read_prepared_jsonl(const std::string& path) {
  std::vector<SplitSample> samples;
  std::set<std::string> seen;
  jsonl::for_each_line(path, [&](const json& obj, std::size_t line_no) {
    SplitSample s;
    s.id = require_string(obj, "id", line_no, path);
    if (!seen.insert(s.id).second) {
      throw integrity_error(path + ":" + std::to_string(line_no) + ": duplicate id \"" +
                            s.id + "\"");
    }
    s.prefix_text = require_string(obj, "prefix_text", line_no, path);
    s.suffix_text = require_string(obj, "suffix_text", line_no, path);
    if (!obj.contains("split_index") || !obj["split_index"].is_number_unsigned()) {
      throw schema_error(path + ":" + std::to_string(line_no) + ": missing split_index");
    }
    s.split_index = obj["split_index"].get<std::size_t>();
    s.prefix_token_count = obj.value("prefix_token_count", s.split_index - 1);
    s.suffix_token_count = obj.value("suffix_token_count", std::size_t{0});
    if (obj.contains("paraphrased_suffix")) {
      s.paraphrased_suffix = obj["paraphrased_suffix"].get<std::string>();
    }
    s.image_ref = obj.value("image_ref", std::string{});
    s.question = obj.value("question", std::string{});
    samples.push_back(std::move(s));
  });
  return samples;
}

void write_discards_jsonl(const std::string& path, const std::vector<Discard>& discards) {
  jsonl::Writer out(path);
  for (const Discard& d : discards) {
    out.write(json{{"id", d.id}, {"reason", d.reason}});
  }
}

}  // namespace smi::corpus
