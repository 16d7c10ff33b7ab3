#include "smi/scoring.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>

#include "smi/errors.hpp"
#include "smi/jsonl.hpp"
#include "smi/text.hpp"

namespace smi::scoring {

using nlohmann::json;

const char* variant_name(Variant v) {
  return v == Variant::original ? "original" : "paraphrased";
}

Variant variant_from_name(const std::string& name) {
  if (name == "original") return Variant::original;
  if (name == "paraphrased") return Variant::paraphrased;
  throw config_error("unknown variant \"" + name + "\"");
}

MetricId MetricId::parse(const std::string& name) {
  MetricId m;
  if (name == "anll_suffix") {
    m.kind = Kind::anll_suffix;
  } else if (name == "zlib_ratio") {
    m.kind = Kind::zlib_ratio;
  } else if (name == "min_k" || name.rfind("min_k:", 0) == 0) {
    m.kind = Kind::min_k;
    if (const auto colon = name.find(':'); colon != std::string::npos) {
      m.k_percent = std::stod(name.substr(colon + 1));
    }
    if (!(m.k_percent > 0.0 && m.k_percent <= 100.0)) {
      throw config_error("min_k requires 0 < k <= 100, got " + std::to_string(m.k_percent));
    }
  } else {
    throw config_error("unknown metric \"" + name + "\"");
  }
  return m;
}

std::string MetricId::str() const {
  switch (kind) {
    case Kind::anll_suffix: return "anll_suffix";
    case Kind::zlib_ratio: return "zlib_ratio";
    case Kind::min_k: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "min_k:%g", k_percent);
      return buf;
    }
  }
  return "?";
}

double a_nll(const std::vector<TokenScore>& token_scores) {
  if (token_scores.empty()) throw domain_error("a_nll needs a nonempty score list");
  double total = 0.0;
  for (const TokenScore& t : token_scores) total += t.logprob;
  return -total / static_cast<double>(token_scores.size());
}

double suffix_a_nll(const std::vector<TokenScore>& token_scores, std::size_t split_index) {
  if (token_scores.empty()) throw domain_error("suffix_a_nll needs a nonempty score list");
  double total = 0.0;
  std::size_t count = 0;
  for (const TokenScore& t : token_scores) {
    if (t.position >= split_index) {
      total += t.logprob;
      ++count;
    }
  }
  if (count == 0) {
    throw domain_error("split_index " + std::to_string(split_index) +
                       " is past the last scored position");
  }
  return -total / static_cast<double>(count);
}

double min_k_score(const std::vector<TokenScore>& token_scores, double k_percent) {
  if (token_scores.empty()) throw domain_error("min_k_score needs a nonempty score list");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw domain_error("min_k_score requires 0 < k <= 100");
  }
  std::vector<double> logprobs;
  logprobs.reserve(token_scores.size());
  for (const TokenScore& t : token_scores) logprobs.push_back(t.logprob);
  std::sort(logprobs.begin(), logprobs.end());  // ascending: least likely first
  const auto take = static_cast<std::size_t>(
      std::ceil(k_percent * static_cast<double>(logprobs.size()) / 100.0 - 1e-9));
  const std::size_t count = std::clamp<std::size_t>(take, 1, logprobs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) total += logprobs[i];
  return -total / static_cast<double>(count);
}

std::size_t zlib_compressed_size(const std::string& text) {
  if (text.empty()) throw domain_error("cannot compress empty text");
  uLongf bound = compressBound(static_cast<uLong>(text.size()));
  std::vector<Bytef> out(bound);
  const int rc = compress2(out.data(), &bound, reinterpret_cast<const Bytef*>(text.data()),
                           static_cast<uLong>(text.size()), 6);
  if (rc != Z_OK) throw domain_error("zlib compression failed with code " + std::to_string(rc));
  return static_cast<std::size_t>(bound);
}

double zlib_ratio(const std::vector<TokenScore>& token_scores, const std::string& text) {
  double total_nll = 0.0;
  for (const TokenScore& t : token_scores) total_nll -= t.logprob;
  return total_nll / static_cast<double>(zlib_compressed_size(text));
}

namespace {

double clamp_logprob(double lp) { return lp > 0.0 ? 0.0 : lp; }

SequenceScore finish(SequenceScore score) {
  score.anll_whole = a_nll(score.token_scores);
  score.anll_suffix = suffix_a_nll(score.token_scores, score.split_index);
  return score;
}

}  // namespace

SequenceScore score_continuation(const corpus::SplitSample& sample, Variant variant,
                                 backend::Backend& be, const backend::BackendDescriptor& desc) {
  if (desc.capability != backend::Capability::full_vocab_logprobs) {
    throw capability_error("score_continuation needs a full_vocab_logprobs backend");
  }
  backend::EchoRequest req;
  req.model = desc.model_id;
  req.sample_id = sample.id;
  req.variant = variant_name(variant);
  req.prefix_text = sample.prefix_text;
  if (variant == Variant::paraphrased) {
    if (!sample.paraphrased_suffix) {
      throw domain_error("sample \"" + sample.id + "\" has no paraphrased suffix");
    }
    req.scored_text = *sample.paraphrased_suffix;
  } else {
    req.scored_text = sample.suffix_text;
  }
  req.question = sample.question;
  req.image_ref = sample.image_ref;

  const backend::EchoResponse resp = be.score_echo(req);

  SequenceScore score;
  score.sample_id = sample.id;
  score.variant = variant;

  if (resp.positioned) {
    const auto& [logprobs, split_index] = *resp.positioned;
    if (logprobs.empty()) throw alignment_error("backend returned no logprobs");
    score.split_index = split_index;
    for (std::size_t i = 0; i < logprobs.size(); ++i) {
      score.token_scores.push_back(TokenScore{"", clamp_logprob(logprobs[i]), i + 1, false});
    }
    return finish(score);
  }

  // Locate the suffix by character offset against the prefix/suffix
  // boundary. Junction whitespace belongs to the prefix while tokenizers
  // attach it to the following token, so offsets are compared after
  // skipping each token's leading whitespace.
  const std::size_t boundary = resp.prompt_char_base + sample.prefix_text.size();
  std::size_t split_position = 0;
  std::size_t position = 0;
  for (const backend::EchoToken& t : resp.tokens) {
    if (t.offset < resp.prompt_char_base) continue;  // conditioning context
    ++position;
    std::size_t lead = 0;
    while (lead < t.token.size() &&
           std::isspace(static_cast<unsigned char>(t.token[lead]))) {
      ++lead;
    }
    const std::size_t core_start = t.offset + lead;
    if (core_start < boundary && t.offset + t.token.size() > boundary) {
      throw alignment_error(
          "sample \"" + sample.id + "\": token \"" + t.token + "\" at offset " +
          std::to_string(t.offset) + " straddles the prefix/suffix boundary at " +
          std::to_string(boundary));
    }
    if (split_position == 0 && core_start >= boundary) split_position = position;
    if (t.logprob) {
      score.token_scores.push_back(TokenScore{t.token, clamp_logprob(*t.logprob), position, false});
    }
  }
  if (score.token_scores.empty()) {
    throw alignment_error("sample \"" + sample.id + "\": backend returned no scored tokens");
  }
  if (split_position == 0) {
    throw alignment_error("sample \"" + sample.id +
                          "\": no returned token starts at or after the suffix boundary");
  }
  score.split_index = split_position;
  return finish(score);
}

namespace {

// Design decision: exact string equality after trimming a single leading
// space from each side.
bool tokens_match(std::string_view predicted, std::string_view target) {
  if (!predicted.empty() && predicted.front() == ' ') predicted.remove_prefix(1);
  if (!target.empty() && target.front() == ' ') target.remove_prefix(1);
  return predicted == target;
}

}  // namespace

SequenceScore score_predicted_only(const corpus::SplitSample& sample, Variant variant,
                                   backend::Backend& be, const backend::BackendDescriptor& desc,
                                   double fallback_nll) {
  if (desc.capability != backend::Capability::predicted_token_only) {
    throw capability_error("score_predicted_only needs a predicted_token_only backend");
  }
  if (!(fallback_nll > 0.0)) throw domain_error("fallback_nll must be > 0");

  const std::string* suffix = &sample.suffix_text;
  if (variant == Variant::paraphrased) {
    if (!sample.paraphrased_suffix) {
      throw domain_error("sample \"" + sample.id + "\" has no paraphrased suffix");
    }
    suffix = &sample.paraphrased_suffix.value();
  }

  text::WordTokenizer tok;
  const std::vector<std::string> targets = tok.tokenize(*suffix);

  std::string context = sample.question.empty() ? "" : sample.question + "\n";
  std::string prefix_so_far = context + sample.prefix_text;

  SequenceScore score;
  score.sample_id = sample.id;
  score.variant = variant;
  score.split_index = sample.split_index;

  for (std::size_t step = 0; step < targets.size(); ++step) {
    const std::string& target = targets[step];
    backend::PredictRequest req;
    req.model = desc.model_id;
    req.prompt = desc.prompt_template.empty() ? prefix_so_far
                                              : desc.prompt_template + " " + prefix_so_far;
    req.image_ref = sample.image_ref;
    req.target_hint = target;
    req.sample_id = sample.id;
    req.step = step;

    backend::PredictedToken predicted;
    try {
      predicted = be.predict_next(req);
    } catch (const backend_error& e) {
      if (e.retryable) {
        throw resumable_error("sample \"" + sample.id + "\" failed at suffix position " +
                                  std::to_string(step + 1) + ": " + e.what(),
                              std::move(score.token_scores));
      }
      throw;
    }

    TokenScore ts;
    ts.token = target;
    ts.position = sample.split_index + step;
    if (!predicted.empty && tokens_match(predicted.token, target)) {
      ts.logprob = clamp_logprob(predicted.logprob);
    } else {
      ts.logprob = -fallback_nll;
      ts.imputed = true;
      if (desc.use_top_logprobs) {
        for (const auto& [alt, lp] : predicted.top_logprobs) {
          if (tokens_match(alt, target)) {
            ts.logprob = clamp_logprob(lp);
            ts.imputed = false;
            break;
          }
        }
      }
    }
    score.token_scores.push_back(std::move(ts));
    // The target token, never the model's prediction, extends the prefix.
    prefix_so_far += target;
  }
  if (score.token_scores.empty()) {
    throw domain_error("sample \"" + sample.id + "\" has an empty suffix");
  }
  return finish(score);
}

MetricValue aggregate_membership_score(const SequenceScore& score, const MetricId& metric,
                                       const std::string* text) {
  MetricValue value;
  value.sample_id = score.sample_id;
  value.metric = metric.str();
  switch (metric.kind) {
    case MetricId::Kind::anll_suffix:
      value.value = suffix_a_nll(score.token_scores, score.split_index);
      break;
    case MetricId::Kind::min_k:
      value.value = min_k_score(score.token_scores, metric.k_percent);
      break;
    case MetricId::Kind::zlib_ratio: {
      if (text == nullptr) throw config_error("zlib_ratio needs the scored text");
      std::vector<TokenScore> suffix_scores;
      for (const TokenScore& t : score.token_scores) {
        if (t.position >= score.split_index) suffix_scores.push_back(t);
      }
      value.value = zlib_ratio(suffix_scores, *text);
      break;
    }
  }
  return value;
}

namespace {

std::string cache_key(const std::string& model_id, const std::string& sample_id,
                      Variant variant, backend::Capability capability) {
  return model_id + "\x1f" + sample_id + "\x1f" + variant_name(variant) + "\x1f" +
         (capability == backend::Capability::full_vocab_logprobs ? "full" : "predicted_only");
}

json score_to_json(const std::string& model_id, const SequenceScore& s,
                   backend::Capability capability) {
  json tokens = json::array();
  for (const TokenScore& t : s.token_scores) {
    tokens.push_back(json{{"token", t.token},
                          {"logprob", t.logprob},
                          {"position", t.position},
                          {"imputed", t.imputed}});
  }
  return json{{"model_id", model_id},
              {"sample_id", s.sample_id},
              {"variant", variant_name(s.variant)},
              {"capability",
               capability == backend::Capability::full_vocab_logprobs ? "full" : "predicted_only"},
              {"split_index", s.split_index},
              {"anll_whole", s.anll_whole},
              {"anll_suffix", s.anll_suffix},
              {"tokens", tokens}};
}

}  // namespace

ScoreCache::ScoreCache(std::string path) : path_(std::move(path)) {
  std::ifstream probe(path_);
  if (!probe.good()) return;
  probe.close();
  std::ifstream in(path_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      SequenceScore s;
      s.sample_id = obj.at("sample_id").get<std::string>();
      s.variant = variant_from_name(obj.at("variant").get<std::string>());
      s.split_index = obj.at("split_index").get<std::size_t>();
      s.anll_whole = obj.at("anll_whole").get<double>();
      s.anll_suffix = obj.at("anll_suffix").get<double>();
      for (const auto& t : obj.at("tokens")) {
        s.token_scores.push_back(TokenScore{t.at("token").get<std::string>(),
                                            t.at("logprob").get<double>(),
                                            t.at("position").get<std::size_t>(),
                                            t.at("imputed").get<bool>()});
      }
      const auto capability = obj.at("capability").get<std::string>() == "full"
                                  ? backend::Capability::full_vocab_logprobs
                                  : backend::Capability::predicted_token_only;
      entries_[cache_key(obj.at("model_id").get<std::string>(), s.sample_id, s.variant,
                         capability)] = std::move(s);
    } catch (const std::exception& e) {
      ++skipped_;
      std::cerr << "warning: " << path_ << ":" << line_no
                << ": skipping corrupt cache line (" << e.what() << ")\n";
    }
  }
}

std::optional<SequenceScore> ScoreCache::get(const std::string& model_id,
                                             const std::string& sample_id, Variant variant,
                                             backend::Capability capability) const {
  const auto it = entries_.find(cache_key(model_id, sample_id, variant, capability));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::put(const std::string& model_id, const SequenceScore& score,
                     backend::Capability capability) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw parse_error("cannot append to score cache " + path_);
  out << score_to_json(model_id, score, capability).dump() << '\n';
  entries_[cache_key(model_id, score.sample_id, score.variant, capability)] = score;
}

}  // namespace smi::scoring
