#include "smi/paraphrase.hpp"

#include <cctype>
#include <fstream>

#include "smi/errors.hpp"
#include "smi/jsonl.hpp"
#include "smi/rng.hpp"

namespace smi::paraphrase {

using nlohmann::json;

namespace {

std::string normalize_whitespace(const std::string& s) {
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += c;
  }
  return out;
}

}  // namespace

bool validate_paraphrase(const std::string& original, const std::string& candidate,
                         std::pair<double, double> bounds, std::string* reason) {
  const auto fail = [&](const char* why) {
    if (reason) *reason = why;
    return false;
  };
  if (original.empty()) throw domain_error("validate_paraphrase: original is empty");
  if (candidate.empty()) return fail("empty output");
  if (normalize_whitespace(candidate) == normalize_whitespace(original)) {
    return fail("identical output");
  }
  const double ratio =
      static_cast<double>(candidate.size()) / static_cast<double>(original.size());
  if (ratio < bounds.first || ratio > bounds.second) return fail("length ratio");
  if (reason) reason->clear();
  return true;
}

std::string build_paraphrase_prompt(const std::string& suffix, const ParaphraseConfig& cfg) {
  if (suffix.empty()) throw domain_error("build_paraphrase_prompt: suffix is empty");
  return cfg.prompt_template + suffix;
}

ParaphraseResult paraphrase_suffix(const corpus::SplitSample& sample, const ParaphraseConfig& cfg,
                                   backend::Backend& be) {
  if (sample.suffix_text.empty()) {
    throw domain_error("sample \"" + sample.id + "\" has an empty suffix");
  }
  if (cfg.max_attempts < 1) throw config_error("max_attempts must be >= 1");
  if (!(cfg.length_ratio_bounds.first > 0.0 && cfg.length_ratio_bounds.first < 1.0 &&
        cfg.length_ratio_bounds.second > 1.0)) {
    throw config_error("length ratio bounds must satisfy 0 < low < 1 < high");
  }

  ParaphraseResult result;
  result.sample_id = sample.id;
  result.original_suffix = sample.suffix_text;

  backend::ChatRequest req;
  req.model = cfg.model_id;
  req.prompt = build_paraphrase_prompt(sample.suffix_text, cfg);
  req.user_text = sample.suffix_text;
  req.temperature = cfg.temperature;

  std::string reason = "no attempt made";
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    result.attempts_used = attempt;
    const std::string candidate = be.complete_chat(req);
    if (validate_paraphrase(sample.suffix_text, candidate, cfg.length_ratio_bounds, &reason)) {
      result.paraphrased_suffix = candidate;
      result.valid = true;
      return result;
    }
  }
  result.valid = false;
  result.rejection_reason = reason;
  return result;
}

namespace {

std::string cache_key(const std::string& sample_id, const std::string& model_id,
                      const std::string& prompt_template) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(prompt_template)));
  return sample_id + "\x1f" + model_id + "\x1f" + hash;
}

}  // namespace

ParaphraseCache::ParaphraseCache(std::string path) : path_(std::move(path)) {
  std::ifstream probe(path_);
  if (!probe.good()) return;
  probe.close();
  jsonl::for_each_line(path_, [&](const json& obj, std::size_t) {
    ParaphraseResult r;
    r.sample_id = obj.at("sample_id").get<std::string>();
    r.original_suffix = obj.at("original_suffix").get<std::string>();
    r.paraphrased_suffix = obj.value("paraphrased_suffix", std::string{});
    r.attempts_used = obj.at("attempts_used").get<int>();
    r.valid = obj.at("valid").get<bool>();
    if (obj.contains("rejection_reason") && !obj["rejection_reason"].is_null()) {
      r.rejection_reason = obj["rejection_reason"].get<std::string>();
    }
    entries_[r.sample_id + "\x1f" + obj.at("model_id").get<std::string>() + "\x1f" +
             obj.at("template_hash").get<std::string>()] = std::move(r);
  });
}

std::optional<ParaphraseResult> ParaphraseCache::get(const std::string& sample_id,
                                                     const std::string& model_id,
                                                     const std::string& prompt_template) const {
  const auto it = entries_.find(cache_key(sample_id, model_id, prompt_template));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ParaphraseCache::put(const std::string& model_id, const std::string& prompt_template,
                          const ParaphraseResult& result) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(prompt_template)));
  std::ofstream out(path_, std::ios::app);
  if (!out) throw parse_error("cannot append to paraphrase cache " + path_);
  json obj = {
      {"sample_id", result.sample_id},
      {"model_id", model_id},
      {"template_hash", hash},
      {"original_suffix", result.original_suffix},
      {"paraphrased_suffix", result.paraphrased_suffix},
      {"attempts_used", result.attempts_used},
      {"valid", result.valid},
  };
  if (result.rejection_reason) obj["rejection_reason"] = *result.rejection_reason;
  out << obj.dump() << '\n';
  entries_[cache_key(result.sample_id, model_id, prompt_template)] = result;
}

}  // namespace smi::paraphrase
