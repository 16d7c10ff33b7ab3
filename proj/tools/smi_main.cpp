#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "smi/backend.hpp"
#include "smi/baselines.hpp"
#include "smi/corpus.hpp"
#include "smi/errors.hpp"
#include "smi/harness.hpp"
#include "smi/inference.hpp"
#include "smi/jsonl.hpp"
#include "smi/manifest.hpp"
#include "smi/paraphrase.hpp"
#include "smi/rng.hpp"
#include "smi/scoring.hpp"
#include "smi/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smi;

namespace {

// Appendix-style completion prompt for predicted-token-only chat backends;
// overridable with --prompt-template.
constexpr const char* kDefaultCompletionPrompt =
    "Please complete the following sentence. Output the next words directly! "
    "The incomplete sentence is:";

constexpr int kExitInput = 2;
constexpr int kExitBackend = 3;
constexpr int kExitStatistical = 4;

std::map<std::string, std::string> parse_kv_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config file " + path);
  std::map<std::string, std::string> config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw parse_error(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    config[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return config;
}

double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

std::uint64_t kv_u64(const std::map<std::string, std::string>& kv, const std::string& key,
                     std::uint64_t fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stoull(it->second);
}

bool kv_bool(const std::map<std::string, std::string>& kv, const std::string& key,
             bool fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw config_error("config key \"" + key + "\" must be true or false");
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

harness::SyntheticSpec spec_from_kv(const std::map<std::string, std::string>& kv) {
  harness::SyntheticSpec spec;
  spec.n_member = static_cast<std::size_t>(kv_u64(kv, "n_member", spec.n_member));
  spec.n_non_member = static_cast<std::size_t>(kv_u64(kv, "n_non_member", spec.n_non_member));
  spec.n_aux = static_cast<std::size_t>(kv_u64(kv, "n_aux", spec.n_aux));
  spec.set_size = static_cast<std::size_t>(kv_u64(kv, "set_size", spec.set_size));
  spec.base_mean = kv_double(kv, "base_mean", spec.base_mean);
  spec.base_sd = kv_double(kv, "base_sd", spec.base_sd);
  spec.member_shift = kv_double(kv, "member_shift", spec.member_shift);
  spec.non_member_shift = kv_double(kv, "non_member_shift", spec.non_member_shift);
  spec.shift_sd = kv_double(kv, "shift_sd", spec.shift_sd);
  spec.candidate_mean_offset = kv_double(kv, "candidate_mean_offset", spec.candidate_mean_offset);
  spec.seed = kv_u64(kv, "seed", spec.seed);
  return spec;
}

harness::MethodConfig method_config_from_kv(const std::map<std::string, std::string>& kv,
                                            std::uint64_t seed) {
  harness::MethodConfig cfg;
  cfg.smi.K = static_cast<int>(kv_u64(kv, "K", 10));
  cfg.smi.epsilon_1 = kv_double(kv, "eps1", 0.01);
  cfg.smi.epsilon_2 = kv_double(kv, "eps2", 10.0);
  cfg.smi.asymptotic_switch = kv_double(kv, "asymptotic_switch", 8.0);
  // The synthetic benchmark compares the same samples before/after the
  // shift, so the paired statistic is the calibrated default here.
  cfg.smi.paired = kv_bool(kv, "paired", true);
  cfg.percentile = kv_double(kv, "percentile", 45.0);
  cfg.ddi_alpha = kv_double(kv, "alpha", 0.01);
  cfg.seed = seed;
  return cfg;
}

json method_config_to_json(const harness::MethodConfig& cfg) {
  json doc = smi_config_to_json(cfg.smi);
  doc["percentile"] = cfg.percentile;
  doc["alpha"] = cfg.ddi_alpha;
  doc["seed"] = cfg.seed;
  return doc;
}

backend::BackendDescriptor make_descriptor(const std::string& endpoint, const std::string& model,
                                           const std::string& capability, int max_in_flight,
                                           const std::string& prompt_template,
                                           const std::string& api_key_env,
                                           bool use_top_logprobs = false) {
  backend::BackendDescriptor desc;
  desc.endpoint = endpoint;
  desc.model_id = model;
  if (capability == "full") {
    desc.capability = backend::Capability::full_vocab_logprobs;
  } else if (capability == "predicted_only") {
    desc.capability = backend::Capability::predicted_token_only;
  } else {
    throw config_error("capability must be full or predicted_only");
  }
  desc.max_in_flight = max_in_flight;
  desc.prompt_template = prompt_template;
  desc.api_key_env = api_key_env;
  desc.use_top_logprobs = use_top_logprobs;
  return desc;
}

// ---------------------------------------------------------------- prepare

int cmd_prepare(const std::string& input, const std::string& mode_name, std::size_t budget,
                std::size_t min_suffix, const std::string& out_dir) {
  const corpus::DatasetMode mode =
      mode_name == "vqa" ? corpus::DatasetMode::vqa : corpus::DatasetMode::text;
  fs::create_directories(out_dir);
  const auto records = corpus::ingest_jsonl(input, mode);

  corpus::PrepareOptions opts;
  opts.mode = mode;
  opts.budget = budget;
  opts.min_suffix_tokens = min_suffix;
  text::WordTokenizer tok;

  std::vector<corpus::SplitSample> samples;
  std::vector<corpus::Discard> discards;
  for (const auto& record : records) {
    auto outcome = corpus::prepare_record(record, opts, tok);
    if (outcome.sample) {
      samples.push_back(std::move(*outcome.sample));
    } else {
      discards.push_back(std::move(*outcome.discard));
    }
  }
  corpus::write_prepared_jsonl(out_dir + "/prepared.jsonl", samples);
  corpus::write_discards_jsonl(out_dir + "/discards.jsonl", discards);

  RunManifest manifest;
  manifest.command = "prepare";
  manifest.config = {{"mode", mode_name},
                     {"budget", budget},
                     {"min_suffix_tokens", min_suffix},
                     {"tokenizer", text::WordTokenizer::id()}};
  manifest.add_input(input);
  manifest.write(out_dir + "/manifest.json");

  std::cout << "prepared " << samples.size() << " samples, discarded " << discards.size()
            << " (see discards.jsonl)\n";
  return 0;
}

// ------------------------------------------------------------- paraphrase

int cmd_paraphrase(const std::string& input, const std::string& endpoint,
                   const std::string& model, const std::string& out_dir, double temperature,
                   int max_attempts, double ratio_low, double ratio_high, int max_in_flight,
                   std::string cache_path) {
  fs::create_directories(out_dir);
  if (cache_path.empty()) cache_path = out_dir + "/paraphrase_cache.jsonl";

  auto samples = corpus::read_prepared_jsonl(input);

  paraphrase::ParaphraseConfig cfg;
  cfg.backend_endpoint = endpoint;
  cfg.model_id = model;
  cfg.temperature = temperature;
  cfg.max_attempts = max_attempts;
  cfg.length_ratio_bounds = {ratio_low, ratio_high};

  backend::BackendDescriptor desc;
  desc.endpoint = endpoint;
  desc.model_id = model;
  desc.max_in_flight = max_in_flight;
  desc.api_key_env = std::getenv("PARAPHRASE_API_KEY") ? "PARAPHRASE_API_KEY" : "MODEL_API_KEY";
  const auto be = backend::make_backend(desc);

  paraphrase::ParaphraseCache cache(cache_path);
  std::vector<paraphrase::ParaphraseResult> results(samples.size());
  std::mutex cache_mu;
  util::parallel_for(samples.size(), max_in_flight, [&](std::size_t i) {
    {
      std::lock_guard<std::mutex> lock(cache_mu);
      if (auto hit = cache.get(samples[i].id, model, cfg.prompt_template)) {
        results[i] = std::move(*hit);
        return;
      }
    }
    auto result = paraphrase_suffix(samples[i], cfg, *be);
    std::lock_guard<std::mutex> lock(cache_mu);
    cache.put(model, cfg.prompt_template, result);
    results[i] = std::move(result);
  });

  std::vector<corpus::SplitSample> kept;
  std::vector<corpus::Discard> discards;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (results[i].valid) {
      samples[i].paraphrased_suffix = results[i].paraphrased_suffix;
      kept.push_back(samples[i]);
    } else {
      discards.push_back(corpus::Discard{
          samples[i].id, "paraphrase invalid: " + results[i].rejection_reason.value_or("?")});
    }
  }
  corpus::write_prepared_jsonl(out_dir + "/paraphrased.jsonl", kept);
  corpus::write_discards_jsonl(out_dir + "/discards.jsonl", discards);

  RunManifest manifest;
  manifest.command = "paraphrase";
  manifest.config = {{"model_id", model},
                     {"temperature", temperature},
                     {"max_attempts", max_attempts},
                     {"length_ratio_bounds", json::array({ratio_low, ratio_high})},
                     {"prompt_template", cfg.prompt_template},
                     {"cache", cache_path}};
  manifest.config["backend_requests"] = be->request_count();
  manifest.add_backend(desc);
  manifest.add_input(input);
  manifest.write(out_dir + "/manifest.json");

  std::cout << "paraphrased " << kept.size() << " samples (" << discards.size()
            << " discarded as pairs), " << be->request_count() << " backend requests\n";
  return 0;
}

// ------------------------------------------------------------------ score

int cmd_score(const std::string& input, const std::string& endpoint, const std::string& model,
              const std::string& capability, double fallback_nll, const std::string& out_dir,
              const std::string& variants, int max_in_flight, bool allow_partial,
              std::string cache_path, const std::string& prompt_template,
              bool use_top_logprobs) {
  fs::create_directories(out_dir);
  if (cache_path.empty()) cache_path = out_dir + "/scores.jsonl";

  const auto samples = corpus::read_prepared_jsonl(input);
  const auto desc = make_descriptor(endpoint, model, capability, max_in_flight, prompt_template,
                                    "MODEL_API_KEY", use_top_logprobs);
  const auto be = backend::make_backend(desc);

  std::vector<scoring::Variant> wanted;
  if (variants == "both" || variants == "original") wanted.push_back(scoring::Variant::original);
  if (variants == "both" || variants == "paraphrased") {
    wanted.push_back(scoring::Variant::paraphrased);
  }
  if (wanted.empty()) throw config_error("variants must be original, paraphrased or both");

  scoring::ScoreCache cache(cache_path);
  struct Job {
    const corpus::SplitSample* sample;
    scoring::Variant variant;
  };
  std::vector<Job> jobs;
  for (const auto& sample : samples) {
    for (const auto variant : wanted) {
      if (variant == scoring::Variant::paraphrased && !sample.paraphrased_suffix) continue;
      if (!cache.get(model, sample.id, variant, desc.capability)) {
        jobs.push_back(Job{&sample, variant});
      }
    }
  }

  std::mutex cache_mu;
  std::size_t failures = 0;
  util::parallel_for(jobs.size(), max_in_flight, [&](std::size_t i) {
    scoring::SequenceScore score;
    try {
      score = desc.capability == backend::Capability::full_vocab_logprobs
                  ? scoring::score_continuation(*jobs[i].sample, jobs[i].variant, *be, desc)
                  : scoring::score_predicted_only(*jobs[i].sample, jobs[i].variant, *be, desc,
                                                  fallback_nll);
    } catch (const backend_error&) {
      if (!allow_partial) throw;
      std::lock_guard<std::mutex> lock(cache_mu);
      ++failures;
      return;
    }
    std::lock_guard<std::mutex> lock(cache_mu);
    cache.put(model, score, desc.capability);
  });

  RunManifest manifest;
  manifest.command = "score";
  manifest.config = {{"model_id", model},
                     {"capability", capability},
                     {"fallback_nll", fallback_nll},
                     {"variants", variants},
                     {"prompt_template", prompt_template},
                     {"cache", cache_path},
                     {"use_top_logprobs", use_top_logprobs},
                     {"partial", failures > 0},
                     {"failed_jobs", failures}};
  manifest.config["backend_requests"] = be->request_count();
  manifest.add_backend(desc);
  manifest.add_input(input);
  manifest.write(out_dir + "/manifest.json");

  std::cout << "scored " << jobs.size() - failures << " of " << jobs.size()
            << " pending sample-variants (" << cache.size() << " cached total)\n";
  return 0;
}

// ------------------------------------------------------------------ infer

// Per-sample (original, paraphrased) suffix A-NLL pairs from a score cache,
// ordered by sample id for determinism. A cache holding several models is
// ambiguous unless one is named.
std::pair<std::vector<double>, std::vector<double>> load_pairs(const std::string& path,
                                                               const std::string& model = {}) {
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> by_id;
  std::set<std::string> models;
  jsonl::for_each_line(path, [&](const json& obj, std::size_t line_no) {
    if (!obj.contains("sample_id") || !obj.contains("variant") || !obj.contains("anll_suffix")) {
      throw schema_error(path + ":" + std::to_string(line_no) +
                         ": expected a score cache line with sample_id/variant/anll_suffix");
    }
    const std::string line_model = obj.value("model_id", std::string{});
    if (!model.empty() && line_model != model) return;
    models.insert(line_model);
    auto& slot = by_id[obj["sample_id"].get<std::string>()];
    const double value = obj["anll_suffix"].get<double>();
    if (obj["variant"].get<std::string>() == "original") {
      slot.first = value;
    } else {
      slot.second = value;
    }
  });
  if (models.size() > 1) {
    throw config_error(path + " holds scores for " + std::to_string(models.size()) +
                       " models; pass --model to pick one");
  }
  std::vector<double> original, paraphrased;
  for (const auto& [id, pair] : by_id) {
    if (pair.first && pair.second) {
      original.push_back(*pair.first);
      paraphrased.push_back(*pair.second);
    }
  }
  if (original.empty()) {
    throw domain_error("no samples in " + path + " carry both variants");
  }
  return {std::move(original), std::move(paraphrased)};
}

int cmd_infer(const std::string& candidate_scores, const std::string& aux_scores, int K,
              double eps1, double eps2, bool paired, double asymptotic_switch,
              std::uint64_t seed, const std::string& report_path, const std::string& csv_path,
              const std::string& candidate_name, const std::string& aux_name,
              const std::string& model) {
  inference::SmiConfig cfg;
  cfg.K = K;
  cfg.epsilon_1 = eps1;
  cfg.epsilon_2 = eps2;
  cfg.paired = paired;
  cfg.asymptotic_switch = asymptotic_switch;

  const auto [cand_org, cand_para] = load_pairs(candidate_scores, model);
  const auto [aux_org, aux_para] = load_pairs(aux_scores, model);

  auto candidate_series = inference::p_value_series(
      cand_org, cand_para, K, derive_seed(seed, "series:" + candidate_name), cfg);
  candidate_series.set_name = candidate_name;
  auto aux_series = inference::p_value_series(aux_org, aux_para, K,
                                              derive_seed(seed, "series:" + aux_name), cfg);
  aux_series.set_name = aux_name;

  const auto verdict = inference::smi_decide(candidate_series, aux_series, cfg);
  util::write_file(report_path, verdict_to_json(verdict, candidate_series, aux_series).dump(2) + "\n");
  if (!csv_path.empty()) {
    harness::emit_series_csv(csv_path, {candidate_series, aux_series});
  }

  RunManifest manifest;
  manifest.command = "infer";
  manifest.config = smi_config_to_json(cfg);
  manifest.config["seed"] = seed;
  manifest.config["candidate"] = candidate_name;
  manifest.config["aux"] = aux_name;
  manifest.add_input(candidate_scores);
  manifest.add_input(aux_scores);
  manifest.write(fs::path(report_path).parent_path() / "manifest.json");

  std::cout << "decision: "
            << (verdict.decision == inference::Decision::member ? "member" : "non_member")
            << " (beta " << verdict.beta << " vs aux " << verdict.beta_aux << ", log p "
            << verdict.log_p_K << " vs aux " << verdict.log_p_K_aux << ")\n";
  return 0;
}

// --------------------------------------------------------------- baseline

struct CachedScore {
  scoring::SequenceScore score;
};

std::map<std::string, scoring::SequenceScore> load_original_scores(const std::string& path,
                                                                   const std::string& model = {}) {
  std::map<std::string, scoring::SequenceScore> by_id;
  std::set<std::string> models;
  jsonl::for_each_line(path, [&](const json& obj, std::size_t line_no) {
    if (obj.value("variant", std::string{}) != "original") return;
    const std::string line_model = obj.value("model_id", std::string{});
    if (!model.empty() && line_model != model) return;
    models.insert(line_model);
    scoring::SequenceScore s;
    s.sample_id = obj.at("sample_id").get<std::string>();
    s.variant = scoring::Variant::original;
    s.split_index = obj.at("split_index").get<std::size_t>();
    s.anll_whole = obj.at("anll_whole").get<double>();
    s.anll_suffix = obj.at("anll_suffix").get<double>();
    if (obj.contains("tokens")) {
      for (const auto& t : obj["tokens"]) {
        s.token_scores.push_back(scoring::TokenScore{
            t.at("token").get<std::string>(), t.at("logprob").get<double>(),
            t.at("position").get<std::size_t>(), t.at("imputed").get<bool>()});
      }
    }
    if (s.token_scores.empty()) {
      throw schema_error(path + ":" + std::to_string(line_no) + ": score line without tokens");
    }
    by_id[s.sample_id] = std::move(s);
  });
  if (models.size() > 1) {
    throw config_error(path + " holds scores for " + std::to_string(models.size()) +
                       " models; pass --model to pick one");
  }
  if (by_id.empty()) throw domain_error("no original-variant scores in " + path);
  return by_id;
}

int cmd_baseline(const std::string& method, const std::string& candidate_scores,
                 const std::string& aux_scores, const std::string& prepared, double percentile,
                 double alpha, double mink_k, const std::string& report_path,
                 const std::string& set_name, const std::string& model) {
  json report;
  report["set_name"] = set_name;

  if (method == "ddi") {
    const auto candidates = load_original_scores(candidate_scores, model);
    const auto aux = load_original_scores(aux_scores, model);
    std::vector<double> cand_values, aux_values;
    for (const auto& [id, s] : candidates) cand_values.push_back(s.anll_suffix);
    for (const auto& [id, s] : aux) aux_values.push_back(s.anll_suffix);
    const auto result = baselines::ddi_decide(cand_values, aux_values, alpha);
    report["method"] = "ddi";
    report["decision"] =
        result.decision == inference::Decision::member ? "member" : "non_member";
    report["log_p"] = result.log_p;
    report["z"] = result.z;
    report["config"] = {{"alpha", alpha}, {"metric", "anll_suffix"}};
  } else if (method == "anll" || method == "mink" || method == "zlib") {
    scoring::MetricId metric;
    if (method == "anll") {
      metric = scoring::MetricId::parse("anll_suffix");
    } else if (method == "mink") {
      metric = scoring::MetricId::parse("min_k:" + std::to_string(mink_k));
    } else {
      metric = scoring::MetricId::parse("zlib_ratio");
    }

    std::map<std::string, std::string> suffix_text;
    if (metric.kind == scoring::MetricId::Kind::zlib_ratio) {
      if (prepared.empty()) {
        throw config_error("zlib baseline needs --prepared to supply the scored text");
      }
      for (const auto& sample : corpus::read_prepared_jsonl(prepared)) {
        suffix_text[sample.id] = sample.suffix_text;
      }
    }

    const auto metric_values = [&](const std::string& path) {
      std::vector<scoring::MetricValue> values;
      for (const auto& [id, score] : load_original_scores(path, model)) {
        const std::string* text = nullptr;
        if (metric.kind == scoring::MetricId::Kind::zlib_ratio) {
          const auto it = suffix_text.find(id);
          if (it == suffix_text.end()) {
            throw config_error("no prepared suffix text for sample \"" + id + "\"");
          }
          text = &it->second;
        }
        values.push_back(scoring::aggregate_membership_score(score, metric, text));
      }
      return values;
    };

    const auto aux_values = metric_values(aux_scores);
    std::vector<double> aux_raw;
    for (const auto& v : aux_values) aux_raw.push_back(v.value);
    const double threshold = baselines::percentile_threshold(aux_raw, percentile);
    const auto verdicts = baselines::sample_level_classify(metric_values(candidate_scores), threshold);
    const auto decision = baselines::dataset_level_vote(verdicts);

    report["method"] = method + "_dataset";
    report["decision"] = decision == inference::Decision::member ? "member" : "non_member";
    report["positive_fraction"] = verdicts.positive_fraction();
    report["threshold"] = threshold;
    report["config"] = {{"percentile", percentile}, {"metric", metric.str()}};
  } else {
    throw config_error("unknown baseline method \"" + method +
                       "\" (expected anll, mink, zlib or ddi)");
  }

  util::write_file(report_path, report.dump(2) + "\n");
  std::cout << report["method"].get<std::string>() << " decision: "
            << report["decision"].get<std::string>() << "\n";
  return 0;
}

// ------------------------------------------------------------ synth/evaluate

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
  fs::create_directories(out_dir);
  std::map<std::string, std::string> kv;
  if (!spec_path.empty()) kv = parse_kv_config(spec_path);
  harness::SyntheticSpec spec = spec_from_kv(kv);
  if (seed_override) spec.seed = *seed_override;

  const auto sets = harness::generate_synthetic(spec);
  harness::write_synthetic_jsonl(out_dir + "/synthetic.jsonl", sets);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.config = {{"n_member", spec.n_member},
                     {"n_non_member", spec.n_non_member},
                     {"n_aux", spec.n_aux},
                     {"set_size", spec.set_size},
                     {"base_mean", spec.base_mean},
                     {"base_sd", spec.base_sd},
                     {"member_shift", spec.member_shift},
                     {"non_member_shift", spec.non_member_shift},
                     {"shift_sd", spec.shift_sd},
                     {"candidate_mean_offset", spec.candidate_mean_offset},
                     {"seed", spec.seed}};
  manifest.write(out_dir + "/manifest.json");

  std::cout << "wrote " << sets.size() << " sets to " << out_dir << "/synthetic.jsonl\n";
  return 0;
}

int cmd_evaluate(const std::string& input, const std::string& spec_path,
                 const std::string& methods_csv, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override, const std::string& ablate_n_csv,
                 const std::string& ablate_margins_csv, const std::string& mix_ratios_csv) {
  fs::create_directories(out_dir);
  std::map<std::string, std::string> kv;
  if (!spec_path.empty()) kv = parse_kv_config(spec_path);

  harness::SyntheticSpec spec = spec_from_kv(kv);
  if (seed_override) spec.seed = *seed_override;

  std::vector<harness::SyntheticSet> sets;
  if (!input.empty()) {
    sets = harness::read_synthetic_jsonl(input);
  } else {
    sets = harness::generate_synthetic(spec);
  }

  auto methods = split_list(methods_csv.empty() ? kv.count("methods") ? kv["methods"] : "smi"
                                                : methods_csv);
  const harness::MethodConfig cfg = method_config_from_kv(kv, spec.seed);

  json results_doc = json::array();
  std::vector<std::tuple<std::string, double, harness::EvalResult>> csv_rows;

  for (const auto& result : harness::evaluate_methods(sets, methods, cfg)) {
    json doc = eval_result_to_json(result);
    doc["config"] = method_config_to_json(cfg);
    results_doc.push_back(doc);
    csv_rows.emplace_back("full", static_cast<double>(0), result);
  }

  if (!ablate_n_csv.empty()) {
    std::vector<std::size_t> grid;
    for (const auto& item : split_list(ablate_n_csv)) grid.push_back(std::stoull(item));
    for (const auto& [n, result] : harness::ablate_sample_size(sets, grid, methods, cfg)) {
      json doc = eval_result_to_json(result, false);
      doc["axis"] = "sample_size";
      doc["axis_value"] = n;
      results_doc.push_back(doc);
      csv_rows.emplace_back("sample_size", static_cast<double>(n), result);
    }
  }

  if (!ablate_margins_csv.empty()) {
    // "e1:e2;e1:e2;..."
    std::vector<std::pair<double, double>> grid;
    std::stringstream ss(ablate_margins_csv);
    std::string pair_str;
    while (std::getline(ss, pair_str, ';')) {
      const auto colon = pair_str.find(':');
      if (colon == std::string::npos) {
        throw config_error("margin grid entries look like eps1:eps2");
      }
      grid.emplace_back(std::stod(pair_str.substr(0, colon)),
                        std::stod(pair_str.substr(colon + 1)));
    }
    for (const auto& [pair, result] : harness::ablate_margins(sets, grid, cfg)) {
      json doc = eval_result_to_json(result, false);
      doc["axis"] = "margins";
      doc["axis_value"] = json::array({pair.first, pair.second});
      results_doc.push_back(doc);
      csv_rows.emplace_back("eps2_margin", pair.second, result);
    }
  }

  if (!mix_ratios_csv.empty()) {
    // Partial-membership experiment: mixed candidate sets at each ratio
    // against the same non-member negatives and aux references.
    harness::SyntheticSpec pool_spec = spec;
    for (const auto& ratio_str : split_list(mix_ratios_csv)) {
      const double r = std::stod(ratio_str);
      std::vector<harness::SyntheticSet> mixed_sets;
      for (const auto& s : sets) {
        if (s.role == corpus::SetRole::auxiliary || !s.is_member) {
          mixed_sets.push_back(s);
          continue;
        }
        harness::SyntheticSet member_pool = s;
        harness::SyntheticSet non_member_pool =
            harness::generate_synthetic(
                [&] {
                  harness::SyntheticSpec p = pool_spec;
                  p.n_member = 1;
                  p.n_non_member = 1;
                  p.n_aux = 1;
                  p.seed = derive_seed(pool_spec.seed, "mixpool:" + s.name);
                  return p;
                }())[1];
        harness::MixSpec mix{r, member_pool.original.size()};
        auto mixed = harness::mix_partial_membership(member_pool, non_member_pool, mix,
                                                     derive_seed(spec.seed, "mix:" + s.name));
        mixed.name = s.name + "/r=" + ratio_str;
        mixed.is_member = r > 0.0;
        mixed_sets.push_back(std::move(mixed));
      }
      for (const auto& result : harness::evaluate_methods(mixed_sets, methods, cfg)) {
        json doc = eval_result_to_json(result, false);
        doc["axis"] = "member_fraction";
        doc["axis_value"] = r;
        results_doc.push_back(doc);
        csv_rows.emplace_back("member_fraction", r, result);
      }
    }
  }

  util::write_file(out_dir + "/results.json", results_doc.dump(2) + "\n");
  harness::emit_results_csv(out_dir + "/results.csv", csv_rows);
  harness::emit_histogram_csv(out_dir + "/histogram.csv", sets);

  // p-value series for every candidate set under the SMI config.
  std::vector<inference::PValueSeries> all_series;
  for (const auto& s : sets) {
    auto series = inference::p_value_series(s.original, s.paraphrased, cfg.smi.K,
                                            derive_seed(cfg.seed, "series:" + s.name), cfg.smi);
    series.set_name = s.name;
    all_series.push_back(std::move(series));
  }
  harness::emit_series_csv(out_dir + "/series.csv", all_series);

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config = method_config_to_json(cfg);
  manifest.config["methods"] = methods;
  manifest.config["generator"] = {{"n_member", spec.n_member},
                                  {"n_non_member", spec.n_non_member},
                                  {"n_aux", spec.n_aux},
                                  {"set_size", spec.set_size},
                                  {"base_mean", spec.base_mean},
                                  {"base_sd", spec.base_sd},
                                  {"member_shift", spec.member_shift},
                                  {"non_member_shift", spec.non_member_shift},
                                  {"shift_sd", spec.shift_sd},
                                  {"candidate_mean_offset", spec.candidate_mean_offset},
                                  {"seed", spec.seed}};
  manifest.config["aux_designation"] = "round_robin";
  if (!input.empty()) manifest.add_input(input);
  manifest.write(out_dir + "/manifest.json");

  for (const auto& doc : results_doc) {
    if (!doc.contains("axis")) {
      std::cout << doc["method"].get<std::string>() << ": F1 " << doc["f1"].get<double>()
                << " (recall " << doc["recall"].get<double>() << ", precision "
                << doc["precision"].get<double>() << ")\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset-level membership inference auditing via self-comparison"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // prepare
  std::string prep_input, prep_mode = "text", prep_out = ".";
  std::size_t prep_budget = 150, prep_min_suffix = 10;
  auto* prepare = app.add_subcommand("prepare", "Truncate, sentence-split and half-split samples");
  prepare->add_option("--input", prep_input)->required();
  prepare->add_option("--mode", prep_mode)->check(CLI::IsMember({"text", "vqa"}));
  prepare->add_option("--budget", prep_budget);
  prepare->add_option("--min-suffix", prep_min_suffix);
  prepare->add_option("--out", prep_out)->required();

  // paraphrase
  std::string para_input, para_backend, para_model, para_out = ".", para_cache;
  double para_temp = 0.7, para_lo = 0.5, para_hi = 2.0;
  int para_attempts = 3, para_inflight = 4;
  auto* para = app.add_subcommand("paraphrase", "Paraphrase sample suffixes via a backend");
  para->add_option("--input", para_input)->required();
  para->add_option("--backend", para_backend)->required();
  para->add_option("--model", para_model)->required();
  para->add_option("--out", para_out)->required();
  para->add_option("--temperature", para_temp);
  para->add_option("--max-attempts", para_attempts);
  para->add_option("--ratio-low", para_lo);
  para->add_option("--ratio-high", para_hi);
  para->add_option("--max-in-flight", para_inflight);
  para->add_option("--cache", para_cache);

  // score
  std::string score_input, score_backend, score_model, score_capability = "full";
  std::string score_out = ".", score_variants = "both", score_cache, score_prompt;
  double score_fallback = 9.2103;
  int score_inflight = 4;
  bool score_partial = false;
  bool score_top_logprobs = false;
  auto* score = app.add_subcommand("score", "Obtain per-token logprobs and A-NLL metrics");
  score->add_option("--input", score_input)->required();
  score->add_option("--backend", score_backend)->required();
  score->add_option("--model", score_model)->required();
  score->add_option("--capability", score_capability)
      ->check(CLI::IsMember({"full", "predicted_only"}));
  score->add_option("--fallback-nll", score_fallback);
  score->add_option("--out", score_out)->required();
  score->add_option("--variants", score_variants)
      ->check(CLI::IsMember({"original", "paraphrased", "both"}));
  score->add_option("--max-in-flight", score_inflight);
  score->add_flag("--allow-partial", score_partial);
  score->add_option("--cache", score_cache);
  score->add_option("--prompt-template", score_prompt)
      ->default_val(kDefaultCompletionPrompt);
  score->add_flag("--use-top-logprobs", score_top_logprobs);

  // infer
  std::string infer_candidate, infer_aux, infer_report = "verdict.json", infer_csv;
  std::string infer_cand_name = "candidate", infer_aux_name = "aux", infer_model;
  int infer_K = 10;
  double infer_eps1 = 0.01, infer_eps2 = 10.0, infer_switch = 8.0;
  bool infer_paired = false;
  std::uint64_t infer_seed = 0;
  auto* infer = app.add_subcommand("infer", "Self-comparison membership decision");
  infer->add_option("--candidate-scores", infer_candidate)->required();
  infer->add_option("--aux-scores", infer_aux)->required();
  infer->add_option("--K", infer_K);
  infer->add_option("--eps1", infer_eps1);
  infer->add_option("--eps2", infer_eps2);
  infer->add_flag("--paired", infer_paired);
  infer->add_option("--asymptotic-switch", infer_switch);
  infer->add_option("--seed", infer_seed);
  infer->add_option("--report", infer_report)->required();
  infer->add_option("--csv", infer_csv);
  infer->add_option("--candidate-name", infer_cand_name);
  infer->add_option("--aux-name", infer_aux_name);
  infer->add_option("--model", infer_model);

  // baseline
  std::string base_method, base_candidate, base_aux, base_prepared;
  std::string base_report = "baseline.json", base_set_name = "candidate", base_model;
  double base_percentile = 45.0, base_alpha = 0.01, base_mink = 20.0;
  auto* baseline = app.add_subcommand("baseline", "Comparison methods (anll/mink/zlib/ddi)");
  baseline->add_option("--method", base_method)->required();
  baseline->add_option("--candidate-scores", base_candidate)->required();
  baseline->add_option("--aux-scores", base_aux)->required();
  baseline->add_option("--prepared", base_prepared);
  baseline->add_option("--percentile", base_percentile);
  baseline->add_option("--alpha", base_alpha);
  baseline->add_option("--mink-k", base_mink);
  baseline->add_option("--report", base_report)->required();
  baseline->add_option("--set-name", base_set_name);
  baseline->add_option("--model", base_model);

  // synth
  std::string synth_spec, synth_out = ".";
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic benchmark");
  synth->add_option("--spec", synth_spec);
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--seed", synth_seed);

  // evaluate
  std::string eval_input, eval_spec, eval_methods, eval_out = ".";
  std::string eval_ablate_n, eval_ablate_margins, eval_mix;
  std::optional<std::uint64_t> eval_seed;
  auto* evaluate = app.add_subcommand("evaluate", "Run methods over a benchmark with F1/recall/precision");
  evaluate->add_option("--input", eval_input);
  evaluate->add_option("--spec", eval_spec);
  evaluate->add_option("--methods", eval_methods);
  evaluate->add_option("--out", eval_out)->required();
  evaluate->add_option("--seed", eval_seed);
  evaluate->add_option("--ablate-n", eval_ablate_n);
  evaluate->add_option("--ablate-margins", eval_ablate_margins);
  evaluate->add_option("--mix-ratios", eval_mix);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInput;
  }

  try {
    if (prepare->parsed()) {
      return cmd_prepare(prep_input, prep_mode, prep_budget, prep_min_suffix, prep_out);
    }
    if (para->parsed()) {
      return cmd_paraphrase(para_input, para_backend, para_model, para_out, para_temp,
                            para_attempts, para_lo, para_hi, para_inflight, para_cache);
    }
    if (score->parsed()) {
      return cmd_score(score_input, score_backend, score_model, score_capability,
                       score_fallback, score_out, score_variants, score_inflight, score_partial,
                       score_cache, score_prompt, score_top_logprobs);
    }
    if (infer->parsed()) {
      return cmd_infer(infer_candidate, infer_aux, infer_K, infer_eps1, infer_eps2,
                       infer_paired, infer_switch, infer_seed, infer_report, infer_csv,
                       infer_cand_name, infer_aux_name, infer_model);
    }
    if (baseline->parsed()) {
      return cmd_baseline(base_method, base_candidate, base_aux, base_prepared,
                          base_percentile, base_alpha, base_mink, base_report, base_set_name,
                          base_model);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_spec, synth_out, synth_seed);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_input, eval_spec, eval_methods, eval_out, eval_seed,
                          eval_ablate_n, eval_ablate_margins, eval_mix);
    }
  } catch (const backend_error& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const capability_error& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const alignment_error& e) {
    std::cerr << "alignment error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStatistical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
