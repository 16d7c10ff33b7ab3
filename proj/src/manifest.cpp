#include "smi/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "smi/errors.hpp"
#include "smi/rng.hpp"
#include "smi/util.hpp"

namespace smi {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void RunManifest::add_backend(const backend::BackendDescriptor& desc) {
  backends.push_back(json{
      {"endpoint", desc.endpoint},
      {"model_id", desc.model_id},
      {"capability", desc.capability == backend::Capability::full_vocab_logprobs
                         ? "full_vocab_logprobs"
                         : "predicted_token_only"},
      {"max_in_flight", desc.max_in_flight},
      {"prompt_template", desc.prompt_template},
      {"use_top_logprobs", desc.use_top_logprobs},
      {"api_key_env", desc.api_key_env},  // name only, never the secret
  });
}

void RunManifest::add_input(const std::string& path) {
  const std::string bytes = util::read_file(path);
  inputs.push_back(json{
      {"path", path},
      {"bytes", bytes.size()},
      {"fnv1a64", hex64(fnv1a64(bytes))},
  });
}

std::string RunManifest::config_hash() const {
  return hex64(fnv1a64(config.dump()));
}

void RunManifest::write(const std::string& path) const {
  json doc = {
      {"tool_version", kToolVersion},
      {"command", command},
      {"written_at", iso_now()},
      {"config", config},
      {"config_hash", config_hash()},
      {"backends", backends},
      {"inputs", inputs},
  };
  doc["run_id"] = hex64(fnv1a64(doc.dump()));
  util::write_file(path, doc.dump(2) + "\n");
}

json smi_config_to_json(const inference::SmiConfig& cfg) {
  return json{
      {"K", cfg.K},
      {"epsilon_1", cfg.epsilon_1},
      {"epsilon_2", cfg.epsilon_2},
      {"asymptotic_switch", cfg.asymptotic_switch},
      {"paired", cfg.paired},
  };
}

json verdict_to_json(const inference::Verdict& verdict,
                     const inference::PValueSeries& candidate_series,
                     const inference::PValueSeries& aux_series, const std::string& method) {
  json points = json::array();
  for (const auto& [n, log_p] : candidate_series.points) {
    points.push_back(json{{"n", n}, {"log_p", log_p}});
  }
  json aux_points = json::array();
  for (const auto& [n, log_p] : aux_series.points) {
    aux_points.push_back(json{{"n", n}, {"log_p", log_p}});
  }
  return json{
      {"method", method},
      {"set_name", verdict.set_name},
      {"decision", verdict.decision == inference::Decision::member ? "member" : "non_member"},
      {"beta", verdict.beta},
      {"beta_aux", verdict.beta_aux},
      {"log_p", verdict.log_p_K},
      {"log_p_aux", verdict.log_p_K_aux},
      {"criteria", json{{"slope_met", verdict.slope_met}, {"pvalue_met", verdict.pvalue_met}}},
      {"points", points},
      {"aux_points", aux_points},
      {"config", smi_config_to_json(verdict.config)},
  };
}

json eval_result_to_json(const harness::EvalResult& result, bool include_per_set) {
  json doc = {
      {"method", result.method},
      {"f1", result.f1},
      {"recall", result.recall},
      {"precision", result.precision},
      {"confusion",
       json{{"tp", result.true_positives},
            {"fp", result.false_positives},
            {"fn", result.false_negatives},
            {"tn", result.true_negatives}}},
  };
  if (include_per_set) {
    json per_set = json::array();
    for (const auto& v : result.per_set) {
      per_set.push_back(json{{"set_name", v.set_name},
                             {"is_member", v.is_member},
                             {"predicted_member", v.predicted_member},
                             {"beta", v.beta},
                             {"beta_aux", v.beta_aux},
                             {"log_p", v.log_p},
                             {"log_p_aux", v.log_p_aux}});
    }
    doc["per_set_verdicts"] = per_set;
  }
  return doc;
}

}  // namespace smi
