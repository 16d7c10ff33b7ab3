#pragma once

#include <string>

#include "json.hpp"
#include "smi/backend.hpp"
#include "smi/harness.hpp"
#include "smi/inference.hpp"

namespace smi {

inline constexpr const char* kToolVersion = "0.1.0";

// Run metadata: every config-pinned decision that affects verdicts, input
// fingerprints, and redacted backend descriptors. Secrets never appear;
// only the names of the environment variables that held them.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json backends = nlohmann::json::array();
  nlohmann::json inputs = nlohmann::json::array();

  void add_backend(const backend::BackendDescriptor& desc);
  void add_input(const std::string& path);

  // Adds run_id, timestamps, tool version and the config hash, then writes.
  void write(const std::string& path) const;

  std::string config_hash() const;
};

nlohmann::json smi_config_to_json(const inference::SmiConfig& cfg);
nlohmann::json verdict_to_json(const inference::Verdict& verdict,
                               const inference::PValueSeries& candidate_series,
                               const inference::PValueSeries& aux_series,
                               const std::string& method = "smi");
nlohmann::json eval_result_to_json(const harness::EvalResult& result, bool include_per_set = true);

}  // namespace smi
