#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smi::backend {

enum class Capability { full_vocab_logprobs, predicted_token_only };

// Where scores come from. Endpoint schemes:
//   http://, https://  OpenAI-compatible completions / chat-completions
//   file:PATH          precomputed per-token logprobs (JSONL)
//   mock:KIND?params   seeded, scriptable test backend
struct BackendDescriptor {
  std::string endpoint;
  std::string model_id;
  Capability capability = Capability::full_vocab_logprobs;
  int max_in_flight = 4;
  std::string prompt_template;  // chat-style completion prompt (predicted-only)
  bool use_top_logprobs = false;  // use top-k alternatives when the target appears there
  int top_logprobs = 5;
  double requests_per_second = 0.0;  // 0 disables rate limiting
  std::string api_key_env = "MODEL_API_KEY";
};

struct EchoToken {
  std::string token;
  std::optional<double> logprob;  // absent for the first prompt token
  std::size_t offset = 0;         // char offset into the sent prompt
};

struct EchoRequest {
  std::string model;
  std::string sample_id;
  std::string variant;      // "original" | "paraphrased"
  std::string prefix_text;  // verbatim prefix (may be empty for vqa)
  std::string scored_text;  // suffix or paraphrased suffix
  std::string question;     // vqa conditioning, transmitted unchanged
  std::string image_ref;    // opaque passthrough
};

struct EchoResponse {
  std::vector<EchoToken> tokens;
  // Char offset where prefix_text begins within the sent prompt (anything
  // before it is conditioning context such as the vqa question).
  std::size_t prompt_char_base = 0;
  // File backends return positions directly instead of offsets:
  // (per-position logprobs, 1-based split index).
  std::optional<std::pair<std::vector<double>, std::size_t>> positioned;
};

struct PredictRequest {
  std::string model;
  std::string prompt;       // full chat content for this step
  std::string image_ref;
  // Hint consumed only by mock backends so scripted matching behaviour can
  // be expressed; HTTP backends never transmit it.
  std::string target_hint;
  std::string sample_id;
  std::size_t step = 0;
};

struct PredictedToken {
  std::string token;
  double logprob = 0.0;
  bool empty = false;  // model produced no output
  std::vector<std::pair<std::string, double>> top_logprobs;
};

struct ChatRequest {
  std::string model;
  std::string prompt;     // full instruction sent to chat backends
  std::string user_text;  // the raw text being rewritten (mock backends use this)
  double temperature = 0.7;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Full-vocab echo scoring of prefix+scored_text.
  virtual EchoResponse score_echo(const EchoRequest& req) = 0;

  // Single next-token prediction with its logprob.
  virtual PredictedToken predict_next(const PredictRequest& req) = 0;

  // Free-text chat completion (paraphrase stage).
  virtual std::string complete_chat(const ChatRequest& req) = 0;

  std::size_t request_count() const { return requests_.load(); }

 protected:
  void count_request() { requests_.fetch_add(1); }

 private:
  std::atomic<std::size_t> requests_{0};
};

// Builds a backend from the descriptor's endpoint scheme.
std::unique_ptr<Backend> make_backend(const BackendDescriptor& desc);

// Mock backend, also constructible directly for scripted tests.
struct MockConfig {
  enum class LogprobRule { constant, uniform_vocab, hashed };
  LogprobRule rule = LogprobRule::constant;
  double const_logprob = -1.0;   // constant rule
  double vocab_size = 4.0;       // uniform rule: logprob = -ln(vocab)
  double hash_lo = -4.0;         // hashed rule: uniform in [lo, hi)
  double hash_hi = 0.0;
  std::uint64_t seed = 0;
  enum class MatchRule { always, never, probability };
  MatchRule match = MatchRule::always;
  double match_probability = 1.0;
  enum class ParaphraseStyle { reverse_words, echo, fixed };
  ParaphraseStyle paraphrase = ParaphraseStyle::reverse_words;
  std::string fixed_reply;
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockConfig cfg) : cfg_(cfg) {}

  EchoResponse score_echo(const EchoRequest& req) override;
  PredictedToken predict_next(const PredictRequest& req) override;
  std::string complete_chat(const ChatRequest& req) override;

  // Queue an explicit reply for the next predict_next / complete_chat call;
  // queued replies win over the configured rules.
  void script_prediction(PredictedToken token) { scripted_predictions_.push_back(std::move(token)); }
  void script_chat_reply(std::string reply) { scripted_replies_.push_back(std::move(reply)); }

 private:
  double token_logprob(const EchoRequest& req, std::size_t position, const std::string& token) const;

  MockConfig cfg_;
  std::vector<PredictedToken> scripted_predictions_;
  std::vector<std::string> scripted_replies_;
  std::size_t next_prediction_ = 0;
  std::size_t next_reply_ = 0;
};

MockConfig parse_mock_endpoint(const std::string& endpoint);

}  // namespace smi::backend
