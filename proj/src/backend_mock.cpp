#include <cmath>
#include <sstream>

#include "smi/backend.hpp"
#include "smi/errors.hpp"
#include "smi/rng.hpp"
#include "smi/text.hpp"

namespace smi::backend {

namespace {

// Parses "key=val&key=val" into pairs; values stay strings.
std::vector<std::pair<std::string, std::string>> parse_params(const std::string& query) {
  std::vector<std::pair<std::string, std::string>> params;
  std::stringstream ss(query);
  std::string item;
  while (std::getline(ss, item, '&')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      params.emplace_back(item, "");
    } else {
      params.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
  }
  return params;
}

}  // namespace

MockConfig parse_mock_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("mock:", 0) != 0) {
    throw config_error("not a mock endpoint: " + endpoint);
  }
  std::string rest = endpoint.substr(5);
  std::string kind = rest;
  std::string query;
  if (const auto q = rest.find('?'); q != std::string::npos) {
    kind = rest.substr(0, q);
    query = rest.substr(q + 1);
  }

  MockConfig cfg;
  if (kind == "const" || kind.empty()) {
    cfg.rule = MockConfig::LogprobRule::constant;
  } else if (kind == "uniform") {
    cfg.rule = MockConfig::LogprobRule::uniform_vocab;
  } else if (kind == "hash") {
    cfg.rule = MockConfig::LogprobRule::hashed;
  } else {
    throw config_error("unknown mock kind \"" + kind + "\"");
  }

  for (const auto& [key, value] : parse_params(query)) {
    if (key == "logprob") {
      cfg.const_logprob = std::stod(value);
    } else if (key == "vocab") {
      cfg.vocab_size = std::stod(value);
    } else if (key == "lo") {
      cfg.hash_lo = std::stod(value);
    } else if (key == "hi") {
      cfg.hash_hi = std::stod(value);
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "match") {
      if (value == "always") {
        cfg.match = MockConfig::MatchRule::always;
      } else if (value == "never") {
        cfg.match = MockConfig::MatchRule::never;
      } else {
        cfg.match = MockConfig::MatchRule::probability;
        cfg.match_probability = std::stod(value);
      }
    } else if (key == "paraphrase") {
      if (value == "reverse") {
        cfg.paraphrase = MockConfig::ParaphraseStyle::reverse_words;
      } else if (value == "echo") {
        cfg.paraphrase = MockConfig::ParaphraseStyle::echo;
      } else {
        cfg.paraphrase = MockConfig::ParaphraseStyle::fixed;
        cfg.fixed_reply = value;
      }
    } else {
      throw config_error("unknown mock parameter \"" + key + "\"");
    }
  }
  if (cfg.const_logprob > 0.0) throw config_error("mock logprob must be <= 0");
  return cfg;
}

double MockBackend::token_logprob(const EchoRequest& req, std::size_t position,
                                  const std::string& token) const {
  switch (cfg_.rule) {
    case MockConfig::LogprobRule::constant:
      return cfg_.const_logprob;
    case MockConfig::LogprobRule::uniform_vocab:
      return -std::log(cfg_.vocab_size);
    case MockConfig::LogprobRule::hashed: {
      std::uint64_t h = fnv1a64(req.sample_id);
      h = fnv1a64(req.variant, h);
      h = fnv1a64(token, h);
      h = splitmix64(h ^ splitmix64(cfg_.seed) ^ position);
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      return cfg_.hash_lo + u * (cfg_.hash_hi - cfg_.hash_lo);
    }
  }
  return cfg_.const_logprob;
}

EchoResponse MockBackend::score_echo(const EchoRequest& req) {
  count_request();
  // The mock's "native tokenizer" is the preparation tokenizer.
  const std::string prompt = req.prefix_text + req.scored_text;
  text::WordTokenizer tok;
  EchoResponse resp;
  std::size_t offset = 0;
  std::size_t position = 0;
  for (const std::string& token : tok.tokenize(prompt)) {
    EchoToken et;
    et.token = token;
    et.offset = offset;
    et.logprob = token_logprob(req, position, token);
    offset += token.size();
    ++position;
    resp.tokens.push_back(std::move(et));
  }
  resp.prompt_char_base = 0;
  return resp;
}

PredictedToken MockBackend::predict_next(const PredictRequest& req) {
  count_request();
  if (next_prediction_ < scripted_predictions_.size()) {
    return scripted_predictions_[next_prediction_++];
  }
  bool match = false;
  switch (cfg_.match) {
    case MockConfig::MatchRule::always:
      match = true;
      break;
    case MockConfig::MatchRule::never:
      match = false;
      break;
    case MockConfig::MatchRule::probability: {
      std::uint64_t h = fnv1a64(req.sample_id);
      h = splitmix64(h ^ splitmix64(cfg_.seed + 0x9e37) ^ req.step);
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      match = u < cfg_.match_probability;
      break;
    }
  }
  EchoRequest score_req;
  score_req.sample_id = req.sample_id;
  score_req.variant = "predict";
  PredictedToken out;
  if (match) {
    out.token = req.target_hint;
    out.logprob = token_logprob(score_req, req.step, req.target_hint);
  } else {
    out.token = req.target_hint + "~miss";
    out.logprob = token_logprob(score_req, req.step, out.token);
  }
  return out;
}

std::string MockBackend::complete_chat(const ChatRequest& req) {
  count_request();
  if (next_reply_ < scripted_replies_.size()) {
    return scripted_replies_[next_reply_++];
  }
  switch (cfg_.paraphrase) {
    case MockConfig::ParaphraseStyle::echo:
      return req.user_text;
    case MockConfig::ParaphraseStyle::fixed:
      return cfg_.fixed_reply;
    case MockConfig::ParaphraseStyle::reverse_words:
      break;
  }
  // Deterministic rewording: reverse the word order, keep the token text.
  std::vector<std::string> words;
  std::stringstream ss(req.user_text);
  std::string w;
  while (ss >> w) words.push_back(w);
  std::string out;
  for (auto it = words.rbegin(); it != words.rend(); ++it) {
    if (!out.empty()) out += ' ';
    out += *it;
  }
  return out;
}

}  // namespace smi::backend
