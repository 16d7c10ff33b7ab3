#pragma once

#include <stdexcept>
#include <string>

namespace smi {

// Input that cannot be parsed at all (bad JSON, bad config syntax).
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed input that violates the expected schema (missing field, bad mode).
class schema_error : public std::runtime_error {
 public:
  explicit schema_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Duplicate ids, conflicting records and similar consistency violations.
class integrity_error : public std::runtime_error {
 public:
  explicit integrity_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration values or unknown method/metric ids.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Statistical preconditions (n < 2, mismatched grids, empty lists).
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Transport or protocol failure talking to a model backend.
class backend_error : public std::runtime_error {
 public:
  backend_error(const std::string& msg, bool retryable)
      : std::runtime_error(msg), retryable(retryable) {}
  bool retryable = false;
};

// Backend cannot serve the requested capability (e.g. echo logprobs).
class capability_error : public std::runtime_error {
 public:
  explicit capability_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Returned tokens could not be aligned to the requested text.
class alignment_error : public std::runtime_error {
 public:
  explicit alignment_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace smi
