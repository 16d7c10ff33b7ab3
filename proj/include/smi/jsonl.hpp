#pragma once

#include <functional>
#include <string>

#include "json.hpp"

namespace smi::jsonl {

// Calls fn(parsed_object, line_number) for every non-empty line; raises
// parse_error with the offending line number on malformed JSON.
void for_each_line(const std::string& path,
                   const std::function<void(const nlohmann::json&, std::size_t)>& fn);

// Appends one compact JSON object per line.
class Writer {
 public:
  explicit Writer(const std::string& path, bool append = false);
  void write(const nlohmann::json& obj);
  ~Writer();

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace smi::jsonl
