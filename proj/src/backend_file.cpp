#include <map>

#include "smi/backend.hpp"
#include "smi/errors.hpp"
#include "smi/jsonl.hpp"

namespace smi::backend {

// Reads precomputed per-token logprobs:
//   {"sample_id": str, "variant": str, "logprobs": [real...], "split_index"?: int}
// split_index defaults to 1 (every position belongs to the scored suffix).
class FileBackend : public Backend {
 public:
  explicit FileBackend(const std::string& path) : path_(path) {
    jsonl::for_each_line(path, [&](const nlohmann::json& obj, std::size_t line_no) {
      const std::string where = path + ":" + std::to_string(line_no);
      if (!obj.contains("sample_id") || !obj.contains("variant") || !obj.contains("logprobs")) {
        throw schema_error(where + ": needs sample_id, variant, logprobs");
      }
      Entry e;
      for (const auto& v : obj["logprobs"]) {
        const double lp = v.get<double>();
        if (lp > 0.0) throw schema_error(where + ": logprob > 0");
        e.logprobs.push_back(lp);
      }
      e.split_index = obj.value("split_index", std::size_t{1});
      const std::string key =
          obj["sample_id"].get<std::string>() + "\x1f" + obj["variant"].get<std::string>();
      entries_[key] = std::move(e);
    });
  }

  EchoResponse score_echo(const EchoRequest& req) override {
    count_request();
    const auto it = entries_.find(req.sample_id + "\x1f" + req.variant);
    if (it == entries_.end()) {
      throw backend_error("no precomputed logprobs for sample \"" + req.sample_id +
                              "\" variant \"" + req.variant + "\" in " + path_,
                          false);
    }
    EchoResponse resp;
    resp.positioned = {it->second.logprobs, it->second.split_index};
    return resp;
  }

  PredictedToken predict_next(const PredictRequest&) override {
    throw capability_error("file backends cannot serve predicted-token-only scoring");
  }

  std::string complete_chat(const ChatRequest&) override {
    throw capability_error("file backends cannot serve chat completions");
  }

 private:
  struct Entry {
    std::vector<double> logprobs;
    std::size_t split_index = 1;
  };
  std::map<std::string, Entry> entries_;
  std::string path_;
};

std::unique_ptr<Backend> make_file_backend(const std::string& path) {
  return std::make_unique<FileBackend>(path);
}

}  // namespace smi::backend
