#include "smi/jsonl.hpp"

#include <fstream>

#include "smi/errors.hpp"

namespace smi::jsonl {

void for_each_line(const std::string& path,
                   const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw parse_error(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    fn(obj, line_no);
  }
}

struct Writer::Impl {
  std::ofstream out;
  std::string path;
};

Writer::Writer(const std::string& path, bool append) : impl_(new Impl) {
  impl_->path = path;
  impl_->out.open(path, append ? std::ios::app : std::ios::trunc);
  if (!impl_->out) {
    std::string msg = "cannot open " + path + " for writing";
    delete impl_;
    throw parse_error(msg);
  }
}

void Writer::write(const nlohmann::json& obj) {
  impl_->out << obj.dump() << '\n';
}

Writer::~Writer() {
  impl_->out.flush();
  delete impl_;
}

}  // namespace smi::jsonl
