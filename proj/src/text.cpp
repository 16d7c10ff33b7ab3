#include "smi/text.hpp"

#include <algorithm>
#include <cctype>

#include "smi/errors.hpp"

namespace smi::text {
namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::vector<std::string> WordTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const std::size_t start = i;
    while (i < n && is_space(text[i])) ++i;
    if (i == n) {
      // Trailing whitespace: attach to the last token, or keep as a lone
      // token when the input is whitespace only.
      if (!tokens.empty()) {
        tokens.back().append(text.substr(start));
      } else {
        tokens.emplace_back(text.substr(start));
      }
      break;
    }
    if (is_word_char(text[i])) {
      while (i < n && is_word_char(text[i])) ++i;
    } else {
      ++i;  // single punctuation character
    }
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::size_t WordTokenizer::count(std::string_view text) const {
  return tokenize(text).size();
}

const std::vector<std::string>& abbreviation_allowlist() {
  static const std::vector<std::string> list = {
      "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "sr.",   "jr.",
      "st.",   "mt.",   "no.",   "fig.",  "eq.",   "vs.",   "etc.",
      "e.g.",  "i.e.",  "cf.",   "al.",   "approx.", "inc.", "ltd.",
      "co.",   "corp.", "u.s.",  "u.k.",  "ph.d.",
  };
  return list;
}

std::vector<std::string> segment_sentences(std::string_view text) {
  if (text.empty()) throw domain_error("segment_sentences: text is empty");
  const auto& abbrevs = abbreviation_allowlist();

  std::vector<std::string> segments;
  std::size_t seg_start = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_terminator(text[i]) || (i + 1 < n && !is_space(text[i + 1]))) {
      ++i;
      continue;
    }
    // Candidate boundary: terminator followed by whitespace or end of text.
    // Reject it when the word ending here is a known abbreviation.
    std::size_t word_start = i + 1;
    while (word_start > seg_start && !is_space(text[word_start - 1])) --word_start;
    const std::string word = lower(text.substr(word_start, i + 1 - word_start));
    if (std::find(abbrevs.begin(), abbrevs.end(), word) != abbrevs.end()) {
      ++i;
      continue;
    }
    // The sentence owns the terminator and any whitespace that follows it.
    std::size_t end = i + 1;
    while (end < n && is_space(text[end])) ++end;
    segments.emplace_back(text.substr(seg_start, end - seg_start));
    seg_start = end;
    i = end;
  }
  if (seg_start < n) segments.emplace_back(text.substr(seg_start));
  return segments;
}

}  // namespace smi::text
