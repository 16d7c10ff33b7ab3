#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace smi::text {

// Deterministic word-plus-punctuation tokenizer used for budgeting and
// splitting only; scoring uses each backend's native token accounting.
//
// A token is a run of leading whitespace followed by either a maximal run
// of word characters (alphanumerics and any byte >= 0x80, so UTF-8
// sequences stay intact) or a single punctuation character. Trailing
// whitespace with no following core attaches to the final token, so the
// concatenation of tokens always reproduces the input exactly.
class WordTokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const;
  std::size_t count(std::string_view text) const;
  // Identifier recorded in manifests.
  static constexpr const char* id() { return "word-punct-v1"; }
};

// Splits after '.', '!' or '?' when followed by whitespace or end of text,
// unless the word ending at that character is on the abbreviation
// allowlist (matched case-insensitively, e.g. "Mr.", "Dr.", "e.g.").
// Trailing whitespace after a terminator stays with its sentence, so the
// concatenation of the segments equals the input exactly.
std::vector<std::string> segment_sentences(std::string_view text);

// The allowlist consulted by segment_sentences.
const std::vector<std::string>& abbreviation_allowlist();

}  // namespace smi::text
