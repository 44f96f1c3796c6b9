#include "engage/text.hpp"

namespace engage::text {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'' ||
         c >= 0x80;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  bool has_alnum = false;
  auto flush = [&] {
    if (has_alnum) tokens.push_back(cur);
    cur.clear();
    has_alnum = false;
  };
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
      if (c != '\'') has_alnum = true;
      cur.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::size_t count_sentences(std::string_view text) {
  std::size_t sentences = 0;
  bool chunk_has_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c) && c != '\'') chunk_has_word = true;
    bool terminator = c == '.' || c == '?' || c == '!';
    if (terminator && i + 1 < text.size()) {
      char next = text[i + 1];
      if (next == ' ' || next == '\t' || next == '\n' || next == '\r') {
        if (chunk_has_word) ++sentences;
        chunk_has_word = false;
      }
    }
  }
  if (chunk_has_word) ++sentences;
  return sentences;
}

int count_syllables(std::string_view word) {
  std::string w;
  for (char c : word)
    if (c != '\'') w.push_back(c);
  int groups = 0;
  bool in_vowel = false;
  for (char c : w) {
    bool v = is_vowel(c);
    if (v && !in_vowel) ++groups;
    in_vowel = v;
  }
  // Silent final "e" ("make"), but not "-le" after a consonant ("table") or "-ee".
  std::size_t n = w.size();
  if (groups > 1 && n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2])) {
    bool consonant_le = w[n - 2] == 'l' && n >= 3 && !is_vowel(w[n - 3]);
    if (!consonant_le) --groups;
  }
  return groups < 1 ? 1 : groups;
}

}  // namespace engage::text
