#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace engage::text {

/// Maximal runs of letters, digits and apostrophes, ASCII-lowercased. Bytes >= 0x80 count as
/// letters so UTF-8 words stay whole. Runs made only of apostrophes are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Sentences split on [.?!] followed by whitespace; chunks without a word do not count.
/// Returns at least 1 whenever the text contains a word, 0 otherwise.
std::size_t count_sentences(std::string_view text);

/// Vowel-group heuristic: maximal runs of [aeiouy], minus a silent trailing "e", minimum 1.
int count_syllables(std::string_view word);

}  // namespace engage::text
