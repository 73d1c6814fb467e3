#pragma once

#include <string_view>

namespace stap {

// Sentences end at a run of . ! or ? (optionally followed by closing quotes or
// brackets) that is followed by whitespace or the end of the text. Decimals
// like 3.5 and anything inside `backticks` never end a sentence. Trailing text
// without terminal punctuation counts as one more sentence. Blank text is 0.
int count_sentences(std::string_view text);

} // namespace stap
