#include "stap/sentences.hpp"

#include <cctype>

namespace stap {

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

} // namespace

int count_sentences(std::string_view text) {
    int count = 0;
    bool in_code = false;
    bool pending = false;  // content seen since the last boundary
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '`') {
            in_code = !in_code;
            pending = true;
            ++i;
            continue;
        }
        if (in_code || !is_terminal(c)) {
            if (!is_space(c)) pending = true;
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_terminal(text[j])) ++j;
        while (j < text.size() && is_closer(text[j])) ++j;
        if (j == text.size() || is_space(text[j])) {
            if (pending) ++count;
            pending = false;
        } else {
            pending = true;
        }
        i = j;
    }
    if (pending) ++count;
    return count;
}

} // namespace stap
