#include "stap/python_syntax.hpp"

#include "stap/error.hpp"
#include "stap/process.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

namespace stap {

namespace {

struct PySyntaxError {
    std::string message;
    int line;
};

// ---------------------------------------------------------------------------
// Tokenizer

enum class Tok { Name, Number, String, Op, Newline, Indent, Dedent, End };

struct Token {
    Tok type;
    std::string text;
    int line;
};

const std::unordered_set<std::string_view>& keywords() {
    static const std::unordered_set<std::string_view> kw = {
        "False", "None",   "True",    "and",      "as",     "assert", "async", "await",
        "break", "class",  "continue", "def",     "del",    "elif",   "else",  "except",
        "finally", "for",  "from",    "global",   "if",     "import", "in",    "is",
        "lambda", "nonlocal", "not",  "or",       "pass",   "raise",  "return", "try",
        "while", "with",   "yield"};
    return kw;
}

bool is_keyword(std::string_view s) { return keywords().count(s) != 0; }

// Decodes one UTF-8 code point starting at `pos`; returns 0xFFFD on bad input.
std::uint32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len) {
    auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t i) -> int {
        if (pos + i >= s.size()) return -1;
        auto b = static_cast<unsigned char>(s[pos + i]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) { len = 1; return b0; }
    if ((b0 & 0xE0) == 0xC0) {
        int c1 = cont(1);
        len = c1 < 0 ? 1 : 2;
        return c1 < 0 ? 0xFFFD : ((b0 & 0x1Fu) << 6) | static_cast<std::uint32_t>(c1);
    }
    if ((b0 & 0xF0) == 0xE0) {
        int c1 = cont(1), c2 = cont(2);
        if (c1 < 0 || c2 < 0) { len = 1; return 0xFFFD; }
        len = 3;
        return ((b0 & 0x0Fu) << 12) | (static_cast<std::uint32_t>(c1) << 6) | static_cast<std::uint32_t>(c2);
    }
    if ((b0 & 0xF8) == 0xF0) {
        int c1 = cont(1), c2 = cont(2), c3 = cont(3);
        if (c1 < 0 || c2 < 0 || c3 < 0) { len = 1; return 0xFFFD; }
        len = 4;
        return ((b0 & 0x07u) << 18) | (static_cast<std::uint32_t>(c1) << 12) |
               (static_cast<std::uint32_t>(c2) << 6) | static_cast<std::uint32_t>(c3);
    }
    len = 1;
    return 0xFFFD;
}

// Approximation of XID_Continue for non-ASCII code points: letters and marks
// are accepted, the punctuation and symbol blocks students paste by accident
// (smart quotes, non-breaking spaces, arrows, emoji) are rejected.
bool non_ascii_identifier_char(std::uint32_t cp) {
    if (cp == 0xFFFD) return false;
    if (cp >= 0x80 && cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if (cp >= 0xFE10 && cp <= 0xFE6F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
    return true;
}

bool ascii_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Tokenizer {
public:
    Tokenizer(std::string_view src, int base_line = 1) : src_(src), line_(base_line) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        alt_indents_.push_back(0);
        bool at_line_start = true;
        while (true) {
            if (at_line_start && brackets_.empty()) {
                if (!handle_indentation()) break;
                at_line_start = false;
            }
            skip_blanks();
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
                continue;
            }
            if (c == '\n' || c == '\r') {
                consume_newline();
                if (brackets_.empty()) {
                    emit(Tok::Newline, "");
                    at_line_start = true;
                }
                ++line_;
                continue;
            }
            if (c == '\\') {
                ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '\n' || src_[pos_] == '\r')) {
                    consume_newline();
                    ++line_;
                    if (pos_ >= src_.size()) fail("unexpected EOF while parsing");
                    continue;
                }
                fail("unexpected character after line continuation character");
            }
            if (ascii_ident_start(c) || static_cast<unsigned char>(c) >= 0x80) {
                lex_name_or_prefixed_string();
                continue;
            }
            if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
                lex_number();
                continue;
            }
            if (c == '"' || c == '\'') {
                lex_string(std::string());
                continue;
            }
            lex_operator();
        }
        if (!brackets_.empty()) fail(std::string("'") + brackets_.back().first + "' was never closed",
                                     brackets_.back().second);
        if (!tokens_.empty() && tokens_.back().type != Tok::Newline &&
            tokens_.back().type != Tok::Dedent) {
            emit(Tok::Newline, "");
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            alt_indents_.pop_back();
            emit(Tok::Dedent, "");
        }
        emit(Tok::End, "");
        return std::move(tokens_);
    }

    // Used for f-string replacement fields: no indentation handling.
    std::vector<Token> run_expression() {
        brackets_.push_back({'(', line_});
        while (true) {
            skip_blanks();
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            if (c == '#') fail("f-string expression part cannot include '#'");
            if (c == '\\') fail("f-string expression part cannot include a backslash");
            if (c == '\n' || c == '\r') {
                consume_newline();
                ++line_;
                continue;
            }
            if (ascii_ident_start(c) || static_cast<unsigned char>(c) >= 0x80) {
                lex_name_or_prefixed_string();
            } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
                lex_number();
            } else if (c == '"' || c == '\'') {
                lex_string(std::string());
            } else {
                lex_operator();
            }
        }
        if (brackets_.size() != 1) fail("f-string: unmatched bracket");
        emit(Tok::End, "");
        return std::move(tokens_);
    }

private:
    [[noreturn]] void fail(const std::string& msg, int line = -1) const {
        throw PySyntaxError{msg, line < 0 ? line_ : line};
    }

    void emit(Tok t, std::string text) { tokens_.push_back(Token{t, std::move(text), line_}); }

    void skip_blanks() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f')) ++pos_;
    }

    void consume_newline() {
        if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
    }

    // Returns false at end of input.
    bool handle_indentation() {
        while (true) {
            // `alt` measures tabs as width 1; both measures must agree on
            // the block structure or the indentation is ambiguous.
            int col = 0;
            int alt = 0;
            while (pos_ < src_.size()) {
                char c = src_[pos_];
                if (c == ' ') {
                    ++col;
                    ++alt;
                } else if (c == '\t') {
                    col = (col / 8 + 1) * 8;
                    ++alt;
                } else if (c == '\f') {
                    col = 0;
                    alt = 0;
                } else {
                    break;
                }
                ++pos_;
            }
            if (pos_ >= src_.size()) return false;
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
                if (pos_ >= src_.size()) return false;
                c = src_[pos_];
            }
            if (c == '\n' || c == '\r') {
                consume_newline();
                ++line_;
                continue;
            }
            if (c == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
                // A continuation right after indentation joins the next line.
                ++pos_;
                consume_newline();
                ++line_;
                if (pos_ >= src_.size()) fail("unexpected EOF while parsing");
            }
            if (col > indents_.back()) {
                if (alt <= alt_indents_.back()) fail("inconsistent use of tabs and spaces in indentation");
                indents_.push_back(col);
                alt_indents_.push_back(alt);
                emit(Tok::Indent, "");
            } else {
                while (col < indents_.back()) {
                    indents_.pop_back();
                    alt_indents_.pop_back();
                    emit(Tok::Dedent, "");
                }
                if (col != indents_.back()) fail("unindent does not match any outer indentation level");
                if (alt != alt_indents_.back()) fail("inconsistent use of tabs and spaces in indentation");
            }
            return true;
        }
    }

    void lex_name_or_prefixed_string() {
        std::size_t start = pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (ascii_ident_start(c) || is_digit(c)) {
                ++pos_;
            } else if (static_cast<unsigned char>(c) >= 0x80) {
                std::size_t len = 1;
                std::uint32_t cp = decode_utf8(src_, pos_, len);
                if (!non_ascii_identifier_char(cp)) {
                    if (pos_ == start) fail("invalid character in identifier");
                    break;
                }
                pos_ += len;
            } else {
                break;
            }
        }
        std::string word(src_.substr(start, pos_ - start));
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
            std::string lower;
            for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            static const std::unordered_set<std::string_view> prefixes = {"r", "u", "b", "f", "br", "rb", "fr", "rf"};
            if (prefixes.count(lower) != 0) {
                lex_string(lower);
                return;
            }
        }
        emit(Tok::Name, std::move(word));
    }

    void lex_number() {
        std::size_t start = pos_;
        auto digits = [&](auto pred, bool required) {
            bool any = false;
            bool last_underscore = false;
            while (pos_ < src_.size()) {
                char c = src_[pos_];
                if (pred(c)) {
                    any = true;
                    last_underscore = false;
                } else if (c == '_' && any && !last_underscore) {
                    last_underscore = true;
                } else {
                    break;
                }
                ++pos_;
            }
            if (last_underscore) fail("invalid decimal literal");
            if (required && !any) fail("invalid number literal");
            return any;
        };
        auto dec = [](char c) { return is_digit(c); };
        bool is_float_like = false;
        if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
            std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
            char base = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_ + 1])));
            pos_ += 2;
            if (pos_ < src_.size() && src_[pos_] == '_') ++pos_;
            if (base == 'x') {
                digits([](char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }, true);
            } else if (base == 'o') {
                digits([](char c) { return c >= '0' && c <= '7'; }, true);
            } else {
                digits([](char c) { return c == '0' || c == '1'; }, true);
            }
        } else {
            bool int_part = false;
            if (src_[pos_] != '.') int_part = digits(dec, true);
            std::string_view int_text = src_.substr(start, pos_ - start);
            if (pos_ < src_.size() && src_[pos_] == '.') {
                is_float_like = true;
                ++pos_;
                if (pos_ < src_.size() && is_digit(src_[pos_])) digits(dec, true);
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t save = pos_;
                ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
                if (pos_ < src_.size() && is_digit(src_[pos_])) {
                    digits(dec, true);
                    is_float_like = true;
                } else {
                    pos_ = save;  // `0else` tokenizes as a number then a keyword
                }
            }
            if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) {
                ++pos_;
                is_float_like = true;
            }
            if (int_part && !is_float_like && int_text.size() > 1 && int_text[0] == '0') {
                for (char c : int_text) {
                    if (c != '0' && c != '_') {
                        fail("leading zeros in decimal integer literals are not permitted");
                    }
                }
            }
        }
        if (pos_ < src_.size()) {
            char c = src_[pos_];
            if (ascii_ident_start(c) || is_digit(c) || static_cast<unsigned char>(c) >= 0x80) {
                // `1if x else y` is accepted by CPython 3.10 for keyword followers.
                std::size_t e = pos_;
                while (e < src_.size() && (ascii_ident_start(src_[e]) || is_digit(src_[e]))) ++e;
                std::string_view follower = src_.substr(pos_, e - pos_);
                static const std::unordered_set<std::string_view> allowed = {"and", "else", "for", "if", "in",
                                                                              "is", "not", "or"};
                if (allowed.count(follower) == 0) fail("invalid decimal literal");
            }
        }
        emit(Tok::Number, std::string(src_.substr(start, pos_ - start)));
    }

    void lex_string(const std::string& prefix) {
        int start_line = line_;
        char q = src_[pos_];
        bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q;
        std::size_t quote_len = triple ? 3 : 1;
        pos_ += quote_len;
        std::size_t body_start = pos_;
        bool is_bytes = prefix.find('b') != std::string::npos;
        bool is_fstring = prefix.find('f') != std::string::npos;
        while (true) {
            if (pos_ >= src_.size()) {
                fail(triple ? "unterminated triple-quoted string literal" : "unterminated string literal",
                     start_line);
            }
            char c = src_[pos_];
            if (c == '\\') {
                pos_ += 1;
                if (pos_ < src_.size()) {
                    if (src_[pos_] == '\n' || src_[pos_] == '\r') {
                        consume_newline();
                        ++line_;
                    } else {
                        ++pos_;
                    }
                }
                continue;
            }
            if (c == '\n' || c == '\r') {
                if (!triple) fail("unterminated string literal", start_line);
                consume_newline();
                ++line_;
                continue;
            }
            if (is_bytes && static_cast<unsigned char>(c) >= 0x80) {
                fail("bytes can only contain ASCII literal characters");
            }
            if (c == q) {
                if (!triple) break;
                if (pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q) break;
            }
            ++pos_;
        }
        std::string_view body = src_.substr(body_start, pos_ - body_start);
        pos_ += quote_len;
        if (is_fstring) check_fstring_body(body, prefix.find('r') != std::string::npos, start_line);
        emit(Tok::String, prefix + std::string(1, q));
    }

    void check_fstring_body(std::string_view body, bool raw, int line);

    void lex_operator() {
        static const std::array<std::string_view, 4> three = {"**=", "//=", ">>=", "<<="};
        static const std::array<std::string_view, 20> two = {"**", "//", ">>", "<<", "<=", ">=", "==",
                                                              "!=", "->", "+=", "-=", "*=", "/=", "%=",
                                                              "&=", "|=", "^=", "@=", ":=", "<>"};
        std::string_view rest = src_.substr(pos_);
        if (rest.substr(0, 3) == "...") {
            pos_ += 3;
            emit(Tok::Op, "...");
            return;
        }
        for (auto op : three) {
            if (rest.substr(0, 3) == op) {
                pos_ += 3;
                emit(Tok::Op, std::string(op));
                return;
            }
        }
        for (auto op : two) {
            if (rest.substr(0, 2) == op) {
                if (op == "<>") fail("invalid syntax");
                pos_ += 2;
                emit(Tok::Op, std::string(op));
                return;
            }
        }
        char c = src_[pos_];
        static constexpr std::string_view singles = "+-*/%@&|^~<>()[]{},:.;=";
        if (singles.find(c) == std::string_view::npos) {
            fail(std::string("invalid character '") + c + "'");
        }
        if (c == '(' || c == '[' || c == '{') {
            if (brackets_.size() >= 200) fail("too many nested parentheses");
            brackets_.push_back({c, line_});
        } else if (c == ')' || c == ']' || c == '}') {
            char open = c == ')' ? '(' : c == ']' ? '[' : '{';
            if (brackets_.empty()) fail(std::string("unmatched '") + c + "'");
            if (brackets_.back().first != open) {
                fail(std::string("closing parenthesis '") + c + "' does not match opening parenthesis '" +
                     brackets_.back().first + "'");
            }
            brackets_.pop_back();
        }
        ++pos_;
        emit(Tok::Op, std::string(1, c));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_;
    std::vector<int> indents_;
    std::vector<int> alt_indents_;
    std::vector<std::pair<char, int>> brackets_;
    std::vector<Token> tokens_;
};

// ---------------------------------------------------------------------------
// Parser. Expressions are reduced to the shape information needed to check
// assignment, deletion and keyword-argument targets.

enum class Kind { Name, Attribute, Subscript, Starred, Tuple, List, Literal, Call, Other };

struct Expr {
    Kind kind = Kind::Other;
    bool parenthesized = false;
    std::vector<Expr> elts;
};

Expr make(Kind k) { return Expr{k, false, {}}; }

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    void parse_file() {
        while (peek().type != Tok::End) parse_statement();
    }

    void parse_lone_expression() {
        if (peek().type == Tok::End) fail("f-string: empty expression not allowed");
        if (at_kw("yield")) {
            parse_yield_expr();
        } else {
            parse_star_expressions(true);
        }
        if (peek().type != Tok::End) fail("f-string: invalid syntax");
    }

private:
    // --- token helpers -----------------------------------------------------
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool at_op(std::string_view op, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.type == Tok::Op && t.text == op;
    }
    bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.type == Tok::Name && t.text == kw;
    }
    bool at_name(std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.type == Tok::Name && !is_keyword(t.text);
    }
    bool accept_op(std::string_view op) {
        if (!at_op(op)) return false;
        next();
        return true;
    }
    bool accept_kw(std::string_view kw) {
        if (!at_kw(kw)) return false;
        next();
        return true;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'");
    }
    void expect_name() {
        if (!at_name()) fail("expected name");
        next();
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string where;
        if (t.type == Tok::Indent) {
            throw PySyntaxError{"unexpected indent", t.line};
        }
        if (t.type == Tok::End) where = " (at end of input)";
        throw PySyntaxError{msg + where, t.line};
    }

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : p_(p) {
            if (++p_.depth_ > 300) p_.fail("too many nested expressions");
        }
        ~DepthGuard() { --p_.depth_; }
        Parser& p_;
    };

    // --- statements --------------------------------------------------------
    void parse_statement() {
        const Token& t = peek();
        if (t.type == Tok::Indent) fail("unexpected indent");
        if (t.type == Tok::Dedent) fail("unexpected unindent");
        if (t.type == Tok::Newline) fail("invalid syntax");
        if (t.type == Tok::Name) {
            const std::string& w = t.text;
            if (w == "if") return parse_if();
            if (w == "while") return parse_while();
            if (w == "for") return parse_for();
            if (w == "try") return parse_try();
            if (w == "with") return parse_with();
            if (w == "def") return parse_def();
            if (w == "class") return parse_class();
            if (w == "async" && (at_kw("def", 1) || at_kw("for", 1) || at_kw("with", 1))) {
                next();
                if (at_kw("def")) return parse_def();
                if (at_kw("for")) return parse_for();
                return parse_with();
            }
        }
        if (at_op("@")) return parse_decorated();
        parse_simple_stmts();
    }

    void parse_simple_stmts() {
        parse_simple_stmt();
        while (accept_op(";")) {
            if (peek().type == Tok::Newline) break;
            parse_simple_stmt();
        }
        if (peek().type != Tok::Newline) fail("invalid syntax");
        next();
    }

    void parse_block() {
        expect_op(":");
        if (peek().type == Tok::Newline) {
            next();
            if (peek().type != Tok::Indent) fail("expected an indented block");
            next();
            do {
                parse_statement();
            } while (peek().type != Tok::Dedent && peek().type != Tok::End);
            if (peek().type == Tok::Dedent) next();
        } else {
            parse_simple_stmts();
        }
    }

    void parse_simple_stmt() {
        const Token& t = peek();
        if (t.type == Tok::Name) {
            const std::string w = t.text;
            if (w == "pass" || w == "break" || w == "continue") {
                next();
                return;
            }
            if (w == "return") {
                next();
                if (!at_stmt_end()) parse_star_expressions(false);
                return;
            }
            if (w == "raise") {
                next();
                if (!at_stmt_end()) {
                    parse_expression();
                    if (accept_kw("from")) parse_expression();
                }
                return;
            }
            if (w == "global" || w == "nonlocal") {
                next();
                expect_name();
                while (accept_op(",")) expect_name();
                return;
            }
            if (w == "del") {
                next();
                parse_del_targets();
                return;
            }
            if (w == "assert") {
                next();
                parse_expression();
                if (accept_op(",")) parse_expression();
                return;
            }
            if (w == "import") {
                next();
                parse_dotted_as_name();
                while (accept_op(",")) parse_dotted_as_name();
                return;
            }
            if (w == "from") return parse_from_import();
        }
        parse_expression_statement();
    }

    bool at_stmt_end() const { return peek().type == Tok::Newline || at_op(";"); }

    void parse_dotted_name() {
        expect_name();
        while (accept_op(".")) expect_name();
    }

    void parse_dotted_as_name() {
        parse_dotted_name();
        if (accept_kw("as")) expect_name();
    }

    void parse_from_import() {
        expect_kw("from");
        bool dots = false;
        while (at_op(".") || at_op("...")) {
            next();
            dots = true;
        }
        if (!at_kw("import")) {
            parse_dotted_name();
        } else if (!dots) {
            fail("invalid syntax");
        }
        expect_kw("import");
        if (accept_op("*")) return;
        auto as_name = [&] {
            expect_name();
            if (accept_kw("as")) expect_name();
        };
        if (accept_op("(")) {
            as_name();
            while (accept_op(",")) {
                if (at_op(")")) break;
                as_name();
            }
            expect_op(")");
            return;
        }
        as_name();
        while (accept_op(",")) as_name();
    }

    void parse_del_targets() {
        auto one = [&] {
            Expr e = parse_bitwise_or();
            if (!valid_del_target(e)) fail("cannot delete expression");
        };
        one();
        while (accept_op(",")) {
            if (at_stmt_end()) break;
            one();
        }
    }

    static bool is_augassign(const Token& t) {
        static const std::unordered_set<std::string_view> ops = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                                                                  "&=", "|=", "^=", ">>=", "<<=", "**="};
        return t.type == Tok::Op && ops.count(t.text) != 0;
    }

    void parse_assignment_value() {
        if (at_kw("yield")) {
            parse_yield_expr();
        } else {
            parse_star_expressions(false);
        }
    }

    void parse_expression_statement() {
        if (at_kw("yield")) {
            parse_yield_expr();
            return;
        }
        Expr first = parse_star_expressions(false);
        if (at_op(":")) {
            bool single = first.kind == Kind::Name || first.kind == Kind::Attribute || first.kind == Kind::Subscript;
            if (!single) {
                fail(first.kind == Kind::Tuple && !first.parenthesized ? "only single target (not tuple) can be annotated"
                                                                      : "illegal target for annotation");
            }
            next();
            parse_expression();
            if (accept_op("=")) parse_assignment_value();
            return;
        }
        if (is_augassign(peek())) {
            bool ok = first.kind == Kind::Name || first.kind == Kind::Attribute || first.kind == Kind::Subscript;
            if (!ok) fail("illegal expression for augmented assignment");
            next();
            parse_assignment_value();
            return;
        }
        if (at_op("=")) {
            if (!valid_target(first)) fail("cannot assign to expression");
            while (accept_op("=")) {
                if (at_kw("yield")) {
                    parse_yield_expr();
                    if (at_op("=")) fail("assignment to yield expression not possible");
                    continue;
                }
                Expr value = parse_star_expressions(false);
                if (at_op("=") && !valid_target(value)) fail("cannot assign to expression");
            }
        }
    }

    void parse_if() {
        expect_kw("if");
        parse_named_expression();
        parse_block();
        while (at_kw("elif")) {
            next();
            parse_named_expression();
            parse_block();
        }
        if (accept_kw("else")) parse_block();
    }

    void parse_while() {
        expect_kw("while");
        parse_named_expression();
        parse_block();
        if (accept_kw("else")) parse_block();
    }

    void parse_for() {
        expect_kw("for");
        parse_star_targets();
        expect_kw("in");
        parse_star_expressions(false);
        parse_block();
        if (accept_kw("else")) parse_block();
    }

    void parse_try() {
        expect_kw("try");
        parse_block();
        bool handlers = false;
        while (at_kw("except")) {
            next();
            handlers = true;
            if (!at_op(":")) {
                parse_expression();
                if (accept_kw("as")) {
                    expect_name();
                } else if (accept_op(",")) {
                    fail("multiple exception types must be parenthesized");
                }
            }
            parse_block();
        }
        if (handlers && accept_kw("else")) parse_block();
        if (accept_kw("finally")) {
            parse_block();
        } else if (!handlers) {
            fail("expected 'except' or 'finally' block");
        }
    }

    void parse_with_item() {
        parse_expression();
        if (accept_kw("as")) {
            Expr target = parse_star_target();
            if (!valid_target(target)) fail("cannot assign to expression");
            if (!at_op(",") && !at_op(")") && !at_op(":")) fail("invalid syntax");
        }
    }

    void parse_with() {
        expect_kw("with");
        if (at_op("(")) {
            std::size_t save = pos_;
            try {
                next();
                parse_with_item();
                while (accept_op(",")) {
                    if (at_op(")")) break;
                    parse_with_item();
                }
                expect_op(")");
                if (!at_op(":")) fail("invalid syntax");
                parse_block();
                return;
            } catch (const PySyntaxError&) {
                pos_ = save;
            }
        }
        parse_with_item();
        while (accept_op(",")) parse_with_item();
        parse_block();
    }

    void parse_decorated() {
        while (accept_op("@")) {
            parse_named_expression();
            if (peek().type != Tok::Newline) fail("invalid syntax");
            next();
        }
        if (at_kw("def")) return parse_def();
        if (at_kw("class")) return parse_class();
        if (at_kw("async") && at_kw("def", 1)) {
            next();
            return parse_def();
        }
        fail("invalid syntax");
    }

    void parse_def() {
        expect_kw("def");
        expect_name();
        expect_op("(");
        parse_parameters(")", true);
        expect_op(")");
        if (accept_op("->")) parse_expression();
        parse_block();
    }

    void parse_class() {
        expect_kw("class");
        expect_name();
        if (accept_op("(")) {
            if (!at_op(")")) parse_arguments();
            expect_op(")");
        }
        parse_block();
    }

    // Parameter list for `def` (annotations allowed) or `lambda`.
    void parse_parameters(std::string_view closer, bool annotations) {
        bool seen_default = false;
        bool seen_slash = false;
        bool seen_star = false;
        bool star_needs_kw = false;
        bool seen_kwargs = false;
        bool any_param = false;
        auto at_close = [&] { return closer == ")" ? at_op(")") : at_op(":"); };
        auto annotation = [&] {
            if (annotations && accept_op(":")) parse_expression();
        };
        while (!at_close()) {
            if (seen_kwargs) fail("arguments cannot follow var-keyword argument");
            if (accept_op("/")) {
                if (seen_slash) fail("/ may appear only once");
                if (seen_star) fail("/ must be ahead of *");
                if (!any_param) fail("at least one argument must precede /");
                seen_slash = true;
            } else if (accept_op("**")) {
                expect_name();
                annotation();
                seen_kwargs = true;
            } else if (accept_op("*")) {
                if (seen_star) fail("* argument may appear only once");
                seen_star = true;
                if (at_name()) {
                    next();
                    annotation();
                } else {
                    star_needs_kw = true;
                }
            } else {
                expect_name();
                annotation();
                any_param = true;
                if (accept_op("=")) {
                    parse_expression();
                    if (!seen_star) seen_default = true;
                } else if (seen_default && !seen_star) {
                    fail("non-default argument follows default argument");
                }
                if (seen_star) star_needs_kw = false;
            }
            if (!accept_op(",")) break;
            if (at_close() && star_needs_kw) fail("named arguments must follow bare *");
        }
        if (star_needs_kw) fail("named arguments must follow bare *");
        if (!at_close()) fail("invalid syntax");
    }

    // --- expressions -------------------------------------------------------
    Expr parse_star_expressions(bool allow_named) {
        Expr first = parse_star_expression(allow_named);
        if (!at_op(",")) return first;
        Expr tuple = make(Kind::Tuple);
        tuple.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (!starts_expression()) break;
            tuple.elts.push_back(parse_star_expression(allow_named));
        }
        return tuple;
    }

    Expr parse_star_expression(bool allow_named) {
        if (accept_op("*")) {
            Expr s = make(Kind::Starred);
            s.elts.push_back(parse_bitwise_or());
            return s;
        }
        return allow_named ? parse_named_expression() : parse_expression();
    }

    bool starts_expression() const {
        const Token& t = peek();
        switch (t.type) {
        case Tok::Name:
            if (!is_keyword(t.text)) return true;
            return t.text == "not" || t.text == "lambda" || t.text == "await" || t.text == "True" ||
                   t.text == "False" || t.text == "None";
        case Tok::Number:
        case Tok::String:
            return true;
        case Tok::Op:
            return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
                   t.text == "~" || t.text == "*" || t.text == "...";
        default:
            return false;
        }
    }

    Expr parse_named_expression() {
        if (at_name() && at_op(":=", 1)) {
            next();
            next();
            parse_expression();
            return make(Kind::Other);
        }
        Expr e = parse_expression();
        if (at_op(":=")) fail("cannot use assignment expressions with this target");
        return e;
    }

    Expr parse_expression() {
        DepthGuard guard(*this);
        if (at_kw("lambda")) {
            next();
            parse_parameters(":", false);
            expect_op(":");
            parse_expression();
            return make(Kind::Other);
        }
        Expr e = parse_disjunction();
        if (at_kw("if")) {
            next();
            parse_disjunction();
            if (!accept_kw("else")) fail("expected 'else' after 'if' expression");
            parse_expression();
            return make(Kind::Other);
        }
        return e;
    }

    Expr parse_disjunction() {
        Expr e = parse_conjunction();
        bool op = false;
        while (accept_kw("or")) {
            parse_conjunction();
            op = true;
        }
        return op ? make(Kind::Other) : e;
    }

    Expr parse_conjunction() {
        Expr e = parse_inversion();
        bool op = false;
        while (accept_kw("and")) {
            parse_inversion();
            op = true;
        }
        return op ? make(Kind::Other) : e;
    }

    Expr parse_inversion() {
        DepthGuard guard(*this);
        if (accept_kw("not")) {
            parse_inversion();
            return make(Kind::Other);
        }
        return parse_comparison();
    }

    bool accept_comp_op() {
        static const std::unordered_set<std::string_view> ops = {"==", "!=", "<", "<=", ">", ">="};
        const Token& t = peek();
        if (t.type == Tok::Op && ops.count(t.text) != 0) {
            next();
            return true;
        }
        if (at_kw("in")) {
            next();
            return true;
        }
        if (at_kw("not") && at_kw("in", 1)) {
            next();
            next();
            return true;
        }
        if (at_kw("is")) {
            next();
            accept_kw("not");
            return true;
        }
        return false;
    }

    Expr parse_comparison() {
        Expr e = parse_bitwise_or();
        bool op = false;
        while (accept_comp_op()) {
            parse_bitwise_or();
            op = true;
        }
        return op ? make(Kind::Other) : e;
    }

    template <typename Sub>
    Expr binary_level(std::initializer_list<std::string_view> ops, Sub sub) {
        Expr e = (this->*sub)();
        bool op = false;
        while (true) {
            bool matched = false;
            for (auto o : ops) {
                if (at_op(o)) {
                    matched = true;
                    break;
                }
            }
            if (!matched) break;
            next();
            (this->*sub)();
            op = true;
        }
        return op ? make(Kind::Other) : e;
    }

    Expr parse_bitwise_or() { return binary_level({"|"}, &Parser::parse_bitwise_xor); }
    Expr parse_bitwise_xor() { return binary_level({"^"}, &Parser::parse_bitwise_and); }
    Expr parse_bitwise_and() { return binary_level({"&"}, &Parser::parse_shift); }
    Expr parse_shift() { return binary_level({"<<", ">>"}, &Parser::parse_sum); }
    Expr parse_sum() { return binary_level({"+", "-"}, &Parser::parse_term); }
    Expr parse_term() { return binary_level({"*", "/", "//", "%", "@"}, &Parser::parse_factor); }

    Expr parse_factor() {
        DepthGuard guard(*this);
        if (at_op("+") || at_op("-") || at_op("~")) {
            next();
            parse_factor();
            return make(Kind::Other);
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr e;
        if (accept_kw("await")) {
            parse_primary();
            e = make(Kind::Other);
        } else {
            e = parse_primary();
        }
        if (accept_op("**")) {
            parse_factor();
            return make(Kind::Other);
        }
        return e;
    }

    Expr parse_primary() {
        Expr e = parse_atom();
        while (true) {
            if (accept_op(".")) {
                expect_name();
                e = make(Kind::Attribute);
            } else if (at_op("(")) {
                next();
                if (!at_op(")")) parse_arguments();
                expect_op(")");
                e = make(Kind::Call);
            } else if (at_op("[")) {
                next();
                parse_slices();
                expect_op("]");
                e = make(Kind::Subscript);
            } else {
                break;
            }
        }
        return e;
    }

    void parse_slices() {
        auto slice = [&] {
            if (!at_op(":")) {
                if (at_op("*")) fail("invalid syntax");
                parse_named_expression();
                if (!at_op(":")) return;
            }
            next();  // ':'
            if (!at_op(":") && !at_op("]") && !at_op(",")) parse_expression();
            if (accept_op(":")) {
                if (!at_op("]") && !at_op(",")) parse_expression();
            }
        };
        if (at_op("]")) fail("invalid syntax");
        slice();
        while (accept_op(",")) {
            if (at_op("]")) break;
            slice();
        }
    }

    void parse_arguments() {
        bool seen_keyword = false;
        bool seen_kwargs = false;
        std::size_t count = 0;
        bool bare_genexp = false;
        while (true) {
            ++count;
            if (accept_op("**")) {
                parse_expression();
                seen_kwargs = true;
            } else if (accept_op("*")) {
                if (seen_kwargs) fail("iterable argument unpacking follows keyword argument unpacking");
                parse_expression();
            } else if (at_name() && at_op("=", 1)) {
                next();
                next();
                parse_expression();
                seen_keyword = true;
            } else {
                Expr e = parse_named_expression();
                if (at_op("=")) fail("expression cannot contain assignment, perhaps you meant \"==\"?");
                if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
                    parse_comprehension_clauses();
                    bare_genexp = true;
                } else {
                    (void)e;
                }
                if (seen_kwargs) fail("positional argument follows keyword argument unpacking");
                if (seen_keyword) fail("positional argument follows keyword argument");
            }
            if (!accept_op(",")) break;
            if (at_op(")")) {
                if (bare_genexp) fail("Generator expression must be parenthesized");
                break;
            }
        }
        if (bare_genexp && count > 1) fail("Generator expression must be parenthesized");
    }

    void parse_comprehension_clauses() {
        bool any = false;
        while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
            any = true;
            accept_kw("async");
            expect_kw("for");
            parse_star_targets();
            expect_kw("in");
            parse_disjunction();
            while (accept_kw("if")) parse_disjunction();
        }
        if (!any) fail("invalid syntax");
    }

    bool at_comprehension() const { return at_kw("for") || (at_kw("async") && at_kw("for", 1)); }

    Expr parse_star_target() {
        if (accept_op("*")) {
            if (at_op("*")) fail("invalid syntax");
            Expr s = make(Kind::Starred);
            s.elts.push_back(parse_star_target());
            return s;
        }
        return parse_bitwise_or();
    }

    void parse_star_targets() {
        Expr first = parse_star_target();
        if (at_op(",")) {
            Expr tuple = make(Kind::Tuple);
            tuple.elts.push_back(std::move(first));
            while (accept_op(",")) {
                if (at_kw("in") || at_op("=")) break;
                tuple.elts.push_back(parse_star_target());
            }
            first = std::move(tuple);
        }
        if (!valid_target(first)) fail("cannot assign to expression");
    }

    // Starred targets are accepted at any level here; CPython rejects the bare
    // ones only at compile time.
    static bool valid_target(const Expr& e) {
        switch (e.kind) {
        case Kind::Starred:
            return !e.parenthesized && valid_target(e.elts.front());
        case Kind::Name:
        case Kind::Attribute:
        case Kind::Subscript:
            return true;
        case Kind::Tuple:
        case Kind::List:
            for (const auto& elt : e.elts) {
                if (!valid_target(elt)) return false;
            }
            return true;
        default:
            return false;
        }
    }

    static bool valid_del_target(const Expr& e) {
        switch (e.kind) {
        case Kind::Name:
        case Kind::Attribute:
        case Kind::Subscript:
            return true;
        case Kind::Tuple:
        case Kind::List:
            return std::all_of(e.elts.begin(), e.elts.end(), valid_del_target);
        default:
            return false;
        }
    }

    void parse_yield_expr() {
        expect_kw("yield");
        if (accept_kw("from")) {
            parse_expression();
            return;
        }
        if (starts_expression()) parse_star_expressions(false);
    }

    Expr parse_atom() {
        DepthGuard guard(*this);
        const Token& t = peek();
        switch (t.type) {
        case Tok::Name: {
            if (t.text == "True" || t.text == "False" || t.text == "None") {
                next();
                return make(Kind::Literal);
            }
            if (is_keyword(t.text)) fail("invalid syntax");
            next();
            return make(Kind::Name);
        }
        case Tok::Number:
            next();
            return make(Kind::Literal);
        case Tok::String: {
            bool has_bytes = false, has_text = false;
            while (peek().type == Tok::String) {
                if (peek().text.find('b') != std::string::npos) {
                    has_bytes = true;
                } else {
                    has_text = true;
                }
                next();
            }
            if (has_bytes && has_text) fail("cannot mix bytes and nonbytes literals");
            return make(Kind::Literal);
        }
        case Tok::Op:
            if (t.text == "(") return parse_paren();
            if (t.text == "[") return parse_list();
            if (t.text == "{") return parse_brace();
            if (t.text == "...") {
                next();
                return make(Kind::Literal);
            }
            break;
        default:
            break;
        }
        fail("invalid syntax");
    }

    Expr parse_paren() {
        expect_op("(");
        if (accept_op(")")) return make(Kind::Tuple);
        if (at_kw("yield")) {
            parse_yield_expr();
            expect_op(")");
            return make(Kind::Other);
        }
        Expr first = parse_star_expression(true);
        if (at_comprehension()) {
            if (first.kind == Kind::Starred) fail("iterable unpacking cannot be used in comprehension");
            parse_comprehension_clauses();
            expect_op(")");
            return make(Kind::Other);
        }
        if (accept_op(")")) {
            if (first.kind == Kind::Starred) fail("cannot use starred expression here");
            first.parenthesized = true;
            return first;
        }
        Expr tuple = make(Kind::Tuple);
        tuple.parenthesized = true;
        tuple.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op(")")) break;
            tuple.elts.push_back(parse_star_expression(true));
        }
        expect_op(")");
        return tuple;
    }

    Expr parse_list() {
        expect_op("[");
        Expr list = make(Kind::List);
        if (accept_op("]")) return list;
        Expr first = parse_star_expression(true);
        if (at_comprehension()) {
            if (first.kind == Kind::Starred) fail("iterable unpacking cannot be used in comprehension");
            parse_comprehension_clauses();
            expect_op("]");
            return make(Kind::Other);
        }
        list.elts.push_back(std::move(first));
        while (accept_op(",")) {
            if (at_op("]")) break;
            list.elts.push_back(parse_star_expression(true));
        }
        expect_op("]");
        return list;
    }

    Expr parse_brace() {
        expect_op("{");
        if (accept_op("}")) return make(Kind::Literal);
        bool is_dict;
        if (accept_op("**")) {
            parse_bitwise_or();
            is_dict = true;
        } else {
            Expr first = parse_star_expression(true);
            if (at_op(":") && first.kind != Kind::Starred) {
                next();
                parse_expression();
                is_dict = true;
            } else {
                is_dict = false;
            }
            if (at_comprehension()) {
                if (first.kind == Kind::Starred) fail("iterable unpacking cannot be used in comprehension");
                parse_comprehension_clauses();
                expect_op("}");
                return make(Kind::Other);
            }
        }
        while (accept_op(",")) {
            if (at_op("}")) break;
            if (is_dict) {
                if (accept_op("**")) {
                    parse_bitwise_or();
                } else {
                    parse_expression();
                    expect_op(":");
                    parse_expression();
                }
            } else {
                parse_star_expression(true);
            }
        }
        expect_op("}");
        return make(Kind::Other);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

// Validates the replacement fields of an f-string body.
void Tokenizer::check_fstring_body(std::string_view body, bool raw, int line) {
    (void)raw;
    std::size_t i = 0;
    auto parse_field_expr = [&](std::string_view expr) {
        // Strip the `=` debugging specifier.
        std::string_view e = expr;
        while (!e.empty() && (e.back() == ' ' || e.back() == '\t')) e.remove_suffix(1);
        if (!e.empty() && e.back() == '=' && e.size() >= 2) {
            char prev = e[e.size() - 2];
            if (prev != '=' && prev != '!' && prev != '<' && prev != '>') e.remove_suffix(1);
        }
        Tokenizer inner(e, line);
        Parser parser(inner.run_expression());
        parser.parse_lone_expression();
    };
    std::vector<int> field_depth;
    // Recursive lambda over (start, nesting) for format specs.
    struct Scanner {
        std::string_view s;
        int line;
        const decltype(parse_field_expr)& parse_expr;
        std::size_t& i;

        [[noreturn]] void fail(const std::string& m) const { throw PySyntaxError{m, line}; }

        // Scans literal text until `stop` ('\0' for end of body) at field nesting `nest`.
        void literal(char stop, int nest) {
            while (i < s.size()) {
                char c = s[i];
                if (stop != '\0' && c == stop) return;
                if (c == '\\' && i + 1 < s.size()) {
                    i += 2;
                    continue;
                }
                if (c == '{') {
                    if (nest == 0 && i + 1 < s.size() && s[i + 1] == '{') {
                        i += 2;
                        continue;
                    }
                    ++i;
                    field(nest);
                    continue;
                }
                if (c == '}') {
                    if (nest == 0 && i + 1 < s.size() && s[i + 1] == '}') {
                        i += 2;
                        continue;
                    }
                    fail("f-string: single '}' is not allowed");
                }
                ++i;
            }
            if (stop != '\0') fail("f-string: expecting '}'");
        }

        void field(int nest) {
            if (nest >= 2) fail("f-string: expressions nested too deeply");
            std::size_t start = i;
            std::vector<char> stack;
            char quote = 0;
            while (i < s.size()) {
                char c = s[i];
                if (quote != 0) {
                    if (c == quote) quote = 0;
                    ++i;
                    continue;
                }
                if (c == '\'' || c == '"') {
                    quote = c;
                } else if (c == '(' || c == '[' || c == '{') {
                    stack.push_back(c);
                } else if (c == ')' || c == ']' || (c == '}' && !stack.empty())) {
                    if (stack.empty()) fail("f-string: unmatched '" + std::string(1, c) + "'");
                    stack.pop_back();
                } else if (stack.empty() && (c == '}' || c == ':' ||
                                             (c == '!' && !(i + 1 < s.size() && s[i + 1] == '=')))) {
                    break;
                }
                ++i;
            }
            if (quote != 0) fail("f-string: unterminated string");
            if (i >= s.size()) fail("f-string: expecting '}'");
            std::string_view expr = s.substr(start, i - start);
            bool blank = expr.find_first_not_of(" \t\n\r") == std::string_view::npos;
            if (blank) fail("f-string: empty expression not allowed");
            parse_expr(expr);
            if (s[i] == '!') {
                ++i;
                if (i >= s.size() || std::string_view("sra").find(s[i]) == std::string_view::npos) {
                    fail("f-string: invalid conversion character");
                }
                ++i;
                if (i >= s.size() || (s[i] != ':' && s[i] != '}')) fail("f-string: expecting '}'");
            }
            if (s[i] == ':') {
                ++i;
                literal('}', nest + 1);
            }
            if (i >= s.size() || s[i] != '}') fail("f-string: expecting '}'");
            ++i;
        }
    };
    Scanner scanner{body, line, parse_field_expr, i};
    scanner.literal('\0', 0);
}

SyntaxVerdict check_embedded(std::string_view source) {
    // A NUL byte is rejected by CPython's tokenizer outright.
    if (source.find('\0') != std::string_view::npos) return {false, "source code cannot contain null bytes", 1};
    try {
        Tokenizer tokenizer(source);
        Parser parser(tokenizer.run());
        parser.parse_file();
        return {};
    } catch (const PySyntaxError& e) {
        return {false, e.message, std::max(e.line, 1)};
    }
}

} // namespace

SyntaxVerdict EmbeddedPythonChecker::check(std::string_view source) const { return check_embedded(source); }

ExternalPythonChecker::ExternalPythonChecker(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
    auto argv = split_command(command_);
    if (argv.empty()) throw ConfigError("external syntax checker: empty command");
    if (!find_executable(argv.front())) {
        throw ConfigError("external syntax checker unavailable: '" + argv.front() + "' not found");
    }
}

SyntaxVerdict ExternalPythonChecker::check(std::string_view source) const {
    ProcessOptions opts;
    opts.timeout = timeout_;
    opts.max_output_bytes = 64 * 1024;
    ProcessResult r = run_process(split_command(command_), std::string(source), opts);
    if (r.timed_out) throw ConfigError("external syntax checker timed out");
    if (r.exit_code == 126 || r.exit_code == 127) throw ConfigError("external syntax checker failed to start");
    if (r.exit_code == 0) return {};
    SyntaxVerdict v{false, "", 1};
    // Python tracebacks end with "<Kind>Error: message"; keep just that line.
    auto lines = r.stderr_text;
    auto end = lines.find_last_not_of("\n ");
    if (end != std::string::npos) {
        auto nl = lines.rfind('\n', end);
        v.message = lines.substr(nl == std::string::npos ? 0 : nl + 1, end - (nl == std::string::npos ? 0 : nl + 1) + 1);
    }
    auto at = r.stderr_text.find(", line ");
    if (at != std::string::npos) v.line = std::max(1, std::atoi(r.stderr_text.c_str() + at + 7));
    if (v.message.empty()) v.message = "invalid syntax";
    return v;
}

std::shared_ptr<const SyntaxChecker> make_syntax_checker(const CheckerConfig& config) {
    if (config.kind == "embedded") return std::make_shared<EmbeddedPythonChecker>();
    if (config.kind == "external") return std::make_shared<ExternalPythonChecker>(config.command);
    throw ConfigError("unknown syntax checker kind: " + config.kind);
}

} // namespace stap
