#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

namespace stap {

struct SyntaxVerdict {
    bool valid = true;
    std::string message;  // empty when valid
    int line = 0;         // 1-based line of the first error, 0 when valid
};

// Decides whether a program parses under the exercise language's grammar.
// Implementations throw ConfigError when they cannot run at all; that is
// never reported as an invalid program.
class SyntaxChecker {
public:
    virtual ~SyntaxChecker() = default;
    virtual SyntaxVerdict check(std::string_view source) const = 0;
    virtual std::string name() const = 0;

    bool is_valid(std::string_view source) const { return check(source).valid; }
};

// In-process tokenizer + recursive-descent parser for the Python 3.10 grammar.
// Covers everything an introductory course touches (all simple and compound
// statements, comprehensions, f-string replacement fields, walrus, decorators,
// async forms). Structural pattern matching (`match`) is not supported.
class EmbeddedPythonChecker final : public SyntaxChecker {
public:
    SyntaxVerdict check(std::string_view source) const override;
    std::string name() const override { return "embedded"; }
};

// Delegates to an external validator that reads the program on stdin and
// exits 0 when it parses, non-zero otherwise.
class ExternalPythonChecker final : public SyntaxChecker {
public:
    static constexpr const char* default_command =
        "python3 -c \"import ast,sys; ast.parse(sys.stdin.buffer.read())\"";

    explicit ExternalPythonChecker(std::string command = default_command,
                                   std::chrono::milliseconds timeout = std::chrono::seconds(10));

    SyntaxVerdict check(std::string_view source) const override;
    std::string name() const override { return "external"; }

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
};

struct CheckerConfig {
    std::string kind = "embedded";  // "embedded" | "external"
    std::string command = ExternalPythonChecker::default_command;
};

// Throws ConfigError for an unknown kind or an external command whose
// executable is missing.
std::shared_ptr<const SyntaxChecker> make_syntax_checker(const CheckerConfig& config = {});

} // namespace stap
