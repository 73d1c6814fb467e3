#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stap {

struct ProcessOptions {
    std::chrono::milliseconds timeout{5000};
    // Per-stream cap; bytes beyond it are discarded and `truncated` is set.
    std::size_t max_output_bytes = 1 << 20;
    std::optional<std::filesystem::path> working_dir;
};

struct ProcessResult {
    int exit_code = -1;   // -1 when killed by a signal
    int signal = 0;
    bool timed_out = false;
    bool truncated = false;
    std::string stdout_text;
    std::string stderr_text;
    std::chrono::milliseconds elapsed{0};
};

// Resolves `program` against PATH (or checks it directly when it contains a
// slash). Returns nullopt when no executable file is found.
std::optional<std::filesystem::path> find_executable(const std::string& program);

// Runs argv[0] with the given stdin, capturing both output streams. The child
// gets its own process group, which is killed on timeout. Throws ConfigError
// when argv[0] cannot be found.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_text,
                          const ProcessOptions& options = {});

// Splits a command template on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(const std::string& command);

// Owns a fresh directory under the system temp dir; removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace stap
