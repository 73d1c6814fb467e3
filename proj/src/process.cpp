#include "stap/process.hpp"

#include "stap/error.hpp"
#include "stap/util.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace stap {

namespace {

bool is_executable_file(const std::filesystem::path& p) {
    struct stat st {};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
}

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fds, O_CLOEXEC) != 0) throw ConfigError(std::string("pipe: ") + std::strerror(errno));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

} // namespace

std::optional<std::filesystem::path> find_executable(const std::string& program) {
    if (program.empty()) return std::nullopt;
    if (program.find('/') != std::string::npos) {
        if (is_executable_file(program)) return std::filesystem::path(program);
        return std::nullopt;
    }
    std::string path = env_or("PATH", "/usr/local/bin:/usr/bin:/bin");
    std::size_t start = 0;
    while (start <= path.size()) {
        auto colon = path.find(':', start);
        std::string dir = path.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
        if (dir.empty()) dir = ".";
        auto candidate = std::filesystem::path(dir) / program;
        if (is_executable_file(candidate)) return candidate;
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    return std::nullopt;
}

std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> out;
    std::string cur;
    bool in_token = false;
    char quote = 0;
    for (char c : command) {
        if (quote != 0) {
            if (c == quote) {
                quote = 0;
            } else {
                cur.push_back(c);
            }
        } else if (c == '\'' || c == '"') {
            quote = c;
            in_token = true;
        } else if (c == ' ' || c == '\t' || c == '\n') {
            if (in_token) out.push_back(std::move(cur));
            cur.clear();
            in_token = false;
        } else {
            cur.push_back(c);
            in_token = true;
        }
    }
    if (quote != 0) throw ConfigError("unterminated quote in command: " + command);
    if (in_token) out.push_back(std::move(cur));
    return out;
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_text,
                          const ProcessOptions& options) {
    if (argv.empty()) throw ConfigError("empty command");
    // A child that exits before reading stdin must not kill us via SIGPIPE.
    static const bool sigpipe_ignored = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;
    auto exe = find_executable(argv[0]);
    if (!exe) throw ConfigError("executable not found: " + argv[0]);

    Pipe in_pipe, out_pipe, err_pipe;
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    std::string exe_str = exe->string();
    std::string wd = options.working_dir ? options.working_dir->string() : std::string();

    auto start = std::chrono::steady_clock::now();
    pid_t pid = ::fork();
    if (pid < 0) throw ConfigError(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_pipe.fds[0], STDIN_FILENO);
        ::dup2(out_pipe.fds[1], STDOUT_FILENO);
        ::dup2(err_pipe.fds[1], STDERR_FILENO);
        if (!wd.empty() && ::chdir(wd.c_str()) != 0) _exit(126);
        ::execv(exe_str.c_str(), cargv.data());
        _exit(127);
    }
    ::setpgid(pid, pid);
    in_pipe.close_read();
    out_pipe.close_write();
    err_pipe.close_write();

    ProcessResult result;
    ::fcntl(in_pipe.fds[1], F_SETFL, O_NONBLOCK);
    std::size_t written = 0;
    if (stdin_text.empty()) in_pipe.close_write();

    auto deadline = start + options.timeout;
    char buf[8192];
    auto drain = [&](int fd, std::string& sink) -> bool {
        ssize_t n = ::read(fd, buf, sizeof buf);
        if (n <= 0) return false;
        std::size_t room = options.max_output_bytes > sink.size() ? options.max_output_bytes - sink.size() : 0;
        std::size_t take = std::min(room, static_cast<std::size_t>(n));
        sink.append(buf, take);
        if (take < static_cast<std::size_t>(n)) result.truncated = true;
        return true;
    };

    bool out_open = true, err_open = true;
    while (out_open || err_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            break;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd fds[3];
        nfds_t nfds = 0;
        int out_idx = -1, err_idx = -1, in_idx = -1;
        if (out_open) { fds[nfds] = {out_pipe.fds[0], POLLIN, 0}; out_idx = static_cast<int>(nfds++); }
        if (err_open) { fds[nfds] = {err_pipe.fds[0], POLLIN, 0}; err_idx = static_cast<int>(nfds++); }
        if (in_pipe.fds[1] >= 0) { fds[nfds] = {in_pipe.fds[1], POLLOUT, 0}; in_idx = static_cast<int>(nfds++); }
        int rc = ::poll(fds, nfds, static_cast<int>(std::min<long long>(left, 100)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP)) != 0) {
            if ((fds[in_idx].revents & POLLOUT) != 0) {
                ssize_t n = ::write(in_pipe.fds[1], stdin_text.data() + written, stdin_text.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN) written = stdin_text.size();
            } else {
                written = stdin_text.size();
            }
            if (written >= stdin_text.size()) in_pipe.close_write();
        }
        if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP | POLLERR)) != 0) {
            out_open = drain(out_pipe.fds[0], result.stdout_text);
        }
        if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP | POLLERR)) != 0) {
            err_open = drain(err_pipe.fds[0], result.stderr_text);
        }
    }

    int status = 0;
    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
    } else {
        // Output streams are closed; wait for exit but still honour the deadline.
        while (true) {
            pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid) break;
            if (std::chrono::steady_clock::now() >= deadline) {
                result.timed_out = true;
                ::kill(-pid, SIGKILL);
                ::waitpid(pid, &status, 0);
                break;
            }
            ::usleep(2000);
        }
    }
    // Reap any grandchildren left in the group.
    ::kill(-pid, SIGKILL);

    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signal = WTERMSIG(status);
    }
    result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return result;
}

TempDir::TempDir() {
    auto base = std::filesystem::temp_directory_path() / "stap-XXXXXX";
    std::string tmpl = base.string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw ConfigError(std::string("mkdtemp: ") + std::strerror(errno));
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

} // namespace stap
