#include "vwt/process.hpp"

#include "vwt/error.hpp"

#include <array>
#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace vwt {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};

    Pipe() {
        if (::pipe2(fds, O_CLOEXEC) != 0) {
            throw ExecutionError(std::string("pipe: ") + std::strerror(errno));
        }
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    int read_end() const { return fds[0]; }
    int write_end() const { return fds[1]; }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& extra) {
    std::map<std::string, std::string> env;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string_view kv(*e);
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
    for (const auto& [k, v] : extra) env[k] = v;
    std::vector<std::string> out;
    out.reserve(env.size());
    for (const auto& [k, v] : env) out.push_back(k + "=" + v);
    return out;
}

std::vector<char*> c_strings(std::vector<std::string>& strings) {
    std::vector<char*> out;
    out.reserve(strings.size() + 1);
    for (auto& s : strings) out.push_back(s.data());
    out.push_back(nullptr);
    return out;
}

} // namespace

ProcessResult run_process(const ProcessSpec& spec) {
    if (spec.argv.empty()) throw ExecutionError("empty command");

    std::vector<std::string> argv_storage = spec.argv;
    std::vector<std::string> env_storage = merged_environment(spec.environment);
    std::vector<char*> argv = c_strings(argv_storage);
    std::vector<char*> envp = c_strings(env_storage);
    const std::string workdir = spec.workdir.string();

    Pipe out_pipe, err_pipe, exec_pipe;
    const auto started = std::chrono::steady_clock::now();

    pid_t pid = ::fork();
    if (pid < 0) throw ExecutionError(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::dup2(out_pipe.write_end(), STDOUT_FILENO);
        ::dup2(err_pipe.write_end(), STDERR_FILENO);
        if (!workdir.empty() && ::chdir(workdir.c_str()) != 0) {
            int err = errno;
            (void)!::write(exec_pipe.write_end(), &err, sizeof err);
            ::_exit(127);
        }
        ::execvpe(argv[0], argv.data(), envp.data());
        int err = errno;
        (void)!::write(exec_pipe.write_end(), &err, sizeof err);
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out_pipe.close_write();
    err_pipe.close_write();
    exec_pipe.close_write();

    int child_errno = 0;
    ssize_t got = ::read(exec_pipe.read_end(), &child_errno, sizeof child_errno);
    if (got == static_cast<ssize_t>(sizeof child_errno)) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        throw ExecutionError("cannot start '" + spec.argv[0] + "'" +
                             (workdir.empty() ? "" : " in '" + workdir + "'") + ": " +
                             std::strerror(child_errno));
    }

    ProcessResult result;
    std::array<pollfd, 2> fds{pollfd{out_pipe.read_end(), POLLIN, 0},
                              pollfd{err_pipe.read_end(), POLLIN, 0}};
    std::array<std::string*, 2> sinks{&result.stdout_text, &result.stderr_text};
    int open_fds = 2;
    const bool has_deadline = spec.timeout.count() > 0;
    const auto deadline = started + spec.timeout;
    std::array<char, 65536> buf{};

    while (open_fds > 0) {
        int wait_ms = -1;
        if (has_deadline && !result.timed_out) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            wait_ms = static_cast<int>(std::max<long long>(0, left.count()));
        }
        int rc = ::poll(fds.data(), fds.size(), wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            // deadline passed: kill the group, then drain what is left
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            continue;
        }
        for (std::size_t i = 0; i < fds.size(); ++i) {
            if (fds[i].fd < 0 || fds[i].revents == 0) continue;
            ssize_t n = ::read(fds[i].fd, buf.data(), buf.size());
            if (n > 0) {
                sinks[i]->append(buf.data(), static_cast<std::size_t>(n));
            } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
                fds[i].fd = -1;
                --open_fds;
            }
        }
    }

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    // grandchildren that kept no pipe open may still run
    if (result.timed_out) ::kill(-pid, SIGKILL);
    result.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

} // namespace vwt
