#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vwt {

struct ProcessSpec {
    std::vector<std::string> argv;
    /// Added to (and overriding) the parent environment.
    std::map<std::string, std::string> environment;
    std::filesystem::path workdir;
    /// Zero disables the timeout.
    std::chrono::milliseconds timeout{0};
};

struct ProcessResult {
    std::string stdout_text;
    std::string stderr_text;
    /// Exit status, or 128 + signal number when the child was killed.
    int exit_code = 0;
    bool timed_out = false;
    double duration_seconds = 0.0;
};

/// Runs argv[0] (searched on PATH) with stdin closed and waits for it. On
/// timeout the whole process group is killed. Throws ExecutionError when the
/// program cannot be started.
ProcessResult run_process(const ProcessSpec& spec);

} // namespace vwt
