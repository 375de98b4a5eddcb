#pragma once

// Run a child process with a deadline, capturing stdout and stderr together.
// POSIX only.

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "forge/error.hpp"

namespace forge {

struct ProcessResult {
    int exit_code = -1;
    std::string output;
    double elapsed_s = 0;
};

/// Executes argv[0] (searched on PATH) without a shell. Throws
/// CompilerMissing when the executable cannot be started and Timeout when
/// the deadline passes; the whole process group is killed in that case.
inline ProcessResult run_process(const std::vector<std::string> &argv, double timeout_s,
                                 const std::vector<std::string> &extra_env = {}) {
    if (argv.empty()) throw Error(Errc::usage, "empty command");
    int out_pipe[2];
    int err_pipe[2];
    if (::pipe(out_pipe) != 0) throw Error(Errc::io, "pipe() failed");
    if (::pipe(err_pipe) != 0) {
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        throw Error(Errc::io, "pipe() failed");
    }
    ::fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

    std::vector<char *> args;
    for (const auto &a : argv) args.push_back(const_cast<char *>(a.c_str()));
    args.push_back(nullptr);

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) throw Error(Errc::io, "fork() failed");
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(out_pipe[1], STDERR_FILENO);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        for (const auto &e : extra_env) ::putenv(const_cast<char *>(e.c_str()));
        ::execvp(args[0], args.data());
        const int err = errno;
        [[maybe_unused]] auto n = ::write(err_pipe[1], &err, sizeof err);
        ::_exit(127);
    }
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);

    int exec_errno = 0;
    const auto got = ::read(err_pipe[0], &exec_errno, sizeof exec_errno);
    ::close(err_pipe[0]);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        ::close(out_pipe[0]);
        ::waitpid(pid, nullptr, 0);
        throw Error(Errc::compiler_missing, "cannot run '" + argv[0] + "': " + std::strerror(exec_errno));
    }

    ProcessResult r;
    const auto deadline = start + std::chrono::duration<double>(timeout_s);
    char buf[4096];
    bool timed_out = false;
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd p{out_pipe[0], POLLIN, 0};
        const int pr = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (pr < 0 && errno != EINTR) break;
        if (pr <= 0) continue;
        const auto n = ::read(out_pipe[0], buf, sizeof buf);
        if (n <= 0) break;
        r.output.append(buf, static_cast<std::size_t>(n));
    }
    ::close(out_pipe[0]);
    int status = 0;
    if (timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        throw Error(Errc::timeout, "'" + argv[0] + "' exceeded " + std::to_string(timeout_s) + " s");
    }
    ::waitpid(pid, &status, 0);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Whether `name` resolves to an executable, directly or through PATH.
inline bool executable_exists(const std::string &name) {
    if (name.find('/') != std::string::npos) return ::access(name.c_str(), X_OK) == 0;
    const char *path = std::getenv("PATH");
    if (path == nullptr) return false;
    std::string p(path);
    std::size_t pos = 0;
    while (pos <= p.size()) {
        auto end = p.find(':', pos);
        if (end == std::string::npos) end = p.size();
        auto dir = p.substr(pos, end - pos);
        if (dir.empty()) dir = ".";
        if (::access((dir + "/" + name).c_str(), X_OK) == 0) return true;
        pos = end + 1;
    }
    return false;
}

} // namespace forge
