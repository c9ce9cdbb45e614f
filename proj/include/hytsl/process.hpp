#pragma once

#include <chrono>
#include <csignal>
#include <cstring>
#include <string>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hytsl/errors.hpp"

namespace hytsl {

struct ProcessResult {
    std::string output;
    int exit_code = -1;
    bool timed_out = false;
};

// Run `command` through /bin/sh, feed `input` on stdin, collect stdout until
// EOF or deadline. The child is killed on timeout.
inline ProcessResult run_process(const std::string& command, const std::string& input, int timeout_ms) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw SolverError("pipe() failed");
    pid_t pid = fork();
    if (pid < 0) throw SolverError("fork() failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);

    signal(SIGPIPE, SIG_IGN);
    fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);

    ProcessResult result;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    size_t written = 0;
    bool stdin_open = true;
    bool stdout_open = true;
    char buf[4096];

    while (stdout_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
            close(out_pipe[0]);
            if (stdin_open) close(in_pipe[1]);
            result.timed_out = true;
            return result;
        }
        int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        if (wait_ms < 1) wait_ms = 1;

        struct pollfd fds[2];
        int nfds = 0;
        fds[nfds].fd = out_pipe[0];
        fds[nfds].events = POLLIN;
        ++nfds;
        if (stdin_open) {
            fds[nfds].fd = in_pipe[1];
            fds[nfds].events = POLLOUT;
            ++nfds;
        }
        int pr = poll(fds, static_cast<nfds_t>(nfds), wait_ms);
        if (pr < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (pr == 0) continue;

        if (fds[0].revents & (POLLIN | POLLHUP)) {
            ssize_t n = read(out_pipe[0], buf, sizeof buf);
            if (n > 0) {
                result.output.append(buf, static_cast<size_t>(n));
            } else if (n == 0) {
                stdout_open = false;
            } else if (errno != EAGAIN && errno != EINTR) {
                stdout_open = false;
            }
        }
        if (stdin_open && nfds > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[1].revents & (POLLERR | POLLHUP)) {
                close(in_pipe[1]);
                stdin_open = false;
            } else {
                ssize_t n = write(in_pipe[1], input.data() + written, input.size() - written);
                if (n > 0) written += static_cast<size_t>(n);
                if (written == input.size() || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                    close(in_pipe[1]);
                    stdin_open = false;
                }
            }
        }
    }
    if (stdin_open) close(in_pipe[1]);
    close(out_pipe[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace hytsl
