#pragma once

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "biasprobe/errors.hpp"
#include "biasprobe/image.hpp"
#include "biasprobe/lime.hpp"

namespace biasprobe {

/// External model bridge. Spawns `command` through /bin/sh once; the artifact
/// writes one image file path per line to the scorer's stdin and the scorer
/// replies one decimal score per line, in order. A nonzero exit raises
/// ScorerFailure.
class SubprocessScorer {
public:
    explicit SubprocessScorer(std::string command) : command_(std::move(command)) { start(); }

    SubprocessScorer(const SubprocessScorer&) = delete;
    SubprocessScorer& operator=(const SubprocessScorer&) = delete;

    ~SubprocessScorer() { shutdown(); }

    double score_path(const std::string& path) {
        const std::string line = path + "\n";
        if (write(to_child_, line.data(), line.size()) != static_cast<ssize_t>(line.size()))
            throw ScorerFailure("scorer subprocess: write failed: " + std::string(std::strerror(errno)));
        std::string reply;
        char c = 0;
        for (;;) {
            const ssize_t r = read(from_child_, &c, 1);
            if (r <= 0)
                throw ScorerFailure("scorer subprocess: closed its output before replying (exit " +
                                    std::to_string(wait_exit()) + ")");
            if (c == '\n') break;
            reply.push_back(c);
        }
        try {
            return std::stod(reply);
        } catch (const std::exception&) {
            throw ScorerFailure("scorer subprocess: non-numeric reply '" + reply + "'");
        }
    }

    /// Adapter to the in-process Scorer interface: images are written to the
    /// scratch directory as PNGs and scored by path. Calls are serialized.
    Scorer as_scorer(const std::string& scratch_dir) {
        std::filesystem::create_directories(scratch_dir);
        auto counter = std::make_shared<std::size_t>(0);
        return [this, scratch_dir, counter](const Image& img) {
            std::lock_guard<std::mutex> lock(mutex_);
            const std::string path =
                scratch_dir + "/probe_" + std::to_string((*counter)++) + ".png";
            save_png(path, img);
            const double s = score_path(path);
            std::filesystem::remove(path);
            return s;
        };
    }

    /// Closes the channel and reaps the child; throws if it exited nonzero.
    void finish() {
        const int status = shutdown();
        if (status != 0)
            throw ScorerFailure("scorer subprocess exited with status " + std::to_string(status));
    }

private:
    void start() {
        int to_pipe[2], from_pipe[2];
        if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0)
            throw ScorerFailure("scorer subprocess: pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw ScorerFailure("scorer subprocess: fork failed");
        if (pid_ == 0) {
            dup2(to_pipe[0], STDIN_FILENO);
            dup2(from_pipe[1], STDOUT_FILENO);
            close(to_pipe[0]);
            close(to_pipe[1]);
            close(from_pipe[0]);
            close(from_pipe[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_pipe[0]);
        close(from_pipe[1]);
        to_child_ = to_pipe[1];
        from_child_ = from_pipe[0];
    }

    int wait_exit() {
        if (pid_ < 0) return exit_status_;
        int status = 0;
        waitpid(pid_, &status, 0);
        pid_ = -1;
        exit_status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        return exit_status_;
    }

    int shutdown() {
        if (to_child_ >= 0) {
            close(to_child_);
            to_child_ = -1;
        }
        if (from_child_ >= 0) {
            close(from_child_);
            from_child_ = -1;
        }
        return pid_ >= 0 ? wait_exit() : exit_status_;
    }

    std::string command_;
    pid_t pid_ = -1;
    int to_child_ = -1, from_child_ = -1;
    int exit_status_ = 0;
    std::mutex mutex_;
};

} // namespace biasprobe
