#pragma once

// TranslatorPort backed by a child process that speaks line-delimited JSON on
// stdin/stdout. POSIX only.

#include <csignal>
#include <cstdio>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/translator.hpp"

namespace forge {

/// Requests, one JSON object per line:
///   {"op":"translate","tokens":[...],"src":"cpp","tgt":"cuda","beam_size":5} -> {"tokens":[...]}
///   {"op":"train_step","batch":[<TrainingExample>...]}                       -> {"loss":x}
///   {"op":"init_decoder_from_encoder"}                                        -> {"ok":true}
///   {"op":"validate","batch":[...]}                                           -> {"perplexity":x}
/// Any response carrying "error" fails the request with TranslatorFailure.
class ExternalTranslator : public TranslatorPort {
  public:
    explicit ExternalTranslator(std::string command) : command_(std::move(command)) { spawn(); }
    ExternalTranslator(const ExternalTranslator &) = delete;
    ExternalTranslator &operator=(const ExternalTranslator &) = delete;

    ~ExternalTranslator() override {
        if (to_child_) std::fclose(to_child_);
        if (from_child_) std::fclose(from_child_);
        if (pid_ > 0) {
            int status = 0;
            if (::waitpid(pid_, &status, WNOHANG) == 0) {
                ::kill(pid_, SIGTERM);
                ::waitpid(pid_, &status, 0);
            }
        }
    }

    std::vector<TokenId> translate(const std::vector<TokenId> &tokens, Language src, Language tgt,
                                   int beam_size) override {
        const auto r = call({{"op", "translate"},
                             {"tokens", tokens},
                             {"src", std::string(to_string(src))},
                             {"tgt", std::string(to_string(tgt))},
                             {"beam_size", beam_size}});
        return field(r, "tokens").get<std::vector<TokenId>>();
    }

    double train_step(const std::vector<TrainingExample> &batch) override {
        return field(call({{"op", "train_step"}, {"batch", batch_json(batch)}}), "loss").get<double>();
    }

    void init_decoder_from_encoder() override { call({{"op", "init_decoder_from_encoder"}}); }

    std::optional<double> validate(const std::vector<TrainingExample> &batch) override {
        const auto r = call({{"op", "validate"}, {"batch", batch_json(batch)}});
        if (!r.contains("perplexity") || r["perplexity"].is_null()) return std::nullopt;
        return r["perplexity"].get<double>();
    }

  private:
    static nlohmann::json batch_json(const std::vector<TrainingExample> &batch) {
        auto a = nlohmann::json::array();
        for (const auto &e : batch) a.push_back(to_json(e));
        return a;
    }

    static const nlohmann::json &field(const nlohmann::json &r, const char *name) {
        if (!r.contains(name)) throw Error(Errc::translator_failure, std::string("response lacks '") + name + "'");
        return r[name];
    }

    void spawn() {
        int in_pipe[2];
        int out_pipe[2];
        if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) throw Error(Errc::translator_failure, "pipe() failed");
        pid_ = ::fork();
        if (pid_ < 0) throw Error(Errc::translator_failure, "fork() failed");
        if (pid_ == 0) {
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            ::close(out_pipe[1]);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char *>(nullptr));
            ::_exit(127);
        }
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
        ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
        to_child_ = ::fdopen(in_pipe[1], "w");
        from_child_ = ::fdopen(out_pipe[0], "r");
        // A child that exits early must not kill us with SIGPIPE.
        std::signal(SIGPIPE, SIG_IGN);
    }

    nlohmann::json call(const nlohmann::json &request) {
        const auto line = request.dump() + "\n";
        if (std::fwrite(line.data(), 1, line.size(), to_child_) != line.size() || std::fflush(to_child_) != 0) {
            throw Error(Errc::translator_failure, "translator process '" + command_ + "' is not accepting input");
        }
        std::string reply;
        int c;
        while ((c = std::fgetc(from_child_)) != EOF && c != '\n') reply.push_back(static_cast<char>(c));
        if (c == EOF && reply.empty()) {
            throw Error(Errc::translator_failure, "translator process '" + command_ + "' closed its output");
        }
        nlohmann::json r;
        try {
            r = nlohmann::json::parse(reply);
        } catch (const nlohmann::json::exception &) {
            throw Error(Errc::translator_failure, "unparseable translator response: " + reply);
        }
        if (!r.is_object()) throw Error(Errc::translator_failure, "translator response is not an object");
        if (r.contains("error")) throw Error(Errc::translator_failure, "translator error: " + r["error"].dump());
        return r;
    }

    std::string command_;
    pid_t pid_ = -1;
    FILE *to_child_ = nullptr;
    FILE *from_child_ = nullptr;
};

} // namespace forge
