#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/error.hpp"
#include "forge/language.hpp"
#include "forge/noise.hpp"
#include "forge/text.hpp"
#include "forge/tokenizer.hpp"

namespace forge {

/// The neural model as seen by the orchestrator.
class TranslatorPort {
  public:
    virtual ~TranslatorPort() = default;
    virtual std::vector<TokenId> translate(const std::vector<TokenId> &tokens, Language src, Language tgt,
                                           int beam_size) = 0;
    virtual double train_step(const std::vector<TrainingExample> &batch) = 0;
    virtual void init_decoder_from_encoder() {}
    /// Validation perplexity on a batch, when the implementation has one.
    virtual std::optional<double> validate(const std::vector<TrainingExample> &) { return std::nullopt; }
};

/// Returns its input unchanged and reports zero loss.
class StubIdentity : public TranslatorPort {
  public:
    std::vector<TokenId> translate(const std::vector<TokenId> &tokens, Language, Language, int) override {
        return tokens;
    }
    double train_step(const std::vector<TrainingExample> &batch) override {
        batches_.push_back(batch);
        return 0.0;
    }
    const std::vector<std::vector<TrainingExample>> &batches() const noexcept { return batches_; }

  private:
    std::vector<std::vector<TrainingExample>> batches_;
};

/// Word-for-word substitution per language pair. Words without an entry
/// pass through, whitespace included, so unmapped text survives unchanged.
class StubDictionary : public TranslatorPort {
  public:
    using Table = std::map<std::pair<Language, Language>, std::map<std::string, std::string>>;

    StubDictionary(const Vocabulary &vocab, Table table) : vocab_(&vocab), table_(std::move(table)) {}

    /// Lines `<src> <tgt> <word> <replacement>`; a word may be mapped only
    /// once per direction.
    static Table parse_table(std::string_view text) {
        Table t;
        std::istringstream is{std::string(text)};
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            if (trim(line).empty()) continue;
            std::istringstream ls(line);
            std::string src, tgt, from, to, extra;
            if (!(ls >> src >> tgt >> from >> to) || (ls >> extra)) {
                throw Error(Errc::schema, "dictionary line " + std::to_string(lineno) + ": expected 4 fields");
            }
            auto &m = t[{parse_language(src), parse_language(tgt)}];
            if (!m.emplace(from, to).second) {
                throw Error(Errc::schema, "dictionary line " + std::to_string(lineno) + ": '" + from + "' mapped twice");
            }
        }
        return t;
    }

    std::vector<TokenId> translate(const std::vector<TokenId> &tokens, Language src, Language tgt, int) override {
        const auto text = vocab_->decode(tokens);
        auto it = table_.find({src, tgt});
        if (it == table_.end()) return vocab_->encode(text, tgt).tokens;
        std::string out;
        for (const auto &w : segment_words(text)) {
            out.append(text, w.begin, w.core_begin - w.begin);
            const auto core = text.substr(w.core_begin, w.end - w.core_begin);
            auto m = it->second.find(core);
            out += m == it->second.end() ? core : m->second;
        }
        return vocab_->encode(out, tgt).tokens;
    }

    double train_step(const std::vector<TrainingExample> &batch) override {
        batches_.push_back(batch);
        return 0.0;
    }
    const std::vector<std::vector<TrainingExample>> &batches() const noexcept { return batches_; }

  private:
    const Vocabulary *vocab_;
    Table table_;
    std::vector<std::vector<TrainingExample>> batches_;
};

} // namespace forge
