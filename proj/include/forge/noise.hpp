#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/lang_profiles.hpp"
#include "forge/language.hpp"
#include "forge/rng.hpp"
#include "forge/tokenizer.hpp"

namespace forge {

struct NoiseConfig {
    double mask_ratio = 0.15;
    double drop_ratio = 0.25;
    double insert_ratio = 0.15;
    int shuffle_window = 3;
    double keyword_weight = 3.0;
    double epoch_increment = 0.025;
    double max_ratio = 0.5;
    std::uint64_t seed = 0;
    // Exponent applied to foreign-word counts before sampling; 1 keeps the
    // raw frequency distribution.
    double insert_smoothing = 1.0;
    // Only insert words that never occur in the document's own language.
    bool foreign_only = true;

    void validate() const {
        auto frac = [](double v, const char *name) {
            if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::precondition, std::string(name) + " must be in [0,1]");
        };
        frac(mask_ratio, "mask_ratio");
        frac(drop_ratio, "drop_ratio");
        frac(insert_ratio, "insert_ratio");
        frac(epoch_increment, "epoch_increment");
        frac(max_ratio, "max_ratio");
        if (shuffle_window < 1) throw Error(Errc::precondition, "shuffle_window must be >= 1");
        if (!(keyword_weight >= 1.0)) throw Error(Errc::precondition, "keyword_weight must be >= 1");
        if (!(insert_smoothing > 0.0)) throw Error(Errc::precondition, "insert_smoothing must be > 0");
    }
};

inline void from_json(const nlohmann::json &j, NoiseConfig &c) {
    c.mask_ratio = j.value("mask_ratio", c.mask_ratio);
    c.drop_ratio = j.value("drop_ratio", c.drop_ratio);
    c.insert_ratio = j.value("insert_ratio", c.insert_ratio);
    c.shuffle_window = j.value("shuffle_window", c.shuffle_window);
    c.keyword_weight = j.value("keyword_weight", c.keyword_weight);
    c.epoch_increment = j.value("epoch_increment", c.epoch_increment);
    c.max_ratio = j.value("max_ratio", c.max_ratio);
    c.seed = j.value("seed", c.seed);
    c.insert_smoothing = j.value("insert_smoothing", c.insert_smoothing);
    c.foreign_only = j.value("foreign_only", c.foreign_only);
}

inline void to_json(nlohmann::json &j, const NoiseConfig &c) {
    j = nlohmann::json{{"mask_ratio", c.mask_ratio},         {"drop_ratio", c.drop_ratio},
                       {"insert_ratio", c.insert_ratio},     {"shuffle_window", c.shuffle_window},
                       {"keyword_weight", c.keyword_weight}, {"epoch_increment", c.epoch_increment},
                       {"max_ratio", c.max_ratio},           {"seed", c.seed},
                       {"insert_smoothing", c.insert_smoothing}, {"foreign_only", c.foreign_only}};
}

inline double schedule_ratio(double base, int epoch, const NoiseConfig &cfg) {
    if (epoch < 0) throw Error(Errc::precondition, "epoch must be >= 0");
    return std::min(base + static_cast<double>(epoch) * cfg.epoch_increment, cfg.max_ratio);
}

enum class Objective { mlm, aer, dae, bt, ft };

constexpr std::string_view to_string(Objective o) noexcept {
    switch (o) {
    case Objective::mlm: return "MLM";
    case Objective::aer: return "AER";
    case Objective::dae: return "DAE";
    case Objective::bt: return "BT";
    case Objective::ft: return "FT";
    }
    return "?";
}

inline std::optional<Objective> try_parse_objective(std::string_view s) {
    for (auto o : {Objective::mlm, Objective::aer, Objective::dae, Objective::bt, Objective::ft}) {
        if (s == to_string(o)) return o;
    }
    return std::nullopt;
}

struct TrainingExample {
    Objective objective = Objective::dae;
    std::vector<TokenId> input;
    std::vector<TokenId> target;
    Language src_lang = Language::cpp;
    Language tgt_lang = Language::cpp;
    int epoch = 0;

    friend bool operator==(const TrainingExample &, const TrainingExample &) = default;
};

inline nlohmann::json to_json(const TrainingExample &e) {
    return nlohmann::json{{"objective", std::string(to_string(e.objective))},
                          {"src_lang", std::string(to_string(e.src_lang))},
                          {"tgt_lang", std::string(to_string(e.tgt_lang))},
                          {"input", e.input},
                          {"target", e.target},
                          {"epoch", e.epoch}};
}

inline TrainingExample training_example_from_json(const nlohmann::json &j) {
    TrainingExample e;
    auto obj = try_parse_objective(j.at("objective").get<std::string>());
    if (!obj) throw Error(Errc::schema, "unknown objective");
    e.objective = *obj;
    e.src_lang = parse_language(j.at("src_lang").get<std::string>());
    e.tgt_lang = parse_language(j.at("tgt_lang").get<std::string>());
    e.input = j.at("input").get<std::vector<TokenId>>();
    e.target = j.at("target").get<std::vector<TokenId>>();
    e.epoch = j.value("epoch", 0);
    return e;
}

/// Per-example generator: one independent stream per (seed, document, epoch).
inline CounterRng example_rng(std::uint64_t seed, std::string_view doc_id, int epoch) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : doc_id) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return CounterRng(seed).split(h).split(static_cast<std::uint64_t>(epoch));
}

namespace detail {

/// floor(x) plus one with probability frac(x), so the expectation is x.
inline std::size_t stochastic_round(double x, CounterRng &rng) {
    const double f = std::floor(x);
    return static_cast<std::size_t>(f) + (rng.bernoulli(x - f) ? 1 : 0);
}

inline bool all_space(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return is_space_char(static_cast<unsigned char>(c)); });
}

/// Picks whole words in uniform random order until at least `target_tokens`
/// tokens are covered. Whitespace-only words are never picked.
inline std::vector<bool> pick_words(const std::vector<std::vector<TokenId>> &words, const std::vector<bool> &eligible,
                                    std::size_t target_tokens, CounterRng &rng) {
    std::vector<bool> picked(words.size(), false);
    if (target_tokens == 0) return picked;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (eligible[i]) order.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(order));
    std::size_t covered = 0;
    for (auto i : order) {
        if (covered >= target_tokens) break;
        picked[i] = true;
        covered += words[i].size();
    }
    return picked;
}

} // namespace detail

/// What a corruption did, for calibration and diagnostics.
struct NoiseTrace {
    std::vector<bool> dropped;        // per original word
    std::size_t original_words = 0;
    std::size_t surviving_tokens = 0;
    std::size_t masked_tokens = 0;
    std::size_t inserted_words = 0;
    std::vector<std::string> inserted;
};

/// Replaces every token of the given words by the mask id. The target keeps
/// the original token at masked positions and the pad id elsewhere.
inline TrainingExample mask_words(const TokenizedDocument &doc, const Vocabulary &vocab,
                                  const std::set<std::size_t> &word_indices, int epoch = 0) {
    TrainingExample ex;
    ex.objective = Objective::mlm;
    ex.src_lang = ex.tgt_lang = doc.language;
    ex.epoch = epoch;
    ex.input = doc.tokens;
    ex.target.assign(doc.tokens.size(), vocab.pad_id());
    for (auto w : word_indices) {
        const auto [s, e] = doc.word_spans.at(w);
        for (auto t = s; t < e; ++t) {
            ex.target[t] = doc.tokens[t];
            ex.input[t] = vocab.mask_id();
        }
    }
    return ex;
}

/// Whole-word masking. The masked-token target is the mask ratio times the
/// token count, stochastically rounded, so the expected masked fraction
/// equals the ratio even on short documents.
inline TrainingExample corrupt_mlm(const TokenizedDocument &doc, const Vocabulary &vocab, const NoiseConfig &cfg,
                                   CounterRng &rng, int epoch = 0) {
    std::vector<std::vector<TokenId>> words;
    std::vector<bool> eligible;
    for (std::size_t w = 0; w < doc.word_count(); ++w) {
        const auto [s, e] = doc.word_spans[w];
        words.emplace_back(doc.tokens.begin() + static_cast<std::ptrdiff_t>(s),
                           doc.tokens.begin() + static_cast<std::ptrdiff_t>(e));
        eligible.push_back(!detail::all_space(vocab.decode(words.back())));
    }
    const auto ratio = schedule_ratio(cfg.mask_ratio, epoch, cfg);
    const auto target = detail::stochastic_round(ratio * static_cast<double>(doc.tokens.size()), rng);
    const auto picked = detail::pick_words(words, eligible, target, rng);
    std::set<std::size_t> chosen;
    for (std::size_t w = 0; w < picked.size(); ++w) {
        if (picked[w]) chosen.insert(w);
    }
    return mask_words(doc, vocab, chosen, epoch);
}

/// Sampler over one foreign language's word distribution.
class ForeignSampler {
  public:
    ForeignSampler(const LanguageProfile &profile, const std::set<std::string> &exclude, double smoothing) {
        double acc = 0.0;
        for (const auto &[w, n] : profile.freq) {
            if (exclude.contains(w)) continue;
            acc += std::pow(static_cast<double>(n), smoothing);
            words_.push_back(w);
            cumulative_.push_back(acc);
        }
    }
    bool empty() const noexcept { return words_.empty(); }
    const std::string &sample(CounterRng &rng) const {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return words_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

  private:
    std::vector<std::string> words_;
    std::vector<double> cumulative_;
};

/// Denoising corruption: weighted word dropping, whole-word masking, foreign
/// word insertion, then shuffling inside fixed windows of words. The input is
/// prefixed with the language token of the document; the target is the
/// untouched document.
inline TrainingExample corrupt_dae(const TokenizedDocument &doc, const Vocabulary &vocab,
                                   const std::map<Language, LanguageProfile> &profiles, const NoiseConfig &cfg,
                                   int epoch, CounterRng &rng, NoiseTrace *trace = nullptr) {
    auto own = profiles.find(doc.language);
    if (own == profiles.end()) {
        throw Error(Errc::missing_profile, "no profile for " + std::string(to_string(doc.language)));
    }
    std::vector<const LanguageProfile *> others;
    for (const auto &[l, p] : profiles) {
        if (l != doc.language && p.sampling_enabled()) others.push_back(&p);
    }
    if (others.empty()) throw Error(Errc::missing_profile, "no other language profile to draw insertions from");

    const double drop = schedule_ratio(cfg.drop_ratio, epoch, cfg);
    const double mask = schedule_ratio(cfg.mask_ratio, epoch, cfg);
    const double insert = schedule_ratio(cfg.insert_ratio, epoch, cfg);

    const std::size_t n = doc.word_count();
    std::vector<std::vector<TokenId>> words;
    std::vector<std::string> cores;
    for (std::size_t w = 0; w < n; ++w) {
        const auto [s, e] = doc.word_spans[w];
        words.emplace_back(doc.tokens.begin() + static_cast<std::ptrdiff_t>(s),
                           doc.tokens.begin() + static_cast<std::ptrdiff_t>(e));
        cores.push_back(word_core(doc, w, vocab));
    }

    // (1) weighted dropping. p_i = min(1, c * w_i) with c chosen so that
    // sum p_i = drop * n (water filling when keyword weights saturate).
    std::vector<double> weight(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (own->second.is_keyword(cores[i])) weight[i] = cfg.keyword_weight;
    }
    std::vector<double> p(n, 0.0);
    {
        double budget = drop * static_cast<double>(n);
        std::vector<bool> saturated(n, false);
        while (budget > 0.0) {
            double wsum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!saturated[i]) wsum += weight[i];
            }
            if (wsum <= 0.0) break;
            const double c = budget / wsum;
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!saturated[i] && c * weight[i] >= 1.0) {
                    saturated[i] = true;
                    p[i] = 1.0;
                    budget -= 1.0;
                    changed = true;
                }
            }
            if (!changed) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (!saturated[i]) p[i] = c * weight[i];
                }
                break;
            }
        }
    }
    std::vector<bool> dropped(n, false);
    for (std::size_t i = 0; i < n; ++i) dropped[i] = rng.bernoulli(p[i]);

    std::vector<std::vector<TokenId>> kept;
    std::vector<bool> eligible;
    std::size_t kept_tokens = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (dropped[i]) continue;
        kept.push_back(words[i]);
        eligible.push_back(!cores[i].empty());
        kept_tokens += words[i].size();
    }

    // (2) masking on the survivors
    const auto mask_target = detail::stochastic_round(mask * static_cast<double>(kept_tokens), rng);
    const auto picked = detail::pick_words(kept, eligible, mask_target, rng);
    std::size_t masked = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (!picked[i]) continue;
        for (auto &t : kept[i]) t = vocab.mask_id();
        masked += kept[i].size();
    }

    // (3) foreign insertion
    const auto insert_count = detail::stochastic_round(insert * static_cast<double>(n), rng);
    std::vector<std::string> inserted;
    if (insert_count > 0) {
        std::set<std::string> exclude;
        if (cfg.foreign_only) {
            for (const auto &[w, c] : own->second.freq) exclude.insert(w);
            exclude.insert(own->second.keywords.begin(), own->second.keywords.end());
            exclude.insert(cores.begin(), cores.end());
        }
        std::vector<ForeignSampler> samplers;
        for (const auto *o : others) {
            ForeignSampler s(*o, exclude, cfg.insert_smoothing);
            if (!s.empty()) samplers.push_back(std::move(s));
        }
        if (!samplers.empty()) {
            for (std::size_t k = 0; k < insert_count; ++k) {
                const auto &sampler = samplers[samplers.size() == 1 ? 0 : rng.below(samplers.size())];
                const auto &w = sampler.sample(rng);
                const auto pos = static_cast<std::ptrdiff_t>(rng.below(kept.size() + 1));
                kept.insert(kept.begin() + pos, vocab.encode_word(" " + w));
                inserted.push_back(w);
            }
        }
    }

    // (4) shuffling inside fixed windows
    const auto window = static_cast<std::size_t>(cfg.shuffle_window);
    if (window > 1) {
        for (std::size_t b = 0; b < kept.size(); b += window) {
            const auto len = std::min(window, kept.size() - b);
            rng.shuffle(std::span<std::vector<TokenId>>(kept.data() + b, len));
        }
    }

    TrainingExample ex;
    ex.objective = Objective::dae;
    ex.src_lang = ex.tgt_lang = doc.language;
    ex.epoch = epoch;
    ex.input.push_back(vocab.language_token(doc.language));
    for (const auto &w : kept) ex.input.insert(ex.input.end(), w.begin(), w.end());
    ex.target = doc.tokens;

    if (trace != nullptr) {
        trace->dropped = dropped;
        trace->original_words = n;
        trace->surviving_tokens = kept_tokens;
        trace->masked_tokens = masked;
        trace->inserted_words = inserted.size();
        trace->inserted = std::move(inserted);
    }
    return ex;
}

} // namespace forge
