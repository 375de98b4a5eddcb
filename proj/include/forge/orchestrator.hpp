#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/lang_profiles.hpp"
#include "forge/language.hpp"
#include "forge/noise.hpp"
#include "forge/rng.hpp"
#include "forge/tokenizer.hpp"
#include "forge/translator.hpp"

namespace forge {

using Direction = std::pair<Language, Language>;

// ---- pretraining streams -----------------------------------------------------

struct PretrainStream {
    std::vector<TrainingExample> examples;
    std::size_t skipped = 0;  // AER documents without labels
};

/// Interleaves the languages round-robin: one document of the first
/// language, one of the second, and so on until every corpus is exhausted.
/// AER examples take their targets from `aer_labels` (keyed by doc_id).
inline PretrainStream emit_pretrain_stream(const std::map<Language, std::vector<TokenizedDocument>> &corpora,
                                           Objective objective, int epoch, const NoiseConfig &cfg,
                                           const Vocabulary &vocab,
                                           const std::map<std::string, std::vector<int>> *aer_labels = nullptr) {
    if (objective != Objective::mlm && objective != Objective::aer) {
        throw Error(Errc::precondition, "pretraining streams are MLM or AER");
    }
    PretrainStream out;
    std::size_t longest = 0;
    for (const auto &[l, docs] : corpora) longest = std::max(longest, docs.size());
    for (std::size_t i = 0; i < longest; ++i) {
        for (const auto &[l, docs] : corpora) {
            if (i >= docs.size()) continue;
            const auto &doc = docs[i];
            if (objective == Objective::mlm) {
                auto rng = example_rng(cfg.seed, doc.doc_id, epoch);
                out.examples.push_back(corrupt_mlm(doc, vocab, cfg, rng, epoch));
                continue;
            }
            const std::vector<int> *labels = nullptr;
            if (aer_labels != nullptr) {
                auto it = aer_labels->find(doc.doc_id);
                if (it != aer_labels->end() && it->second.size() == doc.tokens.size()) labels = &it->second;
            }
            if (labels == nullptr) {
                ++out.skipped;
                continue;
            }
            TrainingExample ex;
            ex.objective = Objective::aer;
            ex.src_lang = ex.tgt_lang = doc.language;
            ex.epoch = epoch;
            ex.input = doc.tokens;
            ex.target.assign(labels->begin(), labels->end());
            out.examples.push_back(std::move(ex));
        }
    }
    return out;
}

// ---- back translation --------------------------------------------------------

struct BtBatch {
    std::vector<TrainingExample> examples;
    std::size_t failures = 0;
    std::size_t reconstructed = 0;  // reverse leg reproduced the original exactly
    std::size_t reconstruction_checked = 0;
};

/// Forward-translates each document and emits the reverse-direction example
/// (<tgt-LANG> + intermediate -> original). With `check_reconstruction` the
/// intermediate is also translated back and compared with the original.
inline BtBatch bt_round_trip(const std::vector<TokenizedDocument> &batch, TranslatorPort &translator,
                             Direction direction, int beam_size, const Vocabulary &vocab, int epoch = 0,
                             bool check_reconstruction = false) {
    BtBatch out;
    const auto [src, tgt] = direction;
    for (const auto &doc : batch) {
        std::vector<TokenId> intermediate;
        try {
            intermediate = translator.translate(doc.tokens, src, tgt, beam_size);
        } catch (const Error &e) {
            if (e.code() != Errc::translator_failure) throw;
            ++out.failures;
            continue;
        }
        TrainingExample ex;
        ex.objective = Objective::bt;
        ex.src_lang = tgt;
        ex.tgt_lang = src;
        ex.epoch = epoch;
        ex.input.push_back(vocab.language_token(tgt));
        ex.input.insert(ex.input.end(), intermediate.begin(), intermediate.end());
        ex.target = doc.tokens;
        if (check_reconstruction) {
            try {
                ++out.reconstruction_checked;
                if (translator.translate(intermediate, tgt, src, beam_size) == doc.tokens) ++out.reconstructed;
            } catch (const Error &e) {
                if (e.code() != Errc::translator_failure) throw;
            }
        }
        out.examples.push_back(std::move(ex));
    }
    return out;
}

struct EpochReport {
    int epoch = 0;
    std::size_t dae_batches = 0;
    std::size_t bt_batches = 0;
    double dae_loss_mean = 0.0;
    double bt_loss_mean = 0.0;
    std::size_t bt_examples = 0;
    std::size_t translator_failures = 0;
    std::size_t train_step_failures = 0;
    std::size_t reconstructed = 0;
    std::size_t reconstruction_checked = 0;
    std::vector<Objective> order;       // objective of each batch in schedule order
    std::vector<Direction> directions;  // direction of each BT batch

    double reconstruction_rate() const {
        return reconstruction_checked == 0 ? 0.0
                                           : static_cast<double>(reconstructed) / static_cast<double>(reconstruction_checked);
    }
};

inline nlohmann::json to_json(const EpochReport &r) {
    auto dirs = nlohmann::json::array();
    for (const auto &[a, b] : r.directions) dirs.push_back(std::string(to_string(a)) + "->" + std::string(to_string(b)));
    auto order = nlohmann::json::array();
    for (auto o : r.order) order.push_back(std::string(to_string(o)));
    return nlohmann::json{{"epoch", r.epoch},
                          {"dae_batches", r.dae_batches},
                          {"bt_batches", r.bt_batches},
                          {"dae_loss_mean", r.dae_loss_mean},
                          {"bt_loss_mean", r.bt_loss_mean},
                          {"bt_examples", r.bt_examples},
                          {"translator_failures", r.translator_failures},
                          {"train_step_failures", r.train_step_failures},
                          {"reconstruction_rate", r.reconstruction_rate()},
                          {"order", order},
                          {"bt_directions", dirs}};
}

struct DaeBtOptions {
    std::size_t batch_size = 8;
    std::optional<std::size_t> batches;  // default: 2 * ceil((|a| + |b|) / batch_size)
    int beam_size = 5;
    bool check_reconstruction = true;
};

namespace detail {

/// Endless walk over a corpus in a per-epoch shuffled order.
class Cursor {
  public:
    Cursor(const std::vector<TokenizedDocument> &docs, CounterRng rng) : docs_(&docs) {
        order_.resize(docs.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        rng.shuffle(std::span<std::size_t>(order_));
    }
    const TokenizedDocument &next() {
        const auto &d = (*docs_)[order_[pos_ % order_.size()]];
        ++pos_;
        return d;
    }

  private:
    const std::vector<TokenizedDocument> *docs_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// One DAE+BT epoch over a language pair: batches strictly alternate DAE,
/// BT, DAE, ...; BT batches alternate direction a->b, b->a, ...; DAE batches
/// alternate documents of both languages. Every batch goes to train_step in
/// schedule order.
inline EpochReport run_dae_bt_epoch(const std::vector<TokenizedDocument> &corpus_a,
                                    const std::vector<TokenizedDocument> &corpus_b, TranslatorPort &translator,
                                    const Vocabulary &vocab, const std::map<Language, LanguageProfile> &profiles,
                                    const NoiseConfig &cfg, int epoch, const DaeBtOptions &opt = {}) {
    EpochReport r;
    r.epoch = epoch;
    if (corpus_a.empty() || corpus_b.empty()) return r;
    const auto lang_a = corpus_a.front().language;
    const auto lang_b = corpus_b.front().language;
    const auto batch_size = std::max<std::size_t>(1, opt.batch_size);
    const auto total = opt.batches.value_or(
        2 * ((corpus_a.size() + corpus_b.size() + batch_size - 1) / batch_size));

    const CounterRng base = CounterRng(cfg.seed).split(0xB7).split(static_cast<std::uint64_t>(epoch));
    detail::Cursor dae_a(corpus_a, base.split(1)), dae_b(corpus_b, base.split(2));
    detail::Cursor bt_a(corpus_a, base.split(3)), bt_b(corpus_b, base.split(4));

    double dae_loss = 0.0;
    double bt_loss = 0.0;
    std::size_t dae_losses = 0;
    std::size_t bt_losses = 0;
    std::size_t dae_counter = 0;
    for (std::size_t step = 0; step < total; ++step) {
        const bool dae = step % 2 == 0;
        std::vector<TrainingExample> batch;
        if (dae) {
            for (std::size_t k = 0; k < batch_size; ++k) {
                const auto &doc = (dae_counter++ % 2 == 0) ? dae_a.next() : dae_b.next();
                auto rng = example_rng(cfg.seed, doc.doc_id, epoch).split(step);
                batch.push_back(corrupt_dae(doc, vocab, profiles, cfg, epoch, rng));
            }
            ++r.dae_batches;
            r.order.push_back(Objective::dae);
        } else {
            const bool forward = r.bt_batches % 2 == 0;
            const Direction dir = forward ? Direction{lang_a, lang_b} : Direction{lang_b, lang_a};
            std::vector<TokenizedDocument> docs;
            for (std::size_t k = 0; k < batch_size; ++k) docs.push_back(forward ? bt_a.next() : bt_b.next());
            auto bt = bt_round_trip(docs, translator, dir, opt.beam_size, vocab, epoch, opt.check_reconstruction);
            r.translator_failures += bt.failures;
            r.reconstructed += bt.reconstructed;
            r.reconstruction_checked += bt.reconstruction_checked;
            r.bt_examples += bt.examples.size();
            batch = std::move(bt.examples);
            ++r.bt_batches;
            r.order.push_back(Objective::bt);
            r.directions.push_back(dir);
        }
        if (batch.empty()) continue;
        try {
            const double loss = translator.train_step(batch);
            if (dae) {
                dae_loss += loss;
                ++dae_losses;
            } else {
                bt_loss += loss;
                ++bt_losses;
            }
        } catch (const Error &e) {
            if (e.code() != Errc::translator_failure) throw;
            ++r.train_step_failures;
        }
    }
    r.dae_loss_mean = dae_losses ? dae_loss / static_cast<double>(dae_losses) : 0.0;
    r.bt_loss_mean = bt_losses ? bt_loss / static_cast<double>(bt_losses) : 0.0;
    return r;
}

// ---- checkpoint selection -------------------------------------------------------

enum class Criterion { min, max };

/// Epoch with the best score; ties go to the earliest epoch.
inline int select_checkpoint(const std::vector<std::pair<int, double>> &history, Criterion criterion) {
    if (history.empty()) throw Error(Errc::empty_history, "no validation history");
    auto best = history.front();
    for (const auto &h : history) {
        const bool better = criterion == Criterion::min ? h.second < best.second : h.second > best.second;
        if (better || (h.second == best.second && h.first < best.first)) best = h;
    }
    return best.first;
}

// ---- schedule plans ---------------------------------------------------------------

enum class PhaseKind { mlm, aer, dae_bt, finetune };

inline std::string_view to_string(PhaseKind k) {
    switch (k) {
    case PhaseKind::mlm: return "MLM";
    case PhaseKind::aer: return "AER";
    case PhaseKind::dae_bt: return "DAE+BT";
    case PhaseKind::finetune: return "FINETUNE";
    }
    return "?";
}

struct Phase {
    PhaseKind kind = PhaseKind::mlm;
    int epochs = 1;
    NoiseConfig noise;
    std::vector<Direction> pairs;  // DAE+BT language pairs, rotated per epoch
};

struct SchedulePlan {
    std::vector<Phase> phases;
    int beam_size = 5;
    std::uint64_t seed = 0;
    std::size_t batch_size = 8;
    Criterion criterion = Criterion::min;
};

/// JSON plan: {"phases":[{"kind":"MLM","epochs":1}, {"kind":"DAE+BT","epochs":3,
/// "noise":{...}, "pairs":[["cpp","cuda"]]}, ...], "beam_size":5, "seed":1,
/// "batch_size":8, "criterion":"min"}.
inline SchedulePlan parse_plan(const nlohmann::json &j) {
    auto bad = [](const std::string &m) { return Error(Errc::bad_plan, m); };
    SchedulePlan plan;
    try {
        plan.beam_size = j.value("beam_size", 5);
        plan.seed = j.value("seed", std::uint64_t{0});
        plan.batch_size = j.value("batch_size", std::size_t{8});
        const auto crit = j.value("criterion", std::string("min"));
        if (crit != "min" && crit != "max") throw bad("criterion must be min or max");
        plan.criterion = crit == "min" ? Criterion::min : Criterion::max;
        if (!j.contains("phases") || !j["phases"].is_array() || j["phases"].empty()) throw bad("plan has no phases");
        for (const auto &p : j["phases"]) {
            Phase ph;
            const auto kind = p.at("kind").get<std::string>();
            if (kind == "MLM") ph.kind = PhaseKind::mlm;
            else if (kind == "AER") ph.kind = PhaseKind::aer;
            else if (kind == "DAE+BT") ph.kind = PhaseKind::dae_bt;
            else if (kind == "FINETUNE") ph.kind = PhaseKind::finetune;
            else throw bad("unknown phase kind '" + kind + "'");
            ph.epochs = p.value("epochs", 1);
            if (ph.epochs < 1) throw bad("phase epochs must be >= 1");
            if (p.contains("noise")) ph.noise = p["noise"].get<NoiseConfig>();
            ph.noise.seed = plan.seed;
            ph.noise.validate();
            if (p.contains("pairs")) {
                for (const auto &pair : p["pairs"]) {
                    ph.pairs.emplace_back(parse_language(pair.at(0).get<std::string>()),
                                          parse_language(pair.at(1).get<std::string>()));
                }
            }
            if (ph.kind == PhaseKind::dae_bt && ph.pairs.empty()) throw bad("DAE+BT phase needs at least one pair");
            plan.phases.push_back(std::move(ph));
        }
    } catch (const nlohmann::json::exception &e) {
        throw bad(std::string("malformed plan: ") + e.what());
    }
    if (plan.beam_size < 1) throw bad("beam_size must be >= 1");
    if (plan.batch_size < 1) throw bad("batch_size must be >= 1");
    return plan;
}

struct PlanReport {
    std::vector<nlohmann::json> epochs;
    std::vector<std::pair<int, double>> history;  // global epoch, validation score
    std::optional<int> selected;
};

struct PlanInputs {
    std::map<Language, std::vector<TokenizedDocument>> corpora;
    std::map<Language, LanguageProfile> profiles;
    std::map<std::string, std::vector<int>> aer_labels;
    std::vector<std::pair<TokenizedDocument, TokenizedDocument>> finetune_pairs;  // (source, target)
    std::vector<TrainingExample> validation;
};

/// Runs every phase in order. Validation scores, when the translator has
/// them, are collected per global epoch and the best epoch is selected.
inline PlanReport run_plan(const SchedulePlan &plan, const PlanInputs &in, TranslatorPort &translator,
                           const Vocabulary &vocab, const std::function<void(const nlohmann::json &)> &on_epoch = {}) {
    PlanReport report;
    int global_epoch = 0;
    bool decoder_initialised = false;
    auto train_batches = [&](const std::vector<TrainingExample> &examples) {
        double total = 0.0;
        std::size_t n = 0;
        for (std::size_t b = 0; b < examples.size(); b += plan.batch_size) {
            const auto e = std::min(examples.size(), b + plan.batch_size);
            total += translator.train_step(std::vector<TrainingExample>(examples.begin() + static_cast<std::ptrdiff_t>(b),
                                                                        examples.begin() + static_cast<std::ptrdiff_t>(e)));
            ++n;
        }
        return std::make_pair(n, n ? total / static_cast<double>(n) : 0.0);
    };
    for (const auto &phase : plan.phases) {
        if ((phase.kind == PhaseKind::dae_bt || phase.kind == PhaseKind::finetune) && !decoder_initialised) {
            translator.init_decoder_from_encoder();
            decoder_initialised = true;
        }
        for (int e = 0; e < phase.epochs; ++e, ++global_epoch) {
            nlohmann::json j{{"phase", std::string(to_string(phase.kind))}, {"epoch", global_epoch}};
            switch (phase.kind) {
            case PhaseKind::mlm:
            case PhaseKind::aer: {
                const auto obj = phase.kind == PhaseKind::mlm ? Objective::mlm : Objective::aer;
                auto stream = emit_pretrain_stream(in.corpora, obj, e, phase.noise, vocab, &in.aer_labels);
                const auto [n, loss] = train_batches(stream.examples);
                j["batches"] = n;
                j["loss_mean"] = loss;
                j["skipped"] = stream.skipped;
                break;
            }
            case PhaseKind::dae_bt: {
                const auto &pair = phase.pairs[static_cast<std::size_t>(e) % phase.pairs.size()];
                static const std::vector<TokenizedDocument> none;
                auto find = [&](Language l) -> const std::vector<TokenizedDocument> & {
                    auto it = in.corpora.find(l);
                    return it == in.corpora.end() ? none : it->second;
                };
                DaeBtOptions opt;
                opt.batch_size = plan.batch_size;
                opt.beam_size = plan.beam_size;
                j["report"] = to_json(run_dae_bt_epoch(find(pair.first), find(pair.second), translator, vocab,
                                                       in.profiles, phase.noise, e, opt));
                break;
            }
            case PhaseKind::finetune: {
                std::vector<TrainingExample> examples;
                for (const auto &[src, tgt] : in.finetune_pairs) {
                    TrainingExample ex;
                    ex.objective = Objective::ft;
                    ex.src_lang = src.language;
                    ex.tgt_lang = tgt.language;
                    ex.epoch = e;
                    ex.input.push_back(vocab.language_token(src.language));
                    ex.input.insert(ex.input.end(), src.tokens.begin(), src.tokens.end());
                    ex.target = tgt.tokens;
                    examples.push_back(std::move(ex));
                }
                const auto [n, loss] = train_batches(examples);
                j["batches"] = n;
                j["loss_mean"] = loss;
                break;
            }
            }
            if (!in.validation.empty()) {
                if (auto score = translator.validate(in.validation)) {
                    report.history.emplace_back(global_epoch, *score);
                    j["validation"] = *score;
                }
            }
            if (on_epoch) on_epoch(j);
            report.epochs.push_back(std::move(j));
        }
    }
    if (!report.history.empty()) report.selected = select_checkpoint(report.history, plan.criterion);
    return report;
}

} // namespace forge
