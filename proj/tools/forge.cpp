#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "forge/aer.hpp"
#include "forge/compile_repair.hpp"
#include "forge/corpus.hpp"
#include "forge/error.hpp"
#include "forge/external_translator.hpp"
#include "forge/labeler_http.hpp"
#include "forge/lang_profiles.hpp"
#include "forge/metrics.hpp"
#include "forge/noise.hpp"
#include "forge/orchestrator.hpp"
#include "forge/tokenizer.hpp"
#include "forge/translator.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace forge;

namespace {

constexpr const char *version = "0.3.0";

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

/// Digest of a file, or of a directory's files in sorted order.
std::string digest_path(const fs::path &p) {
    if (!fs::is_directory(p)) return sha256_hex(read_file(p));
    std::vector<fs::path> files;
    for (const auto &e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto &f : files) acc += fs::relative(f, p).generic_string() + " " + sha256_hex(read_file(f)) + "\n";
    return sha256_hex(acc);
}

struct Globals {
    std::uint64_t seed = 0;
    std::string config;
    unsigned jobs = 1;
    std::string log_level = "info";
    std::string manifest;
};

/// Records what a stage read and wrote; written when the stage finishes.
class Run {
  public:
    Run(const Globals &g, std::vector<std::string> argv) : g_(g), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {}

    void input(const fs::path &p) {
        if (!p.empty() && fs::exists(p)) inputs_[p.string()] = digest_path(p);
    }

    /// Writes to `path`, or stdout when empty or "-".
    void output(const std::string &path, const std::string &content) {
        if (path.empty() || path == "-") {
            std::fwrite(content.data(), 1, content.size(), stdout);
            std::fflush(stdout);
            outputs_["-"] = sha256_hex(content);
            return;
        }
        write_file(path, content);
        outputs_[path] = sha256_hex(content);
        if (primary_.empty()) primary_ = path;
    }

    void finish() {
        std::string config_hash;
        if (!g_.config.empty()) config_hash = sha256_hex(read_file(g_.config));
        const json m{{"command", argv_},
                     {"config_hash", config_hash},
                     {"seed", g_.seed},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"version", version},
                     {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()}};
        std::string where = g_.manifest;
        if (where.empty()) where = primary_.empty() ? "forge.manifest.json" : primary_ + ".manifest.json";
        write_file(where, m.dump(2) + "\n");
        spdlog::debug("manifest written to {}", where);
    }

  private:
    const Globals &g_;
    std::vector<std::string> argv_;
    std::chrono::steady_clock::time_point start_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
    std::string primary_;
};

json load_config(const Globals &g) {
    if (g.config.empty()) return json::object();
    try {
        return json::parse(read_file(g.config));
    } catch (const json::exception &e) {
        throw Error(Errc::schema, g.config + ": " + e.what());
    }
}

std::string slurp_stdin() {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
}

std::set<std::string> load_keywords(const std::string &path, Language l) {
    return path.empty() ? default_keywords(l) : parse_keyword_list(read_file(path));
}

/// Text documents from files or directories, in argument order.
Corpus load_inputs(const std::vector<std::string> &paths, Language l, Run &run) {
    Corpus out;
    for (const auto &p : paths) {
        run.input(p);
        if (fs::is_directory(p) || p.ends_with(".jsonl")) {
            for (auto &d : load_corpus(p, l)) out.push_back(std::move(d));
        } else {
            out.push_back(Document{p, l, read_file(p)});
        }
    }
    return out;
}

std::vector<json> read_jsonl(const std::string &path) {
    std::istringstream in(path.empty() || path == "-" ? slurp_stdin() : read_file(path));
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception &e) {
            throw Error(Errc::schema, path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

/// A tokenized document from a JSONL record carrying either text or tokens.
TokenizedDocument doc_from_record(const json &j, const Vocabulary &vocab) {
    const auto l = parse_language(j.at("language").get<std::string>());
    const auto id = j.value("doc_id", std::string());
    if (j.contains("text")) return vocab.encode(j["text"].get<std::string>(), l, id);
    const auto tokens = j.at("tokens").get<std::vector<TokenId>>();
    return vocab.encode(vocab.decode(tokens), l, id);
}

std::map<Language, LanguageProfile> load_profiles(const std::string &dir, Run &run) {
    std::map<Language, LanguageProfile> out;
    if (dir.empty()) return out;
    for (auto l : all_languages) {
        const auto p = fs::path(dir) / (std::string(to_string(l)) + ".profile");
        if (!fs::exists(p)) continue;
        run.input(p);
        out.emplace(l, parse_profile(read_file(p)));
    }
    return out;
}

std::unique_ptr<TranslatorPort> make_translator(const std::string &spec, const Vocabulary &vocab, Run &run) {
    if (spec == "stub-identity") return std::make_unique<StubIdentity>();
    if (spec.starts_with("stub-dict:")) {
        const auto path = spec.substr(10);
        run.input(path);
        return std::make_unique<StubDictionary>(vocab, StubDictionary::parse_table(read_file(path)));
    }
    if (spec.starts_with("external:")) return std::make_unique<ExternalTranslator>(spec.substr(9));
    throw Error(Errc::usage, "unknown translator '" + spec + "' (stub-identity, stub-dict:FILE, external:CMD)");
}

} // namespace

int main(int argc, char **argv) {
    auto logger = spdlog::stderr_color_mt("forge");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");

    const std::vector<std::string> args(argv, argv + argc);
    Globals g;
    CLI::App app{"forge: corpus, noise, orchestration and evaluation stages for code translation"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--config", g.config, "JSON config file");
    app.add_option("--jobs", g.jobs, "Worker threads for parallel stages")->check(CLI::PositiveNumber);
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");
    app.add_option("--manifest", g.manifest, "Where to write the run manifest");

    std::function<void(Run &)> action;

    // tok -------------------------------------------------------------------------
    auto *tok = app.add_subcommand("tok", "Byte-level BPE vocabulary");
    tok->require_subcommand(1);
    {
        auto *train = tok->add_subcommand("train", "Train a vocabulary");
        auto vocab_size = std::make_shared<std::size_t>(32000);
        auto out = std::make_shared<std::string>();
        auto inputs = std::make_shared<std::vector<std::string>>();
        train->add_option("--vocab-size", *vocab_size);
        train->add_option("--out", *out)->required();
        train->add_option("corpus", *inputs, "Files or directories")->required()->check(CLI::ExistingPath);
        train->callback([=, &action] {
            action = [=](Run &run) {
                std::vector<std::string> texts;
                for (const auto &p : *inputs) {
                    run.input(p);
                    if (fs::is_directory(p) || p.ends_with(".jsonl")) {
                        for (auto &d : load_corpus(p)) texts.push_back(std::move(d.text));
                    } else {
                        texts.push_back(read_file(p));
                    }
                }
                const auto vocab = train_bpe(texts, *vocab_size);
                spdlog::info("trained {} entries from {} documents", vocab.size(), texts.size());
                run.output(*out, vocab.serialize());
            };
        });

        auto *enc = tok->add_subcommand("encode", "Encode text to token ids (JSONL)");
        auto vocab_path = std::make_shared<std::string>();
        auto lang = std::make_shared<std::string>();
        auto files = std::make_shared<std::vector<std::string>>();
        auto enc_out = std::make_shared<std::string>();
        enc->add_option("--vocab", *vocab_path)->required()->check(CLI::ExistingFile);
        enc->add_option("--lang", *lang)->required();
        enc->add_option("--out", *enc_out);
        enc->add_option("files", *files)->check(CLI::ExistingPath);
        enc->callback([=, &action] {
            action = [=](Run &run) {
                run.input(*vocab_path);
                const auto vocab = Vocabulary::parse(read_file(*vocab_path));
                const auto l = parse_language(*lang);
                Corpus docs = files->empty() ? Corpus{Document{"-", l, slurp_stdin()}} : load_inputs(*files, l, run);
                std::string out;
                for (const auto &d : docs) {
                    const auto t = vocab.encode(d.text, l, d.doc_id);
                    out += json{{"doc_id", d.doc_id}, {"language", std::string(to_string(l))}, {"tokens", t.tokens}}.dump() + "\n";
                }
                run.output(*enc_out, out);
            };
        });
    }

    // profile ---------------------------------------------------------------------
    auto *profile = app.add_subcommand("profile", "Per-language token frequency profiles");
    profile->require_subcommand(1);
    {
        auto *build = profile->add_subcommand("build", "Build a profile from a corpus");
        auto lang = std::make_shared<std::string>();
        auto keywords = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto inputs = std::make_shared<std::vector<std::string>>();
        build->add_option("--lang", *lang)->required();
        build->add_option("--keywords", *keywords, "Keyword list (default: built-in)")->check(CLI::ExistingFile);
        build->add_option("--out", *out)->required();
        build->add_option("corpus", *inputs)->required()->check(CLI::ExistingPath);
        build->callback([=, &action] {
            action = [=](Run &run) {
                const auto l = parse_language(*lang);
                if (!keywords->empty()) run.input(*keywords);
                std::vector<std::string> texts;
                for (auto &d : load_inputs(*inputs, l, run)) texts.push_back(std::move(d.text));
                const auto p = build_profile_from_text(texts, l, load_keywords(*keywords, l));
                run.output(*out, serialize_profile(p));
            };
        });
    }

    // aer -------------------------------------------------------------------------
    auto *aer = app.add_subcommand("aer", "Abstract entity recognition labels");
    aer->require_subcommand(1);
    {
        auto *label = aer->add_subcommand("label", "Label documents (JSONL)");
        auto lang = std::make_shared<std::string>();
        auto vocab_path = std::make_shared<std::string>();
        auto tags = std::make_shared<std::string>();
        auto mapping = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto files = std::make_shared<std::vector<std::string>>();
        label->add_option("--lang", *lang)->required();
        label->add_option("--vocab", *vocab_path)->required()->check(CLI::ExistingFile);
        label->add_option("--tags", *tags, "Tag set file (default: built-in)")->check(CLI::ExistingFile);
        label->add_option("--mapping", *mapping, "Node-kind mapping file (default: built-in)")->check(CLI::ExistingFile);
        label->add_option("--out", *out);
        label->add_option("files", *files)->required()->check(CLI::ExistingPath);
        label->callback([=, &action] {
            action = [=](Run &run) {
                const auto l = parse_language(*lang);
                run.input(*vocab_path);
                const auto vocab = Vocabulary::parse(read_file(*vocab_path));
                AerTagSet tagset = default_tagset();
                if (!tags->empty()) {
                    run.input(*tags);
                    tagset = parse_tagset(read_file(*tags));
                }
                AerMapping map = default_mapping(l);
                if (!mapping->empty()) {
                    run.input(*mapping);
                    map = parse_mapping(read_file(*mapping));
                }
                std::string text;
                std::size_t failed = 0;
                for (const auto &d : load_inputs(*files, l, run)) {
                    try {
                        text += to_json(extract_labels(d.text, l, vocab, tagset, map, d.doc_id)).dump() + "\n";
                    } catch (const Error &e) {
                        if (e.code() != Errc::parse_failure) throw;
                        ++failed;
                        spdlog::warn("{}", e.what());
                    }
                }
                if (failed) spdlog::warn("{} documents skipped", failed);
                run.output(*out, text);
            };
        });
    }

    // noise -----------------------------------------------------------------------
    auto *noise = app.add_subcommand("noise", "Corrupt documents into training examples");
    noise->require_subcommand(1);
    for (const std::string kind : {"dae", "mlm"}) {
        auto *sub = noise->add_subcommand(kind, kind == "dae" ? "Denoising auto-encoding examples" : "Masked language modeling examples");
        auto epoch = std::make_shared<int>(0);
        auto profiles = std::make_shared<std::string>();
        auto vocab_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto input = std::make_shared<std::string>();
        sub->add_option("--epoch", *epoch)->check(CLI::NonNegativeNumber);
        if (kind == "dae") sub->add_option("--profiles", *profiles, "Directory of <lang>.profile files")->required()->check(CLI::ExistingDirectory);
        sub->add_option("--vocab", *vocab_path)->required()->check(CLI::ExistingFile);
        sub->add_option("--out", *out);
        sub->add_option("input", *input, "JSONL documents {doc_id, language, text|tokens}; '-' for stdin")->required();
        sub->callback([=, &action, &g] {
            action = [=, &g](Run &run) {
                auto cfg_json = load_config(g);
                NoiseConfig cfg = cfg_json.contains("noise") ? cfg_json["noise"].get<NoiseConfig>() : cfg_json.get<NoiseConfig>();
                cfg.seed = g.seed;
                cfg.validate();
                run.input(*vocab_path);
                if (*input != "-") run.input(*input);
                const auto vocab = Vocabulary::parse(read_file(*vocab_path));
                const auto profs = load_profiles(*profiles, run);
                std::string text;
                for (const auto &rec : read_jsonl(*input)) {
                    const auto doc = doc_from_record(rec, vocab);
                    auto rng = example_rng(cfg.seed, doc.doc_id, *epoch);
                    const auto ex = kind == "dae" ? corrupt_dae(doc, vocab, profs, cfg, *epoch, rng)
                                                  : corrupt_mlm(doc, vocab, cfg, rng, *epoch);
                    text += to_json(ex).dump() + "\n";
                }
                run.output(*out, text);
            };
        });
    }

    // corpus ----------------------------------------------------------------------
    auto *corpus = app.add_subcommand("corpus", "Corpus filtering and statistics");
    corpus->require_subcommand(1);
    {
        auto *filter = corpus->add_subcommand("filter", "Keyword and length filters");
        auto lang = std::make_shared<std::string>();
        auto keywords = std::make_shared<std::string>();
        auto min_tokens = std::make_shared<std::size_t>(10);
        auto max_tokens = std::make_shared<std::size_t>(1000);
        auto vocab_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto input = std::make_shared<std::string>();
        filter->add_option("--lang", *lang)->required();
        filter->add_option("--keywords", *keywords)->check(CLI::ExistingFile);
        filter->add_option("--min-tokens", *min_tokens);
        filter->add_option("--max-tokens", *max_tokens);
        filter->add_option("--vocab", *vocab_path, "Count BPE tokens instead of words")->check(CLI::ExistingFile);
        filter->add_option("--out", *out);
        filter->add_option("input", *input, "Directory or JSONL")->required()->check(CLI::ExistingPath);
        filter->callback([=, &action] {
            action = [=](Run &run) {
                const auto l = parse_language(*lang);
                run.input(*input);
                if (!keywords->empty()) run.input(*keywords);
                const auto docs = load_corpus(*input, l);
                std::optional<Vocabulary> vocab;
                if (!vocab_path->empty()) {
                    run.input(*vocab_path);
                    vocab = Vocabulary::parse(read_file(*vocab_path));
                }
                auto stats = corpus_stats(docs);
                auto kw = filter_keywords(docs, load_keywords(*keywords, l));
                auto len = filter_length(kw.retained, *min_tokens, *max_tokens, vocab ? &*vocab : nullptr);
                stats.add_stage(kw.stats);
                stats.add_stage(len.stats);
                spdlog::info("{}", to_json(stats).dump());
                run.output(*out, corpus_to_jsonl(len.retained));
            };
        });

        auto *bal = corpus->add_subcommand("balance", "Down-sample two corpora to equal size");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto out_a = std::make_shared<std::string>();
        auto out_b = std::make_shared<std::string>();
        bal->add_option("a", *a)->required()->check(CLI::ExistingPath);
        bal->add_option("b", *b)->required()->check(CLI::ExistingPath);
        bal->add_option("--out-a", *out_a)->required();
        bal->add_option("--out-b", *out_b)->required();
        bal->callback([=, &action, &g] {
            action = [=, &g](Run &run) {
                run.input(*a);
                run.input(*b);
                const auto [ra, rb] = balance(load_corpus(*a), load_corpus(*b), CounterRng(g.seed));
                run.output(*out_a, corpus_to_jsonl(ra));
                run.output(*out_b, corpus_to_jsonl(rb));
            };
        });

        auto *quality = corpus->add_subcommand("quality", "Keep documents an LLM judges educational");
        auto q_input = std::make_shared<std::string>();
        auto cache = std::make_shared<std::string>();
        auto q_out = std::make_shared<std::string>();
        auto in_flight = std::make_shared<std::size_t>(4);
        quality->add_option("input", *q_input)->required()->check(CLI::ExistingPath);
        quality->add_option("--cache", *cache, "Verdict cache (JSONL)")->required();
        quality->add_option("--max-in-flight", *in_flight)->check(CLI::PositiveNumber);
        quality->add_option("--out", *q_out);
        quality->callback([=, &action] {
            action = [=](Run &run) {
                run.input(*q_input);
                run.input(*cache);
                const auto docs = load_corpus(*q_input);
                LabelCache label_cache{fs::path(*cache)};
                std::unique_ptr<Labeler> labeler;
                if (auto cfg = HttpLabelerConfig::from_env()) labeler = std::make_unique<HttpLabeler>(*cfg);
                QualityOptions opt;
                opt.max_in_flight = *in_flight;
                opt.log = [](const std::string &m) { spdlog::warn("{}", m); };
                const auto r = quality_filter(docs, labeler.get(), label_cache, opt);
                spdlog::info("quality: {} in, {} kept, {} malformed", r.stats.input, r.stats.retained, r.malformed.size());
                run.output(*q_out, corpus_to_jsonl(r.retained));
            };
        });

        auto *stats = corpus->add_subcommand("stats", "Per-language counts and length histogram");
        auto s_input = std::make_shared<std::string>();
        auto s_out = std::make_shared<std::string>();
        stats->add_option("input", *s_input)->required()->check(CLI::ExistingPath);
        stats->add_option("--out", *s_out);
        stats->callback([=, &action] {
            action = [=](Run &run) {
                run.input(*s_input);
                run.output(*s_out, to_json(corpus_stats(load_corpus(*s_input))).dump(2) + "\n");
            };
        });
    }

    // train -----------------------------------------------------------------------
    auto *train = app.add_subcommand("train", "Run a training schedule against a translator");
    {
        auto plan = std::make_shared<std::string>();
        auto translator = std::make_shared<std::string>("stub-identity");
        auto vocab_path = std::make_shared<std::string>();
        auto corpora = std::make_shared<std::vector<std::string>>();
        auto profiles = std::make_shared<std::string>();
        auto aer_labels = std::make_shared<std::string>();
        auto finetune = std::make_shared<std::string>();
        auto validation = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        train->add_option("--plan", *plan)->required()->check(CLI::ExistingFile);
        train->add_option("--translator", *translator, "stub-identity | stub-dict:FILE | external:CMD");
        train->add_option("--vocab", *vocab_path)->required()->check(CLI::ExistingFile);
        train->add_option("--corpus", *corpora, "LANG=PATH (directory or JSONL), repeatable")->required();
        train->add_option("--profiles", *profiles)->check(CLI::ExistingDirectory);
        train->add_option("--aer-labels", *aer_labels, "JSONL from `aer label`")->check(CLI::ExistingFile);
        train->add_option("--finetune", *finetune, "JSONL {source, target, src_lang, tgt_lang}")->check(CLI::ExistingFile);
        train->add_option("--validation", *validation, "JSONL training examples")->check(CLI::ExistingFile);
        train->add_option("--out", *out, "Report (JSON)");
        train->callback([=, &action, &g] {
            action = [=, &g](Run &run) {
                run.input(*plan);
                run.input(*vocab_path);
                auto sp = parse_plan(json::parse(read_file(*plan)));
                sp.seed = g.seed != 0 ? g.seed : sp.seed;
                for (auto &ph : sp.phases) ph.noise.seed = sp.seed;
                const auto vocab = Vocabulary::parse(read_file(*vocab_path));
                PlanInputs in;
                for (const auto &c : *corpora) {
                    const auto eq = c.find('=');
                    if (eq == std::string::npos) throw Error(Errc::usage, "--corpus expects LANG=PATH, got '" + c + "'");
                    const auto l = parse_language(c.substr(0, eq));
                    const auto path = c.substr(eq + 1);
                    run.input(path);
                    auto &docs = in.corpora[l];
                    for (const auto &d : load_corpus(path, l)) docs.push_back(vocab.encode(d.text, l, d.doc_id));
                }
                in.profiles = load_profiles(*profiles, run);
                if (!aer_labels->empty()) {
                    run.input(*aer_labels);
                    for (const auto &r : read_jsonl(*aer_labels)) {
                        in.aer_labels[r.at("doc_id").get<std::string>()] = r.at("labels").get<std::vector<int>>();
                    }
                }
                if (!finetune->empty()) {
                    run.input(*finetune);
                    for (const auto &r : read_jsonl(*finetune)) {
                        const auto sl = parse_language(r.at("src_lang").get<std::string>());
                        const auto tl = parse_language(r.at("tgt_lang").get<std::string>());
                        in.finetune_pairs.emplace_back(vocab.encode(r.at("source").get<std::string>(), sl),
                                                       vocab.encode(r.at("target").get<std::string>(), tl));
                    }
                }
                if (!validation->empty()) {
                    run.input(*validation);
                    for (const auto &r : read_jsonl(*validation)) in.validation.push_back(training_example_from_json(r));
                }
                auto port = make_translator(*translator, vocab, run);
                const auto report = run_plan(sp, in, *port, vocab, [](const json &e) { spdlog::info("{}", e.dump()); });
                json j{{"epochs", report.epochs}};
                j["selected_epoch"] = report.selected ? json(*report.selected) : json(nullptr);
                run.output(*out, j.dump(2) + "\n");
            };
        });
    }

    // score -----------------------------------------------------------------------
    auto *score = app.add_subcommand("score", "BLEU, CodeBLEU, ChrF and ROUGE-L over hypothesis/reference pairs");
    {
        auto lang = std::make_shared<std::string>();
        auto input = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        score->add_option("--lang", *lang)->required();
        score->add_option("pairs", *input, "JSONL {id, hypothesis, reference, language}")->required()->check(CLI::ExistingFile);
        score->add_option("--out", *out);
        score->callback([=, &action] {
            action = [=](Run &run) {
                const auto l = parse_language(*lang);
                run.input(*input);
                std::vector<ScorePair> pairs;
                for (const auto &r : read_jsonl(*input)) {
                    if (r.contains("language") && parse_language(r["language"].get<std::string>()) != l) {
                        throw Error(Errc::language_mismatch, "pair " + r.value("id", std::string("?")) + " is not " + *lang);
                    }
                    pairs.push_back({r.value("id", std::to_string(pairs.size())), r.at("hypothesis").get<std::string>(),
                                     r.at("reference").get<std::string>()});
                }
                run.output(*out, to_json(corpus_report(pairs, l)).dump(2) + "\n");
            };
        });
    }

    // compile ---------------------------------------------------------------------
    auto *comp = app.add_subcommand("compile", "Compile generated code, classify and repair failures");
    {
        auto lang = std::make_shared<std::string>();
        auto adapter = std::make_shared<std::string>();
        auto do_repair = std::make_shared<bool>(false);
        auto input = std::make_shared<std::string>();
        auto report = std::make_shared<std::string>();
        comp->add_option("--lang", *lang)->required();
        comp->add_option("--adapter", *adapter, "Adapter name (nvcc, cuda-gxx-shim, g++, gfortran) or JSON file");
        comp->add_flag("--repair", *do_repair, "Apply the quick fixes and recompile");
        comp->add_option("input", *input, "Directory or JSONL")->required()->check(CLI::ExistingPath);
        comp->add_option("--report", *report);
        comp->callback([=, &action, &g] {
            action = [=, &g](Run &run) {
                const auto l = parse_language(*lang);
                run.input(*input);
                CompilerAdapter a;
                if (adapter->empty()) {
                    a = default_adapter(l);
                } else if (fs::exists(*adapter)) {
                    run.input(*adapter);
                    a = adapter_from_json(json::parse(read_file(*adapter)));
                } else {
                    a = builtin_adapter(*adapter);
                }
                if (!a.available()) throw Error(Errc::compiler_missing, "'" + a.executable() + "' not found for adapter " + a.name);
                spdlog::info("compiling with {}", a.name);
                const auto docs = load_corpus(*input, l);
                const auto r = compilation_accuracy(docs, a, *do_repair, g.jobs);
                spdlog::info("compile accuracy {:.2f}% ({}/{})", r.percentage, r.compiled, r.total);
                run.output(*report, to_json(r).dump(2) + "\n");
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    spdlog::set_level(spdlog::level::from_str(g.log_level));

    try {
        Run run(g, args);
        action(run);
        run.finish();
        return 0;
    } catch (const Error &e) {
        spdlog::error("{}", e.what());
        if (e.code() == Errc::usage) return 2;
        return is_external(e.code()) ? 4 : 3;
    } catch (const json::exception &e) {
        spdlog::error("SchemaError: {}", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error &e) {
        spdlog::error("IoError: {}", e.what());
        return 3;
    }
}
