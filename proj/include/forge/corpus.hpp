#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/language.hpp"
#include "forge/rng.hpp"
#include "forge/text.hpp"
#include "forge/tokenizer.hpp"

namespace forge {

struct Document {
    std::string doc_id;
    Language language = Language::cpp;
    std::string text;

    friend bool operator==(const Document &, const Document &) = default;
};

using Corpus = std::vector<Document>;

inline nlohmann::json to_json(const Document &d) {
    return nlohmann::json{{"doc_id", d.doc_id}, {"language", std::string(to_string(d.language))}, {"text", d.text}};
}

inline Document document_from_json(const nlohmann::json &j) {
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.language = parse_language(j.at("language").get<std::string>());
    d.text = j.at("text").get<std::string>();
    return d;
}

inline std::optional<Language> language_of_extension(const std::filesystem::path &p) {
    auto ext = to_lower(p.extension().string());
    if (ext == ".cu" || ext == ".cuh") return Language::cuda;
    if (ext == ".cpp" || ext == ".cc" || ext == ".cxx" || ext == ".hpp" || ext == ".hh" || ext == ".h" || ext == ".c") {
        return Language::cpp;
    }
    if (ext == ".f90" || ext == ".f95" || ext == ".f03" || ext == ".f" || ext == ".for") return Language::fortran;
    return std::nullopt;
}

inline std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path &p, std::string_view content) {
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write " + p.string());
    out << content;
}

/// Loads a JSONL corpus or walks a directory tree. Directory documents are
/// identified by their path relative to the root; files are visited in
/// sorted order so ids and ordering do not depend on the filesystem.
inline Corpus load_corpus(const std::filesystem::path &path, std::optional<Language> only = std::nullopt) {
    Corpus out;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto &e : std::filesystem::recursive_directory_iterator(path)) {
            if (e.is_regular_file() && language_of_extension(e.path())) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto &f : files) {
            const auto l = *language_of_extension(f);
            if (only && *only != l) continue;
            out.push_back(Document{std::filesystem::relative(f, path).generic_string(), l, read_file(f)});
        }
        return out;
    }
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto d = document_from_json(nlohmann::json::parse(line));
            if (only && d.language != *only) continue;
            out.push_back(std::move(d));
        } catch (const nlohmann::json::exception &e) {
            throw Error(Errc::schema, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::string corpus_to_jsonl(const Corpus &c) {
    std::string out;
    for (const auto &d : c) out += to_json(d).dump() + "\n";
    return out;
}

// ---- statistics -------------------------------------------------------------

struct StageStats {
    std::string stage;
    std::size_t input = 0;
    std::size_t retained = 0;
    std::size_t dropped = 0;

    friend bool operator==(const StageStats &, const StageStats &) = default;
};

/// Word-token counts bucketed by powers of two: bucket k holds [2^k, 2^(k+1)),
/// bucket 0 also holds empty documents.
struct CorpusStats {
    std::map<Language, std::size_t> files;
    std::map<Language, std::map<int, std::size_t>> token_histogram;
    std::vector<StageStats> stages;

    void add_stage(StageStats s) { stages.push_back(std::move(s)); }

    bool conserved() const {
        return std::all_of(stages.begin(), stages.end(),
                           [](const StageStats &s) { return s.retained + s.dropped == s.input; });
    }
};

inline std::size_t count_word_tokens(std::string_view text) { return word_tokens(text).size(); }

inline int histogram_bucket(std::size_t n) {
    int k = 0;
    while (n > 1) {
        n >>= 1;
        ++k;
    }
    return k;
}

inline CorpusStats corpus_stats(const Corpus &c) {
    CorpusStats s;
    for (const auto &d : c) {
        ++s.files[d.language];
        ++s.token_histogram[d.language][histogram_bucket(count_word_tokens(d.text))];
    }
    return s;
}

inline nlohmann::json to_json(const CorpusStats &s) {
    nlohmann::json j;
    j["files"] = nlohmann::json::object();
    for (const auto &[l, n] : s.files) j["files"][std::string(to_string(l))] = n;
    j["token_histogram"] = nlohmann::json::object();
    for (const auto &[l, h] : s.token_histogram) {
        auto &o = j["token_histogram"][std::string(to_string(l))];
        o = nlohmann::json::object();
        for (const auto &[b, n] : h) o[std::to_string(1ULL << b)] = n;
    }
    j["stages"] = nlohmann::json::array();
    for (const auto &st : s.stages) {
        j["stages"].push_back({{"stage", st.stage}, {"input", st.input}, {"retained", st.retained}, {"dropped", st.dropped}});
    }
    return j;
}

// ---- filters ------------------------------------------------------------------

struct FilterResult {
    Corpus retained;
    StageStats stats;
};

template <class Pred>
FilterResult filter_corpus(const Corpus &corpus, std::string stage, Pred keep) {
    FilterResult r;
    r.stats.stage = std::move(stage);
    r.stats.input = corpus.size();
    for (const auto &d : corpus) {
        if (keep(d)) r.retained.push_back(d);
    }
    r.stats.retained = r.retained.size();
    r.stats.dropped = r.stats.input - r.stats.retained;
    return r;
}

/// True when some keyword occurs as a whole word: not preceded or followed by
/// an identifier character.
inline bool contains_keyword(std::string_view text, const std::set<std::string> &keywords) {
    for (const auto &w : segment_words(text)) {
        if (w.blank()) continue;
        if (keywords.contains(std::string(text.substr(w.core_begin, w.end - w.core_begin)))) return true;
    }
    return false;
}

inline FilterResult filter_keywords(const Corpus &corpus, const std::set<std::string> &keywords) {
    if (keywords.empty()) throw Error(Errc::precondition, "keyword set is empty");
    return filter_corpus(corpus, "keywords", [&](const Document &d) { return contains_keyword(d.text, keywords); });
}

/// Keeps documents whose token count lies in [min_tokens, max_tokens]. Counts
/// are word tokens, or BPE tokens when a vocabulary is supplied.
inline FilterResult filter_length(const Corpus &corpus, std::size_t min_tokens = 10, std::size_t max_tokens = 1000,
                                  const Vocabulary *vocab = nullptr) {
    if (min_tokens == 0 || max_tokens == 0 || min_tokens >= max_tokens) {
        throw Error(Errc::precondition, "length bounds must be positive with min < max");
    }
    return filter_corpus(corpus, "length", [&](const Document &d) {
        const auto n = vocab ? vocab->encode(d.text, d.language).tokens.size() : count_word_tokens(d.text);
        return n >= min_tokens && n <= max_tokens;
    });
}

/// Down-samples the larger corpus to the size of the smaller one, uniformly
/// without replacement; kept documents stay in their original order.
inline std::pair<Corpus, Corpus> balance(const Corpus &a, const Corpus &b, CounterRng rng) {
    if (a.empty() || b.empty()) throw Error(Errc::precondition, "balance needs two non-empty corpora");
    auto sample = [&](const Corpus &c, std::size_t k) {
        std::vector<std::size_t> idx(c.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        rng.shuffle(std::span<std::size_t>(idx));
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        Corpus out;
        for (auto i : idx) out.push_back(c[i]);
        return out;
    };
    const auto k = std::min(a.size(), b.size());
    return {a.size() > k ? sample(a, k) : a, b.size() > k ? sample(b, k) : b};
}

// ---- synthetic pair filter ---------------------------------------------------

inline bool line_has_code_punctuation(std::string_view line) {
    static constexpr std::string_view punct = ";{}()[]=<>+*/&|!#%^~";
    return line.find_first_of(punct) != std::string_view::npos;
}

/// Fraction of non-blank lines without any code punctuation.
inline double natural_text_ratio(std::string_view text) {
    std::size_t lines = 0;
    std::size_t natural = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!trim(line).empty()) {
            ++lines;
            if (!line_has_code_punctuation(line)) ++natural;
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines == 0 ? 0.0 : static_cast<double>(natural) / static_cast<double>(lines);
}

struct SyntheticPair {
    std::string source;
    std::string candidate;
};

enum class PairVerdict { keep, empty, no_target_keyword, natural_text };

inline PairVerdict judge_pair(const SyntheticPair &p, const std::set<std::string> &target_keywords,
                              double natural_threshold = 0.4) {
    if (trim(p.candidate).empty()) return PairVerdict::empty;
    if (!contains_keyword(p.candidate, target_keywords)) return PairVerdict::no_target_keyword;
    if (natural_text_ratio(p.candidate) > natural_threshold) return PairVerdict::natural_text;
    return PairVerdict::keep;
}

inline std::vector<SyntheticPair> filter_synthetic_pairs(const std::vector<SyntheticPair> &pairs,
                                                         const std::set<std::string> &target_keywords,
                                                         double natural_threshold = 0.4) {
    std::vector<SyntheticPair> out;
    for (const auto &p : pairs) {
        if (judge_pair(p, target_keywords, natural_threshold) == PairVerdict::keep) out.push_back(p);
    }
    return out;
}

// ---- quality labeling ----------------------------------------------------------

enum class LabelSource { llm, classifier, manual };

constexpr std::string_view to_string(LabelSource s) noexcept {
    switch (s) {
    case LabelSource::llm: return "llm";
    case LabelSource::classifier: return "classifier";
    case LabelSource::manual: return "manual";
    }
    return "?";
}

inline LabelSource parse_label_source(std::string_view s) {
    if (s == "llm") return LabelSource::llm;
    if (s == "classifier") return LabelSource::classifier;
    if (s == "manual") return LabelSource::manual;
    throw Error(Errc::schema, "unknown label source '" + std::string(s) + "'");
}

struct QualityLabel {
    std::string doc_id;
    bool verdict = false;
    LabelSource source = LabelSource::llm;

    friend bool operator==(const QualityLabel &, const QualityLabel &) = default;
};

inline nlohmann::json to_json(const QualityLabel &l) {
    return nlohmann::json{{"doc_id", l.doc_id}, {"verdict", l.verdict ? "yes" : "no"}, {"source", std::string(to_string(l.source))}};
}

inline constexpr std::string_view quality_prompt_template =
    "Determine the educational value of the following code for a student whose goal is to learn C++ coding "
    "concepts. If it has educational value, return only \"Yes\", else, return \"No\".\nCode:{code}\nEducational "
    "value:";

inline std::string quality_prompt(std::string_view code) {
    std::string out(quality_prompt_template);
    const auto at = out.find("{code}");
    out.replace(at, 6, code);
    return out;
}

/// Maps a raw labeler reply to a verdict: surrounding whitespace, quotes and
/// punctuation are stripped and case is ignored.
inline std::optional<bool> normalize_verdict(std::string_view reply) {
    std::string s = to_lower(trim(reply));
    auto junk = [](char c) {
        return is_space_char(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '`' || c == '.' ||
               c == '!' || c == ',' || c == '*' || c == ':' || c == ';';
    };
    while (!s.empty() && junk(s.front())) s.erase(s.begin());
    while (!s.empty() && junk(s.back())) s.pop_back();
    if (s == "yes") return true;
    if (s == "no") return false;
    return std::nullopt;
}

/// Something that answers a quality prompt with raw text. Implementations
/// throw Error(labeler_unavailable) on transport failures.
class Labeler {
  public:
    virtual ~Labeler() = default;
    virtual std::string complete(const std::string &prompt) = 0;
    virtual LabelSource source() const { return LabelSource::llm; }
};

/// Append-only JSONL cache of verdicts keyed by doc_id.
class LabelCache {
  public:
    LabelCache() = default;
    explicit LabelCache(std::filesystem::path path) : path_(std::move(path)) {
        if (path_.empty() || !std::filesystem::exists(path_)) return;
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            const auto j = nlohmann::json::parse(line);
            QualityLabel l;
            l.doc_id = j.at("doc_id").get<std::string>();
            const auto v = normalize_verdict(j.at("verdict").get<std::string>());
            if (!v) throw Error(Errc::schema, "bad verdict in label cache for " + l.doc_id);
            l.verdict = *v;
            l.source = parse_label_source(j.value("source", "llm"));
            labels_[l.doc_id] = l;
        }
    }

    std::optional<QualityLabel> find(const std::string &doc_id) const {
        std::lock_guard lock(mu_);
        auto it = labels_.find(doc_id);
        if (it == labels_.end()) return std::nullopt;
        return it->second;
    }

    void put(const QualityLabel &l) {
        std::lock_guard lock(mu_);
        labels_[l.doc_id] = l;
        if (!path_.empty()) {
            std::ofstream out(path_, std::ios::app);
            out << to_json(l).dump() << '\n';
        }
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return labels_.size();
    }

  private:
    std::filesystem::path path_;
    std::map<std::string, QualityLabel> labels_;
    mutable std::mutex mu_;
};

struct QualityOptions {
    std::size_t max_in_flight = 4;
    int max_attempts = 3;
    std::chrono::milliseconds backoff{200};
    std::function<void(const std::string &)> log;  // malformed replies and retries
};

struct QualityResult {
    Corpus retained;
    std::vector<QualityLabel> labels;  // in corpus order, malformed documents omitted
    std::vector<std::string> malformed;
    StageStats stats;
};

/// Keeps documents judged "Yes". Cached verdicts are used first; the labeler
/// is asked only for the rest, with at most max_in_flight requests running
/// and retries with exponential backoff on transport errors.
inline QualityResult quality_filter(const Corpus &corpus, Labeler *labeler, LabelCache &cache,
                                    const QualityOptions &opt = {}) {
    std::vector<std::optional<QualityLabel>> verdicts(corpus.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (auto l = cache.find(corpus[i].doc_id)) {
            verdicts[i] = l;
        } else {
            todo.push_back(i);
        }
    }
    if (!todo.empty() && labeler == nullptr) {
        throw Error(Errc::labeler_unavailable, std::to_string(todo.size()) +
                                                   " documents have no cached label and no labeler is configured");
    }

    std::vector<bool> malformed(corpus.size(), false);
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    auto worker = [&] {
        while (true) {
            std::size_t k;
            {
                std::lock_guard lock(mu);
                if (next >= todo.size() || failure) return;
                k = todo[next++];
            }
            const auto &doc = corpus[k];
            std::string reply;
            for (int attempt = 1;; ++attempt) {
                try {
                    reply = labeler->complete(quality_prompt(doc.text));
                    break;
                } catch (const Error &e) {
                    if (e.code() != Errc::labeler_unavailable || attempt >= opt.max_attempts) {
                        std::lock_guard lock(mu);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                    if (opt.log) opt.log("retrying " + doc.doc_id + ": " + e.what());
                    std::this_thread::sleep_for(opt.backoff * (1 << (attempt - 1)));
                }
            }
            const auto v = normalize_verdict(reply);
            std::lock_guard lock(mu);
            if (!v) {
                malformed[k] = true;
                if (opt.log) opt.log("MalformedVerdict for " + doc.doc_id + ": '" + reply + "'");
                continue;
            }
            QualityLabel l{doc.doc_id, *v, labeler->source()};
            cache.put(l);
            verdicts[k] = l;
        }
    };
    const auto threads = std::max<std::size_t>(1, std::min(opt.max_in_flight, todo.size()));
    if (!todo.empty()) {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto &t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    QualityResult r;
    r.stats.stage = "quality";
    r.stats.input = corpus.size();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (malformed[i]) {
            r.malformed.push_back(corpus[i].doc_id);
            continue;
        }
        r.labels.push_back(*verdicts[i]);
        if (verdicts[i]->verdict) r.retained.push_back(corpus[i]);
    }
    r.stats.retained = r.retained.size();
    r.stats.dropped = r.stats.input - r.stats.retained;
    return r;
}

} // namespace forge
