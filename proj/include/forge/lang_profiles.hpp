#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>

#include "forge/error.hpp"
#include "forge/language.hpp"
#include "forge/text.hpp"
#include "forge/tokenizer.hpp"

namespace forge {

/// Reserved keywords and word-frequency table of one language.
struct LanguageProfile {
    Language language = Language::cpp;
    std::set<std::string> keywords;
    std::map<std::string, std::uint64_t> freq;
    std::uint64_t total = 0;

    bool is_keyword(std::string_view word) const {
        if (language == Language::fortran) return keywords.contains(to_lower(word));
        return keywords.contains(std::string(word));
    }

    double probability(std::string_view word) const {
        if (total == 0) return 0.0;
        auto it = freq.find(std::string(word));
        return it == freq.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
    }

    bool sampling_enabled() const noexcept { return total > 0; }

    void count(std::string_view word, std::uint64_t n = 1) {
        freq[std::string(word)] += n;
        total += n;
    }

    friend bool operator==(const LanguageProfile &, const LanguageProfile &) = default;
};

/// Counts word surface forms (post-decode, without leading whitespace).
inline LanguageProfile build_profile(std::span<const TokenizedDocument> corpus, Language language,
                                     const Vocabulary &vocab, std::set<std::string> keywords) {
    LanguageProfile p;
    p.language = language;
    p.keywords = std::move(keywords);
    for (const auto &doc : corpus) {
        if (doc.language != language) {
            throw Error(Errc::language_mismatch, "document '" + doc.doc_id + "' is " +
                                                     std::string(to_string(doc.language)) + ", profile is " +
                                                     std::string(to_string(language)));
        }
        for (std::size_t i = 0; i < doc.word_count(); ++i) {
            auto w = word_core(doc, i, vocab);
            if (!w.empty()) p.count(w);
        }
    }
    return p;
}

/// Same counts as build_profile, straight from source text.
inline LanguageProfile build_profile_from_text(std::span<const std::string> corpus, Language language,
                                               std::set<std::string> keywords) {
    LanguageProfile p;
    p.language = language;
    p.keywords = std::move(keywords);
    for (const auto &text : corpus) {
        for (auto &w : word_tokens(text)) p.count(w);
    }
    return p;
}

inline LanguageProfile merge_profiles(const LanguageProfile &a, const LanguageProfile &b) {
    if (a.language != b.language) throw Error(Errc::language_mismatch, "cannot merge profiles of different languages");
    LanguageProfile out = a;
    out.keywords.insert(b.keywords.begin(), b.keywords.end());
    for (const auto &[w, n] : b.freq) out.count(w, n);
    return out;
}

/// Line records: `language <L>`, `keyword <tok>`, `freq <tok> <count>`.
inline std::string serialize_profile(const LanguageProfile &p) {
    std::ostringstream os;
    os << "language " << to_string(p.language) << '\n';
    for (const auto &k : p.keywords) os << "keyword " << detail::escape_token(k) << '\n';
    for (const auto &[w, n] : p.freq) os << "freq " << detail::escape_token(w) << ' ' << n << '\n';
    return os.str();
}

inline LanguageProfile parse_profile(std::string_view content) {
    LanguageProfile p;
    bool have_language = false;
    std::istringstream is{std::string(content)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string kind;
        std::string tok;
        ls >> kind >> tok;
        auto bad = [&] { return Error(Errc::bad_profile_file, "line " + std::to_string(lineno) + ": " + line); };
        if (kind == "language") {
            auto l = try_parse_language(tok);
            if (!l) throw bad();
            p.language = *l;
            have_language = true;
            continue;
        }
        auto word = detail::unescape_token(tok);
        if (!word || word->empty()) throw bad();
        if (kind == "keyword") {
            p.keywords.insert(*word);
        } else if (kind == "freq") {
            std::uint64_t n = 0;
            if (!(ls >> n) || n == 0) throw bad();
            p.count(*word, n);
        } else {
            throw bad();
        }
    }
    if (!have_language) throw Error(Errc::bad_profile_file, "missing 'language' record");
    return p;
}

} // namespace forge
