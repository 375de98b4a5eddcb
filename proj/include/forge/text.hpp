#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// A word of the source text. Whitespace preceding a word is attached to it,
/// so the words of a text partition its bytes. `core` excludes that
/// whitespace; a trailing whitespace run forms a word with an empty core.
struct WordRange {
    std::size_t begin = 0;
    std::size_t core_begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool blank() const noexcept { return core_begin == end; }
};

constexpr bool is_ident_char(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

constexpr bool is_space_char(unsigned char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Segments text into words: maximal identifier runs [A-Za-z0-9_], maximal
/// runs of non-ASCII bytes, and single punctuation characters.
inline std::vector<WordRange> segment_words(std::string_view text) {
    std::vector<WordRange> words;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        WordRange w;
        w.begin = i;
        while (i < n && is_space_char(static_cast<unsigned char>(text[i]))) ++i;
        w.core_begin = i;
        if (i < n) {
            const auto c = static_cast<unsigned char>(text[i]);
            if (is_ident_char(c)) {
                while (i < n && is_ident_char(static_cast<unsigned char>(text[i]))) ++i;
            } else if (c >= 0x80) {
                while (i < n && static_cast<unsigned char>(text[i]) >= 0x80) ++i;
            } else {
                ++i;
            }
        }
        w.end = i;
        words.push_back(w);
    }
    return words;
}

/// Non-blank word cores, in order. This is the lexical tokenization used by
/// the metrics, profiles and corpus filters.
inline std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const auto &w : segment_words(text)) {
        if (!w.blank()) out.emplace_back(text.substr(w.core_begin, w.end - w.core_begin));
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space_char(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space_char(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char &c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

} // namespace forge
