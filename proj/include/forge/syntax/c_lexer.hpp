#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "forge/text.hpp"

namespace forge::syntax {

enum class CTokKind { ident, number, string, chr, punct, preproc, eof };

struct CTok {
    CTokKind kind = CTokKind::eof;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
};

/// Lexer for C, C++ and CUDA. Comments are skipped, each preprocessor line
/// becomes one token, and '<' and '>' are always single tokens so that the
/// parser can tell "a >> b" from the end of nested template arguments by
/// adjacency.
inline std::vector<CTok> lex_c(std::string_view src) {
    std::vector<CTok> out;
    const std::size_t n = src.size();
    std::size_t i = 0;
    bool line_start = true;

    auto at = [&](std::size_t k) -> char { return k < n ? src[k] : '\0'; };
    auto push = [&](CTokKind kind, std::size_t b, std::size_t e) {
        out.push_back(CTok{kind, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(e)});
    };
    auto skip_quoted = [&](std::size_t k, char quote) {
        // k points at the opening quote; returns one past the closing quote.
        ++k;
        while (k < n && src[k] != quote && src[k] != '\n') {
            if (src[k] == '\\' && k + 1 < n) ++k;
            ++k;
        }
        return k < n && src[k] == quote ? k + 1 : k;
    };

    static constexpr std::string_view multi[] = {"...", "->*", "->", "++", "--", "&&", "||", "==", "!=", "+=", "-=",
                                                 "*=",  "/=",  "%=", "&=", "|=", "^=", "::", ".*", "##"};

    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (is_space_char(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && at(i + 1) == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && at(i + 1) == '*') {
            const auto close = src.find("*/", i + 2);
            i = close == std::string_view::npos ? n : close + 2;
            continue;
        }
        if (c == '#' && line_start) {
            const std::size_t b = i;
            while (i < n && src[i] != '\n') {
                if (src[i] == '\\' && at(i + 1) == '\n') ++i;
                else if (src[i] == '/' && at(i + 1) == '*') {
                    const auto close = src.find("*/", i + 2);
                    i = close == std::string_view::npos ? n : close + 1;
                }
                ++i;
            }
            std::size_t e = i;
            while (e > b && is_space_char(static_cast<unsigned char>(src[e - 1]))) --e;
            push(CTokKind::preproc, b, e);
            continue;
        }
        line_start = false;
        const auto uc = static_cast<unsigned char>(c);
        if (is_ident_char(uc) && !(c >= '0' && c <= '9')) {
            const std::size_t b = i;
            while (i < n && is_ident_char(static_cast<unsigned char>(src[i]))) ++i;
            const auto word = src.substr(b, i - b);
            const bool prefix = word == "L" || word == "u" || word == "U" || word == "u8";
            if (word == "R" || word == "LR" || word == "uR" || word == "UR" || word == "u8R") {
                if (at(i) == '"') {
                    // raw string R"delim( ... )delim"
                    const auto open = src.find('(', i);
                    if (open != std::string_view::npos) {
                        const std::string closing = ")" + std::string(src.substr(i + 1, open - i - 1)) + "\"";
                        const auto close = src.find(closing, open);
                        i = close == std::string_view::npos ? n : close + closing.size();
                        push(CTokKind::string, b, i);
                        continue;
                    }
                }
            }
            if (prefix && (at(i) == '"' || at(i) == '\'')) {
                const char q = at(i);
                i = skip_quoted(i, q);
                push(q == '"' ? CTokKind::string : CTokKind::chr, b, i);
                continue;
            }
            push(CTokKind::ident, b, i);
            continue;
        }
        if ((c >= '0' && c <= '9') || (c == '.' && at(i + 1) >= '0' && at(i + 1) <= '9')) {
            const std::size_t b = i;
            while (i < n) {
                const char d = src[i];
                if (is_ident_char(static_cast<unsigned char>(d)) || d == '.' || d == '\'') {
                    ++i;
                } else if ((d == '+' || d == '-') && i > b &&
                           (src[i - 1] == 'e' || src[i - 1] == 'E' || src[i - 1] == 'p' || src[i - 1] == 'P') &&
                           !(src[b] == '0' && (at(b + 1) == 'x' || at(b + 1) == 'X') && (src[i - 1] == 'e' || src[i - 1] == 'E'))) {
                    ++i;
                } else {
                    break;
                }
            }
            push(CTokKind::number, b, i);
            continue;
        }
        if (c == '"') {
            const std::size_t b = i;
            i = skip_quoted(i, '"');
            push(CTokKind::string, b, i);
            continue;
        }
        if (c == '\'') {
            const std::size_t b = i;
            i = skip_quoted(i, '\'');
            push(CTokKind::chr, b, i);
            continue;
        }
        std::size_t len = 1;
        for (auto m : multi) {
            if (src.substr(i, m.size()) == m) {
                len = m.size();
                break;
            }
        }
        push(CTokKind::punct, i, i + len);
        i += len;
    }
    push(CTokKind::eof, n, n);
    return out;
}

} // namespace forge::syntax
