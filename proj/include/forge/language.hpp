#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "forge/error.hpp"

namespace forge {

enum class Language { cpp, cuda, fortran };

inline constexpr std::array<Language, 3> all_languages{Language::cpp, Language::cuda, Language::fortran};

constexpr std::string_view to_string(Language l) noexcept {
    switch (l) {
    case Language::cpp: return "cpp";
    case Language::cuda: return "cuda";
    case Language::fortran: return "fortran";
    }
    return "?";
}

inline std::optional<Language> try_parse_language(std::string_view s) {
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
    if (lower == "cpp" || lower == "c++" || lower == "cxx") return Language::cpp;
    if (lower == "cuda" || lower == "cu") return Language::cuda;
    if (lower == "fortran" || lower == "f90" || lower == "f") return Language::fortran;
    return std::nullopt;
}

inline Language parse_language(std::string_view s) {
    if (auto l = try_parse_language(s)) return *l;
    throw Error(Errc::usage, "unknown language '" + std::string(s) + "' (expected cpp, cuda or fortran)");
}

/// C++ and CUDA share the C-family grammar.
constexpr bool is_c_family(Language l) noexcept { return l != Language::fortran; }

} // namespace forge
