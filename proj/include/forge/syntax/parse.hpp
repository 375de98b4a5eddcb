#pragma once

#include <string>

#include "forge/language.hpp"
#include "forge/syntax/c_parser.hpp"
#include "forge/syntax/fortran_parser.hpp"

namespace forge::syntax {

/// Parses with the grammar of `language`; C++ and CUDA share one grammar.
inline ParseResult parse(std::string source, Language language) {
    if (language == Language::fortran) return parse_fortran(std::move(source));
    return parse_c_family(std::move(source));
}

} // namespace forge::syntax
