#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/syntax/tree.hpp"
#include "forge/text.hpp"

namespace forge::syntax {

enum class FTokKind { ident, number, string, logical, dotop, punct, eol, eof };

struct FTok {
    FTokKind kind = FTokKind::eof;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
};

/// Free-form Fortran lexer. Comments are dropped, '&' continuations are
/// joined, and each statement ends with an eol token (newline or ';').
inline std::vector<FTok> lex_fortran(std::string_view src) {
    std::vector<FTok> out;
    const std::size_t n = src.size();
    std::size_t i = 0;
    auto at = [&](std::size_t k) -> char { return k < n ? src[k] : '\0'; };
    auto push = [&](FTokKind kind, std::size_t b, std::size_t e) {
        out.push_back(FTok{kind, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(e)});
    };
    auto lower = [](char c) { return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c); };
    auto eol = [&](std::size_t b) {
        if (!out.empty() && out.back().kind != FTokKind::eol) push(FTokKind::eol, b, b);
    };
    static constexpr std::string_view multi[] = {"**", "//", "==", "/=", "<=", ">=", "=>", "::", "(/", "/)"};

    while (i < n) {
        const char c = src[i];
        if (c == '\n' || c == ';') {
            eol(i);
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        if (c == '!') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '&') {
            // continuation: skip to the next line and an optional leading '&'
            std::size_t k = i + 1;
            while (k < n && (src[k] == ' ' || src[k] == '\t' || src[k] == '\r')) ++k;
            if (k >= n || src[k] == '\n' || src[k] == '!') {
                while (k < n && src[k] != '\n') ++k;
                ++k;
                while (k < n && (src[k] == ' ' || src[k] == '\t')) ++k;
                if (k < n && src[k] == '&') ++k;
                i = k;
                continue;
            }
            push(FTokKind::punct, i, i + 1);
            ++i;
            continue;
        }
        const auto uc = static_cast<unsigned char>(c);
        if (is_ident_char(uc) && !(c >= '0' && c <= '9')) {
            const std::size_t b = i;
            while (i < n && is_ident_char(static_cast<unsigned char>(src[i]))) ++i;
            push(FTokKind::ident, b, i);
            continue;
        }
        if ((c >= '0' && c <= '9') || (c == '.' && at(i + 1) >= '0' && at(i + 1) <= '9')) {
            const std::size_t b = i;
            while (i < n && src[i] >= '0' && src[i] <= '9') ++i;
            if (at(i) == '.' && !(std::isalpha(static_cast<unsigned char>(at(i + 1))) &&
                                  std::isalpha(static_cast<unsigned char>(at(i + 2))))) {
                ++i;
                while (i < n && src[i] >= '0' && src[i] <= '9') ++i;
            }
            const char e = lower(at(i));
            if ((e == 'e' || e == 'd' || e == 'q') &&
                ((at(i + 1) >= '0' && at(i + 1) <= '9') ||
                 ((at(i + 1) == '+' || at(i + 1) == '-') && at(i + 2) >= '0' && at(i + 2) <= '9'))) {
                i += 2;
                while (i < n && src[i] >= '0' && src[i] <= '9') ++i;
            }
            if (at(i) == '_' && is_ident_char(static_cast<unsigned char>(at(i + 1)))) {
                ++i;
                while (i < n && is_ident_char(static_cast<unsigned char>(src[i]))) ++i;
            }
            push(FTokKind::number, b, i);
            continue;
        }
        if (c == '"' || c == '\'') {
            const std::size_t b = i++;
            while (i < n && src[i] != '\n') {
                if (src[i] == c) {
                    if (at(i + 1) == c) {
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                ++i;
            }
            push(FTokKind::string, b, i);
            continue;
        }
        if (c == '.') {
            std::size_t k = i + 1;
            while (k < n && std::isalpha(static_cast<unsigned char>(src[k]))) ++k;
            if (k > i + 1 && at(k) == '.') {
                std::string word;
                for (std::size_t j = i + 1; j < k; ++j) word += lower(src[j]);
                push(word == "true" || word == "false" ? FTokKind::logical : FTokKind::dotop, i, k + 1);
                i = k + 1;
                continue;
            }
        }
        std::size_t len = 1;
        for (auto m : multi) {
            if (src.substr(i, m.size()) == m) {
                len = m.size();
                break;
            }
        }
        push(FTokKind::punct, i, i + len);
        i += len;
    }
    eol(n);
    push(FTokKind::eof, n, n);
    return out;
}

/// Parser for free-form Fortran 90+ program units: programs, modules,
/// subroutines and functions with declarations, assignments, loops,
/// conditionals, calls and I/O statements. Keywords are case-insensitive.
/// An unrecognised statement becomes an ERROR node spanning that statement.
class FortranParser {
  public:
    explicit FortranParser(std::string source) : src_(std::move(source)), tree_(src_) { toks_ = lex_fortran(src_); }

    ParseResult parse() {
        std::vector<NodeId> items;
        std::size_t clean = 0;
        skip_eols();
        while (!at_eof()) {
            const auto before = errors_;
            items.push_back(parse_top());
            if (errors_ == before) ++clean;
            skip_eols();
        }
        tree_.add("translation_unit", true, 0, static_cast<std::uint32_t>(src_.size()), std::move(items));
        ParseResult r;
        r.tree = std::move(tree_);
        r.error_count = errors_;
        r.item_count = clean;
        return r;
    }

  private:
    struct Failure {};

    const FTok &tok(std::size_t k = 0) const {
        const auto i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    std::string_view tx(std::size_t k = 0) const {
        const auto &t = tok(k);
        return std::string_view(src_).substr(t.begin, t.end - t.begin);
    }
    std::string low(std::size_t k = 0) const { return to_lower(tx(k)); }
    bool at_eof() const { return tok().kind == FTokKind::eof; }
    bool at_eol() const { return tok().kind == FTokKind::eol || at_eof(); }
    bool kw(std::string_view w, std::size_t k = 0) const { return tok(k).kind == FTokKind::ident && low(k) == w; }
    bool is(std::string_view s, std::size_t k = 0) const {
        return (tok(k).kind == FTokKind::punct || tok(k).kind == FTokKind::dotop) && to_lower(tx(k)) == s;
    }
    bool is_name(std::size_t k = 0) const { return tok(k).kind == FTokKind::ident; }
    void skip_eols() {
        while (tok().kind == FTokKind::eol) ++pos_;
    }

    [[noreturn]] void fail() const { throw Failure{}; }

    NodeId leaf(std::string kind, bool named) {
        const auto &t = tok();
        ++pos_;
        return tree_.add(std::move(kind), named, t.begin, t.end);
    }
    NodeId anon() { return leaf(low(), false); }
    NodeId expect_kw(std::string_view w) {
        if (!kw(w)) fail();
        return anon();
    }
    NodeId expect(std::string_view s) {
        if (!is(s)) fail();
        return anon();
    }
    void expect_eol() {
        if (!at_eol()) fail();
        if (!at_eof()) ++pos_;
    }
    NodeId make(std::string kind, std::vector<NodeId> kids) {
        const auto b = tree_.node(kids.front()).begin;
        const auto e = tree_.node(kids.back()).end;
        return tree_.add(std::move(kind), true, b, e, std::move(kids));
    }
    NodeId with_field(NodeId id, std::string f) {
        tree_.set_field(id, std::move(f));
        return id;
    }

    NodeId error_statement() {
        ++errors_;
        const auto b = tok().begin;
        auto e = b;
        while (!at_eol()) {
            e = tok().end;
            ++pos_;
        }
        if (!at_eof()) ++pos_;
        return tree_.add("ERROR", true, b, e);
    }

    template <class F>
    NodeId statement(F &&body) {
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        try {
            auto id = body();
            expect_eol();
            return id;
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
            return error_statement();
        }
    }

    // ---- program units ---------------------------------------------------

    bool at_end_of(std::string_view unit) const {
        if (kw("end")) {
            return tok(1).kind == FTokKind::eol || tok(1).kind == FTokKind::eof || low(1) == unit;
        }
        return low() == "end" + std::string(unit);
    }

    NodeId parse_end(std::string_view unit) {
        std::vector<NodeId> k;
        if (kw("end")) {
            k.push_back(anon());
            if (kw(unit)) k.push_back(anon());
        } else {
            k.push_back(anon());
        }
        if (is_name()) k.push_back(with_field(leaf("name", true), "name"));
        expect_eol();
        return make("end_" + std::string(unit) + "_statement", std::move(k));
    }

    bool is_procedure_start() const {
        std::size_t k = 0;
        while (kw("pure", k) || kw("elemental", k) || kw("recursive", k)) ++k;
        if (kw("subroutine", k) || kw("function", k)) return true;
        // typed function: integer function f(...)
        if (kw("integer", k) || kw("real", k) || kw("logical", k) || kw("complex", k) || kw("character", k)) {
            ++k;
            if (is("(", k)) {
                int depth = 0;
                do {
                    if (is("(", k)) ++depth;
                    if (is(")", k)) --depth;
                    ++k;
                } while (depth > 0 && tok(k).kind != FTokKind::eol && tok(k).kind != FTokKind::eof);
            }
            return kw("function", k);
        }
        if (kw("double", k) && kw("precision", k + 1)) return kw("function", k + 2);
        return false;
    }

    NodeId parse_top() {
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        try {
            if (kw("program")) return parse_unit("program");
            if (kw("module") && !kw("procedure", 1)) return parse_unit("module");
            if (is_procedure_start()) return parse_procedure();
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
        }
        return error_statement();
    }

    NodeId parse_unit(const std::string &unit) {
        std::vector<NodeId> k;
        {
            std::vector<NodeId> s{anon()};
            if (!is_name()) fail();
            s.push_back(with_field(leaf("name", true), "name"));
            expect_eol();
            k.push_back(make(unit + "_statement", std::move(s)));
        }
        scopes_.emplace_back();
        parse_body(k, unit);
        scopes_.pop_back();
        return make(unit, std::move(k));
    }

    NodeId parse_procedure() {
        std::vector<NodeId> s;
        while (kw("pure") || kw("elemental") || kw("recursive")) s.push_back(leaf("procedure_qualifier", true));
        std::string unit;
        if (!kw("subroutine") && !kw("function")) s.push_back(parse_type_spec());
        unit = low();
        s.push_back(anon());
        if (!is_name()) fail();
        const auto name = low();
        s.push_back(with_field(leaf("name", true), "name"));
        scopes_.emplace_back();
        scopes_.back().procedures.insert(name);
        if (is("(")) {
            std::vector<NodeId> p{anon()};
            while (!is(")")) {
                if (!is_name()) fail();
                p.push_back(leaf("identifier", true));
                if (is(",")) p.push_back(anon());
                else if (!is(")")) fail();
            }
            p.push_back(anon());
            s.push_back(with_field(make("parameters", std::move(p)), "parameters"));
        }
        if (kw("result")) {
            std::vector<NodeId> r{anon(), expect("(")};
            if (!is_name()) fail();
            r.push_back(leaf("identifier", true));
            r.push_back(expect(")"));
            s.push_back(make("function_result", std::move(r)));
        }
        expect_eol();
        std::vector<NodeId> k{make(unit + "_statement", std::move(s))};
        parse_body(k, unit);
        scopes_.pop_back();
        if (!scopes_.empty()) scopes_.back().procedures.insert(name);
        return make(unit, std::move(k));
    }

    void parse_body(std::vector<NodeId> &k, const std::string &unit) {
        while (true) {
            skip_eols();
            if (at_eof()) {
                ++errors_;  // missing end statement
                return;
            }
            if (at_end_of(unit)) {
                k.push_back(parse_end(unit));
                return;
            }
            if (kw("contains")) {
                std::vector<NodeId> c{anon()};
                expect_eol();
                while (true) {
                    skip_eols();
                    if (at_eof() || at_end_of(unit)) break;
                    if (is_procedure_start()) {
                        const auto mark = tree_.checkpoint();
                        const auto start = pos_;
                        try {
                            c.push_back(parse_procedure());
                            continue;
                        } catch (const Failure &) {
                            tree_.rollback(mark);
                            pos_ = start;
                        }
                    }
                    c.push_back(error_statement());
                }
                k.push_back(make("internal_procedures", std::move(c)));
                continue;
            }
            k.push_back(parse_statement());
        }
    }

    // ---- statements ------------------------------------------------------

    bool is_type_start() const {
        if (kw("integer") || kw("real") || kw("logical") || kw("complex") || kw("character")) return true;
        if (kw("double") && kw("precision", 1)) return true;
        if (kw("type") && is("(", 1)) return true;
        return false;
    }

    NodeId parse_statement() {
        if (kw("type") && !is("(", 1) && !is("is", 1)) return parse_derived_type();
        if (is_type_start()) return statement([&] { return parse_declaration(); });
        if (kw("do")) return parse_do();
        if (kw("if") && is("(", 1)) return parse_if();
        if (kw("select") && kw("case", 1)) return parse_select();
        return statement([&] { return parse_simple_statement(); });
    }

    /// `type [, attr ...] [::] name`, component declarations, `end type [name]`.
    NodeId parse_derived_type() {
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        std::vector<NodeId> k;
        try {
            std::vector<NodeId> s{anon()};
            while (is(",")) {
                s.push_back(anon());
                if (!is_name()) fail();
                std::vector<NodeId> q{anon()};
                if (is("(")) {
                    q.push_back(anon());
                    while (!is(")")) {
                        if (at_eol()) fail();
                        q.push_back(is_name() ? leaf("identifier", true) : anon());
                    }
                    q.push_back(anon());
                }
                s.push_back(make("type_qualifier", std::move(q)));
            }
            if (is("::")) s.push_back(anon());
            if (!is_name()) fail();
            s.push_back(with_field(leaf("type_name", true), "name"));
            expect_eol();
            k.push_back(make("derived_type_statement", std::move(s)));
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
            return error_statement();
        }
        // Component names are not variables of the enclosing scope.
        scopes_.emplace_back();
        while (true) {
            skip_eols();
            if (at_eof()) {
                ++errors_;
                scopes_.pop_back();
                return make("derived_type_definition", std::move(k));
            }
            if (low() == "endtype" || (kw("end") && kw("type", 1))) break;
            k.push_back(parse_statement());
        }
        scopes_.pop_back();
        const auto emark = tree_.checkpoint();
        const auto estart = pos_;
        try {
            std::vector<NodeId> e{anon()};
            if (kw("type")) e.push_back(anon());
            if (is_name()) e.push_back(with_field(leaf("type_name", true), "name"));
            expect_eol();
            k.push_back(make("end_type_statement", std::move(e)));
        } catch (const Failure &) {
            tree_.rollback(emark);
            pos_ = estart;
            k.push_back(error_statement());
        }
        return make("derived_type_definition", std::move(k));
    }

    NodeId parse_simple_statement() {
        const auto w = low();
        if (w == "use") {
            std::vector<NodeId> k{anon()};
            if (!is_name()) fail();
            k.push_back(leaf("module_name", true));
            while (!at_eol()) k.push_back(is_name() ? leaf("identifier", true) : anon());
            return make("use_statement", std::move(k));
        }
        if (w == "implicit") {
            std::vector<NodeId> k{anon()};
            while (!at_eol()) k.push_back(anon());
            return make("implicit_statement", std::move(k));
        }
        if (w == "call") {
            std::vector<NodeId> k{anon()};
            if (!is_name()) fail();
            k.push_back(with_field(leaf("identifier", true), "name"));
            if (is("(")) k.push_back(parse_argument_list());
            return make("subroutine_call", std::move(k));
        }
        if (w == "print") {
            std::vector<NodeId> k{anon()};
            k.push_back(is("*") ? leaf("format_identifier", true) : parse_expression());
            while (is(",")) {
                k.push_back(anon());
                k.push_back(parse_expression());
            }
            return make("print_statement", std::move(k));
        }
        if ((w == "write" || w == "read") && is("(", 1)) {
            std::vector<NodeId> k{anon()};
            std::vector<NodeId> spec{anon()};
            while (!is(")")) {
                if (is("*")) {
                    spec.push_back(leaf("format_identifier", true));
                } else if (is_name() && is("=", 1)) {
                    spec.push_back(parse_keyword_argument());
                } else {
                    spec.push_back(parse_expression());
                }
                if (is(",")) spec.push_back(anon());
                else if (!is(")")) fail();
            }
            spec.push_back(anon());
            k.push_back(make("unit_identifier", std::move(spec)));
            if (!at_eol()) {
                k.push_back(parse_expression());
                while (is(",")) {
                    k.push_back(anon());
                    k.push_back(parse_expression());
                }
            }
            return make(w + "_statement", std::move(k));
        }
        if ((w == "allocate" || w == "deallocate") && is("(", 1)) {
            std::vector<NodeId> k{anon(), parse_argument_list()};
            return make(w + "_statement", std::move(k));
        }
        if ((w == "return" || w == "stop" || w == "exit" || w == "cycle" || w == "continue") && !is("=", 1) &&
            !is("(", 1)) {
            std::vector<NodeId> k{anon()};
            if (!at_eol()) k.push_back(parse_expression());
            return make("keyword_statement", std::move(k));
        }
        // assignment or pointer association
        auto lhs = parse_postfix();
        if (is("=")) {
            auto op = anon();
            auto rhs = parse_expression();
            return make("assignment_statement", {with_field(lhs, "left"), op, with_field(rhs, "right")});
        }
        if (is("=>")) {
            auto op = anon();
            auto rhs = parse_expression();
            return make("pointer_association_statement", {with_field(lhs, "left"), op, with_field(rhs, "right")});
        }
        fail();
    }

    NodeId parse_type_spec() {
        if (kw("type")) {
            std::vector<NodeId> k{anon(), expect("(")};
            if (!is_name()) fail();
            k.push_back(leaf("type_name", true));
            k.push_back(expect(")"));
            return make("derived_type", std::move(k));
        }
        std::vector<NodeId> k;
        if (kw("double")) {
            k.push_back(anon());
            k.push_back(expect_kw("precision"));
        } else {
            k.push_back(anon());
        }
        auto type = make("intrinsic_type", std::move(k));
        if (is("(") || is("*")) {
            std::vector<NodeId> s{type};
            if (is("*")) {
                s.push_back(anon());
                s.push_back(parse_primary());
            } else {
                s.push_back(anon());
                while (!is(")")) {
                    if (is_name() && is("=", 1)) s.push_back(parse_keyword_argument());
                    else if (is("*") || is(":")) s.push_back(anon());
                    else s.push_back(parse_expression());
                    if (is(",")) s.push_back(anon());
                    else if (!is(")")) fail();
                }
                s.push_back(anon());
            }
            auto ks = make("kind", std::vector<NodeId>(s.begin() + 1, s.end()));
            return make("sized_type", {type, ks});
        }
        return type;
    }

    NodeId parse_declaration() {
        std::vector<NodeId> k{with_field(parse_type_spec(), "type")};
        bool array_attr = false;
        while (is(",")) {
            k.push_back(anon());
            if (!is_name()) fail();
            const auto attr = low();
            if (attr == "dimension") array_attr = true;
            std::vector<NodeId> q{anon()};
            if (is("(")) {
                q.push_back(anon());
                while (!is(")")) {
                    if (attr == "intent" && is_name()) q.push_back(anon());
                    else if (is(":") || is("*")) q.push_back(anon());
                    else q.push_back(parse_range());
                    if (is(",")) q.push_back(anon());
                    else if (!is(")")) fail();
                }
                q.push_back(anon());
            }
            k.push_back(make("type_qualifier", std::move(q)));
        }
        if (is("::")) k.push_back(anon());
        while (true) {
            if (!is_name()) fail();
            const auto name = low();
            auto id = leaf("identifier", true);
            NodeId decl = id;
            bool is_array = array_attr;
            if (is("(")) {
                std::vector<NodeId> d{id, anon()};
                while (!is(")")) {
                    if (is(":") || is("*")) d.push_back(anon());
                    else d.push_back(parse_range());
                    if (is(",")) d.push_back(anon());
                    else if (!is(")")) fail();
                }
                d.push_back(anon());
                decl = make("sized_declarator", std::move(d));
                is_array = true;
            }
            if (is("=") || is("=>")) {
                auto op = anon();
                auto value = parse_expression();
                decl = make("init_declarator", {with_field(decl, "left"), op, with_field(value, "right")});
            }
            if (!scopes_.empty()) {
                scopes_.back().variables.insert(name);
                if (is_array) scopes_.back().arrays.insert(name);
            }
            k.push_back(with_field(decl, "declarator"));
            if (!is(",")) break;
            k.push_back(anon());
        }
        return make("variable_declaration", std::move(k));
    }

    /// `a`, `a:b`, `:` inside dimension lists and subscripts.
    NodeId parse_range() {
        if (is(":")) {
            std::vector<NodeId> k{anon()};
            if (!is(",") && !is(")")) k.push_back(parse_expression());
            return make("extent_specifier", std::move(k));
        }
        auto lo = parse_expression();
        if (!is(":")) return lo;
        std::vector<NodeId> k{lo, anon()};
        if (!is(",") && !is(")")) k.push_back(parse_expression());
        if (is(":")) {
            k.push_back(anon());
            k.push_back(parse_expression());
        }
        return make("extent_specifier", std::move(k));
    }

    NodeId parse_block_until(std::vector<NodeId> &k, const std::vector<std::string_view> &stops) {
        while (true) {
            skip_eols();
            if (at_eof()) {
                ++errors_;
                return no_node;
            }
            for (auto s : stops) {
                if (s == "end do" && (low() == "enddo" || (kw("end") && kw("do", 1)))) return no_node;
                if (s == "end if" && (low() == "endif" || (kw("end") && kw("if", 1)))) return no_node;
                if (s == "end select" && (low() == "endselect" || (kw("end") && kw("select", 1)))) return no_node;
                if (s == "else" && kw("else")) return no_node;
                if (s == "elseif" && (low() == "elseif")) return no_node;
                if (s == "case" && kw("case")) return no_node;
            }
            k.push_back(parse_statement());
        }
    }

    NodeId parse_end_block(std::vector<NodeId> &k, std::string_view what, std::string kind) {
        if (at_eof()) return make(std::move(kind), std::move(k));
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        try {
            std::vector<NodeId> e{anon()};
            if (kw(what)) e.push_back(anon());
            if (is_name()) e.push_back(leaf("name", true));
            expect_eol();
            k.push_back(make("end_" + std::string(what) + "_statement", std::move(e)));
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
            k.push_back(error_statement());
        }
        return make(std::move(kind), std::move(k));
    }

    NodeId parse_do() {
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        std::vector<NodeId> k;
        std::string kind = "do_loop_statement";
        try {
            k.push_back(anon());
            if (kw("while")) {
                kind = "while_statement";
                k.push_back(anon());
                k.push_back(with_field(parse_parenthesized(), "condition"));
            } else if (!at_eol()) {
                std::vector<NodeId> c;
                if (!is_name()) fail();
                c.push_back(leaf("identifier", true));
                c.push_back(expect("="));
                c.push_back(parse_expression());
                c.push_back(expect(","));
                c.push_back(parse_expression());
                if (is(",")) {
                    c.push_back(anon());
                    c.push_back(parse_expression());
                }
                k.push_back(make("loop_control_expression", std::move(c)));
            }
            expect_eol();
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
            return error_statement();
        }
        parse_block_until(k, {"end do"});
        return parse_end_block(k, "do", kind);
    }

    NodeId parse_if() {
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        std::vector<NodeId> k;
        try {
            k.push_back(anon());
            k.push_back(with_field(parse_parenthesized(), "condition"));
            if (!kw("then")) {
                // single-line if
                const auto mark2 = tree_.checkpoint();
                const auto start2 = pos_;
                try {
                    k.push_back(parse_simple_statement());
                } catch (const Failure &) {
                    tree_.rollback(mark2);
                    pos_ = start2;
                    fail();
                }
                expect_eol();
                return make("if_statement", std::move(k));
            }
            k.push_back(anon());
            expect_eol();
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
            return error_statement();
        }
        parse_block_until(k, {"end if", "else", "elseif"});
        while (!at_eof() && (kw("else") || low() == "elseif")) {
            std::vector<NodeId> c;
            const bool elseif = low() == "elseif" || (kw("else") && kw("if", 1));
            const auto m2 = tree_.checkpoint();
            const auto s2 = pos_;
            try {
                c.push_back(anon());
                if (elseif) {
                    if (kw("if")) c.push_back(anon());
                    c.push_back(with_field(parse_parenthesized(), "condition"));
                    c.push_back(expect_kw("then"));
                }
                expect_eol();
            } catch (const Failure &) {
                tree_.rollback(m2);
                pos_ = s2;
                k.push_back(error_statement());
                continue;
            }
            parse_block_until(c, {"end if", "else", "elseif"});
            k.push_back(make(elseif ? "elseif_clause" : "else_clause", std::move(c)));
        }
        return parse_end_block(k, "if", "if_statement");
    }

    NodeId parse_select() {
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        std::vector<NodeId> k;
        try {
            k.push_back(anon());
            k.push_back(anon());
            k.push_back(parse_parenthesized());
            expect_eol();
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
            return error_statement();
        }
        while (true) {
            skip_eols();
            if (at_eof()) {
                ++errors_;
                break;
            }
            if (low() == "endselect" || (kw("end") && kw("select", 1))) break;
            if (!kw("case")) {
                k.push_back(error_statement());
                continue;
            }
            std::vector<NodeId> c;
            const auto m2 = tree_.checkpoint();
            const auto s2 = pos_;
            try {
                c.push_back(anon());
                if (kw("default")) {
                    c.push_back(anon());
                } else {
                    std::vector<NodeId> sel{expect("(")};
                    while (!is(")")) {
                        sel.push_back(parse_range());
                        if (is(",")) sel.push_back(anon());
                        else if (!is(")")) fail();
                    }
                    sel.push_back(anon());
                    c.push_back(make("case_value_range_list", std::move(sel)));
                }
                expect_eol();
            } catch (const Failure &) {
                tree_.rollback(m2);
                pos_ = s2;
                k.push_back(error_statement());
                continue;
            }
            parse_block_until(c, {"end select", "case"});
            k.push_back(make("case_statement", std::move(c)));
        }
        return parse_end_block(k, "select", "select_case_statement");
    }

    // ---- expressions -----------------------------------------------------

    static int prec_of(std::string_view op) {
        if (op == ".eqv." || op == ".neqv.") return 1;
        if (op == ".or.") return 2;
        if (op == ".and.") return 3;
        if (op == "==" || op == "/=" || op == "<" || op == ">" || op == "<=" || op == ">=" || op == ".eq." ||
            op == ".ne." || op == ".lt." || op == ".gt." || op == ".le." || op == ".ge.") {
            return 5;
        }
        if (op == "//") return 6;
        if (op == "+" || op == "-") return 7;
        if (op == "*" || op == "/") return 8;
        if (op == "**") return 10;
        return 0;
    }
    static std::string kind_of(int prec) {
        if (prec <= 3) return "logical_expression";
        if (prec == 5) return "relational_expression";
        if (prec == 6) return "concatenation_expression";
        return "math_expression";
    }

    NodeId parse_expression() { return parse_binary(1); }

    NodeId parse_binary(int min_prec) {
        NodeId lhs;
        if (is(".not.")) {
            auto op = anon();
            auto a = parse_binary(4);
            lhs = make("logical_expression", {op, a});
        } else if ((is("-") || is("+")) && min_prec <= 7) {
            auto op = anon();
            auto a = parse_binary(8);
            lhs = make("unary_expression", {with_field(op, "operator"), with_field(a, "argument")});
        } else {
            lhs = parse_postfix();
        }
        while (true) {
            const auto &t = tok();
            if (t.kind != FTokKind::punct && t.kind != FTokKind::dotop) break;
            const auto op = to_lower(tx());
            const int prec = prec_of(op);
            if (prec == 0 || prec < min_prec) break;
            auto o = anon();
            // '**' is right associative
            auto rhs = parse_binary(op == "**" ? prec : prec + 1);
            lhs = make(kind_of(prec), {with_field(lhs, "left"), with_field(o, "operator"), with_field(rhs, "right")});
        }
        return lhs;
    }

    bool is_array(const std::string &name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (it->arrays.contains(name)) return true;
            if (it->variables.contains(name)) return false;
        }
        return false;
    }
    bool is_scalar_variable(const std::string &name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (it->variables.contains(name)) return !it->arrays.contains(name);
        }
        return false;
    }

    NodeId parse_postfix() {
        NodeId e = parse_primary();
        while (true) {
            if (is("(") && tree_.node(e).kind == "identifier") {
                const auto name = to_lower(tree_.text(e));
                auto args = parse_argument_list();
                // Declared arrays and character substrings are element
                // references; anything else is a function reference.
                const bool element = is_array(name) || is_scalar_variable(name);
                e = make(element ? "subscript_expression" : "call_expression",
                         {with_field(e, element ? "argument" : "function"), args});
                continue;
            }
            if (is("(") && (tree_.node(e).kind == "derived_type_member_expression" ||
                            tree_.node(e).kind == "subscript_expression")) {
                auto args = parse_argument_list();
                e = make("subscript_expression", {with_field(e, "argument"), args});
                continue;
            }
            if (is("%")) {
                auto op = anon();
                if (!is_name()) fail();
                auto f = leaf("type_member", true);
                e = make("derived_type_member_expression", {e, op, f});
                continue;
            }
            break;
        }
        return e;
    }

    NodeId parse_argument_list() {
        std::vector<NodeId> k{expect("(")};
        while (!is(")")) {
            if (is_name() && is("=", 1)) k.push_back(parse_keyword_argument());
            else k.push_back(parse_range());
            if (is(",")) k.push_back(anon());
            else if (!is(")")) fail();
        }
        k.push_back(anon());
        return make("argument_list", std::move(k));
    }

    NodeId parse_keyword_argument() {
        auto name = leaf("identifier", true);
        auto eq = anon();
        auto value = is("*") ? leaf("format_identifier", true) : parse_expression();
        return make("keyword_argument", {with_field(name, "name"), eq, with_field(value, "value")});
    }

    NodeId parse_parenthesized() {
        auto open = expect("(");
        auto inner = parse_expression();
        auto close = expect(")");
        return make("parenthesized_expression", {open, inner, close});
    }

    NodeId parse_primary() {
        switch (tok().kind) {
        case FTokKind::number: return leaf("number_literal", true);
        case FTokKind::string: return leaf("string_literal", true);
        case FTokKind::logical: return leaf("boolean_literal", true);
        case FTokKind::ident: return leaf("identifier", true);
        case FTokKind::punct:
            if (is("(/") || is("[")) {
                const std::string close = is("[") ? "]" : "/)";
                std::vector<NodeId> k{anon()};
                while (!is(close)) {
                    k.push_back(parse_expression());
                    if (is(",")) k.push_back(anon());
                    else if (!is(close)) fail();
                }
                k.push_back(anon());
                return make("array_literal", std::move(k));
            }
            if (is("(")) {
                auto open = anon();
                auto first = parse_expression();
                if (is(",")) {
                    // complex literal (re, im)
                    auto comma = anon();
                    auto second = parse_expression();
                    auto close = expect(")");
                    return make("complex_literal", {open, first, comma, second, close});
                }
                auto close = expect(")");
                return make("parenthesized_expression", {open, first, close});
            }
            fail();
        default: fail();
        }
    }

    struct Scope {
        std::set<std::string> variables;
        std::set<std::string> arrays;
        std::set<std::string> procedures;
    };

    std::string src_;
    std::vector<FTok> toks_;
    std::size_t pos_ = 0;
    Tree tree_;
    std::size_t errors_ = 0;
    std::vector<Scope> scopes_;
};

inline ParseResult parse_fortran(std::string source) { return FortranParser(std::move(source)).parse(); }

} // namespace forge::syntax
