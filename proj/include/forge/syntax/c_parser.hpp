#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/syntax/c_lexer.hpp"
#include "forge/syntax/tree.hpp"

namespace forge::syntax {

/// Recursive-descent parser for the C/C++/CUDA subset found in kernel and
/// numeric code: functions, declarations, templates, structs, namespaces,
/// statements, expressions, CUDA qualifiers and kernel launches. Produces a
/// tree-sitter-shaped concrete syntax tree. Errors are recovered at statement
/// and top-level item boundaries.
class CParser {
  public:
    explicit CParser(std::string source) : src_(std::move(source)), tree_(src_) { toks_ = lex_c(src_); }

    ParseResult parse() {
        std::vector<NodeId> items;
        std::size_t clean_items = 0;
        while (!at_eof()) {
            const auto mark = tree_.checkpoint();
            const auto start = pos_;
            const auto errors_before = errors_;
            try {
                items.push_back(parse_top_item());
                if (errors_ == errors_before) ++clean_items;
            } catch (const Failure &) {
                tree_.rollback(mark);
                pos_ = start;
                items.push_back(recover(true));
            }
        }
        const auto end = static_cast<std::uint32_t>(src_.size());
        tree_.add("translation_unit", true, 0, end, std::move(items));
        ParseResult r;
        r.tree = std::move(tree_);
        r.error_count = errors_;
        r.item_count = clean_items;
        return r;
    }

  private:
    struct Failure {};

    // ---- token helpers -------------------------------------------------

    const CTok &tok(std::size_t k = 0) const {
        const auto i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    std::string_view text(const CTok &t) const { return std::string_view(src_).substr(t.begin, t.end - t.begin); }
    std::string_view tx(std::size_t k = 0) const { return text(tok(k)); }
    bool at_eof() const { return tok().kind == CTokKind::eof; }
    bool is(std::string_view s, std::size_t k = 0) const {
        const auto &t = tok(k);
        return (t.kind == CTokKind::punct || t.kind == CTokKind::ident) && text(t) == s;
    }
    bool is_ident(std::size_t k = 0) const { return tok(k).kind == CTokKind::ident; }
    bool adjacent(std::size_t k = 0) const { return tok(k).end == tok(k + 1).begin; }

    [[noreturn]] void fail() const { throw Failure{}; }

    NodeId leaf(std::string kind, bool named, std::size_t ntok = 1) {
        const auto b = tok().begin;
        const auto e = tok(ntok - 1).end;
        pos_ += ntok;
        return tree_.add(std::move(kind), named, b, e);
    }
    NodeId anon() { return leaf(std::string(tx()), false); }
    NodeId expect(std::string_view s) {
        if (!is(s)) fail();
        return anon();
    }
    NodeId make(std::string kind, std::vector<NodeId> children) {
        const auto b = tree_.node(children.front()).begin;
        const auto e = tree_.node(children.back()).end;
        return tree_.add(std::move(kind), true, b, e, std::move(children));
    }
    NodeId with_field(NodeId id, std::string field) {
        tree_.set_field(id, std::move(field));
        return id;
    }

    /// Operator at the cursor, composing adjacent '<' / '>' / '=' tokens.
    std::pair<std::string, std::size_t> peek_op() const {
        const auto &t = tok();
        if (t.kind != CTokKind::punct) return {std::string(), 0};
        const auto s = text(t);
        if (s == "<" || s == ">") {
            const char c = s[0];
            const std::string one(1, c);
            if (adjacent(0) && is(one, 1)) {
                if (adjacent(1) && is(one, 2)) return {std::string(3, c), 3};
                if (adjacent(1) && is("=", 2)) return {one + one + "=", 3};
                return {one + one, 2};
            }
            if (adjacent(0) && is("=", 1)) return {one + "=", 2};
            return {one, 1};
        }
        return {std::string(s), 1};
    }
    NodeId take_op(const std::pair<std::string, std::size_t> &op) { return leaf(op.first, false, op.second); }

    static bool is_reserved(std::string_view w) {
        static const std::set<std::string_view> words = {
            "alignas",  "alignof",   "auto",     "bool",      "break",    "case",         "catch",
            "char",     "class",     "const",    "constexpr", "continue", "decltype",     "default",
            "delete",   "do",        "double",   "else",      "enum",     "explicit",     "extern",
            "false",    "float",     "for",      "friend",    "goto",     "if",           "inline",
            "int",      "long",      "mutable",  "namespace", "new",      "noexcept",     "nullptr",
            "operator", "private",   "protected", "public",   "register", "return",       "short",
            "signed",   "sizeof",    "static",   "static_assert", "struct", "switch",     "template",
            "this",     "throw",     "true",     "try",       "typedef",  "typename",     "union",
            "unsigned", "using",     "virtual",  "void",      "volatile", "while",        "__global__",
            "__device__", "__host__", "__shared__", "__constant__", "__managed__", "__forceinline__",
            "__restrict__", "__launch_bounds__", "__noinline__"};
        return words.contains(w);
    }
    static bool is_primitive(std::string_view w) {
        static const std::set<std::string_view> words = {
            "bool",     "char",      "int",      "float",    "double",   "void",     "size_t",   "ssize_t",
            "ptrdiff_t", "intptr_t", "uintptr_t", "nullptr_t", "max_align_t", "int8_t", "int16_t", "int32_t",
            "int64_t",  "uint8_t",   "uint16_t", "uint32_t", "uint64_t", "char8_t",  "char16_t", "char32_t",
            "wchar_t"};
        return words.contains(w);
    }
    static bool is_sized_word(std::string_view w) {
        return w == "unsigned" || w == "signed" || w == "long" || w == "short";
    }
    static bool is_storage(std::string_view w) {
        return w == "static" || w == "extern" || w == "inline" || w == "register" || w == "thread_local" ||
               w == "mutable" || w == "virtual" || w == "explicit" || w == "friend" || w == "consteval";
    }
    static bool is_qualifier(std::string_view w) {
        return w == "const" || w == "volatile" || w == "restrict" || w == "__restrict__" || w == "__restrict" ||
               w == "constexpr";
    }
    static bool is_cuda_qualifier(std::string_view w) {
        return w == "__global__" || w == "__device__" || w == "__host__" || w == "__shared__" ||
               w == "__constant__" || w == "__managed__" || w == "__forceinline__" || w == "__noinline__";
    }
    static bool is_assign_op(std::string_view op) {
        return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" || op == "&=" ||
               op == "|=" || op == "^=" || op == "<<=" || op == ">>=";
    }
    static int binary_prec(std::string_view op) {
        if (op == "||") return 1;
        if (op == "&&") return 2;
        if (op == "|") return 3;
        if (op == "^") return 4;
        if (op == "&") return 5;
        if (op == "==" || op == "!=") return 6;
        if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
        if (op == "<<" || op == ">>") return 8;
        if (op == "+" || op == "-") return 9;
        if (op == "*" || op == "/" || op == "%") return 10;
        return 0;
    }

    // ---- error recovery ------------------------------------------------

    /// Skips to the next statement boundary and returns an ERROR node.
    NodeId recover(bool top_level) {
        ++errors_;
        const auto b = tok().begin;
        int depth = 0;
        std::size_t consumed = 0;
        while (!at_eof()) {
            const auto s = tok().kind == CTokKind::punct ? tx() : std::string_view();
            if (depth == 0 && s == ";") {
                ++pos_;
                ++consumed;
                break;
            }
            if (s == "{" || s == "(" || s == "[") {
                ++depth;
            } else if (s == "}" || s == ")" || s == "]") {
                if (depth == 0) {
                    if (consumed == 0 || top_level) {
                        ++pos_;
                        ++consumed;
                    }
                    break;
                }
                --depth;
                if (depth == 0 && s == "}") {
                    ++pos_;
                    ++consumed;
                    if (is(";")) ++pos_;
                    break;
                }
            }
            ++pos_;
            ++consumed;
        }
        const auto e = pos_ > 0 ? toks_[pos_ - 1].end : b;
        return tree_.add("ERROR", true, b, std::max(b, e));
    }

    // ---- top level -----------------------------------------------------

    NodeId parse_top_item() {
        if (tok().kind == CTokKind::preproc) return parse_preproc();
        if (is("template")) return parse_template_declaration(false);
        if (is("namespace")) return parse_namespace();
        if (is("using")) return parse_using();
        if (is("typedef")) return parse_typedef();
        if (is("extern") && tok(1).kind == CTokKind::string) return parse_linkage();
        if (is(";")) return anon();
        return parse_declaration(DeclCtx::top);
    }

    NodeId parse_preproc() {
        const auto &t = tok();
        const auto b = t.begin;
        const auto e = t.end;
        ++pos_;
        const std::string_view s = std::string_view(src_).substr(b, e - b);
        std::size_t i = 1;
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t dir_b = i;
        while (i < s.size() && is_ident_char(static_cast<unsigned char>(s[i]))) ++i;
        const auto directive = std::string(s.substr(dir_b, i - dir_b));
        auto abs = [&](std::size_t off) { return static_cast<std::uint32_t>(b + off); };
        auto skip_ws = [&] {
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        };
        std::vector<NodeId> kids;
        kids.push_back(tree_.add("#" + directive, false, b, abs(i)));
        skip_ws();
        if (directive == "include" && i < s.size()) {
            const bool system = s[i] == '<';
            const auto rest = s.size();
            kids.push_back(with_field(tree_.add(system ? "system_lib_string" : "string_literal", true, abs(i), abs(rest)),
                                      "path"));
            return tree_.add("preproc_include", true, b, e, std::move(kids));
        }
        if (directive == "define" && i < s.size() && is_ident_char(static_cast<unsigned char>(s[i]))) {
            const auto nb = i;
            while (i < s.size() && is_ident_char(static_cast<unsigned char>(s[i]))) ++i;
            kids.push_back(with_field(tree_.add("identifier", true, abs(nb), abs(i)), "name"));
            std::string kind = "preproc_def";
            if (i < s.size() && s[i] == '(') {
                const auto pb = i;
                const auto close = s.find(')', i);
                i = close == std::string_view::npos ? s.size() : close + 1;
                kids.push_back(with_field(tree_.add("preproc_params", true, abs(pb), abs(i)), "parameters"));
                kind = "preproc_function_def";
            }
            skip_ws();
            if (i < s.size()) kids.push_back(with_field(tree_.add("preproc_arg", true, abs(i), abs(s.size())), "value"));
            return tree_.add(kind, true, b, e, std::move(kids));
        }
        tree_.set_kind(kids.back(), "preproc_directive");
        tree_.set_named(kids.back(), true);
        tree_.set_field(kids.back(), "directive");
        if (i < s.size()) kids.push_back(with_field(tree_.add("preproc_arg", true, abs(i), abs(s.size())), "argument"));
        return tree_.add("preproc_call", true, b, e, std::move(kids));
    }

    NodeId parse_linkage() {
        std::vector<NodeId> kids{anon()};
        kids.push_back(with_field(leaf("string_literal", true), "value"));
        if (is("{")) {
            kids.push_back(with_field(parse_declaration_list(), "body"));
        } else {
            kids.push_back(with_field(parse_top_item(), "body"));
        }
        return make("linkage_specification", std::move(kids));
    }

    NodeId parse_declaration_list() {
        std::vector<NodeId> kids{expect("{")};
        while (!is("}")) {
            if (at_eof()) {
                ++errors_;
                return make("declaration_list", std::move(kids));
            }
            const auto mark = tree_.checkpoint();
            const auto start = pos_;
            try {
                kids.push_back(parse_top_item());
            } catch (const Failure &) {
                tree_.rollback(mark);
                pos_ = start;
                kids.push_back(recover(false));
            }
        }
        kids.push_back(anon());
        return make("declaration_list", std::move(kids));
    }

    NodeId parse_namespace() {
        std::vector<NodeId> kids{anon()};
        if (is_ident()) kids.push_back(with_field(leaf("namespace_identifier", true), "name"));
        kids.push_back(with_field(parse_declaration_list(), "body"));
        return make("namespace_definition", std::move(kids));
    }

    NodeId parse_using() {
        std::vector<NodeId> kids{anon()};
        if (is("namespace")) {
            kids.push_back(anon());
            kids.push_back(parse_scoped_name(NameCtx::expression));
            kids.push_back(expect(";"));
            return make("using_declaration", std::move(kids));
        }
        if (is_ident() && is("=", 1)) {
            known_types_.insert(std::string(tx()));
            kids.push_back(with_field(leaf("type_identifier", true), "name"));
            kids.push_back(anon());
            kids.push_back(with_field(parse_type_descriptor(), "type"));
            kids.push_back(expect(";"));
            return make("alias_declaration", std::move(kids));
        }
        kids.push_back(parse_scoped_name(NameCtx::expression));
        kids.push_back(expect(";"));
        return make("using_declaration", std::move(kids));
    }

    NodeId parse_typedef() {
        std::vector<NodeId> kids{anon()};
        parse_decl_specifiers(kids, true);
        while (true) {
            auto d = parse_declarator(DeclaratorCtx::type_name);
            kids.push_back(with_field(d, "declarator"));
            if (!is(",")) break;
            kids.push_back(anon());
        }
        kids.push_back(expect(";"));
        return make("type_definition", std::move(kids));
    }

    NodeId parse_template_declaration(bool in_class) {
        std::vector<NodeId> kids{anon()};
        std::vector<NodeId> params{expect("<")};
        while (!is(">")) {
            if (is("typename") || is("class")) {
                std::vector<NodeId> p{anon()};
                if (is("...")) p.push_back(anon());
                if (is_ident()) {
                    known_types_.insert(std::string(tx()));
                    p.push_back(leaf("type_identifier", true));
                }
                std::string kind = "type_parameter_declaration";
                if (is("=")) {
                    p.push_back(anon());
                    p.push_back(with_field(parse_type_descriptor(), "default_type"));
                    kind = "optional_type_parameter_declaration";
                }
                params.push_back(make(kind, std::move(p)));
            } else {
                params.push_back(parse_parameter());
            }
            if (is(",")) {
                params.push_back(anon());
            } else if (!is(">")) {
                fail();
            }
        }
        params.push_back(anon());
        kids.push_back(with_field(make("template_parameter_list", std::move(params)), "parameters"));
        if (is("template")) {
            kids.push_back(parse_template_declaration(in_class));
        } else {
            kids.push_back(parse_declaration(in_class ? DeclCtx::field : DeclCtx::top));
        }
        return make("template_declaration", std::move(kids));
    }

    // ---- declarations --------------------------------------------------

    enum class DeclCtx { top, block, field };
    enum class DeclaratorCtx { normal, field, param, abstract, type_name };
    enum class NameCtx { type, expression };

    /// Parses specifiers and the single type specifier. Returns true if a
    /// type specifier was found.
    bool parse_decl_specifiers(std::vector<NodeId> &out, bool require_type) {
        bool has_type = false;
        while (true) {
            if (!is_ident()) {
                if (!has_type && is("::")) {
                    out.push_back(with_field(parse_scoped_name(NameCtx::type), "type"));
                    has_type = true;
                    continue;
                }
                break;
            }
            const auto w = tx();
            if (is_storage(w)) {
                out.push_back(leaf("storage_class_specifier", true));
            } else if (is_qualifier(w)) {
                out.push_back(leaf("type_qualifier", true));
            } else if (is_cuda_qualifier(w)) {
                out.push_back(leaf("cuda_qualifier", true));
            } else if (w == "__launch_bounds__") {
                std::vector<NodeId> k{anon()};
                k.push_back(parse_argument_list());
                out.push_back(make("cuda_qualifier", std::move(k)));
            } else if (w == "typename" && !has_type) {
                out.push_back(anon());
            } else if (has_type) {
                break;
            } else if (is_sized_word(w)) {
                std::vector<NodeId> k;
                while (is_ident() && is_sized_word(tx())) k.push_back(anon());
                if (is_ident() && (tx() == "int" || tx() == "char" || tx() == "double")) {
                    k.push_back(with_field(leaf("primitive_type", true), "type"));
                }
                out.push_back(with_field(make("sized_type_specifier", std::move(k)), "type"));
                has_type = true;
            } else if (is_primitive(w)) {
                out.push_back(with_field(leaf("primitive_type", true), "type"));
                has_type = true;
            } else if (w == "struct" || w == "class" || w == "union") {
                out.push_back(with_field(parse_struct_specifier(), "type"));
                has_type = true;
            } else if (w == "enum") {
                out.push_back(with_field(parse_enum_specifier(), "type"));
                has_type = true;
            } else if (w == "auto") {
                std::vector<NodeId> k{anon()};
                out.push_back(with_field(make("placeholder_type_specifier", std::move(k)), "type"));
                has_type = true;
            } else if (w == "decltype") {
                std::vector<NodeId> k{anon(), expect("(")};
                k.push_back(parse_expression());
                k.push_back(expect(")"));
                out.push_back(with_field(make("decltype", std::move(k)), "type"));
                has_type = true;
            } else if (!is_reserved(w)) {
                out.push_back(with_field(parse_scoped_name(NameCtx::type), "type"));
                has_type = true;
            } else {
                break;
            }
        }
        if (require_type && !has_type) fail();
        return has_type;
    }

    /// Name with optional scopes and template arguments. In type context the
    /// final component is a type_identifier, otherwise an identifier.
    NodeId parse_scoped_name(NameCtx ctx) {
        std::vector<NodeId> scopes;  // alternating scope node, '::'
        NodeId leading = no_node;
        if (is("::")) leading = anon();
        while (true) {
            if (!is_ident() || is_reserved(tx())) fail();
            const bool qualified_next = is("::", 1) || (is("<", 1) && ctx == NameCtx::type);
            if (is("::", 1)) {
                auto scope = leaf("namespace_identifier", true);
                scopes.push_back(scope);
                scopes.push_back(anon());
                continue;
            }
            NodeId last;
            if (ctx == NameCtx::type && is("<", 1)) {
                auto name = with_field(leaf("type_identifier", true), "name");
                auto args = with_field(parse_template_arguments(), "arguments");
                last = make("template_type", {name, args});
                if (is("::")) {
                    scopes.push_back(last);
                    scopes.push_back(anon());
                    continue;
                }
            } else {
                last = leaf(ctx == NameCtx::type ? "type_identifier" : "identifier", true);
            }
            (void)qualified_next;
            // Fold scopes right to left into nested qualified_identifier nodes.
            NodeId acc = with_field(last, "name");
            for (std::size_t k = scopes.size(); k >= 2; k -= 2) {
                auto scope = with_field(scopes[k - 2], "scope");
                acc = with_field(make("qualified_identifier", {scope, scopes[k - 1], acc}), k == 2 ? "" : "name");
            }
            if (leading != no_node) acc = make("qualified_identifier", {leading, with_field(acc, "name")});
            tree_.set_field(acc, "");
            return acc;
        }
    }

    NodeId parse_template_arguments() {
        std::vector<NodeId> kids{expect("<")};
        while (!is(">")) {
            const auto mark = tree_.checkpoint();
            const auto start = pos_;
            bool done = false;
            try {
                auto t = parse_type_descriptor();
                if (is(",") || is(">")) {
                    kids.push_back(t);
                    done = true;
                }
            } catch (const Failure &) {
            }
            if (!done) {
                tree_.rollback(mark);
                pos_ = start;
                kids.push_back(parse_assignment(true));
            }
            if (is(",")) {
                kids.push_back(anon());
            } else if (!is(">")) {
                fail();
            }
        }
        kids.push_back(anon());
        return make("template_argument_list", std::move(kids));
    }

    NodeId parse_type_descriptor() {
        std::vector<NodeId> kids;
        parse_decl_specifiers(kids, true);
        if (is("*") || is("&") || is("&&") || is("[")) {
            kids.push_back(with_field(parse_declarator(DeclaratorCtx::abstract), "declarator"));
        }
        return make("type_descriptor", std::move(kids));
    }

    NodeId parse_struct_specifier() {
        const auto keyword = std::string(tx());
        std::vector<NodeId> kids{anon()};
        if (is_ident() && !is_reserved(tx())) {
            known_types_.insert(std::string(tx()));
            kids.push_back(with_field(parse_scoped_name(NameCtx::type), "name"));
        }
        if (is(":")) {
            std::vector<NodeId> base{anon()};
            while (true) {
                if (is("public") || is("private") || is("protected") || is("virtual")) {
                    base.push_back(leaf("access_specifier", true));
                    continue;
                }
                base.push_back(parse_scoped_name(NameCtx::type));
                if (!is(",")) break;
                base.push_back(anon());
            }
            kids.push_back(make("base_class_clause", std::move(base)));
        }
        if (is("{")) {
            std::vector<NodeId> body{anon()};
            while (!is("}")) {
                if (at_eof()) fail();
                if ((is("public") || is("private") || is("protected")) && is(":", 1)) {
                    body.push_back(leaf("access_specifier", true));
                    body.push_back(anon());
                    continue;
                }
                if (is(";")) {
                    body.push_back(anon());
                    continue;
                }
                if (is("template")) {
                    body.push_back(parse_template_declaration(true));
                    continue;
                }
                body.push_back(parse_declaration(DeclCtx::field));
            }
            body.push_back(anon());
            kids.push_back(with_field(make("field_declaration_list", std::move(body)), "body"));
        }
        return make(keyword + "_specifier", std::move(kids));
    }

    NodeId parse_enum_specifier() {
        std::vector<NodeId> kids{anon()};
        if (is("class") || is("struct")) kids.push_back(anon());
        if (is_ident() && !is_reserved(tx())) {
            known_types_.insert(std::string(tx()));
            kids.push_back(with_field(leaf("type_identifier", true), "name"));
        }
        if (is(":")) {
            kids.push_back(anon());
            std::vector<NodeId> base;
            parse_decl_specifiers(base, true);
            kids.insert(kids.end(), base.begin(), base.end());
        }
        if (is("{")) {
            std::vector<NodeId> body{anon()};
            while (!is("}")) {
                if (!is_ident()) fail();
                std::vector<NodeId> e{with_field(leaf("identifier", true), "name")};
                if (is("=")) {
                    e.push_back(anon());
                    e.push_back(with_field(parse_assignment(), "value"));
                }
                body.push_back(make("enumerator", std::move(e)));
                if (is(",")) {
                    body.push_back(anon());
                } else if (!is("}")) {
                    fail();
                }
            }
            body.push_back(anon());
            kids.push_back(with_field(make("enumerator_list", std::move(body)), "body"));
        }
        return make("enum_specifier", std::move(kids));
    }

    static bool is_function_declarator(const Tree &t, NodeId d) {
        while (d != no_node) {
            const auto &k = t.node(d).kind;
            if (k == "function_declarator") return true;
            if (k != "pointer_declarator" && k != "reference_declarator") return false;
            d = t.child(d, "declarator");
        }
        return false;
    }

    NodeId parse_declaration(DeclCtx ctx) {
        std::vector<NodeId> kids;
        parse_decl_specifiers(kids, true);
        const std::string decl_kind = ctx == DeclCtx::field ? "field_declaration" : "declaration";
        if (is(";")) {
            // struct/enum definition without declarators
            const auto &last = tree_.node(kids.back()).kind;
            if (last != "struct_specifier" && last != "class_specifier" && last != "union_specifier" &&
                last != "enum_specifier") {
                fail();
            }
            kids.push_back(anon());
            return make(decl_kind, std::move(kids));
        }
        const auto dctx = ctx == DeclCtx::field ? DeclaratorCtx::field : DeclaratorCtx::normal;
        auto first = parse_declarator(dctx);
        if (is_function_declarator(tree_, first) && ctx != DeclCtx::block && (is("{") || is(":") || (is("=") && (is("default", 1) || is("delete", 1))))) {
            kids.push_back(with_field(first, "declarator"));
            if (is("=")) {
                kids.push_back(anon());
                kids.push_back(anon());
                kids.push_back(expect(";"));
                return make("function_definition", std::move(kids));
            }
            if (is(":")) kids.push_back(parse_field_initializer_list());
            kids.push_back(with_field(parse_compound_statement(), "body"));
            return make("function_definition", std::move(kids));
        }
        auto d = first;
        while (true) {
            kids.push_back(with_field(parse_init(d), "declarator"));
            if (!is(",")) break;
            kids.push_back(anon());
            d = parse_declarator(dctx);
        }
        kids.push_back(expect(";"));
        return make(decl_kind, std::move(kids));
    }

    NodeId parse_field_initializer_list() {
        std::vector<NodeId> kids{expect(":")};
        while (true) {
            std::vector<NodeId> f{leaf("field_identifier", true)};
            if (is("(")) {
                f.push_back(parse_argument_list());
            } else if (is("{")) {
                f.push_back(parse_initializer_list());
            } else {
                fail();
            }
            kids.push_back(make("field_initializer", std::move(f)));
            if (!is(",")) break;
            kids.push_back(anon());
        }
        return make("field_initializer_list", std::move(kids));
    }

    NodeId parse_init(NodeId declarator) {
        if (is("=")) {
            std::vector<NodeId> k{with_field(declarator, "declarator"), anon()};
            k.push_back(with_field(is("{") ? parse_initializer_list() : parse_assignment(), "value"));
            return make("init_declarator", std::move(k));
        }
        if (is("{")) {
            return make("init_declarator", {with_field(declarator, "declarator"), with_field(parse_initializer_list(), "value")});
        }
        if (is("(")) {
            return make("init_declarator", {with_field(declarator, "declarator"), with_field(parse_argument_list(), "value")});
        }
        if (is(":") && tree_.node(declarator).kind == "field_identifier") {
            // bit field
            auto colon = anon();
            auto width = parse_conditional(false);
            return make("bitfield_declarator", {declarator, colon, width});
        }
        return declarator;
    }

    NodeId parse_declarator(DeclaratorCtx ctx) {
        if (is("*")) {
            std::vector<NodeId> k{anon()};
            while (is_ident() && (is_qualifier(tx()))) k.push_back(leaf("type_qualifier", true));
            if (ctx == DeclaratorCtx::abstract || ctx == DeclaratorCtx::param) {
                if (!(is("*") || is("&") || is("(") || (is_ident() && !is_reserved(tx())))) {
                    return make("abstract_pointer_declarator", std::move(k));
                }
            }
            k.push_back(with_field(parse_declarator(ctx), "declarator"));
            return make(ctx == DeclaratorCtx::abstract ? "abstract_pointer_declarator" : "pointer_declarator",
                        std::move(k));
        }
        if (is("&") || is("&&")) {
            std::vector<NodeId> k{anon()};
            if (ctx == DeclaratorCtx::abstract || ctx == DeclaratorCtx::param) {
                if (!(is("*") || is("(") || (is_ident() && !is_reserved(tx())))) {
                    return make("abstract_reference_declarator", std::move(k));
                }
            }
            k.push_back(with_field(parse_declarator(ctx), "declarator"));
            return make("reference_declarator", std::move(k));
        }
        NodeId d = no_node;
        if (is("(") && (is("*", 1) || is("&", 1))) {
            std::vector<NodeId> k{anon()};
            k.push_back(parse_declarator(ctx));
            k.push_back(expect(")"));
            d = make("parenthesized_declarator", std::move(k));
        } else if (is_ident() && !is_reserved(tx())) {
            if (is("::", 1)) {
                d = parse_scoped_name(NameCtx::expression);
            } else {
                const char *kind = ctx == DeclaratorCtx::field      ? "field_identifier"
                                   : ctx == DeclaratorCtx::type_name ? "type_identifier"
                                                                     : "identifier";
                if (ctx == DeclaratorCtx::type_name) known_types_.insert(std::string(tx()));
                d = leaf(kind, true);
            }
        } else if (is("~") && is_ident(1)) {
            d = make("destructor_name", {anon(), leaf("identifier", true)});
        } else if (is("operator")) {
            std::vector<NodeId> k{anon()};
            if (is("(") && is(")", 1)) {
                k.push_back(anon());
                k.push_back(anon());
            } else {
                auto op = peek_op();
                if (op.second == 0) fail();
                k.push_back(take_op(op));
                if (is("[") && is("]", 1)) k.push_back(anon()), k.push_back(anon());
            }
            d = make("operator_name", std::move(k));
        } else if (ctx == DeclaratorCtx::abstract || ctx == DeclaratorCtx::param) {
            // abstract declarator without a name
        } else {
            fail();
        }

        while (true) {
            if (is("[")) {
                std::vector<NodeId> k;
                if (d != no_node) k.push_back(with_field(d, "declarator"));
                k.push_back(anon());
                if (!is("]")) k.push_back(with_field(parse_expression(), "size"));
                k.push_back(expect("]"));
                d = make(d == no_node ? "abstract_array_declarator" : "array_declarator", std::move(k));
                continue;
            }
            if (is("(") && d != no_node) {
                const auto mark = tree_.checkpoint();
                const auto start = pos_;
                try {
                    auto params = parse_parameter_list();
                    std::vector<NodeId> k{with_field(d, "declarator"), with_field(params, "parameters")};
                    while (is_ident() && (tx() == "const" || tx() == "noexcept" || tx() == "override" ||
                                          tx() == "final" || tx() == "volatile")) {
                        k.push_back(leaf(tx() == "const" || tx() == "volatile" ? "type_qualifier" : "virtual_specifier",
                                         true));
                    }
                    if (is("->")) {
                        std::vector<NodeId> tr{anon()};
                        tr.push_back(parse_type_descriptor());
                        k.push_back(make("trailing_return_type", std::move(tr)));
                    }
                    d = make("function_declarator", std::move(k));
                    continue;
                } catch (const Failure &) {
                    tree_.rollback(mark);
                    pos_ = start;
                    if (ctx != DeclaratorCtx::normal) throw;
                    break;  // constructor-style initializer, handled by parse_init
                }
            }
            break;
        }
        if (d == no_node) fail();
        return d;
    }

    NodeId parse_parameter_list() {
        std::vector<NodeId> kids{expect("(")};
        while (!is(")")) {
            if (is("...")) {
                kids.push_back(leaf("variadic_parameter", true));
            } else {
                kids.push_back(parse_parameter());
            }
            if (is(",")) {
                kids.push_back(anon());
            } else if (!is(")")) {
                fail();
            }
        }
        kids.push_back(anon());
        return make("parameter_list", std::move(kids));
    }

    NodeId parse_parameter() {
        std::vector<NodeId> kids;
        parse_decl_specifiers(kids, true);
        if (!is(",") && !is(")") && !is("=") && !is(">")) {
            kids.push_back(with_field(parse_declarator(DeclaratorCtx::param), "declarator"));
        }
        if (is("=")) {
            kids.push_back(anon());
            kids.push_back(with_field(parse_assignment(true), "default_value"));
            return make("optional_parameter_declaration", std::move(kids));
        }
        return make("parameter_declaration", std::move(kids));
    }

    // ---- statements ----------------------------------------------------

    NodeId parse_compound_statement() {
        std::vector<NodeId> kids{expect("{")};
        while (!is("}")) {
            if (at_eof()) {
                ++errors_;  // missing closing brace
                return make("compound_statement", std::move(kids));
            }
            kids.push_back(parse_statement_recovering());
        }
        kids.push_back(anon());
        return make("compound_statement", std::move(kids));
    }

    NodeId parse_statement_recovering() {
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        try {
            return parse_statement();
        } catch (const Failure &) {
            tree_.rollback(mark);
            pos_ = start;
            return recover(false);
        }
    }

    NodeId parse_statement() {
        if (tok().kind == CTokKind::preproc) return parse_preproc();
        if (tok().kind == CTokKind::punct) {
            if (is("{")) return parse_compound_statement();
            if (is(";")) return make("expression_statement", {anon()});
        }
        if (is_ident()) {
            const auto w = tx();
            if (w == "if") return parse_if();
            if (w == "for") return parse_for();
            if (w == "while") {
                std::vector<NodeId> k{anon()};
                k.push_back(with_field(parse_condition_clause(), "condition"));
                k.push_back(with_field(parse_statement(), "body"));
                return make("while_statement", std::move(k));
            }
            if (w == "do") {
                std::vector<NodeId> k{anon()};
                k.push_back(with_field(parse_statement(), "body"));
                k.push_back(expect("while"));
                k.push_back(with_field(parse_parenthesized(), "condition"));
                k.push_back(expect(";"));
                return make("do_statement", std::move(k));
            }
            if (w == "return") {
                std::vector<NodeId> k{anon()};
                if (!is(";")) k.push_back(is("{") ? parse_initializer_list() : parse_expression());
                k.push_back(expect(";"));
                return make("return_statement", std::move(k));
            }
            if (w == "break" || w == "continue") {
                const auto kind = std::string(w) + "_statement";
                std::vector<NodeId> k{anon()};
                k.push_back(expect(";"));
                return make(kind, std::move(k));
            }
            if (w == "goto") {
                std::vector<NodeId> k{anon()};
                if (!is_ident()) fail();
                k.push_back(with_field(leaf("statement_identifier", true), "label"));
                k.push_back(expect(";"));
                return make("goto_statement", std::move(k));
            }
            if (w == "throw") {
                std::vector<NodeId> k{anon()};
                if (!is(";")) k.push_back(parse_expression());
                k.push_back(expect(";"));
                return make("throw_statement", std::move(k));
            }
            if (w == "switch") {
                std::vector<NodeId> k{anon()};
                k.push_back(with_field(parse_condition_clause(), "condition"));
                k.push_back(with_field(parse_compound_statement(), "body"));
                return make("switch_statement", std::move(k));
            }
            if (w == "case" || w == "default") {
                std::vector<NodeId> k{anon()};
                if (w == "case") k.push_back(with_field(parse_conditional(false), "value"));
                k.push_back(expect(":"));
                while (!is("}") && !is("case") && !is("default") && !at_eof()) {
                    k.push_back(parse_statement_recovering());
                }
                return make("case_statement", std::move(k));
            }
            if (w == "try") {
                std::vector<NodeId> k{anon()};
                k.push_back(with_field(parse_compound_statement(), "body"));
                while (is("catch")) {
                    std::vector<NodeId> c{anon(), expect("(")};
                    if (is("...")) {
                        c.push_back(anon());
                    } else {
                        c.push_back(parse_parameter());
                    }
                    c.push_back(expect(")"));
                    c.push_back(with_field(parse_compound_statement(), "body"));
                    k.push_back(make("catch_clause", std::move(c)));
                }
                return make("try_statement", std::move(k));
            }
            if (w == "typedef") return parse_typedef();
            if (w == "using") return parse_using();
            if (w == "static_assert") {
                std::vector<NodeId> k{anon()};
                k.push_back(parse_argument_list());
                k.push_back(expect(";"));
                return make("static_assert_declaration", std::move(k));
            }
            if (is(":", 1) && !is_reserved(w)) {
                std::vector<NodeId> k{with_field(leaf("statement_identifier", true), "label"), anon()};
                if (!is("}")) k.push_back(parse_statement());
                return make("labeled_statement", std::move(k));
            }
        }
        if (starts_declaration()) {
            const auto mark = tree_.checkpoint();
            const auto start = pos_;
            try {
                return parse_declaration(DeclCtx::block);
            } catch (const Failure &) {
                tree_.rollback(mark);
                pos_ = start;
            }
        }
        std::vector<NodeId> k{parse_expression()};
        k.push_back(expect(";"));
        return make("expression_statement", std::move(k));
    }

    bool starts_declaration() const {
        if (is("::")) return true;
        if (!is_ident()) return false;
        const auto w = tx();
        if (w == "sizeof" || w == "this" || w == "new" || w == "delete" || w == "true" || w == "false" ||
            w == "nullptr" || w == "static_cast" || w == "reinterpret_cast" || w == "const_cast" ||
            w == "dynamic_cast") {
            return false;
        }
        return true;
    }

    NodeId parse_condition_clause() {
        std::vector<NodeId> k{expect("(")};
        const auto mark = tree_.checkpoint();
        const auto start = pos_;
        bool done = false;
        if (starts_declaration()) {
            try {
                std::vector<NodeId> d;
                parse_decl_specifiers(d, true);
                auto decl = parse_declarator(DeclaratorCtx::normal);
                if (is("=")) {
                    d.push_back(with_field(parse_init(decl), "declarator"));
                    if (is(")")) {
                        k.push_back(make("declaration", std::move(d)));
                        done = true;
                    }
                }
            } catch (const Failure &) {
            }
            if (!done) {
                tree_.rollback(mark);
                pos_ = start;
            }
        }
        if (!done) k.push_back(with_field(parse_expression(), "value"));
        k.push_back(expect(")"));
        return make("condition_clause", std::move(k));
    }

    NodeId parse_parenthesized() {
        auto open = expect("(");
        auto inner = parse_expression();
        auto close = expect(")");
        return make("parenthesized_expression", {open, inner, close});
    }

    NodeId parse_if() {
        std::vector<NodeId> k{anon()};
        if (is("constexpr")) k.push_back(anon());
        k.push_back(with_field(parse_condition_clause(), "condition"));
        k.push_back(with_field(parse_statement(), "consequence"));
        if (is("else")) {
            std::vector<NodeId> e{anon()};
            e.push_back(parse_statement());
            k.push_back(with_field(make("else_clause", std::move(e)), "alternative"));
        }
        return make("if_statement", std::move(k));
    }

    NodeId parse_for() {
        std::vector<NodeId> k{anon(), expect("(")};
        // range-based for: for (decl : expr)
        {
            const auto mark = tree_.checkpoint();
            const auto start = pos_;
            try {
                std::vector<NodeId> r;
                parse_decl_specifiers(r, true);
                auto d = parse_declarator(DeclaratorCtx::normal);
                if (is(":")) {
                    r.insert(r.begin(), k.begin(), k.end());
                    r.push_back(with_field(d, "declarator"));
                    r.push_back(anon());
                    r.push_back(with_field(is("{") ? parse_initializer_list() : parse_expression(), "right"));
                    r.push_back(expect(")"));
                    r.push_back(with_field(parse_statement(), "body"));
                    return make("for_range_loop", std::move(r));
                }
            } catch (const Failure &) {
            }
            tree_.rollback(mark);
            pos_ = start;
        }
        if (is(";")) {
            k.push_back(anon());
        } else {
            bool done = false;
            if (starts_declaration()) {
                const auto mark = tree_.checkpoint();
                const auto start = pos_;
                try {
                    k.push_back(with_field(parse_declaration(DeclCtx::block), "initializer"));
                    done = true;
                } catch (const Failure &) {
                    tree_.rollback(mark);
                    pos_ = start;
                }
            }
            if (!done) {
                k.push_back(with_field(parse_expression(), "initializer"));
                k.push_back(expect(";"));
            }
        }
        if (!is(";")) k.push_back(with_field(parse_expression(), "condition"));
        k.push_back(expect(";"));
        if (!is(")")) k.push_back(with_field(parse_expression(), "update"));
        k.push_back(expect(")"));
        k.push_back(with_field(parse_statement(), "body"));
        return make("for_statement", std::move(k));
    }

    // ---- expressions ---------------------------------------------------

    NodeId parse_expression() {
        auto e = parse_assignment();
        while (is(",")) {
            auto comma = anon();
            auto rhs = parse_assignment();
            e = make("comma_expression", {with_field(e, "left"), comma, with_field(rhs, "right")});
        }
        return e;
    }

    NodeId parse_assignment(bool no_gt = false) {
        auto lhs = parse_conditional(no_gt);
        auto op = peek_op();
        if (op.second > 0 && is_assign_op(op.first)) {
            auto o = take_op(op);
            auto rhs = is("{") ? parse_initializer_list() : parse_assignment(no_gt);
            return make("assignment_expression",
                        {with_field(lhs, "left"), with_field(o, "operator"), with_field(rhs, "right")});
        }
        return lhs;
    }

    NodeId parse_conditional(bool no_gt) {
        auto c = parse_binary(1, no_gt);
        if (is("?")) {
            auto q = anon();
            auto yes = parse_expression();
            auto colon = expect(":");
            auto no = parse_assignment(no_gt);
            return make("conditional_expression", {with_field(c, "condition"), q, with_field(yes, "consequence"),
                                                   colon, with_field(no, "alternative")});
        }
        return c;
    }

    NodeId parse_binary(int min_prec, bool no_gt) {
        auto lhs = parse_unary();
        while (true) {
            auto op = peek_op();
            if (op.second == 0) break;
            const int prec = binary_prec(op.first);
            if (prec == 0 || prec < min_prec) break;
            if (no_gt && op.first[0] == '>') break;
            auto o = take_op(op);
            auto rhs = parse_binary(prec + 1, no_gt);
            lhs = make("binary_expression", {with_field(lhs, "left"), with_field(o, "operator"), with_field(rhs, "right")});
        }
        return lhs;
    }

    bool definitely_type(NodeId type_descriptor) const {
        bool yes = false;
        tree_.visit(type_descriptor, [&](NodeId id) {
            const auto &n = tree_.node(id);
            if (n.kind == "primitive_type" || n.kind == "sized_type_specifier" || n.kind == "type_qualifier" ||
                n.kind == "struct_specifier" || n.kind == "abstract_pointer_declarator" ||
                n.kind == "abstract_reference_declarator" || n.kind == "template_type" ||
                n.kind == "placeholder_type_specifier") {
                yes = true;
            }
            if (n.kind == "type_identifier") {
                const auto t = tree_.text(id);
                if (known_types_.contains(std::string(t)) || t.ends_with("_t") || t == "dim3" || t == "half" ||
                    t == "float2" || t == "float3" || t == "float4" || t == "int2" || t == "int3" ||
                    t == "int4" || t == "double2") {
                    yes = true;
                }
            }
        });
        return yes;
    }

    bool starts_operand() const {
        const auto &t = tok();
        if (t.kind == CTokKind::ident || t.kind == CTokKind::number || t.kind == CTokKind::string ||
            t.kind == CTokKind::chr) {
            return true;
        }
        return is("(") || is("!") || is("~") || is("-") || is("+") || is("*") || is("&") || is("++") || is("--") ||
               is("::");
    }

    NodeId parse_unary() {
        if (tok().kind == CTokKind::punct) {
            const auto s = tx();
            if (s == "!" || s == "~" || s == "-" || s == "+") {
                auto o = anon();
                auto a = parse_unary();
                return make("unary_expression", {with_field(o, "operator"), with_field(a, "argument")});
            }
            if (s == "*" || s == "&") {
                auto o = anon();
                auto a = parse_unary();
                return make("pointer_expression", {with_field(o, "operator"), with_field(a, "argument")});
            }
            if (s == "++" || s == "--") {
                auto o = anon();
                auto a = parse_unary();
                return make("update_expression", {with_field(o, "operator"), with_field(a, "argument")});
            }
            if (s == "(") {
                const auto mark = tree_.checkpoint();
                const auto start = pos_;
                try {
                    auto open = anon();
                    auto type = parse_type_descriptor();
                    auto close = expect(")");
                    if (definitely_type(type) && starts_operand()) {
                        auto value = parse_unary();
                        return make("cast_expression",
                                    {open, with_field(type, "type"), close, with_field(value, "value")});
                    }
                } catch (const Failure &) {
                }
                tree_.rollback(mark);
                pos_ = start;
            }
        }
        if (is("sizeof")) {
            std::vector<NodeId> k{anon()};
            if (is("(")) {
                const auto mark = tree_.checkpoint();
                const auto start = pos_;
                try {
                    auto open = anon();
                    auto type = parse_type_descriptor();
                    auto close = expect(")");
                    k.push_back(open);
                    k.push_back(with_field(type, "type"));
                    k.push_back(close);
                    return make("sizeof_expression", std::move(k));
                } catch (const Failure &) {
                    tree_.rollback(mark);
                    pos_ = start;
                }
            }
            k.push_back(with_field(parse_unary(), "value"));
            return make("sizeof_expression", std::move(k));
        }
        if (is("new")) {
            std::vector<NodeId> k{anon()};
            std::vector<NodeId> spec;
            parse_decl_specifiers(spec, true);
            k.insert(k.end(), spec.begin(), spec.end());
            while (is("*")) k.push_back(make("abstract_pointer_declarator", {anon()}));
            if (is("[")) {
                std::vector<NodeId> nd{anon()};
                nd.push_back(parse_expression());
                nd.push_back(expect("]"));
                k.push_back(with_field(make("new_declarator", std::move(nd)), "declarator"));
            }
            if (is("(")) k.push_back(with_field(parse_argument_list(), "arguments"));
            if (is("{")) k.push_back(with_field(parse_initializer_list(), "arguments"));
            return make("new_expression", std::move(k));
        }
        if (is("delete")) {
            std::vector<NodeId> k{anon()};
            if (is("[") && is("]", 1)) {
                k.push_back(anon());
                k.push_back(anon());
            }
            k.push_back(with_field(parse_unary(), "argument"));
            return make("delete_expression", std::move(k));
        }
        return parse_postfix();
    }

    NodeId parse_postfix() {
        auto e = parse_primary();
        while (true) {
            if (is("(")) {
                auto args = parse_argument_list();
                e = make("call_expression", {with_field(e, "function"), with_field(args, "arguments")});
                continue;
            }
            auto op = peek_op();
            if (op.first == "<<<") {
                std::vector<NodeId> k{take_op(op)};
                while (true) {
                    k.push_back(parse_assignment(true));
                    if (is(",")) {
                        k.push_back(anon());
                        continue;
                    }
                    break;
                }
                auto close = peek_op();
                if (close.first != ">>>") fail();
                k.push_back(take_op(close));
                auto launch = make("kernel_call_syntax", std::move(k));
                if (!is("(")) fail();
                auto args = parse_argument_list();
                e = make("call_expression", {with_field(e, "function"), launch, with_field(args, "arguments")});
                continue;
            }
            if (is("[")) {
                auto open = anon();
                auto index = parse_expression();
                auto close = expect("]");
                e = make("subscript_expression", {with_field(e, "argument"), open, with_field(index, "index"), close});
                continue;
            }
            if (is(".") || is("->")) {
                auto o = anon();
                if (!is_ident()) fail();
                auto f = leaf("field_identifier", true);
                e = make("field_expression", {with_field(e, "argument"), with_field(o, "operator"), with_field(f, "field")});
                continue;
            }
            if (is("++") || is("--")) {
                auto o = anon();
                e = make("update_expression", {with_field(e, "argument"), with_field(o, "operator")});
                continue;
            }
            break;
        }
        return e;
    }

    NodeId parse_primary() {
        const auto &t = tok();
        switch (t.kind) {
        case CTokKind::number: return leaf("number_literal", true);
        case CTokKind::chr: return leaf("char_literal", true);
        case CTokKind::string: {
            auto s = leaf("string_literal", true);
            if (tok().kind != CTokKind::string) return s;
            std::vector<NodeId> k{s};
            while (tok().kind == CTokKind::string) k.push_back(leaf("string_literal", true));
            return make("concatenated_string", std::move(k));
        }
        case CTokKind::ident: {
            const auto w = tx();
            if (w == "true" || w == "false" || w == "nullptr" || w == "this") return leaf(std::string(w), true);
            if (w == "NULL") return leaf("null", true);
            if (w == "static_cast" || w == "reinterpret_cast" || w == "const_cast" || w == "dynamic_cast") {
                auto name = with_field(leaf("identifier", true), "name");
                auto args = with_field(parse_template_arguments(), "arguments");
                return make("template_function", {name, args});
            }
            if (is_reserved(w) && !is_primitive(w)) fail();
            if (is_primitive(w) && is("(", 1)) {
                // functional cast, e.g. float(x)
                return leaf("primitive_type", true);
            }
            if (is("::", 1)) return parse_scoped_name(NameCtx::expression);
            return leaf("identifier", true);
        }
        case CTokKind::punct: {
            if (is("(")) {
                auto open = anon();
                auto inner = parse_expression();
                auto close = expect(")");
                return make("parenthesized_expression", {open, inner, close});
            }
            if (is("{")) return parse_initializer_list();
            if (is("::")) return parse_scoped_name(NameCtx::expression);
            fail();
        }
        default: fail();
        }
    }

    NodeId parse_argument_list() {
        std::vector<NodeId> kids{expect("(")};
        while (!is(")")) {
            kids.push_back(is("{") ? parse_initializer_list() : parse_assignment());
            if (is(",")) {
                kids.push_back(anon());
            } else if (!is(")")) {
                fail();
            }
        }
        kids.push_back(anon());
        return make("argument_list", std::move(kids));
    }

    NodeId parse_initializer_list() {
        std::vector<NodeId> kids{expect("{")};
        while (!is("}")) {
            if (is(".") && is_ident(1)) {
                // designated initializer
                std::vector<NodeId> d{anon(), leaf("field_identifier", true)};
                d.push_back(expect("="));
                d.push_back(is("{") ? parse_initializer_list() : parse_assignment());
                kids.push_back(make("initializer_pair", std::move(d)));
            } else {
                kids.push_back(is("{") ? parse_initializer_list() : parse_assignment());
            }
            if (is(",")) {
                kids.push_back(anon());
            } else if (!is("}")) {
                fail();
            }
        }
        kids.push_back(anon());
        return make("initializer_list", std::move(kids));
    }

    std::string src_;
    std::vector<CTok> toks_;
    std::size_t pos_ = 0;
    Tree tree_;
    std::size_t errors_ = 0;
    std::set<std::string> known_types_;
};

inline ParseResult parse_c_family(std::string source) { return CParser(std::move(source)).parse(); }

} // namespace forge::syntax
