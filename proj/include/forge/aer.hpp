#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/language.hpp"
#include "forge/syntax/parse.hpp"
#include "forge/text.hpp"
#include "forge/tokenizer.hpp"

namespace forge {

/// Entity categories with their begin ids. Continuation tokens use id + 1.
struct AerTagSet {
    std::vector<std::pair<int, std::string>> tags;
    int outside_id = 0;

    std::optional<int> id_of(std::string_view name) const {
        for (const auto &[id, n] : tags) {
            if (n == name) return id;
        }
        return std::nullopt;
    }
    std::optional<std::string> name_of(int begin_id) const {
        for (const auto &[id, n] : tags) {
            if (id == begin_id) return n;
        }
        return std::nullopt;
    }

    friend bool operator==(const AerTagSet &, const AerTagSet &) = default;
};

inline constexpr std::string_view default_tags_text = R"(# id name
1 identifier
3 function
5 type_identifier
7 primitive_type
9 number_literal
11 pointer_reference
13 pointer_declarator
15 constant
)";

inline constexpr std::string_view parallel_tag_line = "17 parallel_construct\n";

/// Lines `<begin-id> <name>`; ids must be odd, unique and non-zero.
inline AerTagSet parse_tagset(std::string_view text) {
    AerTagSet set;
    std::istringstream is{std::string(text)};
    std::string line;
    std::set<int> seen;
    while (std::getline(is, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        int id = 0;
        std::string name;
        if (!(ls >> id >> name) || id <= 0 || id % 2 == 0 || !seen.insert(id).second) {
            throw Error(Errc::schema, "bad tag line: " + line);
        }
        set.tags.emplace_back(id, name);
    }
    return set;
}

inline AerTagSet default_tagset() { return parse_tagset(default_tags_text); }

/// Default categories plus the CUDA parallel-construct category.
inline AerTagSet extended_tagset() { return parse_tagset(std::string(default_tags_text) + std::string(parallel_tag_line)); }

inline std::string serialize_tagset(const AerTagSet &set) {
    std::string out;
    for (const auto &[id, name] : set.tags) out += std::to_string(id) + " " + name + "\n";
    return out;
}

// ---- node-kind to category mapping ------------------------------------------

/// One selector step: a node kind (or quoted anonymous token) and optionally
/// the field the node occupies in its parent.
struct AerStep {
    std::string kind;
    bool anonymous = false;
    std::string field;
};

struct AerRule {
    std::string category;
    std::vector<AerStep> steps;  // steps[0] is the labeled node, then ancestors
    std::set<std::string> texts;  // empty: any text
};

struct AerMapping {
    std::vector<AerRule> rules;
};

/// Rule lines: `<category> <selector> [text|text...]`. A selector is a chain
/// `kind[.field]/parent-kind[.field]/...`; quoted kinds match anonymous tokens.
inline AerMapping parse_mapping(std::string_view text) {
    AerMapping m;
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        AerRule rule;
        std::string selector;
        std::string texts;
        if (!(ls >> rule.category >> selector)) throw Error(Errc::schema, "bad mapping line: " + line);
        ls >> texts;
        std::size_t start = 0;
        while (start <= selector.size()) {
            auto slash = selector.find('/', start);
            // a quoted token may itself contain '/'
            if (selector[start] == '"') {
                const auto close = selector.find('"', start + 1);
                if (close == std::string::npos) throw Error(Errc::schema, "unterminated quote: " + line);
                slash = selector.find('/', close);
            }
            auto part = selector.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
            AerStep step;
            if (!part.empty() && part[0] == '"') {
                const auto close = part.find('"', 1);
                step.kind = part.substr(1, close - 1);
                step.anonymous = true;
                part = part.substr(close + 1);
                if (!part.empty() && part[0] == '.') step.field = part.substr(1);
            } else {
                const auto dot = part.find('.');
                step.kind = part.substr(0, dot);
                if (dot != std::string::npos) step.field = part.substr(dot + 1);
            }
            if (step.kind.empty()) throw Error(Errc::schema, "empty selector step: " + line);
            rule.steps.push_back(std::move(step));
            if (slash == std::string::npos) break;
            start = slash + 1;
        }
        std::size_t b = 0;
        while (!texts.empty() && b <= texts.size()) {
            const auto bar = texts.find('|', b);
            rule.texts.insert(texts.substr(b, bar == std::string::npos ? std::string::npos : bar - b));
            if (bar == std::string::npos) break;
            b = bar + 1;
        }
        m.rules.push_back(std::move(rule));
    }
    return m;
}

inline constexpr std::string_view c_family_mapping_text = R"(# C and C++ node kinds
identifier          identifier
identifier          field_identifier
function            identifier.function/call_expression
function            identifier.name/qualified_identifier.function/call_expression
function            field_identifier.field/field_expression.function/call_expression
function            identifier.declarator/function_declarator
function            identifier.name/qualified_identifier.declarator/function_declarator
type_identifier     type_identifier
primitive_type      primitive_type
primitive_type      sized_type_specifier
number_literal      number_literal
pointer_reference   "&"/pointer_expression
pointer_reference   "*"/pointer_expression
pointer_reference   "&"/reference_declarator
pointer_reference   "&&"/reference_declarator
pointer_reference   "&"/abstract_reference_declarator
pointer_declarator  "*"/pointer_declarator
pointer_declarator  "*"/abstract_pointer_declarator
pointer_declarator  "*"/new_expression
constant            string_literal
constant            char_literal
constant            system_lib_string
constant            true
constant            false
constant            null
constant            nullptr
)";

inline constexpr std::string_view cuda_extra_mapping_text = R"(# CUDA built-in launch coordinates
parallel_construct  identifier  threadIdx|blockIdx|blockDim|gridDim|warpSize
)";

inline constexpr std::string_view fortran_mapping_text = R"(# Fortran node kinds
identifier          identifier
identifier          type_member
identifier          name/program_statement
identifier          name/end_program_statement
identifier          name/module_statement
identifier          name/end_module_statement
function            identifier.function/call_expression
function            identifier.name/subroutine_call
function            name.name/subroutine_statement
function            name.name/function_statement
function            name/end_subroutine_statement
function            name/end_function_statement
type_identifier     type_name
primitive_type      intrinsic_type
number_literal      number_literal
constant            string_literal
constant            boolean_literal
)";

inline AerMapping default_mapping(Language l) {
    switch (l) {
    case Language::cpp: return parse_mapping(c_family_mapping_text);
    case Language::cuda: return parse_mapping(std::string(c_family_mapping_text) + std::string(cuda_extra_mapping_text));
    case Language::fortran: return parse_mapping(fortran_mapping_text);
    }
    throw Error(Errc::grammar_missing, "no grammar for language");
}

// ---- labeling -----------------------------------------------------------------

struct AerLabeledDocument {
    TokenizedDocument doc;
    std::vector<int> labels;
};

namespace detail {

inline bool step_matches(const syntax::Tree &tree, syntax::NodeId id, const AerStep &step) {
    const auto &n = tree.node(id);
    if (n.named == step.anonymous) return false;
    if (n.kind != step.kind) return false;
    return step.field.empty() || n.field == step.field;
}

/// Category of a node under the best-matching rule: longest selector, then
/// text-restricted over unrestricted, then the later rule.
inline const AerRule *match_rule(const syntax::Tree &tree, syntax::NodeId id, const AerMapping &mapping,
                                 const AerTagSet &tags) {
    const AerRule *best = nullptr;
    std::pair<std::size_t, int> best_score{0, 0};
    for (const auto &rule : mapping.rules) {
        if (!tags.id_of(rule.category)) continue;
        syntax::NodeId cur = id;
        bool ok = true;
        for (std::size_t s = 0; s < rule.steps.size(); ++s) {
            if (cur == syntax::no_node || !step_matches(tree, cur, rule.steps[s])) {
                ok = false;
                break;
            }
            cur = tree.node(cur).parent;
        }
        if (!ok) continue;
        if (!rule.texts.empty() && !rule.texts.contains(std::string(tree.text(id)))) continue;
        const std::pair<std::size_t, int> score{rule.steps.size(), rule.texts.empty() ? 0 : 1};
        if (best == nullptr || score >= best_score) {
            best = &rule;
            best_score = score;
        }
    }
    return best;
}

} // namespace detail

/// Labels the tokens of `source`. Each mapped node paints its byte range with
/// its category; deeper nodes paint over their ancestors. A word takes the
/// category at its first non-space byte. The first token of each entity gets
/// the begin id, the remaining tokens the continuation id; whitespace-only
/// tokens and unmapped words get outside_id.
inline AerLabeledDocument extract_labels(std::string_view source, Language language, const Vocabulary &vocab,
                                         const AerTagSet &tagset, const AerMapping &mapping,
                                         std::string doc_id = {}) {
    AerLabeledDocument out;
    out.doc = vocab.encode(source, language, std::move(doc_id));
    out.labels.assign(out.doc.tokens.size(), tagset.outside_id);
    if (source.empty()) return out;

    auto parsed = syntax::parse(std::string(source), language);
    if (parsed.failed()) {
        throw Error(Errc::parse_failure, "no part of document '" + out.doc.doc_id + "' could be parsed");
    }
    const auto &tree = parsed.tree;

    std::vector<int> cat(source.size(), 0);
    std::vector<syntax::NodeId> ent(source.size(), syntax::no_node);
    tree.visit(tree.root(), [&](syntax::NodeId id) {
        const auto *rule = detail::match_rule(tree, id, mapping, tagset);
        if (rule == nullptr) return;
        const int c = *tagset.id_of(rule->category);
        const auto &n = tree.node(id);
        for (auto b = n.begin; b < n.end; ++b) {
            cat[b] = c;
            ent[b] = id;
        }
    });

    const auto words = segment_words(source);
    syntax::NodeId prev_entity = syntax::no_node;
    for (std::size_t w = 0; w < words.size(); ++w) {
        const auto &range = words[w];
        const auto [ts, te] = out.doc.word_spans[w];
        if (range.blank() || cat[range.core_begin] == 0) {
            prev_entity = syntax::no_node;
            continue;
        }
        const int c = cat[range.core_begin];
        const auto e = ent[range.core_begin];
        bool begin = e != prev_entity;
        std::size_t offset = range.begin;
        for (auto t = ts; t < te; ++t) {
            const auto &piece = vocab.token(out.doc.tokens[t]);
            offset += piece.size();
            if (offset <= range.core_begin) continue;  // leading whitespace only
            out.labels[t] = begin ? c : c + 1;
            begin = false;
        }
        prev_entity = e;
    }
    return out;
}

inline AerLabeledDocument extract_labels(std::string_view source, Language language, const Vocabulary &vocab,
                                         const AerTagSet &tagset, std::string doc_id = {}) {
    return extract_labels(source, language, vocab, tagset, default_mapping(language), std::move(doc_id));
}

inline nlohmann::json to_json(const AerLabeledDocument &d) {
    return nlohmann::json{{"doc_id", d.doc.doc_id},
                          {"language", std::string(to_string(d.doc.language))},
                          {"tokens", d.doc.tokens},
                          {"labels", d.labels}};
}

} // namespace forge
