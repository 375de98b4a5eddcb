#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/keywords.hpp"
#include "forge/language.hpp"
#include "forge/syntax/parse.hpp"
#include "forge/text.hpp"

namespace forge {

// ---- BLEU ------------------------------------------------------------------------

/// Sufficient statistics of BLEU; corpus BLEU pools them over sentences.
struct BleuStats {
    std::vector<double> matches;  // per order, clipped (possibly weighted)
    std::vector<double> totals;
    double hyp_len = 0;
    double ref_len = 0;

    explicit BleuStats(int max_n = 4) : matches(static_cast<std::size_t>(max_n), 0.0), totals(static_cast<std::size_t>(max_n), 0.0) {}

    BleuStats &operator+=(const BleuStats &o) {
        for (std::size_t n = 0; n < matches.size(); ++n) {
            matches[n] += o.matches[n];
            totals[n] += o.totals[n];
        }
        hyp_len += o.hyp_len;
        ref_len += o.ref_len;
        return *this;
    }
};

namespace detail {

using Ngram = std::vector<std::string>;

inline std::map<Ngram, int> ngram_counts(const std::vector<std::string> &toks, std::size_t n) {
    std::map<Ngram, int> out;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) ++out[Ngram(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return out;
}

/// Reference length closest to the hypothesis length; ties prefer the shorter.
inline std::size_t closest_ref_len(std::size_t hyp, const std::vector<std::vector<std::string>> &refs) {
    std::size_t best = refs.front().size();
    for (const auto &r : refs) {
        const auto d = r.size() > hyp ? r.size() - hyp : hyp - r.size();
        const auto bd = best > hyp ? best - hyp : hyp - best;
        if (d < bd || (d == bd && r.size() < best)) best = r.size();
    }
    return best;
}

} // namespace detail

/// Clipped n-gram statistics. With `unigram_weight` the order-1 counts are
/// weighted per token (the keyword-weighted variant).
inline BleuStats bleu_stats(const std::vector<std::string> &hyp, const std::vector<std::vector<std::string>> &refs,
                            int max_n = 4, const std::function<double(const std::string &)> &unigram_weight = {}) {
    if (refs.empty()) throw Error(Errc::empty_reference, "BLEU needs at least one reference");
    BleuStats s(max_n);
    for (int n = 1; n <= max_n; ++n) {
        const auto hc = detail::ngram_counts(hyp, static_cast<std::size_t>(n));
        std::map<detail::Ngram, int> max_ref;
        for (const auto &r : refs) {
            for (const auto &[g, c] : detail::ngram_counts(r, static_cast<std::size_t>(n))) {
                max_ref[g] = std::max(max_ref[g], c);
            }
        }
        double m = 0;
        double t = 0;
        for (const auto &[g, c] : hc) {
            const double w = (n == 1 && unigram_weight) ? unigram_weight(g[0]) : 1.0;
            auto it = max_ref.find(g);
            m += w * (it == max_ref.end() ? 0 : std::min(c, it->second));
            t += w * c;
        }
        s.matches[static_cast<std::size_t>(n - 1)] = m;
        s.totals[static_cast<std::size_t>(n - 1)] = t;
    }
    s.hyp_len = static_cast<double>(hyp.size());
    s.ref_len = static_cast<double>(detail::closest_ref_len(hyp.size(), refs));
    return s;
}

/// BLEU in [0,100] from (pooled) statistics. Orders above one use add-one
/// smoothing; the brevity penalty uses the closest reference length.
inline double bleu_from_stats(const BleuStats &s, bool smooth = true) {
    if (s.hyp_len == 0 || s.totals[0] == 0) return 0.0;
    double log_sum = 0.0;
    const auto orders = s.matches.size();
    for (std::size_t n = 0; n < orders; ++n) {
        double p;
        if (n == 0 || !smooth) {
            if (s.totals[n] == 0) {
                if (!smooth) return 0.0;
                p = 1.0;
            } else {
                p = s.matches[n] / s.totals[n];
            }
        } else {
            p = (s.matches[n] + 1.0) / (s.totals[n] + 1.0);
        }
        if (p <= 0.0) return 0.0;
        log_sum += std::log(p);
    }
    const double bp = s.hyp_len > s.ref_len ? 1.0 : std::exp(1.0 - s.ref_len / s.hyp_len);
    return 100.0 * bp * std::exp(log_sum / static_cast<double>(orders));
}

inline double bleu(std::string_view hypothesis, const std::vector<std::string> &references, int max_n = 4,
                   bool smooth = true) {
    std::vector<std::vector<std::string>> refs;
    for (const auto &r : references) refs.push_back(word_tokens(r));
    return bleu_from_stats(bleu_stats(word_tokens(hypothesis), refs, max_n), smooth);
}

inline double bleu(std::string_view hypothesis, std::string_view reference, int max_n = 4, bool smooth = true) {
    return bleu(hypothesis, std::vector<std::string>{std::string(reference)}, max_n, smooth);
}

// ---- ChrF --------------------------------------------------------------------------

/// Character n-gram F-beta. Whitespace is removed first; precision and
/// recall are averaged over the orders for which both strings have n-grams.
inline double chrf(std::string_view hypothesis, std::string_view reference, int max_n = 6, double beta = 2.0) {
    auto strip = [](std::string_view s) {
        std::string out;
        for (char c : s) {
            if (!is_space_char(static_cast<unsigned char>(c))) out.push_back(c);
        }
        return out;
    };
    const auto h = strip(hypothesis);
    const auto r = strip(reference);
    if (h == r) return 100.0;
    if (h.empty() || r.empty()) return 0.0;
    double p_sum = 0.0;
    double r_sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= max_n; ++n) {
        const auto un = static_cast<std::size_t>(n);
        if (h.size() < un || r.size() < un) continue;
        std::map<std::string, int> hc, rc;
        for (std::size_t i = 0; i + un <= h.size(); ++i) ++hc[h.substr(i, un)];
        for (std::size_t i = 0; i + un <= r.size(); ++i) ++rc[r.substr(i, un)];
        double match = 0;
        for (const auto &[g, c] : hc) {
            auto it = rc.find(g);
            if (it != rc.end()) match += std::min(c, it->second);
        }
        p_sum += match / static_cast<double>(h.size() - un + 1);
        r_sum += match / static_cast<double>(r.size() - un + 1);
        ++orders;
    }
    const double p = p_sum / orders;
    const double rr = r_sum / orders;
    if (p + rr == 0.0) return 0.0;
    const double b2 = beta * beta;
    return 100.0 * (1 + b2) * p * rr / (b2 * p + rr);
}

// ---- ROUGE-L ------------------------------------------------------------------------

inline std::size_t lcs_length(const std::vector<std::string> &a, const std::vector<std::string> &b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// LCS-based F1 over word tokens.
inline double rouge_l(std::string_view hypothesis, std::string_view reference) {
    const auto h = word_tokens(hypothesis);
    const auto r = word_tokens(reference);
    if (h.empty() && r.empty()) return 100.0;
    if (h.empty() || r.empty()) return 0.0;
    const auto l = static_cast<double>(lcs_length(h, r));
    if (l == 0) return 0.0;
    const double p = l / static_cast<double>(h.size());
    const double rec = l / static_cast<double>(r.size());
    return 100.0 * 2 * p * rec / (p + rec);
}

// ---- CodeBLEU components -----------------------------------------------------------

/// S-expressions of every node that has children, comments excluded.
inline std::vector<std::string> syntax_subtrees(const syntax::Tree &tree) {
    std::vector<std::string> out;
    if (tree.empty()) return out;
    tree.visit(tree.root(), [&](syntax::NodeId id) {
        if (!tree.node(id).children.empty()) out.push_back(tree.sexp(id));
    });
    return out;
}

/// Multiset intersection of subtrees over the reference's subtree count.
inline double ast_match_ratio(const std::vector<std::string> &hyp, const std::vector<std::string> &ref) {
    if (ref.empty()) return hyp.empty() ? 1.0 : 0.0;
    std::map<std::string, int> pool;
    for (const auto &s : hyp) ++pool[s];
    std::size_t matched = 0;
    for (const auto &s : ref) {
        auto it = pool.find(s);
        if (it != pool.end() && it->second > 0) {
            --it->second;
            ++matched;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(ref.size());
}

/// One def-use edge before variable normalization.
struct DataflowEdge {
    std::string var;
    std::string relation;  // "computedFrom" or "comesFrom"
    std::vector<std::string> sources;
};

namespace detail {

class DataflowWalker {
  public:
    DataflowWalker(const syntax::Tree &t, bool fold_case) : t_(t), fold_case_(fold_case) {}

    std::vector<DataflowEdge> run() {
        if (!t_.empty()) walk(t_.root());
        return std::move(edges_);
    }

  private:
    const syntax::Node &n(syntax::NodeId id) const { return t_.node(id); }
    std::string name(syntax::NodeId id) const { return fold_case_ ? to_lower(t_.text(id)) : std::string(t_.text(id)); }

    bool is_variable(syntax::NodeId id) const {
        const auto &node = n(id);
        if (node.kind != "identifier") return false;
        const auto parent = node.parent;
        if (parent == syntax::no_node) return true;
        const auto &p = n(parent);
        if (node.field == "function") return false;  // callee
        if (p.kind == "function_declarator" && node.field == "declarator") return false;
        if (p.kind == "subroutine_call" && node.field == "name") return false;
        if (p.kind == "keyword_argument" && node.field == "name") return false;
        if (p.kind == "template_function" || p.kind == "qualified_identifier" || p.kind == "use_statement" ||
            p.kind == "enumerator" || p.kind == "destructor_name" || p.kind == "preproc_def" ||
            p.kind == "preproc_function_def") {
            return false;
        }
        return true;
    }

    void use(syntax::NodeId id, std::vector<std::string> *sink) {
        const auto v = name(id);
        if (defined_.contains(v)) edges_.push_back({v, "comesFrom", {v}});
        else edges_.push_back({v, "comesFrom", {}});
        if (sink) sink->push_back(v);
    }

    /// Emits use edges for every variable under `id`, in source order.
    void uses(syntax::NodeId id, std::vector<std::string> *sink) {
        if (id == syntax::no_node) return;
        const auto &node = n(id);
        if (is_assignment(id) || node.kind == "update_expression") {
            // nested assignment: handle as its own definition, its target is a source
            const auto target = define(id);
            if (sink && !target.empty()) sink->push_back(target);
            return;
        }
        if (is_variable(id)) {
            use(id, sink);
            return;
        }
        if (node.kind == "field_identifier" || node.kind == "type_member") return;
        for (auto c : node.children) uses(c, sink);
    }

    bool is_assignment(syntax::NodeId id) const {
        const auto &k = n(id).kind;
        return k == "assignment_expression" || k == "assignment_statement" ||
               (k == "init_declarator" && (t_.child(id, "value") != syntax::no_node || t_.child(id, "right") != syntax::no_node));
    }

    /// The variable written through an lvalue, plus the variables read while
    /// addressing it (indices, pointer bases of dereferences).
    syntax::NodeId lvalue_base(syntax::NodeId id, std::vector<syntax::NodeId> &address_reads) const {
        while (id != syntax::no_node) {
            const auto &node = n(id);
            if (node.kind == "identifier") return id;
            if (node.kind == "subscript_expression") {
                for (auto c : node.children) {
                    if (n(c).field != "argument") address_reads.push_back(c);
                }
                id = t_.child(id, "argument");
            } else if (node.kind == "field_expression" || node.kind == "derived_type_member_expression") {
                id = node.kind == "field_expression" ? t_.child(id, "argument") : node.children.front();
            } else if (node.kind == "pointer_expression" || node.kind == "parenthesized_expression") {
                const auto a = t_.child(id, "argument");
                id = a != syntax::no_node ? a : t_.named_children(id).empty() ? syntax::no_node : t_.named_children(id).front();
            } else if (node.kind == "pointer_declarator" || node.kind == "reference_declarator" ||
                       node.kind == "array_declarator" || node.kind == "sized_declarator") {
                if (node.kind == "array_declarator") {
                    const auto size = t_.child(id, "size");
                    if (size != syntax::no_node) address_reads.push_back(size);
                }
                const auto d = t_.child(id, "declarator");
                id = d != syntax::no_node ? d : t_.named_children(id).front();
            } else {
                return syntax::no_node;
            }
        }
        return syntax::no_node;
    }

    std::string define(syntax::NodeId id) {
        const auto &node = n(id);
        if (node.kind == "update_expression") {
            std::vector<syntax::NodeId> reads;
            const auto base = lvalue_base(t_.child(id, "argument"), reads);
            std::vector<std::string> sources;
            for (auto r : reads) uses(r, &sources);
            if (base == syntax::no_node) return {};
            use(base, nullptr);
            const auto v = name(base);
            sources.insert(sources.begin(), v);
            edges_.push_back({v, "computedFrom", sources});
            defined_.insert(v);
            return v;
        }
        syntax::NodeId left = t_.child(id, "left");
        if (left == syntax::no_node) left = t_.child(id, "declarator");
        syntax::NodeId right = t_.child(id, "right");
        if (right == syntax::no_node) right = t_.child(id, "value");
        std::vector<std::string> sources;
        uses(right, &sources);
        std::vector<syntax::NodeId> reads;
        const auto base = lvalue_base(left, reads);
        for (auto r : reads) uses(r, &sources);
        if (base == syntax::no_node) return {};
        const auto v = name(base);
        const auto op = t_.child(id, "operator");
        if (op != syntax::no_node && t_.text(op) != "=") {
            use(base, nullptr);
            sources.insert(sources.begin(), v);
        }
        edges_.push_back({v, "computedFrom", sources});
        defined_.insert(v);
        return v;
    }

    void walk(syntax::NodeId id) {
        const auto &node = n(id);
        if (is_assignment(id) || node.kind == "update_expression") {
            define(id);
            return;
        }
        if (node.kind == "parameter_declaration" || node.kind == "optional_parameter_declaration" ||
            node.kind == "declaration" || node.kind == "field_declaration" || node.kind == "variable_declaration" ||
            node.kind == "parameters" || node.kind == "for_range_loop" || node.kind == "loop_control_expression") {
            // Declarators without initializer define their variable.
            for (auto c : node.children) {
                const auto &cn = n(c);
                if (cn.field == "declarator" || node.kind == "parameters" ||
                    (node.kind == "loop_control_expression" && c == node.children.front())) {
                    if (is_assignment(c)) {
                        define(c);
                        continue;
                    }
                    std::vector<syntax::NodeId> reads;
                    const auto base = lvalue_base(c, reads);
                    for (auto r : reads) uses(r, nullptr);
                    if (base != syntax::no_node) {
                        if (node.kind == "loop_control_expression") {
                            defined_.insert(name(base));
                            edges_.push_back({name(base), "computedFrom", {}});
                        } else {
                            defined_.insert(name(base));
                        }
                        continue;
                    }
                    if (cn.kind == "function_declarator") walk(c);
                    continue;
                }
                if (node.kind == "for_range_loop" && cn.field == "right") {
                    uses(c, nullptr);
                    continue;
                }
                if (node.kind == "loop_control_expression") {
                    if (cn.named) uses(c, nullptr);
                    continue;
                }
                walk(c);
            }
            return;
        }
        if (is_variable(id)) {
            use(id, nullptr);
            return;
        }
        for (auto c : node.children) walk(c);
    }

    const syntax::Tree &t_;
    bool fold_case_;
    std::vector<DataflowEdge> edges_;
    std::set<std::string> defined_;
};

} // namespace detail

/// Def-use edges in source order: for a write `v = f(a, b)` the reads of a
/// and b (each "comesFrom" its earlier definition, if any) and then
/// `v computedFrom [a, b]`.
inline std::vector<DataflowEdge> dataflow_edges(const syntax::Tree &tree, Language l = Language::cpp) {
    return detail::DataflowWalker(tree, l == Language::fortran).run();
}

/// Renames variables to var_0, var_1, ... by first appearance and renders
/// each edge as one string.
inline std::vector<std::string> normalize_edges(const std::vector<DataflowEdge> &edges) {
    std::map<std::string, std::string> names;
    auto norm = [&](const std::string &v) {
        auto it = names.find(v);
        if (it == names.end()) it = names.emplace(v, "var_" + std::to_string(names.size())).first;
        return it->second;
    };
    std::vector<std::string> out;
    for (const auto &e : edges) {
        std::string s = norm(e.var) + " " + e.relation + " [";
        for (std::size_t i = 0; i < e.sources.size(); ++i) {
            if (i) s += ",";
            s += norm(e.sources[i]);
        }
        out.push_back(s + "]");
    }
    return out;
}

inline double dataflow_match_ratio(const std::vector<std::string> &hyp, const std::vector<std::string> &ref) {
    return ast_match_ratio(hyp, ref);  // same multiset-over-reference rule
}

struct CodeBleuWeights {
    double ngram = 0.25;
    double weighted_ngram = 0.25;
    double ast = 0.25;
    double dataflow = 0.25;
};

struct CodeBleuResult {
    double score = 0;
    double ngram = 0;
    double weighted_ngram = 0;
    std::optional<double> ast_match;       // absent when a side failed to parse
    std::optional<double> dataflow_match;
    bool renormalized = false;
};

inline double keyword_weight_of(const std::string &tok, const std::set<std::string> &keywords, Language l,
                                double weight = 4.0) {
    if (l == Language::fortran) return keywords.contains(to_lower(tok)) ? weight : 1.0;
    return keywords.contains(tok) ? weight : 1.0;
}

inline CodeBleuResult codebleu(std::string_view hypothesis, std::string_view reference, Language language,
                               const CodeBleuWeights &w = {}, std::optional<std::set<std::string>> keywords = std::nullopt,
                               double keyword_weight = 4.0) {
    const double wsum = w.ngram + w.weighted_ngram + w.ast + w.dataflow;
    if (std::abs(wsum - 1.0) > 1e-9) throw Error(Errc::precondition, "CodeBLEU weights must sum to 1");
    const auto kw = keywords ? *keywords : metric_keywords(language);
    const auto h = word_tokens(hypothesis);
    const auto r = word_tokens(reference);
    CodeBleuResult res;
    res.ngram = bleu_from_stats(bleu_stats(h, {r}));
    res.weighted_ngram = bleu_from_stats(
        bleu_stats(h, {r}, 4, [&](const std::string &t) { return keyword_weight_of(t, kw, language, keyword_weight); }));
    const auto hp = syntax::parse(std::string(hypothesis), language);
    const auto rp = syntax::parse(std::string(reference), language);
    if (hp.failed() || rp.failed()) {
        res.renormalized = true;
        const double s = w.ngram + w.weighted_ngram;
        res.score = s > 0 ? (w.ngram * res.ngram + w.weighted_ngram * res.weighted_ngram) / s : 0.0;
        return res;
    }
    res.ast_match = 100.0 * ast_match_ratio(syntax_subtrees(hp.tree), syntax_subtrees(rp.tree));
    res.dataflow_match =
        100.0 * dataflow_match_ratio(normalize_edges(dataflow_edges(hp.tree, language)), normalize_edges(dataflow_edges(rp.tree, language)));
    res.score = w.ngram * res.ngram + w.weighted_ngram * res.weighted_ngram + w.ast * *res.ast_match +
                w.dataflow * *res.dataflow_match;
    return res;
}

// ---- corpus report ----------------------------------------------------------------

struct ScorePair {
    std::string id;
    std::string hypothesis;
    std::string reference;
};

struct PairScores {
    std::string id;
    double bleu = 0;
    CodeBleuResult codebleu;
    double chrf = 0;
    double rouge_l = 0;
};

struct MetricReport {
    std::vector<PairScores> pairs;
    double bleu = 0;           // pooled corpus BLEU
    double bleu_sentence = 0;  // mean sentence BLEU
    double codebleu = 0;
    double ngram = 0;
    double weighted_ngram = 0;
    std::optional<double> ast_match;
    std::optional<double> dataflow_match;
    double chrf = 0;
    double rouge_l = 0;
    std::size_t parse_failures = 0;
    std::optional<double> compile_accuracy;
};

inline MetricReport corpus_report(const std::vector<ScorePair> &pairs, Language language,
                                  const CodeBleuWeights &w = {}) {
    if (pairs.empty()) throw Error(Errc::precondition, "no pairs to score");
    MetricReport rep;
    BleuStats pooled(4);
    double ast_sum = 0, df_sum = 0;
    std::size_t ast_n = 0;
    for (const auto &p : pairs) {
        PairScores s;
        s.id = p.id;
        const auto h = word_tokens(p.hypothesis);
        const auto st = bleu_stats(h, {word_tokens(p.reference)});
        pooled += st;
        s.bleu = bleu_from_stats(st);
        s.codebleu = codebleu(p.hypothesis, p.reference, language, w);
        s.chrf = chrf(p.hypothesis, p.reference);
        s.rouge_l = rouge_l(p.hypothesis, p.reference);
        rep.bleu_sentence += s.bleu;
        rep.codebleu += s.codebleu.score;
        rep.ngram += s.codebleu.ngram;
        rep.weighted_ngram += s.codebleu.weighted_ngram;
        rep.chrf += s.chrf;
        rep.rouge_l += s.rouge_l;
        if (s.codebleu.ast_match) {
            ast_sum += *s.codebleu.ast_match;
            df_sum += *s.codebleu.dataflow_match;
            ++ast_n;
        } else {
            ++rep.parse_failures;
        }
        rep.pairs.push_back(std::move(s));
    }
    const double n = static_cast<double>(pairs.size());
    rep.bleu = bleu_from_stats(pooled);
    rep.bleu_sentence /= n;
    rep.codebleu /= n;
    rep.ngram /= n;
    rep.weighted_ngram /= n;
    rep.chrf /= n;
    rep.rouge_l /= n;
    if (ast_n > 0) {
        rep.ast_match = ast_sum / static_cast<double>(ast_n);
        rep.dataflow_match = df_sum / static_cast<double>(ast_n);
    }
    return rep;
}

inline nlohmann::json to_json(const CodeBleuResult &c) {
    nlohmann::json j{{"codebleu", c.score}, {"ngram", c.ngram}, {"weighted_ngram", c.weighted_ngram},
                     {"renormalized", c.renormalized}};
    j["ast_match"] = c.ast_match ? nlohmann::json(*c.ast_match) : nlohmann::json(nullptr);
    j["dataflow_match"] = c.dataflow_match ? nlohmann::json(*c.dataflow_match) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const MetricReport &r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto &p : r.pairs) {
        auto j = to_json(p.codebleu);
        j["id"] = p.id;
        j["bleu"] = p.bleu;
        j["chrf"] = p.chrf;
        j["rouge_l"] = p.rouge_l;
        pairs.push_back(std::move(j));
    }
    nlohmann::json agg{{"bleu", r.bleu},
                       {"bleu_sentence_mean", r.bleu_sentence},
                       {"codebleu", r.codebleu},
                       {"ngram", r.ngram},
                       {"weighted_ngram", r.weighted_ngram},
                       {"chrf", r.chrf},
                       {"rouge_l", r.rouge_l},
                       {"parse_failures", r.parse_failures}};
    agg["ast_match"] = r.ast_match ? nlohmann::json(*r.ast_match) : nlohmann::json(nullptr);
    agg["dataflow_match"] = r.dataflow_match ? nlohmann::json(*r.dataflow_match) : nlohmann::json(nullptr);
    if (r.compile_accuracy) agg["compile_accuracy"] = *r.compile_accuracy;
    return nlohmann::json{{"pairs", pairs}, {"aggregate", agg}};
}

} // namespace forge
