#pragma once

// Straightforward reference implementations the library is checked against.
// They favour obviousness over speed and share no code with include/forge.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forge/syntax/tree.hpp"

namespace oracle {

// ---- lexing ----------------------------------------------------------------

inline bool ident(unsigned char c) { return std::isalnum(c) || c == '_'; }
inline bool space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

/// Pre-tokens: leading whitespace glued to an identifier run, a non-ASCII
/// run, or one other byte.
inline std::vector<std::string> pretokens(const std::string &s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        std::string w;
        while (i < s.size() && space(static_cast<unsigned char>(s[i]))) w += s[i++];
        if (i < s.size()) {
            const auto c = static_cast<unsigned char>(s[i]);
            if (ident(c)) {
                while (i < s.size() && ident(static_cast<unsigned char>(s[i]))) w += s[i++];
            } else if (c >= 0x80) {
                while (i < s.size() && static_cast<unsigned char>(s[i]) >= 0x80) w += s[i++];
            } else {
                w += s[i++];
            }
        }
        out.push_back(w);
    }
    return out;
}

inline std::vector<std::string> words(const std::string &s) {
    std::vector<std::string> out;
    for (auto w : pretokens(s)) {
        std::size_t b = 0;
        while (b < w.size() && space(static_cast<unsigned char>(w[b]))) ++b;
        if (b < w.size()) out.push_back(w.substr(b));
    }
    return out;
}

// ---- BPE ---------------------------------------------------------------------

/// Recounts every adjacent pair after each merge and applies merges left to
/// right without overlap. A pair whose concatenation is already a token is
/// never merged.
inline std::vector<std::pair<std::string, std::string>> bpe_merges(const std::vector<std::string> &corpus,
                                                                   std::size_t budget) {
    std::map<std::string, long> freq;
    for (const auto &doc : corpus) {
        for (const auto &w : pretokens(doc)) ++freq[w];
    }
    std::vector<std::pair<std::vector<std::string>, long>> words;
    std::set<std::string> known;
    for (int b = 0; b < 256; ++b) known.insert(std::string(1, static_cast<char>(b)));
    for (const auto &[w, f] : freq) {
        std::vector<std::string> syms;
        for (char c : w) syms.emplace_back(1, c);
        words.emplace_back(syms, f);
    }
    std::vector<std::pair<std::string, std::string>> merges;
    std::set<std::pair<std::string, std::string>> banned;
    while (merges.size() < budget) {
        std::map<std::pair<std::string, std::string>, long> counts;
        for (const auto &[syms, f] : words) {
            for (std::size_t i = 0; i + 1 < syms.size(); ++i) counts[{syms[i], syms[i + 1]}] += f;
        }
        std::pair<std::string, std::string> best;
        long best_count = 0;
        for (const auto &[p, c] : counts) {  // map order is the lexicographic tie-break
            if (banned.count(p) || known.count(p.first + p.second)) continue;
            if (c > best_count) {
                best = p;
                best_count = c;
            }
        }
        if (best_count == 0) break;
        merges.push_back(best);
        known.insert(best.first + best.second);
        for (auto &[syms, f] : words) {
            std::vector<std::string> next;
            for (std::size_t i = 0; i < syms.size(); ++i) {
                if (i + 1 < syms.size() && syms[i] == best.first && syms[i + 1] == best.second) {
                    next.push_back(best.first + best.second);
                    ++i;
                } else {
                    next.push_back(syms[i]);
                }
            }
            syms = std::move(next);
        }
    }
    return merges;
}

// ---- text metrics --------------------------------------------------------------

inline std::vector<std::vector<std::string>> ngrams(const std::vector<std::string> &t, std::size_t n) {
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n));
    return out;
}

template <class T> std::size_t occurrences(const std::vector<T> &v, const T &x) {
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), x));
}

/// Sentence BLEU with one reference: geometric mean of four clipped
/// precisions (add-one from bigrams up) times the brevity penalty.
inline double bleu(const std::string &hyp, const std::string &ref) {
    const auto h = words(hyp);
    const auto r = words(ref);
    if (h.empty()) return 0.0;
    double log_p = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto hg = ngrams(h, n);
        const auto rg = ngrams(r, n);
        double clipped = 0;
        std::vector<std::vector<std::string>> seen;
        for (const auto &g : hg) {
            if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
            seen.push_back(g);
            clipped += static_cast<double>(std::min(occurrences(hg, g), occurrences(rg, g)));
        }
        double p;
        if (n == 1) {
            p = clipped / static_cast<double>(hg.size());
        } else {
            p = (clipped + 1) / (static_cast<double>(hg.size()) + 1);
        }
        if (p == 0) return 0.0;
        log_p += std::log(p) / 4.0;
    }
    const double c = static_cast<double>(h.size());
    const double rl = static_cast<double>(r.size());
    const double bp = c > rl ? 1.0 : std::exp(1 - rl / c);
    return 100.0 * bp * std::exp(log_p);
}

inline double chrf(const std::string &hyp, const std::string &ref, std::size_t max_n = 6, double beta = 2) {
    std::string h, r;
    for (char c : hyp) {
        if (!space(static_cast<unsigned char>(c))) h += c;
    }
    for (char c : ref) {
        if (!space(static_cast<unsigned char>(c))) r += c;
    }
    if (h == r) return 100.0;
    if (h.empty() || r.empty()) return 0.0;
    double ps = 0, rs = 0;
    int k = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        if (h.size() < n || r.size() < n) break;
        std::vector<std::string> hg, rg;
        for (std::size_t i = 0; i + n <= h.size(); ++i) hg.push_back(h.substr(i, n));
        for (std::size_t i = 0; i + n <= r.size(); ++i) rg.push_back(r.substr(i, n));
        // greedy one-to-one matching
        std::vector<bool> used(rg.size(), false);
        double m = 0;
        for (const auto &g : hg) {
            for (std::size_t j = 0; j < rg.size(); ++j) {
                if (!used[j] && rg[j] == g) {
                    used[j] = true;
                    ++m;
                    break;
                }
            }
        }
        ps += m / static_cast<double>(hg.size());
        rs += m / static_cast<double>(rg.size());
        ++k;
    }
    const double p = ps / k, rc = rs / k;
    if (p == 0 && rc == 0) return 0.0;
    return 100.0 * (1 + beta * beta) * p * rc / (beta * beta * p + rc);
}

inline std::size_t lcs(const std::vector<std::string> &a, const std::vector<std::string> &b, std::size_t i, std::size_t j,
                       std::map<std::pair<std::size_t, std::size_t>, std::size_t> &memo) {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t v = a[i] == b[j] ? 1 + lcs(a, b, i + 1, j + 1, memo)
                                 : std::max(lcs(a, b, i + 1, j, memo), lcs(a, b, i, j + 1, memo));
    memo[key] = v;
    return v;
}

inline double rouge_l(const std::string &hyp, const std::string &ref) {
    const auto h = words(hyp);
    const auto r = words(ref);
    if (h.empty() && r.empty()) return 100.0;
    if (h.empty() || r.empty()) return 0.0;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const double l = static_cast<double>(lcs(h, r, 0, 0, memo));
    if (l == 0) return 0.0;
    const double p = l / static_cast<double>(h.size());
    const double rc = l / static_cast<double>(r.size());
    return 200.0 * p * rc / (p + rc);
}

// ---- syntax match ----------------------------------------------------------------

inline std::string shape(const forge::syntax::Tree &t, forge::syntax::NodeId id) {
    const auto &n = t.nodes()[static_cast<std::size_t>(id)];
    std::string s = "(" + n.kind;
    for (auto c : n.children) {
        if (t.nodes()[static_cast<std::size_t>(c)].named) s += " " + shape(t, c);
    }
    return s + ")";
}

/// Shapes of all non-leaf nodes, found by scanning the node table.
inline std::vector<std::string> subtrees(const forge::syntax::Tree &t) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < t.nodes().size(); ++i) {
        if (!t.nodes()[i].children.empty()) out.push_back(shape(t, static_cast<forge::syntax::NodeId>(i)));
    }
    return out;
}

/// Fraction of reference items matched one-to-one by hypothesis items.
inline double multiset_match(const std::vector<std::string> &hyp, const std::vector<std::string> &ref) {
    if (ref.empty()) return hyp.empty() ? 1.0 : 0.0;
    std::vector<bool> used(hyp.size(), false);
    std::size_t m = 0;
    for (const auto &r : ref) {
        for (std::size_t i = 0; i < hyp.size(); ++i) {
            if (!used[i] && hyp[i] == r) {
                used[i] = true;
                ++m;
                break;
            }
        }
    }
    return static_cast<double>(m) / static_cast<double>(ref.size());
}

// ---- def-use -------------------------------------------------------------------------

struct Edge {
    std::string var;
    std::string relation;
    std::vector<std::string> sources;
    bool operator==(const Edge &) const = default;
};

/// One statement of a straight-line C function body.
struct Stmt {
    enum Kind { decl_init, assign, compound, incr, index_assign, decl, ret, call } kind;
    std::string target;
    std::string index;
    std::vector<std::string> rhs;
};

struct Program {
    std::vector<std::string> params;
    std::vector<Stmt> body;

    std::string render() const {
        auto expr = [](const std::vector<std::string> &v) {
            if (v.empty()) return std::string("1");
            static const char *ops[] = {" + ", " * ", " - "};
            std::string e = v[0];
            for (std::size_t i = 1; i < v.size(); ++i) e += ops[i % 3] + v[i];
            return e;
        };
        std::string s = "void f(";
        for (std::size_t i = 0; i < params.size(); ++i) s += (i ? ", int " : "int ") + params[i];
        s += ") {\n";
        for (const auto &st : body) {
            s += "    ";
            switch (st.kind) {
            case Stmt::decl_init: s += "int " + st.target + " = " + expr(st.rhs) + ";"; break;
            case Stmt::assign: s += st.target + " = " + expr(st.rhs) + ";"; break;
            case Stmt::compound: s += st.target + " += " + expr(st.rhs) + ";"; break;
            case Stmt::incr: s += st.target + "++;"; break;
            case Stmt::index_assign: s += st.target + "[" + st.index + "] = " + expr(st.rhs) + ";"; break;
            case Stmt::decl: s += "int " + st.target + ";"; break;
            case Stmt::ret: s += "return " + expr(st.rhs) + ";"; break;
            case Stmt::call: {
                s += "g(";
                for (std::size_t i = 0; i < st.rhs.size(); ++i) s += (i ? ", " : "") + st.rhs[i];
                s += ");";
                break;
            }
            }
            s += "\n";
        }
        return s + "}\n";
    }

    /// Every read is an edge to its latest definition (or to nothing); every
    /// write is computed from the variables read by the statement.
    std::vector<Edge> edges() const {
        std::set<std::string> defined(params.begin(), params.end());
        std::vector<Edge> out;
        auto use = [&](const std::string &v) {
            out.push_back({v, "comesFrom", defined.count(v) ? std::vector<std::string>{v} : std::vector<std::string>{}});
        };
        for (const auto &st : body) {
            switch (st.kind) {
            case Stmt::decl_init:
            case Stmt::assign:
                for (const auto &v : st.rhs) use(v);
                out.push_back({st.target, "computedFrom", st.rhs});
                defined.insert(st.target);
                break;
            case Stmt::compound: {
                for (const auto &v : st.rhs) use(v);
                use(st.target);
                std::vector<std::string> src{st.target};
                src.insert(src.end(), st.rhs.begin(), st.rhs.end());
                out.push_back({st.target, "computedFrom", src});
                defined.insert(st.target);
                break;
            }
            case Stmt::incr:
                use(st.target);
                out.push_back({st.target, "computedFrom", {st.target}});
                defined.insert(st.target);
                break;
            case Stmt::index_assign: {
                for (const auto &v : st.rhs) use(v);
                use(st.index);
                auto src = st.rhs;
                src.push_back(st.index);
                out.push_back({st.target, "computedFrom", src});
                defined.insert(st.target);
                break;
            }
            case Stmt::decl: defined.insert(st.target); break;
            case Stmt::ret:
            case Stmt::call:
                for (const auto &v : st.rhs) use(v);
                break;
            }
        }
        return out;
    }
};

/// Random program of at most ~50 tokens over a small variable pool.
template <class Rng> Program random_program(Rng &g) {
    static const std::vector<std::string> vars{"a", "b", "c", "d", "e"};
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(g() % n); };
    Program p;
    const auto np = pick(3);
    for (std::size_t i = 0; i < np; ++i) {
        const auto &v = vars[pick(vars.size())];
        if (std::find(p.params.begin(), p.params.end(), v) == p.params.end()) p.params.push_back(v);
    }
    const auto ns = 1 + pick(4);
    for (std::size_t i = 0; i < ns; ++i) {
        Stmt st{static_cast<Stmt::Kind>(pick(8)), vars[pick(vars.size())], vars[pick(vars.size())], {}};
        const auto nr = (st.kind == Stmt::incr || st.kind == Stmt::decl) ? 0 : pick(3) + (st.kind == Stmt::ret ? 1 : 0);
        for (std::size_t k = 0; k < nr; ++k) st.rhs.push_back(vars[pick(vars.size())]);
        if (st.kind == Stmt::index_assign && st.index == st.target) st.index = st.target == "a" ? "b" : "a";
        p.body.push_back(st);
    }
    return p;
}

} // namespace oracle
