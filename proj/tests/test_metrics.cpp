#include <cmath>
#include <random>

#include "forge/metrics.hpp"
#include "forge/syntax/parse.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace forge;

namespace {

/// Drops, duplicates and renames words of a sample to get a near miss.
std::string mutate(const std::string &src, std::mt19937_64 &g) {
    std::string out;
    for (const auto &w : segment_words(src)) {
        const auto piece = src.substr(w.begin, w.end - w.begin);
        switch (g() % 10) {
        case 0: break;
        case 1: out += piece + piece; break;
        case 2: out += std::string(src, w.begin, w.core_begin - w.begin) + "tmp"; break;
        default: out += piece; break;
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> random_pairs(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::vector<std::pair<std::string, std::string>> out;
    while (out.size() < n) {
        if (g() % 4 == 0) {
            out.emplace_back(test::random_snippet(g), test::random_snippet(g));
        } else {
            const auto ref = test::random_code(g);
            out.emplace_back(mutate(ref, g), ref);
        }
    }
    return out;
}

std::vector<oracle::Edge> as_oracle(const std::vector<DataflowEdge> &edges) {
    std::vector<oracle::Edge> out;
    for (const auto &e : edges) out.push_back({e.var, e.relation, e.sources});
    return out;
}

} // namespace

TEST_CASE("hand-computed examples") {
    CHECK(bleu("the cat", "the cat sat") == Catch::Approx(100.0 * std::exp(1.0 - 3.0 / 2.0)).epsilon(1e-12));
    CHECK(bleu("int x ;", "int x ;") == 100.0);
    CHECK(bleu("a b c", "d e f") < 1.0);
    CHECK(bleu("a b c", "d e f", 4, false) == 0.0);
    CHECK(bleu("", "a") == 0.0);
    REQUIRE_ERRC(bleu("a", std::vector<std::string>{}), Errc::empty_reference);

    // orders 1..3 have n-grams; precisions 2/3, 1/2, 0
    CHECK(chrf("abc", "abd") == Catch::Approx(100.0 * (2.0 / 3 + 1.0 / 2 + 0.0) / 3).epsilon(1e-12));
    CHECK(chrf("abc", "abc") == 100.0);
    CHECK(chrf("", "abc") == 0.0);
    CHECK(chrf("a b", "ab") == 100.0);

    CHECK(rouge_l("the cat", "the cat sat") == Catch::Approx(80.0).epsilon(1e-12));
    CHECK(rouge_l("x y", "x y") == 100.0);
    CHECK(rouge_l("a b", "c d") == 0.0);
}

TEST_CASE("closest reference length prefers the shorter on ties") {
    const auto s = bleu_stats({"a", "b", "c"}, {{"a", "b"}, {"a", "b", "c", "d"}});
    CHECK(s.ref_len == 2);
    const auto t = bleu_stats({"a", "b", "c"}, {{"a", "b", "c", "d", "e"}, {"a"}});
    CHECK(t.ref_len == 1);
}

TEST_CASE("text metrics agree with the oracles") {
    const auto pairs = random_pairs(120, 2024);
    for (const auto &[h, r] : pairs) {
        INFO(h << "\n---\n" << r);
        REQUIRE(bleu(h, r) == Catch::Approx(oracle::bleu(h, r)).margin(1e-6));
        REQUIRE(chrf(h, r) == Catch::Approx(oracle::chrf(h, r)).margin(1e-6));
        REQUIRE(rouge_l(h, r) == Catch::Approx(oracle::rouge_l(h, r)).margin(1e-6));
    }
}

TEST_CASE("syntax subtrees agree with the oracle") {
    std::mt19937_64 g(8);
    std::size_t checked = 0;
    for (int i = 0; i < 200; ++i) {
        const auto src = i % 2 ? oracle::random_program(g).render() : mutate(test::random_code(g), g);
        const auto p = syntax::parse(src, i % 3 == 0 ? Language::cuda : Language::cpp);
        auto got = syntax_subtrees(p.tree);
        auto want = oracle::subtrees(p.tree);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        REQUIRE(got == want);
        ++checked;
    }
    for (const auto &[h, r] : random_pairs(80, 9)) {
        const auto hp = syntax::parse(h, Language::cpp);
        const auto rp = syntax::parse(r, Language::cpp);
        const auto hs = syntax_subtrees(hp.tree), rs = syntax_subtrees(rp.tree);
        REQUIRE(ast_match_ratio(hs, rs) == oracle::multiset_match(hs, rs));
    }
    CHECK(checked == 200);
    CHECK(ast_match_ratio({}, {}) == 1.0);
    CHECK(ast_match_ratio({"(a)"}, {}) == 0.0);
}

TEST_CASE("def-use edges agree with the oracle") {
    std::mt19937_64 g(21);
    for (int i = 0; i < 300; ++i) {
        const auto prog = oracle::random_program(g);
        const auto src = prog.render();
        INFO(src);
        const auto p = syntax::parse(src, Language::cpp);
        REQUIRE_FALSE(p.failed());
        REQUIRE(as_oracle(dataflow_edges(p.tree)) == prog.edges());
    }
}

TEST_CASE("def-use on a worked example") {
    const auto p = syntax::parse("void f(int a) {\n  int b = a + 1;\n  b += a;\n  c = b;\n}\n", Language::cpp);
    const auto edges = normalize_edges(dataflow_edges(p.tree));
    CHECK(edges == std::vector<std::string>{"var_0 comesFrom [var_0]", "var_1 computedFrom [var_0]",
                                            "var_0 comesFrom [var_0]", "var_1 comesFrom [var_1]",
                                            "var_1 computedFrom [var_1,var_0]", "var_1 comesFrom [var_1]",
                                            "var_2 computedFrom [var_1]"});
}

TEST_CASE("identical code scores 100 everywhere") {
    std::mt19937_64 g(4);
    std::vector<std::string> snippets;
    for (const auto &s : test::cpp_samples()) snippets.push_back(s);
    for (const auto &s : test::cuda_samples()) snippets.push_back(s);
    while (snippets.size() < 100) snippets.push_back(oracle::random_program(g).render());
    for (const auto &s : snippets) {
        INFO(s);
        const auto c = codebleu(s, s, Language::cuda);
        REQUIRE(c.ast_match.has_value());
        CHECK(c.score == Catch::Approx(100.0).margin(1e-9));
        CHECK(*c.ast_match == 100.0);
        CHECK(*c.dataflow_match == 100.0);
        CHECK(bleu(s, s) == Catch::Approx(100.0).margin(1e-9));
        CHECK(chrf(s, s) == 100.0);
        CHECK(rouge_l(s, s) == 100.0);
    }
    for (const auto &s : test::fortran_samples()) {
        const auto c = codebleu(s, s, Language::fortran);
        REQUIRE(c.ast_match.has_value());
        CHECK(c.score == Catch::Approx(100.0).margin(1e-9));
    }
}

TEST_CASE("renaming an identifier keeps the tree") {
    const std::string ref = test::cuda_samples()[0];
    std::string hyp = ref;
    for (std::size_t at; (at = hyp.find(" n)")) != std::string::npos;) hyp.replace(at + 1, 1, "len");
    REQUIRE(hyp != ref);
    const auto c = codebleu(hyp, ref, Language::cuda);
    CHECK(*c.ast_match == 100.0);
    CHECK(c.weighted_ngram > c.ngram);
    CHECK(c.score < 100.0);
    const auto hp = syntax::parse(hyp, Language::cuda), rp = syntax::parse(ref, Language::cuda);
    CHECK(oracle::multiset_match(oracle::subtrees(hp.tree), oracle::subtrees(rp.tree)) == 1.0);
    CHECK(*c.dataflow_match == 100.0);
}

TEST_CASE("codebleu is the weighted component sum") {
    for (const auto &[h, r] : random_pairs(60, 77)) {
        const auto c = codebleu(h, r, Language::cpp);
        double sum;
        if (c.ast_match) {
            sum = 0.25 * (c.ngram + c.weighted_ngram + *c.ast_match + *c.dataflow_match);
        } else {
            CHECK(c.renormalized);
            sum = 0.5 * (c.ngram + c.weighted_ngram);
        }
        CHECK(std::abs(c.score - sum) <= 1e-9);
        CHECK(c.score >= 0.0);
        CHECK(c.score <= 100.0 + 1e-9);
        CHECK(c.ngram == Catch::Approx(oracle::bleu(h, r)).margin(1e-6));
    }
    CodeBleuWeights w{0.4, 0.1, 0.3, 0.3};
    REQUIRE_ERRC(codebleu("a", "a", Language::cpp, w), Errc::precondition);
}

TEST_CASE("unparseable code drops the structural components") {
    const auto c = codebleu("@@@ ??? @@@", "int x;", Language::cpp);
    CHECK(c.renormalized);
    CHECK_FALSE(c.ast_match.has_value());
    CHECK(c.score == Catch::Approx(0.5 * (c.ngram + c.weighted_ngram)).margin(1e-12));
    const auto j = to_json(c);
    CHECK(j.at("ast_match").is_null());
}

TEST_CASE("corpus report") {
    const std::vector<ScorePair> same{{"a", "int x = 1;", "int x = 1;"}, {"b", "return y;", "return y;"}};
    const auto r = corpus_report(same, Language::cpp);
    CHECK(r.bleu == Catch::Approx(100.0));
    CHECK(r.codebleu == Catch::Approx(100.0));
    CHECK(r.chrf == 100.0);
    CHECK(r.rouge_l == 100.0);

    const std::vector<ScorePair> one{{"x", "int y = a + b;", "int x = a + b;"}};
    const auto s = corpus_report(one, Language::cpp);
    CHECK(s.bleu == Catch::Approx(s.pairs[0].bleu).margin(1e-12));
    CHECK(s.codebleu == Catch::Approx(s.pairs[0].codebleu.score).margin(1e-12));
    CHECK(s.bleu_sentence == s.pairs[0].bleu);

    // pooled BLEU equals BLEU of the summed n-gram statistics
    const auto pairs = random_pairs(30, 3);
    std::vector<ScorePair> sp;
    BleuStats pooled(4);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        sp.push_back({std::to_string(i), pairs[i].first, pairs[i].second});
        pooled += bleu_stats(word_tokens(pairs[i].first), {word_tokens(pairs[i].second)});
    }
    const auto many = corpus_report(sp, Language::cpp);
    CHECK(many.bleu == Catch::Approx(bleu_from_stats(pooled)).margin(1e-9));
    CHECK(to_json(many).at("pairs").size() == 30);
    REQUIRE_ERRC(corpus_report({}, Language::cpp), Errc::precondition);
}
