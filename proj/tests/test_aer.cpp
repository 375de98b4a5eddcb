#include <random>

#include "aer_golden.hpp"
#include "forge/aer.hpp"
#include "support.hpp"

using namespace forge;

TEST_CASE("declaration labels") {
    std::vector<std::string> corpus(20, "int index;\n");
    auto v = train_bpe(corpus, 256 + 7 + 40);
    auto d = extract_labels("int index;", Language::cpp, v, default_tagset());
    REQUIRE(d.doc.tokens.size() == 3);
    CHECK(d.labels == std::vector<int>{7, 1, 0});
}

TEST_CASE("golden label files") {
    const auto cases = test::golden_cases(FORGE_GOLDEN_DIR "/aer");
    REQUIRE(cases.size() >= 25);
    std::set<Language> langs;
    for (const auto &c : cases) {
        INFO(c.source.filename().string());
        langs.insert(c.language);
        const auto got = test::render_word_labels(read_file(c.source), c.language, test::shared_vocab(), default_tagset());
        CHECK(got == read_file(c.labels));
    }
    CHECK(langs.size() == 3);
}

TEST_CASE("labels align with tokens for every golden source") {
    for (const auto &c : test::golden_cases(FORGE_GOLDEN_DIR "/aer")) {
        const auto src = read_file(c.source);
        const auto d = extract_labels(src, c.language, test::shared_vocab(), default_tagset());
        REQUIRE(d.labels.size() == d.doc.tokens.size());
        // a continuation follows its own category, possibly across whitespace tokens
        const auto &v = test::shared_vocab();
        auto blank = [&](TokenId t) { return trim(v.token(t)).empty(); };
        for (std::size_t i = 0; i < d.labels.size(); ++i) {
            const int l = d.labels[i];
            if (l != 0 && l % 2 == 0) {
                std::size_t j = i;
                while (j > 0 && d.labels[j - 1] == 0 && blank(d.doc.tokens[j - 1])) --j;
                REQUIRE(j > 0);
                const int prev = d.labels[j - 1];
                CHECK((prev == l || prev == l - 1));
            }
        }
        // labels are a pure function of the input
        CHECK(extract_labels(src, c.language, test::shared_vocab(), default_tagset()).labels == d.labels);
    }
}

TEST_CASE("whitespace tokens are outside") {
    const auto &v = test::shared_vocab();
    const std::string src = "int    index ;\n\n";
    const auto d = extract_labels(src, Language::cpp, v, default_tagset());
    for (std::size_t i = 0; i < d.doc.tokens.size(); ++i) {
        const auto &piece = v.token(d.doc.tokens[i]);
        if (std::all_of(piece.begin(), piece.end(), [](char ch) { return is_space_char(static_cast<unsigned char>(ch)); })) {
            CHECK(d.labels[i] == 0);
        }
    }
}

TEST_CASE("parallel constructs under the extended tag set") {
    const std::string src = "__global__ void k(int *a) {\n    a[threadIdx.x + blockIdx.x * blockDim.x] = gridDim.x;\n}\n";
    const auto ext = extended_tagset();
    const auto d = test::render_word_labels(src, Language::cuda, test::shared_vocab(), ext);
    for (const char *w : {"threadIdx", "blockIdx", "blockDim", "gridDim"}) {
        CHECK(d.find(std::string(w) + "\tB-parallel_construct\n") != std::string::npos);
    }
    // the same source under the base set keeps them as identifiers
    const auto base = test::render_word_labels(src, Language::cuda, test::shared_vocab(), default_tagset());
    CHECK(base.find("threadIdx\tB-identifier\n") != std::string::npos);
    CHECK(base.find("parallel_construct") == std::string::npos);
    // and C++ never uses the CUDA-only rule
    const auto cpp = test::render_word_labels(src, Language::cpp, test::shared_vocab(), ext);
    CHECK(cpp.find("parallel_construct") == std::string::npos);
}

TEST_CASE("a broken tail keeps the labels of the intact head") {
    const std::string head = "int add(int a, int b) {\n    return a + b;\n}\n";
    const auto clean = extract_labels(head, Language::cpp, test::shared_vocab(), default_tagset());
    for (const char *tail : {"int f( {", "@@@ ???", "void g() { x = ; }"}) {
        const auto d = extract_labels(head + tail, Language::cpp, test::shared_vocab(), default_tagset());
        REQUIRE(d.labels.size() >= clean.labels.size());
        // the head ends on a statement boundary, so its tokens are unchanged
        CHECK(std::vector<int>(d.labels.begin(), d.labels.begin() + static_cast<long>(clean.labels.size())) ==
              clean.labels);
    }
}

TEST_CASE("unparseable input is rejected") {
    REQUIRE_ERRC(extract_labels("@@@ ??? @@@", Language::cpp, test::shared_vocab(), default_tagset()),
                 Errc::parse_failure);
    CHECK(extract_labels("", Language::cpp, test::shared_vocab(), default_tagset()).labels.empty());
}

TEST_CASE("tag and mapping files") {
    const auto t = default_tagset();
    CHECK(t.tags.size() == 8);
    CHECK(t.id_of("pointer_declarator") == 13);
    CHECK(parse_tagset(serialize_tagset(t)) == t);
    CHECK(extended_tagset().id_of("parallel_construct") == 17);
    REQUIRE_ERRC(parse_tagset("2 even\n"), Errc::schema);
    REQUIRE_ERRC(parse_tagset("1 a\n1 b\n"), Errc::schema);
    // a custom mapping can relabel a node kind
    const auto m = parse_mapping("constant number_literal\nprimitive_type primitive_type\n");
    std::vector<std::string> corpus(10, "int x = 5;\n");
    auto v = train_bpe(corpus, 256 + 7 + 30);
    auto d = extract_labels("int x = 5;", Language::cpp, v, t, m);
    CHECK(d.labels.front() == 7);
    CHECK(d.labels[d.labels.size() - 2] == 15);
}

TEST_CASE("record format") {
    const auto d = extract_labels("int x;", Language::cpp, test::shared_vocab(), default_tagset(), "doc-1");
    const auto j = to_json(d);
    CHECK(j.at("doc_id") == "doc-1");
    CHECK(j.at("language") == "cpp");
    CHECK(j.at("labels").size() == j.at("tokens").size());
}
