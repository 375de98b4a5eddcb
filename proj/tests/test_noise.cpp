#include <random>

#include "forge/noise.hpp"
#include "support.hpp"

using namespace forge;

namespace {

NoiseConfig quiet() {
    NoiseConfig c;
    c.mask_ratio = c.drop_ratio = c.insert_ratio = 0;
    c.shuffle_window = 1;
    return c;
}

} // namespace

TEST_CASE("schedule examples") {
    NoiseConfig c;
    CHECK(schedule_ratio(0.25, 0, c) == 0.25);
    CHECK(schedule_ratio(0.25, 4, c) == Catch::Approx(0.35).margin(1e-15));
    CHECK(schedule_ratio(0.25, 100, c) == 0.5);
    REQUIRE_ERRC(schedule_ratio(0.25, -1, c), Errc::precondition);
}

TEST_CASE("schedule is exact, monotone and capped") {
    NoiseConfig c;
    for (double base : {0.0, 0.15, 0.25, 0.5}) {
        double prev = -1;
        for (int e = 0; e <= 100; ++e) {
            const double r = schedule_ratio(base, e, c);
            const double expect = std::min(base + static_cast<double>(e) * 0.025, 0.5);
            REQUIRE(r == expect);
            REQUIRE(r >= prev);
            REQUIRE(r <= c.max_ratio);
            prev = r;
        }
        CHECK(prev == 0.5);
    }
}

TEST_CASE("masking a chosen word") {
    std::vector<std::string> corpus(20, "int index;\n");
    auto v = train_bpe(corpus, 256 + 7 + 40);
    const auto doc = v.encode("int index", Language::cpp);
    const auto ex = mask_words(doc, v, {1});
    CHECK(ex.input == std::vector<TokenId>{doc.tokens[0], v.mask_id()});
    CHECK(ex.target == std::vector<TokenId>{v.pad_id(), doc.tokens[1]});
    CHECK(v.decode(std::vector<TokenId>{ex.target[1]}) == " index");
}

TEST_CASE("zero noise is the identity") {
    const auto &v = test::calibration_vocab();
    const auto doc = v.encode(test::calibration_text(), Language::cuda, "d");
    auto rng = example_rng(1, "d", 0);
    const auto m = corrupt_mlm(doc, v, quiet(), rng);
    CHECK(m.input == doc.tokens);
    CHECK(std::all_of(m.target.begin(), m.target.end(), [&](TokenId t) { return t == v.pad_id(); }));

    const auto d = corrupt_dae(doc, v, test::calibration_profiles(), quiet(), 0, rng);
    std::vector<TokenId> expect{v.language_token(Language::cuda)};
    expect.insert(expect.end(), doc.tokens.begin(), doc.tokens.end());
    CHECK(d.input == expect);
    CHECK(d.target == doc.tokens);
}

TEST_CASE("masking covers whole words and keeps targets") {
    const auto &v = test::shared_vocab();
    std::mt19937_64 g(5);
    NoiseConfig cfg;
    cfg.mask_ratio = 0.3;
    for (int i = 0; i < 200; ++i) {
        const auto src = test::random_code(g);
        const auto doc = v.encode(src, Language::cpp, "m" + std::to_string(i));
        auto rng = example_rng(9, doc.doc_id, 0);
        const auto ex = corrupt_mlm(doc, v, cfg, rng);
        REQUIRE(ex.input.size() == doc.tokens.size());
        for (const auto &[b, e] : doc.word_spans) {
            const bool first = ex.input[b] == v.mask_id();
            for (auto t = b; t < e; ++t) {
                REQUIRE((ex.input[t] == v.mask_id()) == first);
                REQUIRE(ex.target[t] == (first ? doc.tokens[t] : v.pad_id()));
            }
        }
    }
}

TEST_CASE("corruption is deterministic per seed, document and epoch") {
    const auto &v = test::calibration_vocab();
    const auto doc = v.encode(test::calibration_text(), Language::cuda, "doc");
    const auto profiles = test::calibration_profiles();
    NoiseConfig cfg;
    auto a = example_rng(3, "doc", 2);
    auto b = example_rng(3, "doc", 2);
    CHECK(corrupt_dae(doc, v, profiles, cfg, 2, a) == corrupt_dae(doc, v, profiles, cfg, 2, b));
    auto c = example_rng(3, "doc", 3);
    auto d = example_rng(3, "doc", 2);
    CHECK(corrupt_dae(doc, v, profiles, cfg, 2, c) != corrupt_dae(doc, v, profiles, cfg, 2, d));
    auto e = example_rng(3, "doc", 0);
    auto f = example_rng(3, "doc", 0);
    CHECK(corrupt_mlm(doc, v, cfg, e) == corrupt_mlm(doc, v, cfg, f));
}

TEST_CASE("targets are never corrupted") {
    const auto &v = test::calibration_vocab();
    const auto profiles = test::calibration_profiles();
    for (int s = 0; s < 50; ++s) {
        const auto doc = v.encode(test::cuda_samples()[static_cast<std::size_t>(s) % test::cuda_samples().size()],
                                  Language::cuda, "t" + std::to_string(s));
        auto rng = example_rng(static_cast<std::uint64_t>(s), doc.doc_id, s % 7);
        const auto ex = corrupt_dae(doc, v, profiles, NoiseConfig{}, s % 7, rng);
        CHECK(ex.target == doc.tokens);
        CHECK(ex.input.front() == v.language_token(Language::cuda));
    }
}

TEST_CASE("shuffling stays inside the window") {
    const auto &v = test::calibration_vocab();
    const auto doc = v.encode(test::calibration_text(), Language::cuda, "s");
    REQUIRE(doc.tokens.size() == doc.word_count());
    for (int w : {2, 3, 5}) {
        auto cfg = quiet();
        cfg.shuffle_window = w;
        for (int s = 0; s < 30; ++s) {
            auto rng = example_rng(static_cast<std::uint64_t>(s), "s", 0);
            const auto ex = corrupt_dae(doc, v, test::calibration_profiles(), cfg, 0, rng);
            REQUIRE(ex.input.size() == doc.tokens.size() + 1);
            // every word is a distinct token except the repeated keyword
            for (std::size_t out = 1; out < ex.input.size(); ++out) {
                const auto tok = ex.input[out];
                bool near = false;
                for (std::size_t in = 0; in < doc.tokens.size(); ++in) {
                    const auto dist = in > out - 1 ? in - (out - 1) : (out - 1) - in;
                    if (doc.tokens[in] == tok && dist < static_cast<std::size_t>(w)) near = true;
                }
                REQUIRE(near);
            }
        }
    }
}

TEST_CASE("inserted words come from the other language") {
    const auto &v = test::calibration_vocab();
    const auto profiles = test::calibration_profiles();
    auto cfg = quiet();
    cfg.insert_ratio = 0.3;
    for (int s = 0; s < 40; ++s) {
        const auto &src = test::cpp_samples()[static_cast<std::size_t>(s) % test::cpp_samples().size()];
        const auto doc = v.encode(src, Language::cpp, "c" + std::to_string(s));
        auto rng = example_rng(static_cast<std::uint64_t>(s), doc.doc_id, 0);
        NoiseTrace tr;
        const auto ex = corrupt_dae(doc, v, profiles, cfg, 0, rng, &tr);
        CHECK(tr.inserted_words == tr.inserted.size());
        const auto target_words = word_tokens(v.decode(ex.target));
        for (const auto &w : tr.inserted) {
            CHECK(profiles.at(Language::cuda).freq.contains(w));
            CHECK_FALSE(profiles.at(Language::cpp).freq.contains(w));
            CHECK(std::find(target_words.begin(), target_words.end(), w) == target_words.end());
        }
        CHECK(ex.input.size() >= doc.tokens.size() + 1);
    }
}

TEST_CASE("keywords drop more often") {
    const auto c = test::calibrate(2000, 77);
    REQUIRE(c.single_token_words);
    CHECK(c.keyword_drop > c.other_drop);
    CHECK(c.keyword_drop / c.other_drop == Catch::Approx(3.0).epsilon(0.10));
    CHECK(c.dropped == Catch::Approx(0.25).margin(0.015));
    CHECK(c.inserted == Catch::Approx(0.15).margin(0.015));
    CHECK(c.mlm_masked == Catch::Approx(0.15).margin(0.015));
    CHECK(c.dae_masked == Catch::Approx(0.15).margin(0.015));
}

TEST_CASE("drop probabilities saturate when keywords dominate") {
    // heavy keyword weight: keyword words are always dropped, the rest fill the budget
    NoiseConfig cfg = quiet();
    cfg.drop_ratio = 0.5;
    cfg.keyword_weight = 50;
    const auto c = test::calibrate(500, 5, cfg);
    CHECK(c.keyword_drop == 1.0);
    CHECK(c.dropped == Catch::Approx(0.5).margin(0.02));
    CHECK(c.other_drop == Catch::Approx((50.0 - 20.0) / 80.0).margin(0.03));
}

TEST_CASE("configuration checks") {
    const auto &v = test::calibration_vocab();
    const auto doc = v.encode("int x;", Language::fortran, "f");
    auto rng = example_rng(0, "f", 0);
    REQUIRE_ERRC(corrupt_dae(doc, v, test::calibration_profiles(), NoiseConfig{}, 0, rng), Errc::missing_profile);
    std::map<Language, LanguageProfile> only;
    only[Language::fortran] = LanguageProfile{Language::fortran, {}, {}, 0};
    REQUIRE_ERRC(corrupt_dae(doc, v, only, NoiseConfig{}, 0, rng), Errc::missing_profile);
    NoiseConfig bad;
    bad.mask_ratio = 1.5;
    REQUIRE_ERRC(bad.validate(), Errc::precondition);
    bad = NoiseConfig{};
    bad.keyword_weight = 0.5;
    REQUIRE_ERRC(bad.validate(), Errc::precondition);
}

TEST_CASE("configuration and example records") {
    NoiseConfig c;
    c.seed = 42;
    c.shuffle_window = 4;
    nlohmann::json j = c;
    const auto back = j.get<NoiseConfig>();
    CHECK(back.seed == 42);
    CHECK(back.shuffle_window == 4);
    CHECK(back.drop_ratio == 0.25);
    TrainingExample e;
    e.objective = Objective::bt;
    e.src_lang = Language::cuda;
    e.input = {1, 2};
    e.target = {3};
    e.epoch = 7;
    const auto ej = to_json(e);
    CHECK(ej.at("objective") == "BT");
    CHECK(training_example_from_json(ej) == e);
}
