#include "support.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "forge/corpus.hpp"
#include "forge/process.hpp"

using namespace forge;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

ProcessResult forge_run(std::vector<std::string> args) {
    args.insert(args.begin(), FORGE_CLI);
    return run_process(args, 120);
}

fs::path write_corpus(const fs::path &dir) {
    fs::create_directories(dir);
    int i = 0;
    for (const auto &s : test::cuda_samples()) write_file(dir / ("k" + std::to_string(i++) + ".cu"), s);
    i = 0;
    for (const auto &s : test::cpp_samples()) write_file(dir / ("c" + std::to_string(i++) + ".cpp"), s);
    return dir;
}

json manifest_of(const fs::path &out) { return json::parse(read_file(out.string() + ".manifest.json")); }

} // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(forge_run({}).exit_code == 2);
    CHECK(forge_run({"frobnicate"}).exit_code == 2);
    CHECK(forge_run({"tok"}).exit_code == 2);
    CHECK(forge_run({"tok", "train", "--out", "x"}).exit_code == 2);
    CHECK(forge_run({"--help"}).exit_code == 0);
}

TEST_CASE("tok train is digest-stable across reruns") {
    const auto dir = test::scratch_dir("cli_tok");
    const auto corpus = write_corpus(dir / "corpus");
    const auto a = (dir / "a.vocab").string();
    const auto b = (dir / "b.vocab").string();
    REQUIRE(forge_run({"--seed", "7", "tok", "train", "--vocab-size", "400", "--out", a, corpus.string()}).exit_code == 0);
    REQUIRE(forge_run({"--seed", "7", "tok", "train", "--vocab-size", "400", "--out", b, corpus.string()}).exit_code == 0);
    CHECK(read_file(a) == read_file(b));

    const auto ma = manifest_of(a);
    const auto mb = manifest_of(b);
    CHECK(ma["inputs"] == mb["inputs"]);
    CHECK(ma["outputs"][a] == mb["outputs"][b]);
    CHECK(ma["seed"] == 7);
    CHECK(ma["outputs"][a].get<std::string>().size() == 64);

    const auto enc = (dir / "enc.jsonl").string();
    REQUIRE(forge_run({"tok", "encode", "--vocab", a, "--lang", "cuda", "--out", enc, (corpus / "k0.cu").string()}).exit_code == 0);
    const auto rec = json::parse(read_file(enc));
    const auto vocab = Vocabulary::parse(read_file(a));
    CHECK(vocab.decode(rec["tokens"].get<std::vector<TokenId>>()) == test::cuda_samples()[0]);
}

TEST_CASE("score on identical pairs reports 100 everywhere") {
    const auto dir = test::scratch_dir("cli_score");
    std::string pairs;
    int i = 0;
    for (const auto &s : test::cuda_samples()) {
        pairs += json{{"id", std::to_string(i++)}, {"hypothesis", s}, {"reference", s}, {"language", "cuda"}}.dump() + "\n";
    }
    write_file(dir / "pairs.jsonl", pairs);
    const auto out = (dir / "report.json").string();
    const auto r = forge_run({"score", "--lang", "cuda", (dir / "pairs.jsonl").string(), "--out", out});
    REQUIRE(r.exit_code == 0);
    const auto agg = json::parse(read_file(out))["aggregate"];
    for (const char *k : {"bleu", "codebleu", "chrf", "rouge_l", "ast_match", "dataflow_match"}) {
        INFO(k);
        CHECK(agg[k].get<double>() == Catch::Approx(100.0));
    }

    write_file(dir / "bad.jsonl", "{\"id\": \"1\", \"hypothesis\": \n");
    CHECK(forge_run({"score", "--lang", "cuda", (dir / "bad.jsonl").string(), "--out", out}).exit_code == 3);
    write_file(dir / "mixed.jsonl", json{{"id", "1"}, {"hypothesis", "x"}, {"reference", "x"}, {"language", "fortran"}}.dump() + "\n");
    CHECK(forge_run({"score", "--lang", "cuda", (dir / "mixed.jsonl").string(), "--out", out}).exit_code == 3);
}

TEST_CASE("corpus filter and balance") {
    const auto dir = test::scratch_dir("cli_corpus");
    const auto corpus = write_corpus(dir / "corpus");
    const auto kept = (dir / "kept.jsonl").string();
    REQUIRE(forge_run({"corpus", "filter", "--lang", "cuda", corpus.string(), "--out", kept}).exit_code == 0);
    const auto docs = load_corpus(kept);
    CHECK(docs.size() == test::cuda_samples().size());
    for (const auto &d : docs) CHECK(d.language == Language::cuda);

    const auto oa = (dir / "a.jsonl").string();
    const auto ob = (dir / "b.jsonl").string();
    const auto cpp_only = (dir / "cpp.jsonl").string();
    REQUIRE(forge_run({"corpus", "filter", "--lang", "cpp", corpus.string(), "--out", cpp_only}).exit_code == 0);
    REQUIRE(forge_run({"--seed", "3", "corpus", "balance", kept, cpp_only, "--out-a", oa, "--out-b", ob}).exit_code == 0);
    CHECK(load_corpus(oa).size() == load_corpus(ob).size());
    const auto first = read_file(oa) + read_file(ob);
    REQUIRE(forge_run({"--seed", "3", "corpus", "balance", kept, cpp_only, "--out-a", oa, "--out-b", ob}).exit_code == 0);
    CHECK(read_file(oa) + read_file(ob) == first);

    const auto stats = (dir / "stats.json").string();
    REQUIRE(forge_run({"corpus", "stats", corpus.string(), "--out", stats}).exit_code == 0);
    CHECK(json::parse(read_file(stats)).is_object());
}

TEST_CASE("quality filter without a labeler is an external error") {
    const auto dir = test::scratch_dir("cli_quality");
    const auto corpus = write_corpus(dir / "corpus");
    const auto r = forge_run({"corpus", "quality", corpus.string(), "--cache", (dir / "cache.jsonl").string(), "--out",
                              (dir / "q.jsonl").string()});
    CHECK(r.exit_code == 4);
}

TEST_CASE("train with the identity stub and an explicit manifest path") {
    const auto dir = test::scratch_dir("cli_train");
    const auto corpus = write_corpus(dir / "corpus");
    const auto vocab = (dir / "v.vocab").string();
    REQUIRE(forge_run({"tok", "train", "--vocab-size", "400", "--out", vocab, corpus.string()}).exit_code == 0);
    fs::create_directories(dir / "profiles");
    for (const char *l : {"cpp", "cuda"}) {
        REQUIRE(forge_run({"profile", "build", "--lang", l, "--out", (dir / "profiles" / (std::string(l) + ".profile")).string(),
                           corpus.string()})
                    .exit_code == 0);
    }
    write_file(dir / "plan.json", R"({"seed": 5, "batch_size": 4, "phases": [{"kind": "DAE+BT", "epochs": 2, "pairs": [["cpp", "cuda"]]}]})");
    const auto out = (dir / "report.json").string();
    const auto manifest = (dir / "run.json").string();
    const auto r = forge_run({"--manifest", manifest, "train", "--plan", (dir / "plan.json").string(), "--vocab", vocab, "--corpus",
                              "cpp=" + corpus.string(), "--corpus", "cuda=" + corpus.string(), "--profiles", (dir / "profiles").string(), "--out", out});
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(read_file(out))["epochs"].size() == 2);
    CHECK(fs::exists(manifest));

    CHECK(forge_run({"train", "--plan", (dir / "plan.json").string(), "--vocab", vocab, "--corpus", "cpp" + corpus.string()})
              .exit_code == 2);
    CHECK(forge_run({"train", "--plan", (dir / "plan.json").string(), "--vocab", vocab, "--corpus", "cpp=" + corpus.string(),
                     "--translator", std::string("external:") + "/nonexistent/translator"})
              .exit_code == 4);
    write_file(dir / "bad_plan.json", R"({"phases": []})");
    CHECK(forge_run({"train", "--plan", (dir / "bad_plan.json").string(), "--vocab", vocab, "--corpus", "cpp=" + corpus.string()})
              .exit_code == 3);
}

TEST_CASE("compile reports a missing compiler as an external error") {
    const auto dir = test::scratch_dir("cli_compile");
    write_file(dir / "a.jsonl", json{{"doc_id", "a"}, {"language", "cuda"}, {"text", "int x;\n"}}.dump() + "\n");
    write_file(dir / "adapter.json", R"({"name": "ghost", "language": "cuda", "command": ["/nonexistent/nvcc", "{src}"], "error_pattern": "(\\d+): error"})");
    const auto r = forge_run({"compile", "--lang", "cuda", "--adapter", (dir / "adapter.json").string(), (dir / "a.jsonl").string()});
    CHECK(r.exit_code == 4);
}
