#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "forge/error.hpp"
#include "forge/keywords.hpp"
#include "forge/lang_profiles.hpp"
#include "forge/noise.hpp"
#include "forge/language.hpp"
#include "forge/tokenizer.hpp"

namespace forge::test {

inline const std::vector<std::string> &cpp_samples() {
    static const std::vector<std::string> s{
        "int add(int a, int b) {\n    return a + b;\n}\n",
        "void scale(float *x, float k, int n) {\n    for (int i = 0; i < n; ++i) {\n        x[i] = x[i] * k;\n    }\n}\n",
        "#include <vector>\nstd::vector<int> squares(int n) {\n    std::vector<int> out;\n    for (int i = 0; i < n; i++) out.push_back(i * i);\n    return out;\n}\n",
        "double mean(const double *v, int n) {\n    double s = 0.0;\n    for (int i = 0; i < n; ++i) s += v[i];\n    return s / n;\n}\n",
        "struct Point { int x; int y; };\nint dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }\n",
        "void saxpy(int n, float a, const float *x, float *y) {\n    for (int i = 0; i < n; i++)\n        y[i] = a * x[i] + y[i];\n}\n",
        "bool is_even(int v) {\n    if (v % 2 == 0) return true;\n    return false;\n}\n",
        "void fill(int *a, int n, int v) {\n    int i = 0;\n    while (i < n) {\n        a[i] = v;\n        i++;\n    }\n}\n",
    };
    return s;
}

inline const std::vector<std::string> &cuda_samples() {
    static const std::vector<std::string> s{
        "__global__ void add(int *a, int *b, int *c, int n) {\n    int i = blockIdx.x * blockDim.x + threadIdx.x;\n    if (i < n) c[i] = a[i] + b[i];\n}\n",
        "__global__ void scale(float *x, float k, int n) {\n    int i = threadIdx.x + blockIdx.x * blockDim.x;\n    if (i < n) {\n        x[i] = x[i] * k;\n    }\n}\n",
        "__global__ void saxpy(int n, float a, const float *x, float *y) {\n    int i = blockIdx.x * blockDim.x + threadIdx.x;\n    if (i < n) y[i] = a * x[i] + y[i];\n}\n",
        "__device__ float square(float v) { return v * v; }\n__global__ void sq(float *x, int n) {\n    int i = blockIdx.x * blockDim.x + threadIdx.x;\n    if (i < n) x[i] = square(x[i]);\n}\n",
        "__global__ void fill(int *a, int n, int v) {\n    int stride = gridDim.x * blockDim.x;\n    for (int i = blockIdx.x * blockDim.x + threadIdx.x; i < n; i += stride) a[i] = v;\n}\n",
        "__global__ void reduce(float *in, float *out) {\n    __shared__ float buf[256];\n    int t = threadIdx.x;\n    buf[t] = in[blockIdx.x * 256 + t];\n    __syncthreads();\n    if (t == 0) out[blockIdx.x] = buf[0];\n}\n",
    };
    return s;
}

inline const std::vector<std::string> &fortran_samples() {
    static const std::vector<std::string> s{
        "subroutine scale(x, k, n)\n  integer, intent(in) :: n\n  real, intent(inout) :: x(n)\n  real, intent(in) :: k\n  integer :: i\n  do i = 1, n\n    x(i) = x(i) * k\n  end do\nend subroutine scale\n",
        "function add(a, b) result(c)\n  integer, intent(in) :: a, b\n  integer :: c\n  c = a + b\nend function add\n",
        "program hello\n  implicit none\n  integer :: i\n  do i = 1, 3\n    print *, 'hello', i\n  end do\nend program hello\n",
        "subroutine saxpy(n, a, x, y)\n  integer :: n, i\n  real :: a, x(n), y(n)\n  do i = 1, n\n    y(i) = a * x(i) + y(i)\n  end do\nend subroutine saxpy\n",
    };
    return s;
}

/// Random printable-ish source text: identifiers, numbers, punctuation,
/// mixed whitespace, and occasionally UTF-8 and control bytes.
inline std::string random_snippet(std::mt19937_64 &g) {
    static const std::vector<std::string> words{
        "int",      "float",   "double", "for",  "if",       "return", "while",     "__global__", "threadIdx",
        "blockIdx", "x",       "y",      "i",    "n",        "sum",    "data",      "index",      "std::vector",
        "0",        "1",       "42",     "3.5f", "\"str\"",  "'c'",    "subroutine", "end",       "do",
        "é",        "λx",      "数据",   "\t",   "\r\n",     "//c",    "/* b */",   "->",         "<<<",
    };
    static const std::string punct = "{}()[];,.+-*/=<>!&|^%~?:#";
    std::uniform_int_distribution<int> len(1, 40);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::uniform_int_distribution<std::size_t> ppick(0, punct.size() - 1);
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_int_distribution<int> byte(1, 255);
    std::string s;
    const int n = len(g);
    for (int i = 0; i < n; ++i) {
        switch (kind(g)) {
        case 0: case 1: case 2: case 3: s += words[pick(g)]; break;
        case 4: case 5: s += punct[ppick(g)]; break;
        case 6: case 7: s += ' '; break;
        case 8: s += '\n'; break;
        default: s += static_cast<char>(byte(g)); break;
        }
    }
    return s;
}

/// Random program-like snippet that every grammar-free metric can score.
inline std::string random_code(std::mt19937_64 &g) {
    const auto &pool = std::uniform_int_distribution<int>(0, 2)(g) == 0 ? cuda_samples() : cpp_samples();
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(g)];
}

inline std::vector<std::string> training_corpus() {
    std::vector<std::string> c;
    for (const auto &s : cpp_samples()) c.push_back(s);
    for (const auto &s : cuda_samples()) c.push_back(s);
    for (const auto &s : fortran_samples()) c.push_back(s);
    return c;
}

inline const Vocabulary &shared_vocab() {
    static const Vocabulary v = [] {
        const auto c = training_corpus();
        return train_bpe(c, 900);
    }();
    return v;
}

inline std::filesystem::path scratch_dir(const std::string &name) {
    auto p = std::filesystem::temp_directory_path() / ("forge_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

// ---- noise calibration ------------------------------------------------------------

/// 100 words: 20 `__global__` keywords and 80 distinct identifiers, every
/// word a single token under calibration_vocab().
inline std::string calibration_text() {
    std::string s;
    for (int i = 0; i < 100; ++i) {
        if (i) s += ' ';
        s += i % 5 == 0 ? std::string("__global__") : "v" + std::to_string(i);
    }
    return s;
}

inline const Vocabulary &calibration_vocab() {
    static const Vocabulary v = [] {
        std::vector<std::string> c(3, calibration_text());
        for (const auto &x : cpp_samples()) c.push_back(x);
        for (const auto &x : cuda_samples()) c.push_back(x);
        return train_bpe(c, 1200);
    }();
    return v;
}

inline std::map<Language, LanguageProfile> calibration_profiles() {
    std::map<Language, LanguageProfile> m;
    m[Language::cuda] = build_profile_from_text(cuda_samples(), Language::cuda, default_keywords(Language::cuda));
    m[Language::cpp] = build_profile_from_text(cpp_samples(), Language::cpp, default_keywords(Language::cpp));
    return m;
}

struct Calibration {
    double mlm_masked = 0;   // masked tokens / tokens, MLM
    double dae_masked = 0;   // masked tokens / surviving tokens, DAE
    double dropped = 0;      // dropped words / words
    double inserted = 0;     // inserted words / original words
    double keyword_drop = 0; // drop rate of keyword words
    double other_drop = 0;   // drop rate of the other words
    bool single_token_words = false;
};

inline Calibration calibrate(int trials, std::uint64_t seed, const NoiseConfig &cfg = {}) {
    const auto &v = calibration_vocab();
    const auto doc = v.encode(calibration_text(), Language::cuda, "calibration");
    const auto profiles = calibration_profiles();
    Calibration c;
    c.single_token_words = doc.tokens.size() == doc.word_count();
    double mlm = 0, dae = 0, drop = 0, ins = 0, kw = 0, other = 0, kw_n = 0, other_n = 0;
    for (int t = 0; t < trials; ++t) {
        auto rng = example_rng(seed, "trial-" + std::to_string(t), 0);
        const auto m = corrupt_mlm(doc, v, cfg, rng);
        std::size_t masked = 0;
        for (auto id : m.input) masked += id == v.mask_id();
        mlm += static_cast<double>(masked) / static_cast<double>(doc.tokens.size());

        NoiseTrace tr;
        corrupt_dae(doc, v, profiles, cfg, 0, rng, &tr);
        dae += tr.surviving_tokens ? static_cast<double>(tr.masked_tokens) / static_cast<double>(tr.surviving_tokens) : 0.0;
        std::size_t d = 0;
        for (std::size_t w = 0; w < tr.dropped.size(); ++w) {
            d += tr.dropped[w];
            if (w % 5 == 0) {
                kw += tr.dropped[w];
                ++kw_n;
            } else {
                other += tr.dropped[w];
                ++other_n;
            }
        }
        drop += static_cast<double>(d) / static_cast<double>(tr.original_words);
        ins += static_cast<double>(tr.inserted_words) / static_cast<double>(tr.original_words);
    }
    c.mlm_masked = mlm / trials;
    c.dae_masked = dae / trials;
    c.dropped = drop / trials;
    c.inserted = ins / trials;
    c.keyword_drop = kw / kw_n;
    c.other_drop = other / other_n;
    return c;
}

} // namespace forge::test
