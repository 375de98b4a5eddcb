#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "forge/corpus.hpp"
#include "forge/error.hpp"
#include "forge/language.hpp"
#include "forge/process.hpp"
#include "forge/text.hpp"

namespace forge {

// ---- adapters -------------------------------------------------------------------

/// A compiler invocation template. `command` may use {src} (the source file)
/// and {out} (a scratch output path). `wrapper` is the translation unit the
/// source is substituted into at {source}.
struct CompilerAdapter {
    std::string name;
    Language language = Language::cuda;
    std::vector<std::string> command;
    std::string error_pattern;
    int line_group = 1;
    int column_group = 2;  // 0 when the compiler reports no column
    int severity_group = 3;
    int message_group = 4;
    double timeout_s = 60;
    std::string extension = ".cu";
    std::string wrapper = "{source}";
    bool strip_launch_config = false;  // rewrite `k<<<g, b>>>(...)` to `k(...)`
    std::string env;                   // variable overriding command[0]

    std::string executable() const {
        if (!env.empty()) {
            if (const char *v = std::getenv(env.c_str()); v != nullptr && *v != '\0') return v;
        }
        return command.empty() ? std::string() : command.front();
    }
    bool available() const { return !command.empty() && executable_exists(executable()); }
};

inline nlohmann::json to_json(const CompilerAdapter &a) {
    return nlohmann::json{{"name", a.name},
                          {"language", std::string(to_string(a.language))},
                          {"command", a.command},
                          {"error_pattern", a.error_pattern},
                          {"groups",
                           {{"line", a.line_group},
                            {"column", a.column_group},
                            {"severity", a.severity_group},
                            {"message", a.message_group}}},
                          {"timeout_s", a.timeout_s},
                          {"extension", a.extension},
                          {"wrapper", a.wrapper},
                          {"strip_launch_config", a.strip_launch_config},
                          {"env", a.env}};
}

inline CompilerAdapter adapter_from_json(const nlohmann::json &j) {
    try {
        CompilerAdapter a;
        a.language = parse_language(j.at("language").get<std::string>());
        a.command = j.at("command").get<std::vector<std::string>>();
        a.error_pattern = j.at("error_pattern").get<std::string>();
        a.name = j.value("name", a.command.empty() ? std::string() : a.command.front());
        a.timeout_s = j.value("timeout_s", 60.0);
        a.extension = j.value("extension", a.language == Language::fortran ? ".f90" : a.language == Language::cuda ? ".cu" : ".cpp");
        a.wrapper = j.value("wrapper", std::string("{source}"));
        a.strip_launch_config = j.value("strip_launch_config", false);
        a.env = j.value("env", std::string());
        if (j.contains("groups")) {
            const auto &g = j["groups"];
            a.line_group = g.value("line", 1);
            a.column_group = g.value("column", 0);
            a.severity_group = g.value("severity", 0);
            a.message_group = g.value("message", 0);
        }
        if (a.command.empty()) throw Error(Errc::schema, "adapter command is empty");
        if (a.timeout_s <= 0) throw Error(Errc::schema, "adapter timeout_s must be positive");
        std::regex(a.error_pattern);  // reject bad patterns up front
        return a;
    } catch (const nlohmann::json::exception &e) {
        throw Error(Errc::schema, std::string("adapter config: ") + e.what());
    } catch (const std::regex_error &e) {
        throw Error(Errc::schema, std::string("adapter error_pattern: ") + e.what());
    }
}

inline constexpr std::string_view gcc_error_pattern =
    R"((?:^|\n)[^\n:]*:(\d+):(\d+): (error|warning|fatal error): ([^\n]*))";

/// Just enough of the CUDA runtime surface for a host compiler to
/// syntax-check kernels.
inline constexpr std::string_view cuda_shim_header = R"(#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <cstdint>
#include <algorithm>
#define __global__
#define __device__
#define __host__
#define __shared__ static
#define __constant__ static
#define __managed__
#define __restrict__
#define __forceinline__ inline
#define __noinline__
#define __launch_bounds__(...)
struct uint3 { unsigned x, y, z; };
struct dim3 { unsigned x, y, z; dim3(unsigned a = 1, unsigned b = 1, unsigned c = 1) : x(a), y(b), z(c) {} };
struct float2 { float x, y; };
struct float3 { float x, y, z; };
struct float4 { float x, y, z, w; };
struct int2 { int x, y; };
struct int3 { int x, y, z; };
struct int4 { int x, y, z, w; };
struct double2 { double x, y; };
inline float2 make_float2(float x, float y) { return {x, y}; }
inline float3 make_float3(float x, float y, float z) { return {x, y, z}; }
inline float4 make_float4(float x, float y, float z, float w) { return {x, y, z, w}; }
inline int2 make_int2(int x, int y) { return {x, y}; }
static uint3 threadIdx, blockIdx;
static dim3 blockDim, gridDim;
static const int warpSize = 32;
inline void __syncthreads() {}
inline int __syncthreads_count(int p) { return p; }
inline void __syncwarp(unsigned = 0xffffffffu) {}
inline void __threadfence() {}
template <class T> T atomicAdd(T *a, T v) { T o = *a; *a += v; return o; }
template <class T> T atomicSub(T *a, T v) { T o = *a; *a -= v; return o; }
template <class T> T atomicMax(T *a, T v) { T o = *a; if (v > o) *a = v; return o; }
template <class T> T atomicMin(T *a, T v) { T o = *a; if (v < o) *a = v; return o; }
template <class T> T atomicExch(T *a, T v) { T o = *a; *a = v; return o; }
template <class T> T atomicCAS(T *a, T c, T v) { T o = *a; if (o == c) *a = v; return o; }
template <class T> T __ldg(const T *p) { return *p; }
template <class T> T __shfl_down_sync(unsigned, T v, int, int = 32) { return v; }
template <class T> T __shfl_xor_sync(unsigned, T v, int, int = 32) { return v; }
template <class T> T __shfl_sync(unsigned, T v, int, int = 32) { return v; }
inline float __expf(float x) { return std::exp(x); }
inline float __logf(float x) { return std::log(x); }
inline float __fdividef(float a, float b) { return a / b; }
inline float rsqrtf(float x) { return 1.0f / std::sqrt(x); }
inline double rsqrt(double x) { return 1.0 / std::sqrt(x); }
inline float saturatef(float x) { return x < 0 ? 0 : x > 1 ? 1 : x; }
inline int __popc(unsigned x) { return __builtin_popcount(x); }
inline int __clz(int x) { return __builtin_clz(static_cast<unsigned>(x)); }
inline int __ffs(int x) { return __builtin_ffs(x); }
inline int min(int a, int b) { return a < b ? a : b; }
inline int max(int a, int b) { return a > b ? a : b; }
enum cudaError_t { cudaSuccess = 0, cudaErrorUnknown = 1 };
enum cudaMemcpyKind { cudaMemcpyHostToHost, cudaMemcpyHostToDevice, cudaMemcpyDeviceToHost, cudaMemcpyDeviceToDevice, cudaMemcpyDefault };
typedef void *cudaStream_t;
typedef void *cudaEvent_t;
template <class T> cudaError_t cudaMalloc(T **p, size_t n) { *p = static_cast<T *>(std::malloc(n)); return cudaSuccess; }
template <class T> cudaError_t cudaMallocManaged(T **p, size_t n) { *p = static_cast<T *>(std::malloc(n)); return cudaSuccess; }
inline cudaError_t cudaFree(void *p) { std::free(p); return cudaSuccess; }
inline cudaError_t cudaMemcpy(void *d, const void *s, size_t n, cudaMemcpyKind) { std::memcpy(d, s, n); return cudaSuccess; }
inline cudaError_t cudaMemset(void *d, int v, size_t n) { std::memset(d, v, n); return cudaSuccess; }
inline cudaError_t cudaDeviceSynchronize() { return cudaSuccess; }
inline cudaError_t cudaGetLastError() { return cudaSuccess; }
inline cudaError_t cudaPeekAtLastError() { return cudaSuccess; }
inline const char *cudaGetErrorString(cudaError_t) { return ""; }
inline cudaError_t cudaEventCreate(cudaEvent_t *) { return cudaSuccess; }
inline cudaError_t cudaEventRecord(cudaEvent_t, cudaStream_t = nullptr) { return cudaSuccess; }
inline cudaError_t cudaEventSynchronize(cudaEvent_t) { return cudaSuccess; }
inline cudaError_t cudaEventElapsedTime(float *ms, cudaEvent_t, cudaEvent_t) { *ms = 0; return cudaSuccess; }
inline cudaError_t cudaEventDestroy(cudaEvent_t) { return cudaSuccess; }
)";

inline CompilerAdapter nvcc_adapter() {
    CompilerAdapter a;
    a.name = "nvcc";
    a.language = Language::cuda;
    a.command = {"nvcc", "-std=c++17", "-c", "{src}", "-o", "{out}"};
    a.error_pattern = R"((?:^|\n)[^\n(]*\((\d+)\): (error|warning): ([^\n]*))";
    a.line_group = 1;
    a.column_group = 0;
    a.severity_group = 2;
    a.message_group = 3;
    a.extension = ".cu";
    a.env = "FORGE_NVCC";
    return a;
}

inline CompilerAdapter gxx_adapter() {
    CompilerAdapter a;
    a.name = "g++";
    a.language = Language::cpp;
    a.command = {"g++", "-std=c++17", "-fsyntax-only", "-x", "c++", "{src}"};
    a.error_pattern = std::string(gcc_error_pattern);
    a.extension = ".cpp";
    a.env = "FORGE_GXX";
    return a;
}

/// CUDA checked by the host C++ compiler against the shim header.
inline CompilerAdapter cuda_gxx_shim_adapter() {
    auto a = gxx_adapter();
    a.name = "cuda-gxx-shim";
    a.language = Language::cuda;
    a.extension = ".cu";
    a.wrapper = std::string(cuda_shim_header) + "#line 1 \"kernel.cu\"\n{source}";
    a.strip_launch_config = true;
    return a;
}

inline CompilerAdapter gfortran_adapter() {
    CompilerAdapter a;
    a.name = "gfortran";
    a.language = Language::fortran;
    a.command = {"gfortran", "-ffree-form", "-fsyntax-only", "{src}"};
    a.error_pattern = R"((?:^|\n)[^\n:]*:(\d+):(\d+):[\s\S]*?\n(Error|Warning|Fatal Error): ([^\n]*))";
    a.extension = ".f90";
    a.env = "FORGE_GFORTRAN";
    return a;
}

inline std::vector<CompilerAdapter> builtin_adapters() {
    return {nvcc_adapter(), cuda_gxx_shim_adapter(), gxx_adapter(), gfortran_adapter()};
}

inline CompilerAdapter builtin_adapter(std::string_view name) {
    for (auto &a : builtin_adapters()) {
        if (a.name == name) return a;
    }
    throw Error(Errc::usage, "unknown compiler adapter '" + std::string(name) + "'");
}

/// The first available adapter for a language; CUDA falls back to the shim
/// when no CUDA toolchain is installed.
inline CompilerAdapter default_adapter(Language l) {
    std::optional<CompilerAdapter> first;
    for (auto &a : builtin_adapters()) {
        if (a.language != l) continue;
        if (a.available()) return a;
        if (!first) first = a;
    }
    return *first;
}

// ---- compiling ------------------------------------------------------------------

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string severity;  // "error" or "warning"
    std::string message;

    bool is_error() const { return severity.find("rror") != std::string::npos; }
};

enum class CompileStatus { ok, error };

struct CompileResult {
    std::string doc_id;
    CompileStatus status = CompileStatus::ok;
    std::vector<Diagnostic> diagnostics;
    std::string compiler;  // "CUDA", "C++" or "Fortran"
    double elapsed_s = 0;

    bool ok() const noexcept { return status == CompileStatus::ok; }
};

inline std::string compiler_tag(Language l) {
    switch (l) {
    case Language::cuda: return "CUDA";
    case Language::cpp: return "C++";
    case Language::fortran: return "Fortran";
    }
    return "?";
}

inline std::vector<Diagnostic> parse_diagnostics(const CompilerAdapter &a, const std::string &output) {
    std::vector<Diagnostic> out;
    const std::regex re(a.error_pattern);
    for (auto it = std::sregex_iterator(output.begin(), output.end(), re); it != std::sregex_iterator(); ++it) {
        const auto &m = *it;
        auto group = [&](int g) { return g > 0 && static_cast<std::size_t>(g) < m.size() ? m[static_cast<std::size_t>(g)].str() : std::string(); };
        Diagnostic d;
        const auto line = group(a.line_group);
        const auto col = group(a.column_group);
        d.line = line.empty() ? 0 : std::stoi(line);
        d.column = col.empty() ? 0 : std::stoi(col);
        d.severity = to_lower(group(a.severity_group));
        if (d.severity.empty()) d.severity = "error";
        d.message = group(a.message_group);
        out.push_back(std::move(d));
    }
    return out;
}

/// `name<<<grid, block>>>(args)` becomes `name(args)`; newlines inside the
/// launch configuration are kept so line numbers stay put.
inline std::string strip_launch_configs(std::string_view src) {
    std::string out;
    std::size_t i = 0;
    while (i < src.size()) {
        const auto open = src.find("<<<", i);
        if (open == std::string_view::npos) break;
        const auto close = src.find(">>>", open + 3);
        if (close == std::string_view::npos) break;
        out.append(src.substr(i, open - i));
        for (auto k = open; k < close + 3; ++k) {
            if (src[k] == '\n') out.push_back('\n');
        }
        i = close + 3;
    }
    out.append(src.substr(i));
    return out;
}

namespace detail {

inline std::string substitute(std::string s, std::string_view key, std::string_view value) {
    for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
        s.replace(pos, key.size(), value);
    }
    return s;
}

class ScratchDir {
  public:
    ScratchDir() {
        auto tmpl = (std::filesystem::temp_directory_path() / "forge-cc-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) throw Error(Errc::io, "cannot create scratch directory");
        path_ = tmpl;
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir &) = delete;
    ScratchDir &operator=(const ScratchDir &) = delete;
    const std::filesystem::path &path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
};

} // namespace detail

/// Compiles one source with the adapter. Compiler diagnostics never throw;
/// a compiler that cannot be started does (CompilerMissing), as does one
/// that runs past the adapter's timeout (Timeout).
inline CompileResult compile(std::string_view source, const CompilerAdapter &adapter, std::string doc_id = {}) {
    detail::ScratchDir dir;
    const auto src_path = dir.path() / ("input" + adapter.extension);
    const auto out_path = dir.path() / "out.o";
    const std::string body = adapter.strip_launch_config ? strip_launch_configs(source) : std::string(source);
    write_file(src_path, detail::substitute(adapter.wrapper, "{source}", body));

    std::vector<std::string> argv;
    for (const auto &arg : adapter.command) {
        argv.push_back(detail::substitute(detail::substitute(arg, "{src}", src_path.string()), "{out}", out_path.string()));
    }
    argv.front() = adapter.executable();
    const auto run = run_process(argv, adapter.timeout_s, {"LC_ALL=C", "LANG=C"});

    CompileResult r;
    r.doc_id = std::move(doc_id);
    r.compiler = compiler_tag(adapter.language);
    r.elapsed_s = run.elapsed_s;
    r.diagnostics = parse_diagnostics(adapter, run.output);
    const bool has_error = std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [](const Diagnostic &d) { return d.is_error(); });
    if (run.exit_code != 0 && !has_error) {
        r.diagnostics.push_back({0, 0, "error", "compiler exited with status " + std::to_string(run.exit_code) + ": " + std::string(trim(run.output))});
    }
    r.status = (run.exit_code != 0 || has_error) ? CompileStatus::error : CompileStatus::ok;
    return r;
}

inline nlohmann::json to_json(const CompileResult &r) {
    auto diags = nlohmann::json::array();
    for (const auto &d : r.diagnostics) {
        diags.push_back({{"line", d.line}, {"column", d.column}, {"severity", d.severity}, {"message", d.message}});
    }
    return nlohmann::json{{"doc_id", r.doc_id},
                          {"status", r.ok() ? "ok" : "error"},
                          {"compiler", r.compiler},
                          {"diagnostics", diags},
                          {"elapsed_s", r.elapsed_s}};
}

// ---- lexical helpers --------------------------------------------------------------

/// Marks the bytes that are code, as opposed to comments and string or
/// character literals.
inline std::vector<bool> code_mask(std::string_view s, Language l) {
    std::vector<bool> code(s.size(), true);
    std::size_t i = 0;
    auto mark = [&](std::size_t from, std::size_t to) {
        for (auto k = from; k < to && k < s.size(); ++k) code[k] = false;
    };
    while (i < s.size()) {
        const char c = s[i];
        if (l == Language::fortran) {
            if (c == '!') {
                auto e = s.find('\n', i);
                if (e == std::string_view::npos) e = s.size();
                mark(i, e);
                i = e;
                continue;
            }
            if (c == '\'' || c == '"') {
                auto k = i + 1;
                while (k < s.size() && s[k] != '\n') {
                    if (s[k] == c) {
                        if (k + 1 < s.size() && s[k + 1] == c) {
                            k += 2;
                            continue;
                        }
                        break;
                    }
                    ++k;
                }
                mark(i, k + 1);
                i = k + 1;
                continue;
            }
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            auto e = s.find('\n', i);
            if (e == std::string_view::npos) e = s.size();
            mark(i, e);
            i = e;
        } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            auto e = s.find("*/", i + 2);
            e = e == std::string_view::npos ? s.size() : e + 2;
            mark(i, e);
            i = e;
        } else if (c == '"' || c == '\'') {
            auto k = i + 1;
            while (k < s.size() && s[k] != c && s[k] != '\n') k += s[k] == '\\' ? 2 : 1;
            mark(i, k + 1);
            i = k + 1;
        } else {
            ++i;
        }
    }
    return code;
}

/// Closers still owed after scanning, innermost first. Stray closers are
/// ignored.
inline std::string missing_closers(std::string_view s, Language l) {
    const auto code = code_mask(s, l);
    std::string stack;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!code[i]) continue;
        const char c = s[i];
        if (c == '{' || c == '(' || c == '[') {
            stack.push_back(c);
        } else if (c == '}' || c == ')' || c == ']') {
            const char want = c == '}' ? '{' : c == ')' ? '(' : '[';
            if (!stack.empty() && stack.back() == want) stack.pop_back();
        }
    }
    std::string out;
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) out.push_back(*it == '{' ? '}' : *it == '(' ? ')' : ']');
    return out;
}

/// Whether each delimiter pair occurs equally often in code.
inline bool delimiters_balanced(std::string_view s, Language l) {
    const auto code = code_mask(s, l);
    int br = 0, pa = 0, sq = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!code[i]) continue;
        switch (s[i]) {
        case '{': ++br; break;
        case '}': --br; break;
        case '(': ++pa; break;
        case ')': --pa; break;
        case '[': ++sq; break;
        case ']': --sq; break;
        default: break;
        }
    }
    return br == 0 && pa == 0 && sq == 0;
}

struct Occurrence {
    std::size_t begin;
    std::size_t end;
};

/// Code occurrences of identifier `name` as a whole word.
inline std::vector<Occurrence> identifier_occurrences(std::string_view s, std::string_view name, Language l) {
    const auto code = code_mask(s, l);
    std::vector<Occurrence> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!code[i] || !is_ident_char(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        auto j = i;
        while (j < s.size() && code[j] && is_ident_char(static_cast<unsigned char>(s[j]))) ++j;
        if (s.substr(i, j - i) == name) out.push_back({i, j});
        i = j;
    }
    return out;
}

/// Top-level items of C-family source: preprocessor lines, and runs that end
/// at a `;` or at the `}` closing the outermost brace.
inline std::vector<Occurrence> top_level_items(std::string_view s) {
    const auto code = code_mask(s, Language::cpp);
    std::vector<Occurrence> items;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (is_space_char(static_cast<unsigned char>(s[i])) || !code[i])) ++i;
        if (i >= s.size()) break;
        const auto start = i;
        if (s[i] == '#') {
            auto e = s.find('\n', i);
            while (e != std::string_view::npos && e > 0 && s[e - 1] == '\\') e = s.find('\n', e + 1);
            if (e == std::string_view::npos) e = s.size();
            items.push_back({start, e});
            i = e;
            continue;
        }
        int depth = 0;
        int parens = 0;
        for (; i < s.size(); ++i) {
            if (!code[i]) continue;
            const char c = s[i];
            if (c == '(') ++parens;
            else if (c == ')') --parens;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0 && parens <= 0) {
                    ++i;
                    break;
                }
            } else if (c == ';' && depth == 0 && parens <= 0) {
                ++i;
                break;
            }
        }
        items.push_back({start, i});
    }
    return items;
}

// ---- classification and repair ----------------------------------------------------

enum class ErrorCategory { undefined_generic_T, missing_variable_init, missing_braces, wrong_function_call, nontrivial };

inline constexpr std::array<ErrorCategory, 5> all_error_categories{
    ErrorCategory::undefined_generic_T, ErrorCategory::missing_variable_init, ErrorCategory::missing_braces,
    ErrorCategory::wrong_function_call, ErrorCategory::nontrivial};

constexpr std::string_view to_string(ErrorCategory c) noexcept {
    switch (c) {
    case ErrorCategory::undefined_generic_T: return "undefined_generic_T";
    case ErrorCategory::missing_variable_init: return "missing_variable_init";
    case ErrorCategory::missing_braces: return "missing_braces";
    case ErrorCategory::wrong_function_call: return "wrong_function_call";
    case ErrorCategory::nontrivial: return "nontrivial";
    }
    return "?";
}

constexpr bool is_repairable(ErrorCategory c) noexcept {
    return c == ErrorCategory::undefined_generic_T || c == ErrorCategory::missing_variable_init ||
           c == ErrorCategory::missing_braces;
}

struct ErrorClass {
    ErrorCategory category = ErrorCategory::nontrivial;
    std::string symbol;  // the undefined identifier, where one is involved
};

/// Identifiers reported as undeclared, in diagnostic order, across the
/// wording of nvcc, gcc, clang and gfortran.
inline std::vector<std::string> undefined_identifiers(const CompileResult &r) {
    static const std::vector<std::regex> patterns{
        std::regex(R"re(identifier "(\w+)" is undefined)re"),
        std::regex(R"('(\w+)' was not declared in this scope)"),
        std::regex(R"('(\w+)' has not been declared)"),
        std::regex(R"('(\w+)' does not name a type)"),
        std::regex(R"('(\w+)' is not a type)"),
        std::regex(R"(use of undeclared identifier '(\w+)')"),
        std::regex(R"(unknown type name '(\w+)')"),
        std::regex(R"(Symbol '(\w+)' at \(\d+\) has no IMPLICIT type)"),
    };
    std::vector<std::string> out;
    for (const auto &d : r.diagnostics) {
        if (!d.is_error()) continue;
        for (const auto &re : patterns) {
            std::smatch m;
            if (std::regex_search(d.message, m, re)) {
                if (std::find(out.begin(), out.end(), m[1].str()) == out.end()) out.push_back(m[1].str());
                break;
            }
        }
    }
    return out;
}

namespace detail {

inline std::string_view prev_code_token(std::string_view s, std::size_t pos) {
    while (pos > 0 && is_space_char(static_cast<unsigned char>(s[pos - 1]))) --pos;
    if (pos == 0) return {};
    auto b = pos - 1;
    if (s[b] == '=' && b > 0 && (s[b - 1] == '<' || s[b - 1] == '>')) return s.substr(b - 1, 2);
    return s.substr(b, 1);
}

inline std::string_view next_code_token(std::string_view s, std::size_t pos) {
    while (pos < s.size() && is_space_char(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos >= s.size()) return {};
    if (pos + 1 < s.size() && s[pos + 1] == '=' && (s[pos] == '<' || s[pos] == '>')) return s.substr(pos, 2);
    if (s[pos] == '(' ) return s.substr(pos, 1);
    return s.substr(pos, 1);
}

inline bool relational(std::string_view t) {
    if (t == "<" || t == ">" || t == "<=" || t == ">=") return true;
    return false;
}

/// `name` appears as a loop bound, comparison operand or array extent.
inline bool used_as_bound(std::string_view src, std::string_view name, Language l) {
    for (const auto &o : identifier_occurrences(src, name, l)) {
        const auto before = prev_code_token(src, o.begin);
        const auto after = next_code_token(src, o.end);
        if (relational(before) || relational(after)) return true;
        if (before == "[" && after == "]") return true;
        if (l == Language::fortran && before == ",") {
            // `do i = 1, n`
            auto line_start = src.rfind('\n', o.begin);
            line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
            const auto line = to_lower(trim(src.substr(line_start, o.begin - line_start)));
            if (line.rfind("do ", 0) == 0) return true;
        }
    }
    return false;
}

inline bool used_as_callee(std::string_view src, std::string_view name, Language l) {
    for (const auto &o : identifier_occurrences(src, name, l)) {
        if (next_code_token(src, o.end) == "(") return true;
    }
    return false;
}

} // namespace detail

/// Rule cascade over a failed compilation; the first matching rule wins.
inline ErrorClass classify_error(const CompileResult &result, std::string_view source, Language l) {
    if (result.ok()) throw Error(Errc::not_an_error, "compilation succeeded; nothing to classify");
    const auto undefined = undefined_identifiers(result);
    for (const auto &u : undefined) {
        if (u == "T") return {ErrorCategory::undefined_generic_T, u};
    }
    for (const auto &u : undefined) {
        if (!detail::used_as_callee(source, u, l) && detail::used_as_bound(source, u, l)) {
            return {ErrorCategory::missing_variable_init, u};
        }
    }
    if (!delimiters_balanced(source, l)) return {ErrorCategory::missing_braces, {}};
    for (const auto &d : result.diagnostics) {
        const auto &m = d.message;
        if (m.find("expected '}'") != std::string::npos || m.find(R"(expected a "}")") != std::string::npos) {
            return {ErrorCategory::missing_braces, {}};
        }
    }
    for (const auto &d : result.diagnostics) {
        const auto &m = d.message;
        if (m.find("no matching function") != std::string::npos ||
            m.find("no instance of overloaded function") != std::string::npos ||
            m.find("too many arguments") != std::string::npos || m.find("too few arguments") != std::string::npos) {
            return {ErrorCategory::wrong_function_call, {}};
        }
    }
    for (const auto &u : undefined) {
        if (detail::used_as_callee(source, u, l)) return {ErrorCategory::wrong_function_call, u};
    }
    return {ErrorCategory::nontrivial, undefined.empty() ? std::string() : undefined.front()};
}

namespace detail {

inline bool starts_with_template(std::string_view item) {
    return item.substr(0, 8) == "template" && (item.size() == 8 || !is_ident_char(static_cast<unsigned char>(item[8])));
}

/// Offsets of the parameter list parentheses of the function defined by
/// `item` (the group right before its body).
inline std::optional<std::pair<std::size_t, std::size_t>> parameter_list(std::string_view s, Occurrence item) {
    const auto code = code_mask(s, Language::cpp);
    int parens = 0;
    std::size_t body = std::string_view::npos;
    for (auto i = item.begin; i < item.end; ++i) {
        if (!code[i]) continue;
        if (s[i] == '(') ++parens;
        else if (s[i] == ')') --parens;
        else if (s[i] == '{' && parens == 0) {
            body = i;
            break;
        }
    }
    if (body == std::string_view::npos) return std::nullopt;
    auto close = body;
    while (close > item.begin && (!code[close - 1] || s[close - 1] != ')')) --close;
    if (close == item.begin) return std::nullopt;
    --close;
    int depth = 0;
    for (auto i = close + 1; i-- > item.begin;) {
        if (!code[i]) continue;
        if (s[i] == ')') ++depth;
        else if (s[i] == '(' && --depth == 0) return std::make_pair(i, close);
    }
    return std::nullopt;
}

inline std::string repair_generic_t(std::string src) {
    const auto items = top_level_items(src);
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
        const std::string_view item = std::string_view(src).substr(it->begin, it->end - it->begin);
        if (item.empty() || item.front() == '#' || starts_with_template(item)) continue;
        if (identifier_occurrences(item, "T", Language::cpp).empty()) continue;
        src.insert(it->begin, "template <typename T>\n");
    }
    return src;
}

inline std::string repair_missing_param(std::string src, std::string_view name) {
    const auto items = top_level_items(src);
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
        const std::string_view item = std::string_view(src).substr(it->begin, it->end - it->begin);
        if (item.empty() || item.front() == '#') continue;
        if (identifier_occurrences(item, name, Language::cpp).empty()) continue;
        const auto params = parameter_list(src, *it);
        if (!params) continue;
        const auto inside = std::string_view(src).substr(params->first + 1, params->second - params->first - 1);
        if (!identifier_occurrences(inside, name, Language::cpp).empty()) continue;  // already a parameter
        const auto t = trim(inside);
        std::string decl = "int " + std::string(name);
        if (t.empty() || t == "void") {
            src.replace(params->first + 1, inside.size(), decl);
        } else {
            src.insert(params->second, ", " + decl);
        }
    }
    return src;
}

inline std::string repair_fortran_missing_param(std::string src, std::string_view name) {
    // Append `name` to the dummy arguments of each procedure that uses it
    // and declare it as an integer right after the header line.
    static const std::regex header(
        R"((^|\n)([ \t]*)((?:(?:pure|elemental|recursive|integer|real|logical)[ \t]+)*(?:subroutine|function)[ \t]+\w+)[ \t]*(\(([^)\n]*)\))?[^\n]*)",
        std::regex::icase);
    static const std::regex end_re(R"(\n[ \t]*end[ \t]*(subroutine|function)\b)", std::regex::icase);
    const auto lname = to_lower(name);
    std::smatch m;
    std::size_t pos = 0;
    while (std::regex_search(src.cbegin() + static_cast<std::ptrdiff_t>(pos), src.cend(), m, header)) {
        const auto head_begin = pos + static_cast<std::size_t>(m.position(0)) + m[1].length();
        const auto head_end = pos + static_cast<std::size_t>(m.position(0) + m.length(0));
        std::smatch e;
        std::size_t body_end = src.size();
        if (std::regex_search(src.cbegin() + static_cast<std::ptrdiff_t>(head_end), src.cend(), e, end_re)) {
            body_end = head_end + static_cast<std::size_t>(e.position(0));
        }
        const auto body = std::string_view(src).substr(head_end, body_end - head_end);
        bool present = false;
        for (const auto &w : word_tokens(to_lower(m[5].str()))) present = present || w == lname;
        bool used = false;
        for (const auto &w : word_tokens(to_lower(body))) used = used || w == lname;
        if (present || !used) {
            pos = body_end;
            continue;
        }
        const auto args = std::string(trim(m[5].str()));
        std::string new_head = m[3].str() + "(" + args + (args.empty() ? "" : ", ") + std::string(name) + ")";
        const auto rest = m[0].str().substr(static_cast<std::size_t>(m[1].length() + m[2].length() + m[3].length() + m[4].length()));
        const auto replaced = m[2].str() + new_head + rest + "\n" + m[2].str() + "  integer, intent(in) :: " + std::string(name);
        src.replace(head_begin, head_end - head_begin, replaced);
        pos = head_begin + replaced.size();
    }
    return src;
}

} // namespace detail

/// Applies the quick fix for a repairable category. Applying a fix to its
/// own output changes nothing.
inline std::string repair(std::string_view source, const ErrorClass &cls, Language l = Language::cuda) {
    switch (cls.category) {
    case ErrorCategory::undefined_generic_T:
        if (l == Language::fortran) break;
        return detail::repair_generic_t(std::string(source));
    case ErrorCategory::missing_variable_init:
        if (cls.symbol.empty()) throw Error(Errc::unrepairable, "missing_variable_init needs the undefined identifier");
        return l == Language::fortran ? detail::repair_fortran_missing_param(std::string(source), cls.symbol)
                                      : detail::repair_missing_param(std::string(source), cls.symbol);
    case ErrorCategory::missing_braces: {
        const auto closers = missing_closers(source, l);
        if (closers.empty()) return std::string(source);
        std::string out(source);
        while (!out.empty() && is_space_char(static_cast<unsigned char>(out.back()))) out.pop_back();
        for (char c : closers) {
            out += c == '}' ? "\n}" : std::string(1, c);
        }
        out += "\n";
        return out;
    }
    default:
        break;
    }
    throw Error(Errc::unrepairable, std::string(to_string(cls.category)) + " has no automatic fix");
}

inline std::string_view fix_rule_id(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::undefined_generic_T: return "add_template_T";
    case ErrorCategory::missing_variable_init: return "add_int_parameter";
    case ErrorCategory::missing_braces: return "close_delimiters";
    default: return "";
    }
}

struct RepairOutcome {
    std::string doc_id;
    ErrorCategory category = ErrorCategory::nontrivial;
    std::vector<std::string> fixes_applied;
    std::string fixed_source;
    CompileStatus post_status = CompileStatus::error;
    CompileResult initial;
    std::optional<CompileResult> final_result;
};

inline nlohmann::json to_json(const RepairOutcome &o) {
    nlohmann::json j{{"doc_id", o.doc_id},
                     {"category", o.initial.ok() ? nlohmann::json(nullptr) : nlohmann::json(std::string(to_string(o.category)))},
                     {"fixes_applied", o.fixes_applied},
                     {"fixed_source", o.fixed_source},
                     {"post_status", o.post_status == CompileStatus::ok ? "ok" : "error"},
                     {"initial", to_json(o.initial)}};
    if (o.final_result) j["final"] = to_json(*o.final_result);
    return j;
}

/// Compile, classify, fix, recompile; up to `max_rounds` fixes are chained
/// since one output can carry several independent defects. The reported
/// category is that of the first failure.
inline RepairOutcome compile_and_repair(std::string_view source, const CompilerAdapter &adapter, std::string doc_id = {},
                                        int max_rounds = 3) {
    RepairOutcome out;
    out.doc_id = doc_id;
    out.fixed_source = std::string(source);
    out.initial = compile(source, adapter, doc_id);
    if (out.initial.ok()) {
        out.post_status = CompileStatus::ok;
        return out;
    }
    CompileResult current = out.initial;
    for (int round = 0; round < max_rounds && !current.ok(); ++round) {
        const auto cls = classify_error(current, out.fixed_source, adapter.language);
        if (round == 0) out.category = cls.category;
        if (!is_repairable(cls.category)) break;
        std::string fixed;
        try {
            fixed = repair(out.fixed_source, cls, adapter.language);
        } catch (const Error &) {
            break;
        }
        if (fixed == out.fixed_source) break;
        out.fixed_source = std::move(fixed);
        out.fixes_applied.emplace_back(fix_rule_id(cls.category));
        current = compile(out.fixed_source, adapter, doc_id);
        out.final_result = current;
    }
    out.post_status = current.status;
    return out;
}

// ---- accuracy -----------------------------------------------------------------------

struct AccuracyReport {
    std::size_t total = 0;
    std::size_t compiled = 0;
    double percentage = 0;
    std::map<ErrorCategory, std::size_t> histogram;  // categories of initial failures
    std::vector<RepairOutcome> outcomes;             // in corpus order
    std::map<std::string, std::string> errors;       // doc_id -> tool failure
};

/// Percentage of documents that compile, after repair when `with_repair`.
/// Tool failures are recorded per document and count as not compiling.
inline AccuracyReport compilation_accuracy(const std::vector<Document> &docs, const CompilerAdapter &adapter,
                                           bool with_repair, unsigned jobs = 1) {
    AccuracyReport rep;
    rep.total = docs.size();
    rep.outcomes.resize(docs.size());
    std::vector<std::optional<std::string>> errors(docs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < docs.size(); i = next++) {
            try {
                if (with_repair) {
                    rep.outcomes[i] = compile_and_repair(docs[i].text, adapter, docs[i].doc_id);
                } else {
                    RepairOutcome o;
                    o.doc_id = docs[i].doc_id;
                    o.fixed_source = docs[i].text;
                    o.initial = compile(docs[i].text, adapter, docs[i].doc_id);
                    o.post_status = o.initial.status;
                    if (!o.initial.ok()) o.category = classify_error(o.initial, docs[i].text, adapter.language).category;
                    rep.outcomes[i] = std::move(o);
                }
            } catch (const Error &e) {
                errors[i] = e.what();
                rep.outcomes[i].doc_id = docs[i].doc_id;
                rep.outcomes[i].fixed_source = docs[i].text;
                rep.outcomes[i].post_status = CompileStatus::error;
            }
        }
    };
    std::vector<std::thread> pool;
    const auto n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(docs.size(), 1))));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();

    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto &o = rep.outcomes[i];
        if (errors[i]) {
            rep.errors[docs[i].doc_id] = *errors[i];
            continue;
        }
        if (!o.initial.ok()) ++rep.histogram[o.category];
        if (o.post_status == CompileStatus::ok) ++rep.compiled;
    }
    rep.percentage = rep.total == 0 ? 100.0 : 100.0 * static_cast<double>(rep.compiled) / static_cast<double>(rep.total);
    return rep;
}

inline nlohmann::json to_json(const AccuracyReport &r) {
    nlohmann::json hist = nlohmann::json::object();
    for (auto c : all_error_categories) {
        auto it = r.histogram.find(c);
        hist[std::string(to_string(c))] = it == r.histogram.end() ? 0 : it->second;
    }
    auto docs = nlohmann::json::array();
    for (const auto &o : r.outcomes) docs.push_back(to_json(o));
    return nlohmann::json{{"total", r.total},      {"compiled", r.compiled}, {"compile_accuracy", r.percentage},
                          {"histogram", hist},     {"documents", docs},      {"errors", r.errors}};
}

} // namespace forge
