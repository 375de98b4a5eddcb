#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class Errc {
    // tokenizer
    empty_corpus,
    vocab_too_small,
    unknown_character,
    unknown_id,
    bad_vocab_file,
    // profiles
    language_mismatch,
    bad_profile_file,
    // aer
    parse_failure,
    grammar_missing,
    // noise
    missing_profile,
    // corpus
    precondition,
    labeler_unavailable,
    malformed_verdict,
    // orchestration
    translator_failure,
    empty_history,
    bad_plan,
    // metrics
    empty_reference,
    // compile / repair
    compiler_missing,
    timeout,
    not_an_error,
    unrepairable,
    // generic
    io,
    schema,
    usage,
};

constexpr std::string_view to_string(Errc e) noexcept {
    switch (e) {
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::vocab_too_small: return "VocabTooSmall";
    case Errc::unknown_character: return "UnknownCharacter";
    case Errc::unknown_id: return "UnknownId";
    case Errc::bad_vocab_file: return "BadVocabFile";
    case Errc::language_mismatch: return "LanguageMismatch";
    case Errc::bad_profile_file: return "BadProfileFile";
    case Errc::parse_failure: return "ParseFailure";
    case Errc::grammar_missing: return "GrammarMissing";
    case Errc::missing_profile: return "MissingProfile";
    case Errc::precondition: return "PreconditionViolated";
    case Errc::labeler_unavailable: return "LabelerUnavailable";
    case Errc::malformed_verdict: return "MalformedVerdict";
    case Errc::translator_failure: return "TranslatorFailure";
    case Errc::empty_history: return "EmptyHistory";
    case Errc::bad_plan: return "BadPlan";
    case Errc::empty_reference: return "EmptyReference";
    case Errc::compiler_missing: return "CompilerMissing";
    case Errc::timeout: return "Timeout";
    case Errc::not_an_error: return "NotAnError";
    case Errc::unrepairable: return "Unrepairable";
    case Errc::io: return "IoError";
    case Errc::schema: return "SchemaError";
    case Errc::usage: return "UsageError";
    }
    return "Unknown";
}

/// Whether the failure came from a tool outside the process (compiler,
/// translator child, labeler endpoint). The CLI maps these to exit code 4.
constexpr bool is_external(Errc e) noexcept {
    switch (e) {
    case Errc::compiler_missing:
    case Errc::timeout:
    case Errc::labeler_unavailable:
    case Errc::translator_failure:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

} // namespace forge
