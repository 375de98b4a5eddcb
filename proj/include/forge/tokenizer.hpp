#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "forge/error.hpp"
#include "forge/language.hpp"
#include "forge/text.hpp"

namespace forge {

using TokenId = std::int32_t;

/// Token sequence of one source document. `word_spans` partitions
/// [0, tokens.size()) into the token ranges of whole words.
struct TokenizedDocument {
    std::vector<TokenId> tokens;
    std::vector<std::pair<std::size_t, std::size_t>> word_spans;
    Language language = Language::cpp;
    std::string doc_id;

    std::size_t word_count() const noexcept { return word_spans.size(); }
};

namespace special {
inline constexpr std::string_view mask = "mask";
inline constexpr std::string_view pad = "pad";
inline constexpr std::string_view bos = "bos";
inline constexpr std::string_view eos = "eos";

inline std::string lang(Language l) { return "lang:" + std::string(to_string(l)); }

/// Rendered text of a special role, e.g. "<mask>" or "<cuda>".
inline std::string text_of(std::string_view role) {
    if (role.starts_with("lang:")) return "<" + std::string(role.substr(5)) + ">";
    if (role == bos) return "<s>";
    if (role == eos) return "</s>";
    return "<" + std::string(role) + ">";
}

inline std::vector<std::string> default_roles() {
    std::vector<std::string> roles{std::string(mask), std::string(pad), std::string(bos), std::string(eos)};
    for (Language l : all_languages) roles.push_back(lang(l));
    return roles;
}
} // namespace special

namespace detail {
inline std::string escape_token(std::string_view s) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned char c : s) {
        if (c > 0x20 && c < 0x7f && c != '\\') {
            out.push_back(static_cast<char>(c));
        } else {
            out += "\\x";
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

inline std::optional<std::string> unescape_token(std::string_view s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out.push_back(s[i]);
            continue;
        }
        if (i + 3 >= s.size()) return std::nullopt;
        if (s[i + 1] != 'x') return std::nullopt;
        const int hi = nibble(s[i + 2]);
        const int lo = nibble(s[i + 3]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 3;
    }
    return out;
}

constexpr std::uint64_t pair_key(TokenId a, TokenId b) noexcept {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}
} // namespace detail

/// Byte-level BPE vocabulary. Ids 0..255 are the raw bytes, followed by the
/// special tokens, followed by one id per merge in merge order.
class Vocabulary {
  public:
    static constexpr TokenId byte_count = 256;

    Vocabulary() : Vocabulary(special::default_roles()) {}

    explicit Vocabulary(std::span<const std::string> special_roles) {
        tokens_.reserve(byte_count + special_roles.size());
        for (int b = 0; b < byte_count; ++b) add_token(std::string(1, static_cast<char>(b)));
        for (const auto &role : special_roles) {
            if (special_id(role)) throw Error(Errc::bad_vocab_file, "duplicate special role '" + role + "'");
            const auto text = special::text_of(role);
            const auto id = static_cast<TokenId>(tokens_.size());
            specials_.emplace_back(role, id);
            add_token(text);
        }
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::pair<TokenId, TokenId>> &merges() const noexcept { return merges_; }
    const std::vector<std::pair<std::string, TokenId>> &specials() const noexcept { return specials_; }

    bool contains(TokenId id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < tokens_.size(); }

    const std::string &token(TokenId id) const {
        if (!contains(id)) throw Error(Errc::unknown_id, "token id " + std::to_string(id));
        return tokens_[static_cast<std::size_t>(id)];
    }

    std::optional<TokenId> id_of(std::string_view token) const {
        auto it = token_to_id_.find(std::string(token));
        if (it == token_to_id_.end()) return std::nullopt;
        return it->second;
    }

    bool is_special(TokenId id) const noexcept {
        return id >= byte_count && static_cast<std::size_t>(id) < byte_count + specials_.size();
    }

    std::optional<TokenId> special_id(std::string_view role) const noexcept {
        for (const auto &[r, id] : specials_) {
            if (r == role) return id;
        }
        return std::nullopt;
    }

    TokenId require_special(std::string_view role) const {
        if (auto id = special_id(role)) return *id;
        throw Error(Errc::bad_vocab_file, "vocabulary has no special token '" + std::string(role) + "'");
    }

    TokenId mask_id() const { return require_special(special::mask); }
    TokenId pad_id() const { return require_special(special::pad); }
    TokenId language_token(Language l) const { return require_special(special::lang(l)); }

    std::optional<Language> language_of_token(TokenId id) const {
        for (Language l : all_languages) {
            if (special_id(special::lang(l)) == id) return l;
        }
        return std::nullopt;
    }

    /// BPE-encodes one pre-token. Merges apply in rank order, each one to all
    /// non-overlapping occurrences left to right, the same rewrite training uses.
    std::vector<TokenId> encode_word(std::string_view word) const {
        std::vector<TokenId> syms;
        syms.reserve(word.size());
        for (unsigned char c : word) syms.push_back(static_cast<TokenId>(c));
        while (syms.size() > 1) {
            std::size_t best_rank = merges_.size();
            for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
                auto it = merge_rank_.find(detail::pair_key(syms[i], syms[i + 1]));
                if (it != merge_rank_.end() && it->second < best_rank) best_rank = it->second;
            }
            if (best_rank == merges_.size()) break;
            apply_merge(syms, merges_[best_rank], merge_product(best_rank));
        }
        return syms;
    }

    TokenizedDocument encode(std::string_view text, Language language, std::string doc_id = {}) const {
        TokenizedDocument doc;
        doc.language = language;
        doc.doc_id = std::move(doc_id);
        for (const auto &w : segment_words(text)) {
            const auto start = doc.tokens.size();
            auto ids = encode_word(text.substr(w.begin, w.size()));
            doc.tokens.insert(doc.tokens.end(), ids.begin(), ids.end());
            doc.word_spans.emplace_back(start, doc.tokens.size());
        }
        return doc;
    }

    /// Special tokens render as the empty string.
    std::string decode(std::span<const TokenId> ids) const {
        std::string out;
        for (TokenId id : ids) {
            if (!contains(id)) throw Error(Errc::unknown_id, "token id " + std::to_string(id));
            if (is_special(id)) continue;
            out += tokens_[static_cast<std::size_t>(id)];
        }
        return out;
    }

    /// Text format: `bpe-v1 <size>`, one escaped merge pair per line, a
    /// `[specials]` marker line, then `<role> <id> <text>` per special.
    std::string serialize() const {
        std::ostringstream os;
        os << "bpe-v1 " << size() << '\n';
        for (const auto &[a, b] : merges_) {
            os << detail::escape_token(tokens_[static_cast<std::size_t>(a)]) << ' '
               << detail::escape_token(tokens_[static_cast<std::size_t>(b)]) << '\n';
        }
        os << "[specials]\n";
        for (const auto &[role, id] : specials_) {
            os << role << ' ' << id << ' ' << detail::escape_token(tokens_[static_cast<std::size_t>(id)]) << '\n';
        }
        return os.str();
    }

    static Vocabulary parse(std::string_view content) {
        std::vector<std::string> lines;
        {
            std::size_t pos = 0;
            while (pos < content.size()) {
                auto nl = content.find('\n', pos);
                if (nl == std::string_view::npos) nl = content.size();
                lines.emplace_back(content.substr(pos, nl - pos));
                pos = nl + 1;
            }
        }
        if (lines.empty()) throw Error(Errc::bad_vocab_file, "empty vocabulary file");
        std::size_t declared = 0;
        {
            std::istringstream hs(lines[0]);
            std::string magic;
            if (!(hs >> magic >> declared) || magic != "bpe-v1") {
                throw Error(Errc::bad_vocab_file, "missing 'bpe-v1 <size>' header");
            }
        }
        std::size_t marker = 1;
        while (marker < lines.size() && lines[marker] != "[specials]") ++marker;
        if (marker == lines.size()) throw Error(Errc::bad_vocab_file, "missing [specials] section");

        std::vector<std::pair<std::string, TokenId>> specials;
        for (std::size_t i = marker + 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            std::istringstream ls(lines[i]);
            std::string role;
            TokenId id = -1;
            if (!(ls >> role >> id)) throw Error(Errc::bad_vocab_file, "bad special line: " + lines[i]);
            specials.emplace_back(role, id);
        }
        std::vector<std::string> roles;
        for (std::size_t i = 0; i < specials.size(); ++i) {
            if (specials[i].second != static_cast<TokenId>(byte_count + i)) {
                throw Error(Errc::bad_vocab_file, "special ids must follow the byte range in order");
            }
            roles.push_back(specials[i].first);
        }
        Vocabulary v(roles);
        for (std::size_t i = 1; i < marker; ++i) {
            const auto &line = lines[i];
            const auto sp = line.find(' ');
            if (sp == std::string::npos || line.find(' ', sp + 1) != std::string::npos) {
                throw Error(Errc::bad_vocab_file, "bad merge line: " + line);
            }
            auto left = detail::unescape_token(std::string_view(line).substr(0, sp));
            auto right = detail::unescape_token(std::string_view(line).substr(sp + 1));
            if (!left || !right) throw Error(Errc::bad_vocab_file, "bad escape in merge line: " + line);
            auto a = v.id_of(*left);
            auto b = v.id_of(*right);
            if (!a || !b || v.is_special(*a) || v.is_special(*b)) {
                throw Error(Errc::unknown_character, "merge references unknown token: " + line);
            }
            if (!v.add_merge(*a, *b)) throw Error(Errc::bad_vocab_file, "duplicate merge product: " + line);
        }
        if (v.size() != declared) {
            throw Error(Errc::bad_vocab_file, "header declares " + std::to_string(declared) + " entries, found " +
                                                  std::to_string(v.size()));
        }
        return v;
    }

    /// Appends a merge; returns false if its product string already exists.
    bool add_merge(TokenId a, TokenId b) {
        auto product = tokens_[static_cast<std::size_t>(a)] + tokens_[static_cast<std::size_t>(b)];
        if (token_to_id_.contains(product)) return false;
        merge_rank_.emplace(detail::pair_key(a, b), merges_.size());
        merges_.emplace_back(a, b);
        add_token(std::move(product));
        return true;
    }

    bool would_collide(TokenId a, TokenId b) const {
        return token_to_id_.contains(tokens_[static_cast<std::size_t>(a)] + tokens_[static_cast<std::size_t>(b)]);
    }

    static void apply_merge(std::vector<TokenId> &syms, std::pair<TokenId, TokenId> pair, TokenId product) {
        std::size_t w = 0;
        for (std::size_t r = 0; r < syms.size();) {
            if (r + 1 < syms.size() && syms[r] == pair.first && syms[r + 1] == pair.second) {
                syms[w++] = product;
                r += 2;
            } else {
                syms[w++] = syms[r++];
            }
        }
        syms.resize(w);
    }

  private:
    TokenId merge_product(std::size_t rank) const {
        return static_cast<TokenId>(byte_count + specials_.size() + rank);
    }

    void add_token(std::string s) {
        const auto id = static_cast<TokenId>(tokens_.size());
        token_to_id_.emplace(s, id);
        tokens_.push_back(std::move(s));
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> token_to_id_;
    std::vector<std::pair<TokenId, TokenId>> merges_;
    std::unordered_map<std::uint64_t, std::size_t> merge_rank_;
    std::vector<std::pair<std::string, TokenId>> specials_;
};

/// Trains a byte-level BPE vocabulary of `vocab_size` entries. Among pairs of
/// equal frequency the lexicographically smallest (left, right) string pair
/// is merged first. Stops early, with a smaller vocabulary, once no pair is
/// left to merge.
inline Vocabulary train_bpe(std::span<const std::string> corpus, std::size_t vocab_size,
                            std::span<const std::string> special_roles) {
    if (corpus.empty()) throw Error(Errc::empty_corpus, "train_bpe needs at least one document");
    const std::size_t base = Vocabulary::byte_count + special_roles.size();
    if (vocab_size < base) {
        throw Error(Errc::vocab_too_small,
                    "vocab_size " + std::to_string(vocab_size) + " < alphabet+specials " + std::to_string(base));
    }
    Vocabulary vocab(special_roles);

    struct Word {
        std::vector<TokenId> syms;
        std::int64_t freq = 0;
    };
    std::vector<Word> words;
    {
        std::map<std::string, std::int64_t> freq;
        for (const auto &doc : corpus) {
            for (const auto &w : segment_words(doc)) ++freq[doc.substr(w.begin, w.size())];
        }
        words.reserve(freq.size());
        for (const auto &[text, f] : freq) {
            Word w;
            w.freq = f;
            for (unsigned char c : text) w.syms.push_back(static_cast<TokenId>(c));
            words.push_back(std::move(w));
        }
    }

    struct Candidate {
        std::int64_t count;
        TokenId a;
        TokenId b;
    };
    auto by_priority = [&vocab](const Candidate &x, const Candidate &y) {
        if (x.count != y.count) return x.count > y.count;
        const auto &xa = vocab.token(x.a);
        const auto &ya = vocab.token(y.a);
        if (xa != ya) return xa < ya;
        return vocab.token(x.b) < vocab.token(y.b);
    };
    std::set<Candidate, decltype(by_priority)> queue(by_priority);
    std::unordered_map<std::uint64_t, std::int64_t> counts;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where;
    std::unordered_set<std::uint64_t> banned;

    auto bump = [&](TokenId a, TokenId b, std::int64_t delta, std::uint32_t word_index) {
        const auto key = detail::pair_key(a, b);
        if (banned.contains(key)) return;
        auto &c = counts[key];
        if (c > 0) queue.erase(Candidate{c, a, b});
        c += delta;
        if (c > 0) queue.insert(Candidate{c, a, b});
        if (delta > 0) where[key].push_back(word_index);
    };

    for (std::uint32_t wi = 0; wi < words.size(); ++wi) {
        const auto &w = words[wi];
        for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) bump(w.syms[i], w.syms[i + 1], w.freq, wi);
    }

    while (vocab.size() < vocab_size && !queue.empty()) {
        const Candidate best = *queue.begin();
        const auto key = detail::pair_key(best.a, best.b);
        if (vocab.would_collide(best.a, best.b)) {
            queue.erase(queue.begin());
            banned.insert(key);
            continue;
        }
        const auto product = static_cast<TokenId>(vocab.size());
        vocab.add_merge(best.a, best.b);

        auto sites = std::move(where[key]);
        where.erase(key);
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        for (auto wi : sites) {
            auto &w = words[wi];
            bool present = false;
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
                if (w.syms[i] == best.a && w.syms[i + 1] == best.b) {
                    present = true;
                    break;
                }
            }
            if (!present) continue;
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) bump(w.syms[i], w.syms[i + 1], -w.freq, wi);
            Vocabulary::apply_merge(w.syms, {best.a, best.b}, product);
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) bump(w.syms[i], w.syms[i + 1], w.freq, wi);
        }
        counts.erase(key);
    }
    return vocab;
}

inline Vocabulary train_bpe(std::span<const std::string> corpus, std::size_t vocab_size) {
    const auto roles = special::default_roles();
    return train_bpe(corpus, vocab_size, roles);
}

inline TokenizedDocument encode(std::string_view text, const Vocabulary &vocab, Language language,
                                std::string doc_id = {}) {
    return vocab.encode(text, language, std::move(doc_id));
}

inline std::string decode(std::span<const TokenId> tokens, const Vocabulary &vocab) { return vocab.decode(tokens); }

/// Surface text of word `i` of a document, without its leading whitespace.
inline std::string word_core(const TokenizedDocument &doc, std::size_t i, const Vocabulary &vocab) {
    const auto [s, e] = doc.word_spans.at(i);
    auto text = vocab.decode(std::span<const TokenId>(doc.tokens).subspan(s, e - s));
    std::size_t b = 0;
    while (b < text.size() && is_space_char(static_cast<unsigned char>(text[b]))) ++b;
    return text.substr(b);
}

} // namespace forge
