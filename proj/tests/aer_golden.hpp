#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "forge/aer.hpp"
#include "forge/corpus.hpp"

namespace forge::test {

/// One line per non-blank word: `<word>\t<B-cat|I-cat|O>`, taken from the
/// word's first non-outside token.
inline std::string render_word_labels(const std::string &source, Language l, const Vocabulary &vocab,
                                      const AerTagSet &tags) {
    const auto d = extract_labels(source, l, vocab, tags);
    std::string out;
    const auto words = segment_words(source);
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (words[w].blank()) continue;
        int label = tags.outside_id;
        for (auto t = d.doc.word_spans[w].first; t < d.doc.word_spans[w].second; ++t) {
            if (d.labels[t] != tags.outside_id) {
                label = d.labels[t];
                break;
            }
        }
        out += source.substr(words[w].core_begin, words[w].end - words[w].core_begin);
        out += '\t';
        if (label == tags.outside_id) {
            out += "O";
        } else if (label % 2 == 1) {
            out += "B-" + *tags.name_of(label);
        } else {
            out += "I-" + *tags.name_of(label - 1);
        }
        out += '\n';
    }
    return out;
}

struct GoldenCase {
    std::filesystem::path source;
    std::filesystem::path labels;
    Language language;
};

inline std::vector<GoldenCase> golden_cases(const std::filesystem::path &dir) {
    std::vector<GoldenCase> out;
    for (const auto &e : std::filesystem::directory_iterator(dir)) {
        auto l = language_of_extension(e.path());
        if (!l) continue;
        auto labels = e.path();
        labels.replace_extension(".labels");
        out.push_back({e.path(), labels, *l});
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.source < b.source; });
    return out;
}

} // namespace forge::test
