#ifndef SEQSENT_TESTS_SYNTHETIC_CORPUS_HPP
#define SEQSENT_TESTS_SYNTHETIC_CORPUS_HPP

// Seeded generators for labeled-abstract corpora used by the tests when the
// real PubMed RCT files are not available.

#include <cstddef>
#include <string>
#include <vector>

#include "seqsent/corpus.hpp"
#include "seqsent/numkit.hpp"

namespace seqsent::synth {

// Deterministic pseudo-word from a pool tag and an index, e.g. "kadomi".
inline std::string pseudo_word(const std::string& tag, std::size_t i) {
    static const char* syl[] = {"ka", "do", "mi", "ru", "te", "so", "lan", "vek", "pri", "zu", "no", "bel"};
    std::string w = tag;
    std::size_t x = i * 7 + 3;
    for (int k = 0; k < 3; ++k) {
        w += syl[x % 12];
        x /= 12;
    }
    return w;
}

inline std::vector<std::string> word_pool(const std::string& tag, std::size_t n) {
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < n; ++i) pool.push_back(pseudo_word(tag, i));
    return pool;
}

inline Sentence make_sentence(const std::string& label, const std::vector<std::string>& words) {
    Sentence s;
    s.label = label;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) s.text += ' ';
        s.text += words[i];
    }
    s.text += " .";
    s.tokens = tokenize(s.text);
    return s;
}

inline const std::vector<std::string>& rct_labels() {
    static const std::vector<std::string> labels = {"BACKGROUND", "OBJECTIVE", "METHODS", "RESULTS", "CONCLUSIONS"};
    return labels;
}

// Abstracts follow BACKGROUND{0..2} OBJECTIVE METHODS{2..4} RESULTS{2..4}
// CONCLUSIONS{1..2}. BACKGROUND and OBJECTIVE draw cue words from one shared
// pool, so only position separates them; a fraction of sentences carry no cue
// words at all. A sentence-isolated classifier cannot recover either case.
inline Corpus rct_like_corpus(std::size_t n_abstracts, std::uint64_t seed, double cue_rate = 0.4,
                              double blank_rate = 0.15) {
    Rng rng(seed);
    Corpus c;
    c.labels = LabelSet(rct_labels());
    const auto shared = word_pool("", 40);
    const std::vector<std::vector<std::string>> cues = {word_pool("bo", 12), word_pool("bo", 12), word_pool("me", 12),
                                                        word_pool("re", 12), word_pool("co", 12)};
    auto draw = [&](const std::vector<std::string>& pool) { return pool[uniform_index(rng, pool.size())]; };
    for (std::size_t a = 0; a < n_abstracts; ++a) {
        Abstract abs;
        abs.id = std::to_string(10000 + a);
        std::vector<std::size_t> labels;
        for (std::size_t k = 0, m = uniform_index(rng, 3); k < m; ++k) labels.push_back(0);
        labels.push_back(1);
        for (std::size_t k = 0, m = 2 + uniform_index(rng, 3); k < m; ++k) labels.push_back(2);
        for (std::size_t k = 0, m = 2 + uniform_index(rng, 3); k < m; ++k) labels.push_back(3);
        for (std::size_t k = 0, m = 1 + uniform_index(rng, 2); k < m; ++k) labels.push_back(4);
        for (std::size_t y : labels) {
            const bool blank = uniform01(rng) < blank_rate;
            std::vector<std::string> words;
            for (std::size_t k = 0, len = 4 + uniform_index(rng, 6); k < len; ++k)
                words.push_back(!blank && uniform01(rng) < cue_rate ? draw(cues[y]) : draw(shared));
            abs.sentences.push_back(make_sentence(rct_labels()[y], words));
        }
        c.abstracts.push_back(std::move(abs));
    }
    return c;
}

// Labels cycle L0 L1 L2 L3 L4 L0 ... from the first sentence; every token is
// drawn from one label-independent pool.
inline Corpus cycle_corpus(std::size_t n_abstracts, std::uint64_t seed) {
    Rng rng(seed);
    Corpus c;
    c.labels = LabelSet({"L0", "L1", "L2", "L3", "L4"});
    const auto pool = word_pool("w", 30);
    for (std::size_t a = 0; a < n_abstracts; ++a) {
        Abstract abs;
        abs.id = "cyc" + std::to_string(a);
        for (std::size_t i = 0, n = 5 + uniform_index(rng, 6); i < n; ++i) {
            std::vector<std::string> words;
            for (std::size_t k = 0, len = 3 + uniform_index(rng, 4); k < len; ++k)
                words.push_back(pool[uniform_index(rng, pool.size())]);
            abs.sentences.push_back(make_sentence(c.labels.name(i % 5), words));
        }
        c.abstracts.push_back(std::move(abs));
    }
    return c;
}

inline Corpus slice(const Corpus& c, std::size_t begin, std::size_t end) {
    Corpus out;
    out.labels = c.labels;
    out.abstracts.assign(c.abstracts.begin() + static_cast<std::ptrdiff_t>(begin),
                         c.abstracts.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

}  // namespace seqsent::synth

#endif  // SEQSENT_TESTS_SYNTHETIC_CORPUS_HPP
