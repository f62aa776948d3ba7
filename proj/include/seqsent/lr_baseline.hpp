#ifndef SEQSENT_LR_BASELINE_HPP
#define SEQSENT_LR_BASELINE_HPP

// Sentence-isolated multinomial logistic regression over unigram and bigram
// counts. Serves as the context-free reference point for the full model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seqsent/corpus.hpp"
#include "seqsent/embed.hpp"
#include "seqsent/errors.hpp"
#include "seqsent/numkit.hpp"

namespace seqsent {

struct LrConfig {
    double l2 = 1e-4;
    std::size_t max_bigrams = 100000;
    double tolerance = 1e-6;  // relative loss change
    std::size_t max_iterations = 5000;
};

struct LrBaseline {
    std::unordered_map<std::string, std::size_t> features;
    Tensor2<double> weights;  // features x |C|
    Vec<double> bias;         // |C|
    std::size_t iterations = 0;

    std::size_t num_labels() const noexcept { return bias.size(); }
};

using SparseFeatures = std::vector<std::pair<std::size_t, double>>;

namespace detail {

inline std::vector<std::string> ngram_keys(const std::vector<std::string>& tokens) {
    std::vector<std::string> keys;
    std::vector<std::string> lower;
    lower.reserve(tokens.size());
    for (const auto& t : tokens) lower.push_back(lowercase_ascii(t));
    for (const auto& t : lower) keys.push_back("u:" + t);
    for (std::size_t i = 1; i < lower.size(); ++i) keys.push_back("b:" + lower[i - 1] + " " + lower[i]);
    return keys;
}

}  // namespace detail

inline SparseFeatures lr_features(const LrBaseline& b, const std::vector<std::string>& tokens) {
    std::unordered_map<std::size_t, double> counts;
    for (const auto& key : detail::ngram_keys(tokens)) {
        auto it = b.features.find(key);
        if (it != b.features.end()) counts[it->second] += 1.0;
    }
    SparseFeatures out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end());
    return out;
}

inline Vec<double> lr_log_probs(const LrBaseline& b, const SparseFeatures& x) {
    Vec<double> z(b.bias);
    for (const auto& [f, v] : x) {
        auto w = b.weights.row(f);
        for (std::size_t k = 0; k < z.size(); ++k) z[k] += v * w[k];
    }
    return log_softmax<double>(z);
}

inline std::size_t lr_predict(const LrBaseline& b, const std::vector<std::string>& tokens) {
    auto lp = lr_log_probs(b, lr_features(b, tokens));
    return static_cast<std::size_t>(std::max_element(lp.begin(), lp.end()) - lp.begin());
}

inline std::size_t lr_predict(const LrBaseline& b, const Sentence& s) {
    return lr_predict(b, s.tokens);
}

// Full-batch gradient descent with backtracking line search on
// mean NLL + (l2/2)·‖W‖², stopping once the relative loss change drops
// below `tolerance`.
inline LrBaseline lr_train(const std::vector<Abstract>& corpus, const LabelSet& labels, const LrConfig& cfg = {}) {
    if (corpus.empty() || labels.size() == 0) throw InvalidArgument("lr_train: empty corpus");
    LrBaseline b;

    // Feature index: every unigram, then the most frequent bigrams.
    std::unordered_map<std::string, std::size_t> bigram_counts;
    std::vector<std::string> bigram_order;
    for (const auto& a : corpus)
        for (const auto& s : a.sentences)
            for (const auto& key : detail::ngram_keys(s.tokens)) {
                if (key[0] == 'u') {
                    b.features.emplace(key, b.features.size());
                } else if (bigram_counts[key]++ == 0) {
                    bigram_order.push_back(key);
                }
            }
    std::stable_sort(bigram_order.begin(), bigram_order.end(),
                     [&](const std::string& x, const std::string& y) { return bigram_counts[x] > bigram_counts[y]; });
    if (bigram_order.size() > cfg.max_bigrams) bigram_order.resize(cfg.max_bigrams);
    for (const auto& key : bigram_order) b.features.emplace(key, b.features.size());

    const std::size_t F = b.features.size(), C = labels.size();
    b.weights = Tensor2<double>(F, C);
    b.bias.assign(C, 0.0);

    std::vector<SparseFeatures> xs;
    std::vector<std::size_t> ys;
    for (const auto& a : corpus)
        for (const auto& s : a.sentences) {
            xs.push_back(lr_features(b, s.tokens));
            ys.push_back(labels.at(s.label));
        }
    const double n = static_cast<double>(xs.size());

    auto objective = [&](const Tensor2<double>& w, const Vec<double>& bias, Tensor2<double>* gw, Vec<double>* gb) {
        double loss = 0.0;
        if (gw) {
            gw->fill(0.0);
            gb->assign(C, 0.0);
        }
        Vec<double> z(C);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            z = bias;
            for (const auto& [f, v] : xs[i]) {
                auto wr = w.row(f);
                for (std::size_t k = 0; k < C; ++k) z[k] += v * wr[k];
            }
            auto lp = log_softmax<double>(z);
            loss -= lp[ys[i]];
            if (!gw) continue;
            for (std::size_t k = 0; k < C; ++k) {
                double d = (std::exp(lp[k]) - (k == ys[i] ? 1.0 : 0.0)) / n;
                (*gb)[k] += d;
                for (const auto& [f, v] : xs[i]) (*gw)(f, k) += v * d;
            }
        }
        loss /= n;
        double reg = 0.0;
        auto wf = w.flat();
        for (std::size_t j = 0; j < wf.size(); ++j) {
            reg += wf[j] * wf[j];
            if (gw) gw->flat()[j] += cfg.l2 * wf[j];
        }
        return loss + 0.5 * cfg.l2 * reg;
    };

    Tensor2<double> gw(F, C);
    Vec<double> gb(C);
    Tensor2<double> trial_w(F, C);
    Vec<double> trial_b(C);
    double loss = objective(b.weights, b.bias, &gw, &gb);
    double step = 1.0;
    for (b.iterations = 0; b.iterations < cfg.max_iterations; ++b.iterations) {
        double gnorm2 = squared_norm<double>(gw.flat()) + squared_norm<double>(gb);
        if (gnorm2 == 0.0) break;
        double trial_loss = loss;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t j = 0; j < gw.size(); ++j) trial_w.flat()[j] = b.weights.flat()[j] - step * gw.flat()[j];
            for (std::size_t k = 0; k < C; ++k) trial_b[k] = b.bias[k] - step * gb[k];
            trial_loss = objective(trial_w, trial_b, nullptr, nullptr);
            if (trial_loss <= loss - 1e-4 * step * gnorm2) break;
            step *= 0.5;
        }
        if (trial_loss > loss) break;
        const double rel = std::abs(loss - trial_loss) / std::max(std::abs(loss), 1e-12);
        std::swap(b.weights, trial_w);
        std::swap(b.bias, trial_b);
        loss = objective(b.weights, b.bias, &gw, &gb);
        step = std::min(step * 2.0, 64.0);
        if (rel < cfg.tolerance) {
            ++b.iterations;
            break;
        }
    }
    return b;
}

}  // namespace seqsent

#endif  // SEQSENT_LR_BASELINE_HPP
