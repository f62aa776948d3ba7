#ifndef SEQSENT_CHAIN_HPP
#define SEQSENT_CHAIN_HPP

// Linear-chain label sequence layer over per-sentence label log-probabilities.
//
//   score(y) = start[y_1] + Σ_i a_i[y_i] + Σ_{i≥2} T[y_{i−1}, y_i]
//
// with P(y) = exp(score(y)) / Σ_y' exp(score(y')). The start term can be
// switched off, leaving exactly the emission-plus-transition sum.
//
// Tie rule shared by viterbi_decode and brute_force_best: among all
// maximum-score sequences, return the lexicographically smallest one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "seqsent/errors.hpp"
#include "seqsent/numkit.hpp"

namespace seqsent {

// n x |C|; row i holds the label log-probabilities of sentence i.
template <class T>
using EmissionMatrix = Tensor2<T>;

using LabelSequence = std::vector<std::size_t>;

template <class T>
struct TransitionParams {
    Tensor2<T> transitions;  // |C| x |C|, rows = previous label
    Tensor2<T> start;        // 1 x |C|
    bool use_start = true;

    TransitionParams() = default;
    explicit TransitionParams(std::size_t classes, bool with_start = true)
        : transitions(classes, classes), start(1, classes), use_start(with_start) {}

    std::size_t num_labels() const noexcept { return transitions.rows(); }

    T start_score(std::size_t k) const { return use_start ? start(0, k) : T(0); }

    template <class F>
    void for_each_tensor(const std::string& prefix, F&& f) {
        f(prefix + ".transitions", transitions);
        f(prefix + ".start", start);
    }

    friend bool operator==(const TransitionParams&, const TransitionParams&) = default;
};

namespace detail {

template <class T>
void check_chain_shapes(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    if (a.rows() == 0) throw InvalidArgument("chain: empty emission matrix");
    const std::size_t C = tp.num_labels();
    if (a.cols() != C || tp.transitions.cols() != C || tp.start.cols() != C)
        throw InvalidArgument("chain: label dimension mismatch");
}

template <class T>
void check_labels(const EmissionMatrix<T>& a, const LabelSequence& y) {
    if (y.size() != a.rows()) throw InvalidArgument("chain: label sequence length does not match emissions");
    for (auto k : y)
        if (k >= a.cols()) throw InvalidArgument("chain: label index out of range");
}

}  // namespace detail

// Accumulated left to right as ((start + a_1) + T) + a_2 ..., the same
// operation order as the Viterbi recursion, so both agree bit-for-bit.
template <class T>
T sequence_score(const EmissionMatrix<T>& a, const TransitionParams<T>& tp, const LabelSequence& y) {
    detail::check_chain_shapes(a, tp);
    detail::check_labels(a, y);
    T s = tp.start_score(y[0]) + a(0, y[0]);
    for (std::size_t i = 1; i < y.size(); ++i) {
        s = s + tp.transitions(y[i - 1], y[i]);
        s = s + a(i, y[i]);
    }
    return s;
}

// Forward log-potentials alpha (n x C).
template <class T>
Tensor2<T> forward_scores(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    detail::check_chain_shapes(a, tp);
    const std::size_t n = a.rows(), C = a.cols();
    Tensor2<T> alpha(n, C);
    for (std::size_t k = 0; k < C; ++k) alpha(0, k) = tp.start_score(k) + a(0, k);
    Vec<T> tmp(C);
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t k = 0; k < C; ++k) {
            for (std::size_t j = 0; j < C; ++j) tmp[j] = alpha(i - 1, j) + tp.transitions(j, k);
            alpha(i, k) = logsumexp<T>(tmp) + a(i, k);
        }
    }
    return alpha;
}

// Backward log-potentials beta (n x C), beta(n-1, ·) = 0.
template <class T>
Tensor2<T> backward_scores(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    detail::check_chain_shapes(a, tp);
    const std::size_t n = a.rows(), C = a.cols();
    Tensor2<T> beta(n, C);
    Vec<T> tmp(C);
    for (std::size_t i = n - 1; i-- > 0;) {
        for (std::size_t j = 0; j < C; ++j) {
            for (std::size_t k = 0; k < C; ++k) tmp[k] = tp.transitions(j, k) + a(i + 1, k) + beta(i + 1, k);
            beta(i, j) = logsumexp<T>(tmp);
        }
    }
    return beta;
}

template <class T>
T log_partition(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    auto alpha = forward_scores(a, tp);
    return logsumexp<T>(alpha.row(alpha.rows() - 1));
}

// Posterior label marginals P(y_i = k), n x C.
template <class T>
Tensor2<T> label_marginals(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    auto alpha = forward_scores(a, tp);
    auto beta = backward_scores(a, tp);
    const T log_z = logsumexp<T>(alpha.row(a.rows() - 1));
    Tensor2<T> m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) m(i, k) = std::exp(alpha(i, k) + beta(i, k) - log_z);
    return m;
}

template <class T>
struct ChainLoss {
    T loss{};
    Tensor2<T> d_emissions;    // n x C
    Tensor2<T> d_transitions;  // C x C
    Tensor2<T> d_start;        // 1 x C; zero when start scores are disabled
};

// −log P(gold) = log_partition − sequence_score(gold), with gradients given by
// expected counts under the model minus the gold counts.
template <class T>
ChainLoss<T> nll_loss(const EmissionMatrix<T>& a, const TransitionParams<T>& tp, const LabelSequence& gold) {
    detail::check_chain_shapes(a, tp);
    detail::check_labels(a, gold);
    const std::size_t n = a.rows(), C = a.cols();
    auto alpha = forward_scores(a, tp);
    auto beta = backward_scores(a, tp);
    const T log_z = logsumexp<T>(alpha.row(n - 1));

    ChainLoss<T> out{log_z - sequence_score(a, tp, gold), Tensor2<T>(n, C), Tensor2<T>(C, C), Tensor2<T>(1, C)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < C; ++k) out.d_emissions(i, k) = std::exp(alpha(i, k) + beta(i, k) - log_z);
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < C; ++j)
            for (std::size_t k = 0; k < C; ++k)
                out.d_transitions(j, k) +=
                    std::exp(alpha(i - 1, j) + tp.transitions(j, k) + a(i, k) + beta(i, k) - log_z);
    if (tp.use_start) {
        for (std::size_t k = 0; k < C; ++k) out.d_start(0, k) = out.d_emissions(0, k);
        out.d_start(0, gold[0]) -= T(1);
    }
    for (std::size_t i = 0; i < n; ++i) out.d_emissions(i, gold[i]) -= T(1);
    for (std::size_t i = 1; i < n; ++i) out.d_transitions(gold[i - 1], gold[i]) -= T(1);
    // Rounding can leave log_z a hair below the gold score when one path dominates.
    if (out.loss < T(0)) out.loss = T(0);
    return out;
}

template <class T>
struct Decoded {
    LabelSequence labels;
    T score{};
};

template <class T>
Decoded<T> viterbi_decode(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    detail::check_chain_shapes(a, tp);
    const std::size_t n = a.rows(), C = a.cols();
    Tensor2<T> delta(n, C);
    std::vector<std::size_t> back(n * C, 0);
    // rank[k]: lexicographic rank of the best prefix ending in label k.
    std::vector<std::size_t> rank(C), next_rank(C), order(C);
    for (std::size_t k = 0; k < C; ++k) {
        delta(0, k) = tp.start_score(k) + a(0, k);
        rank[k] = k;
    }
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t k = 0; k < C; ++k) {
            std::size_t best_j = 0;
            T best = delta(i - 1, 0) + tp.transitions(0, k);
            for (std::size_t j = 1; j < C; ++j) {
                T v = delta(i - 1, j) + tp.transitions(j, k);
                if (v > best || (v == best && rank[j] < rank[best_j])) {
                    best = v;
                    best_j = j;
                }
            }
            delta(i, k) = best + a(i, k);
            back[i * C + k] = best_j;
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            std::size_t rx = rank[back[i * C + x]], ry = rank[back[i * C + y]];
            return rx != ry ? rx < ry : x < y;
        });
        for (std::size_t r = 0; r < C; ++r) next_rank[order[r]] = r;
        rank.swap(next_rank);
    }
    std::size_t last = 0;
    for (std::size_t k = 1; k < C; ++k) {
        T v = delta(n - 1, k), b = delta(n - 1, last);
        if (v > b || (v == b && rank[k] < rank[last])) last = k;
    }
    Decoded<T> out{LabelSequence(n), delta(n - 1, last)};
    out.labels[n - 1] = last;
    for (std::size_t i = n - 1; i > 0; --i) out.labels[i - 1] = back[i * C + out.labels[i]];
    return out;
}

// ---------------------------------------------------------------------------
// Exhaustive oracles, limited to |C|^n ≤ 10^6 sequences.

inline constexpr double kBruteForceLimit = 1e6;

namespace detail {

template <class T, class Visit>
void enumerate_sequences(const EmissionMatrix<T>& a, const TransitionParams<T>& tp, Visit&& visit) {
    check_chain_shapes(a, tp);
    const std::size_t n = a.rows(), C = a.cols();
    if (std::pow(static_cast<double>(C), static_cast<double>(n)) > kBruteForceLimit)
        throw InvalidArgument("brute force: more than 1e6 label sequences");
    LabelSequence y(n, 0);
    while (true) {
        visit(y, sequence_score(a, tp, y));
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++y[pos] < C) break;
            y[pos] = 0;
            if (pos == 0) return;
        }
    }
}

}  // namespace detail

// Sequences are visited in ascending lexicographic order, so keeping only
// strict improvements yields the lexicographically smallest maximizer.
template <class T>
Decoded<T> brute_force_best(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    Decoded<T> best;
    bool have = false;
    detail::enumerate_sequences(a, tp, [&](const LabelSequence& y, T s) {
        if (!have || s > best.score) {
            best.labels = y;
            best.score = s;
            have = true;
        }
    });
    return best;
}

template <class T>
T brute_force_logZ(const EmissionMatrix<T>& a, const TransitionParams<T>& tp) {
    Vec<T> scores;
    detail::enumerate_sequences(a, tp, [&](const LabelSequence&, T s) { scores.push_back(s); });
    return logsumexp<T>(scores);
}

// Row-softmax view of T (and of the start row) for display.
template <class T>
Tensor2<T> normalized_transitions(const TransitionParams<T>& tp) {
    Tensor2<T> out(tp.num_labels(), tp.num_labels());
    for (std::size_t j = 0; j < tp.num_labels(); ++j) {
        auto p = softmax<T>(tp.transitions.row(j));
        std::copy(p.begin(), p.end(), out.row(j).begin());
    }
    return out;
}

}  // namespace seqsent

#endif  // SEQSENT_CHAIN_HPP
