#ifndef SEQSENT_TESTS_TOY_MODEL_HPP
#define SEQSENT_TESTS_TOY_MODEL_HPP

// Tiny full-model instances for gradient checks.

#include <string>
#include <type_traits>
#include <vector>

#include "seqsent/model.hpp"
#include "seqsent/train.hpp"

namespace seqsent::synth {

inline ModelDims toy_dims() { return ModelDims{3, 4, 6, 8, 5}; }

// Two abstracts, at most three sentences of at most four tokens, three labels.
inline Corpus toy_gradient_corpus() {
    return parse_rct_string(
        "###g1\n"
        "A\tWe tested mice .\n"
        "B\tdose was low\n"
        "C\tit worked .\n"
        "\n"
        "###g2\n"
        "B\tmice (n=4)\n"
        "C\tlow dose .\n");
}

template <class T>
constexpr T toy_epsilon() {
    return std::is_same_v<T, double> ? T(1e-4) : T(1e-6);
}

struct ToyGradCheck {
    GradCheckReport report;
    std::size_t tensors = 0;
};

// Sum of per-abstract NLL, dropout off, checked over every parameter tensor.
// In double, eps 1e-4 leaves roughly 1% of random points with an entry whose
// central difference is off by 1e-4 relative (rounding on tiny gradients,
// truncation on curved ones); long double at eps 1e-6 has neither problem.
template <class T = double>
ToyGradCheck toy_model_grad_check(std::uint64_t seed, bool use_start, double tol = 1e-4) {
    auto corpus = toy_gradient_corpus();
    auto vocab = build_vocab(corpus.abstracts, 1);
    Rng rng(seed);
    auto p = init_model<T>(toy_dims(), vocab.token_count(), vocab.char_count(), corpus.labels.size(), use_start,
                           rng);
    // A generic point rather than the initializer's zero biases and transitions.
    p.for_each_tensor([&](const std::string&, Tensor2<T>& t) { t.fill_uniform(rng, -1.0, 1.0); });
    auto data = encode_corpus(corpus.abstracts, vocab, &corpus.labels);

    ModelGrads<T> g(p);
    zero_grads(g);
    for (const auto& a : data) abstract_loss_grad(p, a, g);
    std::vector<Tensor2<T>> store;
    auto entries = grad_check_entries(p, g, store);
    auto loss = [&] {
        T t = 0;
        for (const auto& a : data) t += abstract_loss(p, a);
        return t;
    };
    return {grad_check<T>(loss, entries, toy_epsilon<T>(), tol), entries.size()};
}

}  // namespace seqsent::synth

#endif  // SEQSENT_TESTS_TOY_MODEL_HPP
