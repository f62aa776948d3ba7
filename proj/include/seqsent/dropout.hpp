#ifndef SEQSENT_DROPOUT_HPP
#define SEQSENT_DROPOUT_HPP

#include <cstddef>
#include <span>

#include "seqsent/errors.hpp"
#include "seqsent/numkit.hpp"

namespace seqsent {

// Inverted dropout scale factors: 0 with probability `rate`, else 1/(1−rate).
template <class T>
Vec<T> dropout_mask(std::size_t n, double rate, Rng& rng) {
    if (!(rate >= 0.0) || rate >= 1.0) throw InvalidArgument("dropout: rate must lie in [0, 1)");
    Vec<T> mask(n, T(1));
    if (rate == 0.0) return mask;
    const T keep = static_cast<T>(1.0 / (1.0 - rate));
    for (auto& m : mask) m = uniform01(rng) < rate ? T(0) : keep;
    return mask;
}

template <class T>
Vec<T> apply_dropout(std::span<const T> v, double rate, Rng& rng, bool training) {
    if (!(rate >= 0.0) || rate >= 1.0) throw InvalidArgument("dropout: rate must lie in [0, 1)");
    Vec<T> out(v.begin(), v.end());
    if (!training || rate == 0.0) return out;
    auto mask = dropout_mask<T>(v.size(), rate, rng);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
    return out;
}

// Settings for one training-mode forward pass.
struct DropoutContext {
    double rate = 0.0;
    Rng* rng = nullptr;
};

}  // namespace seqsent

#endif  // SEQSENT_DROPOUT_HPP
