#ifndef SEQSENT_ENCODER_HPP
#define SEQSENT_ENCODER_HPP

// Character biLSTM (token -> character-based token embedding), token biLSTM
// (hybrid embeddings -> sentence vector) and the one-hidden-layer scorer
// (sentence vector -> label log-probabilities). Every forward routine has a
// caching variant and a matching backward routine that accumulates into a
// caller-owned gradient structure of the same type as the parameters.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqsent/embed.hpp"
#include "seqsent/errors.hpp"
#include "seqsent/numkit.hpp"

namespace seqsent {

// Gate weights act on [x ‖ h] and are stored (input+hidden) x hidden.
template <class T>
struct LstmParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Tensor2<T> w_input, w_forget, w_output, w_cell;
    Tensor2<T> b_input, b_forget, b_output, b_cell;  // 1 x hidden

    LstmParams() = default;
    LstmParams(std::size_t in, std::size_t hidden)
        : input_dim(in),
          hidden_dim(hidden),
          w_input(in + hidden, hidden),
          w_forget(in + hidden, hidden),
          w_output(in + hidden, hidden),
          w_cell(in + hidden, hidden),
          b_input(1, hidden),
          b_forget(1, hidden),
          b_output(1, hidden),
          b_cell(1, hidden) {}

    template <class F>
    void for_each_tensor(const std::string& prefix, F&& f) {
        f(prefix + ".w_input", w_input);
        f(prefix + ".w_forget", w_forget);
        f(prefix + ".w_output", w_output);
        f(prefix + ".w_cell", w_cell);
        f(prefix + ".b_input", b_input);
        f(prefix + ".b_forget", b_forget);
        f(prefix + ".b_output", b_output);
        f(prefix + ".b_cell", b_cell);
    }

    friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

inline constexpr double kForgetBiasInit = 1.0;

template <class T>
LstmParams<T> init_lstm(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    LstmParams<T> p(input_dim, hidden_dim);
    const double bound = glorot_bound(input_dim + hidden_dim, hidden_dim);
    p.w_input.fill_uniform(rng, -bound, bound);
    p.w_forget.fill_uniform(rng, -bound, bound);
    p.w_output.fill_uniform(rng, -bound, bound);
    p.w_cell.fill_uniform(rng, -bound, bound);
    p.b_forget.fill(static_cast<T>(kForgetBiasInit));
    return p;
}

template <class T>
struct LstmState {
    Vec<T> h;
    Vec<T> c;
};

template <class T>
struct LstmStepCache {
    Vec<T> xh;  // [x ‖ h_prev]
    Vec<T> in_gate, forget_gate, out_gate, candidate;
    Vec<T> c_prev, c, tanh_c;
};

// i = σ(xh Wi + bi), f = σ(xh Wf + bf), o = σ(xh Wo + bo), g = tanh(xh Wc + bc)
// c' = f ⊙ c + i ⊙ g,  h' = o ⊙ tanh(c')
template <class T>
LstmState<T> lstm_step(const LstmParams<T>& p, std::span<const T> x, std::span<const T> h,
                       std::span<const T> c, LstmStepCache<T>* cache = nullptr) {
    const std::size_t H = p.hidden_dim;
    if (x.size() != p.input_dim || h.size() != H || c.size() != H)
        throw InvalidArgument("lstm_step: dimension mismatch");
    Vec<T> xh = concat(x, h);
    Vec<T> zi(H), zf(H), zo(H), zg(H);
    affine<T>(xh, p.w_input, p.b_input.row(0), zi);
    affine<T>(xh, p.w_forget, p.b_forget.row(0), zf);
    affine<T>(xh, p.w_output, p.b_output.row(0), zo);
    affine<T>(xh, p.w_cell, p.b_cell.row(0), zg);

    LstmState<T> next{Vec<T>(H), Vec<T>(H)};
    Vec<T> tanh_c(H);
    for (std::size_t j = 0; j < H; ++j) {
        zi[j] = sigmoid(zi[j]);
        zf[j] = sigmoid(zf[j]);
        zo[j] = sigmoid(zo[j]);
        zg[j] = std::tanh(zg[j]);
        next.c[j] = zf[j] * c[j] + zi[j] * zg[j];
        tanh_c[j] = std::tanh(next.c[j]);
        next.h[j] = zo[j] * tanh_c[j];
    }
    if (cache) {
        cache->xh = std::move(xh);
        cache->in_gate = std::move(zi);
        cache->forget_gate = std::move(zf);
        cache->out_gate = std::move(zo);
        cache->candidate = std::move(zg);
        cache->c_prev.assign(c.begin(), c.end());
        cache->c = next.c;
        cache->tanh_c = std::move(tanh_c);
    }
    return next;
}

template <class T>
struct LstmStepGrad {
    Vec<T> dx, dh_prev, dc_prev;
};

// Backpropagates (dh', dc') through one cached step, accumulating into `grads`.
template <class T>
LstmStepGrad<T> lstm_step_backward(const LstmParams<T>& p, const LstmStepCache<T>& k, std::span<const T> dh,
                                   std::span<const T> dc_next, LstmParams<T>& grads) {
    const std::size_t H = p.hidden_dim;
    Vec<T> dzi(H), dzf(H), dzo(H), dzg(H), dc_prev(H);
    for (std::size_t j = 0; j < H; ++j) {
        const T i = k.in_gate[j], f = k.forget_gate[j], o = k.out_gate[j], g = k.candidate[j];
        const T tc = k.tanh_c[j];
        const T d_o = dh[j] * tc;
        const T dc = dc_next[j] + dh[j] * o * (T(1) - tc * tc);
        dzi[j] = dc * g * i * (T(1) - i);
        dzf[j] = dc * k.c_prev[j] * f * (T(1) - f);
        dzo[j] = d_o * o * (T(1) - o);
        dzg[j] = dc * i * (T(1) - g * g);
        dc_prev[j] = dc * f;
    }
    Vec<T> dxh(p.input_dim + H, T(0));
    affine_backward<T>(k.xh, p.w_input, dzi, grads.w_input, grads.b_input.row(0), dxh);
    affine_backward<T>(k.xh, p.w_forget, dzf, grads.w_forget, grads.b_forget.row(0), dxh);
    affine_backward<T>(k.xh, p.w_output, dzo, grads.w_output, grads.b_output.row(0), dxh);
    affine_backward<T>(k.xh, p.w_cell, dzg, grads.w_cell, grads.b_cell.row(0), dxh);
    LstmStepGrad<T> out;
    out.dx.assign(dxh.begin(), dxh.begin() + static_cast<std::ptrdiff_t>(p.input_dim));
    out.dh_prev.assign(dxh.begin() + static_cast<std::ptrdiff_t>(p.input_dim), dxh.end());
    out.dc_prev = std::move(dc_prev);
    return out;
}

// ---------------------------------------------------------------------------
// Bidirectional encoder over a sequence; output is [final fwd h ‖ final bwd h].
// The backward direction reads the sequence last-to-first, so its final state
// is the one after consuming element 0.

template <class T>
struct BiLstmCache {
    std::vector<LstmStepCache<T>> fwd;  // fwd[t] consumed inputs[t]
    std::vector<LstmStepCache<T>> bwd;  // bwd[s] consumed inputs[n-1-s]
};

template <class T>
Vec<T> bilstm_encode(const LstmParams<T>& fwd, const LstmParams<T>& bwd, const std::vector<Vec<T>>& inputs,
                     BiLstmCache<T>* cache = nullptr) {
    const std::size_t n = inputs.size();
    if (n == 0) throw InvalidArgument("bilstm_encode: empty sequence");
    if (cache) {
        cache->fwd.assign(n, {});
        cache->bwd.assign(n, {});
    }
    LstmState<T> sf{Vec<T>(fwd.hidden_dim, T(0)), Vec<T>(fwd.hidden_dim, T(0))};
    for (std::size_t t = 0; t < n; ++t)
        sf = lstm_step<T>(fwd, inputs[t], sf.h, sf.c, cache ? &cache->fwd[t] : nullptr);
    LstmState<T> sb{Vec<T>(bwd.hidden_dim, T(0)), Vec<T>(bwd.hidden_dim, T(0))};
    for (std::size_t s = 0; s < n; ++s)
        sb = lstm_step<T>(bwd, inputs[n - 1 - s], sb.h, sb.c, cache ? &cache->bwd[s] : nullptr);
    return concat<T>(sf.h, sb.h);
}

// Returns d(inputs[t]) for every position given d(output).
template <class T>
std::vector<Vec<T>> bilstm_backward(const LstmParams<T>& fwd, const LstmParams<T>& bwd, const BiLstmCache<T>& cache,
                                    std::span<const T> d_out, LstmParams<T>& g_fwd, LstmParams<T>& g_bwd) {
    const std::size_t n = cache.fwd.size();
    const std::size_t Hf = fwd.hidden_dim, Hb = bwd.hidden_dim;
    std::vector<Vec<T>> d_inputs(n);

    Vec<T> dh(d_out.begin(), d_out.begin() + static_cast<std::ptrdiff_t>(Hf));
    Vec<T> dc(Hf, T(0));
    for (std::size_t t = n; t-- > 0;) {
        auto g = lstm_step_backward<T>(fwd, cache.fwd[t], dh, dc, g_fwd);
        d_inputs[t] = std::move(g.dx);
        dh = std::move(g.dh_prev);
        dc = std::move(g.dc_prev);
    }
    dh.assign(d_out.begin() + static_cast<std::ptrdiff_t>(Hf), d_out.begin() + static_cast<std::ptrdiff_t>(Hf + Hb));
    dc.assign(Hb, T(0));
    for (std::size_t s = n; s-- > 0;) {
        auto g = lstm_step_backward<T>(bwd, cache.bwd[s], dh, dc, g_bwd);
        auto& dst = d_inputs[n - 1 - s];
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g.dx[k];
        dh = std::move(g.dh_prev);
        dc = std::move(g.dc_prev);
    }
    return d_inputs;
}

// ---------------------------------------------------------------------------
// Character-based token embedding

template <class T>
Vec<T> char_token_embed(const LstmParams<T>& fwd, const LstmParams<T>& bwd, std::span<const std::size_t> chars,
                        const EmbeddingTable<T>& table, BiLstmCache<T>* cache = nullptr) {
    if (chars.empty()) throw InvalidArgument("char_token_embed: empty character sequence");
    std::vector<Vec<T>> inputs;
    inputs.reserve(chars.size());
    for (std::size_t c : chars) {
        auto r = table.row(c);
        inputs.emplace_back(r.begin(), r.end());
    }
    return bilstm_encode<T>(fwd, bwd, inputs, cache);
}

template <class T>
void char_token_embed_backward(const LstmParams<T>& fwd, const LstmParams<T>& bwd, std::span<const std::size_t> chars,
                               const BiLstmCache<T>& cache, std::span<const T> d_out, LstmParams<T>& g_fwd,
                               LstmParams<T>& g_bwd, SparseRowGrad<T>& g_table) {
    auto d_inputs = bilstm_backward<T>(fwd, bwd, cache, d_out, g_fwd, g_bwd);
    for (std::size_t t = 0; t < chars.size(); ++t) {
        if (chars[t] == Vocab::kPad) continue;
        auto row = g_table.row(chars[t]);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += d_inputs[t][k];
    }
}

// [character-based embedding ‖ token embedding] for one raw token.
template <class T>
Vec<T> hybrid_embed(std::string_view token, const Vocab& vocab, const LstmParams<T>& char_fwd,
                    const LstmParams<T>& char_bwd, const EmbeddingTable<T>& char_table,
                    const EmbeddingTable<T>& token_table) {
    if (token.empty()) throw InvalidArgument("hybrid_embed: empty token");
    auto chars = vocab.char_indices(token);
    Vec<T> c = char_token_embed<T>(char_fwd, char_bwd, chars, char_table);
    return concat<T>(c, lookup_token(token_table, vocab, token));
}

template <class T>
Vec<T> sentence_encode(const LstmParams<T>& fwd, const LstmParams<T>& bwd, const std::vector<Vec<T>>& embeddings,
                       BiLstmCache<T>* cache = nullptr) {
    if (embeddings.empty()) throw InvalidArgument("sentence_encode: empty sentence");
    return bilstm_encode<T>(fwd, bwd, embeddings, cache);
}

// ---------------------------------------------------------------------------
// Feedforward scorer: hidden = tanh(s W1 + b1), a = log_softmax(hidden W2 + b2)

template <class T>
struct FeedForwardParams {
    Tensor2<T> w_hidden;  // sentence dim x hidden dim
    Tensor2<T> b_hidden;  // 1 x hidden dim
    Tensor2<T> w_out;     // hidden dim x |C|
    Tensor2<T> b_out;     // 1 x |C|

    FeedForwardParams() = default;
    FeedForwardParams(std::size_t in, std::size_t hidden, std::size_t classes)
        : w_hidden(in, hidden), b_hidden(1, hidden), w_out(hidden, classes), b_out(1, classes) {}

    std::size_t input_dim() const noexcept { return w_hidden.rows(); }
    std::size_t num_classes() const noexcept { return w_out.cols(); }

    template <class F>
    void for_each_tensor(const std::string& prefix, F&& f) {
        f(prefix + ".w_hidden", w_hidden);
        f(prefix + ".b_hidden", b_hidden);
        f(prefix + ".w_out", w_out);
        f(prefix + ".b_out", b_out);
    }

    friend bool operator==(const FeedForwardParams&, const FeedForwardParams&) = default;
};

template <class T>
FeedForwardParams<T> init_feedforward(std::size_t in, std::size_t hidden, std::size_t classes, Rng& rng) {
    FeedForwardParams<T> p(in, hidden, classes);
    const double b1 = glorot_bound(in, hidden);
    const double b2 = glorot_bound(hidden, classes);
    p.w_hidden.fill_uniform(rng, -b1, b1);
    p.w_out.fill_uniform(rng, -b2, b2);
    return p;
}

template <class T>
struct FeedForwardCache {
    Vec<T> input;
    Vec<T> hidden;     // post-tanh
    Vec<T> log_probs;
};

template <class T>
Vec<T> label_scores(const FeedForwardParams<T>& ff, std::span<const T> s, FeedForwardCache<T>* cache = nullptr) {
    if (s.size() != ff.input_dim()) throw InvalidArgument("label_scores: sentence vector has wrong dimension");
    Vec<T> hidden(ff.w_hidden.cols());
    affine<T>(s, ff.w_hidden, ff.b_hidden.row(0), hidden);
    for (auto& x : hidden) x = std::tanh(x);
    Vec<T> logits(ff.num_classes());
    affine<T>(hidden, ff.w_out, ff.b_out.row(0), logits);
    Vec<T> a = log_softmax<T>(logits);
    if (cache) {
        cache->input.assign(s.begin(), s.end());
        cache->hidden = hidden;
        cache->log_probs = a;
    }
    return a;
}

// Returns d(s) given d(a).
template <class T>
Vec<T> label_scores_backward(const FeedForwardParams<T>& ff, const FeedForwardCache<T>& k, std::span<const T> d_a,
                             FeedForwardParams<T>& grads) {
    Vec<T> d_logits = log_softmax_backward<T>(k.log_probs, d_a);
    Vec<T> d_hidden(k.hidden.size(), T(0));
    affine_backward<T>(k.hidden, ff.w_out, d_logits, grads.w_out, grads.b_out.row(0), d_hidden);
    for (std::size_t j = 0; j < d_hidden.size(); ++j) d_hidden[j] *= T(1) - k.hidden[j] * k.hidden[j];
    Vec<T> d_s(k.input.size(), T(0));
    affine_backward<T>(k.input, ff.w_hidden, d_hidden, grads.w_hidden, grads.b_hidden.row(0), d_s);
    return d_s;
}

}  // namespace seqsent

#endif  // SEQSENT_ENCODER_HPP
