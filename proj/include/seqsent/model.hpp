#ifndef SEQSENT_MODEL_HPP
#define SEQSENT_MODEL_HPP

// Full sentence-sequence model: hybrid token embeddings -> token biLSTM ->
// feedforward label scores -> linear-chain layer over the abstract.

#include <cstddef>
#include <string>
#include <vector>

#include "seqsent/chain.hpp"
#include "seqsent/corpus.hpp"
#include "seqsent/dropout.hpp"
#include "seqsent/embed.hpp"
#include "seqsent/encoder.hpp"
#include "seqsent/numkit.hpp"

namespace seqsent {

struct ModelDims {
    std::size_t char_dim = 25;         // character embedding
    std::size_t char_token_dim = 50;   // character-based token embedding (both directions)
    std::size_t token_dim = 300;       // token embedding
    std::size_t sentence_dim = 200;    // sentence vector (both directions)
    std::size_t ff_hidden = 100;

    std::size_t hybrid_dim() const noexcept { return char_token_dim + token_dim; }

    void validate() const {
        if (char_dim == 0 || char_token_dim == 0 || token_dim == 0 || sentence_dim == 0 || ff_hidden == 0)
            throw InvalidArgument("model dims must be positive");
        if (char_token_dim % 2 != 0 || sentence_dim % 2 != 0)
            throw InvalidArgument("bidirectional dims (char-token, sentence) must be even");
    }

    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

template <class T>
struct ModelParams {
    ModelDims dims;
    EmbeddingTable<T> token_emb;
    EmbeddingTable<T> char_emb;
    LstmParams<T> char_fwd, char_bwd;
    LstmParams<T> sent_fwd, sent_bwd;
    FeedForwardParams<T> ff;
    TransitionParams<T> chain;

    std::size_t num_labels() const noexcept { return chain.num_labels(); }

    // Visits every trainable tensor in a fixed order.
    template <class F>
    void for_each_tensor(F&& f) {
        f(std::string("token_embeddings"), token_emb.matrix);
        f(std::string("char_embeddings"), char_emb.matrix);
        char_fwd.for_each_tensor("char_lstm.fwd", f);
        char_bwd.for_each_tensor("char_lstm.bwd", f);
        sent_fwd.for_each_tensor("sentence_lstm.fwd", f);
        sent_bwd.for_each_tensor("sentence_lstm.bwd", f);
        ff.for_each_tensor("scorer", f);
        chain.for_each_tensor("chain", f);
    }

    template <class F>
    void for_each_tensor(F&& f) const {
        const_cast<ModelParams*>(this)->for_each_tensor(
            [&](const std::string& name, Tensor2<T>& t) { f(name, static_cast<const Tensor2<T>&>(t)); });
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

template <class T>
ModelParams<T> init_model(const ModelDims& dims, std::size_t token_vocab, std::size_t char_vocab,
                          std::size_t num_labels, bool use_start, Rng& rng) {
    dims.validate();
    if (num_labels == 0) throw InvalidArgument("init_model: no labels");
    ModelParams<T> p;
    p.dims = dims;
    p.token_emb = random_embeddings<T>(token_vocab, dims.token_dim, rng);
    p.char_emb = random_embeddings<T>(char_vocab, dims.char_dim, rng);
    p.char_fwd = init_lstm<T>(dims.char_dim, dims.char_token_dim / 2, rng);
    p.char_bwd = init_lstm<T>(dims.char_dim, dims.char_token_dim / 2, rng);
    p.sent_fwd = init_lstm<T>(dims.hybrid_dim(), dims.sentence_dim / 2, rng);
    p.sent_bwd = init_lstm<T>(dims.hybrid_dim(), dims.sentence_dim / 2, rng);
    p.ff = init_feedforward<T>(dims.sentence_dim, dims.ff_hidden, num_labels, rng);
    p.chain = TransitionParams<T>(num_labels, use_start);
    return p;
}

// Gradient buffers: row-sparse for the embedding tables, dense elsewhere.
template <class T>
struct ModelGrads {
    SparseRowGrad<T> token_emb, char_emb;
    LstmParams<T> char_fwd, char_bwd, sent_fwd, sent_bwd;
    FeedForwardParams<T> ff;
    TransitionParams<T> chain;

    explicit ModelGrads(const ModelParams<T>& p)
        : token_emb(p.token_emb.dim()),
          char_emb(p.char_emb.dim()),
          char_fwd(p.char_fwd.input_dim, p.char_fwd.hidden_dim),
          char_bwd(p.char_bwd.input_dim, p.char_bwd.hidden_dim),
          sent_fwd(p.sent_fwd.input_dim, p.sent_fwd.hidden_dim),
          sent_bwd(p.sent_bwd.input_dim, p.sent_bwd.hidden_dim),
          ff(p.ff.input_dim(), p.ff.w_hidden.cols(), p.ff.num_classes()),
          chain(p.num_labels(), p.chain.use_start) {}

    // Dense tensors in the same order as ModelParams::for_each_tensor, minus embeddings.
    template <class F>
    void for_each_dense(F&& f) {
        char_fwd.for_each_tensor("char_lstm.fwd", f);
        char_bwd.for_each_tensor("char_lstm.bwd", f);
        sent_fwd.for_each_tensor("sentence_lstm.fwd", f);
        sent_bwd.for_each_tensor("sentence_lstm.bwd", f);
        ff.for_each_tensor("scorer", f);
        chain.for_each_tensor("chain", f);
    }
};

// Pairs each dense parameter tensor with its gradient tensor.
template <class T, class F>
void for_each_dense_pair(ModelParams<T>& p, ModelGrads<T>& g, F&& f) {
    std::vector<Tensor2<T>*> grads;
    g.for_each_dense([&](const std::string&, Tensor2<T>& t) { grads.push_back(&t); });
    std::size_t i = 0;
    p.for_each_tensor([&](const std::string& name, Tensor2<T>& t) {
        if (name == "token_embeddings" || name == "char_embeddings") return;
        f(name, t, *grads[i++]);
    });
}

// ---------------------------------------------------------------------------
// Index-encoded abstracts

struct EncodedToken {
    std::size_t token = Vocab::kUnk;
    std::vector<std::size_t> chars;
};

struct EncodedAbstract {
    std::string id;
    std::vector<std::vector<EncodedToken>> sentences;
    LabelSequence labels;  // empty when encoded without a label set
};

// Throws Mismatch for a gold label missing from `labels`.
inline EncodedAbstract encode_abstract(const Abstract& a, const Vocab& vocab, const LabelSet* labels) {
    EncodedAbstract e;
    e.id = a.id;
    for (const auto& s : a.sentences) {
        std::vector<EncodedToken> toks;
        for (const auto& t : s.tokens) toks.push_back({vocab.token_index(t), vocab.char_indices(t)});
        e.sentences.push_back(std::move(toks));
        if (labels) e.labels.push_back(labels->at(s.label));
    }
    return e;
}

inline std::vector<EncodedAbstract> encode_corpus(const std::vector<Abstract>& abstracts, const Vocab& vocab,
                                                  const LabelSet* labels) {
    std::vector<EncodedAbstract> out;
    out.reserve(abstracts.size());
    for (const auto& a : abstracts) out.push_back(encode_abstract(a, vocab, labels));
    return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace detail {

template <class T>
struct TokenCache {
    BiLstmCache<T> chars;
    Vec<T> mask;  // dropout on the hybrid embedding
};

template <class T>
struct SentenceCache {
    std::vector<TokenCache<T>> tokens;
    BiLstmCache<T> lstm;
    Vec<T> mask;  // dropout on the sentence vector
    FeedForwardCache<T> scorer;
};

template <class T>
void scale_inplace(Vec<T>& v, const Vec<T>& mask) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mask[i];
}

template <class T>
Vec<T> encode_sentence(const ModelParams<T>& p, const std::vector<EncodedToken>& sentence, SentenceCache<T>* cache,
                       DropoutContext* dropout) {
    if (sentence.empty()) throw InvalidArgument("encode_sentence: empty sentence");
    const bool train = dropout && dropout->rate > 0.0;
    std::vector<Vec<T>> hybrid;
    hybrid.reserve(sentence.size());
    if (cache) cache->tokens.assign(sentence.size(), {});
    for (std::size_t t = 0; t < sentence.size(); ++t) {
        const auto& tok = sentence[t];
        Vec<T> c = char_token_embed<T>(p.char_fwd, p.char_bwd, tok.chars, p.char_emb,
                                       cache ? &cache->tokens[t].chars : nullptr);
        Vec<T> e = concat<T>(c, p.token_emb.row(tok.token));
        if (train) {
            auto mask = dropout_mask<T>(e.size(), dropout->rate, *dropout->rng);
            scale_inplace(e, mask);
            if (cache) cache->tokens[t].mask = std::move(mask);
        }
        hybrid.push_back(std::move(e));
    }
    Vec<T> s = sentence_encode<T>(p.sent_fwd, p.sent_bwd, hybrid, cache ? &cache->lstm : nullptr);
    if (train) {
        auto mask = dropout_mask<T>(s.size(), dropout->rate, *dropout->rng);
        scale_inplace(s, mask);
        if (cache) cache->mask = std::move(mask);
    }
    return label_scores<T>(p.ff, s, cache ? &cache->scorer : nullptr);
}

template <class T>
void backward_sentence(const ModelParams<T>& p, const std::vector<EncodedToken>& sentence,
                       const SentenceCache<T>& cache, std::span<const T> d_a, ModelGrads<T>& g) {
    Vec<T> d_s = label_scores_backward<T>(p.ff, cache.scorer, d_a, g.ff);
    if (!cache.mask.empty()) scale_inplace(d_s, cache.mask);
    auto d_hybrid = bilstm_backward<T>(p.sent_fwd, p.sent_bwd, cache.lstm, d_s, g.sent_fwd, g.sent_bwd);
    const std::size_t dc = p.dims.char_token_dim;
    for (std::size_t t = 0; t < sentence.size(); ++t) {
        auto& d_e = d_hybrid[t];
        if (!cache.tokens[t].mask.empty()) scale_inplace(d_e, cache.tokens[t].mask);
        if (sentence[t].token != Vocab::kPad) {
            auto row = g.token_emb.row(sentence[t].token);
            for (std::size_t k = 0; k < row.size(); ++k) row[k] += d_e[dc + k];
        }
        std::span<const T> d_c(d_e.data(), dc);
        char_token_embed_backward<T>(p.char_fwd, p.char_bwd, sentence[t].chars, cache.tokens[t].chars, d_c, g.char_fwd,
                                     g.char_bwd, g.char_emb);
    }
}

}  // namespace detail

// Label log-probabilities of every sentence, evaluation mode.
template <class T>
EmissionMatrix<T> compute_emissions(const ModelParams<T>& p, const EncodedAbstract& a) {
    EmissionMatrix<T> em(a.sentences.size(), p.num_labels());
    for (std::size_t i = 0; i < a.sentences.size(); ++i) {
        auto row = detail::encode_sentence<T>(p, a.sentences[i], nullptr, nullptr);
        std::copy(row.begin(), row.end(), em.row(i).begin());
    }
    return em;
}

template <class T>
Decoded<T> predict(const ModelParams<T>& p, const EncodedAbstract& a) {
    return viterbi_decode(compute_emissions(p, a), p.chain);
}

// Gold-sequence negative log-likelihood without dropout.
template <class T>
T abstract_loss(const ModelParams<T>& p, const EncodedAbstract& a) {
    auto em = compute_emissions(p, a);
    return log_partition(em, p.chain) - sequence_score(em, p.chain, a.labels);
}

// Loss of one abstract with gradients accumulated into `g`; dropout applies
// when `dropout` is non-null with a positive rate.
template <class T>
T abstract_loss_grad(const ModelParams<T>& p, const EncodedAbstract& a, ModelGrads<T>& g,
                     DropoutContext* dropout = nullptr) {
    const std::size_t n = a.sentences.size();
    if (n == 0) throw InvalidArgument("abstract_loss_grad: abstract has no sentences");
    std::vector<detail::SentenceCache<T>> caches(n);
    EmissionMatrix<T> em(n, p.num_labels());
    for (std::size_t i = 0; i < n; ++i) {
        auto row = detail::encode_sentence<T>(p, a.sentences[i], &caches[i], dropout);
        std::copy(row.begin(), row.end(), em.row(i).begin());
    }
    auto chain = nll_loss(em, p.chain, a.labels);
    for (std::size_t j = 0; j < chain.d_transitions.size(); ++j)
        g.chain.transitions.flat()[j] += chain.d_transitions.flat()[j];
    for (std::size_t j = 0; j < chain.d_start.size(); ++j) g.chain.start.flat()[j] += chain.d_start.flat()[j];
    for (std::size_t i = 0; i < n; ++i)
        detail::backward_sentence<T>(p, a.sentences[i], caches[i], chain.d_emissions.row(i), g);
    return chain.loss;
}

// Builds grad_check entries for every parameter tensor, densifying the
// embedding gradients. `dense_store` owns the densified buffers.
template <class T>
std::vector<GradCheckEntry<T>> grad_check_entries(ModelParams<T>& p, ModelGrads<T>& g,
                                                  std::vector<Tensor2<T>>& dense_store) {
    dense_store.clear();
    dense_store.reserve(2);
    dense_store.push_back(g.token_emb.dense(p.token_emb.vocab_size()));
    dense_store.push_back(g.char_emb.dense(p.char_emb.vocab_size()));
    std::vector<GradCheckEntry<T>> entries;
    entries.push_back({"token_embeddings", p.token_emb.matrix.flat(), dense_store[0].flat()});
    entries.push_back({"char_embeddings", p.char_emb.matrix.flat(), dense_store[1].flat()});
    for_each_dense_pair(p, g, [&](const std::string& name, Tensor2<T>& t, Tensor2<T>& gt) {
        if (name == "chain.start" && !p.chain.use_start) return;
        entries.push_back({name, t.flat(), gt.flat()});
    });
    return entries;
}

}  // namespace seqsent

#endif  // SEQSENT_MODEL_HPP
