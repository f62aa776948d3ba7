#ifndef SEQSENT_TRAIN_HPP
#define SEQSENT_TRAIN_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "seqsent/checkpoint.hpp"
#include "seqsent/corpus.hpp"
#include "seqsent/dropout.hpp"
#include "seqsent/embed.hpp"
#include "seqsent/eval.hpp"
#include "seqsent/model.hpp"

namespace seqsent {

template <class T>
void zero_grads(ModelGrads<T>& g) {
    g.token_emb.clear();
    g.char_emb.clear();
    g.for_each_dense([](const std::string&, Tensor2<T>& t) { t.fill(T(0)); });
}

// Global L2 norm over every gradient component, PAD rows excluded.
template <class T>
double grad_norm(ModelGrads<T>& g) {
    double sq = 0.0;
    for (auto* sparse : {&g.token_emb, &g.char_emb})
        for (const auto& [r, row] : sparse->rows)
            if (r != Vocab::kPad) sq += static_cast<double>(squared_norm<T>(row));
    g.for_each_dense([&](const std::string&, Tensor2<T>& t) { sq += static_cast<double>(squared_norm<T>(t.flat())); });
    return std::sqrt(sq);
}

// Clips the global gradient norm to `clip`, then θ ← θ − lr·grad everywhere.
// Returns the norm before clipping.
template <class T>
double sgd_update(ModelParams<T>& p, ModelGrads<T>& g, double lr, double clip) {
    const double norm = grad_norm(g);
    const double scale = norm > clip ? clip / norm : 1.0;
    const T step = static_cast<T>(lr * scale);

    auto sparse_step = [&](EmbeddingTable<T>& table, const SparseRowGrad<T>& sg) {
        if (sg.dim != table.dim()) throw InvalidArgument("sgd_update: embedding gradient shape mismatch");
        for (const auto& [r, row] : sg.rows) {
            if (r == Vocab::kPad) continue;
            if (r >= table.vocab_size()) throw InvalidArgument("sgd_update: embedding row out of range");
            auto dst = table.row(r);
            for (std::size_t k = 0; k < row.size(); ++k) dst[k] -= step * row[k];
        }
    };
    sparse_step(p.token_emb, g.token_emb);
    sparse_step(p.char_emb, g.char_emb);
    for_each_dense_pair(p, g, [&](const std::string& name, Tensor2<T>& t, Tensor2<T>& gt) {
        if (!t.same_shape(gt)) throw InvalidArgument("sgd_update: shape mismatch for " + name);
        auto v = t.flat();
        auto d = gt.flat();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= step * d[i];
    });
    return norm;
}

template <class T>
std::vector<LabelSequence> predict_all(const ModelParams<T>& p, const std::vector<EncodedAbstract>& data) {
    std::vector<LabelSequence> out;
    out.reserve(data.size());
    for (const auto& a : data) out.push_back(predict(p, a).labels);
    return out;
}

template <class T>
MetricsTable evaluate(const ModelParams<T>& p, const std::vector<EncodedAbstract>& data, const LabelSet& labels) {
    std::vector<LabelSequence> golds;
    golds.reserve(data.size());
    for (const auto& a : data) golds.push_back(a.labels);
    return per_label_prf(predict_all(p, data), golds, labels);
}

struct EpochLog {
    std::size_t epoch = 0;                // 1-based
    double train_loss = 0.0;              // mean NLL per abstract
    double validation_f1 = std::numeric_limits<double>::quiet_NaN();  // weighted F1, NaN without validation
};

template <class T>
struct TrainResult {
    Checkpoint<T> checkpoint;  // parameters of the selected epoch
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
};

// One gradient step per abstract, abstracts reshuffled each epoch. The
// returned checkpoint holds the epoch with the best validation weighted F1
// (the last epoch when `validation` is empty).
template <class T>
TrainResult<T> train(const TrainConfig& config, const Corpus& train_set, const std::vector<Abstract>& validation,
                     const std::function<void(const EpochLog&, const ModelParams<T>&)>& on_epoch = {}) {
    config.validate();
    if (train_set.abstracts.empty()) throw InvalidArgument("train: empty training set");

    TrainResult<T> result;
    auto& ck = result.checkpoint;
    ck.config = config;
    ck.labels = train_set.labels;
    ck.vocab = build_vocab(train_set.abstracts, config.min_count);

    Rng rng(config.seed);
    ck.params = init_model<T>(config.dims, ck.vocab.token_count(), ck.vocab.char_count(), ck.labels.size(),
                              config.start_scores, rng);
    if (!config.pretrained.empty())
        ck.params.token_emb = load_pretrained<T>(config.pretrained, ck.vocab, config.dims.token_dim, rng).table;

    auto train_data = encode_corpus(train_set.abstracts, ck.vocab, &ck.labels);
    auto valid_data = encode_corpus(validation, ck.vocab, &ck.labels);

    ModelParams<T>& params = ck.params;
    ModelParams<T> best = params;
    double best_f1 = -1.0;
    std::size_t since_best = 0;
    ModelGrads<T> grads(params);
    DropoutContext dropout{config.dropout, &rng};
    std::vector<std::size_t> order(train_data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (std::size_t idx : order) {
            const auto& a = train_data[idx];
            zero_grads(grads);
            T loss = abstract_loss_grad(params, a, grads, &dropout);
            if (!std::isfinite(loss)) throw NumericFailure("non-finite loss on abstract '" + a.id + "'");
            sgd_update(params, grads, config.learning_rate, config.clip);
            total += static_cast<double>(loss);
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = total / static_cast<double>(train_data.size());
        if (!valid_data.empty()) entry.validation_f1 = evaluate(params, valid_data, ck.labels).weighted_f1();
        result.log.push_back(entry);
        if (on_epoch) on_epoch(entry, params);

        if (valid_data.empty()) {
            best = params;
            result.best_epoch = epoch;
            continue;
        }
        if (entry.validation_f1 > best_f1) {
            best_f1 = entry.validation_f1;
            best = params;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (config.patience > 0 && ++since_best >= config.patience) {
            break;
        }
    }
    params = std::move(best);
    return result;
}

}  // namespace seqsent

#endif  // SEQSENT_TRAIN_HPP
