#ifndef SEQSENT_EVAL_HPP
#define SEQSENT_EVAL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "seqsent/chain.hpp"
#include "seqsent/corpus.hpp"
#include "seqsent/errors.hpp"

namespace seqsent {

struct LabelCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

// Fractions in [0, 1]; rendering multiplies by 100.
struct LabelMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct MetricsTable {
    std::vector<LabelMetrics> rows;
    LabelMetrics total;  // support-weighted P and R, F1 of those two

    double weighted_f1() const noexcept { return total.f1; }
};

// 2PR/(P+R), zero when P+R = 0.
inline double harmonic_f1(double precision, double recall) {
    double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

inline MetricsTable metrics_from_counts(const std::vector<std::string>& names, const std::vector<LabelCounts>& counts) {
    if (names.size() != counts.size()) throw InvalidArgument("metrics: label/count length mismatch");
    MetricsTable table;
    table.total.label = "total";
    double wp = 0.0, wr = 0.0;
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& c = counts[k];
        LabelMetrics m;
        m.label = names[k];
        m.support = c.tp + c.fn;
        m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
        m.recall = m.support > 0 ? static_cast<double>(c.tp) / static_cast<double>(m.support) : 0.0;
        m.f1 = harmonic_f1(m.precision, m.recall);
        wp += m.precision * static_cast<double>(m.support);
        wr += m.recall * static_cast<double>(m.support);
        table.total.support += m.support;
        table.rows.push_back(std::move(m));
    }
    if (table.total.support > 0) {
        table.total.precision = wp / static_cast<double>(table.total.support);
        table.total.recall = wr / static_cast<double>(table.total.support);
    }
    table.total.f1 = harmonic_f1(table.total.precision, table.total.recall);
    return table;
}

inline MetricsTable per_label_prf(const std::vector<LabelSequence>& predictions, const std::vector<LabelSequence>& golds,
                                  const std::vector<std::string>& label_names) {
    if (predictions.size() != golds.size()) throw InvalidArgument("per_label_prf: corpus length mismatch");
    std::vector<LabelCounts> counts(label_names.size());
    for (std::size_t a = 0; a < golds.size(); ++a) {
        if (predictions[a].size() != golds[a].size())
            throw InvalidArgument("per_label_prf: sequence length mismatch in abstract " + std::to_string(a));
        for (std::size_t i = 0; i < golds[a].size(); ++i) {
            std::size_t p = predictions[a][i], g = golds[a][i];
            if (p >= counts.size() || g >= counts.size()) throw InvalidArgument("per_label_prf: label out of range");
            if (p == g) {
                ++counts[g].tp;
            } else {
                ++counts[p].fp;
                ++counts[g].fn;
            }
        }
    }
    return metrics_from_counts(label_names, counts);
}

inline MetricsTable per_label_prf(const std::vector<LabelSequence>& predictions, const std::vector<LabelSequence>& golds,
                                  const LabelSet& labels) {
    return per_label_prf(predictions, golds, labels.names());
}

inline double sentence_accuracy(const std::vector<LabelSequence>& predictions, const std::vector<LabelSequence>& golds) {
    std::size_t hit = 0, total = 0;
    for (std::size_t a = 0; a < golds.size(); ++a)
        for (std::size_t i = 0; i < golds[a].size(); ++i, ++total) hit += predictions.at(a).at(i) == golds[a][i];
    return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

namespace detail {

inline std::string format(const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

}  // namespace detail

// Fixed layout: label column padded to the longest name, one decimal.
inline std::string render_table(const MetricsTable& t) {
    std::size_t width = 5;
    for (const auto& r : t.rows) width = std::max(width, r.label.size());
    const int w = static_cast<int>(width);
    std::string out = detail::format("%-*s %9s %9s %9s %9s\n", w, "label", "precision", "recall", "f1-score", "support");
    auto line = [&](const LabelMetrics& m) {
        out += detail::format("%-*s %9.1f %9.1f %9.1f %9zu\n", w, m.label.c_str(), 100.0 * m.precision,
                              100.0 * m.recall, 100.0 * m.f1, m.support);
    };
    for (const auto& r : t.rows) line(r);
    line(t.total);
    return out;
}

// One `<label>.<field>=<value>` line per cell; aggregate row under `total`.
inline std::string render_kv(const MetricsTable& t) {
    std::string out;
    auto emit = [&](const LabelMetrics& m) {
        out += detail::format("%s.precision=%.4f\n", m.label.c_str(), 100.0 * m.precision);
        out += detail::format("%s.recall=%.4f\n", m.label.c_str(), 100.0 * m.recall);
        out += detail::format("%s.f1=%.4f\n", m.label.c_str(), 100.0 * m.f1);
        out += detail::format("%s.support=%zu\n", m.label.c_str(), m.support);
    };
    for (const auto& r : t.rows) emit(r);
    emit(t.total);
    return out;
}

}  // namespace seqsent

#endif  // SEQSENT_EVAL_HPP
