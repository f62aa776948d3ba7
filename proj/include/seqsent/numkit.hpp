#ifndef SEQSENT_NUMKIT_HPP
#define SEQSENT_NUMKIT_HPP

// Dense numeric kernels shared by every layer: a row-major matrix type,
// stable log-sum-exp / softmax, affine maps with their gradients, the
// seeded generator helpers, and a central-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqsent/errors.hpp"

namespace seqsent {

template <class T>
using Vec = std::vector<T>;

// All randomness goes through one explicitly passed engine.
using Rng = std::mt19937_64;

// Uniform draw in [0, 1) from the top 53 bits; identical across standard
// libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw InvalidArgument("uniform_index: empty range");
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

// Fisher-Yates with the portable index draw above.
template <class It>
void shuffle(It first, It last, Rng& rng) {
    auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        std::swap(first[i - 1], first[j]);
    }
}

template <class T>
class Tensor2 {
public:
    Tensor2() = default;
    Tensor2(std::size_t rows, std::size_t cols, T value = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<T> flat() { return data_; }
    std::span<const T> flat() const { return data_; }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool same_shape(const Tensor2& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
    }

    void fill_uniform(Rng& rng, double lo, double hi) {
        for (auto& v : data_) v = static_cast<T>(uniform(rng, lo, hi));
    }

    friend bool operator==(const Tensor2&, const Tensor2&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// Reductions and normalizers

template <class T>
T logsumexp(std::span<const T> v) {
    if (v.empty()) throw InvalidArgument("logsumexp: empty vector");
    T hi = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(hi)) return hi;
    T sum = 0;
    for (T x : v) sum += std::exp(x - hi);
    return hi + std::log(sum);
}

template <class T>
T logsumexp(const Vec<T>& v) {
    return logsumexp(std::span<const T>(v));
}

template <class T>
Vec<T> softmax(std::span<const T> v) {
    if (v.empty()) throw InvalidArgument("softmax: empty vector");
    T hi = *std::max_element(v.begin(), v.end());
    Vec<T> out(v.size());
    T sum = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - hi);
        sum += out[i];
    }
    for (auto& x : out) x /= sum;
    return out;
}

template <class T>
Vec<T> softmax(const Vec<T>& v) {
    return softmax(std::span<const T>(v));
}

template <class T>
Vec<T> log_softmax(std::span<const T> v) {
    T z = logsumexp(v);
    Vec<T> out(v.begin(), v.end());
    for (auto& x : out) x -= z;
    return out;
}

template <class T>
Vec<T> log_softmax(const Vec<T>& v) {
    return log_softmax(std::span<const T>(v));
}

// Gradient of L through out = log_softmax(logits): d_logits = d_out - softmax * sum(d_out).
template <class T>
Vec<T> log_softmax_backward(std::span<const T> log_probs, std::span<const T> d_out) {
    T total = 0;
    for (T g : d_out) total += g;
    Vec<T> d(log_probs.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = d_out[i] - std::exp(log_probs[i]) * total;
    return d;
}

template <class T>
T sigmoid(T x) {
    if (x >= 0) return T(1) / (T(1) + std::exp(-x));
    T e = std::exp(x);
    return e / (T(1) + e);
}

template <class T>
T squared_norm(std::span<const T> v) {
    T s = 0;
    for (T x : v) s += x * x;
    return s;
}

template <class T>
bool all_finite(std::span<const T> v) {
    return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
}

template <class T>
Vec<T> concat(std::span<const T> a, std::span<const T> b) {
    Vec<T> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// ---------------------------------------------------------------------------
// Affine maps. Weights are stored (in x out), so y = x W + b.

template <class T>
void affine(std::span<const T> x, const Tensor2<T>& w, std::span<const T> b, std::span<T> y) {
    if (x.size() != w.rows() || y.size() != w.cols() || b.size() != w.cols())
        throw InvalidArgument("affine: dimension mismatch");
    std::copy(b.begin(), b.end(), y.begin());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const T xk = x[k];
        if (xk == T(0)) continue;
        auto wr = w.row(k);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += xk * wr[j];
    }
}

// Accumulates dW += x^T dy, db += dy and dx += W dy (dx may be empty).
template <class T>
void affine_backward(std::span<const T> x, const Tensor2<T>& w, std::span<const T> dy,
                     Tensor2<T>& dw, std::span<T> db, std::span<T> dx) {
    for (std::size_t j = 0; j < dy.size(); ++j) db[j] += dy[j];
    for (std::size_t k = 0; k < x.size(); ++k) {
        auto wr = w.row(k);
        auto dwr = dw.row(k);
        const T xk = x[k];
        T acc = 0;
        for (std::size_t j = 0; j < dy.size(); ++j) {
            dwr[j] += xk * dy[j];
            acc += wr[j] * dy[j];
        }
        if (!dx.empty()) dx[k] += acc;
    }
}

// Glorot-style uniform bound for a (fan_in x fan_out) matrix.
inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// ---------------------------------------------------------------------------
// Gradient checking

template <class T>
struct GradCheckEntry {
    std::string name;
    std::span<T> values;           // perturbed in place, restored afterwards
    std::span<const T> analytic;   // same length as values
};

struct GradCheckReport {
    std::map<std::string, double> max_rel_error;  // per parameter tensor
    std::string worst;
    double worst_error = 0.0;
    bool pass = false;
};

inline double relative_error(double analytic, double numeric) {
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

// Compares every analytic component against (f(θ+ε) − f(θ−ε)) / 2ε.
// `loss` must be deterministic and read the current values of the entries.
template <class T, class LossFn>
GradCheckReport grad_check(LossFn&& loss, std::span<const GradCheckEntry<T>> entries, T epsilon,
                           double tol) {
    if (!(epsilon > T(0)) || epsilon > T(1e-2))
        throw InvalidArgument("grad_check: epsilon must lie in (0, 1e-2]");
    GradCheckReport report;
    for (const auto& e : entries) {
        if (e.values.size() != e.analytic.size())
            throw InvalidArgument("grad_check: gradient size mismatch for " + e.name);
        double worst = 0.0;
        for (std::size_t i = 0; i < e.values.size(); ++i) {
            const T saved = e.values[i];
            e.values[i] = saved + epsilon;
            const T up = loss();
            e.values[i] = saved - epsilon;
            const T down = loss();
            e.values[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NumericFailure("grad_check: non-finite loss while perturbing " + e.name);
            const double numeric = static_cast<double>((up - down) / (T(2) * epsilon));
            worst = std::max(worst, relative_error(static_cast<double>(e.analytic[i]), numeric));
        }
        report.max_rel_error[e.name] = worst;
        if (report.worst.empty() || worst > report.worst_error) {
            report.worst = e.name;
            report.worst_error = worst;
        }
    }
    report.pass = report.worst_error < tol;
    return report;
}

template <class T, class LossFn>
GradCheckReport grad_check(LossFn&& loss, const std::vector<GradCheckEntry<T>>& entries, T epsilon,
                           double tol) {
    return grad_check<T>(std::forward<LossFn>(loss), std::span<const GradCheckEntry<T>>(entries),
                         epsilon, tol);
}

}  // namespace seqsent

#endif  // SEQSENT_NUMKIT_HPP
