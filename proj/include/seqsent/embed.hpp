#ifndef SEQSENT_EMBED_HPP
#define SEQSENT_EMBED_HPP

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqsent/corpus.hpp"
#include "seqsent/errors.hpp"
#include "seqsent/numkit.hpp"

namespace seqsent {

// Token keys are ASCII-lowercased; character keys keep their case.
inline std::string lowercase_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// Index 0 is UNK and index 1 is PAD in both the token and the character maps.
class Vocab {
public:
    static constexpr std::size_t kUnk = 0;
    static constexpr std::size_t kPad = 1;
    static constexpr std::size_t kReserved = 2;
    static constexpr std::string_view kUnkToken = "<unk>";
    static constexpr std::string_view kPadToken = "<pad>";

    Vocab() : tokens_{std::string(kUnkToken), std::string(kPadToken)}, chars_{0, 0} {}

    // `key` must already be lowercased; returns the existing index if present.
    std::size_t add_token(const std::string& key) {
        auto [it, inserted] = token_index_.emplace(key, tokens_.size());
        if (inserted) tokens_.push_back(key);
        return it->second;
    }

    std::size_t add_char(char32_t c) {
        auto [it, inserted] = char_index_.emplace(c, chars_.size());
        if (inserted) chars_.push_back(c);
        return it->second;
    }

    // Case-folds the token before lookup; unseen tokens map to UNK.
    std::size_t token_index(std::string_view token) const {
        auto it = token_index_.find(lowercase_ascii(token));
        return it == token_index_.end() ? kUnk : it->second;
    }

    std::size_t char_index(char32_t c) const {
        auto it = char_index_.find(c);
        return it == char_index_.end() ? kUnk : it->second;
    }

    std::vector<std::size_t> char_indices(std::string_view token) const {
        std::vector<std::size_t> out;
        for (char32_t c : split_chars(token)) out.push_back(char_index(c));
        return out;
    }

    bool contains_token(std::string_view key) const { return token_index_.count(std::string(key)) > 0; }

    std::size_t token_count() const noexcept { return tokens_.size(); }
    std::size_t char_count() const noexcept { return chars_.size(); }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    char32_t character(std::size_t i) const { return chars_.at(i); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::vector<char32_t>& chars() const noexcept { return chars_; }

    friend bool operator==(const Vocab& a, const Vocab& b) {
        return a.tokens_ == b.tokens_ && a.chars_ == b.chars_;
    }

private:
    std::vector<std::string> tokens_;
    std::vector<char32_t> chars_;  // entries 0 and 1 are placeholders
    std::unordered_map<std::string, std::size_t> token_index_;
    std::unordered_map<char32_t, std::size_t> char_index_;
};

namespace detail {

// Frequency-descending order, ties by first occurrence.
template <class Key>
std::vector<Key> rank_by_frequency(const std::vector<Key>& first_seen,
                                   const std::unordered_map<Key, std::size_t>& counts,
                                   std::size_t min_count) {
    std::vector<Key> keys;
    for (const auto& k : first_seen)
        if (counts.at(k) >= min_count) keys.push_back(k);
    std::stable_sort(keys.begin(), keys.end(),
                     [&](const Key& a, const Key& b) { return counts.at(a) > counts.at(b); });
    return keys;
}

}  // namespace detail

inline Vocab build_vocab(const std::vector<Abstract>& corpus, std::size_t min_count = 1) {
    if (corpus.empty()) throw InvalidArgument("build_vocab: empty corpus");
    std::unordered_map<std::string, std::size_t> token_counts;
    std::vector<std::string> token_order;
    std::unordered_map<char32_t, std::size_t> char_counts;
    std::vector<char32_t> char_order;
    for (const auto& a : corpus) {
        for (const auto& s : a.sentences) {
            for (const auto& tok : s.tokens) {
                auto key = lowercase_ascii(tok);
                if (token_counts[key]++ == 0) token_order.push_back(key);
                for (char32_t c : split_chars(tok))
                    if (char_counts[c]++ == 0) char_order.push_back(c);
            }
        }
    }
    if (token_order.empty()) throw InvalidArgument("build_vocab: corpus has no tokens");
    Vocab v;
    for (const auto& k : detail::rank_by_frequency(token_order, token_counts, std::max<std::size_t>(min_count, 1)))
        v.add_token(k);
    for (char32_t c : detail::rank_by_frequency(char_order, char_counts, 1)) v.add_char(c);
    return v;
}

template <class T>
struct EmbeddingTable {
    Tensor2<T> matrix;  // vocab size x dim

    EmbeddingTable() = default;
    EmbeddingTable(std::size_t vocab_size, std::size_t dim) : matrix(vocab_size, dim) {}

    std::size_t vocab_size() const noexcept { return matrix.rows(); }
    std::size_t dim() const noexcept { return matrix.cols(); }
    std::span<const T> row(std::size_t i) const { return matrix.row(i); }
    std::span<T> row(std::size_t i) { return matrix.row(i); }

    friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

// Gradient for an embedding table restricted to the rows a step touched.
template <class T>
struct SparseRowGrad {
    std::size_t dim = 0;
    std::map<std::size_t, Vec<T>> rows;

    SparseRowGrad() = default;
    explicit SparseRowGrad(std::size_t d) : dim(d) {}

    std::span<T> row(std::size_t i) {
        auto [it, inserted] = rows.try_emplace(i);
        if (inserted) it->second.assign(dim, T(0));
        return it->second;
    }

    void clear() { rows.clear(); }

    Tensor2<T> dense(std::size_t vocab_size) const {
        Tensor2<T> out(vocab_size, dim);
        for (const auto& [r, g] : rows) std::copy(g.begin(), g.end(), out.row(r).begin());
        return out;
    }
};

inline constexpr double kEmbeddingInitRange = 0.1;

// Uniform [-0.1, 0.1] rows with a zero PAD row.
template <class T>
EmbeddingTable<T> random_embeddings(std::size_t vocab_size, std::size_t dim, Rng& rng) {
    EmbeddingTable<T> t(vocab_size, dim);
    t.matrix.fill_uniform(rng, -kEmbeddingInitRange, kEmbeddingInitRange);
    if (vocab_size > Vocab::kPad)
        for (auto& x : t.row(Vocab::kPad)) x = T(0);
    return t;
}

template <class T>
struct PretrainedLoad {
    EmbeddingTable<T> table;
    std::size_t matched = 0;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        std::size_t s = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > s) out.push_back(line.substr(s, i - s));
    }
    return out;
}

template <class N>
bool parse_number(std::string_view s, N& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

// Reads `token v1 ... v_dim` lines. Tokens absent from the file keep their
// random initialization; a two-integer header line (word2vec style) is skipped.
template <class T>
PretrainedLoad<T> load_pretrained(std::istream& in, const Vocab& vocab, std::size_t dim, Rng& rng) {
    PretrainedLoad<T> result{random_embeddings<T>(vocab.token_count(), dim, rng), 0};
    std::vector<bool> seen(vocab.token_count(), false);
    std::size_t file_fields = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() == 2) {
            long long a = 0, b = 0;
            if (detail::parse_number(fields[0], a) && detail::parse_number(fields[1], b)) continue;
        }
        if (fields.size() < 2) throw ParseError("expected a token followed by values", line_no);
        if (file_fields == 0) {
            file_fields = fields.size();
            if (file_fields != dim + 1)
                throw InvalidArgument("load_pretrained: file has dimension " + std::to_string(file_fields - 1) +
                                      ", expected " + std::to_string(dim));
        } else if (fields.size() != file_fields) {
            throw ParseError("expected " + std::to_string(file_fields) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        std::vector<T> values(dim);
        for (std::size_t k = 0; k < dim; ++k)
            if (!detail::parse_number(fields[k + 1], values[k]))
                throw ParseError("non-numeric value '" + std::string(fields[k + 1]) + "'", line_no);

        auto key = lowercase_ascii(fields[0]);
        if (!vocab.contains_token(key)) continue;
        std::size_t idx = vocab.token_index(key);
        if (idx < Vocab::kReserved || seen[idx]) continue;
        seen[idx] = true;
        std::copy(values.begin(), values.end(), result.table.row(idx).begin());
        ++result.matched;
    }
    return result;
}

template <class T>
PretrainedLoad<T> load_pretrained(const std::string& path, const Vocab& vocab, std::size_t dim, Rng& rng) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    return load_pretrained<T>(in, vocab, dim, rng);
}

template <class T>
std::span<const T> lookup_token(const EmbeddingTable<T>& table, const Vocab& vocab, std::string_view token) {
    return table.row(vocab.token_index(token));
}

}  // namespace seqsent

#endif  // SEQSENT_EMBED_HPP
