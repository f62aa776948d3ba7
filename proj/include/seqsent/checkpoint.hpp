#ifndef SEQSENT_CHECKPOINT_HPP
#define SEQSENT_CHECKPOINT_HPP

// Checkpoint container, all integers little-endian:
//
//   magic      8 bytes  "SEQSENT1"
//   version    u32
//   config     u64 byte length + UTF-8 "key=value\n" lines
//   labels     u32 count, then (u32 length + bytes) per label
//   tokens     u32 count, then (u32 length + bytes) per token, reserved entries included
//   chars      u32 count, then (u32 length + UTF-8 bytes) per character, reserved entries included
//   tensors    u32 count, then per tensor: u32 name length + name, u32 rows,
//              u32 cols, rows*cols IEEE-754 binary32 values

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "seqsent/corpus.hpp"
#include "seqsent/embed.hpp"
#include "seqsent/errors.hpp"
#include "seqsent/model.hpp"

namespace seqsent {

inline constexpr char kCheckpointMagic[8] = {'S', 'E', 'Q', 'S', 'E', 'N', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainConfig {
    double learning_rate = 0.01;
    double clip = 5.0;
    double dropout = 0.5;
    std::size_t epochs = 20;
    std::uint64_t seed = 1;
    ModelDims dims;
    bool start_scores = true;
    std::string pretrained;  // empty: random token embeddings
    std::size_t min_count = 1;
    std::size_t patience = 10;  // epochs without validation improvement; 0 disables

    void validate() const {
        if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
        if (!(dropout >= 0.0) || dropout >= 1.0) throw InvalidArgument("dropout must lie in [0, 1)");
        if (!(clip > 0.0)) throw InvalidArgument("clip norm must be positive");
        dims.validate();
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string config_to_text(const TrainConfig& c) {
    std::ostringstream o;
    o << "char_dim=" << c.dims.char_dim << '\n'
      << "char_token_dim=" << c.dims.char_token_dim << '\n'
      << "clip=" << detail::format_double(c.clip) << '\n'
      << "dropout=" << detail::format_double(c.dropout) << '\n'
      << "epochs=" << c.epochs << '\n'
      << "ff_hidden=" << c.dims.ff_hidden << '\n'
      << "learning_rate=" << detail::format_double(c.learning_rate) << '\n'
      << "min_count=" << c.min_count << '\n'
      << "patience=" << c.patience << '\n'
      << "pretrained=" << c.pretrained << '\n'
      << "seed=" << c.seed << '\n'
      << "sentence_dim=" << c.dims.sentence_dim << '\n'
      << "start_scores=" << (c.start_scores ? 1 : 0) << '\n'
      << "token_dim=" << c.dims.token_dim << '\n';
    return o.str();
}

inline TrainConfig config_from_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("config line without '='", n);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(std::string("config is missing '") + key + "'", 0);
        return it->second;
    };
    auto get_size = [&](const char* key) { return static_cast<std::size_t>(std::stoull(get(key))); };
    TrainConfig c;
    c.dims.char_dim = get_size("char_dim");
    c.dims.char_token_dim = get_size("char_token_dim");
    c.dims.token_dim = get_size("token_dim");
    c.dims.sentence_dim = get_size("sentence_dim");
    c.dims.ff_hidden = get_size("ff_hidden");
    c.clip = std::stod(get("clip"));
    c.dropout = std::stod(get("dropout"));
    c.learning_rate = std::stod(get("learning_rate"));
    c.epochs = get_size("epochs");
    c.min_count = get_size("min_count");
    c.patience = get_size("patience");
    c.pretrained = get("pretrained");
    c.seed = std::stoull(get("seed"));
    c.start_scores = get("start_scores") == "1";
    return c;
}

template <class T>
struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    TrainConfig config;
    LabelSet labels;
    Vocab vocab;
    ModelParams<T> params;
};

namespace detail {

inline void put_u32(std::ostream& o, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    o.write(b, 4);
}

inline void put_u64(std::ostream& o, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    o.write(b, 8);
}

inline void put_string(std::ostream& o, const std::string& s) {
    put_u32(o, static_cast<std::uint32_t>(s.size()));
    o.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint64_t get_uint(std::istream& in, int bytes) {
    char b[8];
    if (!in.read(b, bytes)) throw ParseError("checkpoint truncated", 0);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_uint(in, 4)); }

inline std::string get_bytes(std::istream& in, std::uint64_t n) {
    if (n > (std::uint64_t{1} << 32)) throw ParseError("checkpoint field too large", 0);
    std::string s(n, '\0');
    if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw ParseError("checkpoint truncated", 0);
    return s;
}

inline std::string get_string(std::istream& in) { return get_bytes(in, get_u32(in)); }

}  // namespace detail

template <class T>
void save_checkpoint(std::ostream& out, const Checkpoint<T>& ck) {
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::put_u32(out, ck.version);
    const std::string cfg = config_to_text(ck.config);
    detail::put_u64(out, cfg.size());
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

    detail::put_u32(out, static_cast<std::uint32_t>(ck.labels.size()));
    for (const auto& l : ck.labels.names()) detail::put_string(out, l);
    detail::put_u32(out, static_cast<std::uint32_t>(ck.vocab.token_count()));
    for (const auto& t : ck.vocab.tokens()) detail::put_string(out, t);
    detail::put_u32(out, static_cast<std::uint32_t>(ck.vocab.char_count()));
    for (std::size_t i = 0; i < ck.vocab.char_count(); ++i)
        detail::put_string(out, i < Vocab::kReserved ? std::string() : encode_utf8(ck.vocab.character(i)));

    std::vector<std::pair<std::string, const Tensor2<T>*>> tensors;
    ck.params.for_each_tensor([&](const std::string& name, const Tensor2<T>& t) { tensors.emplace_back(name, &t); });
    detail::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        detail::put_string(out, name);
        detail::put_u32(out, static_cast<std::uint32_t>(t->rows()));
        detail::put_u32(out, static_cast<std::uint32_t>(t->cols()));
        for (T v : t->flat()) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    if (!out) throw std::runtime_error("checkpoint write failed");
}

template <class T>
Checkpoint<T> load_checkpoint(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kCheckpointMagic))
        throw ParseError("not a checkpoint (bad magic)", 0);
    Checkpoint<T> ck;
    ck.version = detail::get_u32(in);
    if (ck.version != kCheckpointVersion)
        throw ParseError("unsupported checkpoint version " + std::to_string(ck.version), 0);
    ck.config = config_from_text(detail::get_bytes(in, detail::get_uint(in, 8)));

    for (std::uint32_t n = detail::get_u32(in), i = 0; i < n; ++i) ck.labels.add(detail::get_string(in));
    std::uint32_t ntok = detail::get_u32(in);
    for (std::uint32_t i = 0; i < ntok; ++i) {
        auto s = detail::get_string(in);
        if (i >= Vocab::kReserved) ck.vocab.add_token(s);
    }
    std::uint32_t nchar = detail::get_u32(in);
    for (std::uint32_t i = 0; i < nchar; ++i) {
        auto s = detail::get_string(in);
        if (i < Vocab::kReserved) continue;
        auto cps = split_chars(s);
        if (cps.size() != 1) throw ParseError("checkpoint character entry is not a single scalar", 0);
        ck.vocab.add_char(cps[0]);
    }
    if (ck.vocab.token_count() != ntok || ck.vocab.char_count() != nchar)
        throw ParseError("checkpoint vocabulary has duplicate entries", 0);

    Rng unused(0);
    ck.params = init_model<T>(ck.config.dims, ntok, nchar, ck.labels.size(), ck.config.start_scores, unused);
    std::vector<std::pair<std::string, Tensor2<T>*>> tensors;
    ck.params.for_each_tensor([&](const std::string& name, Tensor2<T>& t) { tensors.emplace_back(name, &t); });
    if (detail::get_u32(in) != tensors.size()) throw ParseError("checkpoint tensor count mismatch", 0);
    for (auto& [name, t] : tensors) {
        auto stored = detail::get_string(in);
        if (stored != name) throw ParseError("expected tensor '" + name + "', found '" + stored + "'", 0);
        auto rows = detail::get_u32(in), cols = detail::get_u32(in);
        if (rows != t->rows() || cols != t->cols()) throw ParseError("shape mismatch for tensor '" + name + "'", 0);
        for (auto& v : t->flat()) v = static_cast<T>(std::bit_cast<float>(detail::get_u32(in)));
    }
    return ck;
}

template <class T>
void save_checkpoint_file(const std::string& path, const Checkpoint<T>& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    save_checkpoint(out, ck);
}

template <class T>
Checkpoint<T> load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    return load_checkpoint<T>(in);
}

}  // namespace seqsent

#endif  // SEQSENT_CHECKPOINT_HPP
