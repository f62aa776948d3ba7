#ifndef SEQSENT_CORPUS_HPP
#define SEQSENT_CORPUS_HPP

// Labeled-abstract files in the PubMed RCT layout:
//
//   ###<id>
//   LABEL<TAB>sentence text
//   ...
//   <blank line>
//
// plus tokenization and character decomposition.

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqsent/errors.hpp"

namespace seqsent {

struct Sentence {
    std::string label;
    std::string text;                 // as read from the file
    std::vector<std::string> tokens;  // tokenize(text)
};

struct Abstract {
    std::string id;
    std::vector<Sentence> sentences;
};

class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(const std::vector<std::string>& names) {
        for (const auto& n : names) add(n);
    }

    // Returns the index of `name`, inserting it at the end if new.
    std::size_t add(const std::string& name) {
        auto [it, inserted] = index_.emplace(name, names_.size());
        if (inserted) names_.push_back(name);
        return it->second;
    }

    std::optional<std::size_t> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t at(const std::string& name) const {
        auto idx = find(name);
        if (!idx) throw Mismatch("unknown label '" + name + "'");
        return *idx;
    }

    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }

    friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Corpus {
    std::vector<Abstract> abstracts;
    LabelSet labels;  // first-occurrence order
};

// ASCII characters split off the edges of whitespace-delimited chunks.
inline constexpr std::string_view kPunctuation = ".,;:!?()[]\"'";

inline bool is_split_punct(char c) {
    return kPunctuation.find(c) != std::string_view::npos;
}

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::vector<std::string> tokenize(std::string_view sentence) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < sentence.size()) {
        while (i < sentence.size() && is_space(sentence[i])) ++i;
        std::size_t start = i;
        while (i < sentence.size() && !is_space(sentence[i])) ++i;
        if (start == i) break;
        std::string_view chunk = sentence.substr(start, i - start);

        std::size_t lead = 0;
        while (lead < chunk.size() && is_split_punct(chunk[lead])) ++lead;
        std::size_t trail = chunk.size();
        while (trail > lead && is_split_punct(chunk[trail - 1])) --trail;

        for (std::size_t k = 0; k < lead; ++k) tokens.emplace_back(1, chunk[k]);
        if (trail > lead) tokens.emplace_back(chunk.substr(lead, trail - lead));
        for (std::size_t k = trail; k < chunk.size(); ++k) tokens.emplace_back(1, chunk[k]);
    }
    if (tokens.empty()) throw InvalidArgument("tokenize: sentence has no non-space characters");
    return tokens;
}

// Decodes UTF-8 into Unicode scalar values; malformed bytes become U+FFFD.
inline std::u32string split_chars(std::string_view token) {
    if (token.empty()) throw InvalidArgument("split_chars: empty token");
    std::u32string out;
    std::size_t i = 0;
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(token[k]); };
    while (i < token.size()) {
        unsigned char b = byte(i);
        std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
        if (len == 0 || i + len > token.size()) {
            out.push_back(U'\uFFFD');
            ++i;
            continue;
        }
        char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            if ((byte(i + k) >> 6) != 0x2) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (byte(i + k) & 0x3F);
        }
        if (!ok) {
            out.push_back(U'\uFFFD');
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline std::string encode_utf8(char32_t cp) {
    std::string s;
    if (cp < 0x80) {
        s += static_cast<char>(cp);
    } else if (cp < 0x800) {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        s += static_cast<char>(0xE0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        s += static_cast<char>(0xF0 | (cp >> 18));
        s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return s;
}

inline Corpus parse_rct(std::istream& in) {
    Corpus corpus;
    std::optional<Abstract> current;
    std::size_t header_line = 0;
    std::size_t line_no = 0;
    std::string line;

    auto finish = [&] {
        if (!current) return;
        if (current->sentences.empty())
            throw ParseError("abstract '" + current->id + "' has no sentences", header_line);
        corpus.abstracts.push_back(std::move(*current));
        current.reset();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("###", 0) == 0) {
            finish();
            current.emplace();
            current->id = line.substr(3);
            header_line = line_no;
            continue;
        }
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) {
            finish();
            continue;
        }
        if (!current) throw ParseError("sentence outside of an abstract (missing ###id line)", line_no);
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("expected LABEL<TAB>sentence", line_no);
        Sentence s;
        s.label = line.substr(0, tab);
        s.text = line.substr(tab + 1);
        if (s.label.empty()) throw ParseError("empty label", line_no);
        try {
            s.tokens = tokenize(s.text);
        } catch (const InvalidArgument&) {
            throw ParseError("empty sentence text", line_no);
        }
        corpus.labels.add(s.label);
        current->sentences.push_back(std::move(s));
    }
    finish();
    return corpus;
}

inline Corpus parse_rct_string(const std::string& text) {
    std::istringstream in(text);
    return parse_rct(in);
}

inline Corpus parse_rct_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    return parse_rct(in);
}

// Writes abstracts back in the same layout, original sentence text intact.
inline void write_rct(std::ostream& out, const std::vector<Abstract>& abstracts) {
    for (const auto& a : abstracts) {
        out << "###" << a.id << '\n';
        for (const auto& s : a.sentences) out << s.label << '\t' << s.text << '\n';
        out << '\n';
    }
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

inline std::size_t sentence_count(const std::vector<Abstract>& abstracts) {
    std::size_t n = 0;
    for (const auto& a : abstracts) n += a.sentences.size();
    return n;
}

}  // namespace seqsent

#endif  // SEQSENT_CORPUS_HPP
