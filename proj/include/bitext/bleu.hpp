#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitext/unicode.hpp"

namespace bitext {

struct TokenStream {
    std::vector<std::vector<std::string>> segments;
    std::string tokenizer_id = "whitespace";
};

inline TokenStream tokenize_whitespace(const std::vector<std::string>& texts) {
    TokenStream ts;
    ts.segments.reserve(texts.size());
    for (const auto& t : texts) ts.segments.push_back(uni::tokens(t));
    return ts;
}

// Pre-tokenized sidecar (e.g. SentencePiece output): one line per segment,
// tokens space-separated and treated as opaque strings.
inline TokenStream load_token_sidecar(const std::string& path,
                                      std::size_t expected_segments = 0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open token sidecar: " + path);
    TokenStream ts;
    std::string filename = path;
    if (auto slash = path.find_last_of('/'); slash != std::string::npos)
        filename = path.substr(slash + 1);
    ts.tokenizer_id = "external:" + filename;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::vector<std::string> toks;
        std::string t;
        while (ss >> t) toks.push_back(t);
        ts.segments.push_back(std::move(toks));
    }
    if (expected_segments && ts.segments.size() != expected_segments)
        throw std::runtime_error("segment count mismatch: sidecar has " +
                                 std::to_string(ts.segments.size()) + ", corpus has " +
                                 std::to_string(expected_segments));
    return ts;
}

enum class BleuSmoothing { none, add1_for_n_ge_2 };

struct BleuScore {
    double score = 0.0;  // [0, 100]
    std::array<double, 4> precisions{};
    double brevity_penalty = 1.0;
    std::int64_t hyp_len = 0;
    std::int64_t ref_len = 0;
};

namespace detail {

using NgramCounts = std::map<std::vector<std::string>, std::int64_t>;

inline NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

}  // namespace detail

// Corpus-level BLEU: modified (clipped) n-gram precisions up to max_n,
// geometric mean, multiplicative brevity penalty. Single reference per
// segment.
inline BleuScore bleu(const TokenStream& hyp, const TokenStream& ref,
                      std::size_t max_n = 4,
                      BleuSmoothing smoothing = BleuSmoothing::add1_for_n_ge_2) {
    if (hyp.segments.empty())
        throw std::invalid_argument("bleu: zero segments");
    if (hyp.segments.size() != ref.segments.size())
        throw std::invalid_argument("bleu: segment count mismatch: " +
                                    std::to_string(hyp.segments.size()) + " vs " +
                                    std::to_string(ref.segments.size()));
    if (max_n == 0 || max_n > 4)
        throw std::invalid_argument("bleu: max_n must be in 1..4");

    BleuScore out;
    std::array<std::int64_t, 4> matches{}, totals{};
    for (std::size_t seg = 0; seg < hyp.segments.size(); ++seg) {
        const auto& h = hyp.segments[seg];
        const auto& r = ref.segments[seg];
        out.hyp_len += static_cast<std::int64_t>(h.size());
        out.ref_len += static_cast<std::int64_t>(r.size());
        for (std::size_t n = 1; n <= max_n; ++n) {
            auto hc = detail::count_ngrams(h, n);
            auto rc = detail::count_ngrams(r, n);
            for (const auto& [gram, count] : hc) {
                auto it = rc.find(gram);
                std::int64_t clipped = it == rc.end() ? 0 : std::min(count, it->second);
                matches[n - 1] += clipped;
                totals[n - 1] += count;
            }
        }
    }

    bool zero_precision = false;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        double num = static_cast<double>(matches[n - 1]);
        double den = static_cast<double>(totals[n - 1]);
        if (smoothing == BleuSmoothing::add1_for_n_ge_2 && n >= 2 && num == 0.0) {
            num += 1.0;
            den += 1.0;
        }
        double p = den > 0.0 ? num / den : 0.0;
        out.precisions[n - 1] = p;
        if (p <= 0.0) zero_precision = true;
        else log_sum += std::log(p);
    }

    out.brevity_penalty =
        out.hyp_len < out.ref_len && out.hyp_len > 0
            ? std::exp(1.0 - static_cast<double>(out.ref_len) / out.hyp_len)
            : 1.0;
    out.score = zero_precision
                    ? 0.0
                    : out.brevity_penalty * std::exp(log_sum / static_cast<double>(max_n)) *
                          100.0;
    return out;
}

}  // namespace bitext
