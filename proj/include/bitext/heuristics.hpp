#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bitext/core.hpp"
#include "bitext/unicode.hpp"

namespace bitext {

struct HeuristicConfig {
    std::size_t min_chars = 15;
    std::size_t max_chars = 500;
    double max_length_ratio = 2.0;
    std::size_t max_word_len = 20;
    double punct_digit_threshold = 0.20;

    void validate() const {
        if (min_chars >= max_chars)
            throw std::invalid_argument("min_chars must be below max_chars");
        if (max_length_ratio < 1.0)
            throw std::invalid_argument("max_length_ratio must be >= 1");
        if (punct_digit_threshold <= 0.0 || punct_digit_threshold > 1.0)
            throw std::invalid_argument("punct_digit_threshold must be in (0,1]");
    }
};

// Per-stage accept/reject bookkeeping shared by every filtering pass.
struct FilterReport {
    struct StageCount {
        std::int64_t input = 0;
        std::int64_t rejected = 0;
    };
    struct Rejection {
        std::int64_t pair_id;
        std::string filter;
        std::string reason;
    };

    std::vector<std::pair<std::string, StageCount>> stages;  // pipeline order
    std::vector<Rejection> rejections;

    StageCount& stage(const std::string& name) {
        for (auto& [n, c] : stages)
            if (n == name) return c;
        stages.emplace_back(name, StageCount{});
        return stages.back().second;
    }

    void record(std::int64_t pair_id, const std::string& filter, const std::string& reason) {
        rejections.push_back({pair_id, filter, reason});
    }

    void merge(const FilterReport& other) {
        for (const auto& [n, c] : other.stages) {
            auto& s = stage(n);
            s.input += c.input;
            s.rejected += c.rejected;
        }
        rejections.insert(rejections.end(), other.rejections.begin(),
                          other.rejections.end());
    }
};

// A filter verdict: empty optional means accept.
using Verdict = std::optional<std::string>;

inline Verdict length_filter(const SentencePair& p, const HeuristicConfig& cfg) {
    auto check = [&](const std::string& text) -> Verdict {
        std::size_t n = uni::length(text);
        if (n < cfg.min_chars) return "too_short";
        if (n > cfg.max_chars) return "too_long";
        return std::nullopt;
    };
    if (auto v = check(p.src.text)) return v;
    return check(p.tgt.text);
}

inline Verdict length_ratio_filter(const SentencePair& p, const HeuristicConfig& cfg) {
    std::size_t ws = uni::tokens(p.src.text).size();
    std::size_t wt = uni::tokens(p.tgt.text).size();
    if (ws == 0 || wt == 0) return "empty_side";
    double ratio = static_cast<double>(std::max(ws, wt)) / static_cast<double>(std::min(ws, wt));
    if (ratio > cfg.max_length_ratio) return "length_ratio";
    return std::nullopt;
}

inline Verdict word_length_filter(const SentencePair& p, const HeuristicConfig& cfg) {
    for (const std::string* text : {&p.src.text, &p.tgt.text})
        for (const auto& tok : uni::tokens(*text))
            if (uni::length(tok) > cfg.max_word_len) return "long_word";
    return std::nullopt;
}

inline Verdict punct_digit_filter(const SentencePair& p, const HeuristicConfig& cfg) {
    auto check = [&](const std::string& text) -> Verdict {
        std::size_t total = 0, punct = 0, digit = 0;
        for (char32_t c : uni::decode(text)) {
            if (uni::is_space(c)) continue;
            ++total;
            if (uni::is_punct(c)) ++punct;
            if (uni::is_digit(c)) ++digit;
        }
        if (total == 0) return std::nullopt;  // length filter owns empties
        if (static_cast<double>(digit) / total > cfg.punct_digit_threshold) return "digits";
        if (static_cast<double>(punct) / total > cfg.punct_digit_threshold) return "punct";
        return std::nullopt;
    };
    if (auto v = check(p.src.text)) return v;
    return check(p.tgt.text);
}

// Dedup key: whitespace runs collapsed to single spaces, ends trimmed.
inline std::string dedup_key(const SentencePair& p) {
    return uni::collapse_ws(p.src.text) + '\x1f' + uni::collapse_ws(p.tgt.text);
}

// Keeps the first occurrence of each (src,tgt) key; relative order preserved.
// Later duplicates are marked rejected in place.
inline void dedup(std::vector<SentencePair>& pairs, FilterReport& report) {
    auto& counts = report.stage("dedup");
    std::unordered_set<std::string> seen;
    for (auto& p : pairs) {
        if (!p.active()) continue;
        ++counts.input;
        if (!seen.insert(dedup_key(p)).second) {
            p.reject("dedup", "duplicate");
            ++counts.rejected;
            report.record(p.id, "dedup", "duplicate");
        }
    }
}

// Fixed pass order: dedup, length, ratio, word-length, punct/digit. Pairs
// already rejected upstream are skipped, which also makes the whole pass
// idempotent.
inline FilterReport run_heuristics(std::vector<SentencePair>& pairs,
                                   const HeuristicConfig& cfg = {}) {
    cfg.validate();
    FilterReport report;
    dedup(pairs, report);

    struct Stage {
        const char* name;
        Verdict (*fn)(const SentencePair&, const HeuristicConfig&);
    };
    static constexpr Stage kStages[] = {
        {"length", length_filter},
        {"length_ratio", length_ratio_filter},
        {"word_length", word_length_filter},
        {"punct_digit", punct_digit_filter},
    };
    for (const auto& stage : kStages) {
        auto& counts = report.stage(stage.name);
        for (auto& p : pairs) {
            if (!p.active()) continue;
            ++counts.input;
            if (auto reason = stage.fn(p, cfg)) {
                p.reject(stage.name, *reason);
                ++counts.rejected;
                report.record(p.id, stage.name, *reason);
            }
        }
    }
    for (auto& p : pairs)
        if (p.status == Status::raw) p.status = Status::passed;
    return report;
}

}  // namespace bitext
