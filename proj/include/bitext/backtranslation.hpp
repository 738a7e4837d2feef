#pragma once

#include <fstream>
#include <mutex>
#include <future>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "bitext/cleaner.hpp"
#include "bitext/core.hpp"
#include "bitext/heuristics.hpp"
#include "bitext/lid.hpp"

namespace bitext {

class TranslatorBackend {
  public:
    virtual ~TranslatorBackend() = default;
    // Must return one translation per input text, in order.
    virtual std::vector<std::string> translate(const std::vector<std::string>& texts,
                                               const LanguageTag& src,
                                               const LanguageTag& tgt) = 0;
};

// Replays translations from a file, one line per input sentence in corpus
// order.
class ReplayTranslatorBackend final : public TranslatorBackend {
  public:
    explicit ReplayTranslatorBackend(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open translator replay file: " + path);
        std::string line;
        while (std::getline(in, line)) lines_.push_back(line);
    }
    explicit ReplayTranslatorBackend(std::vector<std::string> lines)
        : lines_(std::move(lines)) {}

    std::vector<std::string> translate(const std::vector<std::string>& texts,
                                       const LanguageTag&, const LanguageTag&) override {
        std::lock_guard lock(mu_);
        std::vector<std::string> out;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (next_ >= lines_.size())
                throw std::runtime_error("translator replay exhausted");
            out.push_back(lines_[next_++]);
        }
        return out;
    }

  private:
    std::mutex mu_;
    std::vector<std::string> lines_;
    std::size_t next_ = 0;
};

// Single-side quality gate for monolingual sentences: length, word-length,
// punct/digit heuristics, exact dedup, then the LID gate.
inline std::vector<Sentence> select_monolingual(const std::vector<Sentence>& sentences,
                                                const HeuristicConfig& cfg,
                                                const LidBackend* lid,
                                                double lid_threshold = 0.9) {
    cfg.validate();
    std::vector<Sentence> out;
    std::unordered_set<std::string> seen;
    for (const auto& s : sentences) {
        std::size_t n = uni::length(s.text);
        if (n < cfg.min_chars || n > cfg.max_chars) continue;

        bool long_word = false;
        for (const auto& tok : uni::tokens(s.text))
            if (uni::length(tok) > cfg.max_word_len) { long_word = true; break; }
        if (long_word) continue;

        std::size_t total = 0, punct = 0, digit = 0;
        for (char32_t c : uni::decode(s.text)) {
            if (uni::is_space(c)) continue;
            ++total;
            if (uni::is_punct(c)) ++punct;
            if (uni::is_digit(c)) ++digit;
        }
        if (total > 0 &&
            (static_cast<double>(punct) / total > cfg.punct_digit_threshold ||
             static_cast<double>(digit) / total > cfg.punct_digit_threshold))
            continue;

        if (!seen.insert(uni::collapse_ws(s.text)).second) continue;

        if (lid && lid->prob_of(s, s.lang) < lid_threshold) continue;
        out.push_back(s);
    }
    return out;
}

struct BacktranslateOutcome {
    std::vector<SentencePair> pairs;
    std::int64_t skipped = 0;        // sentences lost to failed chunks
    std::int64_t failed_chunks = 0;
};

// Translates monolingual target sentences into src_lang and emits synthetic
// pairs oriented generated -> authentic. The authentic text is carried over
// verbatim; chunk failures are isolated and reported.
inline BacktranslateOutcome backtranslate(const std::vector<Sentence>& mono_sentences,
                                          TranslatorBackend& translator,
                                          const LanguageTag& src_lang,
                                          std::size_t chunk_size = 32,
                                          std::size_t concurrency = 2) {
    BacktranslateOutcome outcome;
    if (mono_sentences.empty()) return outcome;
    const LanguageTag tgt_lang = mono_sentences.front().lang;
    if (tgt_lang == src_lang)
        throw std::invalid_argument("backtranslate: source and target language equal");
    for (const auto& s : mono_sentences)
        if (!(s.lang == tgt_lang))
            throw std::invalid_argument("backtranslate: mixed target languages");

    std::vector<std::pair<std::size_t, std::size_t>> chunks;
    for (std::size_t i = 0; i < mono_sentences.size(); i += chunk_size)
        chunks.emplace_back(i, std::min(i + chunk_size, mono_sentences.size()));

    struct ChunkResult {
        std::vector<std::string> translations;
        bool failed = false;
    };
    auto run_chunk = [&](std::size_t b, std::size_t e) -> ChunkResult {
        std::vector<std::string> texts;
        for (std::size_t i = b; i < e; ++i) texts.push_back(mono_sentences[i].text);
        try {
            auto t = translator.translate(texts, tgt_lang, src_lang);
            if (t.size() != texts.size()) return {{}, true};
            return {std::move(t), false};
        } catch (const std::exception&) {
            return {{}, true};
        }
    };

    std::vector<ChunkResult> results(chunks.size());
    const std::size_t window = std::max<std::size_t>(1, concurrency);
    for (std::size_t base = 0; base < chunks.size(); base += window) {
        std::size_t end = std::min(base + window, chunks.size());
        std::vector<std::future<ChunkResult>> futs;
        for (std::size_t c = base; c < end; ++c)
            futs.push_back(std::async(std::launch::async, run_chunk, chunks[c].first,
                                      chunks[c].second));
        for (std::size_t c = base; c < end; ++c) results[c] = futs[c - base].get();
    }

    const std::string direction = tgt_lang.code + "-" + src_lang.code;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        auto [b, e] = chunks[c];
        if (results[c].failed) {
            ++outcome.failed_chunks;
            outcome.skipped += static_cast<std::int64_t>(e - b);
            continue;
        }
        for (std::size_t i = b; i < e; ++i) {
            SentencePair p;
            p.id = static_cast<std::int64_t>(outcome.pairs.size());
            p.tgt = mono_sentences[i];  // authentic side, verbatim
            p.src.id = p.id;
            p.src.text = results[c].translations[i - b];
            p.src.lang = src_lang;
            p.src.origin = mono_sentences[i].origin;
            p.tgt.id = p.id;
            p.status = Status::synthetic;
            p.generation_direction = direction;
            outcome.pairs.push_back(std::move(p));
        }
    }
    return outcome;
}

struct SyntheticPipelineOptions {
    HeuristicConfig heuristics;
    const LidBackend* lid = nullptr;  // optional
    double lid_threshold = 0.9;
    ChatBackend* cleaner = nullptr;   // optional
    CleanerOptions cleaner_opts;
    LanguageNames names = LanguageNames::defaults();
};

// Second filtering pass over synthetic pairs. Survivors keep status
// synthetic; a True cleaner verdict may rewrite texts but not the status.
inline FilterReport build_synthetic_corpus(std::vector<SentencePair>& pairs,
                                           const SyntheticPipelineOptions& opts) {
    FilterReport report = run_heuristics(pairs, opts.heuristics);
    if (opts.lid)
        report.merge(lid_filter(pairs, *opts.lid, opts.lid_threshold));
    if (opts.cleaner) {
        auto outcome = clean_corpus(pairs, *opts.cleaner, opts.cleaner_opts, opts.names);
        report.merge(outcome.report);
    }
    return report;
}

}  // namespace bitext
