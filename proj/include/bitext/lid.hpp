#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bitext/core.hpp"
#include "bitext/heuristics.hpp"
#include "bitext/unicode.hpp"

namespace bitext {

struct LanguageScore {
    LanguageTag lang;
    double prob = 0.0;  // in [0,1]
};

// Language-identification scorer. Production scores arrive via sidecar
// files; the n-gram backend is a hermetic stand-in for tests and offline
// runs. Implementations must be deterministic and safe for concurrent reads.
class LidBackend {
  public:
    virtual ~LidBackend() = default;

    // Scores descending by probability. The sentence id is part of the query
    // because sidecar tables answer by id, not by text.
    virtual std::vector<LanguageScore> score(const Sentence& s) const = 0;

    double prob_of(const Sentence& s, const LanguageTag& lang) const {
        for (const auto& ls : score(s))
            if (ls.lang == lang) return ls.prob;
        return 0.0;
    }
};

// Table lookup over `sentence_id <TAB> lang_code <TAB> prob` lines.
class SidecarLidBackend final : public LidBackend {
  public:
    explicit SidecarLidBackend(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open LID sidecar: " + path);
        std::string line;
        std::int64_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::int64_t id;
            std::string lang;
            double prob;
            if (!(ss >> id >> lang >> prob) || prob < 0.0 || prob > 1.0)
                throw std::runtime_error("LID sidecar line " + std::to_string(lineno) +
                                         ": malformed record");
            if (!table_.emplace(id, LanguageScore{{lang}, prob}).second)
                throw std::runtime_error("LID sidecar line " + std::to_string(lineno) +
                                         ": duplicate sentence id " + std::to_string(id));
        }
    }

    std::vector<LanguageScore> score(const Sentence& s) const override {
        auto it = table_.find(s.id);
        if (it == table_.end())
            throw std::runtime_error("no LID score for sentence " + std::to_string(s.id));
        return {it->second};
    }

  private:
    std::unordered_map<std::int64_t, LanguageScore> table_;
};

// Multinomial naive Bayes over character n-grams (n = 1..3, add-one
// smoothing). Immutable after construction.
class NgramLidBackend final : public LidBackend {
  public:
    static constexpr std::size_t kMinExamplesPerLang = 50;

    NgramLidBackend(const std::vector<std::pair<std::string, std::string>>& corpus) {
        std::map<std::string, std::size_t> per_lang;
        for (const auto& [text, lang] : corpus) ++per_lang[lang];
        if (per_lang.size() < 2)
            throw std::invalid_argument("n-gram LID needs at least 2 languages");
        for (const auto& [lang, n] : per_lang)
            if (n < kMinExamplesPerLang)
                throw std::invalid_argument("n-gram LID needs >= " +
                                            std::to_string(kMinExamplesPerLang) +
                                            " examples for language " + lang);
        for (const auto& [lang, n] : per_lang) langs_.push_back(lang);
        counts_.resize(langs_.size());
        totals_.assign(langs_.size(), 0);

        for (const auto& [text, lang] : corpus) {
            std::size_t li = lang_index(lang);
            for (const auto& g : ngrams(text)) {
                ++counts_[li][g];
                ++totals_[li];
                vocab_.insert(g);
            }
        }
    }

    std::vector<LanguageScore> score(const Sentence& s) const override {
        auto grams = ngrams(s.text);
        std::vector<double> logp(langs_.size(), 0.0);
        const double v = static_cast<double>(vocab_.size());
        for (std::size_t li = 0; li < langs_.size(); ++li) {
            for (const auto& g : grams) {
                auto it = counts_[li].find(g);
                double c = it == counts_[li].end() ? 0.0 : static_cast<double>(it->second);
                logp[li] += std::log((c + 1.0) / (totals_[li] + v));
            }
        }
        // normalize in log space
        double mx = *std::max_element(logp.begin(), logp.end());
        double z = 0.0;
        for (double l : logp) z += std::exp(l - mx);
        std::vector<LanguageScore> out;
        for (std::size_t li = 0; li < langs_.size(); ++li)
            out.push_back({{langs_[li]}, std::exp(logp[li] - mx) / z});
        std::stable_sort(out.begin(), out.end(),
                         [](const auto& a, const auto& b) { return a.prob > b.prob; });
        return out;
    }

  private:
    std::size_t lang_index(const std::string& lang) const {
        return static_cast<std::size_t>(
            std::find(langs_.begin(), langs_.end(), lang) - langs_.begin());
    }

    static std::vector<std::u32string> ngrams(const std::string& text) {
        auto cps = uni::decode(text);
        std::vector<std::u32string> out;
        for (std::size_t n = 1; n <= 3; ++n)
            for (std::size_t i = 0; i + n <= cps.size(); ++i)
                out.emplace_back(cps.begin() + i, cps.begin() + i + n);
        return out;
    }

    std::vector<std::string> langs_;
    std::vector<std::unordered_map<std::u32string, std::size_t>> counts_;
    std::vector<std::size_t> totals_;
    std::set<std::u32string> vocab_;
};

// Gate on the probability the backend assigns to the declared language of
// each side. The weaker condition "top-1 matches declared" is not required.
inline Verdict lid_verdict(SentencePair& p, const LidBackend& backend,
                           double threshold = 0.9) {
    double ps = backend.prob_of(p.src, p.src.lang);
    double pt = backend.prob_of(p.tgt, p.tgt.lang);
    p.scores["lid_src"] = ps;
    p.scores["lid_tgt"] = pt;
    if (ps < threshold) return "lid_src";
    if (pt < threshold) return "lid_tgt";
    return std::nullopt;
}

inline FilterReport lid_filter(std::vector<SentencePair>& pairs,
                               const LidBackend& backend, double threshold = 0.9) {
    FilterReport report;
    auto& counts = report.stage("lid");
    for (auto& p : pairs) {
        if (!p.active()) continue;
        ++counts.input;
        try {
            if (auto reason = lid_verdict(p, backend, threshold)) {
                p.reject("lid", *reason);
                ++counts.rejected;
                report.record(p.id, "lid", *reason);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("LID backend failed for pair " +
                                     std::to_string(p.id) + ": " + e.what());
        }
    }
    return report;
}

}  // namespace bitext
