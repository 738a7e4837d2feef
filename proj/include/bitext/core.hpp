#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitext/unicode.hpp"

namespace bitext {

struct LanguageTag {
    std::string code;  // "ban", "min", "id", "en"

    bool operator==(const LanguageTag&) const = default;
    auto operator<=>(const LanguageTag&) const = default;
};

// code -> display name used in prompts. One map per run; must be a bijection.
class LanguageNames {
  public:
    LanguageNames() = default;

    static LanguageNames defaults() {
        LanguageNames n;
        n.add("en", "English");
        n.add("id", "Indonesian");
        n.add("ban", "Balinese");
        n.add("min", "Minangkabau");
        return n;
    }

    void add(const std::string& code, const std::string& name) {
        if (code.empty() || name.empty())
            throw std::invalid_argument("language code and display name must be non-empty");
        for (char c : code)
            if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')))
                throw std::invalid_argument("language code must be lowercase ASCII: " + code);
        for (auto& [k, v] : by_code_)
            if (v == name && k != code)
                throw std::invalid_argument("display name not unique: " + name);
        by_code_[code] = name;
    }

    bool known(const std::string& code) const { return by_code_.count(code) > 0; }

    const std::string& name(const std::string& code) const {
        auto it = by_code_.find(code);
        if (it == by_code_.end())
            throw std::out_of_range("unknown language code: " + code);
        return it->second;
    }

  private:
    std::map<std::string, std::string> by_code_;
};

struct Sentence {
    std::int64_t id = -1;
    std::string text;
    LanguageTag lang;
    std::string origin;  // dataset name
};

enum class Status { raw, passed, rejected, cleaned, unverified, synthetic };

inline const char* status_name(Status s) {
    switch (s) {
        case Status::raw: return "raw";
        case Status::passed: return "passed";
        case Status::rejected: return "rejected";
        case Status::cleaned: return "cleaned";
        case Status::unverified: return "unverified";
        case Status::synthetic: return "synthetic";
    }
    return "?";
}

struct SentencePair {
    std::int64_t id = -1;
    Sentence src;
    Sentence tgt;
    std::map<std::string, double> scores;  // "lid_src", "margin", "mine_cos", ...
    Status status = Status::raw;
    std::string reject_stage;   // set iff status == rejected
    std::string reject_reason;  // set iff status == rejected
    std::string generation_direction;  // "ban-en", set iff synthetic

    bool active() const { return status != Status::rejected; }

    void reject(const std::string& stage, const std::string& reason) {
        if (status == Status::rejected) return;  // first rejection sticks
        status = Status::rejected;
        reject_stage = stage;
        reject_reason = reason;
    }
};

inline std::vector<SentencePair> survivors(const std::vector<SentencePair>& pairs) {
    std::vector<SentencePair> out;
    for (const auto& p : pairs)
        if (p.active()) out.push_back(p);
    return out;
}

// ---------------------------------------------------------------------------
// Dataset splitting: 90/5/5 over pair ids, floor for validation and test,
// remainder to train. Deterministic for a fixed seed.

struct SplitAssignment {
    std::set<std::int64_t> train, validation, test;
    std::uint64_t seed = 0;

    bool in_train(std::int64_t id) const { return train.count(id) > 0; }
};

inline SplitAssignment split_dataset(const std::vector<SentencePair>& pairs,
                                     std::uint64_t seed) {
    if (pairs.size() < 20)
        throw std::invalid_argument("split_dataset requires at least 20 pairs, got " +
                                    std::to_string(pairs.size()));
    std::vector<std::int64_t> ids;
    ids.reserve(pairs.size());
    for (const auto& p : pairs) ids.push_back(p.id);

    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);

    const std::size_t n = ids.size();
    const std::size_t n_val = n * 5 / 100;
    const std::size_t n_test = n * 5 / 100;

    SplitAssignment s;
    s.seed = seed;
    std::size_t i = 0;
    for (; i < n_val; ++i) s.validation.insert(ids[i]);
    for (; i < n_val + n_test; ++i) s.test.insert(ids[i]);
    for (; i < n; ++i) s.train.insert(ids[i]);
    return s;
}

}  // namespace bitext
