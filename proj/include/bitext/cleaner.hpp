#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bitext/core.hpp"
#include "bitext/heuristics.hpp"
#include "bitext/unicode.hpp"

namespace bitext {

struct CleanerVerdict {
    bool aligned = false;
    std::optional<std::string> cleaned_src;  // present iff aligned
    std::optional<std::string> cleaned_tgt;
};

struct CleanerFewShot {
    std::string src_text;
    std::string tgt_text;
    CleanerVerdict verdict;
};

// The worked examples shipped with the cleaner instructions.
inline std::vector<CleanerFewShot> default_cleaner_few_shots() {
    return {
        {"Dengan harga yang bisa dibilang menengah, apa saja yang ditwarkannya?",
         "Suratan puniki nénten indik Kabupatén miwah kota ring Kepulauan Riau.",
         {false, std::nullopt, std::nullopt}},
        {"Bahasa daerah memiliki karakteristik yang unik.",
         "(32:2) Basa daerah madue \"karakteristik\" sane soleh.",
         {true, "Bahasa daerah memiliki karakteristik yang unik.",
          "Basa daerah madue karakteristik sane soleh."}},
    };
}

namespace detail {

// Fixed instruction text; [Few-shot prompt] and [Batch-prompt] are the only
// substitution slots. Line breaks and trailing spaces are part of the
// canonical byte layout.
inline constexpr const char* kCleanerTemplate =
    "You are an expert in aligning and cleaning parallel sentences in different \n"
    "languages. You will receive two sentences: one in a source language and \n"
    "one in a target language.\n"
    "\n"
    "Your task is:\n"
    "1. On the first line, respond with \"True\" if the sentences have the same \n"
    "meaning, otherwise respond with \"False\".\n"
    "2. If the first line is \"True\", provide the cleaned and aligned sentences\n"
    "on the second and third lines respectively by fixing syntax errors, removing \n"
    "noise (such as unnecessary phrases, punctuation or ambiguous \n"
    "numbers), and normalizing text (e.g., capitalization).\n"
    "\n"
    "Here are some examples to guide you:\n"
    "[Few-shot prompt]\n"
    "\n"
    "Now, clean the following sentence pairs:\n"
    "[Batch-prompt]";

inline constexpr const char* kCleanerTemplateVersion = "cleaner-v1";

inline std::string replace_slot(std::string text, const std::string& slot,
                                const std::string& value) {
    auto pos = text.find(slot);
    if (pos == std::string::npos)
        throw std::logic_error("template slot missing: " + slot);
    return text.replace(pos, slot.size(), value);
}

}  // namespace detail

inline std::string render_pair_block(const std::string& src_name, const std::string& src_text,
                                     const std::string& tgt_name, const std::string& tgt_text) {
    return src_name + ": " + src_text + "\n" + tgt_name + ": " + tgt_text;
}

inline std::string render_verdict_block(const CleanerVerdict& v,
                                        const std::string& src_name,
                                        const std::string& tgt_name) {
    if (!v.aligned) return "False";
    return "True\n" + src_name + ": " + *v.cleaned_src + "\n" + tgt_name + ": " +
           *v.cleaned_tgt;
}

// Renders the full cleaner prompt for one batch. Deterministic; the few-shot
// section lists all example pairs first, then their answers, each block
// separated by a blank line.
inline std::string render_cleaner_prompt(const std::vector<SentencePair>& batch,
                                         const std::vector<CleanerFewShot>& few_shots,
                                         const LanguageNames& names) {
    if (batch.empty())
        throw std::invalid_argument("cleaner batch must be non-empty");
    const std::string src_name = names.name(batch.front().src.lang.code);
    const std::string tgt_name = names.name(batch.front().tgt.lang.code);

    std::string few;
    for (std::size_t i = 0; i < few_shots.size(); ++i) {
        if (i) few += "\n\n";
        few += render_pair_block(src_name, few_shots[i].src_text, tgt_name,
                                 few_shots[i].tgt_text);
    }
    for (const auto& fs : few_shots) {
        few += "\n\n";
        few += render_verdict_block(fs.verdict, src_name, tgt_name);
    }

    std::string batch_text;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (i) batch_text += "\n\n";
        batch_text += render_pair_block(src_name, batch[i].src.text, tgt_name,
                                        batch[i].tgt.text);
    }

    std::string out = detail::kCleanerTemplate;
    out = detail::replace_slot(out, "[Few-shot prompt]", few);
    out = detail::replace_slot(out, "[Batch-prompt]", batch_text);
    return out;
}

class CleanerParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::vector<std::string>> split_blocks(const std::string& text) {
    std::vector<std::vector<std::string>> blocks;
    std::vector<std::string> cur;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (uni::trim(line).empty()) {
            if (!cur.empty()) { blocks.push_back(std::move(cur)); cur.clear(); }
        } else {
            cur.push_back(line);
        }
    }
    if (!cur.empty()) blocks.push_back(std::move(cur));
    return blocks;
}

inline std::string strip_lang_prefix(const std::string& line,
                                     const std::vector<std::string>& lang_names) {
    for (const auto& name : lang_names) {
        std::string prefix = name + ": ";
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return line;
}

inline bool iequals(std::string a, std::string b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

}  // namespace detail

// Parses an LLM response into per-pair verdicts. Blocks are separated by
// blank lines; a "True" block carries the cleaned sentences on its next two
// lines, with optional "<LanguageName>: " prefixes.
inline std::vector<CleanerVerdict> parse_cleaner_response(
    const std::string& text, std::size_t batch_size,
    const std::vector<std::string>& lang_names) {
    auto blocks = detail::split_blocks(text);
    if (blocks.size() != batch_size)
        throw CleanerParseError("expected " + std::to_string(batch_size) +
                                " blocks, got " + std::to_string(blocks.size()));
    std::vector<CleanerVerdict> out;
    for (const auto& block : blocks) {
        std::string head = uni::trim(block.front());
        if (detail::iequals(head, "false")) {
            out.push_back({false, std::nullopt, std::nullopt});
        } else if (detail::iequals(head, "true")) {
            if (block.size() < 3)
                throw CleanerParseError("True block without two cleaned lines");
            std::string s = detail::strip_lang_prefix(block[1], lang_names);
            std::string t = detail::strip_lang_prefix(block[2], lang_names);
            if (uni::trim(s).empty() || uni::trim(t).empty())
                throw CleanerParseError("empty cleaned sentence in True block");
            out.push_back({true, s, t});
        } else {
            throw CleanerParseError("block does not start with True/False: " + head);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Backends

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Serves canned responses in dispatch order from a JSONL file of
// {"response": str} records. Dispatch order is deterministic, so replay runs
// reproduce live runs.
class ReplayChatBackend final : public ChatBackend {
  public:
    explicit ReplayChatBackend(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open replay file: " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            responses_.push_back(
                nlohmann::json::parse(line).at("response").get<std::string>());
        }
    }
    explicit ReplayChatBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string complete(const std::string&) override {
        std::lock_guard lock(mu_);
        if (next_ >= responses_.size())
            throw std::runtime_error("replay backend exhausted after " +
                                     std::to_string(responses_.size()) + " responses");
        return responses_[next_++];
    }

  private:
    std::mutex mu_;
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

// On-disk response cache keyed by a content hash. JSONL of {"key","response"}.
class ResponseCache {
  public:
    ResponseCache() = default;
    explicit ResponseCache(std::string path) : path_(std::move(path)) {
        std::ifstream in(path_);
        std::string line;
        while (in && std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line);
            entries_[j.at("key").get<std::string>()] =
                j.at("response").get<std::string>();
        }
    }

    static std::string key(const std::string& template_version,
                           const std::vector<SentencePair>& batch) {
        // FNV-1a 64
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](const std::string& s) {
            for (unsigned char c : s) { h ^= c; h *= 1099511628211ull; }
            h ^= 0x1f; h *= 1099511628211ull;
        };
        mix(template_version);
        for (const auto& p : batch) { mix(p.src.text); mix(p.tgt.text); }
        std::ostringstream os;
        os << std::hex << h;
        return os.str();
    }

    std::optional<std::string> get(const std::string& k) const {
        std::lock_guard lock(mu_);
        auto it = entries_.find(k);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void put(const std::string& k, const std::string& response) {
        std::lock_guard lock(mu_);
        entries_[k] = response;
        if (!path_.empty()) {
            std::ofstream out(path_, std::ios::app);
            out << nlohmann::json{{"key", k}, {"response", response}}.dump() << '\n';
        }
    }

  private:
    mutable std::mutex mu_;
    std::string path_;
    std::map<std::string, std::string> entries_;
};

struct CleanerOptions {
    std::size_t batch_size = 8;
    std::size_t retries = 2;
    std::vector<int> backoff_ms = {1000, 4000};
    bool strict = false;  // drop unparseable batches instead of flagging
    std::size_t concurrency = 4;
    std::string cache_path;  // empty: in-memory cache only
};

struct CleanOutcome {
    FilterReport report;
    std::int64_t cleaned = 0;
    std::int64_t misaligned = 0;
    std::int64_t unverified = 0;
    std::int64_t cache_hits = 0;
    std::int64_t backend_calls = 0;
    std::int64_t prompt_chars = 0;  // cost estimate
};

// Runs the cleaner over every active pair. Verdicts are applied in input
// order regardless of request concurrency; responses are cached by content
// hash so an immediate rerun makes zero backend calls.
inline CleanOutcome clean_corpus(std::vector<SentencePair>& pairs,
                                 ChatBackend& backend,
                                 const CleanerOptions& opts = {},
                                 const LanguageNames& names = LanguageNames::defaults(),
                                 const std::vector<CleanerFewShot>& few_shots =
                                     default_cleaner_few_shots()) {
    if (opts.batch_size == 0)
        throw std::invalid_argument("batch_size must be positive");

    CleanOutcome outcome;
    ResponseCache cache(opts.cache_path);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i].active()) active.push_back(i);

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < active.size(); i += opts.batch_size) {
        batches.emplace_back(active.begin() + i,
                             active.begin() + std::min(i + opts.batch_size, active.size()));
    }

    std::vector<std::string> prefix_names;
    // both language display names may prefix cleaned lines
    if (!active.empty()) {
        prefix_names.push_back(names.name(pairs[active.front()].src.lang.code));
        prefix_names.push_back(names.name(pairs[active.front()].tgt.lang.code));
    }

    struct BatchResult {
        std::vector<CleanerVerdict> verdicts;
        bool failed = false;
        std::string error;
    };

    std::mutex stats_mu;
    auto run_batch = [&](const std::vector<std::size_t>& idxs) -> BatchResult {
        std::vector<SentencePair> batch;
        for (auto i : idxs) batch.push_back(pairs[i]);
        std::string prompt = render_cleaner_prompt(batch, few_shots, names);
        std::string key = ResponseCache::key(detail::kCleanerTemplateVersion, batch);
        {
            std::lock_guard lock(stats_mu);
            outcome.prompt_chars += static_cast<std::int64_t>(prompt.size());
        }

        std::string last_error;
        for (std::size_t attempt = 0; attempt <= opts.retries; ++attempt) {
            if (attempt > 0) {
                int ms = attempt - 1 < opts.backoff_ms.size()
                             ? opts.backoff_ms[attempt - 1]
                             : opts.backoff_ms.empty() ? 0 : opts.backoff_ms.back();
                if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
            }
            std::string response;
            if (auto hit = cache.get(key); hit && attempt == 0) {
                response = *hit;
                std::lock_guard lock(stats_mu);
                ++outcome.cache_hits;
            } else {
                try {
                    response = backend.complete(prompt);
                } catch (const std::exception& e) {
                    last_error = e.what();
                    continue;
                }
                std::lock_guard lock(stats_mu);
                ++outcome.backend_calls;
            }
            try {
                auto verdicts = parse_cleaner_response(response, batch.size(), prefix_names);
                cache.put(key, response);
                return {std::move(verdicts), false, {}};
            } catch (const CleanerParseError& e) {
                last_error = e.what();
            }
        }
        return {{}, true, last_error};
    };

    // bounded, in-order dispatch: windows of `concurrency` batches
    std::vector<BatchResult> results(batches.size());
    const std::size_t window = std::max<std::size_t>(1, opts.concurrency);
    for (std::size_t base = 0; base < batches.size(); base += window) {
        std::size_t end = std::min(base + window, batches.size());
        std::vector<std::future<BatchResult>> futs;
        for (std::size_t b = base; b < end; ++b)
            futs.push_back(std::async(std::launch::async, run_batch, std::cref(batches[b])));
        for (std::size_t b = base; b < end; ++b) results[b] = futs[b - base].get();
    }

    auto& counts = outcome.report.stage("cleaner");
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& idxs = batches[b];
        auto& res = results[b];
        for (std::size_t j = 0; j < idxs.size(); ++j) {
            auto& p = pairs[idxs[j]];
            ++counts.input;
            if (res.failed) {
                if (opts.strict) {
                    p.reject("cleaner", "unparseable");
                    ++counts.rejected;
                    outcome.report.record(p.id, "cleaner", "unparseable");
                } else {
                    p.status = Status::unverified;
                    ++outcome.unverified;
                }
                continue;
            }
            const auto& v = res.verdicts[j];
            if (!v.aligned) {
                p.reject("cleaner", "cleaner_misaligned");
                ++counts.rejected;
                ++outcome.misaligned;
                outcome.report.record(p.id, "cleaner", "cleaner_misaligned");
            } else {
                p.src.text = *v.cleaned_src;
                p.tgt.text = *v.cleaned_tgt;
                if (p.status != Status::synthetic) p.status = Status::cleaned;
                ++outcome.cleaned;
            }
        }
    }
    return outcome;
}

}  // namespace bitext
