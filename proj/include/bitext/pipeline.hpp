#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitext/backtranslation.hpp"
#include "bitext/cleaner.hpp"
#include "bitext/config.hpp"
#include "bitext/core.hpp"
#include "bitext/heuristics.hpp"
#include "bitext/io.hpp"
#include "bitext/lid.hpp"
#include "bitext/margin.hpp"
#include "bitext/sft.hpp"
#include "bitext/stats.hpp"

namespace bitext {

class StageFailure : public std::runtime_error {
  public:
    StageFailure(std::string stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "' failed: " + what),
          stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

struct PipelineResult {
    std::vector<SentencePair> before;  // corpus as read
    std::vector<SentencePair> after;   // survivors
    PipelineStats stats;
    FilterReport report;
};

// Builds a LID backend from a "sidecar:<path>" or "ngram:<path>" spec, where
// the ngram path holds `text <TAB> lang` training lines.
inline std::unique_ptr<LidBackend> make_lid_backend(const std::string& spec) {
    if (spec.rfind("sidecar:", 0) == 0)
        return std::make_unique<SidecarLidBackend>(spec.substr(8));
    if (spec.rfind("ngram:", 0) == 0) {
        std::ifstream in(spec.substr(6));
        if (!in) throw std::runtime_error("cannot open ngram training file: " + spec.substr(6));
        std::vector<std::pair<std::string, std::string>> corpus;
        std::string line;
        while (std::getline(in, line)) {
            auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            corpus.emplace_back(line.substr(0, tab), line.substr(tab + 1));
        }
        return std::make_unique<NgramLidBackend>(corpus);
    }
    throw std::invalid_argument("unknown LID backend spec: " + spec);
}

// Config-driven end-to-end run with per-stage JSONL checkpoints under
// <out_dir>/checkpoints/. A stage whose checkpoint already exists is loaded
// instead of recomputed, which makes interrupted runs resumable.
class Pipeline {
  public:
    Pipeline(Config cfg, std::string out_dir)
        : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)) {
        std::filesystem::create_directories(checkpoint_dir());
        names_ = LanguageNames::defaults();
    }

    // Optional injected backends (tests, mocks). When unset, backends come
    // from the config.
    void set_cleaner_backend(ChatBackend* b) { cleaner_backend_ = b; }
    void set_translator_backend(TranslatorBackend* b) { translator_backend_ = b; }
    void set_lid_backend(const LidBackend* b) { lid_backend_ = b; }

    PipelineResult run(const std::string& corpus_path) {
        PipelineResult result;
        result.before =
            read_corpus(corpus_path, format_from_path(corpus_path), names_);
        std::vector<SentencePair> pairs = result.before;

        run_stage("heuristics", pairs, result.report, [&](auto& ps, auto& rep) {
            HeuristicConfig hc = heuristic_config();
            rep.merge(run_heuristics(ps, hc));
        });
        run_stage("lid", pairs, result.report, [&](auto& ps, auto& rep) {
            if (!cfg_.get_bool("lid", "enabled", false)) return;
            const LidBackend* backend = lid_backend_;
            std::unique_ptr<LidBackend> owned;
            if (!backend) {
                owned = make_lid_backend(cfg_.get("lid", "backend"));
                backend = owned.get();
            }
            rep.merge(lid_filter(ps, *backend, cfg_.get_real("lid", "threshold", 0.9)));
        });
        run_stage("margin", pairs, result.report, [&](auto& ps, auto& rep) {
            if (!cfg_.get_bool("margin", "enabled", false)) return;
            auto src = EmbeddingTable::load(cfg_.get("margin", "src_emb"));
            auto tgt = EmbeddingTable::load(cfg_.get("margin", "tgt_emb"));
            rep.merge(filter_by_margin(ps, src, tgt,
                                       cfg_.get_real("margin", "threshold", 1.09),
                                       static_cast<std::size_t>(cfg_.get_int("margin", "k", 3))));
        });
        run_stage("cleaner", pairs, result.report, [&](auto& ps, auto& rep) {
            if (!cfg_.get_bool("cleaner", "enabled", false)) return;
            ChatBackend* backend = cleaner_backend_;
            std::unique_ptr<ChatBackend> owned;
            if (!backend) {
                std::string spec = cfg_.get("cleaner", "backend", "replay:");
                if (spec.rfind("replay:", 0) != 0)
                    throw std::runtime_error("cleaner backend spec must be replay:<path> "
                                             "here; use the clean subcommand for http");
                owned = std::make_unique<ReplayChatBackend>(spec.substr(7));
                backend = owned.get();
            }
            CleanerOptions opts;
            opts.batch_size =
                static_cast<std::size_t>(cfg_.get_int("cleaner", "batch_size", 8));
            opts.strict = cfg_.get_bool("cleaner", "strict", false);
            opts.retries = static_cast<std::size_t>(cfg_.get_int("cleaner", "retries", 2));
            opts.cache_path = cfg_.get("cleaner", "cache");
            auto outcome = clean_corpus(ps, *backend, opts, names_);
            rep.merge(outcome.report);
        });
        run_stage("backtranslation", pairs, result.report, [&](auto& ps, auto& rep) {
            if (!cfg_.get_bool("backtranslation", "enabled", false)) return;
            auto mono = load_monolingual();
            auto selected = select_monolingual(mono, heuristic_config(), nullptr);
            TranslatorBackend* backend = translator_backend_;
            std::unique_ptr<TranslatorBackend> owned;
            if (!backend) {
                std::string spec = cfg_.get("backtranslation", "translator", "replay:");
                if (spec.rfind("replay:", 0) != 0)
                    throw std::runtime_error("translator backend spec must be replay:<path>");
                owned = std::make_unique<ReplayTranslatorBackend>(spec.substr(7));
                backend = owned.get();
            }
            LanguageTag src_lang{cfg_.get("backtranslation", "src_lang", "en")};
            auto bt = backtranslate(selected, *backend, src_lang);
            SyntheticPipelineOptions sopts;
            sopts.heuristics = heuristic_config();
            sopts.names = names_;
            rep.merge(build_synthetic_corpus(bt.pairs, sopts));
            // merge survivors with fresh ids following the authentic corpus
            std::int64_t next_id = 0;
            for (const auto& p : ps) next_id = std::max(next_id, p.id + 1);
            for (auto& p : bt.pairs) {
                if (!p.active()) continue;
                p.id = p.src.id = p.tgt.id = next_id++;
                ps.push_back(p);
            }
        });

        result.after = survivors(pairs);
        // synthetic pairs are new records, not part of the before/after table
        std::vector<SentencePair> after_authentic;
        for (const auto& p : result.after)
            if (p.status != Status::synthetic) after_authentic.push_back(p);
        result.stats = stats_report(result.before, after_authentic);
        write_provenance(pairs);
        write_corpus(result.after, out_path("corpus.cleaned.jsonl"), CorpusFormat::jsonl);

        if (cfg_.get_bool("emit", "enabled", true) && result.after.size() >= 20) {
            auto seed = static_cast<std::uint64_t>(cfg_.get_int("split", "seed", 42));
            auto split = split_dataset(result.after, seed);
            auto records = expand_directions(result.after, names_);
            emit_sft(records, split, (std::filesystem::path(out_dir_) / "sft").string());
        }
        return result;
    }

  private:
    HeuristicConfig heuristic_config() const {
        HeuristicConfig hc;
        hc.min_chars = static_cast<std::size_t>(cfg_.get_int("heuristics", "min_chars", 15));
        hc.max_chars = static_cast<std::size_t>(cfg_.get_int("heuristics", "max_chars", 500));
        hc.max_length_ratio = cfg_.get_real("heuristics", "max_length_ratio", 2.0);
        hc.max_word_len =
            static_cast<std::size_t>(cfg_.get_int("heuristics", "max_word_len", 20));
        hc.punct_digit_threshold =
            cfg_.get_real("heuristics", "punct_digit_threshold", 0.20);
        return hc;
    }

    std::vector<Sentence> load_monolingual() const {
        std::string path = cfg_.get("backtranslation", "mono");
        LanguageTag lang{cfg_.get("backtranslation", "mono_lang", "ban")};
        std::string origin = cfg_.get("backtranslation", "mono_origin", "monolingual");
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open monolingual file: " + path);
        std::vector<Sentence> out;
        std::string line;
        while (std::getline(in, line)) {
            if (uni::trim(line).empty()) continue;
            Sentence s;
            s.id = static_cast<std::int64_t>(out.size());
            s.text = line;
            s.lang = lang;
            s.origin = origin;
            out.push_back(std::move(s));
        }
        return out;
    }

    std::string checkpoint_dir() const {
        return (std::filesystem::path(out_dir_) / "checkpoints").string();
    }
    std::string out_path(const std::string& name) const {
        return (std::filesystem::path(out_dir_) / name).string();
    }

    template <typename Fn>
    void run_stage(const std::string& name, std::vector<SentencePair>& pairs,
                   FilterReport& report, Fn&& fn) {
        auto ckpt = std::filesystem::path(checkpoint_dir()) / (name + ".jsonl");
        auto ckpt_report = std::filesystem::path(checkpoint_dir()) / (name + ".report.json");
        if (std::filesystem::exists(ckpt) && std::filesystem::exists(ckpt_report)) {
            pairs = read_corpus(ckpt.string(), CorpusFormat::jsonl, names_);
            std::ifstream in(ckpt_report);
            nlohmann::json j;
            in >> j;
            FilterReport rep;
            for (const auto& s : j.at("stages"))
                rep.stages.emplace_back(
                    s.at("name").get<std::string>(),
                    FilterReport::StageCount{s.at("input").get<std::int64_t>(),
                                             s.at("rejected").get<std::int64_t>()});
            for (const auto& r : j.at("rejections"))
                rep.rejections.push_back({r.at("pair_id").get<std::int64_t>(),
                                          r.at("filter").get<std::string>(),
                                          r.at("reason").get<std::string>()});
            report.merge(rep);
            return;
        }
        FilterReport stage_report;
        try {
            fn(pairs, stage_report);
        } catch (const std::exception& e) {
            throw StageFailure(name, e.what());
        }
        report.merge(stage_report);
        write_corpus(pairs, ckpt.string(), CorpusFormat::jsonl);
        nlohmann::json j{{"stages", nlohmann::json::array()},
                        {"rejections", nlohmann::json::array()}};
        for (const auto& [n, c] : stage_report.stages)
            j["stages"].push_back({{"name", n}, {"input", c.input}, {"rejected", c.rejected}});
        for (const auto& r : stage_report.rejections)
            j["rejections"].push_back(
                {{"pair_id", r.pair_id}, {"filter", r.filter}, {"reason", r.reason}});
        std::ofstream(ckpt_report.string()) << j.dump(2) << '\n';
    }

    // Every input pair ends up exactly once in the log, as a survivor or as
    // a rejection with stage and reason.
    void write_provenance(const std::vector<SentencePair>& pairs) const {
        std::ofstream out(out_path("provenance.jsonl"), std::ios::trunc);
        for (const auto& p : pairs) {
            nlohmann::json j{{"pair_id", p.id}};
            if (p.status == Status::rejected) {
                j["action"] = "rejected";
                j["stage"] = p.reject_stage;
                j["reason"] = p.reject_reason;
            } else {
                j["action"] = "survivor";
                j["status"] = status_name(p.status);
            }
            out << j.dump() << '\n';
        }
    }

    Config cfg_;
    std::string out_dir_;
    LanguageNames names_;
    ChatBackend* cleaner_backend_ = nullptr;
    TranslatorBackend* translator_backend_ = nullptr;
    const LidBackend* lid_backend_ = nullptr;
};

}  // namespace bitext
