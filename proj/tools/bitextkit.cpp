// bitextkit: parallel-corpus curation CLI. Subcommands cover each pipeline
// stage plus a config-driven end-to-end run.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "bitext/bitext.hpp"
#include "bitext/http.hpp"

namespace {

using namespace bitext;

nlohmann::json report_to_json(const FilterReport& report) {
    nlohmann::json j{{"stages", nlohmann::json::array()},
                    {"rejections", nlohmann::json::array()}};
    for (const auto& [name, c] : report.stages)
        j["stages"].push_back(
            {{"name", name}, {"input", c.input}, {"rejected", c.rejected}});
    for (const auto& r : report.rejections)
        j["rejections"].push_back(
            {{"pair_id", r.pair_id}, {"filter", r.filter}, {"reason", r.reason}});
    return j;
}

void write_report(const FilterReport& report, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << report_to_json(report).dump(2) << '\n';
}

std::vector<SentencePair> read_auto(const std::string& path) {
    return read_corpus(path, format_from_path(path));
}

std::unique_ptr<ChatBackend> make_chat_backend(const std::string& spec) {
    if (spec == "http") return std::make_unique<HttpChatBackend>();
    if (spec.rfind("replay:", 0) == 0)
        return std::make_unique<ReplayChatBackend>(spec.substr(7));
    throw CLI::ValidationError("--backend", "expected http or replay:<path>");
}

std::unique_ptr<TranslatorBackend> make_translator_backend(const std::string& spec) {
    if (spec == "http") return std::make_unique<HttpTranslatorBackend>();
    if (spec.rfind("replay:", 0) == 0)
        return std::make_unique<ReplayTranslatorBackend>(spec.substr(7));
    throw CLI::ValidationError("--translator", "expected http or replay:<path>");
}

TokenStream load_tokens(const std::string& path, bool pretokenized) {
    if (pretokenized) return load_token_sidecar(path);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return tokenize_whitespace(lines);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parallel-corpus curation toolkit"};
    app.require_subcommand(1);

    // ---- filter ----
    std::string f_config, f_in, f_out, f_report;
    auto* filter = app.add_subcommand("filter", "rule-based heuristic filters");
    filter->add_option("--config", f_config, "config file (heuristics section)");
    filter->add_option("--in", f_in)->required();
    filter->add_option("--out", f_out)->required();
    filter->add_option("--report", f_report, "report JSON path");

    // ---- lid ----
    std::string l_backend, l_in, l_out, l_report;
    double l_threshold = 0.9;
    auto* lid = app.add_subcommand("lid", "language-identification gate");
    lid->add_option("--backend", l_backend, "sidecar:<path> or ngram:<training file>")
        ->required();
    lid->add_option("--threshold", l_threshold, "minimum declared-language probability");
    lid->add_option("--in", l_in)->required();
    lid->add_option("--out", l_out)->required();
    lid->add_option("--report", l_report);

    // ---- margin-filter ----
    std::string m_src_emb, m_tgt_emb, m_in, m_out, m_report;
    double m_threshold = 1.09;
    std::size_t m_k = 3;
    auto* margin = app.add_subcommand("margin-filter", "margin-score bitext filter");
    margin->add_option("--src-emb", m_src_emb)->required();
    margin->add_option("--tgt-emb", m_tgt_emb)->required();
    margin->add_option("--threshold", m_threshold);
    margin->add_option("--k", m_k, "neighborhood size");
    margin->add_option("--in", m_in)->required();
    margin->add_option("--out", m_out)->required();
    margin->add_option("--report", m_report);

    // ---- mine ----
    std::string mi_src, mi_tgt, mi_src_emb, mi_tgt_emb, mi_out;
    std::string mi_src_lang, mi_tgt_lang, mi_origin = "mined";
    double mi_sim = 0.7;
    bool mi_mutual = false;
    auto* mine = app.add_subcommand("mine", "nearest-neighbor bitext mining");
    mine->add_option("--src", mi_src, "source sentences, one per line")->required();
    mine->add_option("--tgt", mi_tgt, "target sentences, one per line")->required();
    mine->add_option("--src-emb", mi_src_emb)->required();
    mine->add_option("--tgt-emb", mi_tgt_emb)->required();
    mine->add_option("--src-lang", mi_src_lang)->required();
    mine->add_option("--tgt-lang", mi_tgt_lang)->required();
    mine->add_option("--origin", mi_origin);
    mine->add_option("--sim", mi_sim, "cosine similarity threshold");
    mine->add_flag("--mutual", mi_mutual, "require mutual nearest neighbors");
    mine->add_option("--out", mi_out)->required();

    // ---- clean ----
    std::string c_backend = "http", c_in, c_out, c_report, c_cache;
    std::size_t c_batch = 8;
    bool c_strict = false;
    auto* clean = app.add_subcommand("clean", "LLM alignment verdicts and cleaning");
    clean->add_option("--backend", c_backend, "http or replay:<path>");
    clean->add_option("--batch-size", c_batch);
    clean->add_flag("--strict", c_strict, "drop unparseable batches");
    clean->add_option("--cache", c_cache, "response cache JSONL");
    clean->add_option("--in", c_in)->required();
    clean->add_option("--out", c_out)->required();
    clean->add_option("--report", c_report);

    // ---- backtranslate ----
    std::string b_mono, b_mono_lang, b_src_lang, b_translator, b_out, b_origin = "monolingual";
    long long b_sample_n = 0;
    std::uint64_t b_sample_seed = 0;
    auto* bt = app.add_subcommand("backtranslate", "synthetic pairs from monolingual text");
    bt->add_option("--mono", b_mono, "monolingual sentences, one per line")->required();
    bt->add_option("--mono-lang", b_mono_lang)->required();
    bt->add_option("--src-lang", b_src_lang, "language to generate")->required();
    bt->add_option("--translator", b_translator, "http or replay:<path>")->required();
    bt->add_option("--origin", b_origin);
    bt->add_option("--sample-n", b_sample_n, "random subset size (0 = all)");
    bt->add_option("--sample-seed", b_sample_seed);
    bt->add_option("--out", b_out)->required();

    // ---- split ----
    std::string s_in, s_out;
    std::uint64_t s_seed = 42;
    auto* split_cmd = app.add_subcommand("split", "deterministic 90/5/5 split");
    split_cmd->add_option("--in", s_in)->required();
    split_cmd->add_option("--seed", s_seed);
    split_cmd->add_option("--out", s_out, "JSON file of id sets")->required();

    // ---- emit-sft ----
    std::string e_in, e_out;
    std::uint64_t e_seed = 42;
    auto* emit = app.add_subcommand("emit-sft", "render SFT records into split files");
    emit->add_option("--in", e_in)->required();
    emit->add_option("--seed", e_seed);
    emit->add_option("--out", e_out, "output directory")->required();

    // ---- eval-bleu ----
    std::string bl_hyp, bl_ref, bl_smoothing = "add1";
    bool bl_pretok = false;
    auto* ebleu = app.add_subcommand("eval-bleu", "corpus BLEU over token streams");
    ebleu->add_option("--hyp", bl_hyp)->required();
    ebleu->add_option("--ref", bl_ref)->required();
    ebleu->add_flag("--pretokenized", bl_pretok,
                    "inputs are token sidecars (space-separated subwords)");
    ebleu->add_option("--smoothing", bl_smoothing)->check(CLI::IsMember({"none", "add1"}));

    // ---- stats ----
    std::string st_before, st_after;
    auto* stats_cmd = app.add_subcommand("stats", "before/after count table");
    stats_cmd->add_option("--before", st_before)->required();
    stats_cmd->add_option("--after", st_after)->required();

    // ---- run ----
    std::string r_config, r_in, r_out = "out";
    auto* run = app.add_subcommand("run", "full pipeline from a config file");
    run->add_option("--config", r_config)->required();
    run->add_option("--in", r_in)->required();
    run->add_option("--out", r_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*filter) {
            auto pairs = read_auto(f_in);
            HeuristicConfig hc;
            if (!f_config.empty()) {
                auto cfg = Config::load(f_config);
                hc.min_chars = (std::size_t)cfg.get_int("heuristics", "min_chars", 15);
                hc.max_chars = (std::size_t)cfg.get_int("heuristics", "max_chars", 500);
                hc.max_length_ratio = cfg.get_real("heuristics", "max_length_ratio", 2.0);
                hc.max_word_len = (std::size_t)cfg.get_int("heuristics", "max_word_len", 20);
                hc.punct_digit_threshold =
                    cfg.get_real("heuristics", "punct_digit_threshold", 0.20);
            }
            auto report = run_heuristics(pairs, hc);
            write_corpus(survivors(pairs), f_out, format_from_path(f_out));
            write_report(report, f_report);
        } else if (*lid) {
            auto pairs = read_auto(l_in);
            auto backend = make_lid_backend(l_backend);
            auto report = lid_filter(pairs, *backend, l_threshold);
            write_corpus(survivors(pairs), l_out, format_from_path(l_out));
            write_report(report, l_report);
        } else if (*margin) {
            auto pairs = read_auto(m_in);
            auto src = EmbeddingTable::load(m_src_emb);
            auto tgt = EmbeddingTable::load(m_tgt_emb);
            auto report = filter_by_margin(pairs, src, tgt, m_threshold, m_k);
            write_corpus(survivors(pairs), m_out, format_from_path(m_out));
            write_report(report, m_report);
        } else if (*mine) {
            auto load_side = [](const std::string& path, const std::string& lang,
                               const std::string& origin) {
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot open file: " + path);
                std::vector<Sentence> out;
                std::string line;
                while (std::getline(in, line)) {
                    Sentence s;
                    s.id = (std::int64_t)out.size();
                    s.text = line;
                    s.lang = {lang};
                    s.origin = origin;
                    out.push_back(std::move(s));
                }
                return out;
            };
            auto src = load_side(mi_src, mi_src_lang, mi_origin);
            auto tgt = load_side(mi_tgt, mi_tgt_lang, mi_origin);
            auto pairs = mine_pairs(src, EmbeddingTable::load(mi_src_emb), tgt,
                                    EmbeddingTable::load(mi_tgt_emb), mi_sim, mi_mutual);
            write_corpus(pairs, mi_out, format_from_path(mi_out));
        } else if (*clean) {
            auto pairs = read_auto(c_in);
            auto backend = make_chat_backend(c_backend);
            CleanerOptions opts;
            opts.batch_size = c_batch;
            opts.strict = c_strict;
            opts.cache_path = c_cache;
            auto outcome = clean_corpus(pairs, *backend, opts);
            write_corpus(survivors(pairs), c_out, format_from_path(c_out));
            write_report(outcome.report, c_report);
            std::cerr << "cleaned " << outcome.cleaned << ", misaligned "
                      << outcome.misaligned << ", unverified " << outcome.unverified
                      << ", cache hits " << outcome.cache_hits << "\n";
        } else if (*bt) {
            std::ifstream in(b_mono);
            if (!in) throw std::runtime_error("cannot open file: " + b_mono);
            std::vector<Sentence> mono;
            std::string line;
            while (std::getline(in, line)) {
                if (uni::trim(line).empty()) continue;
                Sentence s;
                s.id = (std::int64_t)mono.size();
                s.text = line;
                s.lang = {b_mono_lang};
                s.origin = b_origin;
                mono.push_back(std::move(s));
            }
            auto selected = select_monolingual(mono, HeuristicConfig{}, nullptr);
            if (b_sample_n > 0 && (std::size_t)b_sample_n < selected.size()) {
                std::mt19937_64 rng(b_sample_seed);
                std::shuffle(selected.begin(), selected.end(), rng);
                selected.resize((std::size_t)b_sample_n);
                std::sort(selected.begin(), selected.end(),
                          [](const Sentence& a, const Sentence& b) { return a.id < b.id; });
            }
            auto backend = make_translator_backend(b_translator);
            auto outcome = backtranslate(selected, *backend, {b_src_lang});
            write_corpus(outcome.pairs, b_out, format_from_path(b_out));
            std::cerr << "generated " << outcome.pairs.size() << " pairs, skipped "
                      << outcome.skipped << " sentences in " << outcome.failed_chunks
                      << " failed chunks\n";
        } else if (*split_cmd) {
            auto pairs = read_auto(s_in);
            auto split = split_dataset(pairs, s_seed);
            nlohmann::json j{{"seed", split.seed},
                            {"train", split.train},
                            {"validation", split.validation},
                            {"test", split.test}};
            std::ofstream out(s_out, std::ios::trunc);
            out << j.dump(2) << '\n';
        } else if (*emit) {
            auto pairs = read_auto(e_in);
            auto split = split_dataset(pairs, e_seed);
            auto records = expand_directions(pairs);
            emit_sft(records, split, e_out);
        } else if (*ebleu) {
            auto hyp = load_tokens(bl_hyp, bl_pretok);
            auto ref = load_tokens(bl_ref, bl_pretok);
            auto score = bleu(hyp, ref, 4,
                              bl_smoothing == "none" ? BleuSmoothing::none
                                                     : BleuSmoothing::add1_for_n_ge_2);
            nlohmann::json j{{"score", score.score},
                            {"precisions", score.precisions},
                            {"bp", score.brevity_penalty},
                            {"hyp_len", score.hyp_len},
                            {"ref_len", score.ref_len}};
            std::cout << j.dump(2) << "\n";
        } else if (*stats_cmd) {
            auto before = read_auto(st_before);
            auto after = read_auto(st_after);
            std::cout << render_stats(stats_report(before, after));
        } else if (*run) {
            Pipeline pipeline(Config::load(r_config), r_out);
            auto result = pipeline.run(r_in);
            std::cout << render_stats(result.stats);
        }
    } catch (const StageFailure& e) {
        std::cerr << "error: " << e.what() << " (checkpoints kept, rerun to resume)\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
