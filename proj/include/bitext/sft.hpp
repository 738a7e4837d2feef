#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitext/core.hpp"
#include "bitext/unicode.hpp"

namespace bitext {

struct Direction {
    LanguageTag src, tgt;

    std::string key() const { return src.code + "-" + tgt.code; }
    bool operator==(const Direction&) const = default;
};

// One SFT training example. prompt + completion is the full training text;
// loss applies from loss_mask_offset (a code-point index, which equals the
// prompt length) onward.
struct SftRecord {
    std::int64_t pair_id = -1;
    std::string prompt;
    std::string completion;  // single leading space, then the target sentence
    Direction direction;
    std::string origin;
    bool synthetic = false;
    std::size_t loss_mask_offset = 0;
};

// Canonical byte layout:
//   Translate this from <Src> to <Tgt>: \n
//   <Src>: <source text>\n
//   <Tgt>:
// with a trailing space after the first colon and the completion carrying a
// single leading space.
inline SftRecord render_translation_prompt(const SentencePair& pair,
                                           const Direction& direction,
                                           const LanguageNames& names) {
    const Sentence* src = nullptr;
    const Sentence* tgt = nullptr;
    if (pair.src.lang == direction.src && pair.tgt.lang == direction.tgt) {
        src = &pair.src;
        tgt = &pair.tgt;
    } else if (pair.tgt.lang == direction.src && pair.src.lang == direction.tgt) {
        src = &pair.tgt;
        tgt = &pair.src;
    } else {
        throw std::invalid_argument("direction " + direction.key() +
                                    " does not match pair languages " +
                                    pair.src.lang.code + "/" + pair.tgt.lang.code);
    }
    const std::string& sn = names.name(direction.src.code);
    const std::string& tn = names.name(direction.tgt.code);

    SftRecord r;
    r.pair_id = pair.id;
    r.prompt = "Translate this from " + sn + " to " + tn + ": \n" + sn + ": " +
               src->text + "\n" + tn + ":";
    r.completion = " " + tgt->text;
    r.direction = direction;
    r.origin = src->origin;
    r.synthetic = pair.status == Status::synthetic;
    r.loss_mask_offset = uni::length(r.prompt);
    return r;
}

// Authentic pairs train both directions; synthetic pairs only the
// generated -> authentic direction, so the model always produces the
// authentic text.
inline std::vector<SftRecord> expand_directions(const std::vector<SentencePair>& pairs,
                                                const LanguageNames& names =
                                                    LanguageNames::defaults()) {
    std::vector<SftRecord> out;
    for (const auto& p : pairs) {
        if (!p.active()) continue;
        out.push_back(render_translation_prompt(p, {p.src.lang, p.tgt.lang}, names));
        if (p.status != Status::synthetic)
            out.push_back(render_translation_prompt(p, {p.tgt.lang, p.src.lang}, names));
    }
    return out;
}

inline nlohmann::json sft_record_to_json(const SftRecord& r) {
    return {{"prompt", r.prompt},
            {"completion", r.completion},
            {"direction", r.direction.key()},
            {"origin", r.origin},
            {"synthetic", r.synthetic},
            {"loss_mask_offset", r.loss_mask_offset}};
}

// Writes train/validation/test JSONL. Records are routed by pair id, so both
// direction-records of a pair always land in the same split.
inline void emit_sft(const std::vector<SftRecord>& records, const SplitAssignment& split,
                     const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    struct Out {
        const std::set<std::int64_t>* ids;
        std::ofstream file;
    };
    Out outs[3] = {
        {&split.train, std::ofstream(fs::path(out_dir) / "train.jsonl", std::ios::trunc)},
        {&split.validation,
         std::ofstream(fs::path(out_dir) / "validation.jsonl", std::ios::trunc)},
        {&split.test, std::ofstream(fs::path(out_dir) / "test.jsonl", std::ios::trunc)},
    };
    for (auto& o : outs)
        if (!o.file) throw std::runtime_error("cannot write SFT output in " + out_dir);

    for (const auto& r : records) {
        bool routed = false;
        for (auto& o : outs) {
            if (o.ids->count(r.pair_id)) {
                o.file << sft_record_to_json(r).dump() << '\n';
                routed = true;
                break;
            }
        }
        if (!routed)
            throw std::runtime_error("SFT record's pair id " + std::to_string(r.pair_id) +
                                     " is in no split");
    }
}

}  // namespace bitext
