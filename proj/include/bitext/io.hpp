#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitext/core.hpp"

namespace bitext {

enum class CorpusFormat { jsonl, tsv };

inline CorpusFormat format_from_name(const std::string& name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "tsv") return CorpusFormat::tsv;
    throw std::invalid_argument("unknown corpus format: " + name);
}

// Guess from extension, default jsonl.
inline CorpusFormat format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".tsv")
        return CorpusFormat::tsv;
    return CorpusFormat::jsonl;
}

namespace detail {

inline std::string encode_status(const SentencePair& p) {
    if (p.status == Status::rejected)
        return std::string("rejected:") + p.reject_stage + ":" + p.reject_reason;
    return status_name(p.status);
}

inline void decode_status(const std::string& s, SentencePair& p) {
    if (s.rfind("rejected", 0) == 0) {
        p.status = Status::rejected;
        auto c1 = s.find(':');
        if (c1 != std::string::npos) {
            auto c2 = s.find(':', c1 + 1);
            if (c2 == std::string::npos)
                throw std::invalid_argument("bad rejected status: " + s);
            p.reject_stage = s.substr(c1 + 1, c2 - c1 - 1);
            p.reject_reason = s.substr(c2 + 1);
        }
        return;
    }
    for (Status st : {Status::raw, Status::passed, Status::cleaned,
                      Status::unverified, Status::synthetic}) {
        if (s == status_name(st)) { p.status = st; return; }
    }
    throw std::invalid_argument("unknown status: " + s);
}

inline std::string tsv_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string tsv_unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            switch (s[++i]) {
                case '\\': out += '\\'; break;
                case 't': out += '\t'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                default: out += s[i];
            }
        } else {
            out += s[i];
        }
    }
    return out;
}

inline std::vector<std::string> tsv_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == '\t') { fields.push_back(cur); cur.clear(); }
        else cur += c;
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace detail

inline nlohmann::json pair_to_json(const SentencePair& p) {
    nlohmann::json j{{"src_lang", p.src.lang.code},
                     {"tgt_lang", p.tgt.lang.code},
                     {"src_text", p.src.text},
                     {"tgt_text", p.tgt.text},
                     {"origin", p.src.origin},
                     {"scores", p.scores},
                     {"status", detail::encode_status(p)}};
    if (!p.generation_direction.empty())
        j["direction"] = p.generation_direction;
    return j;
}

inline SentencePair pair_from_json(const nlohmann::json& j) {
    SentencePair p;
    p.src.lang.code = j.at("src_lang").get<std::string>();
    p.tgt.lang.code = j.at("tgt_lang").get<std::string>();
    p.src.text = j.at("src_text").get<std::string>();
    p.tgt.text = j.at("tgt_text").get<std::string>();
    p.src.origin = p.tgt.origin = j.value("origin", std::string{});
    if (j.contains("scores"))
        p.scores = j.at("scores").get<std::map<std::string, double>>();
    if (j.contains("status"))
        detail::decode_status(j.at("status").get<std::string>(), p);
    if (j.contains("direction"))
        p.generation_direction = j.at("direction").get<std::string>();
    return p;
}

// Reads a corpus file. Ids are assigned sequentially in file order; the
// pair id doubles as the sentence id on both sides (embedding sidecars are
// indexed by it).
inline std::vector<SentencePair> read_corpus(const std::string& path,
                                             CorpusFormat format,
                                             const LanguageNames& names = LanguageNames::defaults()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);

    std::vector<SentencePair> pairs;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        SentencePair p;
        if (format == CorpusFormat::jsonl) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
                p = pair_from_json(j);
            } catch (const std::exception& e) {
                throw std::runtime_error("line " + std::to_string(lineno) +
                                         ": malformed record: " + e.what());
            }
        } else {
            auto f = detail::tsv_fields(line);
            if (f.size() != 5)
                throw std::runtime_error("line " + std::to_string(lineno) +
                                         ": expected 5 fields, got " +
                                         std::to_string(f.size()));
            p.src.lang.code = f[0];
            p.tgt.lang.code = f[1];
            p.src.text = detail::tsv_unescape(f[2]);
            p.tgt.text = detail::tsv_unescape(f[3]);
            p.src.origin = p.tgt.origin = detail::tsv_unescape(f[4]);
        }
        if (!names.known(p.src.lang.code))
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": unknown language code: " + p.src.lang.code);
        if (!names.known(p.tgt.lang.code))
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": unknown language code: " + p.tgt.lang.code);
        p.id = static_cast<std::int64_t>(pairs.size());
        p.src.id = p.tgt.id = p.id;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

inline void write_corpus(const std::vector<SentencePair>& pairs,
                         const std::string& path, CorpusFormat format) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    for (const auto& p : pairs) {
        if (format == CorpusFormat::jsonl) {
            out << pair_to_json(p).dump() << '\n';
        } else {
            out << p.src.lang.code << '\t' << p.tgt.lang.code << '\t'
                << detail::tsv_escape(p.src.text) << '\t'
                << detail::tsv_escape(p.tgt.text) << '\t'
                << detail::tsv_escape(p.src.origin) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace bitext
