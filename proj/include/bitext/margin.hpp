#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitext/core.hpp"
#include "bitext/heuristics.hpp"

namespace bitext {

// Dense sentence embeddings, one row per sentence id. Read-only after load.
class EmbeddingTable {
  public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t dim, std::vector<float> data)
        : dim_(dim), data_(std::move(data)) {
        if (dim_ == 0 || data_.size() % dim_ != 0)
            throw std::invalid_argument("embedding data size not a multiple of dim");
        check_rows();
    }

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return dim_ ? data_.size() / dim_ : 0; }

    std::span<const float> row(std::size_t i) const {
        if (i >= rows())
            throw std::out_of_range("no embedding row for sentence " + std::to_string(i));
        return {data_.data() + i * dim_, dim_};
    }

    // Binary sidecar: magic "EMB1", u32 LE dim, u64 LE row count, then
    // row-major little-endian f32.
    static EmbeddingTable load_binary(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open embedding file: " + path);
        char magic[4];
        in.read(magic, 4);
        if (!in || std::memcmp(magic, "EMB1", 4) != 0)
            throw std::runtime_error("bad embedding file magic: " + path);
        std::uint32_t dim;
        std::uint64_t n;
        in.read(reinterpret_cast<char*>(&dim), 4);
        in.read(reinterpret_cast<char*>(&n), 8);
        if (!in || dim == 0) throw std::runtime_error("bad embedding header: " + path);
        std::vector<float> data(static_cast<std::size_t>(n) * dim);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(float)));
        if (!in) throw std::runtime_error("truncated embedding file: " + path);
        return EmbeddingTable(dim, std::move(data));
    }

    void save_binary(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write embedding file: " + path);
        out.write("EMB1", 4);
        std::uint32_t dim = static_cast<std::uint32_t>(dim_);
        std::uint64_t n = rows();
        out.write(reinterpret_cast<const char*>(&dim), 4);
        out.write(reinterpret_cast<const char*>(&n), 8);
        out.write(reinterpret_cast<const char*>(data_.data()),
                  static_cast<std::streamsize>(data_.size() * sizeof(float)));
    }

    // Text alternative: one space-separated vector per line.
    static EmbeddingTable load_text(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open embedding file: " + path);
        std::vector<float> data;
        std::size_t dim = 0;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::size_t count = 0;
            float v;
            while (ss >> v) { data.push_back(v); ++count; }
            if (dim == 0) dim = count;
            if (count != dim)
                throw std::runtime_error("embedding line " + std::to_string(lineno) +
                                         ": expected " + std::to_string(dim) + " values");
        }
        if (dim == 0) throw std::runtime_error("empty embedding file: " + path);
        return EmbeddingTable(dim, std::move(data));
    }

    static EmbeddingTable load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        char magic[4] = {};
        in.read(magic, 4);
        if (in && std::memcmp(magic, "EMB1", 4) == 0) return load_binary(path);
        return load_text(path);
    }

  private:
    void check_rows() const {
        for (std::size_t i = 0; i < rows(); ++i) {
            double norm = 0.0;
            for (float v : row(i)) norm += double(v) * v;
            if (norm == 0.0)
                throw std::invalid_argument("zero embedding vector at row " +
                                            std::to_string(i));
        }
    }

    std::size_t dim_ = 0;
    std::vector<float> data_;
};

inline double cosine(std::span<const float> x, std::span<const float> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += double(x[i]) * y[i];
        nx += double(x[i]) * x[i];
        ny += double(y[i]) * y[i];
    }
    if (nx == 0.0 || ny == 0.0)
        throw std::invalid_argument("cosine: zero_vector");
    return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
}

struct NeighborSet {
    std::int64_t query_id = -1;
    std::vector<std::pair<std::int64_t, double>> neighbors;  // (id, cosine), cos desc then id asc
    std::size_t k = 3;
};

// Exact brute-force top-k by cosine against every candidate row; ties broken
// by ascending candidate id.
inline NeighborSet knn(std::int64_t query_id, const EmbeddingTable& query_table,
                       const EmbeddingTable& candidate_table, std::size_t k = 3) {
    if (candidate_table.rows() == 0)
        throw std::invalid_argument("knn: empty candidate pool");
    auto q = query_table.row(static_cast<std::size_t>(query_id));
    std::vector<std::pair<std::int64_t, double>> all;
    all.reserve(candidate_table.rows());
    for (std::size_t i = 0; i < candidate_table.rows(); ++i)
        all.emplace_back(static_cast<std::int64_t>(i), cosine(q, candidate_table.row(i)));
    std::size_t take = std::min(k, all.size());
    auto cmp = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    std::partial_sort(all.begin(), all.begin() + take, all.end(), cmp);
    all.resize(take);
    return {query_id, std::move(all), k};
}

struct MarginScore {
    double value = 0.0;
    double cos_xy = 0.0;
    double denom = 0.0;
    bool defined = true;

    static constexpr double kDenomEps = 1e-9;
};

// Ratio-margin score of a candidate pair: cos(x,y) over the average
// neighborhood similarity of both sides. Neighbor pools are the full
// opposite-language tables, so the counterpart sentence itself competes.
inline MarginScore margin_score(std::int64_t x_id, std::int64_t y_id,
                                const EmbeddingTable& x_table,
                                const EmbeddingTable& y_table, std::size_t k = 3) {
    auto x = x_table.row(static_cast<std::size_t>(x_id));
    auto y = y_table.row(static_cast<std::size_t>(y_id));
    MarginScore ms;
    ms.cos_xy = cosine(x, y);

    const double two_k = 2.0 * static_cast<double>(k);
    double denom = 0.0;
    for (const auto& [id, cos] : knn(x_id, x_table, y_table, k).neighbors)
        denom += cos / two_k;
    for (const auto& [id, cos] : knn(y_id, y_table, x_table, k).neighbors)
        denom += cos / two_k;
    ms.denom = denom;
    if (denom <= MarginScore::kDenomEps) {
        ms.defined = false;
        return ms;
    }
    ms.value = ms.cos_xy / denom;
    return ms;
}

// Keep iff score >= threshold; the score lands in pair.scores["margin"].
inline FilterReport filter_by_margin(std::vector<SentencePair>& pairs,
                                     const EmbeddingTable& src_table,
                                     const EmbeddingTable& tgt_table,
                                     double threshold = 1.09, std::size_t k = 3) {
    FilterReport report;
    auto& counts = report.stage("margin");
    for (auto& p : pairs) {
        if (!p.active()) continue;
        ++counts.input;
        if (static_cast<std::size_t>(p.src.id) >= src_table.rows() ||
            static_cast<std::size_t>(p.tgt.id) >= tgt_table.rows())
            throw std::runtime_error("missing embedding row for pair " +
                                     std::to_string(p.id));
        auto ms = margin_score(p.src.id, p.tgt.id, src_table, tgt_table, k);
        if (!ms.defined) {
            p.reject("margin", "degenerate_margin");
            ++counts.rejected;
            report.record(p.id, "margin", "degenerate_margin");
            continue;
        }
        p.scores["margin"] = ms.value;
        if (ms.value < threshold) {
            p.reject("margin", "low_margin");
            ++counts.rejected;
            report.record(p.id, "margin", "low_margin");
        }
    }
    return report;
}

// Nearest-neighbor mining over a comparable document: each source claims its
// nearest target; claims below sim_threshold are dropped, and a contested
// target goes to the highest-cosine claimant (lower source id on ties).
// mutual_nn additionally requires the target's nearest source to be the
// claimant.
inline std::vector<SentencePair> mine_pairs(const std::vector<Sentence>& src_sentences,
                                            const EmbeddingTable& src_table,
                                            const std::vector<Sentence>& tgt_sentences,
                                            const EmbeddingTable& tgt_table,
                                            double sim_threshold = 0.7,
                                            bool mutual_nn = false) {
    if (src_sentences.empty() || tgt_sentences.empty()) return {};
    struct Claim {
        std::size_t src_idx;
        std::size_t tgt_idx;
        double cos;
    };
    std::vector<Claim> claims;
    for (std::size_t si = 0; si < src_sentences.size(); ++si) {
        auto nn = knn(src_sentences[si].id, src_table, tgt_table, 1);
        auto [tid, cos] = nn.neighbors.front();
        if (cos < sim_threshold) continue;
        if (mutual_nn) {
            auto back = knn(tid, tgt_table, src_table, 1);
            if (back.neighbors.front().first != src_sentences[si].id) continue;
        }
        claims.push_back({si, static_cast<std::size_t>(tid), cos});
    }
    // resolve contested targets: highest cosine wins, then lower source id
    std::map<std::size_t, Claim> best;
    for (const auto& c : claims) {
        auto it = best.find(c.tgt_idx);
        if (it == best.end() || c.cos > it->second.cos ||
            (c.cos == it->second.cos && c.src_idx < it->second.src_idx))
            best[c.tgt_idx] = c;
    }
    std::vector<SentencePair> out;
    for (const auto& c : claims) {
        const auto& winner = best.at(c.tgt_idx);
        if (winner.src_idx != c.src_idx) continue;
        SentencePair p;
        p.id = static_cast<std::int64_t>(out.size());
        p.src = src_sentences[c.src_idx];
        p.tgt = tgt_sentences[c.tgt_idx];
        p.scores["mine_cos"] = c.cos;
        p.status = Status::raw;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace bitext
