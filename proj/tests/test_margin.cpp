#include <doctest.h>

#include <cmath>
#include <random>

#include "bitext/margin.hpp"
#include "test_util.hpp"

using namespace bitext;
using testutil::TempDir;
using testutil::make_pair;

namespace {

EmbeddingTable table_of(const std::vector<std::vector<float>>& rows) {
    std::vector<float> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return EmbeddingTable(rows.front().size(), std::move(flat));
}

EmbeddingTable random_table(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> flat(rows * dim);
    for (auto& v : flat) v = dist(rng);
    for (std::size_t r = 0; r < rows; ++r) flat[r * dim] += 2.0f;  // keep rows off zero
    return EmbeddingTable(dim, std::move(flat));
}

std::vector<float> basis(std::size_t dim, std::size_t axis) {
    std::vector<float> v(dim, 0.0f);
    v[axis] = 1.0f;
    return v;
}

// ---- independent full-scan reference, long-double arithmetic ----

double ref_cosine(std::span<const float> a, std::span<const float> b) {
    long double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += (long double)a[i] * b[i];
        na += (long double)a[i] * a[i];
        nb += (long double)b[i] * b[i];
    }
    return (double)(dot / (std::sqrt(na) * std::sqrt(nb)));
}

std::vector<std::pair<std::int64_t, double>> ref_knn(std::span<const float> q,
                                                     const EmbeddingTable& pool,
                                                     std::size_t k) {
    std::vector<std::pair<std::int64_t, double>> all;
    for (std::size_t i = 0; i < pool.rows(); ++i)
        all.emplace_back((std::int64_t)i, ref_cosine(q, pool.row(i)));
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

double ref_margin(std::int64_t x, std::int64_t y, const EmbeddingTable& xs,
                  const EmbeddingTable& ys, std::size_t k) {
    double denom = 0;
    for (auto& [id, c] : ref_knn(xs.row(x), ys, k)) denom += c / (2.0 * k);
    for (auto& [id, c] : ref_knn(ys.row(y), xs, k)) denom += c / (2.0 * k);
    return ref_cosine(xs.row(x), ys.row(y)) / denom;
}

}  // namespace

TEST_CASE("cosine basics") {
    std::vector<float> e0{1, 0, 0}, a{1, 2, 3}, b{4, 5, 6};
    CHECK(cosine(e0, e0) == doctest::Approx(1.0));
    std::vector<float> x{1, 0}, y{0, 1};
    CHECK(cosine(x, y) == doctest::Approx(0.0));
    // 32 / (sqrt(14) * sqrt(77))
    CHECK(cosine(a, b) == doctest::Approx(32.0 / std::sqrt(14.0 * 77.0)).epsilon(1e-12));
}

TEST_CASE("cosine error paths") {
    std::vector<float> z{0, 0, 0}, v{1, 0, 0}, short2{1, 0};
    CHECK_THROWS(cosine(z, v));
    CHECK_THROWS(cosine(v, short2));
}

TEST_CASE("embedding table rejects zero rows and ragged data") {
    CHECK_THROWS(EmbeddingTable(3, {1, 0, 0, 0, 0, 0}));  // second row is zero
    CHECK_THROWS(EmbeddingTable(3, {1, 0}));              // not a multiple of dim
}

TEST_CASE("embedding binary format round-trips and self-identifies") {
    TempDir dir("emb");
    std::mt19937_64 rng(3);
    auto table = random_table(rng, 17, 5);
    table.save_binary(dir.file("t.emb"));
    auto back = EmbeddingTable::load(dir.file("t.emb"));
    REQUIRE(back.dim() == 5);
    REQUIRE(back.rows() == 17);
    for (std::size_t r = 0; r < 17; ++r)
        for (std::size_t c = 0; c < 5; ++c) CHECK(back.row(r)[c] == table.row(r)[c]);
}

TEST_CASE("embedding text format loads and validates widths") {
    TempDir dir("emb");
    testutil::write_file(dir.file("t.txt"), "1 0 0\n0 1 0\n");
    auto t = EmbeddingTable::load(dir.file("t.txt"));
    CHECK(t.dim() == 3);
    CHECK(t.rows() == 2);
    testutil::write_file(dir.file("bad.txt"), "1 0 0\n0 1\n");
    CHECK_THROWS(EmbeddingTable::load(dir.file("bad.txt")));
}

TEST_CASE("knn ties break by ascending candidate id") {
    auto pool = table_of({basis(4, 0), basis(4, 0), basis(4, 0)});
    auto q = table_of({basis(4, 0)});
    auto nn = knn(0, q, pool, 3);
    REQUIRE(nn.neighbors.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(nn.neighbors[i].first == (std::int64_t)i);
        CHECK(nn.neighbors[i].second == doctest::Approx(1.0));
    }
}

TEST_CASE("knn returns the whole pool when it is smaller than k") {
    auto pool = table_of({basis(4, 0), basis(4, 1)});
    auto q = table_of({basis(4, 0)});
    CHECK(knn(0, q, pool, 3).neighbors.size() == 2);
}

TEST_CASE("knn agrees with the full-scan reference on random instances") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        auto queries = random_table(rng, 50, 8);
        auto pool = random_table(rng, 50, 8);
        for (std::size_t q = 0; q < queries.rows(); ++q) {
            auto got = knn((std::int64_t)q, queries, pool, 3);
            auto want = ref_knn(queries.row(q), pool, 3);
            REQUIRE(got.neighbors.size() == want.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                CHECK(got.neighbors[i].first == want[i].first);
                CHECK(got.neighbors[i].second == doctest::Approx(want[i].second).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("knn agrees with the reference at 1000x64 scale") {
    std::mt19937_64 rng(12);
    auto queries = random_table(rng, 20, 64);
    auto pool = random_table(rng, 1000, 64);
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        auto got = knn((std::int64_t)q, queries, pool, 3);
        auto want = ref_knn(queries.row(q), pool, 3);
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(got.neighbors[i].first == want[i].first);
    }
}

TEST_CASE("margin score is 1.0 when both pools are one repeated unit vector") {
    std::vector<std::vector<float>> rows(4, basis(6, 2));
    auto xs = table_of(rows), ys = table_of(rows);
    auto ms = margin_score(0, 0, xs, ys, 3);
    REQUIRE(ms.defined);
    CHECK(ms.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constructed orthogonal instance scores exactly 3.0") {
    // x = e0 orthogonal to every target except y = e0; likewise for y in X.
    auto xs = table_of({basis(8, 0), basis(8, 1), basis(8, 2), basis(8, 3)});
    auto ys = table_of({basis(8, 0), basis(8, 4), basis(8, 5), basis(8, 6)});
    auto ms = margin_score(0, 0, xs, ys, 3);
    REQUIRE(ms.defined);
    CHECK(ms.cos_xy == doctest::Approx(1.0));
    CHECK(ms.denom == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(ms.value == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("margin scores match the independent reference on 200 random pairs") {
    std::mt19937_64 rng(21);
    auto xs = random_table(rng, 200, 32);
    auto ys = random_table(rng, 200, 32);
    for (std::int64_t i = 0; i < 200; ++i) {
        auto ms = margin_score(i, i, xs, ys, 3);
        REQUIRE(ms.defined);
        CHECK(ms.value == doctest::Approx(ref_margin(i, i, xs, ys, 3)).epsilon(1e-6));
    }
}

TEST_CASE("margin score is invariant under positive row scalings") {
    std::mt19937_64 rng(23);
    auto xs = random_table(rng, 40, 16);
    auto ys = random_table(rng, 40, 16);
    // power-of-two scales are exact in f32, so this probes the algorithm,
    // not storage rounding
    auto scaled = [&](const EmbeddingTable& t) {
        std::vector<float> flat;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            float s = std::ldexp(1.0f, (int)(rng() % 7) - 3);  // 1/8 .. 8
            for (float v : t.row(r)) flat.push_back(v * s);
        }
        return EmbeddingTable(t.dim(), std::move(flat));
    };
    auto xs2 = scaled(xs), ys2 = scaled(ys);
    for (std::int64_t i = 0; i < 40; ++i) {
        auto a = margin_score(i, i, xs, ys, 3);
        auto b = margin_score(i, i, xs2, ys2, 3);
        CHECK(std::abs(a.value - b.value) <= 1e-9);
        auto na = knn(i, xs, ys, 3), nb = knn(i, xs2, ys2, 3);
        for (std::size_t j = 0; j < na.neighbors.size(); ++j) {
            CHECK(na.neighbors[j].first == nb.neighbors[j].first);
            CHECK(std::abs(na.neighbors[j].second - nb.neighbors[j].second) <= 1e-9);
        }
    }
}

TEST_CASE("filter_by_margin keeps exactly the pairs scoring >= threshold") {
    std::mt19937_64 rng(29);
    auto xs = random_table(rng, 50, 8);
    auto ys = random_table(rng, 50, 8);
    std::vector<SentencePair> pairs;
    for (int i = 0; i < 50; ++i) pairs.push_back(make_pair(i, "s", "t"));

    auto run_at = [&](double threshold) {
        auto copy = pairs;
        filter_by_margin(copy, xs, ys, threshold, 3);
        std::set<std::int64_t> kept;
        for (const auto& p : copy)
            if (p.active()) kept.insert(p.id);
        return kept;
    };

    auto kept = run_at(1.09);
    for (std::int64_t i = 0; i < 50; ++i) {
        double s = margin_score(i, i, xs, ys, 3).value;
        CHECK(kept.count(i) == (s >= 1.09 ? 1 : 0));
    }
    // monotone in threshold
    auto low = run_at(0.5), high = run_at(1.5);
    for (auto id : high) CHECK(kept.count(id) == 1);
    for (auto id : kept) CHECK(low.count(id) == 1);
    // threshold 0 keeps everything with a defined score
    CHECK(run_at(0.0).size() == 50);
}

TEST_CASE("all-identical corpus scores 1.0 everywhere, so 1.09 rejects all") {
    std::vector<std::vector<float>> rows(10, basis(4, 1));
    auto xs = table_of(rows), ys = table_of(rows);
    std::vector<SentencePair> pairs;
    for (int i = 0; i < 10; ++i) pairs.push_back(make_pair(i, "s", "t"));
    filter_by_margin(pairs, xs, ys, 1.09, 3);
    CHECK(survivors(pairs).empty());
}

TEST_CASE("filter_by_margin reports a missing embedding row with the pair id") {
    auto xs = table_of({basis(4, 0)});
    auto ys = table_of({basis(4, 0)});
    std::vector<SentencePair> pairs{make_pair(0, "s", "t"), make_pair(1, "s2", "t2")};
    CHECK_THROWS(filter_by_margin(pairs, xs, ys));
}

static std::vector<Sentence> sentences(std::size_t n, const std::string& lang) {
    std::vector<Sentence> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({(std::int64_t)i, lang + std::to_string(i), {lang}, "doc"});
    return out;
}

TEST_CASE("mine_pairs basic threshold behavior") {
    SUBCASE("one source, one target, cosine above threshold") {
        auto xs = table_of({{1, 0.5f}});
        auto ys = table_of({{1, 0.0f}});  // cos ~0.894
        auto mined = mine_pairs(sentences(1, "ban"), xs, sentences(1, "en"), ys, 0.7);
        REQUIRE(mined.size() == 1);
        CHECK(mined[0].status == Status::raw);
        CHECK(mined[0].scores.at("mine_cos") == doctest::Approx(0.894427).epsilon(1e-4));
    }
    SUBCASE("cosine just below 0.7 yields nothing") {
        auto xs = table_of({{1.0f, 1.06f}});  // cos(45-ish deg) ~ 0.686
        auto ys = table_of({{1.0f, 0.0f}});
        CHECK(mine_pairs(sentences(1, "ban"), xs, sentences(1, "en"), ys, 0.7).empty());
    }
    SUBCASE("empty side yields empty result") {
        auto xs = table_of({basis(2, 0)});
        CHECK(mine_pairs({}, xs, sentences(1, "en"), xs, 0.7).empty());
    }
}

TEST_CASE("mine_pairs resolves contested targets to the higher cosine") {
    // both sources nearest to target 0; cosines ~0.8 vs ~0.75
    auto ys = table_of({{1, 0}});
    auto xs = table_of({{0.8f, 0.6f}, {0.75f, float(std::sqrt(1 - 0.75 * 0.75))}});
    auto mined = mine_pairs(sentences(2, "ban"), xs, sentences(1, "en"), ys, 0.7);
    REQUIRE(mined.size() == 1);
    CHECK(mined[0].src.text == "ban0");
    CHECK(mined[0].scores.at("mine_cos") == doctest::Approx(0.8));
}

TEST_CASE("mine_pairs matches exhaustive enumeration on random pools") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t ns = 2 + rng() % 49, nt = 2 + rng() % 49;
        auto xs = random_table(rng, ns, 6);
        auto ys = random_table(rng, nt, 6);
        auto mined = mine_pairs(sentences(ns, "ban"), xs, sentences(nt, "en"), ys, 0.7);

        // expected set by brute enumeration
        struct Claim { std::size_t s, t; double c; };
        std::vector<Claim> claims;
        for (std::size_t s = 0; s < ns; ++s) {
            std::size_t best_t = 0;
            double best_c = -2;
            for (std::size_t t = 0; t < nt; ++t) {
                double c = ref_cosine(xs.row(s), ys.row(t));
                if (c > best_c) { best_c = c; best_t = t; }
            }
            if (best_c >= 0.7) claims.push_back({s, best_t, best_c});
        }
        std::map<std::size_t, Claim> expect;
        for (const auto& c : claims) {
            auto it = expect.find(c.t);
            if (it == expect.end() || c.c > it->second.c) expect[c.t] = c;
        }

        REQUIRE(mined.size() == expect.size());
        std::set<std::int64_t> seen_targets;
        for (const auto& p : mined) {
            CHECK(p.scores.at("mine_cos") >= 0.7);
            CHECK(seen_targets.insert(p.tgt.id).second);  // injective on targets
            auto it = expect.find((std::size_t)p.tgt.id);
            REQUIRE(it != expect.end());
            CHECK((std::int64_t)it->second.s == p.src.id);
        }
    }
}

TEST_CASE("mutual-NN mining is a subset of one-directional mining") {
    std::mt19937_64 rng(43);
    auto xs = random_table(rng, 20, 6);
    auto ys = random_table(rng, 20, 6);
    auto one = mine_pairs(sentences(20, "ban"), xs, sentences(20, "en"), ys, 0.7, false);
    auto mutual = mine_pairs(sentences(20, "ban"), xs, sentences(20, "en"), ys, 0.7, true);
    std::set<std::pair<std::int64_t, std::int64_t>> one_set;
    for (const auto& p : one) one_set.insert({p.src.id, p.tgt.id});
    for (const auto& p : mutual) CHECK(one_set.count({p.src.id, p.tgt.id}) == 1);
}
