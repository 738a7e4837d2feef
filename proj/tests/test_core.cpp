#include <doctest.h>

#include "bitext/core.hpp"
#include "bitext/io.hpp"
#include "test_util.hpp"

using namespace bitext;
using testutil::make_pair;

TEST_CASE("language name map rejects bad codes and duplicate names") {
    LanguageNames n;
    n.add("ban", "Balinese");
    CHECK_THROWS(n.add("BAN", "Balinese2"));
    CHECK_THROWS(n.add("", "Empty"));
    CHECK_THROWS(n.add("xx", "Balinese"));  // display names must stay a bijection
    n.add("ban", "Balinese");               // re-adding the same mapping is fine
    CHECK(n.name("ban") == "Balinese");
    CHECK_THROWS(n.name("zz"));
}

TEST_CASE("defaults cover the four pipeline languages") {
    auto n = LanguageNames::defaults();
    CHECK(n.name("en") == "English");
    CHECK(n.name("id") == "Indonesian");
    CHECK(n.name("ban") == "Balinese");
    CHECK(n.name("min") == "Minangkabau");
}

static std::vector<SentencePair> pairs_of(std::size_t n) {
    std::vector<SentencePair> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(make_pair((std::int64_t)i, "src " + std::to_string(i),
                                "tgt " + std::to_string(i)));
    return out;
}

TEST_CASE("split sizes: 1000 pairs at seed 42 give 900/50/50") {
    auto s = split_dataset(pairs_of(1000), 42);
    CHECK(s.train.size() == 900);
    CHECK(s.validation.size() == 50);
    CHECK(s.test.size() == 50);
}

TEST_CASE("split sizes: floor to validation/test, remainder to train") {
    auto s = split_dataset(pairs_of(1001), 42);
    CHECK(s.train.size() == 901);
    CHECK(s.validation.size() == 50);
    CHECK(s.test.size() == 50);
}

TEST_CASE("split is deterministic for a fixed seed") {
    auto pairs = pairs_of(123);
    auto a = split_dataset(pairs, 7);
    auto b = split_dataset(pairs, 7);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);
    auto c = split_dataset(pairs, 8);
    CHECK(a.train != c.train);  // different seed reshuffles
}

TEST_CASE("split rejects fewer than 20 pairs") {
    CHECK_THROWS(split_dataset(pairs_of(19), 1));
    CHECK_NOTHROW(split_dataset(pairs_of(20), 1));
}

TEST_CASE("split partitions are disjoint and exhaustive for all n >= 20") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 20 + rng() % 500;
        auto pairs = pairs_of(n);
        auto s = split_dataset(pairs, rng());
        CHECK(s.train.size() + s.validation.size() + s.test.size() == n);
        CHECK(s.validation.size() == n * 5 / 100);
        CHECK(s.test.size() == n * 5 / 100);
        std::set<std::int64_t> all;
        all.insert(s.train.begin(), s.train.end());
        all.insert(s.validation.begin(), s.validation.end());
        all.insert(s.test.begin(), s.test.end());
        CHECK(all.size() == n);  // pairwise disjoint
        for (const auto& p : pairs) CHECK(all.count(p.id) == 1);
    }
}

TEST_CASE("rejection is sticky: a rejected pair is never resurrected") {
    auto p = make_pair(0, "a", "b");
    p.reject("length", "too_short");
    p.reject("lid", "lid_src");  // must not overwrite the first rejection
    CHECK(p.status == Status::rejected);
    CHECK(p.reject_stage == "length");
    CHECK(p.reject_reason == "too_short");
    CHECK_FALSE(p.active());
}
