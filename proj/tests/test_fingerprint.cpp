// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "corpuskit/fingerprint.hpp"
#include "oracles.hpp"

using namespace corpuskit;

namespace {

ShingleSet hashed_set(const std::set<std::string>& strings) {
    ShingleSet s;
    for (const auto& str : strings) s.hashes.insert(hash64(str, kShingleHashSeed));
    return s;
}

ShingleSet set_of(std::initializer_list<uint64_t> values) {
    ShingleSet s;
    for (uint64_t v : values) s.hashes.insert(v);
    return s;
}

}  // namespace

TEST_CASE("exact_key equals md5 of the bytes") {
    CHECK(exact_key("abc") == "900150983cd24fb0d6963f7d28e17f72");
    CHECK(exact_key("same text") == exact_key("same text"));
    CHECK(exact_key("some text") != exact_key("some text!"));
}

TEST_CASE("shingle enumerates word windows") {
    const auto got = shingle("a b c", ShingleScheme{ShingleUnit::Word, 2});
    const auto want = hashed_set({"a b", "b c"});
    CHECK(got.hashes == want.hashes);
}

TEST_CASE("shingle enumerates char windows") {
    const auto got = shingle("abcd", ShingleScheme{ShingleUnit::Char, 3});
    const auto want = hashed_set({"abc", "bcd"});
    CHECK(got.hashes == want.hashes);
}

TEST_CASE("short text yields the whole-text singleton") {
    const auto got = shingle("hi", ShingleScheme{ShingleUnit::Word, 5});
    REQUIRE(got.hashes.size() == 1);
    CHECK(got.hashes == hashed_set({"hi"}).hashes);
    // Matches the oracle enumerator's short-text rule.
    CHECK(oracle::word_shingles("hi", 5).size() == 1);
}

TEST_CASE("empty text yields the empty shingle set") {
    CHECK(shingle("", ShingleScheme{ShingleUnit::Word, 3}).hashes.empty());
    CHECK(shingle("   ", ShingleScheme{ShingleUnit::Word, 3}).hashes.empty());
    CHECK(shingle("", ShingleScheme{ShingleUnit::Char, 3}).hashes.empty());
}

TEST_CASE("zero window size is a config error") {
    CHECK_THROWS_AS(shingle("text", ShingleScheme{ShingleUnit::Word, 0}), ConfigError);
}

TEST_CASE("equal shingle sets produce equal signatures") {
    const auto a = shingle("the quick brown fox jumps over the dog", ShingleScheme{});
    const auto b = shingle("the quick brown fox jumps over the dog", ShingleScheme{});
    CHECK(minhash_signature(a, 64, 9).values == minhash_signature(b, 64, 9).values);
}

TEST_CASE("empty set maps to the sentinel signature") {
    const auto sig = minhash_signature(ShingleSet{}, 16, 5);
    for (uint64_t v : sig.values) CHECK(v == kEmptySignatureSentinel);
}

TEST_CASE("adding a shingle never increases any signature component") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        ShingleSet base;
        const size_t n = 1 + rng.uniform_below(20);
        for (size_t i = 0; i < n; ++i) base.hashes.insert(rng.next_u64());
        ShingleSet super = base;
        super.hashes.insert(rng.next_u64());
        const auto sig_base = minhash_signature(base, 32, trial);
        const auto sig_super = minhash_signature(super, 32, trial);
        for (uint32_t i = 0; i < 32; ++i) CHECK(sig_super.values[i] <= sig_base.values[i]);
    }
}

TEST_CASE("identical signatures estimate jaccard 1") {
    const auto s = shingle("one two three four five six", ShingleScheme{ShingleUnit::Word, 2});
    const auto sig = minhash_signature(s, 128, 1);
    CHECK(estimate_jaccard(sig, sig) == 1.0);
}

TEST_CASE("disjoint sets estimate jaccard 0") {
    // Bijective per-component hashing: distinct elements cannot collide, so
    // disjoint sets share no minima at all.
    Rng rng(77);
    ShingleSet a, b;
    for (int i = 0; i < 300; ++i) a.hashes.insert(rng.next_u64());
    for (int i = 0; i < 300; ++i) b.hashes.insert(rng.next_u64());
    for (uint64_t x : a.hashes) REQUIRE(b.hashes.count(x) == 0);
    const auto sa = minhash_signature(a, 128, 3);
    const auto sb = minhash_signature(b, 128, 3);
    CHECK(estimate_jaccard(sa, sb) == 0.0);
}

TEST_CASE("estimate tracks the brute-force jaccard of a known pair") {
    // {a,b,c,d} vs {a,b,c,e}: exact J = 3/5.
    const auto a = set_of({101, 102, 103, 104});
    const auto b = set_of({101, 102, 103, 205});
    const double bound = 3.0 * std::sqrt(0.6 * 0.4 / 128.0);
    int within = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const auto sa = minhash_signature(a, 128, seed);
        const auto sb = minhash_signature(b, 128, seed);
        if (std::abs(estimate_jaccard(sa, sb) - 0.6) <= bound) ++within;
    }
    CHECK(within >= 19);  // 3-sigma bound: ~99.7% per trial
}

TEST_CASE("minhash estimator is unbiased over random set pairs") {
    Rng rng(555);
    double total_err = 0.0;
    double total_var = 0.0;
    const int pairs = 1000;
    for (int t = 0; t < pairs; ++t) {
        const size_t shared = 5 + rng.uniform_below(60);
        const size_t only_a = rng.uniform_below(60);
        const size_t only_b = rng.uniform_below(60);
        ShingleSet a, b;
        for (size_t i = 0; i < shared; ++i) {
            const uint64_t v = rng.next_u64();
            a.hashes.insert(v);
            b.hashes.insert(v);
        }
        for (size_t i = 0; i < only_a; ++i) a.hashes.insert(rng.next_u64());
        for (size_t i = 0; i < only_b; ++i) b.hashes.insert(rng.next_u64());
        const double exact = static_cast<double>(shared) /
                             static_cast<double>(shared + only_a + only_b);
        const auto sa = minhash_signature(a, 128, 1000 + t);
        const auto sb = minhash_signature(b, 128, 1000 + t);
        total_err += estimate_jaccard(sa, sb) - exact;
        total_var += exact * (1.0 - exact) / 128.0;
    }
    const double mean_err = total_err / pairs;
    const double stderr_mean = std::sqrt(total_var) / pairs;
    CHECK(std::abs(mean_err) <= 3.0 * stderr_mean);
}

TEST_CASE("incompatible signatures are rejected") {
    const auto s = set_of({1, 2, 3});
    const auto a = minhash_signature(s, 64, 1);
    const auto b = minhash_signature(s, 64, 2);
    const auto c = minhash_signature(s, 32, 1);
    CHECK_THROWS_AS(estimate_jaccard(a, b), ConfigError);
    CHECK_THROWS_AS(estimate_jaccard(a, c), ConfigError);
}

TEST_CASE("band keys are deterministic and config-checked") {
    const auto sig = minhash_signature(set_of({1, 2, 3, 4, 5}), 64, 9);
    const auto k1 = lsh_band_keys(sig, LshParams{16, 4});
    const auto k2 = lsh_band_keys(sig, LshParams{16, 4});
    CHECK(k1 == k2);
    CHECK(k1.size() == 16);
    CHECK_THROWS_AS(lsh_band_keys(sig, LshParams{16, 8}), ConfigError);

    const auto whole = lsh_band_keys(sig, LshParams{1, 64});
    CHECK(whole.size() == 1);
}

TEST_CASE("signatures equal on one band share exactly that band key") {
    MinHashSignature a, b;
    a.k = b.k = 8;
    a.seed = b.seed = 4;
    a.values = {1, 2, 3, 4, 5, 6, 7, 8};
    b.values = {1, 2, 900, 900, 900, 900, 900, 900};  // band 0 (rows 0-1) equal
    const LshParams params{4, 2};
    const auto ka = lsh_band_keys(a, params);
    const auto kb = lsh_band_keys(b, params);
    CHECK(ka[0] == kb[0]);
    for (size_t i = 1; i < 4; ++i) CHECK(ka[i] != kb[i]);
}

TEST_CASE("full-estimate pairs collide in every band and no-collision pairs differ per band") {
    Rng rng(83);
    const LshParams params{8, 8};
    for (int trial = 0; trial < 50; ++trial) {
        ShingleSet s;
        for (int i = 0; i < 30; ++i) s.hashes.insert(rng.next_u64());
        const auto a = minhash_signature(s, 64, trial);
        const auto b = minhash_signature(s, 64, trial);
        REQUIRE(estimate_jaccard(a, b) == 1.0);
        CHECK(lsh_band_keys(a, params) == lsh_band_keys(b, params));  // every band collides
    }
    for (int trial = 0; trial < 50; ++trial) {
        ShingleSet s1, s2;
        for (int i = 0; i < 30; ++i) s1.hashes.insert(rng.next_u64());
        for (int i = 0; i < 30; ++i) s2.hashes.insert(rng.next_u64());
        const auto a = minhash_signature(s1, 64, trial);
        const auto b = minhash_signature(s2, 64, trial);
        const auto ka = lsh_band_keys(a, params);
        const auto kb = lsh_band_keys(b, params);
        for (uint32_t band = 0; band < params.bands; ++band) {
            if (ka[band] == kb[band]) continue;
            // A non-colliding band must contain at least one differing component.
            bool differs = false;
            for (uint32_t r = 0; r < params.rows; ++r)
                differs |= a.values[band * params.rows + r] != b.values[band * params.rows + r];
            CHECK(differs);
        }
    }
}

TEST_CASE("lsh index returns earlier matching items in order") {
    const LshParams params{8, 8};
    LshIndex index(params);
    const auto s1 = minhash_signature(set_of({1, 2, 3, 4, 5, 6}), 64, 2);
    const auto s2 = minhash_signature(set_of({100, 200}), 64, 2);
    index.insert(0, s1);
    index.insert(1, s2);
    const auto cands = index.candidates(s1);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0] == 0);
}

TEST_CASE("signature serialization round-trips with header intact") {
    const auto sig = minhash_signature(set_of({11, 22, 33}), 16, 42);
    const ShingleScheme scheme{ShingleUnit::Char, 5};
    const std::string blob = serialize_signature(sig, scheme);
    ShingleScheme back_scheme;
    const auto back = deserialize_signature(blob, &back_scheme);
    CHECK(back.k == sig.k);
    CHECK(back.seed == sig.seed);
    CHECK(back.values == sig.values);
    CHECK(back_scheme.unit == scheme.unit);
    CHECK(back_scheme.n == scheme.n);
    CHECK_THROWS_AS(deserialize_signature(blob.substr(0, 10)), DataError);
}
