// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "corpuskit/doc_dedup.hpp"
#include "oracles.hpp"

using namespace corpuskit;

namespace {

Document doc(std::string id, std::string text) {
    Document d;
    d.id = std::move(id);
    d.domain = DomainTag::WebEn;
    d.set_text(std::move(text));
    return d;
}

Corpus one_shard(std::vector<Document> docs) {
    Corpus c;
    c.shards.push_back(Shard{"s0", std::move(docs)});
    return c;
}

std::set<std::string> ids_of(const Corpus& c) {
    std::set<std::string> out;
    c.for_each([&](const Document& d) { out.insert(d.id); });
    return out;
}

// Re-partitions the global document sequence into `parts` shards.
Corpus reshard(const Corpus& c, size_t parts) {
    std::vector<Document> all;
    c.for_each([&](const Document& d) { all.push_back(d); });
    Corpus out;
    const size_t per = (all.size() + parts - 1) / std::max<size_t>(parts, 1);
    for (size_t i = 0; i < all.size(); i += per) {
        Shard s{"part" + std::to_string(i / per), {}};
        for (size_t j = i; j < std::min(all.size(), i + per); ++j) s.docs.push_back(all[j]);
        out.shards.push_back(std::move(s));
    }
    return out;
}

// Fingerprint config used for oracle comparisons: exhaustive banding, so any
// pair with at least one equal component becomes a candidate, and a longer
// signature to keep estimates far from the decision threshold.
FingerprintConfig exhaustive_fp() {
    FingerprintConfig fp;
    fp.k = 256;
    fp.lsh = LshParams{256, 1};
    return fp;
}

struct PlantedCorpus {
    Corpus corpus;
    std::vector<oracle::OracleDoc> docs;
};

// Unique docs from disjoint vocabularies plus planted exact copies and
// near-duplicate groups (single-word edits on 60-90 word bases keep pairwise
// Jaccard far above any threshold the tests use).
PlantedCorpus make_planted(uint64_t seed, size_t families) {
    Rng rng(seed);
    PlantedCorpus out;
    std::vector<Document> docs;
    size_t id = 0;
    for (size_t f = 0; f < families; ++f) {
        const std::string base = oracle::synth_text(rng, f, 60 + rng.uniform_below(30));
        docs.push_back(doc("d" + std::to_string(id++), base));
        const uint64_t kind = rng.uniform_below(3);
        if (kind == 1) {  // exact copies
            const size_t copies = 1 + rng.uniform_below(2);
            for (size_t c = 0; c < copies; ++c)
                docs.push_back(doc("d" + std::to_string(id++), base));
        } else if (kind == 2) {  // near variants
            const size_t variants = 1 + rng.uniform_below(3);
            for (size_t v = 0; v < variants; ++v)
                docs.push_back(doc("d" + std::to_string(id++), oracle::perturb_text(rng, base, 1)));
        }
    }
    // Deterministic interleave so duplicates are not adjacent.
    Rng shuffle_rng(seed ^ 0xABCD);
    shuffle_rng.shuffle(docs);
    for (const auto& d : docs) out.docs.push_back(oracle::OracleDoc{d.id, d.text});
    out.corpus = one_shard(std::move(docs));
    return out;
}

}  // namespace

TEST_CASE("exact dedup keeps the first occurrence") {
    const Corpus corpus = one_shard({doc("A", "the same text"), doc("A_copy", "the same text")});
    const auto result = dedup_exact(corpus);
    CHECK(result.stats.docs_out == 1);
    CHECK(ids_of(result.corpus) == std::set<std::string>{"A"});
    REQUIRE(result.clusters.size() == 1);
    CHECK(result.clusters[0].survivor == "A");
    CHECK(result.clusters[0].kind == ClusterKind::Exact);
}

TEST_CASE("exact dedup leaves all-unique corpora unchanged") {
    const Corpus corpus = one_shard({doc("a", "alpha words"), doc("b", "beta words"),
                                     doc("c", "gamma words")});
    const auto result = dedup_exact(corpus);
    CHECK(result.clusters.empty());
    CHECK(ids_of(result.corpus) == ids_of(corpus));
    CHECK(result.stats.tokens_in == result.stats.tokens_out);
}

TEST_CASE("exact dedup token accounting matches pairwise comparison") {
    const Corpus corpus = one_shard({doc("a", "shared body text"), doc("b", "unique one"),
                                     doc("c", "shared body text"), doc("d", "unique two"),
                                     doc("e", "shared body text")});
    const auto result = dedup_exact(corpus);
    CHECK(result.stats.docs_out == 3);
    // Oracle: brute-force pairwise text comparison keeps a, b, d.
    uint64_t expected_tokens = 0;
    for (const char* id : {"a", "b", "d"})
        corpus.for_each([&](const Document& d) {
            if (d.id == id) expected_tokens += d.token_count;
        });
    CHECK(result.stats.tokens_out == expected_tokens);
    CHECK(ids_of(result.corpus) == std::set<std::string>{"a", "b", "d"});
}

TEST_CASE("whitespace and nfc variants share an exact key") {
    const Corpus corpus = one_shard({doc("a", "café menu here"),
                                     doc("b", "  café menu here \n")});
    const auto result = dedup_exact(corpus);
    CHECK(result.stats.docs_out == 1);
}

TEST_CASE("near clustering finds planted copies and skips unrelated docs") {
    Rng rng(17);
    const std::string base = oracle::synth_text(rng, 1, 60);
    const Corpus corpus = one_shard({doc("x", base), doc("y", base),
                                     doc("z", oracle::synth_text(rng, 2, 60))});
    const auto clusters = cluster_near_duplicates(corpus, document_fingerprint_defaults(), 0.8);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].members == std::vector<std::string>{"x", "y"});
}

TEST_CASE("disjoint-vocabulary corpora produce no near clusters") {
    Rng rng(18);
    std::vector<Document> docs;
    for (int i = 0; i < 12; ++i)
        docs.push_back(doc("d" + std::to_string(i), oracle::synth_text(rng, 100 + i, 40)));
    const auto clusters = cluster_near_duplicates(one_shard(std::move(docs)),
                                                  document_fingerprint_defaults(), 0.7);
    CHECK(clusters.empty());
}

TEST_CASE("planted high-jaccard triple clusters and matches the exact oracle") {
    Rng rng(19);
    const std::string base = oracle::synth_text(rng, 5, 70);
    std::vector<Document> docs;
    docs.push_back(doc("t0", base));
    docs.push_back(doc("t1", oracle::perturb_text(rng, base, 1)));
    docs.push_back(doc("t2", oracle::perturb_text(rng, base, 1)));
    for (int i = 0; i < 7; ++i)
        docs.push_back(doc("u" + std::to_string(i), oracle::synth_text(rng, 50 + i, 30)));
    const Corpus corpus = one_shard(std::move(docs));

    // Oracle: all-pairs exact Jaccard over word 5-gram string sets.
    std::map<std::string, std::set<std::string>> sets;
    corpus.for_each([&](const Document& d) {
        sets[d.id] = oracle::word_shingles(normalized_key_text(d.text), 5);
    });
    CHECK(oracle::exact_jaccard(sets["t0"], sets["t1"]) >= 0.7);
    CHECK(oracle::exact_jaccard(sets["t0"], sets["u0"]) < 0.1);

    const auto clusters = cluster_near_duplicates(corpus, exhaustive_fp(), 0.7);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].members == std::vector<std::string>{"t0", "t1", "t2"});
}

TEST_CASE("resolve keeps the longest member") {
    const std::string long_text(200, 'x');
    const std::string short_text(100, 'y');
    const Corpus corpus = one_shard({doc("short", short_text), doc("long", long_text)});
    const auto [resolved, stats] =
        resolve_clusters(corpus, {DuplicateCluster{{"short", "long"}, "", ClusterKind::Near}});
    CHECK(ids_of(resolved) == std::set<std::string>{"long"});
    CHECK(stats.docs_out == 1);
}

TEST_CASE("resolve breaks length ties by smallest id") {
    const Corpus corpus = one_shard({doc("bbb", "equal size"), doc("aaa", "equal size")});
    const auto [resolved, stats] =
        resolve_clusters(corpus, {DuplicateCluster{{"bbb", "aaa"}, "", ClusterKind::Near}});
    CHECK(ids_of(resolved) == std::set<std::string>{"aaa"});
}

TEST_CASE("resolve rejects dangling ids by name") {
    const Corpus corpus = one_shard({doc("a", "text one")});
    CHECK_THROWS_WITH(
        resolve_clusters(corpus, {DuplicateCluster{{"a", "ghost"}, "", ClusterKind::Near}}),
        Catch::Matchers::ContainsSubstring("ghost"));
}

TEST_CASE("dedup_documents removes exact duplicates split across shards") {
    Corpus corpus;
    corpus.shards.push_back(Shard{"s0", {doc("a", "cross shard duplicate text")}});
    corpus.shards.push_back(Shard{"s1", {doc("b", "cross shard duplicate text")}});
    const auto result = dedup_documents(corpus);
    CHECK(ids_of(result.corpus) == std::set<std::string>{"a"});
}

TEST_CASE("dedup_documents is idempotent") {
    const auto planted = make_planted(7, 12);
    const auto once = dedup_documents(planted.corpus);
    const auto twice = dedup_documents(once.corpus);
    CHECK(ids_of(once.corpus) == ids_of(twice.corpus));
    CHECK(twice.clusters.empty());
}

TEST_CASE("dedup_documents matches the brute-force oracle on planted corpora") {
    for (uint64_t seed : {21, 22, 23, 24, 25}) {
        const auto planted = make_planted(seed, 15);
        DedupConfig cfg;
        cfg.fp = exhaustive_fp();
        cfg.threshold = 0.55;  // planted pairs sit at J >= 0.7 or J = 0
        const auto result = dedup_documents(planted.corpus, cfg);
        const auto expected =
            oracle::brute_force_dedup(planted.docs, ShingleUnit::Word, 5, cfg.threshold);
        CHECK(ids_of(result.corpus) == expected);
    }
}

TEST_CASE("dedup_documents survivors are invariant under re-sharding") {
    const auto planted = make_planted(33, 14);
    const auto base = dedup_documents(planted.corpus);
    for (size_t parts : {2, 3, 5}) {
        const auto shuffled = dedup_documents(reshard(planted.corpus, parts));
        CHECK(ids_of(shuffled.corpus) == ids_of(base.corpus));
    }
}

TEST_CASE("no two survivors share an exact key and near survivors are longest") {
    const auto planted = make_planted(44, 16);
    const auto result = dedup_documents(planted.corpus);

    std::set<std::string> keys;
    result.corpus.for_each([&](const Document& d) {
        CHECK(keys.insert(exact_key(normalized_key_text(d.text))).second);
    });

    std::map<std::string, size_t> len;
    planted.corpus.for_each([&](const Document& d) { len[d.id] = codepoint_count(d.text); });
    const auto survivors = ids_of(result.corpus);
    for (const auto& c : result.clusters) {
        if (c.kind != ClusterKind::Near) continue;
        size_t max_len = 0;
        for (const auto& m : c.members) max_len = std::max(max_len, len[m]);
        for (const auto& m : c.members)
            if (survivors.count(m)) CHECK(len[m] == max_len);
    }
}
