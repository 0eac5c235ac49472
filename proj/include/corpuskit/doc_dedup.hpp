// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpuskit/corpus.hpp"
#include "corpuskit/fingerprint.hpp"
#include "corpuskit/union_find.hpp"

namespace corpuskit {

enum class ClusterKind { Exact, Near };

struct DuplicateCluster {
    std::vector<std::string> members;  // >= 2, in corpus order
    std::string survivor;
    ClusterKind kind = ClusterKind::Near;

    json to_json() const {
        return json{{"survivor", survivor},
                    {"members", members},
                    {"kind", kind == ClusterKind::Exact ? "exact" : "near"}};
    }
};

struct DedupConfig {
    FingerprintConfig fp = document_fingerprint_defaults();
    double threshold = 0.8;  // near-duplicate Jaccard cutoff
};

struct ExactDedupResult {
    Corpus corpus;
    std::vector<DuplicateCluster> clusters;
    StageStats stats;
};

// Global exact pass: one survivor per MD5 key of the normalized text, the
// first occurrence in corpus order.
inline ExactDedupResult dedup_exact(const Corpus& corpus) {
    ExactDedupResult result;
    std::unordered_map<std::string, size_t> first_by_key;  // key -> cluster slot
    std::vector<DuplicateCluster> groups;
    std::unordered_set<std::string_view> drop;

    corpus.for_each([&](const Document& d) {
        const std::string key = exact_key(normalized_key_text(d.text));
        auto [it, inserted] = first_by_key.try_emplace(key, groups.size());
        if (inserted) {
            groups.push_back(DuplicateCluster{{d.id}, d.id, ClusterKind::Exact});
        } else {
            groups[it->second].members.push_back(d.id);
            drop.insert(d.id);
        }
    });

    result.corpus.shards.reserve(corpus.shards.size());
    for (const auto& shard : corpus.shards) {
        Shard out{shard.name, {}};
        for (const auto& d : shard.docs)
            if (!drop.count(d.id)) out.docs.push_back(d);
        result.corpus.shards.push_back(std::move(out));
    }
    for (auto& g : groups)
        if (g.members.size() >= 2) result.clusters.push_back(std::move(g));
    result.stats = StageStats::between("dedup_exact", corpus, result.corpus);
    return result;
}

// Near-duplicate clustering: LSH buckets propose candidate pairs, pairs at
// estimated Jaccard >= threshold are joined by union-find, and components
// of size >= 2 come back with the keep-longest survivor filled in.
inline std::vector<DuplicateCluster> cluster_near_duplicates(const Corpus& corpus,
                                                             const FingerprintConfig& fp,
                                                             double threshold) {
    if (threshold <= 0.0 || threshold > 1.0)
        throw ConfigError("near-duplicate threshold must be in (0, 1]");
    fp.validate();

    const auto docs = corpus.all_docs();
    std::vector<MinHashSignature> sigs;
    sigs.reserve(docs.size());
    for (const Document* d : docs)
        sigs.push_back(minhash_signature(shingle(normalized_key_text(d->text), fp.scheme), fp.k,
                                         fp.seed));

    LshIndex index(fp.lsh);
    UnionFind uf(docs.size());
    for (size_t j = 0; j < docs.size(); ++j) {
        for (size_t i : index.candidates(sigs[j])) {
            if (uf.same(i, j)) continue;
            if (estimate_jaccard(sigs[i], sigs[j]) >= threshold) uf.unite(i, j);
        }
        index.insert(j, sigs[j]);
    }

    std::unordered_map<size_t, std::vector<size_t>> components;
    for (size_t i = 0; i < docs.size(); ++i) components[uf.find(i)].push_back(i);

    std::vector<DuplicateCluster> clusters;
    std::vector<size_t> roots;
    for (const auto& [root, members] : components)
        if (members.size() >= 2) roots.push_back(root);
    // Components keyed by first member position: corpus-order output.
    std::sort(roots.begin(), roots.end(), [&](size_t a, size_t b) {
        return components[a].front() < components[b].front();
    });
    for (size_t root : roots) {
        DuplicateCluster c;
        c.kind = ClusterKind::Near;
        size_t best_len = 0;
        for (size_t idx : components[root]) {
            c.members.push_back(docs[idx]->id);
            const size_t len = codepoint_count(docs[idx]->text);
            if (c.survivor.empty() || len > best_len ||
                (len == best_len && docs[idx]->id < c.survivor)) {
                c.survivor = docs[idx]->id;
                best_len = len;
            }
        }
        clusters.push_back(std::move(c));
    }
    return clusters;
}

// Applies keep-longest survivorship: per cluster the member with maximal
// text length (codepoints) survives, ties broken by smallest id. Documents
// outside any cluster pass through untouched.
inline std::pair<Corpus, StageStats> resolve_clusters(const Corpus& corpus,
                                                      const std::vector<DuplicateCluster>& clusters) {
    std::unordered_map<std::string_view, size_t> lengths;
    corpus.for_each([&](const Document& d) { lengths.emplace(d.id, codepoint_count(d.text)); });

    std::unordered_set<std::string> drop;
    for (const auto& c : clusters) {
        const std::string* survivor = nullptr;
        size_t best_len = 0;
        for (const auto& id : c.members) {
            auto it = lengths.find(id);
            if (it == lengths.end())
                throw DataError("cluster references unknown document id: " + id);
            if (!survivor || it->second > best_len || (it->second == best_len && id < *survivor)) {
                survivor = &id;
                best_len = it->second;
            }
        }
        for (const auto& id : c.members)
            if (id != *survivor) drop.insert(id);
    }
    Corpus out;
    out.shards.reserve(corpus.shards.size());
    for (const auto& shard : corpus.shards) {
        Shard s{shard.name, {}};
        for (const auto& d : shard.docs)
            if (!drop.count(d.id)) s.docs.push_back(d);
        out.shards.push_back(std::move(s));
    }
    StageStats stats = StageStats::between("dedup_near", corpus, out);
    return {std::move(out), std::move(stats)};
}

struct DocDedupResult {
    Corpus corpus;
    std::vector<DuplicateCluster> clusters;  // exact then near
    std::vector<StageStats> stats;           // chained: exact, near
};

// Full document-level pass over all shards as one global pool: exact MD5
// dedup first (shrinks the LSH index), then near-duplicate clustering with
// keep-longest resolution. Never applied per batch.
inline DocDedupResult dedup_documents(const Corpus& corpus, const DedupConfig& config = {}) {
    DocDedupResult result;
    auto exact = dedup_exact(corpus);
    result.clusters = std::move(exact.clusters);
    result.stats.push_back(exact.stats);

    auto near = cluster_near_duplicates(exact.corpus, config.fp, config.threshold);
    auto [resolved, near_stats] = resolve_clusters(exact.corpus, near);
    for (auto& c : near) result.clusters.push_back(std::move(c));
    result.stats.push_back(std::move(near_stats));
    result.corpus = std::move(resolved);
    return result;
}

}  // namespace corpuskit
