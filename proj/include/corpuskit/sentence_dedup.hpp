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

struct SentenceRef {
    std::string doc_id;
    size_t index = 0;  // position within the document's sentence list
    size_t begin = 0;  // byte span into the document text
    size_t end = 0;
    std::string text;  // equals the trimmed doc slice [begin, end)
};

struct SentenceCluster {
    std::string canonical;
    std::vector<SentenceRef> members;  // corpus order
    size_t doc_count = 0;              // distinct documents touched
};

struct SentenceDedupConfig {
    FingerprintConfig fp = sentence_fingerprint_defaults();
    double threshold = 0.6;        // sentence-level Jaccard cutoff
    size_t min_sentence_len = 8;   // codepoints; shorter segments merge backward
    size_t min_doc_len = 64;       // codepoints; gutted docs below this are dropped
    size_t max_doc_frequency = 8;  // K: clusters seen in more docs than this are junk
    bool keep_first = false;       // retain each junk cluster's first occurrence
};

namespace detail {

inline bool is_cjk_terminator(char32_t cp) {
    return cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F || cp == 0xFF1B;  // 。！？；
}

inline bool is_ascii_terminator(char32_t cp) { return cp == '.' || cp == '!' || cp == '?'; }

inline bool is_terminator(char32_t cp) { return is_ascii_terminator(cp) || is_cjk_terminator(cp); }

}  // namespace detail

// Splits on terminal punctuation and newlines. ASCII terminators end a
// sentence only before whitespace/end; CJK terminators end one
// unconditionally; terminator runs ("?!", "...") stay together. Trimmed
// segments shorter than min_len codepoints merge into the previous segment.
inline std::vector<SentenceRef> split_sentences(const Document& doc, size_t min_len = 8) {
    const std::string& text = doc.text;
    std::vector<std::pair<size_t, size_t>> raw;  // byte spans

    size_t seg_start = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        const size_t cp_start = pos;
        const char32_t cp = decode_utf8(text, pos);
        if (cp == '\n') {
            raw.emplace_back(seg_start, cp_start);
            seg_start = pos;
        } else if (detail::is_terminator(cp)) {
            size_t peek = pos;
            const char32_t next = peek < text.size() ? decode_utf8(text, peek) : U' ';
            if (detail::is_terminator(next)) continue;  // run continues
            if (detail::is_cjk_terminator(cp) || is_space(next) || pos >= text.size()) {
                raw.emplace_back(seg_start, pos);
                seg_start = pos;
            }
        }
    }
    if (seg_start < text.size()) raw.emplace_back(seg_start, text.size());

    std::vector<SentenceRef> out;
    for (auto [begin, end] : raw) {
        // Trim the span to its non-whitespace core.
        while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
        while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
        if (begin == end) continue;
        const std::string_view slice(text.data() + begin, end - begin);
        if (!out.empty() && codepoint_count(slice) < min_len) {
            SentenceRef& prev = out.back();
            prev.end = end;
            prev.text = text.substr(prev.begin, prev.end - prev.begin);
            continue;
        }
        SentenceRef ref;
        ref.doc_id = doc.id;
        ref.index = out.size();
        ref.begin = begin;
        ref.end = end;
        ref.text = std::string(slice);
        out.push_back(std::move(ref));
    }
    return out;
}

// Pools every sentence of every document globally, groups identical
// normalized texts, then joins near-identical variants with sentence-level
// MinHash/LSH. Returned clusters span >= 2 occurrences and are sorted by
// descending distinct-document count.
inline std::vector<SentenceCluster> sentence_clusters(const Corpus& corpus,
                                                      const FingerprintConfig& fp,
                                                      double threshold,
                                                      size_t min_sentence_len = 8) {
    if (threshold <= 0.0 || threshold > 1.0)
        throw ConfigError("sentence threshold must be in (0, 1]");
    fp.validate();

    struct Group {
        std::string key_text;           // normalized form
        std::vector<SentenceRef> refs;  // corpus order
        std::vector<size_t> ordinals;   // per ref: global position of its document
        std::unordered_set<std::string> doc_ids;
    };
    std::vector<Group> groups;
    std::unordered_map<std::string, size_t> group_by_key;

    size_t doc_ordinal = 0;
    corpus.for_each([&](const Document& d) {
        for (auto& ref : split_sentences(d, min_sentence_len)) {
            std::string key = nfc(ref.text);
            auto [it, inserted] = group_by_key.try_emplace(std::move(key), groups.size());
            if (inserted) groups.push_back(Group{it->first, {}, {}, {}});
            Group& g = groups[it->second];
            g.doc_ids.insert(ref.doc_id);
            g.ordinals.push_back(doc_ordinal);
            g.refs.push_back(std::move(ref));
        }
        ++doc_ordinal;
    });

    // Near-identical variants join across groups via MinHash on the
    // normalized texts.
    LshIndex index(fp.lsh);
    UnionFind uf(groups.size());
    std::vector<MinHashSignature> sigs;
    sigs.reserve(groups.size());
    for (const Group& g : groups)
        sigs.push_back(minhash_signature(shingle(g.key_text, fp.scheme), fp.k, fp.seed));
    for (size_t j = 0; j < groups.size(); ++j) {
        for (size_t i : index.candidates(sigs[j])) {
            if (uf.same(i, j)) continue;
            if (estimate_jaccard(sigs[i], sigs[j]) >= threshold) uf.unite(i, j);
        }
        index.insert(j, sigs[j]);
    }

    std::unordered_map<size_t, std::vector<size_t>> components;
    for (size_t i = 0; i < groups.size(); ++i) components[uf.find(i)].push_back(i);

    std::vector<SentenceCluster> clusters;
    for (auto& [root, member_groups] : components) {
        size_t total_refs = 0;
        for (size_t gi : member_groups) total_refs += groups[gi].refs.size();
        if (total_refs < 2) continue;

        SentenceCluster c;
        std::unordered_set<std::string> docs;
        size_t best_count = 0;
        for (size_t gi : member_groups) {
            const Group& g = groups[gi];
            for (const auto& id : g.doc_ids) docs.insert(id);
            if (g.doc_ids.size() > best_count ||
                (g.doc_ids.size() == best_count && g.key_text < c.canonical) ||
                c.canonical.empty()) {
                c.canonical = g.key_text;
                best_count = g.doc_ids.size();
            }
        }
        // member_groups are in first-occurrence order; refs within a group
        // are in corpus order. Merge keeps global corpus order.
        std::vector<std::pair<size_t, size_t>> order;  // (group, ref index)
        for (size_t gi : member_groups)
            for (size_t ri = 0; ri < groups[gi].refs.size(); ++ri) order.emplace_back(gi, ri);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) {
            const size_t oa = groups[a.first].ordinals[a.second];
            const size_t ob = groups[b.first].ordinals[b.second];
            if (oa != ob) return oa < ob;
            return groups[a.first].refs[a.second].index < groups[b.first].refs[b.second].index;
        });
        for (auto [gi, ri] : order) c.members.push_back(groups[gi].refs[ri]);
        c.doc_count = docs.size();
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(), [](const SentenceCluster& a, const SentenceCluster& b) {
        if (a.doc_count != b.doc_count) return a.doc_count > b.doc_count;
        return a.canonical < b.canonical;
    });
    return clusters;
}

struct SentencePruneResult {
    Corpus corpus;
    StageStats stats;
    std::vector<std::pair<std::string, std::string>> rewrites;  // (doc id, old text)
};

// Deletes every occurrence of every sentence whose cluster appears in more
// than K distinct documents (or all but the first occurrence, with
// keep_first). Survivors re-join with a space, or a newline when the
// original gap contained one; untouched documents pass through
// byte-identical. Documents whose surviving text drops below min_doc_len
// are removed outright.
inline SentencePruneResult prune_sentences(const Corpus& corpus,
                                           const std::vector<SentenceCluster>& clusters, size_t K,
                                           size_t min_sentence_len = 8, size_t min_doc_len = 64,
                                           bool keep_first = false) {
    if (K < 2) throw ConfigError("max doc frequency K must be >= 2");

    std::unordered_map<std::string, std::unordered_set<size_t>> remove;  // doc -> sentence idx
    for (const auto& c : clusters) {
        if (c.doc_count <= K) continue;
        for (size_t m = keep_first ? 1 : 0; m < c.members.size(); ++m)
            remove[c.members[m].doc_id].insert(c.members[m].index);
    }

    SentencePruneResult result;
    result.corpus.shards.reserve(corpus.shards.size());
    for (const auto& shard : corpus.shards) {
        Shard out{shard.name, {}};
        for (const auto& d : shard.docs) {
            auto it = remove.find(d.id);
            if (it == remove.end()) {
                out.docs.push_back(d);
                continue;
            }
            const auto sentences = split_sentences(d, min_sentence_len);
            std::string rebuilt;
            const SentenceRef* prev = nullptr;
            for (const auto& s : sentences) {
                if (it->second.count(s.index)) continue;
                if (prev) {
                    const std::string_view gap(d.text.data() + prev->end, s.begin - prev->end);
                    rebuilt.push_back(gap.find('\n') != std::string_view::npos ? '\n' : ' ');
                }
                rebuilt.append(s.text);
                prev = &s;
            }
            result.rewrites.emplace_back(d.id, d.text);
            if (codepoint_count(rebuilt) < min_doc_len) continue;
            Document nd = d;
            nd.set_text(std::move(rebuilt));
            out.docs.push_back(std::move(nd));
        }
        result.corpus.shards.push_back(std::move(out));
    }
    result.stats = StageStats::between("dedup_sentence", corpus, result.corpus);
    return result;
}

struct SentenceDedupResult {
    Corpus corpus;
    std::vector<SentenceCluster> clusters;
    StageStats stats;
};

inline SentenceDedupResult dedup_sentences(const Corpus& corpus,
                                           const SentenceDedupConfig& config = {}) {
    SentenceDedupResult result;
    result.clusters =
        sentence_clusters(corpus, config.fp, config.threshold, config.min_sentence_len);
    auto pruned = prune_sentences(corpus, result.clusters, config.max_doc_frequency,
                                  config.min_sentence_len, config.min_doc_len, config.keep_first);
    result.corpus = std::move(pruned.corpus);
    result.stats = std::move(pruned.stats);
    return result;
}

}  // namespace corpuskit
