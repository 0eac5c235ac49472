// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations and data generators shared by the
// unit and acceptance suites. Everything here recomputes results from first
// principles (string sets, all-pairs comparison, exhaustive checks) and
// stays independent of the library code paths it verifies.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corpuskit/corpus.hpp"
#include "corpuskit/fingerprint.hpp"
#include "corpuskit/unicode.hpp"
#include "corpuskit/util.hpp"

namespace oracle {

// --- shingle sets over strings (never hashed) ------------------------------

inline std::vector<std::string> split_ws(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) words.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

inline std::set<std::string> word_shingles(const std::string& text, size_t n) {
    const auto words = split_ws(text);
    std::set<std::string> out;
    if (words.empty()) return out;
    if (words.size() < n) {
        std::string joined;
        for (size_t i = 0; i < words.size(); ++i) {
            if (i) joined += ' ';
            joined += words[i];
        }
        out.insert(joined);
        return out;
    }
    for (size_t i = 0; i + n <= words.size(); ++i) {
        std::string window;
        for (size_t j = 0; j < n; ++j) {
            if (j) window += ' ';
            window += words[i + j];
        }
        out.insert(window);
    }
    return out;
}

inline std::set<std::string> char_shingles(const std::string& text, size_t n) {
    const auto cps = corpuskit::decode_string(text);
    std::set<std::string> out;
    if (cps.empty()) return out;
    if (cps.size() < n) {
        out.insert(corpuskit::encode_string(cps));
        return out;
    }
    for (size_t i = 0; i + n <= cps.size(); ++i) {
        std::string window;
        for (size_t j = 0; j < n; ++j) corpuskit::encode_utf8(cps[i + j], window);
        out.insert(window);
    }
    return out;
}

template <typename T>
inline double exact_jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 1.0;
    size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    const size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// --- minimal union-find (independent of the library's) ---------------------

struct TinyUf {
    std::vector<size_t> parent;
    explicit TinyUf(size_t n) : parent(n) {
        for (size_t i = 0; i < n; ++i) parent[i] = i;
    }
    size_t find(size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

// --- document dedup oracle: exact keys + all-pairs exact Jaccard -----------

struct OracleDoc {
    std::string id;
    std::string text;
};

// Survivor ids under: global exact dedup (first occurrence per normalized
// text), then all-pairs exact-Jaccard clustering at threshold theta with
// keep-longest (codepoints, tie -> smallest id) survivors.
inline std::set<std::string> brute_force_dedup(const std::vector<OracleDoc>& docs,
                                               corpuskit::ShingleUnit unit, size_t n,
                                               double theta) {
    // Exact pass.
    std::set<std::string> seen_keys;
    std::vector<OracleDoc> uniq;
    for (const auto& d : docs) {
        const std::string key = corpuskit::normalized_key_text(d.text);
        if (seen_keys.insert(key).second) uniq.push_back(d);
    }
    // Near pass.
    std::vector<std::set<std::string>> shingles;
    for (const auto& d : uniq) {
        const std::string norm = corpuskit::normalized_key_text(d.text);
        shingles.push_back(unit == corpuskit::ShingleUnit::Word ? word_shingles(norm, n)
                                                                : char_shingles(norm, n));
    }
    TinyUf uf(uniq.size());
    for (size_t i = 0; i < uniq.size(); ++i)
        for (size_t j = i + 1; j < uniq.size(); ++j)
            if (exact_jaccard(shingles[i], shingles[j]) >= theta) uf.unite(i, j);

    std::map<size_t, std::vector<size_t>> comps;
    for (size_t i = 0; i < uniq.size(); ++i) comps[uf.find(i)].push_back(i);
    std::set<std::string> survivors;
    for (const auto& [root, members] : comps) {
        size_t best = members[0];
        size_t best_len = corpuskit::codepoint_count(uniq[best].text);
        for (size_t m : members) {
            const size_t len = corpuskit::codepoint_count(uniq[m].text);
            if (len > best_len || (len == best_len && uniq[m].id < uniq[best].id)) {
                best = m;
                best_len = len;
            }
        }
        survivors.insert(uniq[best].id);
    }
    return survivors;
}

// --- repeated n-gram coverage: quadratic pairwise marking ------------------

inline double repeated_ngram_coverage(const std::string& text, size_t n) {
    const auto cps = corpuskit::decode_string(text);
    if (cps.size() < n) return 0.0;
    std::vector<bool> covered(cps.size(), false);
    const size_t windows = cps.size() - n + 1;
    for (size_t i = 0; i < windows; ++i) {
        for (size_t j = 0; j < windows; ++j) {
            if (i == j) continue;
            if (std::equal(cps.begin() + i, cps.begin() + i + n, cps.begin() + j)) {
                for (size_t k = i; k < i + n; ++k) covered[k] = true;
                break;
            }
        }
    }
    size_t hit = 0;
    for (bool b : covered) hit += b;
    return static_cast<double>(hit) / static_cast<double>(cps.size());
}

// --- topological order validity --------------------------------------------

inline bool is_valid_topo_order(const std::vector<std::string>& nodes,
                                const std::vector<std::pair<std::string, std::string>>& edges,
                                const std::vector<std::string>& order) {
    if (order.size() != nodes.size()) return false;
    std::map<std::string, size_t> pos;
    for (size_t i = 0; i < order.size(); ++i)
        if (!pos.emplace(order[i], i).second) return false;
    for (const auto& n : nodes)
        if (!pos.count(n)) return false;
    for (const auto& [from, to] : edges)
        if (pos.at(from) >= pos.at(to)) return false;
    return true;
}

// --- generators -------------------------------------------------------------

// Letter-only synthetic vocabulary (digit-bearing tokens would sit right at
// the code filter's alphabetic-fraction boundary).
inline std::string to_letters(uint64_t v) {
    std::string out;
    do {
        out.push_back(static_cast<char>('a' + v % 26));
        v /= 26;
    } while (v > 0);
    return out;
}

inline std::string synth_word(uint64_t family, uint64_t index) {
    return "w" + to_letters(family) + "x" + to_letters(index);
}

// A document of `len` words drawn from a family-specific vocabulary, so
// texts from different families share no tokens at all.
inline std::string synth_text(corpuskit::Rng& rng, uint64_t family, size_t len,
                              size_t vocab = 400) {
    std::string text;
    for (size_t i = 0; i < len; ++i) {
        if (i) text += ' ';
        text += synth_word(family, rng.uniform_below(vocab));
    }
    return text;
}

// Replaces `edits` words with fresh out-of-vocabulary tokens.
inline std::string perturb_text(corpuskit::Rng& rng, const std::string& text, size_t edits) {
    auto words = split_ws(text);
    for (size_t e = 0; e < edits && !words.empty(); ++e) {
        const size_t at = rng.uniform_below(words.size());
        words[at] = "edit" + std::to_string(rng.next_u64() % 1000000);
    }
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

}  // namespace oracle
