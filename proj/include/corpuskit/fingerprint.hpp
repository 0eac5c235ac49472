// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpuskit/md5.hpp"
#include "corpuskit/unicode.hpp"
#include "corpuskit/util.hpp"

namespace corpuskit {

// 128-bit exact-match key: MD5 of the normalized UTF-8 bytes.
inline std::string exact_key(std::string_view normalized_text) {
    return Md5::hex(normalized_text);
}

enum class ShingleUnit { Word, Char };

struct ShingleScheme {
    ShingleUnit unit = ShingleUnit::Word;
    uint32_t n = 5;

    std::string_view unit_name() const { return unit == ShingleUnit::Word ? "word" : "char"; }
};

struct ShingleSet {
    std::unordered_set<uint64_t> hashes;
    ShingleScheme scheme;
};

inline constexpr uint64_t kShingleHashSeed = 0x5113C0DE;

namespace detail {

inline std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

}  // namespace detail

// Hashed n-gram windows of the text. Word scheme: windows of n
// whitespace-separated tokens. Char scheme: windows of n codepoints.
// Non-empty text shorter than one window yields a singleton whole-text
// shingle; empty text yields the empty set.
inline ShingleSet shingle(std::string_view text, const ShingleScheme& scheme) {
    if (scheme.n == 0) throw ConfigError("shingle window size must be >= 1");
    ShingleSet set;
    set.scheme = scheme;
    if (scheme.unit == ShingleUnit::Word) {
        const auto words = detail::split_words(text);
        if (words.empty()) return set;
        if (words.size() < scheme.n) {
            std::string joined;
            for (size_t i = 0; i < words.size(); ++i) {
                if (i) joined.push_back(' ');
                joined.append(words[i]);
            }
            set.hashes.insert(hash64(joined, kShingleHashSeed));
            return set;
        }
        for (size_t i = 0; i + scheme.n <= words.size(); ++i) {
            std::string window;
            for (size_t j = 0; j < scheme.n; ++j) {
                if (j) window.push_back(' ');
                window.append(words[i + j]);
            }
            set.hashes.insert(hash64(window, kShingleHashSeed));
        }
    } else {
        const auto cps = decode_string(text);
        if (cps.empty()) return set;
        if (cps.size() < scheme.n) {
            set.hashes.insert(hash64(encode_string(cps), kShingleHashSeed));
            return set;
        }
        for (size_t i = 0; i + scheme.n <= cps.size(); ++i) {
            std::string window;
            for (size_t j = 0; j < scheme.n; ++j) encode_utf8(cps[i + j], window);
            set.hashes.insert(hash64(window, kShingleHashSeed));
        }
    }
    return set;
}

struct MinHashSignature {
    std::vector<uint64_t> values;
    uint32_t k = 0;
    uint64_t seed = 0;

    bool compatible_with(const MinHashSignature& other) const {
        return k == other.k && seed == other.seed;
    }
};

inline constexpr uint64_t kEmptySignatureSentinel = std::numeric_limits<uint64_t>::max();

// Per-component permutations are seeded multiply-add maps over 2^64: an odd
// multiplier makes each h_i a bijection of the shingle hash space.
inline MinHashSignature minhash_signature(const ShingleSet& set, uint32_t k, uint64_t seed) {
    if (k == 0) throw ConfigError("minhash signature length must be >= 1");
    MinHashSignature sig;
    sig.k = k;
    sig.seed = seed;
    sig.values.assign(k, kEmptySignatureSentinel);
    std::vector<uint64_t> mult(k), add(k);
    for (uint32_t i = 0; i < k; ++i) {
        mult[i] = detail::splitmix64(seed + 2 * i) | 1ULL;
        add[i] = detail::splitmix64(seed + 2 * i + 1);
    }
    for (uint64_t x : set.hashes) {
        for (uint32_t i = 0; i < k; ++i) {
            const uint64_t h = mult[i] * x + add[i];
            if (h < sig.values[i]) sig.values[i] = h;
        }
    }
    return sig;
}

// Fraction of equal components; unbiased estimate of the Jaccard similarity
// of the underlying shingle sets.
inline double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (!a.compatible_with(b))
        throw ConfigError("incompatible signatures: differing k or seed");
    size_t equal = 0;
    for (uint32_t i = 0; i < a.k; ++i)
        if (a.values[i] == b.values[i]) ++equal;
    return static_cast<double>(equal) / static_cast<double>(a.k);
}

struct LshParams {
    uint32_t bands = 16;
    uint32_t rows = 8;

    void validate(uint32_t k) const {
        if (bands == 0 || rows == 0 || bands * rows != k)
            throw ConfigError("LSH bands*rows must equal signature length k");
    }
};

// Band keys: one hash per band over (band index, the band's r components).
// Signatures equal on all components of a band share that band's key.
inline std::vector<uint64_t> lsh_band_keys(const MinHashSignature& sig, const LshParams& params) {
    params.validate(sig.k);
    std::vector<uint64_t> keys;
    keys.reserve(params.bands);
    for (uint32_t band = 0; band < params.bands; ++band) {
        uint64_t h = hash64(static_cast<uint64_t>(band), 0x1B5D0000 + band);
        for (uint32_t r = 0; r < params.rows; ++r)
            h = hash64(sig.values[band * params.rows + r], h);
        keys.push_back(h);
    }
    return keys;
}

// Bucket index over band keys. Posting lists keep insertion order, so
// candidate enumeration is deterministic in document order.
class LshIndex {
public:
    explicit LshIndex(LshParams params) : params_(params), buckets_(params.bands) {}

    void insert(size_t item, const MinHashSignature& sig) {
        const auto keys = lsh_band_keys(sig, params_);
        for (uint32_t band = 0; band < params_.bands; ++band)
            buckets_[band][keys[band]].push_back(item);
    }

    // Earlier-inserted items sharing at least one band with `sig`,
    // deduplicated, ascending by item index.
    std::vector<size_t> candidates(const MinHashSignature& sig) const {
        const auto keys = lsh_band_keys(sig, params_);
        std::vector<size_t> out;
        std::unordered_set<size_t> seen;
        for (uint32_t band = 0; band < params_.bands; ++band) {
            auto bucket_it = buckets_[band].find(keys[band]);
            if (bucket_it == buckets_[band].end()) continue;
            for (size_t item : bucket_it->second)
                if (seen.insert(item).second) out.push_back(item);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    const LshParams& params() const { return params_; }

private:
    LshParams params_;
    std::vector<std::unordered_map<uint64_t, std::vector<size_t>>> buckets_;
};

struct FingerprintConfig {
    ShingleScheme scheme{ShingleUnit::Word, 5};
    uint32_t k = 128;
    uint64_t seed = 0x5EED;
    LshParams lsh{16, 8};

    void validate() const {
        if (scheme.n == 0) throw ConfigError("shingle window size must be >= 1");
        lsh.validate(k);
    }
};

inline FingerprintConfig document_fingerprint_defaults() {
    return FingerprintConfig{};  // word 5-grams, k=128, 16x8 (threshold ~0.71)
}

inline FingerprintConfig sentence_fingerprint_defaults() {
    FingerprintConfig cfg;
    cfg.scheme = ShingleScheme{ShingleUnit::Char, 5};
    cfg.k = 64;
    cfg.lsh = LshParams{16, 4};
    return cfg;
}

// Binary signature serialization: (k, seed, unit, n) header then the values
// as little-endian 64-bit words. Stable across runs and platforms.
inline void append_le64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline uint64_t read_le64(std::string_view in, size_t offset) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    return v;
}

inline std::string serialize_signature(const MinHashSignature& sig, const ShingleScheme& scheme) {
    std::string out;
    out.reserve(32 + 8 * sig.values.size());
    append_le64(out, sig.k);
    append_le64(out, sig.seed);
    append_le64(out, scheme.unit == ShingleUnit::Word ? 0 : 1);
    append_le64(out, scheme.n);
    for (uint64_t v : sig.values) append_le64(out, v);
    return out;
}

inline MinHashSignature deserialize_signature(std::string_view bytes, ShingleScheme* scheme_out = nullptr) {
    if (bytes.size() < 32) throw DataError("signature blob too short");
    MinHashSignature sig;
    sig.k = static_cast<uint32_t>(read_le64(bytes, 0));
    sig.seed = read_le64(bytes, 8);
    const uint64_t unit = read_le64(bytes, 16);
    const uint64_t n = read_le64(bytes, 24);
    if (bytes.size() != 32 + 8 * static_cast<size_t>(sig.k))
        throw DataError("signature blob length mismatch");
    sig.values.resize(sig.k);
    for (uint32_t i = 0; i < sig.k; ++i) sig.values[i] = read_le64(bytes, 32 + 8 * i);
    if (scheme_out) {
        scheme_out->unit = unit == 0 ? ShingleUnit::Word : ShingleUnit::Char;
        scheme_out->n = static_cast<uint32_t>(n);
    }
    return sig;
}

}  // namespace corpuskit
