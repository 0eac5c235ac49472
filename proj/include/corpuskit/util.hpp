// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

// Error taxonomy. The CLI maps these onto exit codes (config/usage -> 2,
// data -> 3, mixture -> 4); library callers can catch the base type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

class MixtureError : public Error {
public:
    explicit MixtureError(const std::string& msg) : Error(msg) {}
};

namespace detail {

inline constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Seeded 64-bit hash of a byte string. FNV-1a accumulation with a splitmix
// finalizer; platform-independent, unlike std::hash.
inline uint64_t hash64(std::string_view bytes, uint64_t seed = 0) {
    uint64_t h = 0xCBF29CE484222325ULL ^ detail::splitmix64(seed);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return detail::splitmix64(h);
}

inline uint64_t hash64(uint64_t value, uint64_t seed = 0) {
    return detail::splitmix64(value ^ detail::splitmix64(seed ^ 0xA24BAED4963EE407ULL));
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

// Deterministic RNG. mt19937_64's raw output sequence is pinned by the
// standard; the bounded/real draws below avoid the implementation-defined
// std::*_distribution classes so streams replay identically everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, bound) by rejection; bound must be > 0.
    uint64_t uniform_below(uint64_t bound) {
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform_real() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Per-stage seeds derive from the single run seed and the stage name, so
// adding a stage never perturbs the streams of the others.
inline uint64_t derive_seed(uint64_t global_seed, std::string_view stage_name) {
    return hash64(stage_name, global_seed);
}

}  // namespace corpuskit
