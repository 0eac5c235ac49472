// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "corpuskit/nfc_data.hpp"

namespace corpuskit {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes one UTF-8 sequence starting at `pos`; advances `pos` past it.
// Malformed bytes decode to U+FFFD one byte at a time, so the scan always
// terminates and never throws.
inline char32_t decode_utf8(std::string_view s, size_t& pos) {
    const unsigned char b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return kReplacementChar;
    }
    if (pos + len > s.size()) {
        ++pos;
        return kReplacementChar;
    }
    for (int i = 1; i < len; ++i) {
        const unsigned char b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return kReplacementChar;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kReplacementChar;
    }
    pos += len;
    return cp;
}

inline void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::vector<char32_t> decode_string(std::string_view s) {
    std::vector<char32_t> cps;
    cps.reserve(s.size());
    size_t pos = 0;
    while (pos < s.size()) cps.push_back(decode_utf8(s, pos));
    return cps;
}

inline std::string encode_string(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size() * 3 / 2);
    for (char32_t cp : cps) encode_utf8(cp, out);
    return out;
}

inline size_t codepoint_count(std::string_view s) {
    size_t pos = 0, n = 0;
    while (pos < s.size()) {
        decode_utf8(s, pos);
        ++n;
    }
    return n;
}

// Han ideographs (the script class used for token counting and zh scoring).
inline constexpr bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // Unified Ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||    // Extension A
           (cp >= 0xF900 && cp <= 0xFAFF) ||    // Compatibility Ideographs
           (cp >= 0x20000 && cp <= 0x2EBEF) ||  // Extensions B..F
           (cp >= 0x2F800 && cp <= 0x2FA1F);    // Compat Supplement
}

inline constexpr bool is_latin_letter(char32_t cp) {
    return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 0x00C0 && cp <= 0x00FF && cp != 0x00D7 && cp != 0x00F7) ||
           (cp >= 0x0100 && cp <= 0x017F);
}

inline constexpr bool is_space(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
           cp == '\v' || cp == 0x00A0 || cp == 0x3000;
}

namespace detail {

inline uint8_t combining_class(char32_t cp) {
    const CcEntry* begin = kCombiningClass;
    const CcEntry* end = kCombiningClass + std::size(kCombiningClass);
    auto it = std::lower_bound(begin, end, cp,
                               [](const CcEntry& e, char32_t c) { return e.cp < c; });
    return (it != end && it->cp == cp) ? it->ccc : 0;
}

inline const DecompEntry* find_decomp(char32_t cp) {
    const DecompEntry* begin = kCanonicalDecomp;
    const DecompEntry* end = kCanonicalDecomp + std::size(kCanonicalDecomp);
    auto it = std::lower_bound(begin, end, cp,
                               [](const DecompEntry& e, char32_t c) { return e.cp < c; });
    return (it != end && it->cp == cp) ? it : nullptr;
}

inline char32_t find_composite(char32_t a, char32_t b) {
    const uint64_t key = (static_cast<uint64_t>(a) << 21) | b;
    const CompEntry* begin = kPrimaryComposite;
    const CompEntry* end = kPrimaryComposite + std::size(kPrimaryComposite);
    auto it = std::lower_bound(begin, end, key,
                               [](const CompEntry& e, uint64_t k) { return e.key < k; });
    return (it != end && it->key == key) ? it->composed : 0;
}

// Hangul syllables compose/decompose algorithmically (UAX #15 section 3.12).
inline constexpr char32_t kHangulSBase = 0xAC00;
inline constexpr char32_t kHangulLBase = 0x1100;
inline constexpr char32_t kHangulVBase = 0x1161;
inline constexpr char32_t kHangulTBase = 0x11A7;
inline constexpr int kHangulLCount = 19, kHangulVCount = 21, kHangulTCount = 28;
inline constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
inline constexpr int kHangulSCount = kHangulLCount * kHangulNCount;

inline void decompose_cp(char32_t cp, std::vector<char32_t>& out) {
    if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
        const int idx = static_cast<int>(cp - kHangulSBase);
        out.push_back(kHangulLBase + idx / kHangulNCount);
        out.push_back(kHangulVBase + (idx % kHangulNCount) / kHangulTCount);
        const int t = idx % kHangulTCount;
        if (t != 0) out.push_back(kHangulTBase + t);
        return;
    }
    if (const DecompEntry* e = find_decomp(cp)) {
        decompose_cp(e->a, out);
        if (e->b != 0) decompose_cp(e->b, out);
        return;
    }
    out.push_back(cp);
}

inline void canonical_reorder(std::vector<char32_t>& cps) {
    // Bubble pass over combining marks: swap adjacent marks out of ccc order.
    for (size_t i = 1; i < cps.size(); ++i) {
        const uint8_t cc = combining_class(cps[i]);
        if (cc == 0) continue;
        size_t j = i;
        while (j > 0) {
            const uint8_t prev = combining_class(cps[j - 1]);
            if (prev == 0 || prev <= cc) break;
            std::swap(cps[j - 1], cps[j]);
            --j;
        }
    }
}

inline char32_t compose_pair(char32_t a, char32_t b) {
    // Hangul LV / LVT composition.
    if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount && b >= kHangulVBase &&
        b < kHangulVBase + kHangulVCount) {
        return kHangulSBase +
               ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) * kHangulTCount;
    }
    if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
        (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
        b < kHangulTBase + kHangulTCount) {
        return a + (b - kHangulTBase);
    }
    return find_composite(a, b);
}

inline void compose(std::vector<char32_t>& cps) {
    if (cps.empty()) return;
    std::vector<char32_t> out;
    out.reserve(cps.size());
    ptrdiff_t last_starter = -1;
    uint8_t last_cc = 0;
    for (char32_t cp : cps) {
        const uint8_t cc = combining_class(cp);
        if (last_starter >= 0 && (last_cc < cc || last_cc == 0)) {
            if (char32_t comp = compose_pair(out[last_starter], cp)) {
                out[last_starter] = comp;
                continue;
            }
        }
        if (cc == 0) {
            last_starter = static_cast<ptrdiff_t>(out.size());
            last_cc = 0;
        } else {
            last_cc = cc;
        }
        out.push_back(cp);
    }
    cps = std::move(out);
}

}  // namespace detail

// Canonical composition (NFC) of a UTF-8 string.
inline std::string nfc(std::string_view text) {
    std::vector<char32_t> cps;
    cps.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) detail::decompose_cp(decode_utf8(text, pos), cps);
    detail::canonical_reorder(cps);
    detail::compose(cps);
    return encode_string(cps);
}

inline std::string_view trim(std::string_view s) {
    size_t begin = 0;
    while (begin < s.size() && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    size_t end = s.size();
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

}  // namespace corpuskit
