// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "corpuskit/corpus.hpp"
#include "corpuskit/md5.hpp"
#include "corpuskit/unicode.hpp"

using namespace corpuskit;

TEST_CASE("nfc matches frozen unicodedata oracle") {
    // Expected values computed once with Python's unicodedata.normalize.
    static const std::pair<const char*, const char*> cases[] = {
        {"\x65\xcc\x81", "\xc3\xa9"},                  // e + acute -> e-acute
        {"\xc3\xa9", "\xc3\xa9"},                      // already composed
        {"\x71\xcc\x87\xcc\xa3", "\x71\xcc\xa3\xcc\x87"},  // combining marks reorder
        {"\xe1\x84\x80\xe1\x85\xa1\xe1\x86\xa8", "\xea\xb0\x81"},  // Hangul jamo -> syllable
        {"\xea\xb0\x81", "\xea\xb0\x81"},
        {"\xe2\x84\xab", "\xc3\x85"},                  // Angstrom sign -> A-ring
        {"\xe0\xa5\x98", "\xe0\xa4\x95\xe0\xa4\xbc"},  // composition exclusion
        {"\x61\xcc\x81\xcc\xa7", "\xc3\xa1\xcc\xa7"},
        {"\xef\xac\x81", "\xef\xac\x81"},              // compat ligature untouched
        {"\x73\xcc\xa3\xcc\x87", "\xe1\xb9\xa9"},      // two-step composition
        {"\x41\xcc\x8a", "\xc3\x85"},
        {"\xe4\xbd\xa0\xe5\xa5\xbd\xe4\xb8\x96\xe7\x95\x8c",
         "\xe4\xbd\xa0\xe5\xa5\xbd\xe4\xb8\x96\xe7\x95\x8c"},
        {"\xf0\x9f\x98\x80\x20\x65\x6d\x6f\x6a\x69", "\xf0\x9f\x98\x80\x20\x65\x6d\x6f\x6a\x69"},
        {"\x4d\x69\x78\x65\x64\x3a\x20\x65\xcc\x81\x73\x20\x61\x6e\x64\x20\xe1\x84\x80\xe1\x85"
         "\xa1\x20\x64\x6f\x6e\x65\x2e",
         "\x4d\x69\x78\x65\x64\x3a\x20\xc3\xa9\x73\x20\x61\x6e\x64\x20\xea\xb0\x80\x20\x64\x6f"
         "\x6e\x65\x2e"},
    };
    for (const auto& [input, expected] : cases) {
        CAPTURE(input);
        CHECK(nfc(input) == expected);
    }
}

TEST_CASE("nfc is idempotent on random ascii and cjk strings") {
    Rng rng(101);
    for (int i = 0; i < 200; ++i) {
        std::string s;
        const size_t len = rng.uniform_below(40);
        for (size_t k = 0; k < len; ++k) {
            switch (rng.uniform_below(3)) {
                case 0: encode_utf8(static_cast<char32_t>('a' + rng.uniform_below(26)), s); break;
                case 1: encode_utf8(static_cast<char32_t>(0x4E00 + rng.uniform_below(1000)), s); break;
                default: encode_utf8(static_cast<char32_t>(0x300 + rng.uniform_below(0x30)), s); break;
            }
        }
        CHECK(nfc(nfc(s)) == nfc(s));
    }
}

TEST_CASE("utf8 decode/encode round-trips codepoints") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        std::vector<char32_t> cps;
        const size_t len = 1 + rng.uniform_below(20);
        for (size_t k = 0; k < len; ++k) {
            char32_t cp;
            do {
                cp = static_cast<char32_t>(rng.uniform_below(0x10FFFF + 1));
            } while (cp >= 0xD800 && cp <= 0xDFFF);
            cps.push_back(cp);
        }
        CHECK(decode_string(encode_string(cps)) == cps);
    }
}

TEST_CASE("malformed utf8 decodes to replacement chars without throwing") {
    const std::string bad = "ok\x80\xC3(\xF0\x9F";
    const auto cps = decode_string(bad);
    CHECK(cps.size() >= 4);
    CHECK(cps[0] == U'o');
    CHECK(cps[2] == kReplacementChar);
}

TEST_CASE("count_tokens follows the word plus cjk-codepoint rule") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("hello world") == 2);
    CHECK(count_tokens("\xe4\xbd\xa0\xe5\xa5\xbd world") == 3);  // 2 cjk + 1 word
    CHECK(count_tokens("   ") == 0);
    CHECK(count_tokens("abc\xe4\xbd\xa0\xe5\xa5\xbd") == 3);  // run + 2 cjk
    CHECK(count_tokens("one  two\tthree\nfour") == 4);
}

TEST_CASE("count_tokens is additive over space-joined non-cjk text") {
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        std::string a, b;
        for (size_t k = 0; k < rng.uniform_below(12); ++k)
            a += " word" + std::to_string(rng.uniform_below(100));
        for (size_t k = 0; k < rng.uniform_below(12); ++k)
            b += "tok" + std::to_string(rng.uniform_below(100)) + " ";
        CHECK(count_tokens(a + " " + b) == count_tokens(a) + count_tokens(b));
    }
}

TEST_CASE("md5 matches rfc 1321 test vectors") {
    CHECK(Md5::hex("") == "d41d8cd98f00b204e9800998ecf8427e");
    CHECK(Md5::hex("a") == "0cc175b9c0f1b6a831c399e269772661");
    CHECK(Md5::hex("abc") == "900150983cd24fb0d6963f7d28e17f72");
    CHECK(Md5::hex("message digest") == "f96b697d7cb7938d525a2f31aaf161d0");
    CHECK(Md5::hex("abcdefghijklmnopqrstuvwxyz") == "c3fcd3d76192e4007dfb496cca67e13b");
    CHECK(Md5::hex("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789") ==
          "d174ab98d277d9f5a5611c2c9f419d9f");
    CHECK(Md5::hex("1234567890123456789012345678901234567890123456789012345678901234567890123456"
                   "7890") == "57edf4a22be3c955ac49da2e2107b67a");
}

TEST_CASE("md5 streaming equals one-shot across chunk boundaries") {
    std::string data;
    for (int i = 0; i < 300; ++i) data += "block" + std::to_string(i) + "|";
    for (size_t chunk : {1u, 7u, 63u, 64u, 65u, 200u}) {
        Md5 md5;
        for (size_t pos = 0; pos < data.size(); pos += chunk)
            md5.update(std::string_view(data).substr(pos, chunk));
        const auto digest = md5.digest();
        CHECK(digest == Md5::hash(data));
    }
}
