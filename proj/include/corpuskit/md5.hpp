// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace corpuskit {

// RFC 1321 MD5. Used as the exact-match document key; collision resistance
// is irrelevant here, only a stable 128-bit fingerprint.
class Md5 {
public:
    Md5() { reset(); }

    void reset() {
        state_ = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u};
        total_len_ = 0;
        buffer_len_ = 0;
    }

    void update(std::string_view data) {
        total_len_ += data.size();
        size_t offset = 0;
        if (buffer_len_ > 0) {
            const size_t take = std::min(data.size(), size_t(64) - buffer_len_);
            std::memcpy(buffer_.data() + buffer_len_, data.data(), take);
            buffer_len_ += take;
            offset = take;
            if (buffer_len_ == 64) {
                process_block(buffer_.data());
                buffer_len_ = 0;
            }
        }
        while (offset + 64 <= data.size()) {
            process_block(reinterpret_cast<const unsigned char*>(data.data()) + offset);
            offset += 64;
        }
        if (offset < data.size()) {
            buffer_len_ = data.size() - offset;
            std::memcpy(buffer_.data(), data.data() + offset, buffer_len_);
        }
    }

    std::array<uint8_t, 16> digest() {
        const uint64_t bit_len = total_len_ * 8;
        unsigned char pad[72] = {0x80};
        const size_t rem = buffer_len_;
        const size_t pad_len = (rem < 56) ? 56 - rem : 120 - rem;
        update(std::string_view(reinterpret_cast<const char*>(pad), pad_len));
        unsigned char len_bytes[8];
        for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<unsigned char>(bit_len >> (8 * i));
        update(std::string_view(reinterpret_cast<const char*>(len_bytes), 8));
        std::array<uint8_t, 16> out;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                out[i * 4 + j] = static_cast<uint8_t>(state_[i] >> (8 * j));
        return out;
    }

    static std::array<uint8_t, 16> hash(std::string_view data) {
        Md5 md5;
        md5.update(data);
        return md5.digest();
    }

    static std::string hex(std::string_view data) {
        static const char* digits = "0123456789abcdef";
        const auto d = hash(data);
        std::string out(32, '0');
        for (int i = 0; i < 16; ++i) {
            out[2 * i] = digits[d[i] >> 4];
            out[2 * i + 1] = digits[d[i] & 0xF];
        }
        return out;
    }

private:
    static uint32_t rotl(uint32_t x, int c) { return (x << c) | (x >> (32 - c)); }

    void process_block(const unsigned char* p) {
        static constexpr uint32_t K[64] = {
            0xd76aa478, 0xe8c7b756, 0x242070db, 0xc1bdceee, 0xf57c0faf, 0x4787c62a,
            0xa8304613, 0xfd469501, 0x698098d8, 0x8b44f7af, 0xffff5bb1, 0x895cd7be,
            0x6b901122, 0xfd987193, 0xa679438e, 0x49b40821, 0xf61e2562, 0xc040b340,
            0x265e5a51, 0xe9b6c7aa, 0xd62f105d, 0x02441453, 0xd8a1e681, 0xe7d3fbc8,
            0x21e1cde6, 0xc33707d6, 0xf4d50d87, 0x455a14ed, 0xa9e3e905, 0xfcefa3f8,
            0x676f02d9, 0x8d2a4c8a, 0xfffa3942, 0x8771f681, 0x6d9d6122, 0xfde5380c,
            0xa4beea44, 0x4bdecfa9, 0xf6bb4b60, 0xbebfbc70, 0x289b7ec6, 0xeaa127fa,
            0xd4ef3085, 0x04881d05, 0xd9d4d039, 0xe6db99e5, 0x1fa27cf8, 0xc4ac5665,
            0xf4292244, 0x432aff97, 0xab9423a7, 0xfc93a039, 0x655b59c3, 0x8f0ccc92,
            0xffeff47d, 0x85845dd1, 0x6fa87e4f, 0xfe2ce6e0, 0xa3014314, 0x4e0811a1,
            0xf7537e82, 0xbd3af235, 0x2ad7d2bb, 0xeb86d391};
        static constexpr int S[64] = {7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 7,
                                      12, 17, 22, 5, 9,  14, 20, 5, 9,  14, 20, 5, 9,
                                      14, 20, 5,  9, 14, 20, 4, 11, 16, 23, 4, 11, 16,
                                      23, 4,  11, 16, 23, 4, 11, 16, 23, 6, 10, 15, 21,
                                      6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21};
        uint32_t m[16];
        for (int i = 0; i < 16; ++i)
            m[i] = static_cast<uint32_t>(p[4 * i]) | (static_cast<uint32_t>(p[4 * i + 1]) << 8) |
                   (static_cast<uint32_t>(p[4 * i + 2]) << 16) |
                   (static_cast<uint32_t>(p[4 * i + 3]) << 24);
        uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        for (int i = 0; i < 64; ++i) {
            uint32_t f;
            int g;
            if (i < 16) {
                f = (b & c) | (~b & d);
                g = i;
            } else if (i < 32) {
                f = (d & b) | (~d & c);
                g = (5 * i + 1) % 16;
            } else if (i < 48) {
                f = b ^ c ^ d;
                g = (3 * i + 5) % 16;
            } else {
                f = c ^ (b | ~d);
                g = (7 * i) % 16;
            }
            const uint32_t tmp = d;
            d = c;
            c = b;
            b = b + rotl(a + f + K[i] + m[g], S[i]);
            a = tmp;
        }
        state_[0] += a;
        state_[1] += b;
        state_[2] += c;
        state_[3] += d;
    }

    std::array<uint32_t, 4> state_;
    std::array<unsigned char, 64> buffer_;
    uint64_t total_len_ = 0;
    size_t buffer_len_ = 0;
};

}  // namespace corpuskit
