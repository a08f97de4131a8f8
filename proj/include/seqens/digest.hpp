#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>

namespace seqens {

// Compact SHA-1, enough for content digests in manifests. Not for security.
class Sha1 {
public:
    Sha1() { reset(); }

    void reset() {
        h_ = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
        len_ = 0;
        buf_fill_ = 0;
    }

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        len_ += n;
        while (n > 0) {
            std::size_t take = std::min<std::size_t>(64 - buf_fill_, n);
            std::memcpy(buf_.data() + buf_fill_, p, take);
            buf_fill_ += take;
            p += take;
            n -= take;
            if (buf_fill_ == 64) {
                process(buf_.data());
                buf_fill_ = 0;
            }
        }
    }

    std::string hex_digest() {
        std::uint64_t bit_len = len_ * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buf_fill_ != 56) update(&zero, 1);
        unsigned char lenbytes[8];
        for (int i = 0; i < 8; ++i) lenbytes[i] = static_cast<unsigned char>(bit_len >> (56 - 8 * i));
        // update() would re-count the length; feed the final block directly.
        std::memcpy(buf_.data() + 56, lenbytes, 8);
        process(buf_.data());
        static const char* kHex = "0123456789abcdef";
        std::string out;
        out.reserve(40);
        for (std::uint32_t w : h_) {
            for (int shift = 28; shift >= 0; shift -= 4) out.push_back(kHex[(w >> shift) & 0xF]);
        }
        return out;
    }

private:
    static std::uint32_t rotl(std::uint32_t x, int k) { return (x << k) | (x >> (32 - k)); }

    void process(const unsigned char* block) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        }
        for (int i = 16; i < 80; ++i) w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            std::uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rotl(b, 30);
            b = a;
            a = tmp;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
    }

    std::array<std::uint32_t, 5> h_;
    std::array<unsigned char, 64> buf_;
    std::uint64_t len_ = 0;
    std::size_t buf_fill_ = 0;
};

inline std::string sha1_hex(const void* data, std::size_t n) {
    Sha1 s;
    s.update(data, n);
    return s.hex_digest();
}

inline std::string sha1_hex(const std::string& s) { return sha1_hex(s.data(), s.size()); }

// Digest of file content in git blob form: sha1("blob <len>\0" + content).
inline std::string git_blob_sha1(const std::string& content) {
    Sha1 s;
    std::string header = "blob " + std::to_string(content.size());
    s.update(header.data(), header.size() + 1);  // include the trailing NUL
    s.update(content.data(), content.size());
    return s.hex_digest();
}

}  // namespace seqens
