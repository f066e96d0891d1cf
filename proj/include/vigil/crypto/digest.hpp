#pragma once

#include <array>
#include <stdexcept>

#include <openssl/hmac.h>
#include <openssl/sha.h>

#include "vigil/bytes.hpp"

namespace vigil::crypto {

inline constexpr std::size_t kDigestSize = 32;

using Digest = std::array<std::uint8_t, kDigestSize>;

inline Digest sha256(BytesView data) {
    Digest out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

inline Digest sha256(const Bytes& a, const Bytes& b) {
    Bytes joined;
    joined.reserve(a.size() + b.size());
    append(joined, a);
    append(joined, b);
    return sha256(joined);
}

inline Bytes digest_bytes(const Digest& d) {
    return Bytes(d.begin(), d.end());
}

inline Digest hmac_sha256(BytesView key, BytesView data) {
    Digest out;
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
             out.data(), &len) == nullptr ||
        len != kDigestSize)
        throw std::runtime_error("HMAC-SHA256 failed");
    return out;
}

inline std::size_t leading_zero_bits(const Digest& d) {
    std::size_t bits = 0;
    for (std::uint8_t byte : d) {
        if (byte == 0) {
            bits += 8;
            continue;
        }
        for (int i = 7; i >= 0; --i) {
            if (byte & (1u << i)) return bits;
            ++bits;
        }
    }
    return bits;
}

}  // namespace vigil::crypto
