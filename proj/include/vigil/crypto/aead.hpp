#pragma once

#include <optional>
#include <stdexcept>

#include <openssl/evp.h>

#include "vigil/bytes.hpp"
#include "vigil/crypto/digest.hpp"
#include "vigil/rand.hpp"

namespace vigil::crypto {

inline constexpr std::size_t kSymKeySize = 32;
inline constexpr std::size_t kIvSize = 16;
inline constexpr std::size_t kMacSize = 32;

// CTR mode is its own inverse.
inline Bytes aes256_ctr(BytesView key, BytesView iv, BytesView data) {
    if (key.size() != kSymKeySize || iv.size() != kIvSize)
        throw std::invalid_argument("aes256_ctr: bad key or iv size");
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
    Bytes out(data.size());
    int len = 0;
    bool ok = EVP_EncryptInit_ex(ctx, EVP_aes_256_ctr(), nullptr, key.data(), iv.data()) == 1 &&
              (data.empty() || EVP_EncryptUpdate(ctx, out.data(), &len, data.data(),
                                                 static_cast<int>(data.size())) == 1);
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) throw std::runtime_error("AES-256-CTR failed");
    return out;
}

// Encrypt-then-MAC over AES-256-CTR + HMAC-SHA256. The encryption and MAC
// keys are derived from one 32-byte session key; the MAC covers IV and
// ciphertext, so any bit flip in the sealed box fails authentication.
class AeadKey {
public:
    explicit AeadKey(BytesView session_key) {
        if (session_key.size() != kSymKeySize)
            throw std::invalid_argument("session key must be 32 bytes");
        Bytes key(session_key.begin(), session_key.end());
        enc_key_ = hmac_sha256(key, to_bytes("vigil.enc"));
        mac_key_ = hmac_sha256(key, to_bytes("vigil.mac"));
    }

    // Output layout: iv(16) || ciphertext(len(plaintext)) || mac(32).
    Bytes seal(BytesView plaintext, RandomSource& rng) const {
        Bytes iv = random_bytes(rng, kIvSize);
        return seal_with_iv(plaintext, iv);
    }

    Bytes seal_with_iv(BytesView plaintext, BytesView iv) const {
        if (iv.size() != kIvSize) throw std::invalid_argument("iv must be 16 bytes");
        Bytes out(iv.begin(), iv.end());
        Bytes ct = ctr(plaintext, iv);
        append(out, ct);
        Digest mac = hmac_sha256(BytesView(mac_key_.data(), mac_key_.size()),
                                 BytesView(out.data(), out.size()));
        append(out, digest_bytes(mac));
        return out;
    }

    // Returns the plaintext, or nullopt when authentication fails.
    std::optional<Bytes> open(BytesView box) const {
        if (box.size() < kIvSize + kMacSize) return std::nullopt;
        std::size_t body = box.size() - kMacSize;
        Digest mac = hmac_sha256(BytesView(mac_key_.data(), mac_key_.size()), box.subspan(0, body));
        if (!bytes_equal(digest_bytes(mac), box.subspan(body))) return std::nullopt;
        return ctr(box.subspan(kIvSize, body - kIvSize), box.subspan(0, kIvSize));
    }

private:
    Bytes ctr(BytesView data, BytesView iv) const {
        return aes256_ctr(BytesView(enc_key_.data(), enc_key_.size()), iv, data);
    }

    Digest enc_key_;
    Digest mac_key_;
};

}  // namespace vigil::crypto
