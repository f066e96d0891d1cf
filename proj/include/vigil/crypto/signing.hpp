#pragma once

#include <array>
#include <stdexcept>

#include <openssl/evp.h>

#include "vigil/bytes.hpp"
#include "vigil/crypto/rsa.hpp"
#include "vigil/rand.hpp"

namespace vigil::crypto {

inline constexpr std::size_t kSignPubKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kSignSeedSize = 32;

// Ed25519 signing. Signatures are deterministic, so fixed-seed keys give
// stable golden vectors.
class SigningKey {
public:
    static SigningKey generate(RandomSource& rng) {
        Bytes seed = random_bytes(rng, kSignSeedSize);
        return from_seed(seed);
    }

    static SigningKey from_seed(BytesView seed) {
        if (seed.size() != kSignSeedSize) throw std::invalid_argument("seed must be 32 bytes");
        EVP_PKEY* key =
            EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
        if (!key) throw std::runtime_error("Ed25519 key import failed");
        return SigningKey(PkeyPtr(key));
    }

    Bytes public_key() const {
        std::size_t len = kSignPubKeySize;
        Bytes out(len);
        if (EVP_PKEY_get_raw_public_key(key_.get(), out.data(), &len) != 1 ||
            len != kSignPubKeySize)
            throw std::runtime_error("Ed25519 public key export failed");
        return out;
    }

    Bytes sign(BytesView message) const {
        EVP_MD_CTX* ctx = EVP_MD_CTX_new();
        if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
        Bytes sig(kSignatureSize);
        std::size_t siglen = sig.size();
        bool ok = EVP_DigestSignInit(ctx, nullptr, nullptr, nullptr, key_.get()) == 1 &&
                  EVP_DigestSign(ctx, sig.data(), &siglen, message.data(), message.size()) == 1 &&
                  siglen == kSignatureSize;
        EVP_MD_CTX_free(ctx);
        if (!ok) throw std::runtime_error("Ed25519 sign failed");
        return sig;
    }

private:
    explicit SigningKey(PkeyPtr key) : key_(std::move(key)) {}
    PkeyPtr key_;
};

inline bool verify_signature(BytesView public_key, BytesView message, BytesView signature) {
    if (public_key.size() != kSignPubKeySize || signature.size() != kSignatureSize) return false;
    EVP_PKEY* key =
        EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(), public_key.size());
    if (!key) return false;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    bool ok = ctx != nullptr && EVP_DigestVerifyInit(ctx, nullptr, nullptr, nullptr, key) == 1 &&
              EVP_DigestVerify(ctx, signature.data(), signature.size(), message.data(),
                               message.size()) == 1;
    EVP_MD_CTX_free(ctx);
    EVP_PKEY_free(key);
    return ok;
}

}  // namespace vigil::crypto
