#pragma once

#include <memory>
#include <optional>
#include <stdexcept>

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include "vigil/bytes.hpp"

namespace vigil::crypto {

inline constexpr int kRsaModulusBits = 2048;

struct EvpPkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, EvpPkeyDeleter>;

struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

// RSA-OAEP(SHA-256) key transport. Public keys travel as DER
// SubjectPublicKeyInfo, which round-trips byte-exactly.
class RsaPublicKey {
public:
    static RsaPublicKey from_der(BytesView der) {
        const unsigned char* p = der.data();
        EVP_PKEY* key = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
        if (!key || EVP_PKEY_base_id(key) != EVP_PKEY_RSA) {
            EVP_PKEY_free(key);
            throw std::invalid_argument("not a DER RSA public key");
        }
        return RsaPublicKey(PkeyPtr(key));
    }

    Bytes to_der() const {
        unsigned char* buf = nullptr;
        int len = i2d_PUBKEY(key_.get(), &buf);
        if (len <= 0) throw std::runtime_error("i2d_PUBKEY failed");
        Bytes out(buf, buf + len);
        OPENSSL_free(buf);
        return out;
    }

    Bytes encrypt(BytesView plaintext) const {
        PkeyCtxPtr ctx(EVP_PKEY_CTX_new(key_.get(), nullptr));
        if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) != 1) throw std::runtime_error("encrypt init");
        set_oaep(ctx.get());
        static const unsigned char empty = 0;
        const unsigned char* in = plaintext.empty() ? &empty : plaintext.data();
        std::size_t outlen = 0;
        if (EVP_PKEY_encrypt(ctx.get(), nullptr, &outlen, in, plaintext.size()) != 1)
            throw std::runtime_error("encrypt size probe");
        Bytes out(outlen);
        if (EVP_PKEY_encrypt(ctx.get(), out.data(), &outlen, in, plaintext.size()) != 1)
            throw std::runtime_error("plaintext too large for RSA-OAEP block");
        out.resize(outlen);
        return out;
    }

    // Largest plaintext a single OAEP-SHA256 block can carry.
    std::size_t max_plaintext() const {
        return static_cast<std::size_t>(EVP_PKEY_size(key_.get())) - 2 * 32 - 2;
    }

    std::size_t block_size() const { return static_cast<std::size_t>(EVP_PKEY_size(key_.get())); }

    EVP_PKEY* handle() const { return key_.get(); }

private:
    friend class RsaKeyPair;
    explicit RsaPublicKey(PkeyPtr key) : key_(std::move(key)) {}

    static void set_oaep(EVP_PKEY_CTX* ctx) {
        if (EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_OAEP_PADDING) != 1 ||
            EVP_PKEY_CTX_set_rsa_oaep_md(ctx, EVP_sha256()) != 1 ||
            EVP_PKEY_CTX_set_rsa_mgf1_md(ctx, EVP_sha256()) != 1)
            throw std::runtime_error("OAEP setup failed");
    }

    PkeyPtr key_;
};

class RsaKeyPair {
public:
    static RsaKeyPair generate(int bits = kRsaModulusBits) {
        EVP_PKEY* key = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<size_t>(bits));
        if (!key) throw std::runtime_error("RSA keygen failed");
        return RsaKeyPair(PkeyPtr(key));
    }

    RsaPublicKey public_key() const {
        // Re-parse the DER form so the public half owns an independent key.
        Bytes der = public_der();
        return RsaPublicKey::from_der(der);
    }

    Bytes public_der() const {
        unsigned char* buf = nullptr;
        int len = i2d_PUBKEY(key_.get(), &buf);
        if (len <= 0) throw std::runtime_error("i2d_PUBKEY failed");
        Bytes out(buf, buf + len);
        OPENSSL_free(buf);
        return out;
    }

    std::optional<Bytes> decrypt(BytesView ciphertext) const {
        PkeyCtxPtr ctx(EVP_PKEY_CTX_new(key_.get(), nullptr));
        if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) != 1) throw std::runtime_error("decrypt init");
        RsaPublicKey::set_oaep(ctx.get());
        std::size_t outlen = 0;
        if (EVP_PKEY_decrypt(ctx.get(), nullptr, &outlen, ciphertext.data(), ciphertext.size()) !=
            1)
            return std::nullopt;
        Bytes out(outlen);
        if (EVP_PKEY_decrypt(ctx.get(), out.data(), &outlen, ciphertext.data(),
                             ciphertext.size()) != 1)
            return std::nullopt;
        out.resize(outlen);
        return out;
    }

    // Exposes modulus/exponents for test oracles that re-do the math
    // independently of the EVP decrypt path.
    Bytes param(const char* name) const {
        BIGNUM* bn = nullptr;
        if (EVP_PKEY_get_bn_param(key_.get(), name, &bn) != 1)
            throw std::runtime_error("missing RSA parameter");
        Bytes out(static_cast<std::size_t>(BN_num_bytes(bn)));
        BN_bn2bin(bn, out.data());
        BN_clear_free(bn);
        return out;
    }

    EVP_PKEY* handle() const { return key_.get(); }

private:
    explicit RsaKeyPair(PkeyPtr key) : key_(std::move(key)) {}
    PkeyPtr key_;
};

}  // namespace vigil::crypto
