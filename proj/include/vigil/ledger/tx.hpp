#pragma once

#include <optional>
#include <string>

#include "vigil/crypto/digest.hpp"
#include "vigil/crypto/signing.hpp"
#include "vigil/ledger/account.hpp"

namespace vigil::ledger {

enum class TxKind : std::uint8_t {
    Deploy = 1,
    GrantEntity = 2,
    RevokeEntity = 3,
    PutRecord = 4,
};

inline const char* tx_kind_name(TxKind k) {
    switch (k) {
        case TxKind::Deploy: return "Deploy";
        case TxKind::GrantEntity: return "GrantEntity";
        case TxKind::RevokeEntity: return "RevokeEntity";
        case TxKind::PutRecord: return "PutRecord";
    }
    return "?";
}

// Signed ledger operation. There is no currency or gas: transactions are
// free but must verify under the sender's key, and tx_nonce must advance
// sequentially per sender.
struct Transaction {
    TxKind kind = TxKind::Deploy;
    Address sender{};
    Bytes public_key;        // 32-byte Ed25519 key; address must derive from it
    std::uint64_t tx_nonce = 0;
    Bytes payload;           // kind-specific, see WIRE.md
    Bytes signature;         // Ed25519 over signing_bytes()

    Bytes signing_bytes() const {
        Bytes out;
        out.push_back(static_cast<std::uint8_t>(kind));
        append(out, BytesView(sender));
        append(out, public_key);
        put_u64be(out, tx_nonce);
        put_u32be(out, static_cast<std::uint32_t>(payload.size()));
        append(out, payload);
        return out;
    }

    Bytes encode() const {
        Bytes out = signing_bytes();
        append(out, signature);
        return out;
    }

    crypto::Digest id() const { return crypto::sha256(encode()); }

    bool signature_valid() const {
        return public_key.size() == crypto::kSignPubKeySize &&
               derive_address(public_key) == sender &&
               crypto::verify_signature(public_key, signing_bytes(), signature);
    }

    static Transaction decode(BytesView bytes) {
        // Layout: kind(1) sender(20) pubkey(32) nonce(8) plen(4) payload sig(64)
        constexpr std::size_t fixed = 1 + kAddressSize + crypto::kSignPubKeySize + 8 + 4;
        if (bytes.size() < fixed + crypto::kSignatureSize)
            throw std::invalid_argument("transaction too short");
        Transaction tx;
        std::size_t off = 0;
        std::uint8_t kind = bytes[off++];
        if (kind < 1 || kind > 4) throw std::invalid_argument("unknown transaction kind");
        tx.kind = static_cast<TxKind>(kind);
        std::copy(bytes.begin() + off, bytes.begin() + off + kAddressSize, tx.sender.begin());
        off += kAddressSize;
        tx.public_key.assign(bytes.begin() + off, bytes.begin() + off + crypto::kSignPubKeySize);
        off += crypto::kSignPubKeySize;
        tx.tx_nonce = get_u64be(bytes, off);
        off += 8;
        std::uint32_t plen = get_u32be(bytes, off);
        off += 4;
        if (bytes.size() != fixed + plen + crypto::kSignatureSize)
            throw std::invalid_argument("transaction length mismatch");
        tx.payload.assign(bytes.begin() + off, bytes.begin() + off + plen);
        off += plen;
        tx.signature.assign(bytes.begin() + off, bytes.end());
        return tx;
    }
};

struct PutRecordPayload {
    std::string segment_id;
    crypto::Digest digest{};
};

inline Bytes encode_put_record(const std::string& segment_id, const crypto::Digest& digest) {
    FieldWriter w;
    w.add(segment_id);
    w.add(crypto::digest_bytes(digest));
    return w.take();
}

inline std::optional<PutRecordPayload> decode_put_record(BytesView payload) {
    try {
        FieldReader r(payload);
        PutRecordPayload out;
        out.segment_id = r.next_string();
        Bytes d = r.next_exact(crypto::kDigestSize);
        if (!r.done()) return std::nullopt;
        std::copy(d.begin(), d.end(), out.digest.begin());
        if (out.segment_id.empty()) return std::nullopt;
        return out;
    } catch (const std::out_of_range&) {
        return std::nullopt;
    }
}

inline std::optional<Address> decode_entity(BytesView payload) {
    if (payload.size() != kAddressSize) return std::nullopt;
    Address a;
    std::copy(payload.begin(), payload.end(), a.begin());
    return a;
}

// Builders: sign with the account key and the caller-supplied nonce.
inline Transaction make_tx(const Account& acct, TxKind kind, Bytes payload, std::uint64_t nonce) {
    Transaction tx;
    tx.kind = kind;
    tx.sender = acct.address();
    tx.public_key = acct.public_key();
    tx.tx_nonce = nonce;
    tx.payload = std::move(payload);
    tx.signature = acct.sign(tx.signing_bytes());
    return tx;
}

inline Transaction deploy_tx(const Account& owner, std::uint64_t nonce) {
    return make_tx(owner, TxKind::Deploy, {}, nonce);
}

inline Transaction grant_tx(const Account& owner, const Address& entity, std::uint64_t nonce) {
    return make_tx(owner, TxKind::GrantEntity, Bytes(entity.begin(), entity.end()), nonce);
}

inline Transaction revoke_tx(const Account& owner, const Address& entity, std::uint64_t nonce) {
    return make_tx(owner, TxKind::RevokeEntity, Bytes(entity.begin(), entity.end()), nonce);
}

inline Transaction put_record_tx(const Account& submitter, const std::string& segment_id,
                                 const crypto::Digest& digest, std::uint64_t nonce) {
    return make_tx(submitter, TxKind::PutRecord, encode_put_record(segment_id, digest), nonce);
}

}  // namespace vigil::ledger
