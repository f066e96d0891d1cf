#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "vigil/ledger/tx.hpp"

namespace vigil::ledger {

enum class TxReject : std::uint8_t {
    BadSignature,
    BadNonce,
    AlreadyDeployed,
    NotDeployed,
    NotOwner,
    NotAuthorized,
    DuplicateRecord,
    BadPayload,
};

inline const char* tx_reject_name(TxReject r) {
    switch (r) {
        case TxReject::BadSignature: return "BadSignature";
        case TxReject::BadNonce: return "BadNonce";
        case TxReject::AlreadyDeployed: return "AlreadyDeployed";
        case TxReject::NotDeployed: return "NotDeployed";
        case TxReject::NotOwner: return "NotOwner";
        case TxReject::NotAuthorized: return "NotAuthorized";
        case TxReject::DuplicateRecord: return "DuplicateRecord";
        case TxReject::BadPayload: return "BadPayload";
    }
    return "?";
}

// An anchored index token: the segment digest plus where and by whom it
// entered the chain. Entries are write-once.
struct IndexToken {
    crypto::Digest digest{};
    std::uint64_t block_height = 0;
    Address submitter{};

    bool operator==(const IndexToken&) const = default;
};

// The single on-chain contract: owner, authorized-entity set, and the
// segment-id -> token map. Pure fold over the mined transactions; replaying
// any valid chain reproduces it exactly.
struct ContractState {
    bool deployed = false;
    Address owner{};
    std::set<Address> authorized;
    std::map<std::string, IndexToken> records;
    std::map<Address, std::uint64_t> account_nonces;

    bool operator==(const ContractState&) const = default;

    // Validates `tx` against the current state without mutating it.
    std::optional<TxReject> check(const Transaction& tx) const {
        if (!tx.signature_valid()) return TxReject::BadSignature;
        auto it = account_nonces.find(tx.sender);
        std::uint64_t expected = it == account_nonces.end() ? 0 : it->second;
        if (tx.tx_nonce != expected) return TxReject::BadNonce;
        switch (tx.kind) {
            case TxKind::Deploy:
                if (deployed) return TxReject::AlreadyDeployed;
                break;
            case TxKind::GrantEntity:
            case TxKind::RevokeEntity:
                if (!deployed) return TxReject::NotDeployed;
                if (tx.sender != owner) return TxReject::NotOwner;
                if (!decode_entity(tx.payload)) return TxReject::BadPayload;
                break;
            case TxKind::PutRecord: {
                if (!deployed) return TxReject::NotDeployed;
                if (!authorized.contains(tx.sender)) return TxReject::NotAuthorized;
                auto payload = decode_put_record(tx.payload);
                if (!payload) return TxReject::BadPayload;
                if (records.contains(payload->segment_id)) return TxReject::DuplicateRecord;
                break;
            }
        }
        return std::nullopt;
    }

    // Applies a checked transaction. Returns the rejection when invalid.
    std::optional<TxReject> apply(const Transaction& tx, std::uint64_t block_height) {
        if (auto reject = check(tx)) return reject;
        account_nonces[tx.sender] = tx.tx_nonce + 1;
        switch (tx.kind) {
            case TxKind::Deploy:
                deployed = true;
                owner = tx.sender;
                break;
            case TxKind::GrantEntity:
                authorized.insert(*decode_entity(tx.payload));
                break;
            case TxKind::RevokeEntity:
                authorized.erase(*decode_entity(tx.payload));
                break;
            case TxKind::PutRecord: {
                auto payload = decode_put_record(tx.payload);
                records.emplace(payload->segment_id,
                                IndexToken{payload->digest, block_height, tx.sender});
                break;
            }
        }
        return std::nullopt;
    }

    std::optional<IndexToken> get_index_token(const std::string& segment_id) const {
        auto it = records.find(segment_id);
        if (it == records.end()) return std::nullopt;
        return it->second;
    }
};

}  // namespace vigil::ledger
