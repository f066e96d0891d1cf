#pragma once

#include <vector>

#include "vigil/crypto/digest.hpp"
#include "vigil/ledger/merkle.hpp"
#include "vigil/ledger/tx.hpp"

namespace vigil::ledger {

// Proof-of-work-sealed batch of transactions. The header digest must carry
// at least `difficulty` leading zero bits.
struct Block {
    std::uint64_t height = 0;
    crypto::Digest prev_hash{};
    crypto::Digest tx_root{};
    std::int64_t timestamp_ms = 0;
    std::uint64_t pow_nonce = 0;
    std::vector<Transaction> txs;

    Bytes header_bytes() const {
        Bytes out;
        put_u64be(out, height);
        append(out, BytesView(prev_hash));
        append(out, BytesView(tx_root));
        put_i64be(out, timestamp_ms);
        put_u64be(out, pow_nonce);
        return out;
    }

    crypto::Digest block_hash() const { return crypto::sha256(header_bytes()); }

    Bytes encode() const {
        Bytes out = header_bytes();
        put_u32be(out, static_cast<std::uint32_t>(txs.size()));
        for (const auto& tx : txs) {
            Bytes t = tx.encode();
            put_u32be(out, static_cast<std::uint32_t>(t.size()));
            append(out, t);
        }
        return out;
    }

    static Block decode(BytesView bytes) {
        constexpr std::size_t header = 8 + 32 + 32 + 8 + 8;
        if (bytes.size() < header + 4) throw std::invalid_argument("block too short");
        Block b;
        std::size_t off = 0;
        b.height = get_u64be(bytes, off);
        off += 8;
        std::copy(bytes.begin() + off, bytes.begin() + off + 32, b.prev_hash.begin());
        off += 32;
        std::copy(bytes.begin() + off, bytes.begin() + off + 32, b.tx_root.begin());
        off += 32;
        b.timestamp_ms = get_i64be(bytes, off);
        off += 8;
        b.pow_nonce = get_u64be(bytes, off);
        off += 8;
        std::uint32_t count = get_u32be(bytes, off);
        off += 4;
        for (std::uint32_t i = 0; i < count; ++i) {
            std::uint32_t len = get_u32be(bytes, off);
            off += 4;
            if (off + len > bytes.size()) throw std::invalid_argument("block truncated");
            b.txs.push_back(Transaction::decode(bytes.subspan(off, len)));
            off += len;
        }
        if (off != bytes.size()) throw std::invalid_argument("block has trailing bytes");
        return b;
    }
};

inline crypto::Digest tx_root_for(const std::vector<Transaction>& txs) {
    std::vector<crypto::Digest> leaves;
    leaves.reserve(txs.size());
    for (const auto& tx : txs) leaves.push_back(tx.id());
    return merkle_root(std::move(leaves));
}

inline bool satisfies_difficulty(const crypto::Digest& hash, std::uint32_t difficulty_bits) {
    return crypto::leading_zero_bits(hash) >= difficulty_bits;
}

// Deterministic genesis: every node derives the identical block for a given
// difficulty by scanning nonces from zero.
inline Block make_genesis(std::uint32_t difficulty_bits) {
    Block g;
    g.height = 0;
    g.prev_hash = crypto::Digest{};
    g.tx_root = crypto::Digest{};
    g.timestamp_ms = 0;
    for (g.pow_nonce = 0;; ++g.pow_nonce)
        if (satisfies_difficulty(g.block_hash(), difficulty_bits)) break;
    return g;
}

}  // namespace vigil::ledger
