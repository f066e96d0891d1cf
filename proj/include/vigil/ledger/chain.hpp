#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vigil/ledger/block.hpp"
#include "vigil/ledger/contract.hpp"

namespace vigil::ledger {

struct ChainConfig {
    std::uint32_t difficulty_bits = 16;
};

struct ChainViolation {
    std::uint64_t height = 0;
    std::string reason;
};

// Full structural and semantic audit of a chain: genesis shape, hash links,
// proof of work, transaction roots, signatures, per-sender nonce order, and
// the contract access rules replayed from genesis. Returns the first
// violation, or nullopt for an honest chain.
inline std::optional<ChainViolation> validate_chain(const std::vector<Block>& chain,
                                                    const ChainConfig& cfg) {
    if (chain.empty()) return ChainViolation{0, "empty chain"};
    const Block genesis = make_genesis(cfg.difficulty_bits);
    if (chain[0].block_hash() != genesis.block_hash() || !chain[0].txs.empty())
        return ChainViolation{0, "genesis mismatch"};

    ContractState state;
    crypto::Digest prev = chain[0].block_hash();
    for (std::uint64_t h = 1; h < chain.size(); ++h) {
        const Block& b = chain[h];
        if (b.height != h) return ChainViolation{h, "height out of order"};
        if (b.prev_hash != prev) return ChainViolation{h, "broken hash link"};
        crypto::Digest hash = b.block_hash();
        if (!satisfies_difficulty(hash, cfg.difficulty_bits))
            return ChainViolation{h, "insufficient proof of work"};
        if (tx_root_for(b.txs) != b.tx_root) return ChainViolation{h, "tx root mismatch"};
        for (const auto& tx : b.txs) {
            if (auto reject = state.apply(tx, h))
                return ChainViolation{h, std::string("invalid transaction: ") +
                                             tx_reject_name(*reject)};
        }
        prev = hash;
    }
    return std::nullopt;
}

// Replays the contract from genesis; the chain must already be valid.
inline ContractState replay_state(const std::vector<Block>& chain) {
    ContractState state;
    for (const auto& b : chain)
        for (const auto& tx : b.txs) state.apply(tx, b.height);
    return state;
}

// Longest valid chain wins; equal lengths break toward the lower tip hash
// so every node prefers the same branch.
inline bool chain_preferred(const std::vector<Block>& candidate,
                            const std::vector<Block>& current) {
    if (candidate.size() != current.size()) return candidate.size() > current.size();
    if (current.empty()) return false;
    crypto::Digest a = candidate.back().block_hash();
    crypto::Digest b = current.back().block_hash();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace vigil::ledger
