#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "vigil/ledger/chain.hpp"

namespace vigil::ledger {

struct DigestLess {
    bool operator()(const crypto::Digest& a, const crypto::Digest& b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

// One chain node: mempool, block pool (including side branches), and the
// current best chain with its replayed contract state. All mutation funnels
// through one mutex; peers talk to it by messages (see network.hpp) or RPC.
class ChainNode {
public:
    explicit ChainNode(ChainConfig cfg) : cfg_(cfg) {
        Block genesis = make_genesis(cfg.difficulty_bits);
        pool_.emplace(genesis.block_hash(), genesis);
        chain_.push_back(genesis);
    }

    const ChainConfig& config() const { return cfg_; }

    // Mempool admission does only stateless checks; state-dependent rules
    // run again at mining time so a stale transaction is excluded, not mined.
    std::optional<TxReject> submit_tx(const Transaction& tx) {
        if (!tx.signature_valid()) return TxReject::BadSignature;
        std::lock_guard lk(m_);
        mempool_.push_back(tx);
        return std::nullopt;
    }

    std::size_t mempool_size() const {
        std::lock_guard lk(m_);
        return mempool_.size();
    }

    // Synchronous mining: retries nonces until the difficulty is met.
    // Includes every mempool transaction that is valid against the evolving
    // state; invalid ones are dropped from the candidate but kept pooled.
    std::optional<Block> mine_block(std::int64_t timestamp_ms, std::uint64_t nonce_seed,
                                    bool allow_empty = false) {
        std::unique_lock lk(m_);
        Block candidate = build_candidate(timestamp_ms);
        if (candidate.txs.empty() && !allow_empty) return std::nullopt;
        std::mt19937_64 nonce_rng(nonce_seed);
        candidate.pow_nonce = nonce_rng();
        while (!satisfies_difficulty(candidate.block_hash(), cfg_.difficulty_bits))
            candidate.pow_nonce = nonce_rng();
        adopt_mined(candidate);
        return candidate;
    }

    // Bounded mining step for the race simulation: at most `attempts` nonce
    // trials on the current candidate.
    std::optional<Block> try_mine(std::int64_t timestamp_ms, std::mt19937_64& nonce_rng,
                                  int attempts, bool allow_empty = false) {
        std::unique_lock lk(m_);
        Block candidate = build_candidate(timestamp_ms);
        if (candidate.txs.empty() && !allow_empty) return std::nullopt;
        for (int i = 0; i < attempts; ++i) {
            candidate.pow_nonce = nonce_rng();
            if (satisfies_difficulty(candidate.block_hash(), cfg_.difficulty_bits)) {
                adopt_mined(candidate);
                return candidate;
            }
        }
        return std::nullopt;
    }

    enum class ImportResult { Adopted, Stored, Duplicate, Invalid };

    // Accepts a block from a peer: pool it, then adopt the best complete
    // valid chain it enables. Orphans wait in the pool for their parent.
    ImportResult import_block(const Block& b) {
        std::unique_lock lk(m_);
        crypto::Digest hash = b.block_hash();
        if (pool_.contains(hash)) return ImportResult::Duplicate;
        if (!satisfies_difficulty(hash, cfg_.difficulty_bits)) return ImportResult::Invalid;
        if (tx_root_for(b.txs) != b.tx_root) return ImportResult::Invalid;
        pool_.emplace(hash, b);
        return refresh_best_chain() ? ImportResult::Adopted : ImportResult::Stored;
    }

    std::optional<IndexToken> get_index_token(const std::string& segment_id) const {
        std::lock_guard lk(m_);
        return state_.get_index_token(segment_id);
    }

    ContractState contract_state() const {
        std::lock_guard lk(m_);
        return state_;
    }

    std::vector<Block> chain() const {
        std::lock_guard lk(m_);
        return chain_;
    }

    std::optional<Block> get_block(std::uint64_t height) const {
        std::lock_guard lk(m_);
        if (height >= chain_.size()) return std::nullopt;
        return chain_[height];
    }

    std::pair<std::uint64_t, crypto::Digest> get_tip() const {
        std::lock_guard lk(m_);
        return {chain_.back().height, chain_.back().block_hash()};
    }

private:
    Block build_candidate(std::int64_t timestamp_ms) {
        Block candidate;
        candidate.height = chain_.back().height + 1;
        candidate.prev_hash = chain_.back().block_hash();
        candidate.timestamp_ms = timestamp_ms;
        ContractState scratch = state_;
        std::set<crypto::Digest, DigestLess> chained = chained_tx_ids();
        for (const auto& tx : mempool_) {
            if (chained.contains(tx.id())) continue;
            ContractState before = scratch;
            if (scratch.apply(tx, candidate.height))
                scratch = before;  // invalid against current state: exclude
            else
                candidate.txs.push_back(tx);
        }
        candidate.tx_root = tx_root_for(candidate.txs);
        return candidate;
    }

    void adopt_mined(const Block& b) {
        pool_.emplace(b.block_hash(), b);
        refresh_best_chain();
    }

    std::set<crypto::Digest, DigestLess> chained_tx_ids() const {
        std::set<crypto::Digest, DigestLess> ids;
        for (const auto& blk : chain_)
            for (const auto& tx : blk.txs) ids.insert(tx.id());
        return ids;
    }

    // Rebuilds the preferred chain from the block pool. Returns true when
    // the tip changed.
    bool refresh_best_chain() {
        std::set<crypto::Digest, DigestLess> parents;
        for (const auto& [hash, blk] : pool_) parents.insert(blk.prev_hash);

        std::vector<Block> best = chain_;
        for (const auto& [hash, blk] : pool_) {
            if (parents.contains(hash)) continue;  // not a tip
            std::optional<std::vector<Block>> path = path_to_genesis(blk);
            if (!path) continue;  // orphan branch, parent still missing
            if (!chain_preferred(*path, best)) continue;
            if (validate_chain(*path, cfg_)) continue;  // semantic violation
            best = std::move(*path);
        }
        if (best.back().block_hash() == chain_.back().block_hash()) return false;

        // Return abandoned transactions to the mempool, drop newly chained ones.
        std::vector<Transaction> abandoned;
        for (const auto& blk : chain_)
            for (const auto& tx : blk.txs) abandoned.push_back(tx);
        chain_ = std::move(best);
        state_ = replay_state(chain_);
        std::set<crypto::Digest, DigestLess> chained = chained_tx_ids();
        std::vector<Transaction> next_pool;
        for (const auto& tx : abandoned)
            if (!chained.contains(tx.id())) next_pool.push_back(tx);
        for (const auto& tx : mempool_)
            if (!chained.contains(tx.id())) next_pool.push_back(tx);
        mempool_ = std::move(next_pool);
        return true;
    }

    std::optional<std::vector<Block>> path_to_genesis(const Block& tip) const {
        std::vector<Block> path{tip};
        while (path.back().height > 0) {
            auto it = pool_.find(path.back().prev_hash);
            if (it == pool_.end()) return std::nullopt;
            path.push_back(it->second);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    ChainConfig cfg_;
    mutable std::mutex m_;
    std::map<crypto::Digest, Block, DigestLess> pool_;
    std::vector<Block> chain_;
    ContractState state_;
    std::vector<Transaction> mempool_;
};

}  // namespace vigil::ledger
