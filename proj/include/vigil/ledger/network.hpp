#pragma once

#include <map>
#include <memory>
#include <random>
#include <vector>

#include "vigil/ledger/node.hpp"

namespace vigil::ledger {

// Deterministic multi-miner simulation on a logical clock. Each step every
// miner tries a bounded batch of nonces; found blocks are broadcast with a
// seeded delivery delay, so forks and races replay identically per seed.
class ChainNetwork {
public:
    struct Config {
        int node_count = 4;
        std::uint32_t difficulty_bits = 16;
        std::uint64_t seed = 1;
        int attempts_per_step = 256;
        int min_delay_steps = 1;
        int max_delay_steps = 3;
        bool mine_empty = false;
    };

    explicit ChainNetwork(const Config& cfg) : cfg_(cfg), rng_(cfg.seed) {
        if (cfg.node_count < 1) throw std::invalid_argument("need at least one node");
        ChainConfig cc{cfg.difficulty_bits};
        for (int i = 0; i < cfg.node_count; ++i) {
            nodes_.push_back(std::make_unique<ChainNode>(cc));
            miner_rngs_.emplace_back(cfg.seed * 1000003u + static_cast<std::uint64_t>(i));
        }
    }

    ChainNode& node(std::size_t i) { return *nodes_[i]; }
    std::size_t size() const { return nodes_.size(); }
    std::int64_t now_ms() const { return step_ * 100; }

    // Submit to one node and gossip the transaction to all peers.
    std::optional<TxReject> broadcast_tx(const Transaction& tx) {
        for (auto& n : nodes_)
            if (auto reject = n->submit_tx(tx)) return reject;
        return std::nullopt;
    }

    // One logical tick: deliver due blocks, then let each miner work.
    void step(bool mining_enabled = true) {
        ++step_;
        deliver_due();
        if (!mining_enabled) return;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto found =
                nodes_[i]->try_mine(now_ms(), miner_rngs_[i], cfg_.attempts_per_step,
                                    cfg_.mine_empty);
            if (found) broadcast_block(i, *found);
        }
    }

    // Runs mining steps until every node's tip height reaches `height` (or
    // the step budget runs out), then drains in-flight messages.
    bool run_until_height(std::uint64_t height, int max_steps) {
        for (int i = 0; i < max_steps; ++i) {
            step();
            bool all = true;
            for (auto& n : nodes_)
                if (n->get_tip().first < height) all = false;
            if (all) break;
        }
        quiesce();
        for (auto& n : nodes_)
            if (n->get_tip().first < height) return false;
        return true;
    }

    // Delivers everything in flight without further mining.
    void quiesce() {
        while (!in_flight_.empty()) {
            ++step_;
            deliver_due();
        }
    }

    // Mines synchronously on one node and syncs all peers; the helper for
    // single-miner happy paths.
    std::optional<Block> mine_on(std::size_t i, bool allow_empty = false) {
        auto block = nodes_[i]->mine_block(now_ms(), rng_(), allow_empty);
        if (block) {
            for (std::size_t j = 0; j < nodes_.size(); ++j)
                if (j != i) nodes_[j]->import_block(*block);
        }
        return block;
    }

    // Mines on node 0 until its mempool drains, syncing peers as it goes.
    int mine_until_mempool_empty(std::size_t i = 0, int max_blocks = 64) {
        int mined = 0;
        while (nodes_[i]->mempool_size() > 0 && mined < max_blocks) {
            if (!mine_on(i)) break;
            ++mined;
        }
        return mined;
    }

    bool converged() const {
        auto tip = nodes_[0]->get_tip();
        for (const auto& n : nodes_)
            if (n->get_tip() != tip) return false;
        return in_flight_.empty();
    }

private:
    void broadcast_block(std::size_t from, const Block& b) {
        std::uniform_int_distribution<int> delay(cfg_.min_delay_steps, cfg_.max_delay_steps);
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (j == from) continue;
            in_flight_.emplace(step_ + delay(rng_), std::pair<std::size_t, Block>{j, b});
        }
    }

    void deliver_due() {
        auto end = in_flight_.upper_bound(step_);
        for (auto it = in_flight_.begin(); it != end; ++it)
            nodes_[it->second.first]->import_block(it->second.second);
        in_flight_.erase(in_flight_.begin(), end);
    }

    Config cfg_;
    std::mt19937_64 rng_;
    std::vector<std::unique_ptr<ChainNode>> nodes_;
    std::vector<std::mt19937_64> miner_rngs_;
    std::multimap<std::int64_t, std::pair<std::size_t, Block>> in_flight_;
    std::int64_t step_ = 0;
};

}  // namespace vigil::ledger
