#include "catch_amalgamated.hpp"

#include <set>

#include "vigil/ledger/account.hpp"
#include "vigil/ledger/block.hpp"
#include "vigil/ledger/chain.hpp"
#include "vigil/ledger/contract.hpp"
#include "vigil/ledger/merkle.hpp"
#include "vigil/ledger/network.hpp"
#include "vigil/ledger/node.hpp"
#include "vigil/ledger/tx.hpp"

using namespace vigil;
using namespace vigil::ledger;

namespace {

Account test_account(std::uint8_t tag) {
    Bytes seed(32, tag);
    return Account::from_seed(seed);
}

crypto::Digest seg_digest(std::uint8_t tag) {
    return crypto::sha256(Bytes{tag});
}

// Test-side miner: fills the root and scans nonces from zero, counting
// attempts. Independent of ChainNode's mining path.
Block forge(const Block& parent, std::vector<Transaction> txs, std::uint32_t difficulty,
            std::int64_t ts, std::uint64_t* attempts = nullptr) {
    Block b;
    b.height = parent.height + 1;
    b.prev_hash = parent.block_hash();
    b.timestamp_ms = ts;
    b.txs = std::move(txs);
    b.tx_root = tx_root_for(b.txs);
    std::uint64_t tries = 0;
    for (b.pow_nonce = 0;; ++b.pow_nonce) {
        ++tries;
        if (satisfies_difficulty(b.block_hash(), difficulty)) break;
    }
    if (attempts) *attempts = tries;
    return b;
}

}  // namespace

TEST_CASE("account addresses are 20 bytes and collision-free in practice") {
    auto rng = system_random();
    std::set<std::string> seen;
    for (int i = 0; i < 1000; ++i) {
        auto acct = Account::create(rng);
        CHECK(acct.address().size() == 20);
        seen.insert(address_hex(acct.address()));
    }
    CHECK(seen.size() == 1000);
}

TEST_CASE("deploy transaction golden vector (fixed seed)") {
    Bytes seed(32);
    for (std::size_t i = 0; i < seed.size(); ++i) seed[i] = static_cast<std::uint8_t>(i);
    auto acct = Account::from_seed(seed);
    CHECK(hex_encode(acct.public_key()) ==
          "03a107bff3ce10be1d70dd18e74bc09967e4d6309ba50d5f1ddc8664125531b8");
    CHECK(address_hex(acct.address()) == "bf2bcab73da651358839e9b77481b2eab107708c");

    Transaction tx = deploy_tx(acct, 0);
    CHECK(hex_encode(tx.signature) ==
          "a3c72b1e00f79e84869c9835c631aff9c81fa44470323615d9412ca114348ac1"
          "8b204c34405152e30ec92fb28c14a54ede850188f6169c981b36346717b06707");
    CHECK(hex_encode(tx.id()) == "2e95cdeb19e7ae77f06ded46c2d742a2083da58a974b34a71b8a039eb4130d16");
    CHECK(tx.signature_valid());
}

TEST_CASE("transactions round-trip and detect tampering") {
    auto owner = test_account(1);
    Transaction tx = put_record_tx(owner, "cam01/0", seg_digest(9), 4);
    Transaction back = Transaction::decode(tx.encode());
    CHECK(back.kind == TxKind::PutRecord);
    CHECK(back.sender == tx.sender);
    CHECK(back.tx_nonce == 4);
    CHECK(back.signature_valid());

    Bytes wire = tx.encode();
    wire[40] ^= 0x01;  // somewhere in the public key / sender region
    Transaction mutated = Transaction::decode(wire);
    CHECK_FALSE(mutated.signature_valid());

    // Payload tampering breaks the signature as well.
    Transaction altered = tx;
    auto payload = decode_put_record(altered.payload);
    altered.payload = encode_put_record(payload->segment_id, seg_digest(10));
    CHECK_FALSE(altered.signature_valid());
}

TEST_CASE("merkle root follows the duplicate-last-leaf rule") {
    CHECK(merkle_root({}) == crypto::Digest{});

    auto leaf = [](std::uint8_t t) { return crypto::sha256(Bytes{t}); };
    auto pair_hash = [](const crypto::Digest& a, const crypto::Digest& b) {
        Bytes j;
        append(j, BytesView(a));
        append(j, BytesView(b));
        return crypto::sha256(j);
    };

    CHECK(merkle_root({leaf(1)}) == leaf(1));
    CHECK(merkle_root({leaf(1), leaf(2)}) == pair_hash(leaf(1), leaf(2)));
    // Odd count: the last leaf pairs with itself.
    CHECK(merkle_root({leaf(1), leaf(2), leaf(3)}) ==
          pair_hash(pair_hash(leaf(1), leaf(2)), pair_hash(leaf(3), leaf(3))));
    CHECK(merkle_root({leaf(1), leaf(2), leaf(3), leaf(4), leaf(5)}) ==
          pair_hash(pair_hash(pair_hash(leaf(1), leaf(2)), pair_hash(leaf(3), leaf(4))),
                    pair_hash(pair_hash(leaf(5), leaf(5)), pair_hash(leaf(5), leaf(5)))));
}

TEST_CASE("contract: deploy once, owner gates grants, write-once records") {
    auto cloud = test_account(1);
    auto fog = test_account(2);
    auto edge = test_account(3);
    ContractState state;

    CHECK_FALSE(state.apply(deploy_tx(cloud, 0), 1).has_value());
    CHECK(state.deployed);
    CHECK(state.owner == cloud.address());
    CHECK(state.authorized.empty());

    CHECK(state.apply(deploy_tx(fog, 0), 1) == TxReject::AlreadyDeployed);

    // Non-owner cannot grant.
    CHECK(state.apply(grant_tx(fog, fog.address(), 0), 2) == TxReject::NotOwner);
    CHECK_FALSE(state.apply(grant_tx(cloud, fog.address(), 1), 2).has_value());
    CHECK(state.authorized.contains(fog.address()));

    // Granting the same entity again is an idempotent success.
    CHECK_FALSE(state.apply(grant_tx(cloud, fog.address(), 2), 3).has_value());
    CHECK(state.authorized.size() == 1);

    // Unauthorized submitter.
    CHECK(state.apply(put_record_tx(edge, "cam01/0", seg_digest(1), 0), 3) ==
          TxReject::NotAuthorized);

    CHECK_FALSE(state.apply(put_record_tx(fog, "cam01/0", seg_digest(1), 0), 4).has_value());
    auto token = state.get_index_token("cam01/0");
    REQUIRE(token.has_value());
    CHECK(token->digest == seg_digest(1));
    CHECK(token->block_height == 4);
    CHECK(token->submitter == fog.address());

    // Resubmission with a different digest is rejected and does not clobber.
    CHECK(state.apply(put_record_tx(fog, "cam01/0", seg_digest(2), 1), 5) ==
          TxReject::DuplicateRecord);
    CHECK(state.get_index_token("cam01/0")->digest == seg_digest(1));

    // Revocation blocks future writes.
    CHECK_FALSE(state.apply(revoke_tx(cloud, fog.address(), 3), 6).has_value());
    CHECK(state.apply(put_record_tx(fog, "cam01/1", seg_digest(3), 1), 6) ==
          TxReject::NotAuthorized);
}

TEST_CASE("contract rejects bad signatures, bad nonces, and acting before deploy") {
    auto cloud = test_account(1);
    auto fog = test_account(2);
    ContractState state;

    CHECK(state.apply(grant_tx(cloud, fog.address(), 0), 1) == TxReject::NotDeployed);
    CHECK(state.apply(put_record_tx(fog, "s", seg_digest(0), 0), 1) == TxReject::NotDeployed);

    Transaction forged = deploy_tx(cloud, 0);
    forged.signature[10] ^= 0xff;
    CHECK(state.apply(forged, 1) == TxReject::BadSignature);

    CHECK(state.apply(deploy_tx(cloud, 5), 1) == TxReject::BadNonce);
    CHECK_FALSE(state.apply(deploy_tx(cloud, 0), 1).has_value());
    CHECK(state.apply(grant_tx(cloud, fog.address(), 0), 2) == TxReject::BadNonce);
}

TEST_CASE("difficulty 8 forces a zero leading byte") {
    Block g = make_genesis(8);
    CHECK(g.block_hash()[0] == 0x00);
    CHECK(g.height == 0);
    CHECK(g.prev_hash == crypto::Digest{});
}

TEST_CASE("node mining excludes transactions that fail against state") {
    ChainNode node(ChainConfig{8});
    auto cloud = test_account(1);
    auto fog = test_account(2);
    auto mallory = test_account(4);

    CHECK_FALSE(node.submit_tx(deploy_tx(cloud, 0)).has_value());
    CHECK_FALSE(node.submit_tx(grant_tx(mallory, mallory.address(), 0)).has_value());  // NotOwner
    CHECK_FALSE(node.submit_tx(grant_tx(cloud, fog.address(), 1)).has_value());

    auto block = node.mine_block(1000, 1);
    REQUIRE(block.has_value());
    CHECK(block->txs.size() == 2);  // the NotOwner grant was excluded
    for (const auto& tx : block->txs) CHECK(tx.sender == cloud.address());
    CHECK(node.contract_state().authorized.contains(fog.address()));
    CHECK(satisfies_difficulty(block->block_hash(), 8));

    Transaction bad_sig = deploy_tx(cloud, 9);
    bad_sig.signature[0] ^= 1;
    CHECK(node.submit_tx(bad_sig) == TxReject::BadSignature);
}

TEST_CASE("tokens are readable only after mining") {
    ChainNode node(ChainConfig{8});
    auto cloud = test_account(1);
    auto fog = test_account(2);
    node.submit_tx(deploy_tx(cloud, 0));
    node.submit_tx(grant_tx(cloud, fog.address(), 1));
    node.mine_block(1, 1);

    node.submit_tx(put_record_tx(fog, "cam01/0", seg_digest(7), 0));
    CHECK_FALSE(node.get_index_token("cam01/0").has_value());  // still in mempool
    node.mine_block(2, 2);
    auto token = node.get_index_token("cam01/0");
    REQUIRE(token.has_value());
    CHECK(token->digest == seg_digest(7));
    CHECK(token->submitter == fog.address());
}

TEST_CASE("replaying a mined chain reproduces the live state") {
    ChainNode node(ChainConfig{8});
    auto cloud = test_account(1);
    auto fog = test_account(2);
    node.submit_tx(deploy_tx(cloud, 0));
    node.mine_block(1, 1);
    node.submit_tx(grant_tx(cloud, fog.address(), 1));
    node.mine_block(2, 2);
    for (int i = 0; i < 5; ++i)
        node.submit_tx(put_record_tx(fog, "cam01/" + std::to_string(i * 10'000),
                                     seg_digest(static_cast<std::uint8_t>(i)), i));
    node.mine_block(3, 3);

    CHECK(node.contract_state() == replay_state(node.chain()));
    CHECK_FALSE(validate_chain(node.chain(), node.config()).has_value());
}

TEST_CASE("validate_chain pinpoints every violation class") {
    ChainConfig cfg{8};
    auto cloud = test_account(1);
    auto fog = test_account(2);

    // Build an honest 4-block chain by hand.
    std::vector<Block> chain{make_genesis(cfg.difficulty_bits)};
    chain.push_back(forge(chain.back(), {deploy_tx(cloud, 0)}, cfg.difficulty_bits, 100));
    chain.push_back(
        forge(chain.back(), {grant_tx(cloud, fog.address(), 1)}, cfg.difficulty_bits, 200));
    chain.push_back(forge(chain.back(),
                          {put_record_tx(fog, "cam01/0", seg_digest(1), 0),
                           put_record_tx(fog, "cam01/10000", seg_digest(2), 1)},
                          cfg.difficulty_bits, 300));
    REQUIRE_FALSE(validate_chain(chain, cfg).has_value());

    SECTION("tampered genesis") {
        auto bad = chain;
        bad[0].timestamp_ms = 7;
        auto v = validate_chain(bad, cfg);
        REQUIRE(v.has_value());
        CHECK(v->height == 0);
    }
    SECTION("flipped byte in a block's tx payload breaks the root") {
        auto bad = chain;
        auto payload = decode_put_record(bad[3].txs[0].payload);
        bad[3].txs[0].payload = encode_put_record(payload->segment_id, seg_digest(99));
        auto v = validate_chain(bad, cfg);
        REQUIRE(v.has_value());
        CHECK(v->height == 3);
        CHECK(v->reason == "tx root mismatch");
    }
    SECTION("broken hash link") {
        auto bad = chain;
        bad[2].prev_hash[4] ^= 0xff;
        auto v = validate_chain(bad, cfg);
        REQUIRE(v.has_value());
        CHECK(v->height == 2);
        CHECK(v->reason == "broken hash link");
    }
    SECTION("insufficient proof of work") {
        auto bad = chain;
        // Rebuild block 2 with a nonce that fails the difficulty, keeping
        // descendants linked so the PoW check is what fires.
        Block weak = bad[2];
        for (weak.pow_nonce = 0;; ++weak.pow_nonce)
            if (!satisfies_difficulty(weak.block_hash(), cfg.difficulty_bits)) break;
        bad[2] = weak;
        bad[3].prev_hash = weak.block_hash();
        for (bad[3].pow_nonce = 0;; ++bad[3].pow_nonce)
            if (satisfies_difficulty(bad[3].block_hash(), cfg.difficulty_bits)) break;
        auto v = validate_chain(bad, cfg);
        REQUIRE(v.has_value());
        CHECK(v->height == 2);
        CHECK(v->reason == "insufficient proof of work");
    }
    SECTION("forged signature") {
        auto bad = chain;
        bad[1].txs[0].signature[3] ^= 0x10;
        bad[1].tx_root = tx_root_for(bad[1].txs);
        for (bad[1].pow_nonce = 0;; ++bad[1].pow_nonce)
            if (satisfies_difficulty(bad[1].block_hash(), cfg.difficulty_bits)) break;
        bad[2].prev_hash = bad[1].block_hash();
        for (bad[2].pow_nonce = 0;; ++bad[2].pow_nonce)
            if (satisfies_difficulty(bad[2].block_hash(), cfg.difficulty_bits)) break;
        bad[3].prev_hash = bad[2].block_hash();
        for (bad[3].pow_nonce = 0;; ++bad[3].pow_nonce)
            if (satisfies_difficulty(bad[3].block_hash(), cfg.difficulty_bits)) break;
        auto v = validate_chain(bad, cfg);
        REQUIRE(v.has_value());
        CHECK(v->height == 1);
        CHECK(v->reason == "invalid transaction: BadSignature");
    }
    SECTION("reordered transactions of one sender violate nonce order") {
        auto bad = chain;
        std::swap(bad[3].txs[0], bad[3].txs[1]);
        bad[3].tx_root = tx_root_for(bad[3].txs);
        for (bad[3].pow_nonce = 0;; ++bad[3].pow_nonce)
            if (satisfies_difficulty(bad[3].block_hash(), cfg.difficulty_bits)) break;
        auto v = validate_chain(bad, cfg);
        REQUIRE(v.has_value());
        CHECK(v->height == 3);
        CHECK(v->reason == "invalid transaction: BadNonce");
    }
    SECTION("access-rule violation inside a sealed block") {
        auto mallory = test_account(9);
        auto bad = chain;
        Block extra = forge(bad.back(), {grant_tx(mallory, mallory.address(), 0)},
                            cfg.difficulty_bits, 400);
        bad.push_back(extra);
        auto v = validate_chain(bad, cfg);
        REQUIRE(v.has_value());
        CHECK(v->height == 4);
        CHECK(v->reason == "invalid transaction: NotOwner");
    }
}

TEST_CASE("fork choice prefers longer chains, then lower tip hash") {
    ChainConfig cfg{8};
    auto cloud = test_account(1);

    ChainNode a(cfg), b(cfg);
    a.submit_tx(deploy_tx(cloud, 0));
    b.submit_tx(deploy_tx(cloud, 0));

    auto block_a = a.mine_block(100, 11);
    auto block_b = b.mine_block(200, 22);
    REQUIRE(block_a.has_value());
    REQUIRE(block_b.has_value());
    REQUIRE(block_a->block_hash() != block_b->block_hash());

    // Cross-import: both nodes see both height-1 blocks.
    a.import_block(*block_b);
    b.import_block(*block_a);
    CHECK(a.get_tip() == b.get_tip());  // tiebreak agrees everywhere

    crypto::Digest lower = std::min(block_a->block_hash(), block_b->block_hash(),
                                    [](const auto& x, const auto& y) {
                                        return std::lexicographical_compare(x.begin(), x.end(),
                                                                            y.begin(), y.end());
                                    });
    CHECK(a.get_tip().second == lower);

    // A longer branch overrides the tiebreak winner.
    Block hi = block_a->block_hash() == lower ? *block_b : *block_a;
    Block ext = forge(hi, {}, cfg.difficulty_bits, 300);
    CHECK(a.import_block(ext) == ChainNode::ImportResult::Adopted);
    CHECK(a.get_tip().first == 2);
    CHECK(a.get_tip().second == ext.block_hash());
}

TEST_CASE("orphan blocks attach once their parent arrives") {
    ChainConfig cfg{8};
    ChainNode a(cfg), b(cfg);
    auto cloud = test_account(1);
    a.submit_tx(deploy_tx(cloud, 0));
    auto b1 = a.mine_block(1, 5);
    auto b2 = a.mine_block(2, 6, true);
    REQUIRE(b2.has_value());

    // Child first: parked, not adopted.
    CHECK(b.import_block(*b2) == ChainNode::ImportResult::Stored);
    CHECK(b.get_tip().first == 0);
    // Parent arrives: both attach.
    CHECK(b.import_block(*b1) == ChainNode::ImportResult::Adopted);
    CHECK(b.get_tip() == a.get_tip());
    CHECK(b.contract_state() == a.contract_state());
}

TEST_CASE("expected nonce attempts double per extra difficulty bit") {
    // Statistical: over >= 30 blocks per difficulty, mean attempts should
    // scale by ~2x within a 3x band.
    auto cloud = test_account(1);
    auto sample = [&](std::uint32_t difficulty, int blocks) {
        Block parent = make_genesis(8);
        double total = 0;
        for (int i = 0; i < blocks; ++i) {
            std::uint64_t attempts = 0;
            parent = forge(parent, {}, difficulty, 1000 + i * 131, &attempts);
            total += static_cast<double>(attempts);
        }
        return total / blocks;
    };
    double mean10 = sample(10, 40);
    double mean11 = sample(11, 40);
    double ratio = mean11 / mean10;
    INFO("mean10=" << mean10 << " mean11=" << mean11 << " ratio=" << ratio);
    CHECK(ratio > 2.0 / 3.0);
    CHECK(ratio < 6.0);
}

TEST_CASE("network: synchronized nodes answer queries identically") {
    ChainNetwork::Config cfg;
    cfg.node_count = 3;
    cfg.difficulty_bits = 8;
    cfg.seed = 7;
    ChainNetwork net(cfg);
    auto cloud = test_account(1);
    auto fog = test_account(2);

    net.broadcast_tx(deploy_tx(cloud, 0));
    net.broadcast_tx(grant_tx(cloud, fog.address(), 1));
    REQUIRE(net.mine_on(0).has_value());
    for (int i = 0; i < 4; ++i)
        net.broadcast_tx(put_record_tx(fog, "cam01/" + std::to_string(10'000 * i),
                                       seg_digest(static_cast<std::uint8_t>(i)), i));
    net.mine_until_mempool_empty(0);

    for (int i = 0; i < 4; ++i) {
        std::string id = "cam01/" + std::to_string(10'000 * i);
        auto t0 = net.node(0).get_index_token(id);
        REQUIRE(t0.has_value());
        for (std::size_t n = 1; n < net.size(); ++n) {
            auto tn = net.node(n).get_index_token(id);
            REQUIRE(tn.has_value());
            CHECK(*tn == *t0);
        }
    }
    CHECK(net.node(1).get_tip() == net.node(0).get_tip());
    CHECK_FALSE(net.node(2).get_index_token("cam01/999").has_value());
}

TEST_CASE("miner races converge to one tip after quiescence") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        ChainNetwork::Config cfg;
        cfg.node_count = 4;
        cfg.difficulty_bits = 12;
        cfg.seed = seed;
        cfg.attempts_per_step = 2048;  // high odds of simultaneous finds
        cfg.mine_empty = true;
        ChainNetwork net(cfg);
        bool reached = net.run_until_height(6, 4000);
        CHECK(reached);
        CHECK(net.converged());
        auto tip = net.node(0).get_tip();
        for (std::size_t i = 1; i < net.size(); ++i) CHECK(net.node(i).get_tip() == tip);
        CHECK_FALSE(validate_chain(net.node(0).chain(), ChainConfig{cfg.difficulty_bits})
                        .has_value());
    }
}
