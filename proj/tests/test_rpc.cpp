#include "catch_amalgamated.hpp"

#include <future>

#include "vigil/authority/verify.hpp"
#include "vigil/rpc/chain_rpc.hpp"
#include "vigil/rpc/codec.hpp"
#include "vigil/rpc/fog_rpc.hpp"

using namespace vigil;

namespace {

ledger::Account acct(std::uint8_t tag) {
    Bytes seed(32, tag);
    return ledger::Account::from_seed(seed);
}

index::ContextConfig ctx_config() {
    index::ContextConfig cfg;
    cfg.zones = {{"cam01", "lobby"}};
    cfg.speed_thresholds = {{"business_hours", 0.5}, {"after_hours", 0.1}};
    return cfg;
}

channel::ResponderIdentity server_identity() {
    static auto keys = std::make_shared<crypto::RsaKeyPair>(crypto::RsaKeyPair::generate());
    return {"server", keys};
}

}  // namespace

TEST_CASE("query spec wire form round-trips") {
    index::QuerySpec q;
    q.camera_id = "cam01";
    q.time_from_ms = -50;
    q.time_to_ms = 10'000;
    q.pedestrian_id = 42;
    q.speed_min = 0.001;
    q.speed_max = 0.5;
    q.direction_min = 10.0;
    q.direction_max = 350.0;
    q.time_band = "after_hours";
    q.anomaly = true;

    auto back = rpc::decode_query_spec(rpc::encode_query_spec(q));
    CHECK(back.camera_id == q.camera_id);
    CHECK(back.time_from_ms == q.time_from_ms);
    CHECK(back.time_to_ms == q.time_to_ms);
    CHECK(back.pedestrian_id == q.pedestrian_id);
    CHECK(back.speed_min == q.speed_min);
    CHECK(back.speed_max == q.speed_max);
    CHECK(back.direction_min == q.direction_min);
    CHECK(back.direction_max == q.direction_max);
    CHECK(back.time_band == q.time_band);
    CHECK(back.anomaly == q.anomaly);

    index::QuerySpec empty;
    auto empty_back = rpc::decode_query_spec(rpc::encode_query_spec(empty));
    CHECK(empty_back.empty());
}

TEST_CASE("chain rpc over a plain loopback pipe") {
    ledger::ChainNode node(ledger::ChainConfig{8});
    auto cloud = acct(1);
    auto fog = acct(2);

    auto [client_stream, server_stream] = channel::memory_pipe();
    auto server = std::async(std::launch::async, [&, s = std::move(server_stream)]() mutable {
        channel::PlainMessageStream stream(std::move(s));
        rpc::serve_chain_connection(node, stream);
    });

    channel::PlainMessageStream stream(std::move(client_stream));
    rpc::ChainRpcClient rpc(stream);

    auto [ok1, id1] = rpc.submit_tx(ledger::deploy_tx(cloud, 0));
    CHECK(ok1);
    auto [ok2, id2] = rpc.submit_tx(ledger::grant_tx(cloud, fog.address(), 1));
    CHECK(ok2);
    CHECK_FALSE(rpc.get_index_token("cam01/0").has_value());  // mempool only

    node.mine_block(1, 1);
    auto digest = crypto::sha256(to_bytes("segment-bytes"));
    rpc.submit_tx(ledger::put_record_tx(fog, "cam01/0", digest, 0));
    node.mine_block(2, 2);

    auto token = rpc.get_index_token("cam01/0");
    REQUIRE(token.has_value());
    CHECK(token->digest == digest);
    CHECK(token->submitter == fog.address());

    auto [height, hash] = rpc.get_tip();
    CHECK(height == 2);
    CHECK(hash == node.get_tip().second);

    auto block = rpc.get_block(1);
    REQUIRE(block.has_value());
    CHECK(block->height == 1);
    CHECK(block->txs.size() == 2);
    CHECK_FALSE(rpc.get_block(99).has_value());

    ledger::Transaction bad = ledger::deploy_tx(cloud, 7);
    bad.signature[0] ^= 1;
    auto [ok3, err] = rpc.submit_tx(bad);
    CHECK_FALSE(ok3);
    CHECK(err == "rejected:BadSignature");

    stream.close();
    server.get();
}

TEST_CASE("chain rpc over the secure channel") {
    ledger::ChainNode node(ledger::ChainConfig{8});
    auto cloud = acct(1);

    auto [client_stream, server_stream] = channel::memory_pipe();
    auto server = std::async(std::launch::async, [&, s = std::move(server_stream)]() mutable {
        auto ch = channel::SecureChannel::accept(std::move(s), server_identity(), system_random());
        rpc::serve_chain_connection(node, ch);
    });

    auto ch = channel::SecureChannel::connect(std::move(client_stream), system_random());
    rpc::ChainRpcClient rpc(ch);
    auto [ok, _] = rpc.submit_tx(ledger::deploy_tx(cloud, 0));
    CHECK(ok);
    node.mine_block(1, 1);
    auto [height, hash] = rpc.get_tip();
    CHECK(height == 1);
    ch.close();
    server.get();
}

TEST_CASE("unknown methods and malformed requests get error responses") {
    ledger::ChainNode node(ledger::ChainConfig{8});
    auto resp = rpc::handle_chain_request(node, rpc::Request{"rm -rf", {}});
    CHECK(resp.status == "unknown_method");
    auto resp2 = rpc::handle_chain_request(node, rpc::Request{"get_block", {to_bytes("x")}});
    CHECK(resp2.status == "bad_request");
    auto resp3 = rpc::handle_chain_request(node, rpc::Request{"submit_tx", {to_bytes("junk")}});
    CHECK(resp3.status == "bad_request");
}

TEST_CASE("fog query rpc returns records plus coverings; hook injects tampering") {
    auto cfg = ctx_config();
    index::IndexStore store(cfg);
    for (int i = 0; i < 12; ++i)
        store.insert(store.contextualize_record(
            {i * 2000, static_cast<std::uint64_t>(i), "cam01", 5, 0.02 * i, 90.0}));
    for (const auto& id : store.unsealed_segment_ids()) store.seal_segment(id);

    ledger::ChainNode chain_node(ledger::ChainConfig{8});
    auto cloud = acct(1);
    auto fog = acct(2);
    chain_node.submit_tx(ledger::deploy_tx(cloud, 0));
    chain_node.submit_tx(ledger::grant_tx(cloud, fog.address(), 1));
    chain_node.mine_block(1, 1);
    std::uint64_t nonce = 0;
    for (const auto& id : store.sealed_segment_ids()) {
        auto seg = store.get_segment(id);
        chain_node.submit_tx(ledger::put_record_tx(fog, id, seg->digest, nonce++));
    }
    chain_node.mine_block(2, 2);

    index::QuerySpec spec;
    spec.camera_id = "cam01";
    spec.time_from_ms = 0;
    spec.time_to_ms = 1'000'000;

    SECTION("honest serving verifies authentic end to end") {
        auto [client_stream, server_stream] = channel::memory_pipe();
        auto server = std::async(std::launch::async, [&, s = std::move(server_stream)]() mutable {
            channel::PlainMessageStream stream(std::move(s));
            rpc::serve_fog_connection(store, stream);
        });
        channel::PlainMessageStream stream(std::move(client_stream));
        rpc::FogQueryClient client(stream);
        auto result = client.query(spec);

        auto direct = store.query(spec);
        CHECK(result.records == direct.records);
        CHECK(result.covering_segment_ids() == direct.covering_segments);

        rpc::LocalChainReader reader(chain_node);
        auto verdicts = authority::authenticate_query(result.segments, reader);
        CHECK(verdicts.size() == direct.covering_segments.size());
        CHECK(authority::all_authentic(verdicts));
        stream.close();
        server.get();
    }

    SECTION("a tampering fog is caught by verification") {
        rpc::SegmentTamperHook hook = [](const std::string& id, Bytes& canonical) {
            if (id == "cam01/10000" && !canonical.empty()) canonical[3] ^= 0x01;
        };
        auto [client_stream, server_stream] = channel::memory_pipe();
        auto server = std::async(std::launch::async, [&, s = std::move(server_stream)]() mutable {
            channel::PlainMessageStream stream(std::move(s));
            rpc::serve_fog_connection(store, stream, hook);
        });
        channel::PlainMessageStream stream(std::move(client_stream));
        rpc::FogQueryClient client(stream);
        auto result = client.query(spec);

        rpc::LocalChainReader reader(chain_node);
        auto verdicts = authority::authenticate_query(result.segments, reader);
        CHECK_FALSE(authority::all_authentic(verdicts));
        int tampered = 0;
        for (const auto& v : verdicts) {
            if (v.segment_id == "cam01/10000") {
                CHECK(v.verdict == authority::Verdict::TamperedOrUnknown);
                ++tampered;
            } else {
                CHECK(v.verdict == authority::Verdict::Authentic);
            }
        }
        CHECK(tampered == 1);
        stream.close();
        server.get();
    }

    SECTION("too-broad queries surface as an rpc error") {
        auto resp = rpc::handle_fog_query(store, rpc::Request{"query",
                                                              {rpc::encode_query_spec({})}});
        CHECK(resp.status == "too_broad");
    }
}
