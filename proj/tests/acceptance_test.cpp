// Acceptance suite: one test case per acceptance criterion, each printing a
// single PASS/FAIL line with the measured evidence.

#include "catch_amalgamated.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "vigil/authority/verify.hpp"
#include "vigil/harness/bench.hpp"
#include "vigil/harness/scenario.hpp"
#include "vigil/index/store.hpp"
#include "vigil/ledger/chain.hpp"
#include "vigil/ledger/network.hpp"
#include "vigil/rpc/chain_rpc.hpp"

using namespace vigil;

namespace {

void report_line(const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %s — %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
}

ledger::Account acct(std::uint8_t tag) {
    Bytes seed(32, tag);
    return ledger::Account::from_seed(seed);
}

ledger::Block forge(const ledger::Block& parent, std::vector<ledger::Transaction> txs,
                    std::uint32_t difficulty, std::int64_t ts) {
    ledger::Block b;
    b.height = parent.height + 1;
    b.prev_hash = parent.block_hash();
    b.timestamp_ms = ts;
    b.txs = std::move(txs);
    b.tx_root = ledger::tx_root_for(b.txs);
    for (b.pow_nonce = 0;; ++b.pow_nonce)
        if (ledger::satisfies_difficulty(b.block_hash(), difficulty)) break;
    return b;
}

void remine(std::vector<ledger::Block>& chain, std::size_t from, std::uint32_t difficulty) {
    for (std::size_t h = from; h < chain.size(); ++h) {
        if (h > 0) chain[h].prev_hash = chain[h - 1].block_hash();
        chain[h].tx_root = ledger::tx_root_for(chain[h].txs);
        for (chain[h].pow_nonce = 0;; ++chain[h].pow_nonce)
            if (ledger::satisfies_difficulty(chain[h].block_hash(), difficulty)) break;
    }
}

}  // namespace

TEST_CASE("criterion: end-to-end integrity") {
    // 2 edge cameras, 1 fog, 1 cloud, 4 miners, difficulty 16; >=500 records,
    // >=5 anchored segments, 100% Authentic, under 60 s.
    harness::ScenarioConfig cfg = harness::default_scenario();
    cfg.miner_count = 4;
    cfg.difficulty_bits = 16;
    cfg.frames = 300;
    auto report = harness::run_scenario(cfg);

    bool ok = report.all_authentic && report.records_streamed >= 500 &&
              report.segments_anchored >= 5 && report.verdicts.size() >= 5 &&
              report.elapsed < std::chrono::seconds(60);
    report_line("end-to-end integrity", ok,
                std::to_string(report.records_streamed) + " records, " +
                    std::to_string(report.segments_anchored) + " anchored segments, " +
                    std::to_string(report.verdicts.size()) + " verdicts all authentic=" +
                    (report.all_authentic ? "yes" : "no") + ", elapsed " +
                    std::to_string(report.elapsed.count()) + " ms");
    CHECK(report.records_streamed >= 500);
    CHECK(report.segments_anchored >= 5);
    CHECK(report.all_authentic);
    CHECK(report.elapsed < std::chrono::seconds(60));
    REQUIRE(ok);
}

TEST_CASE("criterion: tamper soundness") {
    // Exhaustive single-byte mutation (every position, every other value) of
    // one small anchored segment: zero false-Authentic outcomes.
    index::ContextConfig ctx;
    ctx.zones = {{"cam01", "lobby"}};
    ctx.speed_thresholds = {{"business_hours", 0.5}, {"after_hours", 0.1}};
    std::vector<index::ContextualizedRecord> records;
    for (int i = 0; i < 2; ++i)
        records.push_back(index::contextualize(
            {i * 1000, static_cast<std::uint64_t>(i), "cam01", 3, 0.25, 180.0}, ctx));
    Bytes canonical = index::canonical_bytes(records);
    REQUIRE(canonical.size() <= 200);

    ledger::ChainNode node(ledger::ChainConfig{12});
    auto cloud = acct(1);
    auto fog = acct(2);
    node.submit_tx(ledger::deploy_tx(cloud, 0));
    node.submit_tx(ledger::grant_tx(cloud, fog.address(), 1));
    node.mine_block(1, 1);
    node.submit_tx(ledger::put_record_tx(fog, "cam01/0", crypto::sha256(canonical), 0));
    node.mine_block(2, 2);
    rpc::LocalChainReader reader(node);
    REQUIRE(authority::authenticate_segment({"cam01/0", canonical}, reader).authentic());

    std::uint64_t mutations = 0, false_authentic = 0;
    for (std::size_t pos = 0; pos < canonical.size(); ++pos) {
        for (int v = 0; v < 256; ++v) {
            if (static_cast<std::uint8_t>(v) == canonical[pos]) continue;
            Bytes mutated = canonical;
            mutated[pos] = static_cast<std::uint8_t>(v);
            ++mutations;
            if (authority::authenticate_segment({"cam01/0", mutated}, reader).authentic())
                ++false_authentic;
        }
    }
    bool ok = false_authentic == 0 && mutations == canonical.size() * 255;
    report_line("tamper soundness", ok,
                std::to_string(mutations) + " single-byte mutations over " +
                    std::to_string(canonical.size()) + " canonical bytes, " +
                    std::to_string(false_authentic) + " false-Authentic");
    REQUIRE(ok);
}

TEST_CASE("criterion: channel round-trip, bit-flip, replay") {
    // 1000 random payloads up to 1 MiB through an established session.
    auto keys = std::make_shared<crypto::RsaKeyPair>(crypto::RsaKeyPair::generate());
    auto [init, hello] = channel::Session::initiate(system_random());
    auto resp = channel::Session::responder({"fog", keys}, system_random());
    auto cert = resp.respond_with_certificate(hello);
    auto kt = init.send_shared_key(cert);
    auto confirm = resp.confirm_key(kt);
    resp.accept_ack(init.verify_and_ack(confirm));

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int failures = 0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        std::size_t size;
        if (i % 100 == 0) {
            size = 1 << 20;  // force full-size payloads periodically
        } else {
            size = static_cast<std::size_t>(std::pow(2.0, unit(rng) * 20.0));
        }
        Bytes payload(size);
        for (auto& b : payload) b = static_cast<std::uint8_t>(rng());

        channel::Frame frame = init.send_data(payload);

        // Single-bit flip must be rejected without advancing the counter.
        channel::Frame flipped = frame;
        std::size_t byte = rng() % flipped.body.size();
        flipped.body[byte] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        bool flip_rejected = false;
        try {
            resp.recv_data(flipped);
        } catch (const channel::ChannelError& e) {
            flip_rejected = e.kind() == channel::ChannelError::Kind::TamperDetected;
        }

        bool round_trip = false;
        try {
            round_trip = bytes_equal(resp.recv_data(frame), payload);
        } catch (const channel::ChannelError&) {
        }

        bool replay_rejected = false;
        try {
            resp.recv_data(frame);
        } catch (const channel::ChannelError& e) {
            replay_rejected = e.kind() == channel::ChannelError::Kind::Replay;
        }

        if (!flip_rejected || !round_trip || !replay_rejected) ++failures;
    }
    bool ok = failures == 0;
    report_line("channel round-trip + replay", ok,
                std::to_string(trials) + " payloads up to 1 MiB, " + std::to_string(failures) +
                    " failures");
    REQUIRE(ok);
}

TEST_CASE("criterion: chain validity") {
    // Tamper corpus covering every violation class, plus honest chains.
    ledger::ChainConfig cfg{10};
    auto cloud = acct(1);
    auto fog = acct(2);
    auto mallory = acct(9);

    auto build_honest = [&](std::uint64_t salt) {
        std::vector<ledger::Block> chain{ledger::make_genesis(cfg.difficulty_bits)};
        chain.push_back(forge(chain.back(), {ledger::deploy_tx(cloud, 0)}, cfg.difficulty_bits,
                              100 + static_cast<std::int64_t>(salt)));
        chain.push_back(forge(chain.back(), {ledger::grant_tx(cloud, fog.address(), 1)},
                              cfg.difficulty_bits, 200 + static_cast<std::int64_t>(salt)));
        chain.push_back(forge(chain.back(),
                              {ledger::put_record_tx(fog, "cam01/0", crypto::sha256(Bytes{1}), 0),
                               ledger::put_record_tx(fog, "cam01/10000",
                                                     crypto::sha256(Bytes{2}), 1)},
                              cfg.difficulty_bits, 300 + static_cast<std::int64_t>(salt)));
        return chain;
    };

    int honest_accepted = 0;
    const int honest_total = 5;
    for (int i = 0; i < honest_total; ++i)
        if (!ledger::validate_chain(build_honest(static_cast<std::uint64_t>(i) * 1000), cfg))
            ++honest_accepted;

    struct Tamper {
        const char* name;
        std::uint64_t expect_height;
        std::function<void(std::vector<ledger::Block>&)> apply;
    };
    std::vector<Tamper> corpus = {
        {"hash link", 2, [&](auto& c) { c[2].prev_hash[0] ^= 0xff; }},
        {"pow", 2,
         [&](auto& c) {
             for (c[2].pow_nonce = 0;; ++c[2].pow_nonce)
                 if (!ledger::satisfies_difficulty(c[2].block_hash(), cfg.difficulty_bits)) break;
             remine(c, 3, cfg.difficulty_bits);
         }},
        {"tx_root", 3,
         [&](auto& c) {
             c[3].txs[0].payload = ledger::encode_put_record("cam01/0",
                                                             crypto::sha256(Bytes{0x77}));
         }},
        {"signature", 1,
         [&](auto& c) {
             c[1].txs[0].signature[5] ^= 0x40;
             remine(c, 1, cfg.difficulty_bits);
         }},
        {"nonce order", 3,
         [&](auto& c) {
             std::swap(c[3].txs[0], c[3].txs[1]);
             remine(c, 3, cfg.difficulty_bits);
         }},
        {"access rule", 4,
         [&](auto& c) {
             c.push_back(forge(c.back(), {ledger::grant_tx(mallory, mallory.address(), 0)},
                               cfg.difficulty_bits, 400));
         }},
        {"genesis", 0, [&](auto& c) { c[0].timestamp_ms = 1; }},
    };

    int detected = 0;
    std::string missed;
    for (const auto& t : corpus) {
        auto chain = build_honest(7777);
        t.apply(chain);
        auto violation = ledger::validate_chain(chain, cfg);
        if (violation && violation->height == t.expect_height)
            ++detected;
        else
            missed += std::string(t.name) + " ";
    }

    bool ok = detected == static_cast<int>(corpus.size()) && honest_accepted == honest_total;
    report_line("chain validity", ok,
                std::to_string(detected) + "/" + std::to_string(corpus.size()) +
                    " violation classes detected, " + std::to_string(honest_accepted) + "/" +
                    std::to_string(honest_total) + " honest chains accepted" +
                    (missed.empty() ? "" : ", missed: " + missed));
    REQUIRE(ok);
}

TEST_CASE("criterion: query oracle equivalence") {
    // 1000 random QuerySpecs over random stores of <= 10000 records.
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    index::ContextConfig ctx;
    ctx.zones = {{"cam01", "a"}, {"cam02", "b"}, {"cam03", "c"}};
    ctx.speed_thresholds = {{"business_hours", 0.5}, {"after_hours", 0.1}};

    auto oracle_match = [](const index::QuerySpec& q, const index::ContextualizedRecord& r) {
        bool ok = true;
        if (q.camera_id) ok = ok && r.record.camera_id == *q.camera_id;
        if (q.time_from_ms) ok = ok && r.record.timestamp_ms >= *q.time_from_ms;
        if (q.time_to_ms) ok = ok && r.record.timestamp_ms < *q.time_to_ms;
        if (q.pedestrian_id) ok = ok && r.record.pedestrian_id == *q.pedestrian_id;
        if (q.speed_min) ok = ok && r.record.speed >= *q.speed_min;
        if (q.speed_max) ok = ok && r.record.speed < *q.speed_max;
        if (q.direction_min) ok = ok && r.record.direction >= *q.direction_min;
        if (q.direction_max) ok = ok && r.record.direction < *q.direction_max;
        if (q.time_band) ok = ok && r.time_band == *q.time_band;
        if (q.anomaly) ok = ok && r.anomaly == *q.anomaly;
        return ok;
    };

    const std::array<const char*, 3> cams{"cam01", "cam02", "cam03"};
    int mismatches = 0, trials = 0;
    for (int store_i = 0; store_i < 10; ++store_i) {
        index::IndexStore store(ctx);
        std::vector<index::ContextualizedRecord> all;
        std::size_t n = 1000 + rng() % 9001;  // up to 10k
        for (std::size_t i = 0; i < n; ++i) {
            feature::FeatureRecord r;
            r.timestamp_ms = static_cast<std::int64_t>(rng() % (48 * 3'600'000ull));
            r.frame_seq = rng() % 5000;
            r.camera_id = cams[rng() % 3];
            r.pedestrian_id = rng() % 60;
            r.speed = unit(rng);
            r.direction = std::min(unit(rng) * 360.0, 359.9999);
            auto cr = store.contextualize_record(r);
            store.insert(cr);
            all.push_back(cr);
        }
        for (int q_i = 0; q_i < 100; ++q_i) {
            index::QuerySpec q;
            if (unit(rng) < 0.6) q.camera_id = cams[rng() % 3];
            if (unit(rng) < 0.6) {
                std::int64_t a = static_cast<std::int64_t>(rng() % (48 * 3'600'000ull));
                std::int64_t b = static_cast<std::int64_t>(rng() % (48 * 3'600'000ull));
                q.time_from_ms = std::min(a, b);
                q.time_to_ms = std::max(a, b) + 1;
            }
            if (unit(rng) < 0.3) q.pedestrian_id = rng() % 60;
            if (unit(rng) < 0.3) {
                double a = unit(rng), b = unit(rng);
                q.speed_min = std::min(a, b);
                q.speed_max = std::max(a, b) + 1e-12;
            }
            if (unit(rng) < 0.2) {
                double a = unit(rng) * 360, b = unit(rng) * 360;
                q.direction_min = std::min(a, b);
                q.direction_max = std::max(a, b) + 1e-12;
            }
            if (unit(rng) < 0.3)
                q.time_band = rng() % 2 ? "business_hours" : "after_hours";
            if (unit(rng) < 0.3) q.anomaly = rng() % 2 == 0;
            if (q.empty()) q.camera_id = "cam01";

            auto result = store.query(q);
            std::vector<index::ContextualizedRecord> expected;
            for (const auto& r : all)
                if (oracle_match(q, r)) expected.push_back(r);
            std::sort(expected.begin(), expected.end(), index::canonical_order);
            ++trials;
            if (result.records != expected) ++mismatches;
        }
    }
    bool ok = mismatches == 0 && trials == 1000;
    report_line("query oracle equivalence", ok,
                std::to_string(trials) + " random specs across 10 stores, " +
                    std::to_string(mismatches) + " mismatches");
    REQUIRE(ok);
}

TEST_CASE("criterion: auth stage ordering (fig 5, qualitative)") {
    harness::AuthBenchConfig cfg;
    auto report = harness::bench_auth_stages(cfg, 50);
    double query = report.mean_us("query_index_token");
    double process = report.mean_us("process_data");
    double verify = report.mean_us("verify_hash");
    double share = query / (query + process + verify);
    bool ok = query > process && process > verify && share > 0.5;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "mean query=%.1fus > process=%.1fus > verify=%.2fus over 50 runs; "
                  "query share %.1f%% (> 50%% required)",
                  query, process, verify, share * 100.0);
    report_line("fig5 stage ordering", ok, detail);
    REQUIRE(ok);
}

TEST_CASE("criterion: channel mode comparison (fig 6, qualitative)") {
    harness::ChannelBenchConfig cfg;
    auto report = harness::bench_channel(cfg, {1 << 20}, 50);
    double plain = report.mean_us("plain", 1 << 20);
    double sym = report.mean_us("symmetric_only", 1 << 20);
    double asym = report.mean_us("asymmetric_only", 1 << 20);
    double hybrid = report.mean_us("hybrid", 1 << 20);

    bool hybrid_vs_plain = hybrid <= 1.25 * plain;
    bool hybrid_vs_sym = hybrid <= 1.15 * sym;
    bool asym_slow = asym >= 3.0 * sym;
    bool ok = hybrid_vs_plain && hybrid_vs_sym && asym_slow;
    char detail[320];
    std::snprintf(detail, sizeof(detail),
                  "1 MiB x 50 runs: plain=%.1fms sym=%.1fms hybrid=%.1fms asym=%.1fms; "
                  "hybrid/plain=%.3f (<=1.25), hybrid/sym=%.3f (<=1.15), asym/sym=%.1f (>=3)",
                  plain / 1000, sym / 1000, hybrid / 1000, asym / 1000, hybrid / plain,
                  hybrid / sym, asym / sym);
    report_line("fig6 channel comparison", ok, detail);
    CHECK(hybrid_vs_plain);
    CHECK(hybrid_vs_sym);
    CHECK(asym_slow);
    REQUIRE(ok);
}

TEST_CASE("criterion: fork convergence") {
    int converged = 0;
    const int runs = 30;
    for (int seed = 1; seed <= runs; ++seed) {
        ledger::ChainNetwork::Config cfg;
        cfg.node_count = 4;
        cfg.difficulty_bits = 12;
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.attempts_per_step = 2048;
        cfg.mine_empty = true;
        ledger::ChainNetwork net(cfg);
        if (!net.run_until_height(6, 4000)) continue;
        if (!net.converged()) continue;
        auto tip = net.node(0).get_tip();
        bool same = true;
        for (std::size_t i = 1; i < net.size(); ++i)
            if (net.node(i).get_tip() != tip) same = false;
        if (same && !ledger::validate_chain(net.node(0).chain(),
                                            ledger::ChainConfig{cfg.difficulty_bits}))
            ++converged;
    }
    bool ok = converged == runs;
    report_line("fork convergence", ok,
                std::to_string(converged) + "/" + std::to_string(runs) +
                    " seeded 4-miner races converged to identical tips");
    REQUIRE(ok);
}
