#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vigil/authority/verify.hpp"
#include "vigil/channel/secure_channel.hpp"
#include "vigil/crypto/aead.hpp"
#include "vigil/index/store.hpp"
#include "vigil/ledger/node.hpp"
#include "vigil/rpc/chain_rpc.hpp"

namespace vigil::harness {

class BenchConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BenchSample {
    std::string family;
    std::string label;
    std::uint64_t size_bytes = 0;
    int run = 0;
    double elapsed_us = 0.0;
};

struct BenchSummary {
    std::string family;
    std::string label;
    std::uint64_t size_bytes = 0;
    std::size_t runs = 0;
    double mean_us = 0.0;
    double p95_us = 0.0;
    double min_us = 0.0;
    double max_us = 0.0;
};

struct BenchReport {
    std::vector<BenchSample> samples;

    void add(std::string family, std::string label, std::uint64_t size, int run, double us) {
        samples.push_back({std::move(family), std::move(label), size, run, us});
    }

    std::vector<BenchSummary> summaries() const {
        std::map<std::tuple<std::string, std::string, std::uint64_t>, std::vector<double>> groups;
        for (const auto& s : samples)
            groups[{s.family, s.label, s.size_bytes}].push_back(s.elapsed_us);
        std::vector<BenchSummary> out;
        for (auto& [key, values] : groups) {
            std::sort(values.begin(), values.end());
            BenchSummary sum;
            sum.family = std::get<0>(key);
            sum.label = std::get<1>(key);
            sum.size_bytes = std::get<2>(key);
            sum.runs = values.size();
            sum.mean_us = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
            sum.p95_us = values[std::min(values.size() - 1,
                                         static_cast<std::size_t>(values.size() * 0.95))];
            sum.min_us = values.front();
            sum.max_us = values.back();
            out.push_back(std::move(sum));
        }
        return out;
    }

    double mean_us(const std::string& label, std::uint64_t size = 0) const {
        double total = 0;
        std::size_t n = 0;
        for (const auto& s : samples) {
            if (s.label != label) continue;
            if (size != 0 && s.size_bytes != size) continue;
            total += s.elapsed_us;
            ++n;
        }
        return n ? total / n : 0.0;
    }

    // Sample rows; schema documented in BENCH.md.
    void write_csv(std::ostream& out) const {
        out << "family,label,size_bytes,run,elapsed_us\n";
        for (const auto& s : samples)
            out << s.family << ',' << s.label << ',' << s.size_bytes << ',' << s.run << ','
                << s.elapsed_us << '\n';
    }

    void write_csv_file(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw BenchConfigError("cannot write " + path);
        write_csv(out);
    }

    void write_summary_csv(std::ostream& out) const {
        out << "family,label,size_bytes,runs,mean_us,p95_us,min_us,max_us\n";
        for (const auto& s : summaries())
            out << s.family << ',' << s.label << ',' << s.size_bytes << ',' << s.runs << ','
                << s.mean_us << ',' << s.p95_us << ',' << s.min_us << ',' << s.max_us << '\n';
    }

    static BenchReport read_csv(std::istream& in) {
        BenchReport report;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            BenchSample s;
            std::string size_s, run_s, us_s;
            std::getline(ss, s.family, ',');
            std::getline(ss, s.label, ',');
            std::getline(ss, size_s, ',');
            std::getline(ss, run_s, ',');
            std::getline(ss, us_s, ',');
            s.size_bytes = std::stoull(size_s);
            s.run = std::stoi(run_s);
            s.elapsed_us = std::stod(us_s);
            report.samples.push_back(std::move(s));
        }
        return report;
    }

    static BenchReport read_csv_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw BenchConfigError("cannot read " + path);
        return read_csv(in);
    }
};

inline double elapsed_us(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start)
        .count();
}

// ---------------------------------------------------------------------------
// Index-authentication stage timings.
//
// Three stages per run: fetch the token from a chain node over the modeled
// LAN link (query_index_token), canonicalize the segment and compute its
// digest (process_data), and compare against the token (verify_hash).
// ---------------------------------------------------------------------------

struct AuthBenchConfig {
    int segment_count = 10;
    int records_per_segment = 100;
    std::uint32_t difficulty_bits = 10;
    std::uint64_t seed = 1;
    channel::LinkModel link{std::chrono::microseconds(1000), std::chrono::microseconds(200),
                            12'500'000, 7};
};

inline index::ContextConfig bench_context_config() {
    index::ContextConfig cfg;
    cfg.zones = {{"cam01", "lobby"}};
    cfg.speed_thresholds = {{"business_hours", 0.5}, {"after_hours", 0.1}};
    return cfg;
}

inline BenchReport bench_auth_stages(const AuthBenchConfig& cfg, int runs) {
    if (runs < 50) throw BenchConfigError("auth benchmark needs at least 50 runs");

    // Populate a store and anchor every sealed segment.
    auto ctx = bench_context_config();
    index::IndexStore store(ctx);
    std::mt19937_64 rng(cfg.seed);
    for (int s = 0; s < cfg.segment_count; ++s) {
        for (int i = 0; i < cfg.records_per_segment; ++i) {
            feature::FeatureRecord r;
            r.timestamp_ms = s * ctx.window_ms + static_cast<std::int64_t>(rng() % ctx.window_ms);
            r.frame_seq = static_cast<std::uint64_t>(s * 100'000 + i);
            r.camera_id = "cam01";
            r.pedestrian_id = rng() % 50;
            r.speed = static_cast<double>(rng() % 10'000) / 10'000.0;
            r.direction = static_cast<double>(rng() % 35'999) / 100.0;
            store.insert(store.contextualize_record(r));
        }
    }

    ledger::ChainNode node(ledger::ChainConfig{cfg.difficulty_bits});
    Bytes seed(32, 1);
    auto cloud = ledger::Account::from_seed(seed);
    Bytes fog_seed(32, 2);
    auto fog = ledger::Account::from_seed(fog_seed);
    node.submit_tx(ledger::deploy_tx(cloud, 0));
    node.submit_tx(ledger::grant_tx(cloud, fog.address(), 1));
    node.mine_block(1, cfg.seed);
    std::uint64_t nonce = 0;
    std::vector<std::string> ids;
    for (const auto& id : store.unsealed_segment_ids()) {
        auto seg = store.seal_segment(id);
        node.submit_tx(ledger::put_record_tx(fog, id, seg.digest, nonce++));
        ids.push_back(id);
    }
    while (node.mempool_size() > 0) node.mine_block(2, cfg.seed + nonce);

    // Serve chain RPC across the modeled link.
    auto [client_stream, server_stream] = channel::memory_pipe(cfg.link);
    auto server = std::async(std::launch::async, [&, s = std::move(server_stream)]() mutable {
        channel::PlainMessageStream stream(std::move(s));
        rpc::serve_chain_connection(node, stream);
    });
    channel::PlainMessageStream stream(std::move(client_stream));
    rpc::ChainRpcClient client(stream);

    BenchReport report;
    for (int run = 0; run < runs; ++run) {
        const std::string& id = ids[static_cast<std::size_t>(run) % ids.size()];

        auto t0 = std::chrono::steady_clock::now();
        auto token = client.get_index_token(id);
        report.add("auth", "query_index_token", 0, run, elapsed_us(t0));
        if (!token) throw BenchConfigError("benchmark segment lost its token");

        auto seg = store.get_segment(id);
        auto t1 = std::chrono::steady_clock::now();
        Bytes canonical = index::canonical_bytes(seg->records);
        crypto::Digest local = crypto::sha256(canonical);
        report.add("auth", "process_data", canonical.size(), run, elapsed_us(t1));

        auto t2 = std::chrono::steady_clock::now();
        authority::AuthResult result;
        result.segment_id = id;
        result.local_digest = local;
        result.chain_digest = token->digest;
        result.chain_height = token->block_height;
        result.verdict = token->digest == local ? authority::Verdict::Authentic
                                                : authority::Verdict::TamperedOrUnknown;
        report.add("auth", "verify_hash", 0, run, elapsed_us(t2));
        if (!result.authentic()) throw BenchConfigError("benchmark segment failed to verify");
    }
    stream.close();
    server.get();
    return report;
}

// ---------------------------------------------------------------------------
// Channel mode comparison.
//
// Transfers a payload through the modeled link in four modes and measures
// sender-side time to the receiver's final acknowledgment (the receiver
// decrypts everything before acking). Asymmetric mode chunks the payload to
// the RSA-OAEP block limit, which is why it transfers far more frames.
// ---------------------------------------------------------------------------

enum class ChannelMode { Plain, SymmetricOnly, AsymmetricOnly, Hybrid };

inline const char* channel_mode_name(ChannelMode m) {
    switch (m) {
        case ChannelMode::Plain: return "plain";
        case ChannelMode::SymmetricOnly: return "symmetric_only";
        case ChannelMode::AsymmetricOnly: return "asymmetric_only";
        case ChannelMode::Hybrid: return "hybrid";
    }
    return "?";
}

inline std::optional<ChannelMode> parse_channel_mode(std::string_view s) {
    if (s == "plain") return ChannelMode::Plain;
    if (s == "symmetric_only") return ChannelMode::SymmetricOnly;
    if (s == "asymmetric_only") return ChannelMode::AsymmetricOnly;
    if (s == "hybrid") return ChannelMode::Hybrid;
    return std::nullopt;
}

struct ChannelBenchConfig {
    std::vector<ChannelMode> modes{ChannelMode::Plain, ChannelMode::SymmetricOnly,
                                   ChannelMode::AsymmetricOnly, ChannelMode::Hybrid};
    std::uint64_t seed = 1;
    std::size_t chunk_size = 64 * 1024;
    // 100 Mbit/s with 1 ms one-way latency: a desk-scale LAN.
    channel::LinkModel link{std::chrono::microseconds(1000), std::chrono::microseconds(100),
                            12'500'000, 7};
};

namespace detail {

inline void bench_receiver(channel::FrameStream& io, ChannelMode mode,
                           const crypto::AeadKey* psk, const crypto::RsaKeyPair* rsa,
                           std::size_t expected) {
    std::size_t got = 0;
    while (got < expected || expected == 0) {
        auto f = io.recv();
        if (!f) return;
        if (f->type != channel::FrameType::Data) return;
        switch (mode) {
            case ChannelMode::Plain:
                got += f->body.size();
                break;
            case ChannelMode::SymmetricOnly: {
                auto pt = psk->open(f->body);
                if (!pt) throw BenchConfigError("symmetric frame failed to open");
                got += pt->size();
                break;
            }
            case ChannelMode::AsymmetricOnly: {
                auto pt = rsa->decrypt(f->body);
                if (!pt) throw BenchConfigError("asymmetric frame failed to decrypt");
                got += pt->size();
                break;
            }
            case ChannelMode::Hybrid:
                break;  // handled by SecureChannel, not here
        }
        if (expected == 0) break;
    }
    io.send(channel::Frame{channel::FrameType::Ack, {}});
}

}  // namespace detail

// One measured transfer. Returns sender-side elapsed microseconds.
inline double bench_channel_run(ChannelMode mode, const Bytes& payload,
                                const ChannelBenchConfig& cfg, const crypto::AeadKey& psk,
                                const std::shared_ptr<crypto::RsaKeyPair>& rsa,
                                RandomSource& rng) {
    auto [a, b] = channel::memory_pipe(cfg.link);

    if (mode == ChannelMode::Hybrid) {
        auto server = std::async(std::launch::async, [&, s = std::move(b)]() mutable {
            auto ch = channel::SecureChannel::accept(std::move(s), {"bench", rsa},
                                                     system_random());
            std::size_t got = 0;
            while (got < payload.size() || payload.empty()) {
                auto msg = ch.recv();
                if (!msg) return;
                got += msg->size();
                if (payload.empty()) break;
            }
            ch.send(to_bytes("ack"));
            while (ch.recv()) {
            }
        });
        auto start = std::chrono::steady_clock::now();
        auto ch = channel::SecureChannel::connect(std::move(a), system_random());
        for (std::size_t off = 0; off < payload.size(); off += cfg.chunk_size) {
            std::size_t n = std::min(cfg.chunk_size, payload.size() - off);
            ch.send(BytesView(payload.data() + off, n));
        }
        if (payload.empty()) ch.send(Bytes{});
        auto ack = ch.recv();
        if (!ack) throw BenchConfigError("hybrid transfer lost its ack");
        double us = elapsed_us(start);
        ch.close();
        server.get();
        return us;
    }

    std::size_t chunk =
        mode == ChannelMode::AsymmetricOnly ? rsa->public_key().max_plaintext() : cfg.chunk_size;
    auto server = std::async(std::launch::async, [&, s = std::move(b)]() mutable {
        channel::FrameStream io(std::move(s));
        detail::bench_receiver(io, mode, &psk, rsa.get(), payload.size());
        io.close();
    });

    channel::FrameStream io(std::move(a));
    auto pub = rsa->public_key();
    auto start = std::chrono::steady_clock::now();
    std::size_t off = 0;
    do {
        std::size_t n = std::min(chunk, payload.size() - off);
        BytesView piece(payload.data() + off, n);
        channel::Frame f{channel::FrameType::Data, {}};
        switch (mode) {
            case ChannelMode::Plain:
                f.body.assign(piece.begin(), piece.end());
                break;
            case ChannelMode::SymmetricOnly:
                f.body = psk.seal(piece, rng);
                break;
            case ChannelMode::AsymmetricOnly:
                f.body = pub.encrypt(piece);
                break;
            case ChannelMode::Hybrid:
                break;
        }
        io.send(f);
        off += n;
    } while (off < payload.size());
    auto ack = io.recv();
    if (!ack || ack->type != channel::FrameType::Ack)
        throw BenchConfigError("transfer lost its ack");
    double us = elapsed_us(start);
    io.close();
    server.get();
    return us;
}

inline BenchReport bench_channel(const ChannelBenchConfig& cfg,
                                 const std::vector<std::size_t>& payload_sizes, int runs) {
    if (runs < 50) throw BenchConfigError("channel benchmark needs at least 50 runs");
    if (cfg.modes.empty()) throw BenchConfigError("no channel modes configured");

    auto rsa = std::make_shared<crypto::RsaKeyPair>(crypto::RsaKeyPair::generate());
    auto rng = system_random();
    crypto::AeadKey psk(random_bytes(rng, crypto::kSymKeySize));

    BenchReport report;
    for (std::size_t size : payload_sizes) {
        auto payload_rng = seeded_random(cfg.seed ^ size);
        Bytes payload = random_bytes(payload_rng, size);
        for (ChannelMode mode : cfg.modes) {
            for (int run = 0; run < runs; ++run) {
                double us = bench_channel_run(mode, payload, cfg, psk, rsa, rng);
                report.add("channel", channel_mode_name(mode), size, run, us);
            }
        }
    }
    return report;
}

}  // namespace vigil::harness
