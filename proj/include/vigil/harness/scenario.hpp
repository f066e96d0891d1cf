#pragma once

#include <chrono>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vigil/authority/profile.hpp"
#include "vigil/authority/verify.hpp"
#include "vigil/channel/secure_channel.hpp"
#include "vigil/feature/stream.hpp"
#include "vigil/feature/synthetic.hpp"
#include "vigil/index/store.hpp"
#include "vigil/ledger/network.hpp"
#include "vigil/rpc/chain_rpc.hpp"
#include "vigil/rpc/fog_rpc.hpp"

namespace vigil::harness {

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& role, const std::string& what)
        : std::runtime_error(role + ": " + what), role_(role) {}
    const std::string& role() const { return role_; }

private:
    std::string role_;
};

struct CameraConfig {
    feature::SceneConfig scene;
    std::string zone = "zone";
};

// Ordinals address the nth sealed segment (sorted ids) of one camera.
struct FaultSpec {
    std::string camera_id;
    std::size_t ordinal = 0;
};

struct FaultScript {
    std::vector<FaultSpec> drop_put_record;     // skip anchoring
    std::vector<FaultSpec> tamper_segment;      // fog serves a flipped byte
    std::vector<FaultSpec> tamper_channel_frame;  // flip nth data frame in flight
};

struct ScenarioConfig {
    int miner_count = 4;
    std::uint32_t difficulty_bits = 16;
    std::uint64_t seed = 1;
    int frames = 300;
    std::vector<CameraConfig> cameras;
    std::int64_t window_ms = 10'000;
    channel::LinkModel link{};
    FaultScript faults;
    bool allow_fog = true;  // fog VID present on the cloud allowlist
};

inline ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    CameraConfig cam1;
    cam1.scene.camera_id = "cam01";
    cam1.zone = "lobby";
    CameraConfig cam2;
    cam2.scene.camera_id = "cam02";
    cam2.zone = "garage";
    cfg.cameras = {cam1, cam2};
    return cfg;
}

struct ScenarioEvent {
    std::string role;
    std::string kind;
    std::string detail;
    std::int64_t wall_ms = 0;
};

struct SegmentVerdict {
    std::string segment_id;
    authority::Verdict verdict = authority::Verdict::TamperedOrUnknown;
    bool chain_digest_present = false;
};

struct ScenarioReport {
    std::vector<ScenarioEvent> events;
    std::vector<SegmentVerdict> verdicts;
    std::uint64_t records_streamed = 0;
    std::uint64_t records_indexed = 0;
    std::uint64_t segments_sealed = 0;
    std::uint64_t segments_anchored = 0;
    std::uint64_t tip_height = 0;
    std::string tip_hash_hex;
    bool all_authentic = false;
    std::chrono::milliseconds elapsed{0};

    // Deterministic content: everything except wall-clock values.
    std::string fingerprint() const {
        std::ostringstream out;
        for (const auto& e : events) out << e.role << '|' << e.kind << '|' << e.detail << '\n';
        for (const auto& v : verdicts)
            out << v.segment_id << '='
                << (v.verdict == authority::Verdict::Authentic ? "Authentic" : "TamperedOrUnknown")
                << (v.chain_digest_present ? "" : " (no token)") << '\n';
        out << "tip " << tip_height << ' ' << tip_hash_hex << '\n';
        out << "records " << records_streamed << '/' << records_indexed << " segments "
            << segments_sealed << '/' << segments_anchored << '\n';
        return out.str();
    }
};

namespace detail {

class EventRecorder {
public:
    void add(const std::string& role, const std::string& kind, const std::string& detail) {
        std::lock_guard lk(m_);
        events_.push_back({role, kind, detail,
                           std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count()});
    }

    std::vector<ScenarioEvent> take() {
        std::lock_guard lk(m_);
        return std::move(events_);
    }

private:
    std::mutex m_;
    std::vector<ScenarioEvent> events_;
};

// Flips one ciphertext byte of the nth Data frame written through it.
// FrameStream writes one whole encoded frame per write call.
class TamperingByteStream : public channel::ByteStream {
public:
    TamperingByteStream(std::unique_ptr<channel::ByteStream> inner, std::size_t target)
        : inner_(std::move(inner)), target_(target) {}

    void write(BytesView data) override {
        if (!data.empty() &&
            data[0] == static_cast<std::uint8_t>(channel::FrameType::Data) &&
            data.size() > channel::kFrameHeaderSize + 20) {
            if (data_frames_++ == target_) {
                Bytes mutated(data.begin(), data.end());
                mutated[channel::kFrameHeaderSize + 20] ^= 0x01;
                inner_->write(mutated);
                return;
            }
        }
        inner_->write(data);
    }

    std::size_t read_some(std::span<std::uint8_t> out) override { return inner_->read_some(out); }
    void close() override { inner_->close(); }

private:
    std::unique_ptr<channel::ByteStream> inner_;
    std::size_t target_;
    std::size_t data_frames_ = 0;
};

inline Bytes role_seed(std::uint64_t scenario_seed, std::string_view role) {
    Bytes material;
    put_u64be(material, scenario_seed);
    append(material, to_bytes(role));
    return crypto::digest_bytes(crypto::sha256(material));
}

struct SessionStats {
    std::string camera = "unknown";
    std::uint64_t records = 0;
    std::uint64_t batches = 0;
    bool tamper_detected = false;
    std::string error;
};

}  // namespace detail

// End-to-end composition: chain network up, registration, contract deploy,
// record permission, secure streaming, contextualized indexing, sealing,
// anchoring, and verified query, with scripted faults along the way.
inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
    using namespace std::chrono;
    auto t_start = steady_clock::now();

    if (cfg.cameras.empty()) throw ScenarioError("edge", "no cameras configured");
    if (cfg.miner_count < 1) throw ScenarioError("chain", "need at least one miner");

    detail::EventRecorder rec;
    ScenarioReport report;

    // --- chain network and identities -------------------------------------
    ledger::ChainNetwork::Config net_cfg;
    net_cfg.node_count = cfg.miner_count;
    net_cfg.difficulty_bits = cfg.difficulty_bits;
    net_cfg.seed = cfg.seed;
    ledger::ChainNetwork net(net_cfg);
    rec.add("chain", "network_up", std::to_string(cfg.miner_count) + " miners, difficulty " +
                                       std::to_string(cfg.difficulty_bits));

    auto cloud = ledger::Account::from_seed(detail::role_seed(cfg.seed, "cloud"));
    auto fog_account = ledger::Account::from_seed(detail::role_seed(cfg.seed, "fog"));
    std::uint64_t cloud_nonce = 0, fog_nonce = 0;

    // --- registration and permission ---------------------------------------
    authority::ProfileDb profiles;
    if (cfg.allow_fog) profiles.set_allowlist({fog_account.address()});
    auto entry = profiles.register_entity(fog_account.address(), "fog01",
                                          authority::EntityRole::Fog, net.now_ms());
    rec.add("cloud", "registered",
            "fog01 vid=" + ledger::address_hex(entry.vid) + " status=" +
                authority::status_name(entry.status));

    if (net.broadcast_tx(ledger::deploy_tx(cloud, cloud_nonce++)))
        throw ScenarioError("cloud", "deploy transaction rejected");
    auto decision = profiles.decide_record_permission(fog_account.address());
    rec.add("cloud", "permission",
            decision.granted ? "granted" : std::string("denied:") +
                                               authority::deny_reason_name(decision.reason));
    if (decision.granted) {
        if (net.broadcast_tx(ledger::grant_tx(cloud, fog_account.address(), cloud_nonce++)))
            throw ScenarioError("cloud", "grant transaction rejected");
    }
    if (!net.mine_on(0)) throw ScenarioError("chain", "setup block failed to mine");
    rec.add("chain", "setup_mined",
            "deploy" + std::string(decision.granted ? "+grant" : "") + " at height " +
                std::to_string(net.node(0).get_tip().first));

    // --- fog store and listeners -------------------------------------------
    index::ContextConfig ctx;
    ctx.window_ms = cfg.window_ms;
    ctx.speed_thresholds = {{"business_hours", 0.5}, {"after_hours", 0.1}};
    for (const auto& cam : cfg.cameras) ctx.zones[cam.scene.camera_id] = cam.zone;
    index::IndexStore store(ctx);

    channel::ResponderIdentity fog_identity;
    try {
        fog_identity = {"fog01",
                        std::make_shared<crypto::RsaKeyPair>(crypto::RsaKeyPair::generate())};
    } catch (const std::exception& e) {
        throw ScenarioError("fog", std::string("identity keygen failed: ") + e.what());
    }

    channel::MemoryHub hub(cfg.link);
    auto stream_listener = hub.listen("fog");
    channel::SessionTracker fog_tracker;

    // --- streaming: one fog handler and one edge per camera ----------------
    std::size_t n_sessions = cfg.cameras.size();
    std::vector<detail::SessionStats> session_stats(n_sessions);
    std::vector<std::thread> fog_handlers;
    for (std::size_t s = 0; s < n_sessions; ++s) {
        fog_handlers.emplace_back([&, s] {
            detail::SessionStats& stats = session_stats[s];
            try {
                auto ch = channel::SecureChannel::accept(stream_listener->accept(), fog_identity,
                                                         system_random(), &fog_tracker);
                while (true) {
                    std::optional<Bytes> msg;
                    try {
                        msg = ch.recv();
                    } catch (const channel::ChannelError& e) {
                        if (e.kind() == channel::ChannelError::Kind::TamperDetected) {
                            stats.tamper_detected = true;
                            ch.close();
                            break;
                        }
                        throw;
                    }
                    if (!msg) break;
                    ++stats.batches;
                    for (const auto& r : feature::parse_feature_file(to_string(*msg))) {
                        if (stats.camera == "unknown") stats.camera = r.camera_id;
                        store.insert(store.contextualize_record(r));
                        ++stats.records;
                    }
                }
            } catch (const std::exception& e) {
                stats.error = e.what();
            }
        });
    }

    std::vector<std::thread> edges;
    std::vector<feature::TransferSummary> summaries(n_sessions);
    std::vector<std::string> edge_errors(n_sessions);
    for (std::size_t i = 0; i < n_sessions; ++i) {
        edges.emplace_back([&, i] {
            const CameraConfig& cam = cfg.cameras[i];
            try {
                feature::SceneConfig scene = cam.scene;
                auto batches = feature::generate_synthetic_frames(
                    scene, cfg.frames, cfg.seed * 101 + static_cast<std::uint64_t>(i));
                std::unique_ptr<channel::ByteStream> stream = hub.dial("fog");
                for (const auto& fault : cfg.faults.tamper_channel_frame)
                    if (fault.camera_id == scene.camera_id)
                        stream = std::make_unique<detail::TamperingByteStream>(std::move(stream),
                                                                               fault.ordinal);
                auto ch = channel::SecureChannel::connect(std::move(stream), system_random());
                summaries[i] = feature::stream_records(ch, batches);
                ch.close();
            } catch (const feature::StreamError& e) {
                summaries[i].batches_sent = e.sent_batches();
                edge_errors[i] = e.what();
            } catch (const std::exception& e) {
                edge_errors[i] = e.what();
            }
        });
    }
    for (auto& t : edges) t.join();
    stream_listener->close();
    for (auto& t : fog_handlers) t.join();

    for (std::size_t i = 0; i < n_sessions; ++i) {
        const auto& cam = cfg.cameras[i].scene.camera_id;
        if (!edge_errors[i].empty())
            rec.add("edge/" + cam, "stream_error",
                    "sent=" + std::to_string(summaries[i].batches_sent));
        else
            rec.add("edge/" + cam, "streamed",
                    std::to_string(summaries[i].records_sent) + " records in " +
                        std::to_string(summaries[i].batches_sent) + " batches, " +
                        std::to_string(summaries[i].bytes_sent) + " bytes");
        report.records_streamed += summaries[i].records_sent;
    }
    // Fog session events, ordered by camera for a stable transcript.
    {
        auto ordered = session_stats;
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.camera < b.camera; });
        for (const auto& s : ordered) {
            if (!s.error.empty()) rec.add("fog/" + s.camera, "session_error", s.error);
            if (s.tamper_detected) rec.add("fog/" + s.camera, "tamper_detected", "frame rejected");
            rec.add("fog/" + s.camera, "indexed", std::to_string(s.records) + " records");
        }
    }
    report.records_indexed = store.record_count();

    // --- seal and anchor -----------------------------------------------------
    auto sealed_ids = store.unsealed_segment_ids();  // sorted by map order
    std::map<std::string, std::vector<std::string>> per_camera;
    for (const auto& id : sealed_ids) {
        auto seg = store.get_segment(id);
        per_camera[seg->camera_id].push_back(id);
    }
    auto is_scripted = [&](const std::vector<FaultSpec>& faults, const std::string& id) {
        for (const auto& f : faults) {
            const auto& ids = per_camera[f.camera_id];
            if (f.ordinal < ids.size() && ids[f.ordinal] == id) return true;
        }
        return false;
    };

    std::vector<std::string> submitted;
    for (const auto& id : sealed_ids) {
        auto seg = store.seal_segment(id);
        ++report.segments_sealed;
        rec.add("fog", "sealed", id + " digest=" + hex_encode(seg.digest).substr(0, 16));
        if (is_scripted(cfg.faults.drop_put_record, id)) {
            rec.add("fog", "anchor_dropped", id);
            continue;
        }
        auto reject = net.broadcast_tx(ledger::put_record_tx(fog_account, id, seg.digest,
                                                             fog_nonce++));
        if (reject) {
            rec.add("fog", "anchor_rejected", id + " " + ledger::tx_reject_name(*reject));
            continue;
        }
        submitted.push_back(id);
    }
    int mined = net.mine_until_mempool_empty(0);
    rec.add("chain", "anchors_mined", std::to_string(mined) + " blocks");
    // A submission only counts as anchored once its token reads back from
    // the mined chain; mining drops transactions that fail the access rules.
    for (const auto& id : submitted) {
        if (net.node(0).get_index_token(id)) {
            ++report.segments_anchored;
            rec.add("fog", "anchored", id);
        } else {
            rec.add("fog", "anchor_excluded", id);
        }
    }

    // --- verified query -------------------------------------------------------
    rpc::SegmentTamperHook tamper_hook;
    if (!cfg.faults.tamper_segment.empty()) {
        tamper_hook = [&, per_camera](const std::string& id, Bytes& canonical) {
            if (is_scripted(cfg.faults.tamper_segment, id) && !canonical.empty())
                canonical[canonical.size() / 2] ^= 0x20;
        };
    }
    auto query_listener = hub.listen("fog-query");
    auto fog_query_server = std::thread([&] {
        try {
            auto ch = channel::SecureChannel::accept(query_listener->accept(), fog_identity,
                                                     system_random(), &fog_tracker);
            rpc::serve_fog_connection(store, ch, tamper_hook);
        } catch (const std::exception&) {
            // Cloud side reports the failure.
        }
    });

    {
        auto ch = channel::SecureChannel::connect(hub.dial("fog-query"), system_random());
        rpc::FogQueryClient client(ch);
        rpc::LocalChainReader reader(net.node(net.size() - 1));
        for (const auto& cam : cfg.cameras) {
            index::QuerySpec spec;
            spec.camera_id = cam.scene.camera_id;
            spec.time_from_ms = cam.scene.start_timestamp_ms;
            spec.time_to_ms = cam.scene.start_timestamp_ms + 1 +
                              (cfg.frames + 1) * 1000LL / cam.scene.fps;
            auto result = client.query(spec);
            auto verdicts = authority::authenticate_query(result.segments, reader);
            for (const auto& v : verdicts) {
                report.verdicts.push_back({v.segment_id, v.verdict, v.chain_digest.has_value()});
                rec.add("cloud", "verdict",
                        v.segment_id + " " +
                            (v.authentic() ? "Authentic" : "TamperedOrUnknown") +
                            (v.chain_digest.has_value() ? "" : " (no token)"));
            }
        }
        ch.close();
    }
    query_listener->close();
    fog_query_server.join();

    report.all_authentic = !report.verdicts.empty();
    for (const auto& v : report.verdicts)
        if (v.verdict != authority::Verdict::Authentic) report.all_authentic = false;

    auto [height, hash] = net.node(0).get_tip();
    report.tip_height = height;
    report.tip_hash_hex = hex_encode(hash);
    report.events = rec.take();
    report.elapsed = duration_cast<milliseconds>(steady_clock::now() - t_start);
    return report;
}

}  // namespace vigil::harness
