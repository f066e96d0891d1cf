#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vigil/channel/secure_channel.hpp"
#include "vigil/harness/scenario.hpp"
#include "vigil/index/context.hpp"
#include "vigil/ledger/account.hpp"
#include "vigil/rpc/codec.hpp"

namespace vigil::tools {

using nlohmann::json;

inline std::atomic<bool> g_stop{false};

// No SA_RESTART: a signal must interrupt blocking accept/recv so the serve
// loops can observe g_stop.
inline void install_stop_handler() {
    struct sigaction sa{};
    sa.sa_handler = [](int) { g_stop = true; };
    sa.sa_flags = 0;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config: " + path);
    json j;
    in >> j;
    return j;
}

inline Bytes seed_from_hex(const std::string& hex) {
    Bytes seed = hex_decode(hex);
    if (seed.size() != 32) throw std::runtime_error("seed must be 32 hex-encoded bytes");
    return seed;
}

inline index::ContextConfig context_from_json(const json& j) {
    index::ContextConfig cfg;
    if (j.contains("window_ms")) cfg.window_ms = j["window_ms"].get<std::int64_t>();
    if (j.contains("utc_offset_min")) cfg.utc_offset_min = j["utc_offset_min"].get<int>();
    if (j.contains("allow_full_scan")) cfg.allow_full_scan = j["allow_full_scan"].get<bool>();
    if (j.contains("default_band")) cfg.default_band = j["default_band"].get<std::string>();
    if (j.contains("bands")) {
        cfg.bands.clear();
        for (const auto& b : j["bands"])
            cfg.bands.push_back({b["name"].get<std::string>(), b["start_hour"].get<int>(),
                                 b["end_hour"].get<int>()});
    }
    if (j.contains("zones"))
        for (auto it = j["zones"].begin(); it != j["zones"].end(); ++it)
            cfg.zones[it.key()] = it.value().get<std::string>();
    if (j.contains("speed_thresholds"))
        for (auto it = j["speed_thresholds"].begin(); it != j["speed_thresholds"].end(); ++it)
            cfg.speed_thresholds[it.key()] = it.value().get<double>();
    return cfg;
}

inline feature::SceneConfig scene_from_json(const json& j) {
    feature::SceneConfig s;
    if (j.contains("camera_id")) s.camera_id = j["camera_id"].get<std::string>();
    if (j.contains("frame_width")) s.frame_width = j["frame_width"].get<int>();
    if (j.contains("frame_height")) s.frame_height = j["frame_height"].get<int>();
    if (j.contains("fps")) s.fps = j["fps"].get<int>();
    if (j.contains("detections_per_sec")) s.detections_per_sec = j["detections_per_sec"].get<int>();
    if (j.contains("max_pedestrians")) s.max_pedestrians = j["max_pedestrians"].get<int>();
    if (j.contains("entry_probability")) s.entry_probability = j["entry_probability"].get<double>();
    if (j.contains("max_step_px")) s.max_step_px = j["max_step_px"].get<double>();
    if (j.contains("box_width")) s.box_width = j["box_width"].get<int>();
    if (j.contains("box_height")) s.box_height = j["box_height"].get<int>();
    if (j.contains("start_timestamp_ms"))
        s.start_timestamp_ms = j["start_timestamp_ms"].get<std::int64_t>();
    return s;
}

inline channel::LinkModel link_from_json(const json& j) {
    channel::LinkModel link;
    if (j.contains("latency_us"))
        link.latency = std::chrono::microseconds(j["latency_us"].get<std::int64_t>());
    if (j.contains("jitter_us"))
        link.jitter = std::chrono::microseconds(j["jitter_us"].get<std::int64_t>());
    if (j.contains("bytes_per_sec")) link.bytes_per_sec = j["bytes_per_sec"].get<std::uint64_t>();
    if (j.contains("jitter_seed")) link.jitter_seed = j["jitter_seed"].get<std::uint64_t>();
    return link;
}

inline harness::ScenarioConfig scenario_from_json(const json& j) {
    harness::ScenarioConfig cfg = harness::default_scenario();
    if (j.contains("miner_count")) cfg.miner_count = j["miner_count"].get<int>();
    if (j.contains("difficulty_bits")) cfg.difficulty_bits = j["difficulty_bits"].get<std::uint32_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("frames")) cfg.frames = j["frames"].get<int>();
    if (j.contains("window_ms")) cfg.window_ms = j["window_ms"].get<std::int64_t>();
    if (j.contains("allow_fog")) cfg.allow_fog = j["allow_fog"].get<bool>();
    if (j.contains("link")) cfg.link = link_from_json(j["link"]);
    if (j.contains("cameras")) {
        cfg.cameras.clear();
        for (const auto& c : j["cameras"]) {
            harness::CameraConfig cam;
            cam.scene = scene_from_json(c);
            if (c.contains("zone")) cam.zone = c["zone"].get<std::string>();
            cfg.cameras.push_back(std::move(cam));
        }
    }
    if (j.contains("faults")) {
        const auto& f = j["faults"];
        auto parse_list = [](const json& arr) {
            std::vector<harness::FaultSpec> out;
            for (const auto& e : arr)
                out.push_back({e["camera"].get<std::string>(), e["ordinal"].get<std::size_t>()});
            return out;
        };
        if (f.contains("drop_put_record"))
            cfg.faults.drop_put_record = parse_list(f["drop_put_record"]);
        if (f.contains("tamper_segment")) cfg.faults.tamper_segment = parse_list(f["tamper_segment"]);
        if (f.contains("tamper_channel_frame"))
            cfg.faults.tamper_channel_frame = parse_list(f["tamper_channel_frame"]);
    }
    return cfg;
}

// CLI flags shared by the query subcommands of fog-node and cloud-node.
struct QueryFlags {
    std::string camera, band;
    std::int64_t from_ms = INT64_MIN, to_ms = INT64_MIN;
    std::int64_t pedestrian = -1;
    double speed_min = -1, speed_max = -1, dir_min = -1, dir_max = -1;
    int anomaly = -1;

    void attach(CLI::App& app) {
        app.add_option("--camera", camera, "camera id");
        app.add_option("--from", from_ms, "start timestamp (ms, inclusive)");
        app.add_option("--to", to_ms, "end timestamp (ms, exclusive)");
        app.add_option("--pedestrian", pedestrian, "pedestrian id");
        app.add_option("--speed-min", speed_min, "minimum speed (inclusive)");
        app.add_option("--speed-max", speed_max, "maximum speed (exclusive)");
        app.add_option("--direction-min", dir_min, "minimum direction (inclusive)");
        app.add_option("--direction-max", dir_max, "maximum direction (exclusive)");
        app.add_option("--band", band, "time band label");
        app.add_option("--anomaly", anomaly, "anomaly flag filter (0 or 1)");
    }

    index::QuerySpec to_spec() const {
        index::QuerySpec q;
        if (!camera.empty()) q.camera_id = camera;
        if (from_ms != INT64_MIN) q.time_from_ms = from_ms;
        if (to_ms != INT64_MIN) q.time_to_ms = to_ms;
        if (pedestrian >= 0) q.pedestrian_id = static_cast<std::uint64_t>(pedestrian);
        if (speed_min >= 0) q.speed_min = speed_min;
        if (speed_max >= 0) q.speed_max = speed_max;
        if (dir_min >= 0) q.direction_min = dir_min;
        if (dir_max >= 0) q.direction_max = dir_max;
        if (!band.empty()) q.time_band = band;
        if (anomaly == 0 || anomaly == 1) q.anomaly = anomaly == 1;
        return q;
    }
};

// "1k,64k,1m" -> bytes
inline std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(',', start);
        if (end == std::string::npos) end = s.size();
        std::string item = s.substr(start, end - start);
        if (!item.empty()) {
            std::size_t mult = 1;
            char suffix = static_cast<char>(std::tolower(item.back()));
            if (suffix == 'k' || suffix == 'm' || suffix == 'g') {
                mult = suffix == 'k' ? 1024u : suffix == 'm' ? 1024u * 1024 : 1024u * 1024 * 1024;
                item.pop_back();
            }
            out.push_back(static_cast<std::size_t>(std::stoull(item)) * mult);
        }
        if (end == s.size()) break;
        start = end + 1;
    }
    return out;
}

}  // namespace vigil::tools
