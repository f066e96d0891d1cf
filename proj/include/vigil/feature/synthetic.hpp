#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "vigil/feature/record.hpp"

namespace vigil::feature {

// Scene parameters for the synthetic pedestrian source. The source stands in
// for the detector/tracker pair: new pedestrians appear only on detection
// frames (detections_per_sec), positions update every frame.
struct SceneConfig {
    std::string camera_id = "cam01";
    int frame_width = 640;
    int frame_height = 480;
    int fps = 10;
    int detections_per_sec = 2;
    int max_pedestrians = 6;
    double entry_probability = 0.6;
    double max_step_px = 12.0;
    int box_width = 50;
    int box_height = 100;
    std::int64_t start_timestamp_ms = 1'700'000'000'000;
};

// Plumbing stand-in for tracker output.
struct TrackState {
    std::uint64_t pedestrian_id = 0;
    double x = 0, y = 0;
    int w = 0, h = 0;
    double vx = 0, vy = 0;  // pixels per frame
    bool alive = false;
};

inline double direction_degrees(double vx, double vy) {
    if (vx == 0.0 && vy == 0.0) return 0.0;
    double deg = std::atan2(vy, vx) * 180.0 / std::numbers::pi;
    if (deg < 0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

// The feature-speed definition: displacement in pixels per second divided by
// the bounding-box area in square pixels.
inline double feature_speed(double step_px_per_frame, int fps, int box_w, int box_h) {
    return step_px_per_frame * fps / (static_cast<double>(box_w) * box_h);
}

using FrameBatch = std::vector<FeatureRecord>;

// Observer for per-frame track states, invoked after each position update;
// lets tests check the emitted features against the simulated motion.
using TrackObserver = std::function<void(std::int64_t frame, const TrackState&)>;

// Deterministic for a fixed (config, seed): one batch per frame, possibly
// empty.
inline std::vector<FrameBatch> generate_synthetic_frames(const SceneConfig& cfg,
                                                         std::int64_t frame_count,
                                                         std::uint64_t seed,
                                                         const TrackObserver& observer = {}) {
    if (frame_count < 0) throw ConfigError("frame_count must be non-negative");
    if (cfg.fps < 1) throw ConfigError("frame rate must be at least 1 FPS");
    if (cfg.detections_per_sec < 1 || cfg.detections_per_sec > cfg.fps)
        throw ConfigError("detections_per_sec must be in [1, fps]");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> step(0.0, cfg.max_step_px);

    std::vector<TrackState> tracks;
    std::uint64_t next_id = 1;
    int detect_every = cfg.fps / cfg.detections_per_sec;
    if (detect_every < 1) detect_every = 1;

    std::vector<FrameBatch> out;
    out.reserve(static_cast<std::size_t>(frame_count));

    for (std::int64_t frame = 0; frame < frame_count; ++frame) {
        bool detection_frame = (frame % detect_every) == 0;
        if (detection_frame) {
            std::size_t alive = 0;
            for (const auto& t : tracks)
                if (t.alive) ++alive;
            if (alive < static_cast<std::size_t>(cfg.max_pedestrians) &&
                unit(rng) < cfg.entry_probability) {
                TrackState t;
                t.pedestrian_id = next_id++;
                t.w = cfg.box_width;
                t.h = cfg.box_height;
                t.x = unit(rng) * (cfg.frame_width - t.w);
                t.y = unit(rng) * (cfg.frame_height - t.h);
                double a = angle(rng), s = step(rng);
                t.vx = s * std::cos(a);
                t.vy = s * std::sin(a);
                t.alive = true;
                tracks.push_back(t);
            }
        }

        FrameBatch batch;
        std::int64_t ts = cfg.start_timestamp_ms + frame * 1000 / cfg.fps;
        for (auto& t : tracks) {
            if (!t.alive) continue;
            t.x += t.vx;
            t.y += t.vy;
            if (t.x < 0 || t.y < 0 || t.x + t.w > cfg.frame_width ||
                t.y + t.h > cfg.frame_height) {
                t.alive = false;  // walked out of frame
                continue;
            }
            if (observer) observer(frame, t);
            double step_px = std::hypot(t.vx, t.vy);
            FeatureRecord r;
            r.timestamp_ms = ts;
            r.frame_seq = static_cast<std::uint64_t>(frame);
            r.camera_id = cfg.camera_id;
            r.pedestrian_id = t.pedestrian_id;
            r.speed = feature_speed(step_px, cfg.fps, t.w, t.h);
            r.direction = direction_degrees(t.vx, t.vy);
            batch.push_back(std::move(r));
        }
        out.push_back(std::move(batch));
    }
    return out;
}

}  // namespace vigil::feature
