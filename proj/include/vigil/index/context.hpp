#pragma once

#include <map>
#include <string>
#include <vector>

#include "vigil/feature/record.hpp"

namespace vigil::index {

using feature::ConfigError;
using feature::FeatureRecord;

struct TimeBand {
    std::string name;
    int start_hour = 0;  // inclusive
    int end_hour = 0;    // exclusive
};

// Deterministic labeling rules. Hours are taken from the timestamp shifted
// by utc_offset_min, so "local time" is explicit configuration.
struct ContextConfig {
    std::vector<TimeBand> bands{{"business_hours", 8, 18}};
    std::string default_band = "after_hours";
    int utc_offset_min = 0;
    std::map<std::string, std::string> zones;             // camera_id -> zone
    std::map<std::string, double> speed_thresholds;       // band -> anomaly threshold
    std::int64_t window_ms = 10'000;
    bool allow_full_scan = false;
};

struct ContextualizedRecord {
    FeatureRecord record;
    std::string time_band;
    std::string zone;
    bool anomaly = false;

    bool operator==(const ContextualizedRecord&) const = default;
};

inline int hour_of_day(std::int64_t timestamp_ms, int utc_offset_min) {
    std::int64_t minutes = timestamp_ms / 60'000 + utc_offset_min;
    std::int64_t mod = ((minutes % 1440) + 1440) % 1440;
    return static_cast<int>(mod / 60);
}

inline const std::string& band_for(const ContextConfig& cfg, std::int64_t timestamp_ms) {
    int hour = hour_of_day(timestamp_ms, cfg.utc_offset_min);
    for (const auto& band : cfg.bands)
        if (hour >= band.start_hour && hour < band.end_hour) return band.name;
    return cfg.default_band;
}

inline double threshold_for(const ContextConfig& cfg, const std::string& band) {
    auto it = cfg.speed_thresholds.find(band);
    if (it == cfg.speed_thresholds.end())
        throw ConfigError("no speed threshold configured for band '" + band + "'");
    return it->second;
}

// Spatio-temporal enrichment: time band from the timestamp, zone from the
// camera map, anomaly flag from the per-band speed threshold.
inline ContextualizedRecord contextualize(const FeatureRecord& record, const ContextConfig& cfg) {
    feature::validate_record(record);
    auto zone = cfg.zones.find(record.camera_id);
    if (zone == cfg.zones.end())
        throw ConfigError("camera '" + record.camera_id + "' missing from zone map");
    ContextualizedRecord out;
    out.record = record;
    out.time_band = band_for(cfg, record.timestamp_ms);
    out.zone = zone->second;
    out.anomaly = record.speed > threshold_for(cfg, out.time_band);
    return out;
}

}  // namespace vigil::index
