#pragma once

#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "vigil/index/canonical.hpp"
#include "vigil/index/context.hpp"

namespace vigil::index {

class SealedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QueryError : public std::runtime_error {
public:
    enum class Kind { TooBroad, BadSpec };
    QueryError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// A sealed, time-windowed batch of contextualized records for one camera;
// the unit of hashing and on-chain anchoring.
struct IndexSegment {
    std::string segment_id;  // "<camera_id>/<window_start_ms>"
    std::string camera_id;
    std::int64_t window_start_ms = 0;
    std::int64_t window_end_ms = 0;
    std::vector<ContextualizedRecord> records;  // canonical order once sealed
    crypto::Digest digest{};
    bool sealed = false;
};

inline std::string make_segment_id(const std::string& camera_id, std::int64_t window_start_ms) {
    return camera_id + "/" + std::to_string(window_start_ms);
}

// All range fields are half-open [min, max).
struct QuerySpec {
    std::optional<std::string> camera_id;
    std::optional<std::int64_t> time_from_ms, time_to_ms;
    std::optional<std::uint64_t> pedestrian_id;
    std::optional<double> speed_min, speed_max;
    std::optional<double> direction_min, direction_max;
    std::optional<std::string> time_band;
    std::optional<bool> anomaly;

    bool empty() const {
        return !camera_id && !time_from_ms && !time_to_ms && !pedestrian_id && !speed_min &&
               !speed_max && !direction_min && !direction_max && !time_band && !anomaly;
    }

    void validate() const {
        if (time_from_ms && time_to_ms && !(*time_from_ms < *time_to_ms))
            throw QueryError(QueryError::Kind::BadSpec, "empty time range");
        if (speed_min && speed_max && !(*speed_min < *speed_max))
            throw QueryError(QueryError::Kind::BadSpec, "empty speed range");
        if (direction_min && direction_max && !(*direction_min < *direction_max))
            throw QueryError(QueryError::Kind::BadSpec, "empty direction range");
    }

    bool matches(const ContextualizedRecord& r) const {
        if (camera_id && r.record.camera_id != *camera_id) return false;
        if (time_from_ms && r.record.timestamp_ms < *time_from_ms) return false;
        if (time_to_ms && r.record.timestamp_ms >= *time_to_ms) return false;
        if (pedestrian_id && r.record.pedestrian_id != *pedestrian_id) return false;
        if (speed_min && r.record.speed < *speed_min) return false;
        if (speed_max && r.record.speed >= *speed_max) return false;
        if (direction_min && r.record.direction < *direction_min) return false;
        if (direction_max && r.record.direction >= *direction_max) return false;
        if (time_band && r.time_band != *time_band) return false;
        if (anomaly && r.anomaly != *anomaly) return false;
        return true;
    }
};

struct QueryResult {
    std::vector<ContextualizedRecord> records;     // canonical order
    std::vector<std::string> covering_segments;    // sorted, deduplicated
};

// Key-value index table kept per camera and time window. Mutations are
// serialized by a writer lock; queries share a reader lock and therefore see
// a consistent snapshot.
class IndexStore {
public:
    explicit IndexStore(ContextConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.window_ms <= 0) throw ConfigError("window_ms must be positive");
    }

    const ContextConfig& config() const { return cfg_; }

    // Appends a journal entry per accepted mutation; replayed by recover().
    void attach_journal(const std::string& path) {
        std::unique_lock lk(m_);
        journal_.open(path, std::ios::app | std::ios::binary);
        if (!journal_) throw ConfigError("cannot open journal: " + path);
        journal_path_ = path;
    }

    // Rebuilds state from an append-only journal written by a previous run.
    void replay_journal(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot read journal: " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            if (line.rfind("R ", 0) == 0) {
                insert(parse_canonical_line(std::string_view(line).substr(2), line_no));
            } else if (line.rfind("S ", 0) == 0) {
                seal_segment(line.substr(2));
            } else {
                throw feature::ParseError(line_no, "unknown journal entry");
            }
        }
    }

    ContextualizedRecord contextualize_record(const FeatureRecord& r) const {
        return contextualize(r, cfg_);
    }

    // Routes the record to the window containing its timestamp; windows tile
    // time per camera without overlap.
    std::string insert(const ContextualizedRecord& r) {
        std::unique_lock lk(m_);
        std::int64_t start = window_start(r.record.timestamp_ms);
        std::string id = make_segment_id(r.record.camera_id, start);
        auto [it, created] = segments_.try_emplace(id);
        IndexSegment& seg = it->second;
        if (created) {
            seg.segment_id = id;
            seg.camera_id = r.record.camera_id;
            seg.window_start_ms = start;
            seg.window_end_ms = start + cfg_.window_ms;
        }
        if (seg.sealed) {
            ++late_arrivals_;
            throw SealedError("segment " + id + " already sealed");
        }
        seg.records.push_back(r);
        journal_append("R " + canonical_line(r));
        return id;
    }

    // Sorts canonically, fixes the digest, and freezes the segment.
    IndexSegment seal_segment(const std::string& segment_id) {
        std::unique_lock lk(m_);
        auto it = segments_.find(segment_id);
        if (it == segments_.end()) throw NotFoundError("unknown segment " + segment_id);
        IndexSegment& seg = it->second;
        if (seg.sealed) throw SealedError("segment " + segment_id + " already sealed");
        std::sort(seg.records.begin(), seg.records.end(), canonical_order);
        seg.digest = crypto::sha256(canonical_bytes(seg.records));
        seg.sealed = true;
        journal_append("S " + segment_id);
        return seg;
    }

    std::vector<std::string> unsealed_segment_ids() const {
        std::shared_lock lk(m_);
        std::vector<std::string> out;
        for (const auto& [id, seg] : segments_)
            if (!seg.sealed) out.push_back(id);
        return out;
    }

    std::vector<std::string> sealed_segment_ids() const {
        std::shared_lock lk(m_);
        std::vector<std::string> out;
        for (const auto& [id, seg] : segments_)
            if (seg.sealed) out.push_back(id);
        return out;
    }

    std::optional<IndexSegment> get_segment(const std::string& segment_id) const {
        std::shared_lock lk(m_);
        auto it = segments_.find(segment_id);
        if (it == segments_.end()) return std::nullopt;
        return it->second;
    }

    // Conjunction of all present predicates, canonical result order, plus
    // the covering segment ids the caller needs for authentication.
    QueryResult query(const QuerySpec& spec) const {
        spec.validate();
        if (spec.empty() && !cfg_.allow_full_scan)
            throw QueryError(QueryError::Kind::TooBroad, "query has no predicates");
        std::shared_lock lk(m_);
        QueryResult out;
        for (const auto& [id, seg] : segments_) {
            // Per-camera windows make segment pruning a plain interval check.
            if (spec.camera_id && seg.camera_id != *spec.camera_id) continue;
            if (spec.time_from_ms && seg.window_end_ms <= *spec.time_from_ms) continue;
            if (spec.time_to_ms && seg.window_start_ms >= *spec.time_to_ms) continue;
            bool hit = false;
            for (const auto& r : seg.records) {
                if (spec.matches(r)) {
                    out.records.push_back(r);
                    hit = true;
                }
            }
            if (hit) out.covering_segments.push_back(id);
        }
        std::sort(out.records.begin(), out.records.end(), canonical_order);
        std::sort(out.covering_segments.begin(), out.covering_segments.end());
        return out;
    }

    std::uint64_t late_arrival_count() const {
        std::shared_lock lk(m_);
        return late_arrivals_;
    }

    std::size_t segment_count() const {
        std::shared_lock lk(m_);
        return segments_.size();
    }

    std::size_t record_count() const {
        std::shared_lock lk(m_);
        std::size_t n = 0;
        for (const auto& [id, seg] : segments_) n += seg.records.size();
        return n;
    }

private:
    std::int64_t window_start(std::int64_t timestamp_ms) const {
        std::int64_t w = cfg_.window_ms;
        std::int64_t start = timestamp_ms / w * w;
        if (timestamp_ms < 0 && timestamp_ms % w != 0) start -= w;
        return start;
    }

    void journal_append(const std::string& entry) {
        if (journal_.is_open()) {
            journal_ << entry << '\n';
            journal_.flush();
        }
    }

    ContextConfig cfg_;
    mutable std::shared_mutex m_;
    std::map<std::string, IndexSegment> segments_;
    std::uint64_t late_arrivals_ = 0;
    std::ofstream journal_;
    std::string journal_path_;
};

}  // namespace vigil::index
