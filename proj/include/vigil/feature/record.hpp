#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vigil::feature {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One detected object in one frame. Speed is pixels-per-second of movement
// divided by the bounding-box area, so its unit is 1/(pixel*s); direction is
// degrees from the image +x axis in [0, 360).
struct FeatureRecord {
    std::int64_t timestamp_ms = 0;
    std::uint64_t frame_seq = 0;
    std::string camera_id;
    std::uint64_t pedestrian_id = 0;
    double speed = 0.0;
    double direction = 0.0;

    bool operator==(const FeatureRecord&) const = default;
};

// Canonical ordering within a stream and within a segment.
inline bool record_order(const FeatureRecord& a, const FeatureRecord& b) {
    if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
    if (a.frame_seq != b.frame_seq) return a.frame_seq < b.frame_seq;
    return a.pedestrian_id < b.pedestrian_id;
}

// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("double format failed");
    return std::string(buf, end);
}

inline void validate_record(const FeatureRecord& r, std::size_t line = 0) {
    auto reject = [&](const std::string& what) -> void {
        if (line) throw ParseError(line, what);
        throw std::invalid_argument(what);
    };
    if (r.camera_id.empty()) reject("empty camera id");
    if (r.camera_id.find(',') != std::string::npos || r.camera_id.find('\n') != std::string::npos)
        reject("camera id contains a delimiter");
    if (!(r.speed >= 0.0)) reject("speed must be non-negative");
    if (!(r.direction >= 0.0 && r.direction < 360.0)) reject("direction out of [0, 360)");
}

// Feature-file row: timestamp,frame_seq,camera_id,pedestrian_id,speed,direction
inline std::string serialize_record(const FeatureRecord& r) {
    validate_record(r);
    std::string out;
    out += std::to_string(r.timestamp_ms);
    out += ',';
    out += std::to_string(r.frame_seq);
    out += ',';
    out += r.camera_id;
    out += ',';
    out += std::to_string(r.pedestrian_id);
    out += ',';
    out += format_double(r.speed);
    out += ',';
    out += format_double(r.direction);
    return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(line, std::string("bad ") + what + ": '" + std::string(s) + "'");
    return value;
}

}  // namespace detail

// Parses one feature-file row. A seventh field, when present, is a reserved
// tag and is ignored.
inline FeatureRecord parse_record_line(std::string_view line, std::size_t line_no) {
    auto fields = detail::split(line, ',');
    if (fields.size() != 6 && fields.size() != 7)
        throw ParseError(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
    FeatureRecord r;
    r.timestamp_ms = detail::parse_number<std::int64_t>(fields[0], line_no, "timestamp");
    r.frame_seq = detail::parse_number<std::uint64_t>(fields[1], line_no, "frame_seq");
    r.camera_id = std::string(fields[2]);
    r.pedestrian_id = detail::parse_number<std::uint64_t>(fields[3], line_no, "pedestrian_id");
    r.speed = detail::parse_number<double>(fields[4], line_no, "speed");
    r.direction = detail::parse_number<double>(fields[5], line_no, "direction");
    validate_record(r, line_no);
    return r;
}

// Parses a whole feature file. Blank lines are ignored; errors carry the
// 1-based line number.
inline std::vector<FeatureRecord> parse_feature_file(std::string_view text) {
    std::vector<FeatureRecord> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(parse_record_line(line, line_no));
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

inline std::string serialize_records(const std::vector<FeatureRecord>& records) {
    std::string out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i) out += '\n';
        out += serialize_record(records[i]);
    }
    return out;
}

}  // namespace vigil::feature
