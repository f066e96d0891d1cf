#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "vigil/bytes.hpp"
#include "vigil/crypto/digest.hpp"
#include "vigil/feature/record.hpp"
#include "vigil/index/context.hpp"

namespace vigil::index {

// Canonical line: the feature-file row plus the context fields. The exact
// byte layout is documented in CANONICAL.md; digests are computed over it,
// so it must never change shape silently.
inline std::string canonical_line(const ContextualizedRecord& r) {
    std::string out = feature::serialize_record(r.record);
    out += ',';
    out += r.time_band;
    out += ',';
    out += r.zone;
    out += ',';
    out += r.anomaly ? '1' : '0';
    return out;
}

inline ContextualizedRecord parse_canonical_line(std::string_view line, std::size_t line_no = 0) {
    // The trailing three fields are context; the front is a feature row.
    auto fields = feature::detail::split(line, ',');
    if (fields.size() != 9)
        throw feature::ParseError(line_no, "expected 9 canonical fields");
    std::string_view record_part = line.substr(0, fields[5].data() + fields[5].size() - line.data());
    ContextualizedRecord r;
    r.record = feature::parse_record_line(record_part, line_no);
    r.time_band = std::string(fields[6]);
    r.zone = std::string(fields[7]);
    if (fields[8] != "0" && fields[8] != "1")
        throw feature::ParseError(line_no, "anomaly flag must be 0 or 1");
    r.anomaly = fields[8] == "1";
    return r;
}

inline bool canonical_order(const ContextualizedRecord& a, const ContextualizedRecord& b) {
    return feature::record_order(a.record, b.record);
}

// Canonical serialization of a record multiset: sorted lines joined by a
// single newline, no trailing newline. Empty input gives empty bytes.
inline Bytes canonical_bytes(std::vector<ContextualizedRecord> records) {
    std::sort(records.begin(), records.end(), canonical_order);
    std::string out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i) out += '\n';
        out += canonical_line(records[i]);
    }
    return to_bytes(out);
}

inline std::vector<ContextualizedRecord> parse_canonical_bytes(BytesView bytes) {
    std::vector<ContextualizedRecord> out;
    std::string text = to_string(bytes);
    std::size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        if (end > start) out.push_back(parse_canonical_line(
            std::string_view(text).substr(start, end - start), line_no));
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

inline crypto::Digest segment_digest(const std::vector<ContextualizedRecord>& records) {
    return crypto::sha256(canonical_bytes(records));
}

}  // namespace vigil::index
