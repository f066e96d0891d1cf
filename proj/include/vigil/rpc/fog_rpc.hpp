#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vigil/authority/verify.hpp"
#include "vigil/channel/secure_channel.hpp"
#include "vigil/index/store.hpp"
#include "vigil/rpc/codec.hpp"

namespace vigil::rpc {

// Fog query service. Responses carry the matched records in feature-line
// form, then (segment_id, canonical_bytes) pairs for every covering segment
// so the caller can authenticate against the chain.
//
// serve_hook lets the test harness tamper with outgoing segment bytes; the
// verification side must catch whatever it does.
using SegmentTamperHook = std::function<void(const std::string& segment_id, Bytes& canonical)>;

inline Response handle_fog_query(const index::IndexStore& store, const Request& req,
                                 const SegmentTamperHook& hook = {}) {
    if (req.method != "query") return error_response("unknown_method");
    if (req.args.size() != 1) return error_response("bad_request");
    index::QuerySpec spec;
    try {
        spec = decode_query_spec(req.args[0]);
    } catch (const std::exception&) {
        return error_response("bad_request");
    }
    index::QueryResult result;
    try {
        result = store.query(spec);
    } catch (const index::QueryError& e) {
        return error_response(e.kind() == index::QueryError::Kind::TooBroad ? "too_broad"
                                                                            : "bad_spec");
    }
    std::vector<Bytes> fields;
    std::string lines;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        if (i) lines += '\n';
        lines += index::canonical_line(result.records[i]);
    }
    fields.push_back(to_bytes(lines));
    for (const auto& id : result.covering_segments) {
        auto seg = store.get_segment(id);
        Bytes canonical = index::canonical_bytes(seg->records);
        if (hook) hook(id, canonical);
        fields.push_back(to_bytes(id));
        fields.push_back(std::move(canonical));
    }
    return ok_response(std::move(fields));
}

inline void serve_fog_connection(const index::IndexStore& store, channel::MessageStream& stream,
                                 const SegmentTamperHook& hook = {}) {
    while (auto msg = stream.recv()) {
        Response resp;
        try {
            resp = handle_fog_query(store, Request::decode(*msg), hook);
        } catch (const std::exception&) {
            resp = error_response("bad_request");
        }
        stream.send(resp.encode());
    }
}

struct FogQueryResult {
    std::vector<index::ContextualizedRecord> records;
    std::vector<authority::AuthenticatedSegment> segments;

    std::vector<std::string> covering_segment_ids() const {
        std::vector<std::string> out;
        out.reserve(segments.size());
        for (const auto& s : segments) out.push_back(s.segment_id);
        return out;
    }
};

class FogQueryClient {
public:
    explicit FogQueryClient(channel::MessageStream& stream) : stream_(stream) {}

    FogQueryResult query(const index::QuerySpec& spec) {
        stream_.send(Request{"query", {encode_query_spec(spec)}}.encode());
        auto msg = stream_.recv();
        if (!msg) throw RpcError("fog connection closed");
        Response resp = Response::decode(*msg);
        if (!resp.ok()) throw RpcError("query failed: " + resp.status);
        if (resp.fields.empty() || resp.fields.size() % 2 != 1)
            throw RpcError("malformed query response");
        FogQueryResult out;
        std::string lines = to_string(resp.fields[0]);
        if (!lines.empty()) {
            std::size_t start = 0, line_no = 0;
            while (start <= lines.size()) {
                std::size_t end = lines.find('\n', start);
                if (end == std::string::npos) end = lines.size();
                ++line_no;
                out.records.push_back(index::parse_canonical_line(
                    std::string_view(lines).substr(start, end - start), line_no));
                if (end == lines.size()) break;
                start = end + 1;
            }
        }
        for (std::size_t i = 1; i + 2 <= resp.fields.size(); i += 2) {
            authority::AuthenticatedSegment seg;
            seg.segment_id = to_string(resp.fields[i]);
            seg.canonical = resp.fields[i + 1];
            out.segments.push_back(std::move(seg));
        }
        return out;
    }

private:
    channel::MessageStream& stream_;
};

}  // namespace vigil::rpc
