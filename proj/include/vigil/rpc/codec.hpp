#pragma once

#include <bit>
#include <optional>
#include <string>
#include <vector>

#include "vigil/bytes.hpp"
#include "vigil/index/store.hpp"

namespace vigil::rpc {

// Requests and responses are length-prefixed field sequences; the first
// field is the method (request) or status (response).
struct Request {
    std::string method;
    std::vector<Bytes> args;

    Bytes encode() const {
        FieldWriter w;
        w.add(method);
        for (const auto& a : args) w.add(a);
        return w.take();
    }

    static Request decode(BytesView bytes) {
        FieldReader r(bytes);
        Request out;
        out.method = r.next_string();
        out.args = r.rest();
        return out;
    }
};

struct Response {
    std::string status;  // "ok", "absent", or an error label
    std::vector<Bytes> fields;

    bool ok() const { return status == "ok"; }

    Bytes encode() const {
        FieldWriter w;
        w.add(status);
        for (const auto& f : fields) w.add(f);
        return w.take();
    }

    static Response decode(BytesView bytes) {
        FieldReader r(bytes);
        Response out;
        out.status = r.next_string();
        out.fields = r.rest();
        return out;
    }
};

inline Response ok_response(std::vector<Bytes> fields = {}) {
    return Response{"ok", std::move(fields)};
}

inline Response error_response(const std::string& label) { return Response{label, {}}; }

// QuerySpec wire form: ten positional fields, empty meaning absent.
inline Bytes encode_f64(double v) {
    Bytes out;
    put_u64be(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

inline double decode_f64(BytesView b) {
    return std::bit_cast<double>(get_u64be(b, 0));
}

inline Bytes encode_query_spec(const index::QuerySpec& q) {
    FieldWriter w;
    auto opt = [&](const std::optional<Bytes>& f) { w.add(f ? BytesView(*f) : BytesView{}); };
    opt(q.camera_id ? std::optional<Bytes>(to_bytes(*q.camera_id)) : std::nullopt);
    auto opt_i64 = [&](const std::optional<std::int64_t>& v) {
        if (!v) return w.add(BytesView{}), void();
        Bytes b;
        put_i64be(b, *v);
        w.add(b);
    };
    opt_i64(q.time_from_ms);
    opt_i64(q.time_to_ms);
    if (q.pedestrian_id) {
        Bytes b;
        put_u64be(b, *q.pedestrian_id);
        w.add(b);
    } else {
        w.add(BytesView{});
    }
    auto opt_f64 = [&](const std::optional<double>& v) {
        w.add(v ? BytesView(encode_f64(*v)) : BytesView{});
    };
    opt_f64(q.speed_min);
    opt_f64(q.speed_max);
    opt_f64(q.direction_min);
    opt_f64(q.direction_max);
    opt(q.time_band ? std::optional<Bytes>(to_bytes(*q.time_band)) : std::nullopt);
    if (q.anomaly) {
        Bytes b{static_cast<std::uint8_t>(*q.anomaly ? 1 : 0)};
        w.add(b);
    } else {
        w.add(BytesView{});
    }
    return w.take();
}

inline index::QuerySpec decode_query_spec(BytesView bytes) {
    FieldReader r(bytes);
    index::QuerySpec q;
    Bytes f = r.next();
    if (!f.empty()) q.camera_id = to_string(f);
    f = r.next();
    if (!f.empty()) q.time_from_ms = get_i64be(f, 0);
    f = r.next();
    if (!f.empty()) q.time_to_ms = get_i64be(f, 0);
    f = r.next();
    if (!f.empty()) q.pedestrian_id = get_u64be(f, 0);
    f = r.next();
    if (!f.empty()) q.speed_min = decode_f64(f);
    f = r.next();
    if (!f.empty()) q.speed_max = decode_f64(f);
    f = r.next();
    if (!f.empty()) q.direction_min = decode_f64(f);
    f = r.next();
    if (!f.empty()) q.direction_max = decode_f64(f);
    f = r.next();
    if (!f.empty()) q.time_band = to_string(f);
    f = r.next();
    if (!f.empty()) q.anomaly = f[0] != 0;
    return q;
}

}  // namespace vigil::rpc
