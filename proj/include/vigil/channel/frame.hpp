#pragma once

#include <cstdint>
#include <optional>

#include "vigil/bytes.hpp"
#include "vigil/channel/errors.hpp"

namespace vigil::channel {

enum class FrameType : std::uint8_t {
    Hello = 1,
    CertReply = 2,
    KeyTransport = 3,
    KeyConfirm = 4,
    Ack = 5,
    Data = 6,
    Close = 7,
};

inline const char* frame_type_name(FrameType t) {
    switch (t) {
        case FrameType::Hello: return "Hello";
        case FrameType::CertReply: return "CertReply";
        case FrameType::KeyTransport: return "KeyTransport";
        case FrameType::KeyConfirm: return "KeyConfirm";
        case FrameType::Ack: return "Ack";
        case FrameType::Data: return "Data";
        case FrameType::Close: return "Close";
    }
    return "Unknown";
}

// On the wire: 1-byte type, 4-byte big-endian body length, body.
struct Frame {
    FrameType type;
    Bytes body;

    Bytes encode() const {
        Bytes out;
        out.reserve(5 + body.size());
        out.push_back(static_cast<std::uint8_t>(type));
        put_u32be(out, static_cast<std::uint32_t>(body.size()));
        append(out, body);
        return out;
    }
};

inline constexpr std::size_t kFrameHeaderSize = 5;
// Large enough for a 1 MiB payload plus transport overhead.
inline constexpr std::size_t kMaxFrameBody = 4u << 20;

inline bool valid_frame_type(std::uint8_t t) {
    return t >= static_cast<std::uint8_t>(FrameType::Hello) &&
           t <= static_cast<std::uint8_t>(FrameType::Close);
}

// Decodes one frame from `data`, which must contain the complete frame.
// Rejects unknown types, oversized bodies, and length mismatches.
inline Frame decode_frame(BytesView data) {
    if (data.size() < kFrameHeaderSize)
        throw ChannelError(ChannelError::Kind::BadFrame, "frame shorter than header");
    if (!valid_frame_type(data[0]))
        throw ChannelError(ChannelError::Kind::BadFrame, "unknown frame type");
    std::uint32_t len = get_u32be(data, 1);
    if (len > kMaxFrameBody)
        throw ChannelError(ChannelError::Kind::BadFrame, "frame body too large");
    if (data.size() != kFrameHeaderSize + len)
        throw ChannelError(ChannelError::Kind::BadFrame, "frame length mismatch");
    Frame f;
    f.type = static_cast<FrameType>(data[0]);
    f.body.assign(data.begin() + kFrameHeaderSize, data.end());
    return f;
}

}  // namespace vigil::channel
