#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vigil {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline std::string hex_encode(BytesView b) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (std::uint8_t byte : b) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0x0f]);
    }
    return out;
}

inline Bytes hex_decode(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

inline void put_u32be(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u64be(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void put_i64be(Bytes& out, std::int64_t v) {
    put_u64be(out, static_cast<std::uint64_t>(v));
}

inline std::uint32_t get_u32be(BytesView b, std::size_t off) {
    if (off + 4 > b.size()) throw std::out_of_range("u32 read past end");
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
           (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

inline std::uint64_t get_u64be(BytesView b, std::size_t off) {
    if (off + 8 > b.size()) throw std::out_of_range("u64 read past end");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | b[off + i];
    return v;
}

inline std::int64_t get_i64be(BytesView b, std::size_t off) {
    return static_cast<std::int64_t>(get_u64be(b, off));
}

inline void append(Bytes& out, BytesView b) {
    out.insert(out.end(), b.begin(), b.end());
}

inline bool bytes_equal(BytesView a, BytesView b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size()) == 0;
}

// Length-prefixed field sequences: each field is a u32be byte count followed
// by the raw bytes. All structured wire payloads use this encoding.
class FieldWriter {
public:
    FieldWriter& add(BytesView field) {
        put_u32be(buf_, static_cast<std::uint32_t>(field.size()));
        append(buf_, field);
        return *this;
    }
    FieldWriter& add(std::string_view field) {
        return add(BytesView(reinterpret_cast<const std::uint8_t*>(field.data()), field.size()));
    }
    FieldWriter& add_u64(std::uint64_t v) {
        Bytes tmp;
        put_u64be(tmp, v);
        return add(tmp);
    }
    Bytes take() { return std::move(buf_); }
    const Bytes& bytes() const { return buf_; }

private:
    Bytes buf_;
};

class FieldReader {
public:
    explicit FieldReader(BytesView data) : data_(data) {}

    bool done() const { return pos_ == data_.size(); }

    Bytes next() {
        std::uint32_t len = get_u32be(data_, pos_);
        pos_ += 4;
        if (pos_ + len > data_.size()) throw std::out_of_range("field read past end");
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + len);
        pos_ += len;
        return out;
    }

    Bytes next_exact(std::size_t expected) {
        Bytes f = next();
        if (f.size() != expected) throw std::out_of_range("field has unexpected size");
        return f;
    }

    std::string next_string() { return vigil::to_string(next()); }

    std::uint64_t next_u64() {
        Bytes f = next_exact(8);
        return get_u64be(f, 0);
    }

    std::vector<Bytes> rest() {
        std::vector<Bytes> out;
        while (!done()) out.push_back(next());
        return out;
    }

private:
    BytesView data_;
    std::size_t pos_ = 0;
};

}  // namespace vigil
