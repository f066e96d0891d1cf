#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "vigil/bytes.hpp"
#include "vigil/channel/errors.hpp"
#include "vigil/channel/frame.hpp"

namespace vigil::channel {

class ByteStream {
public:
    virtual ~ByteStream() = default;
    virtual void write(BytesView data) = 0;
    // Returns the number of bytes read; 0 means the peer closed.
    virtual std::size_t read_some(std::span<std::uint8_t> out) = 0;
    virtual void close() = 0;
};

inline bool read_exact(ByteStream& s, std::span<std::uint8_t> out) {
    std::size_t got = 0;
    while (got < out.size()) {
        std::size_t n = s.read_some(out.subspan(got));
        if (n == 0) return false;
        got += n;
    }
    return true;
}

// One-way link shaping: fixed propagation delay plus seeded jitter, and a
// serialization rate (0 = unlimited). Matches a single pipelined flow:
// back-to-back writes queue behind each other at the link rate.
struct LinkModel {
    std::chrono::microseconds latency{0};
    std::chrono::microseconds jitter{0};
    std::uint64_t bytes_per_sec = 0;
    std::uint64_t jitter_seed = 0;
};

namespace detail {

class PipeBuffer {
public:
    explicit PipeBuffer(const LinkModel& link) : link_(link), jitter_rng_(link.jitter_seed) {}

    void push(BytesView data) {
        using namespace std::chrono;
        std::unique_lock lk(m_);
        if (closed_) throw ChannelError(ChannelError::Kind::BadFrame, "pipe closed");
        auto now = steady_clock::now();
        auto delay = link_.latency;
        if (link_.jitter.count() > 0) {
            std::uniform_int_distribution<std::int64_t> d(0, link_.jitter.count());
            delay += microseconds(d(jitter_rng_));
        }
        auto start = std::max(now + delay, busy_until_);
        auto wire = link_.bytes_per_sec == 0
                        ? microseconds(0)
                        : microseconds(data.size() * 1'000'000 / link_.bytes_per_sec);
        busy_until_ = start + wire;
        segments_.emplace_back(Bytes(data.begin(), data.end()), busy_until_);
        cv_.notify_all();
    }

    std::size_t pop_some(std::span<std::uint8_t> out) {
        std::unique_lock lk(m_);
        for (;;) {
            if (!segments_.empty()) {
                auto deliver_at = segments_.front().second;
                auto now = std::chrono::steady_clock::now();
                if (now < deliver_at) {
                    cv_.wait_until(lk, deliver_at);
                    continue;
                }
                Bytes& seg = segments_.front().first;
                std::size_t n = std::min(out.size(), seg.size() - offset_);
                std::memcpy(out.data(), seg.data() + offset_, n);
                offset_ += n;
                if (offset_ == seg.size()) {
                    segments_.pop_front();
                    offset_ = 0;
                }
                return n;
            }
            if (closed_) return 0;
            cv_.wait(lk);
        }
    }

    void close() {
        std::lock_guard lk(m_);
        closed_ = true;
        cv_.notify_all();
    }

private:
    LinkModel link_;
    std::mt19937_64 jitter_rng_;
    std::mutex m_;
    std::condition_variable cv_;
    std::deque<std::pair<Bytes, std::chrono::steady_clock::time_point>> segments_;
    std::size_t offset_ = 0;
    std::chrono::steady_clock::time_point busy_until_{};
    bool closed_ = false;
};

}  // namespace detail

class MemoryStream : public ByteStream {
public:
    MemoryStream(std::shared_ptr<detail::PipeBuffer> out, std::shared_ptr<detail::PipeBuffer> in)
        : out_(std::move(out)), in_(std::move(in)) {}

    ~MemoryStream() override { close(); }

    void write(BytesView data) override { out_->push(data); }
    std::size_t read_some(std::span<std::uint8_t> out) override { return in_->pop_some(out); }
    void close() override {
        out_->close();
        in_->close();
    }

private:
    std::shared_ptr<detail::PipeBuffer> out_;
    std::shared_ptr<detail::PipeBuffer> in_;
};

// In-process duplex pipe; both directions share the link model.
inline std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> memory_pipe(
    const LinkModel& link = {}) {
    LinkModel back = link;
    back.jitter_seed = link.jitter_seed ^ 0x9e3779b97f4a7c15ull;
    auto a_to_b = std::make_shared<detail::PipeBuffer>(link);
    auto b_to_a = std::make_shared<detail::PipeBuffer>(back);
    return {std::make_unique<MemoryStream>(a_to_b, b_to_a),
            std::make_unique<MemoryStream>(b_to_a, a_to_b)};
}

class TcpStream : public ByteStream {
public:
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    ~TcpStream() override { close(); }

    static std::unique_ptr<TcpStream> connect(const std::string& host, std::uint16_t port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw HandshakeError(HandshakeError::Kind::Transport, "socket failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            throw HandshakeError(HandshakeError::Kind::Transport, "bad address: " + host);
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            ::close(fd);
            throw HandshakeError(HandshakeError::Kind::Transport,
                                 "connect refused: " + host + ":" + std::to_string(port));
        }
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return std::make_unique<TcpStream>(fd);
    }

    void write(BytesView data) override {
        std::size_t sent = 0;
        while (sent < data.size()) {
            ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) throw ChannelError(ChannelError::Kind::BadFrame, "tcp send failed");
            sent += static_cast<std::size_t>(n);
        }
    }

    std::size_t read_some(std::span<std::uint8_t> out) override {
        ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
        if (n < 0) return 0;
        return static_cast<std::size_t>(n);
    }

    void close() override {
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
};

class TcpListener {
public:
    TcpListener(const std::string& host, std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw std::runtime_error("socket failed");
        int one = 1;
        setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
            throw std::runtime_error("bad listen address: " + host);
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(fd_, 16) != 0) {
            ::close(fd_);
            throw std::runtime_error("bind/listen failed on " + host + ":" + std::to_string(port));
        }
    }

    ~TcpListener() { close(); }

    std::uint16_t port() const {
        sockaddr_in addr{};
        socklen_t len = sizeof(addr);
        getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        return ntohs(addr.sin_port);
    }

    std::unique_ptr<TcpStream> accept() {
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd < 0) throw std::runtime_error("accept failed");
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return std::make_unique<TcpStream>(fd);
    }

    // nullptr on timeout; lets serve loops check a stop flag periodically.
    std::unique_ptr<TcpStream> accept_with_timeout(int timeout_ms) {
        pollfd pfd{fd_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, timeout_ms);
        if (rc == 0) return nullptr;
        if (rc < 0) {
            if (errno == EINTR) return nullptr;
            throw std::runtime_error("poll failed");
        }
        return accept();
    }

    void close() {
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
};

// Framed I/O over any byte stream.
class FrameStream {
public:
    explicit FrameStream(std::unique_ptr<ByteStream> stream) : stream_(std::move(stream)) {}

    void send(const Frame& f) { stream_->write(f.encode()); }

    // Returns nullopt on orderly close.
    std::optional<Frame> recv() {
        std::array<std::uint8_t, kFrameHeaderSize> header{};
        if (!read_exact(*stream_, header)) return std::nullopt;
        if (!valid_frame_type(header[0]))
            throw ChannelError(ChannelError::Kind::BadFrame, "unknown frame type");
        std::uint32_t len = get_u32be(header, 1);
        if (len > kMaxFrameBody)
            throw ChannelError(ChannelError::Kind::BadFrame, "frame body too large");
        Frame f;
        f.type = static_cast<FrameType>(header[0]);
        f.body.resize(len);
        if (!read_exact(*stream_, f.body))
            throw ChannelError(ChannelError::Kind::BadFrame, "truncated frame body");
        return f;
    }

    void close() { stream_->close(); }
    ByteStream& stream() { return *stream_; }

private:
    std::unique_ptr<ByteStream> stream_;
};

}  // namespace vigil::channel
