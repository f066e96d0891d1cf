#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "vigil/channel/session.hpp"
#include "vigil/channel/transport.hpp"

namespace vigil::channel {

// Message-oriented view of a connection. The RPC and streaming layers only
// need this; whether the bytes underneath are encrypted is the caller's
// choice of implementation.
class MessageStream {
public:
    virtual ~MessageStream() = default;
    virtual void send(BytesView message) = 0;
    // nullopt once the peer has closed.
    virtual std::optional<Bytes> recv() = 0;
    virtual void close() = 0;
};

// Plaintext messages in Data frames, no handshake. The "plain loopback"
// option of the node RPC interfaces.
class PlainMessageStream : public MessageStream {
public:
    explicit PlainMessageStream(std::unique_ptr<ByteStream> stream) : io_(std::move(stream)) {}

    void send(BytesView message) override {
        io_.send(Frame{FrameType::Data, Bytes(message.begin(), message.end())});
    }

    std::optional<Bytes> recv() override {
        auto f = io_.recv();
        if (!f || f->type == FrameType::Close) return std::nullopt;
        if (f->type != FrameType::Data)
            throw ChannelError(ChannelError::Kind::BadFrame, "expected data frame");
        return std::move(f->body);
    }

    void close() override {
        io_.send(Frame{FrameType::Close, {}});
        io_.close();
    }

private:
    FrameStream io_;
};

// Drives a Session over a byte stream: runs the handshake in the
// constructor-equivalent factories, then exposes send/recv of whole
// messages inside the established session.
class SecureChannel : public MessageStream {
public:
    // Initiator side. Blocks until the handshake completes.
    static SecureChannel connect(std::unique_ptr<ByteStream> stream, RandomSource rng,
                                 SessionTracker* tracker = nullptr) {
        auto [session, hello] = Session::initiate(std::move(rng), tracker);
        FrameStream io(std::move(stream));
        io.send(hello);
        Frame cert = expect_frame(io, "CertReply");
        Frame key_transport = session.send_shared_key(cert);
        io.send(key_transport);
        Frame confirm = expect_frame(io, "KeyConfirm");
        Frame ack = session.verify_and_ack(confirm);
        io.send(ack);
        return SecureChannel(std::move(io), std::move(session));
    }

    // Responder side. Blocks until the initiator's Ack arrives.
    static SecureChannel accept(std::unique_ptr<ByteStream> stream, ResponderIdentity identity,
                                RandomSource rng, SessionTracker* tracker = nullptr) {
        Session session = Session::responder(std::move(identity), std::move(rng), tracker);
        FrameStream io(std::move(stream));
        Frame hello = expect_frame(io, "Hello");
        io.send(session.respond_with_certificate(hello));
        Frame key_transport = expect_frame(io, "KeyTransport");
        io.send(session.confirm_key(key_transport));
        Frame ack = expect_frame(io, "Ack");
        session.accept_ack(ack);
        return SecureChannel(std::move(io), std::move(session));
    }

    void send(BytesView message) override { io_.send(session_.send_data(message)); }

    std::optional<Bytes> recv() override {
        auto f = io_.recv();
        if (!f) {
            session_.close_session();
            return std::nullopt;
        }
        auto delivered = session_.deliver(*f);
        if (delivered.closed) return std::nullopt;
        if (!delivered.payload)
            throw ChannelError(ChannelError::Kind::BadFrame, "expected data frame");
        return std::move(delivered.payload);
    }

    void close() override {
        if (auto f = session_.close_session()) {
            try {
                io_.send(*f);
            } catch (const ChannelError&) {
                // Peer already gone; the local key is wiped either way.
            }
        }
        io_.close();
    }

    Session& session() { return session_; }
    const Session& session() const { return session_; }

private:
    SecureChannel(FrameStream io, Session session)
        : io_(std::move(io)), session_(std::move(session)) {}

    static Frame expect_frame(FrameStream& io, const char* what) {
        auto f = io.recv();
        if (!f)
            throw HandshakeError(HandshakeError::Kind::Transport,
                                 std::string("connection closed waiting for ") + what);
        return std::move(*f);
    }

    FrameStream io_;
    Session session_;
};

// Named in-process endpoints, so multi-node scenarios can run on memory
// pipes with the same dial/listen surface as TCP.
class MemoryHub {
public:
    explicit MemoryHub(LinkModel link = {}) : link_(link) {}

    class Listener {
    public:
        std::unique_ptr<ByteStream> accept() {
            std::unique_lock lk(m_);
            cv_.wait(lk, [&] { return !pending_.empty() || closed_; });
            if (pending_.empty()) throw std::runtime_error("listener closed");
            auto s = std::move(pending_.front());
            pending_.pop_front();
            return s;
        }

        void close() {
            std::lock_guard lk(m_);
            closed_ = true;
            cv_.notify_all();
        }

    private:
        friend class MemoryHub;
        std::mutex m_;
        std::condition_variable cv_;
        std::deque<std::unique_ptr<ByteStream>> pending_;
        bool closed_ = false;
    };

    std::shared_ptr<Listener> listen(const std::string& name) {
        std::lock_guard lk(m_);
        auto l = std::make_shared<Listener>();
        listeners_[name] = l;
        return l;
    }

    std::unique_ptr<ByteStream> dial(const std::string& name) {
        std::shared_ptr<Listener> l;
        {
            std::lock_guard lk(m_);
            auto it = listeners_.find(name);
            if (it != listeners_.end()) l = it->second;
        }
        if (!l)
            throw HandshakeError(HandshakeError::Kind::Transport, "no listener named " + name);
        LinkModel link = link_;
        link.jitter_seed = link_.jitter_seed + (++dial_count_);
        auto [client, server] = memory_pipe(link);
        {
            std::lock_guard lk(l->m_);
            if (l->closed_)
                throw HandshakeError(HandshakeError::Kind::Transport, "listener closed: " + name);
            l->pending_.push_back(std::move(server));
            l->cv_.notify_all();
        }
        return std::move(client);
    }

private:
    LinkModel link_;
    std::mutex m_;
    std::map<std::string, std::shared_ptr<Listener>> listeners_;
    std::uint64_t dial_count_ = 0;
};

struct Endpoint {
    std::string host;
    std::uint16_t port;
};

inline Endpoint parse_endpoint(const std::string& s) {
    auto pos = s.rfind(':');
    if (pos == std::string::npos) throw std::invalid_argument("endpoint must be host:port");
    int port = std::stoi(s.substr(pos + 1));
    if (port <= 0 || port > 65535) throw std::invalid_argument("bad port in endpoint");
    return {s.substr(0, pos), static_cast<std::uint16_t>(port)};
}

inline std::unique_ptr<ByteStream> dial_tcp(const std::string& endpoint) {
    Endpoint e = parse_endpoint(endpoint);
    return TcpStream::connect(e.host, e.port);
}

}  // namespace vigil::channel
