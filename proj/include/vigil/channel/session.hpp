#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include <openssl/crypto.h>

#include "vigil/bytes.hpp"
#include "vigil/channel/errors.hpp"
#include "vigil/channel/frame.hpp"
#include "vigil/crypto/aead.hpp"
#include "vigil/crypto/digest.hpp"
#include "vigil/crypto/rsa.hpp"
#include "vigil/rand.hpp"

namespace vigil::channel {

inline constexpr std::size_t kSessionIdSize = 16;
inline constexpr std::size_t kNonceSize = 16;
inline constexpr std::size_t kSharedKeySize = crypto::kSymKeySize;

using SessionId = std::array<std::uint8_t, kSessionIdSize>;

enum class Phase : std::uint8_t {
    Idle,
    HelloSent,
    CertReceived,
    KeySent,
    Confirmed,
    Established,
    Closed,
};

enum class Role : std::uint8_t { Initiator, Responder };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Idle: return "Idle";
        case Phase::HelloSent: return "HelloSent";
        case Phase::CertReceived: return "CertReceived";
        case Phase::KeySent: return "KeySent";
        case Phase::Confirmed: return "Confirmed";
        case Phase::Established: return "Established";
        case Phase::Closed: return "Closed";
    }
    return "?";
}

// The responder's long-lived key-transport identity.
struct ResponderIdentity {
    std::string name;
    std::shared_ptr<crypto::RsaKeyPair> keys;
};

// Tracks session ids in flight on one node. Initiators use it to refuse a
// duplicate id; responders use it to refuse replayed Hellos.
class SessionTracker {
public:
    bool try_add(const SessionId& id) {
        std::lock_guard lk(m_);
        return seen_.insert(id).second;
    }

private:
    std::mutex m_;
    std::set<SessionId> seen_;
};

// One end of the six-step handshake plus the symmetric transport phase.
// Pure state machine: callers move frames between two Sessions (or across a
// byte stream; see secure_channel.hpp).
class Session {
public:
    struct Delivered {
        std::optional<Frame> reply;
        std::optional<Bytes> payload;
        bool closed = false;
    };

    // Step 1: the initiator opens with a fresh session id and nonce.
    static std::pair<Session, Frame> initiate(RandomSource rng, SessionTracker* tracker = nullptr) {
        Session s(Role::Initiator, std::move(rng));
        s.rng_(s.session_id_);
        s.rng_(s.nonce_);
        if (tracker && !tracker->try_add(s.session_id_))
            throw HandshakeError(HandshakeError::Kind::Busy, "session id already in flight");
        s.phase_ = Phase::HelloSent;
        Frame hello{FrameType::Hello,
                    FieldWriter{}.add(BytesView(s.session_id_)).add(BytesView(s.nonce_)).take()};
        return {std::move(s), std::move(hello)};
    }

    static Session responder(ResponderIdentity identity, RandomSource rng,
                             SessionTracker* tracker = nullptr) {
        Session s(Role::Responder, std::move(rng));
        s.identity_ = std::move(identity);
        s.tracker_ = tracker;
        return s;
    }

    // Step 2: the responder answers a Hello with its public key certificate
    // (bare serialized key plus node name; there is no CA in this protocol).
    Frame respond_with_certificate(const Frame& hello) {
        require(Role::Responder, Phase::Idle, FrameType::Hello, hello);
        try {
            FieldReader r(hello.body);
            Bytes sid = r.next_exact(kSessionIdSize);
            Bytes nonce = r.next_exact(kNonceSize);
            if (!r.done()) throw std::out_of_range("trailing bytes");
            std::copy(sid.begin(), sid.end(), session_id_.begin());
            std::copy(nonce.begin(), nonce.end(), nonce_.begin());
        } catch (const std::out_of_range&) {
            fail("malformed Hello");
        }
        if (tracker_ && !tracker_->try_add(session_id_)) fail("replayed Hello session id");
        phase_ = Phase::HelloSent;
        Frame reply{FrameType::CertReply, FieldWriter{}
                                              .add(BytesView(session_id_))
                                              .add(identity_->name)
                                              .add(identity_->keys->public_der())
                                              .take()};
        phase_ = Phase::CertReceived;
        return reply;
    }

    // Step 3: the initiator wraps a fresh shared key (and the nonce) under
    // the responder's public key.
    Frame send_shared_key(const Frame& cert_reply) {
        require(Role::Initiator, Phase::HelloSent, FrameType::CertReply, cert_reply);
        Bytes der;
        try {
            FieldReader r(cert_reply.body);
            Bytes sid = r.next_exact(kSessionIdSize);
            if (!bytes_equal(sid, BytesView(session_id_))) fail("certificate for wrong session");
            peer_name_ = r.next_string();
            der = r.next();
            if (!r.done()) throw std::out_of_range("trailing bytes");
        } catch (const std::out_of_range&) {
            wipe();
            phase_ = Phase::Closed;
            throw HandshakeError(HandshakeError::Kind::BadCertificate, "malformed CertReply");
        }
        std::optional<crypto::RsaPublicKey> peer;
        try {
            peer.emplace(crypto::RsaPublicKey::from_der(der));
        } catch (const std::invalid_argument&) {
            wipe();
            phase_ = Phase::Closed;
            throw HandshakeError(HandshakeError::Kind::BadCertificate, "certificate key unparseable");
        }
        phase_ = Phase::CertReceived;
        Bytes key(kSharedKeySize);
        rng_(key);
        Bytes box;
        append(box, key);
        append(box, BytesView(nonce_));
        Bytes ct = peer->encrypt(box);
        OPENSSL_cleanse(box.data(), box.size());
        set_shared_key(std::move(key));
        phase_ = Phase::KeySent;
        return Frame{FrameType::KeyTransport,
                     FieldWriter{}.add(BytesView(session_id_)).add(ct).take()};
    }

    // Step 4: the responder unwraps the key and proves possession by hashing
    // key and nonce together.
    Frame confirm_key(const Frame& transport) {
        require(Role::Responder, Phase::CertReceived, FrameType::KeyTransport, transport);
        Bytes ct;
        try {
            FieldReader r(transport.body);
            Bytes sid = r.next_exact(kSessionIdSize);
            if (!bytes_equal(sid, BytesView(session_id_))) fail("key transport for wrong session");
            ct = r.next();
            if (!r.done()) throw std::out_of_range("trailing bytes");
        } catch (const std::out_of_range&) {
            fail("malformed KeyTransport");
        }
        auto box = identity_->keys->decrypt(ct);
        if (!box) fail("key transport undecryptable");
        if (box->size() != kSharedKeySize + kNonceSize) fail("key transport payload size");
        Bytes key(box->begin(), box->begin() + kSharedKeySize);
        BytesView nonce(box->data() + kSharedKeySize, kNonceSize);
        if (!bytes_equal(nonce, BytesView(nonce_))) fail("nonce mismatch in key transport");
        phase_ = Phase::KeySent;
        crypto::Digest d = confirm_digest(key, nonce_);
        set_shared_key(std::move(key));
        OPENSSL_cleanse(box->data(), box->size());
        phase_ = Phase::Confirmed;
        return Frame{FrameType::KeyConfirm, FieldWriter{}
                                                .add(BytesView(session_id_))
                                                .add(crypto::digest_bytes(d))
                                                .take()};
    }

    // Step 5: the initiator checks the key digest and acknowledges;
    // the session is established on both ends once the Ack lands.
    Frame verify_and_ack(const Frame& confirm) {
        require(Role::Initiator, Phase::KeySent, FrameType::KeyConfirm, confirm);
        Bytes digest;
        try {
            FieldReader r(confirm.body);
            Bytes sid = r.next_exact(kSessionIdSize);
            if (!bytes_equal(sid, BytesView(session_id_))) fail("confirm for wrong session");
            digest = r.next_exact(crypto::kDigestSize);
            if (!r.done()) throw std::out_of_range("trailing bytes");
        } catch (const std::out_of_range&) {
            fail("malformed KeyConfirm");
        }
        crypto::Digest expected = confirm_digest(*shared_key_, nonce_);
        if (!bytes_equal(digest, crypto::digest_bytes(expected))) {
            wipe();
            phase_ = Phase::Closed;
            throw HandshakeError(HandshakeError::Kind::KeyConfirmMismatch,
                                 "shared key digest mismatch");
        }
        phase_ = Phase::Established;
        return Frame{FrameType::Ack, FieldWriter{}.add(BytesView(session_id_)).take()};
    }

    // Responder side of step 5. A retransmitted Ack on an established
    // session is ignored.
    void accept_ack(const Frame& ack) {
        if (role_ == Role::Responder && phase_ == Phase::Established &&
            ack.type == FrameType::Ack)
            return;
        require(Role::Responder, Phase::Confirmed, FrameType::Ack, ack);
        try {
            FieldReader r(ack.body);
            Bytes sid = r.next_exact(kSessionIdSize);
            if (!bytes_equal(sid, BytesView(session_id_))) fail("ack for wrong session");
        } catch (const std::out_of_range&) {
            fail("malformed Ack");
        }
        phase_ = Phase::Established;
    }

    // Transport phase: body = AEAD(counter || plaintext). Counters start at
    // 1 and step by exactly 1 per frame.
    Frame send_data(BytesView plaintext) {
        if (phase_ != Phase::Established)
            throw ChannelError(ChannelError::Kind::NotEstablished, "session not established");
        Bytes inner;
        put_u64be(inner, send_counter_ + 1);
        append(inner, plaintext);
        Frame f{FrameType::Data, aead_->seal(inner, rng_)};
        ++send_counter_;
        return f;
    }

    Bytes recv_data(const Frame& frame) {
        if (phase_ != Phase::Established)
            throw ChannelError(ChannelError::Kind::NotEstablished, "session not established");
        if (frame.type != FrameType::Data)
            throw ChannelError(ChannelError::Kind::BadFrame, "not a data frame");
        auto inner = aead_->open(frame.body);
        if (!inner) throw ChannelError(ChannelError::Kind::TamperDetected, "authentication failed");
        if (inner->size() < 8)
            throw ChannelError(ChannelError::Kind::TamperDetected, "data frame too short");
        std::uint64_t counter = get_u64be(*inner, 0);
        if (counter <= recv_counter_)
            throw ChannelError(ChannelError::Kind::Replay, "frame counter replayed");
        if (counter != recv_counter_ + 1)
            throw ChannelError(ChannelError::Kind::BadFrame, "frame counter gap");
        recv_counter_ = counter;
        return Bytes(inner->begin() + 8, inner->end());
    }

    // Step 6: the shared key is erased; a closed session cannot be reused.
    // Returns the Close frame to send when the session was established.
    std::optional<Frame> close_session() {
        std::optional<Frame> f;
        if (phase_ == Phase::Established)
            f = Frame{FrameType::Close, FieldWriter{}.add(BytesView(session_id_)).take()};
        wipe();
        phase_ = Phase::Closed;
        return f;
    }

    // Inbound dispatch: routes a frame to the step expected in the current
    // phase; anything else closes the session.
    Delivered deliver(const Frame& f) {
        Delivered out;
        if (f.type == FrameType::Close) {
            if (phase_ != Phase::Established) fail("Close outside established session");
            wipe();
            phase_ = Phase::Closed;
            out.closed = true;
            return out;
        }
        if (role_ == Role::Responder) {
            switch (f.type) {
                case FrameType::Hello:
                    if (phase_ == Phase::Idle) {
                        out.reply = respond_with_certificate(f);
                        return out;
                    }
                    break;
                case FrameType::KeyTransport:
                    if (phase_ == Phase::CertReceived) {
                        out.reply = confirm_key(f);
                        return out;
                    }
                    break;
                case FrameType::Ack:
                    if (phase_ == Phase::Confirmed || phase_ == Phase::Established) {
                        accept_ack(f);
                        return out;
                    }
                    break;
                case FrameType::Data:
                    if (phase_ == Phase::Established) {
                        out.payload = recv_data(f);
                        return out;
                    }
                    break;
                default:
                    break;
            }
        } else {
            switch (f.type) {
                case FrameType::CertReply:
                    if (phase_ == Phase::HelloSent) {
                        out.reply = send_shared_key(f);
                        return out;
                    }
                    break;
                case FrameType::KeyConfirm:
                    if (phase_ == Phase::KeySent) {
                        out.reply = verify_and_ack(f);
                        return out;
                    }
                    break;
                case FrameType::Data:
                    if (phase_ == Phase::Established) {
                        out.payload = recv_data(f);
                        return out;
                    }
                    break;
                default:
                    break;
            }
        }
        fail(std::string("unexpected ") + frame_type_name(f.type) + " in phase " +
             phase_name(phase_));
        return out;  // unreachable
    }

    Phase phase() const { return phase_; }
    Role role() const { return role_; }
    const SessionId& id() const { return session_id_; }
    std::uint64_t send_counter() const { return send_counter_; }
    std::uint64_t recv_counter() const { return recv_counter_; }
    bool has_shared_key() const { return shared_key_.has_value(); }
    const Bytes& shared_key_for_test() const { return *shared_key_; }
    const std::string& peer_name() const { return peer_name_; }

    // Full field dump, used by logs and by the key-hygiene tests.
    Bytes snapshot() const {
        FieldWriter w;
        w.add(BytesView(session_id_));
        Bytes meta{static_cast<std::uint8_t>(phase_), static_cast<std::uint8_t>(role_)};
        w.add(meta);
        w.add(BytesView(nonce_));
        w.add_u64(send_counter_);
        w.add_u64(recv_counter_);
        w.add(shared_key_ ? BytesView(*shared_key_) : BytesView{});
        w.add(peer_name_);
        return w.take();
    }

    static crypto::Digest confirm_digest(BytesView key,
                                         const std::array<std::uint8_t, kNonceSize>& nonce) {
        Bytes joined(key.begin(), key.end());
        append(joined, BytesView(nonce));
        return crypto::sha256(joined);
    }

private:
    Session(Role role, RandomSource rng) : role_(role), rng_(std::move(rng)) {}

    void require(Role role, Phase phase, FrameType type, const Frame& f) {
        if (role_ != role) fail("operation for the wrong role");
        if (phase_ != phase) fail(std::string("operation invalid in phase ") + phase_name(phase_));
        if (f.type != type) fail(std::string("expected ") + frame_type_name(type));
    }

    [[noreturn]] void fail(const std::string& what) {
        wipe();
        phase_ = Phase::Closed;
        throw protocol_violation(what);
    }

    void set_shared_key(Bytes key) {
        aead_.emplace(crypto::AeadKey(key));
        shared_key_ = std::move(key);
    }

    void wipe() {
        if (shared_key_) {
            OPENSSL_cleanse(shared_key_->data(), shared_key_->size());
            shared_key_.reset();
        }
        aead_.reset();
    }

    Role role_;
    Phase phase_ = Phase::Idle;
    RandomSource rng_;
    SessionId session_id_{};
    std::array<std::uint8_t, kNonceSize> nonce_{};
    std::optional<Bytes> shared_key_;
    std::optional<crypto::AeadKey> aead_;
    std::uint64_t send_counter_ = 0;
    std::uint64_t recv_counter_ = 0;
    std::optional<ResponderIdentity> identity_;
    SessionTracker* tracker_ = nullptr;
    std::string peer_name_;
};

}  // namespace vigil::channel
