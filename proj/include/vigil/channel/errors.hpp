#pragma once

#include <stdexcept>
#include <string>

namespace vigil::channel {

class HandshakeError : public std::runtime_error {
public:
    enum class Kind { Transport, Busy, BadCertificate, KeyConfirmMismatch, ProtocolViolation };

    HandshakeError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class ChannelError : public std::runtime_error {
public:
    enum class Kind { NotEstablished, TamperDetected, Replay, BadFrame };

    ChannelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline HandshakeError protocol_violation(const std::string& what) {
    return HandshakeError(HandshakeError::Kind::ProtocolViolation, what);
}

}  // namespace vigil::channel
