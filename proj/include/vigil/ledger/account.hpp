#pragma once

#include <array>
#include <string>

#include "vigil/bytes.hpp"
#include "vigil/crypto/digest.hpp"
#include "vigil/crypto/signing.hpp"
#include "vigil/rand.hpp"

namespace vigil::ledger {

inline constexpr std::size_t kAddressSize = 20;

// The account address doubles as the Virtual Identity (VID) everywhere:
// last 20 bytes of the public key's digest.
using Address = std::array<std::uint8_t, kAddressSize>;

inline Address derive_address(BytesView public_key) {
    crypto::Digest d = crypto::sha256(public_key);
    Address a;
    std::copy(d.end() - kAddressSize, d.end(), a.begin());
    return a;
}

inline std::string address_hex(const Address& a) {
    return hex_encode(BytesView(a));
}

inline Address address_from_hex(std::string_view hex) {
    Bytes b = hex_decode(hex);
    if (b.size() != kAddressSize) throw std::invalid_argument("address must be 20 bytes");
    Address a;
    std::copy(b.begin(), b.end(), a.begin());
    return a;
}

class Account {
public:
    static Account create(RandomSource& rng) { return Account(crypto::SigningKey::generate(rng)); }

    static Account from_seed(BytesView seed) {
        return Account(crypto::SigningKey::from_seed(seed));
    }

    const Address& address() const { return address_; }
    const Bytes& public_key() const { return public_key_; }
    Bytes sign(BytesView message) const { return key_.sign(message); }

private:
    explicit Account(crypto::SigningKey key)
        : key_(std::move(key)), public_key_(key_.public_key()),
          address_(derive_address(public_key_)) {}

    crypto::SigningKey key_;
    Bytes public_key_;
    Address address_;
};

}  // namespace vigil::ledger
