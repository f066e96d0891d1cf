#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>

#include <openssl/rand.h>

#include "vigil/bytes.hpp"

namespace vigil {

// Fills a span with random bytes. Production code uses the OS CSPRNG;
// tests substitute seeded or scripted sources.
using RandomSource = std::function<void(std::span<std::uint8_t>)>;

inline RandomSource system_random() {
    return [](std::span<std::uint8_t> out) {
        if (!out.empty() && RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
            throw std::runtime_error("RAND_bytes failed");
    };
}

// Deterministic source for tests and seeded simulations. Not secure.
inline RandomSource seeded_random(std::uint64_t seed) {
    auto engine = std::make_shared<std::mt19937_64>(seed);
    return [engine](std::span<std::uint8_t> out) {
        for (auto& b : out) b = static_cast<std::uint8_t>((*engine)() & 0xff);
    };
}

inline Bytes random_bytes(RandomSource& rng, std::size_t n) {
    Bytes out(n);
    rng(out);
    return out;
}

inline std::uint64_t random_u64(RandomSource& rng) {
    Bytes b = random_bytes(rng, 8);
    return get_u64be(b, 0);
}

}  // namespace vigil
