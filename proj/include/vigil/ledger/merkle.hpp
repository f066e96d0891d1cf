#pragma once

#include <vector>

#include "vigil/crypto/digest.hpp"

namespace vigil::ledger {

// Merkle root over transaction digests. Odd levels duplicate the last leaf;
// an empty set has an all-zero root.
inline crypto::Digest merkle_root(std::vector<crypto::Digest> level) {
    if (level.empty()) return crypto::Digest{};
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        std::vector<crypto::Digest> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            Bytes joined;
            joined.reserve(2 * crypto::kDigestSize);
            append(joined, BytesView(level[i]));
            append(joined, BytesView(level[i + 1]));
            next.push_back(crypto::sha256(joined));
        }
        level = std::move(next);
    }
    return level[0];
}

}  // namespace vigil::ledger
