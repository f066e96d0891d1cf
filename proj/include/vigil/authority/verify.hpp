#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vigil/crypto/digest.hpp"
#include "vigil/index/canonical.hpp"
#include "vigil/ledger/contract.hpp"

namespace vigil::authority {

class AuthError : public std::runtime_error {
public:
    enum class Kind { ChainUnavailable };
    AuthError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Read-only view of the contract as of some chain tip. Implementations may
// sit on a local node or go through RPC; unreachable chains throw.
class ChainReader {
public:
    virtual ~ChainReader() = default;
    virtual std::optional<ledger::IndexToken> get_index_token(const std::string& segment_id) = 0;
};

// A whole segment as returned for an authenticated query: its id plus its
// canonical serialization. The digest is recomputed from these exact bytes,
// never taken from the fog's word.
struct AuthenticatedSegment {
    std::string segment_id;
    Bytes canonical;
};

enum class Verdict : std::uint8_t { Authentic, TamperedOrUnknown };

struct AuthResult {
    std::string segment_id;
    Verdict verdict = Verdict::TamperedOrUnknown;
    crypto::Digest local_digest{};
    std::optional<crypto::Digest> chain_digest;
    std::uint64_t chain_height = 0;

    bool authentic() const { return verdict == Verdict::Authentic; }
};

inline AuthResult authenticate_segment(const AuthenticatedSegment& seg, ChainReader& chain) {
    AuthResult out;
    out.segment_id = seg.segment_id;
    out.local_digest = crypto::sha256(seg.canonical);
    auto token = chain.get_index_token(seg.segment_id);
    if (token) {
        out.chain_digest = token->digest;
        out.chain_height = token->block_height;
    }
    out.verdict = (token && token->digest == out.local_digest) ? Verdict::Authentic
                                                               : Verdict::TamperedOrUnknown;
    return out;
}

// Verifies every covering segment of a query result against the on-chain
// index tokens. One result per segment; the overall answer is authentic only
// if they all are.
inline std::vector<AuthResult> authenticate_query(const std::vector<AuthenticatedSegment>& segments,
                                                  ChainReader& chain) {
    std::vector<AuthResult> out;
    out.reserve(segments.size());
    for (const auto& seg : segments) out.push_back(authenticate_segment(seg, chain));
    return out;
}

inline bool all_authentic(const std::vector<AuthResult>& results) {
    for (const auto& r : results)
        if (!r.authentic()) return false;
    return true;
}

}  // namespace vigil::authority
