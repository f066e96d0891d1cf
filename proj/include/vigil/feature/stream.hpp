#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vigil/channel/secure_channel.hpp"
#include "vigil/feature/record.hpp"

namespace vigil::feature {

struct TransferSummary {
    std::uint64_t records_sent = 0;
    std::uint64_t batches_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::chrono::microseconds elapsed{0};
};

class StreamError : public std::runtime_error {
public:
    StreamError(std::uint64_t sent_batches, const std::string& what)
        : std::runtime_error(what), sent_batches_(sent_batches) {}

    std::uint64_t sent_batches() const { return sent_batches_; }

private:
    std::uint64_t sent_batches_;
};

// Ships one Data frame per batch in feature-line format. The channel is
// owned exclusively for the duration of the call.
inline TransferSummary stream_records(channel::MessageStream& session,
                                      const std::vector<std::vector<FeatureRecord>>& batches) {
    TransferSummary summary;
    auto start = std::chrono::steady_clock::now();
    for (const auto& batch : batches) {
        std::string payload = serialize_records(batch);
        try {
            session.send(to_bytes(payload));
        } catch (const std::exception& e) {
            throw StreamError(summary.batches_sent,
                              std::string("channel failed mid-stream: ") + e.what());
        }
        ++summary.batches_sent;
        summary.records_sent += batch.size();
        summary.bytes_sent += payload.size();
    }
    summary.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);
    return summary;
}

}  // namespace vigil::feature
