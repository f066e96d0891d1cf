#pragma once

#include <string>
#include <vector>

#include "vigil/authority/verify.hpp"
#include "vigil/channel/secure_channel.hpp"
#include "vigil/ledger/node.hpp"
#include "vigil/rpc/codec.hpp"

namespace vigil::rpc {

// Chain node RPC: get_index_token, submit_tx, get_block, get_tip.
inline Response handle_chain_request(ledger::ChainNode& node, const Request& req) {
    using namespace ledger;
    if (req.method == "get_index_token") {
        if (req.args.size() != 1) return error_response("bad_request");
        auto token = node.get_index_token(to_string(req.args[0]));
        if (!token) return Response{"absent", {}};
        Bytes height;
        put_u64be(height, token->block_height);
        return ok_response({crypto::digest_bytes(token->digest), height,
                            Bytes(token->submitter.begin(), token->submitter.end())});
    }
    if (req.method == "submit_tx") {
        if (req.args.size() != 1) return error_response("bad_request");
        Transaction tx;
        try {
            tx = Transaction::decode(req.args[0]);
        } catch (const std::invalid_argument&) {
            return error_response("bad_request");
        }
        if (auto reject = node.submit_tx(tx))
            return error_response(std::string("rejected:") + tx_reject_name(*reject));
        return ok_response({crypto::digest_bytes(tx.id())});
    }
    if (req.method == "get_block") {
        if (req.args.size() != 1 || req.args[0].size() != 8) return error_response("bad_request");
        auto block = node.get_block(get_u64be(req.args[0], 0));
        if (!block) return Response{"absent", {}};
        return ok_response({block->encode()});
    }
    if (req.method == "get_tip") {
        auto [height, hash] = node.get_tip();
        Bytes h;
        put_u64be(h, height);
        return ok_response({h, crypto::digest_bytes(hash)});
    }
    if (req.method == "announce_block") {
        if (req.args.size() != 1) return error_response("bad_request");
        Block block;
        try {
            block = Block::decode(req.args[0]);
        } catch (const std::invalid_argument&) {
            return error_response("bad_request");
        }
        auto result = node.import_block(block);
        const char* label = result == ChainNode::ImportResult::Adopted    ? "adopted"
                            : result == ChainNode::ImportResult::Stored   ? "stored"
                            : result == ChainNode::ImportResult::Duplicate ? "duplicate"
                                                                           : "invalid";
        return ok_response({to_bytes(label)});
    }
    return error_response("unknown_method");
}

// Serves one connection until the peer closes.
inline void serve_chain_connection(ledger::ChainNode& node, channel::MessageStream& stream) {
    while (auto msg = stream.recv()) {
        Response resp;
        try {
            resp = handle_chain_request(node, Request::decode(*msg));
        } catch (const std::exception&) {
            resp = error_response("bad_request");
        }
        stream.send(resp.encode());
    }
}

class RpcError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChainRpcClient {
public:
    explicit ChainRpcClient(channel::MessageStream& stream) : stream_(stream) {}

    std::optional<ledger::IndexToken> get_index_token(const std::string& segment_id) {
        Response resp = call({"get_index_token", {to_bytes(segment_id)}});
        if (resp.status == "absent") return std::nullopt;
        require_ok(resp, 3);
        ledger::IndexToken token;
        if (resp.fields[0].size() != crypto::kDigestSize ||
            resp.fields[1].size() != 8 ||
            resp.fields[2].size() != ledger::kAddressSize)
            throw RpcError("malformed get_index_token response");
        std::copy(resp.fields[0].begin(), resp.fields[0].end(), token.digest.begin());
        token.block_height = get_u64be(resp.fields[1], 0);
        std::copy(resp.fields[2].begin(), resp.fields[2].end(), token.submitter.begin());
        return token;
    }

    // Returns the tx id, or the rejection label.
    std::pair<bool, std::string> submit_tx(const ledger::Transaction& tx) {
        Response resp = call({"submit_tx", {tx.encode()}});
        if (!resp.ok()) return {false, resp.status};
        if (resp.fields.size() != 1) throw RpcError("malformed submit_tx response");
        return {true, hex_encode(resp.fields[0])};
    }

    std::optional<ledger::Block> get_block(std::uint64_t height) {
        Bytes h;
        put_u64be(h, height);
        Response resp = call({"get_block", {h}});
        if (resp.status == "absent") return std::nullopt;
        require_ok(resp, 1);
        return ledger::Block::decode(resp.fields[0]);
    }

    std::pair<std::uint64_t, crypto::Digest> get_tip() {
        Response resp = call({"get_tip", {}});
        require_ok(resp, 2);
        crypto::Digest hash;
        if (resp.fields[0].size() != 8 || resp.fields[1].size() != crypto::kDigestSize)
            throw RpcError("malformed get_tip response");
        std::copy(resp.fields[1].begin(), resp.fields[1].end(), hash.begin());
        return {get_u64be(resp.fields[0], 0), hash};
    }

private:
    Response call(const Request& req) {
        stream_.send(req.encode());
        auto msg = stream_.recv();
        if (!msg) throw RpcError("chain connection closed");
        return Response::decode(*msg);
    }

    void require_ok(const Response& resp, std::size_t fields) {
        if (!resp.ok()) throw RpcError("rpc failed: " + resp.status);
        if (resp.fields.size() != fields) throw RpcError("unexpected rpc response shape");
    }

    channel::MessageStream& stream_;
};

// ChainReader adapters for the authority's verification path.
class RpcChainReader : public authority::ChainReader {
public:
    explicit RpcChainReader(ChainRpcClient& client) : client_(client) {}

    std::optional<ledger::IndexToken> get_index_token(const std::string& segment_id) override {
        try {
            return client_.get_index_token(segment_id);
        } catch (const std::exception& e) {
            throw authority::AuthError(authority::AuthError::Kind::ChainUnavailable, e.what());
        }
    }

private:
    ChainRpcClient& client_;
};

class LocalChainReader : public authority::ChainReader {
public:
    explicit LocalChainReader(ledger::ChainNode& node) : node_(node) {}

    std::optional<ledger::IndexToken> get_index_token(const std::string& segment_id) override {
        return node_.get_index_token(segment_id);
    }

private:
    ledger::ChainNode& node_;
};

}  // namespace vigil::rpc
