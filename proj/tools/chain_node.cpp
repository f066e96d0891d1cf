// Proof-of-work chain node: serves the node RPC over the secure channel and
// optionally mines the mempool, announcing sealed blocks to its peers.

#include <CLI11.hpp>

#include "tool_common.hpp"
#include "vigil/ledger/node.hpp"
#include "vigil/rpc/chain_rpc.hpp"

using namespace vigil;

namespace {

void announce_to_peer(const std::string& peer, const ledger::Block& block) {
    try {
        auto ch = channel::SecureChannel::connect(channel::dial_tcp(peer), system_random());
        rpc::Request req{"announce_block", {block.encode()}};
        ch.send(req.encode());
        ch.recv();
        ch.close();
    } catch (const std::exception& e) {
        std::cerr << "announce to " << peer << " failed: " << e.what() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vigil chain node"};
    std::string listen = "127.0.0.1:9701";
    std::string config_path;
    std::string peers_arg;
    std::uint32_t difficulty = 16;
    bool mine = false;
    int poll_ms = 50;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--listen", listen, "host:port for the node RPC");
    app.add_option("--difficulty", difficulty, "PoW difficulty in leading zero bits");
    app.add_option("--peers", peers_arg, "comma-separated peer node endpoints");
    app.add_flag("--mine", mine, "mine pending transactions");
    app.add_option("--poll-ms", poll_ms, "miner mempool poll interval");
    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            auto j = tools::load_json_file(config_path);
            if (j.contains("difficulty_bits")) difficulty = j["difficulty_bits"].get<std::uint32_t>();
            if (j.contains("listen")) listen = j["listen"].get<std::string>();
            if (j.contains("mine")) mine = j["mine"].get<bool>();
            if (j.contains("peers")) peers_arg = j["peers"].get<std::string>();
        }
        std::vector<std::string> peers;
        {
            std::size_t start = 0;
            while (start < peers_arg.size()) {
                std::size_t end = peers_arg.find(',', start);
                if (end == std::string::npos) end = peers_arg.size();
                if (end > start) peers.push_back(peers_arg.substr(start, end - start));
                start = end + 1;
            }
        }

        tools::install_stop_handler();
        ledger::ChainNode node{ledger::ChainConfig{difficulty}};
        channel::ResponderIdentity identity{
            "chain-node", std::make_shared<crypto::RsaKeyPair>(crypto::RsaKeyPair::generate())};
        channel::SessionTracker tracker;

        auto endpoint = channel::parse_endpoint(listen);
        channel::TcpListener listener(endpoint.host, endpoint.port);
        std::cout << "chain-node listening on " << endpoint.host << ":" << listener.port()
                  << " difficulty=" << difficulty << (mine ? " (mining)" : "") << std::endl;

        std::thread miner;
        if (mine) {
            miner = std::thread([&] {
                auto rng = system_random();
                while (!tools::g_stop) {
                    if (node.mempool_size() > 0) {
                        auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                                       std::chrono::system_clock::now().time_since_epoch())
                                       .count();
                        if (auto block = node.mine_block(now, random_u64(rng))) {
                            std::cout << "mined block " << block->height << " with "
                                      << block->txs.size() << " txs: "
                                      << hex_encode(block->block_hash()).substr(0, 16)
                                      << std::endl;
                            for (const auto& peer : peers) announce_to_peer(peer, *block);
                        }
                    }
                    std::this_thread::sleep_for(std::chrono::milliseconds(poll_ms));
                }
            });
        }

        std::vector<std::thread> workers;
        while (!tools::g_stop) {
            std::unique_ptr<channel::TcpStream> stream;
            try {
                stream = listener.accept_with_timeout(200);
            } catch (const std::exception&) {
                break;  // listener closed on shutdown
            }
            if (!stream) continue;
            workers.emplace_back([&, s = std::move(stream)]() mutable {
                try {
                    auto ch = channel::SecureChannel::accept(std::move(s), identity,
                                                             system_random(), &tracker);
                    rpc::serve_chain_connection(node, ch);
                } catch (const std::exception& e) {
                    std::cerr << "connection error: " << e.what() << "\n";
                }
            });
        }
        listener.close();
        for (auto& w : workers)
            if (w.joinable()) w.join();
        if (miner.joinable()) miner.join();
    } catch (const std::exception& e) {
        std::cerr << "chain-node: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
