#pragma once

#include <btcpgp/transaction.hpp>

namespace btcpgp {

struct Block {
    std::uint64_t height = 0;
    Hash256 prev_hash{};
    std::int64_t timestamp = 0;
    std::vector<Transaction> transactions; // coinbase first
    Hash256 block_hash{};

    bool operator==(const Block&) const = default;

    /// Commits to height, parent, timestamp and every txid in order.
    Hash256 compute_hash() const {
        ByteWriter w;
        w.u64(height).raw(prev_hash).i64(timestamp).u32(static_cast<std::uint32_t>(transactions.size()));
        for (const auto& tx : transactions) w.raw(tx.txid());
        return sha256(w.bytes());
    }

    void seal() { block_hash = compute_hash(); }
};

} // namespace btcpgp
