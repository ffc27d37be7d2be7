#pragma once

#include <btcpgp/block.hpp>
#include <btcpgp/wallet.hpp>

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

namespace btcpgp {

struct LedgerParams {
    Amount block_reward = Amount::coins(50);
    /// Flat miner fee attached to payment transactions.
    Amount payment_fee = Amount::sats(1'000);
    /// Minimal payment attached to data transactions so they are findable by address.
    Amount dust = Amount::sats(546);
    std::int64_t genesis_time = 1'231'006'505;
    /// When set, block timestamps are genesis time + height * interval.
    bool fixed_clock = true;
    std::int64_t block_interval = 600;
};

struct TxLocation {
    std::uint64_t height = 0;
    std::uint32_t index = 0;

    auto operator<=>(const TxLocation&) const = default;
};

struct UtxoEntry {
    PaymentOutput output;
    TxLocation location;

    bool operator==(const UtxoEntry&) const = default;
};

using UtxoSet = std::map<OutPoint, UtxoEntry>;

/// A spendable output as seen by a wallet; confirmations == 0 means pending.
struct Coin {
    OutPoint outpoint;
    PaymentOutput output;
    std::uint64_t confirmations = 0;
};

struct SendOptions {
    unsigned minconf = 1;
    /// Spend from this address first and return change to it. The first input
    /// is always taken from here; remaining inputs may come from the rest of
    /// the wallet.
    std::optional<Address> from;
    std::optional<std::string> comment;
    std::optional<std::string> comment_to;
};

struct Rejection {
    Hash256 txid{};
    std::string reason;
};

struct MineResult {
    Block block;
    std::vector<Rejection> rejected;
};

struct DataRecord {
    Hash256 txid{};
    Bytes payload;
    std::uint64_t height = 0;
    std::uint32_t index = 0;
};

/// Read-only view of a confirmed transaction together with the addresses of
/// the outputs it spent.
struct ConfirmedTx {
    const Transaction* tx = nullptr;
    Hash256 txid{};
    TxLocation location;
    std::int64_t timestamp = 0;
    const std::vector<Address>* from = nullptr;

    bool spends_from(const Address& a) const {
        return std::find(from->begin(), from->end(), a) != from->end();
    }

    Amount paid_to(const Address& a) const {
        Amount total;
        for (const auto& out : tx->outputs)
            if (auto* p = std::get_if<PaymentOutput>(&out); p && p->address == a) total += p->amount;
        return total;
    }
};

/// Deterministic in-process Bitcoin-like ledger: UTXO accounting, a pending
/// pool and explicitly mined blocks. Single writer; copy the value (or use
/// LedgerHost) for concurrent readers.
class Ledger {
public:
    explicit Ledger(LedgerParams params = {}) : params_(params) {
        Block genesis;
        genesis.height = 0;
        genesis.timestamp = params_.genesis_time;
        genesis.transactions.push_back(Transaction{{}, {}, std::string("genesis"), std::nullopt});
        genesis.seal();
        connect_validated(std::move(genesis), Amount{});
    }

    /// Rebuilds a ledger from a block sequence, revalidating every rule.
    /// Throws CorruptLedger on any violation.
    static Ledger from_blocks(LedgerParams params, std::vector<Block> blocks) {
        if (blocks.empty()) fail(Errc::corrupt_ledger, "ledger has no genesis block");
        Ledger ledger(params, EmptyTag{});
        for (auto& b : blocks) ledger.connect_checked(std::move(b));
        return ledger;
    }

    const LedgerParams& params() const noexcept { return params_; }
    void set_payment_fee(Amount fee) noexcept { params_.payment_fee = fee; }

    std::uint64_t height() const noexcept { return blocks_.size() - 1; }
    const Block& tip() const noexcept { return blocks_.back(); }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const UtxoSet& utxo_set() const noexcept { return utxo_; }
    const std::vector<Transaction>& pending() const noexcept { return pending_; }

    /// Timestamp the next mined block will carry.
    std::int64_t next_timestamp() const {
        if (params_.fixed_clock)
            return blocks_.front().timestamp +
                   static_cast<std::int64_t>(blocks_.size()) * params_.block_interval;
        auto now = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
        return std::max<std::int64_t>(now, tip().timestamp + 1);
    }

    /// "Now" as seen by the chain: the tip's timestamp under the fixed clock,
    /// wall-clock time otherwise. Always earlier than next_timestamp() in fixed mode.
    std::int64_t current_time() const {
        if (params_.fixed_clock) return tip().timestamp;
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    Amount minted_total() const noexcept { return minted_; }

    Amount total_utxo_value() const {
        Amount total;
        for (const auto& [op, e] : utxo_) total += e.output.amount;
        return total;
    }

    // ---- transaction lookup -------------------------------------------------

    std::optional<TxLocation> location_of(const Hash256& txid) const {
        auto it = tx_index_.find(txid);
        if (it == tx_index_.end()) return std::nullopt;
        return it->second;
    }

    bool is_pending(const Hash256& txid) const { return pending_ids_.contains(txid); }

    /// 0 for pending, depth below the tip for confirmed, nullopt if unknown.
    std::optional<std::uint64_t> confirmations(const Hash256& txid) const {
        if (auto loc = location_of(txid)) return height() - loc->height + 1;
        if (is_pending(txid)) return 0;
        return std::nullopt;
    }

    ConfirmedTx confirmed(TxLocation loc) const {
        const auto& block = blocks_.at(loc.height);
        const auto& meta = meta_.at(loc.height).at(loc.index);
        return ConfirmedTx{&block.transactions.at(loc.index), meta.txid, loc, block.timestamp, &meta.from};
    }

    std::optional<ConfirmedTx> find_confirmed(const Hash256& txid) const {
        auto loc = location_of(txid);
        if (!loc) return std::nullopt;
        return confirmed(*loc);
    }

    /// Confirmed or pending transaction body.
    const Transaction* transaction(const Hash256& txid) const {
        if (auto loc = location_of(txid)) return &blocks_[loc->height].transactions[loc->index];
        for (const auto& tx : pending_)
            if (tx.txid() == txid) return &tx;
        return nullptr;
    }

    /// Confirmed transactions with at least one payment output to `addr`, in chain order.
    std::vector<ConfirmedTx> transactions_paying(const Address& addr) const {
        return collect(paid_to_, addr);
    }

    /// Confirmed transactions spending at least one output held by `addr`, in chain order.
    std::vector<ConfirmedTx> transactions_spending_from(const Address& addr) const {
        return collect(spent_from_, addr);
    }

    /// Earliest confirmed transaction spending from `from` that pays exactly `amount` to `to`.
    std::optional<Hash256> find_transaction(const Address& from, const Address& to,
                                            Amount amount) const {
        for (const auto& c : transactions_paying(to)) {
            if (!c.spends_from(from)) continue;
            for (const auto& out : c.tx->outputs)
                if (auto* p = std::get_if<PaymentOutput>(&out); p && p->address == to && p->amount == amount)
                    return c.txid;
        }
        return std::nullopt;
    }

    /// Data-carrier payloads of confirmed transactions that also pay `addr`.
    std::vector<DataRecord> list_data_by_address(const Address& addr) const {
        std::vector<DataRecord> out;
        for (const auto& c : transactions_paying(addr))
            for (const auto& o : c.tx->outputs)
                if (auto* d = std::get_if<DataOutput>(&o))
                    out.push_back(DataRecord{c.txid, d->payload, c.location.height, c.location.index});
        return out;
    }

    /// Addresses whose coins a pending transaction spends (unknown inputs skipped).
    std::vector<Address> pending_input_addresses(const Transaction& tx) const {
        std::vector<Address> out;
        for (const auto& in : tx.inputs) {
            std::optional<Address> addr;
            if (auto it = utxo_.find(in.prevout); it != utxo_.end()) {
                addr = it->second.output.address;
            } else {
                for (const auto& p : pending_) {
                    if (p.txid() != in.prevout.txid || in.prevout.index >= p.outputs.size()) continue;
                    if (auto* pay = std::get_if<PaymentOutput>(&p.outputs[in.prevout.index])) addr = pay->address;
                }
            }
            if (addr && std::find(out.begin(), out.end(), *addr) == out.end()) out.push_back(*addr);
        }
        return out;
    }

    // ---- wallet view ----------------------------------------------------------

    /// Spendable coins of `wallet`, oldest first. Coins already consumed by a
    /// pending transaction are excluded; pending outputs count only at minconf 0.
    std::vector<Coin> coins(const Wallet& wallet, unsigned minconf = 1,
                            const std::optional<Address>& only = std::nullopt) const {
        auto spent = pending_spent();
        std::vector<std::pair<TxLocation, Coin>> confirmed_coins;
        for (const auto& addr : wallet.addresses()) {
            if (only && addr != *only) continue;
            auto it = by_address_.find(addr);
            if (it == by_address_.end()) continue;
            for (const auto& op : it->second) {
                if (spent.contains(op)) continue;
                const auto& entry = utxo_.at(op);
                auto depth = height() - entry.location.height + 1;
                if (depth < minconf) continue;
                confirmed_coins.push_back({entry.location, Coin{op, entry.output, depth}});
            }
        }
        std::sort(confirmed_coins.begin(), confirmed_coins.end(), [](const auto& a, const auto& b) {
            return std::tie(a.first, a.second.outpoint.index) < std::tie(b.first, b.second.outpoint.index);
        });

        std::vector<Coin> out;
        out.reserve(confirmed_coins.size());
        for (auto& [loc, coin] : confirmed_coins) out.push_back(std::move(coin));

        if (minconf == 0) {
            for (const auto& tx : pending_) {
                auto txid = tx.txid();
                for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
                    auto* p = std::get_if<PaymentOutput>(&tx.outputs[i]);
                    if (!p || !wallet.owns(p->address) || (only && p->address != *only)) continue;
                    OutPoint op{txid, i};
                    if (!spent.contains(op)) out.push_back(Coin{op, *p, 0});
                }
            }
        }
        return out;
    }

    Amount balance(const Wallet& wallet, unsigned minconf = 1) const {
        Amount total;
        for (const auto& c : coins(wallet, minconf)) total += c.output.amount;
        return total;
    }

    /// Confirmed (minconf >= 1) or pending-inclusive balance held at one address.
    Amount balance_of(const Address& addr, unsigned minconf = 1) const {
        Amount total;
        auto spent = pending_spent();
        if (auto it = by_address_.find(addr); it != by_address_.end())
            for (const auto& op : it->second) {
                const auto& e = utxo_.at(op);
                if (!spent.contains(op) && height() - e.location.height + 1 >= minconf)
                    total += e.output.amount;
            }
        if (minconf == 0)
            for (const auto& tx : pending_) {
                auto txid = tx.txid();
                for (std::uint32_t i = 0; i < tx.outputs.size(); ++i)
                    if (auto* p = std::get_if<PaymentOutput>(&tx.outputs[i]);
                        p && p->address == addr && !spent.contains(OutPoint{txid, i}))
                        total += p->amount;
            }
        return total;
    }

    // ---- sending ----------------------------------------------------------------

    /// Pays `amount` to `dest` plus the flat payment fee; change returns to the
    /// source address (or the wallet's primary address).
    Hash256 send_to_address(Wallet& wallet, const Address& dest, Amount amount,
                            const SendOptions& opts = {}) {
        if (amount.is_zero()) fail(Errc::invalid_amount, "refusing to send a zero amount");
        return build_and_submit(wallet, {PaymentOutput{dest, amount}}, params_.payment_fee, opts);
    }

    /// Stores `payload` in a data-carrier output next to a dust payment to `dest`.
    Hash256 send_data(Wallet& wallet, const Address& dest, ByteView payload, Amount fee,
                      const SendOptions& opts = {}) {
        if (payload.size() > kMaxDataPayload)
            fail(Errc::payload_too_large, "data payload of " + std::to_string(payload.size()) +
                                              " bytes exceeds " + std::to_string(kMaxDataPayload));
        return build_and_submit(wallet,
                                {DataOutput{Bytes(payload.begin(), payload.end())},
                                 PaymentOutput{dest, params_.dust}},
                                fee, opts);
    }

    /// Adds a signed transaction to the pending pool after structural checks.
    /// UTXO and signature validation happen when the block is mined.
    Hash256 submit(Transaction tx) {
        if (tx.is_coinbase()) fail(Errc::validation_failure, "coinbase transactions cannot be submitted");
        if (auto why = structural_problem(tx)) {
            if (why->starts_with("data payload")) fail(Errc::payload_too_large, *why);
            fail(Errc::validation_failure, *why);
        }
        auto txid = tx.txid();
        if (pending_ids_.contains(txid) || tx_index_.contains(txid))
            fail(Errc::validation_failure, "duplicate transaction " + to_hex(txid));
        pending_ids_.insert(txid);
        pending_.push_back(std::move(tx));
        return txid;
    }

    // ---- mining -------------------------------------------------------------------

    /// Validates pending transactions in submission order, includes the valid
    /// ones and pays reward + fees to `miner`. Invalid transactions are dropped
    /// and reported with their txid.
    MineResult mine_block(const Address& miner) {
        MineResult result;
        Overlay overlay;
        Amount fees;
        std::vector<Transaction> accepted;
        for (auto& tx : pending_) {
            TxLocation loc{height() + 1, static_cast<std::uint32_t>(accepted.size() + 1)};
            if (auto why = check_with_overlay(tx, overlay, loc, fees)) {
                result.rejected.push_back({tx.txid(), *why});
                continue;
            }
            accepted.push_back(std::move(tx));
        }
        pending_.clear();
        pending_ids_.clear();

        Block block;
        block.height = height() + 1;
        block.prev_hash = tip().block_hash;
        block.timestamp = next_timestamp();
        block.transactions.reserve(accepted.size() + 1);
        block.transactions.push_back(coinbase(block.height, miner, params_.block_reward + fees));
        for (auto& tx : accepted) block.transactions.push_back(std::move(tx));
        block.seal();

        connect_validated(block, params_.block_reward);
        result.block = std::move(block);
        return result;
    }

    MineResult mine_block(const Wallet& miner) { return mine_block(miner.primary_address()); }

    /// Disconnects the tip block, restoring the UTXO set it consumed; its
    /// non-coinbase transactions return to the front of the pending pool.
    void revert_tip() {
        if (blocks_.size() <= 1) fail(Errc::invalid_argument, "cannot revert the genesis block");
        auto block = std::move(blocks_.back());
        auto metas = std::move(meta_.back());
        blocks_.pop_back();
        meta_.pop_back();

        for (std::size_t i = block.transactions.size(); i-- > 0;) {
            const auto& tx = block.transactions[i];
            const auto& meta = metas[i];
            TxLocation loc{block.height, static_cast<std::uint32_t>(i)};
            for (std::uint32_t o = 0; o < tx.outputs.size(); ++o)
                if (auto* p = std::get_if<PaymentOutput>(&tx.outputs[o])) {
                    OutPoint op{meta.txid, o};
                    utxo_.erase(op);
                    unindex_coin(p->address, op);
                    pop_location(paid_to_, p->address, loc);
                }
            for (const auto& [op, entry] : meta.spent) {
                utxo_.emplace(op, entry);
                by_address_[entry.output.address].insert(op);
            }
            for (const auto& a : meta.from) pop_location(spent_from_, a, loc);
            tx_index_.erase(meta.txid);
        }
        minted_ -= block_reward_at(block.height);

        std::vector<Transaction> restored(std::make_move_iterator(block.transactions.begin() + 1),
                                          std::make_move_iterator(block.transactions.end()));
        for (const auto& tx : restored) pending_ids_.insert(tx.txid());
        restored.insert(restored.end(), std::make_move_iterator(pending_.begin()),
                        std::make_move_iterator(pending_.end()));
        pending_ = std::move(restored);
    }

private:
    struct EmptyTag {};

    struct TxMeta {
        Hash256 txid{};
        std::vector<Address> from;
        std::vector<std::pair<OutPoint, UtxoEntry>> spent; // undo data
    };

    struct Lookup {
        const UtxoEntry* entry = nullptr;
        bool known_tx = false;
    };

    struct Overlay {
        std::set<OutPoint> spent;
        std::map<OutPoint, UtxoEntry> created;
        std::unordered_set<Hash256, Hash256Hasher> txids;
    };

    Ledger(LedgerParams params, EmptyTag) : params_(params) {}

    Amount block_reward_at(std::uint64_t h) const { return h == 0 ? Amount{} : params_.block_reward; }

    static Transaction coinbase(std::uint64_t h, const Address& miner, Amount value) {
        Transaction tx;
        tx.outputs.emplace_back(PaymentOutput{miner, value});
        tx.comment = "coinbase:" + std::to_string(h);
        return tx;
    }

    static std::optional<std::string> structural_problem(const Transaction& tx) {
        if (tx.outputs.empty()) return "transaction has no outputs";
        for (const auto& out : tx.outputs) {
            if (auto* d = std::get_if<DataOutput>(&out)) {
                if (d->payload.size() > kMaxDataPayload) return "data payload exceeds 80 bytes";
            } else if (std::get<PaymentOutput>(out).amount.is_zero()) {
                return "zero-value payment output";
            }
        }
        return std::nullopt;
    }

    template <class LookupFn>
    std::optional<std::string> check_transaction(const Transaction& tx, LookupFn&& lookup, Amount& fee) const {
        if (tx.is_coinbase()) return "coinbase outside block head";
        if (auto why = structural_problem(tx)) return why;
        auto sighash = tx.signature_hash();
        std::set<OutPoint> seen;
        Amount in_total;
        for (const auto& in : tx.inputs) {
            auto ref = to_hex(in.prevout.txid) + ":" + std::to_string(in.prevout.index);
            if (!seen.insert(in.prevout).second) return "duplicate input " + ref;
            auto found = lookup(in.prevout);
            if (found.entry == nullptr)
                return found.known_tx ? "double-spend of " + ref : "unknown input " + ref;
            if (in.public_key.size() != 32 ||
                Address::from_public_key(in.public_key) != found.entry->output.address)
                return "bad signature: key does not control " + ref;
            if (!verify_ed25519(in.public_key, sighash, in.signature)) return "bad signature on " + ref;
            in_total += found.entry->output.amount;
        }
        auto out_total = tx.output_total();
        if (in_total < out_total) return "value imbalance: inputs below outputs";
        fee = in_total - out_total;
        return std::nullopt;
    }

    /// Full validation path used when loading persisted blocks.
    void connect_checked(Block block) {
        auto bad = [&](const std::string& why) {
            fail(Errc::corrupt_ledger, "block " + std::to_string(block.height) + ": " + why);
        };
        auto expected_height = blocks_.size();
        if (block.height != expected_height) bad("height out of sequence");
        Hash256 expected_prev = blocks_.empty() ? Hash256{} : tip().block_hash;
        if (block.prev_hash != expected_prev) bad("hash-chain break");
        if (block.transactions.empty() || !block.transactions.front().is_coinbase()) bad("missing coinbase");
        if (!blocks_.empty() && block.timestamp < tip().timestamp) bad("timestamp regression");
        block.seal();

        Overlay overlay;
        Amount fees;
        for (std::uint32_t i = 1; i < block.transactions.size(); ++i) {
            const auto& tx = block.transactions[i];
            if (auto why = check_with_overlay(tx, overlay, TxLocation{block.height, i}, fees)) bad(*why);
        }
        const auto& cb = block.transactions.front();
        bool cb_ok = block.height == 0
                         ? cb.outputs.empty()
                         : cb.outputs.size() == 1 && std::holds_alternative<PaymentOutput>(cb.outputs[0]) &&
                               cb.output_total() == block_reward_at(block.height) + fees;
        if (!cb_ok) bad("coinbase value does not equal reward plus fees");
        auto reward = block_reward_at(block.height);
        connect_validated(std::move(block), reward);
    }

    /// Validates `tx` against the UTXO set as modified by earlier transactions
    /// of the same block; on success records its effects in the overlay.
    std::optional<std::string> check_with_overlay(const Transaction& tx, Overlay& overlay, TxLocation loc,
                                                  Amount& fees) const {
        auto lookup = [&](const OutPoint& op) -> Lookup {
            if (overlay.spent.contains(op)) return {nullptr, true};
            if (auto it = overlay.created.find(op); it != overlay.created.end()) return {&it->second, true};
            if (auto it = utxo_.find(op); it != utxo_.end()) return {&it->second, true};
            return {nullptr, tx_index_.contains(op.txid) || overlay.txids.contains(op.txid)};
        };
        Amount fee;
        if (auto why = check_transaction(tx, lookup, fee)) return why;
        auto txid = tx.txid();
        for (const auto& in : tx.inputs) {
            overlay.spent.insert(in.prevout);
            overlay.created.erase(in.prevout);
        }
        for (std::uint32_t i = 0; i < tx.outputs.size(); ++i)
            if (auto* p = std::get_if<PaymentOutput>(&tx.outputs[i]))
                overlay.created.emplace(OutPoint{txid, i}, UtxoEntry{*p, loc});
        overlay.txids.insert(txid);
        fees += fee;
        return std::nullopt;
    }

    void connect_validated(Block block, Amount reward) {
        const auto h = block.height;
        blocks_.push_back(std::move(block));
        meta_.emplace_back();
        const auto& b = blocks_.back();
        for (std::uint32_t i = 0; i < b.transactions.size(); ++i) apply(b.transactions[i], TxLocation{h, i});
        minted_ += reward;
    }

    void apply(const Transaction& tx, TxLocation loc) {
        TxMeta meta;
        meta.txid = tx.txid();
        for (const auto& in : tx.inputs) {
            auto it = utxo_.find(in.prevout);
            const auto& addr = it->second.output.address;
            if (std::find(meta.from.begin(), meta.from.end(), addr) == meta.from.end()) meta.from.push_back(addr);
            unindex_coin(addr, in.prevout);
            meta.spent.emplace_back(it->first, it->second);
            utxo_.erase(it);
        }
        for (const auto& a : meta.from) push_location(spent_from_, a, loc);
        for (std::uint32_t i = 0; i < tx.outputs.size(); ++i)
            if (auto* p = std::get_if<PaymentOutput>(&tx.outputs[i])) {
                OutPoint op{meta.txid, i};
                utxo_.emplace(op, UtxoEntry{*p, loc});
                by_address_[p->address].insert(op);
                push_location(paid_to_, p->address, loc);
            }
        tx_index_[meta.txid] = loc;
        meta_.back().push_back(std::move(meta));
    }

    using LocationIndex = std::unordered_map<Address, std::vector<TxLocation>>;

    static void push_location(LocationIndex& index, const Address& a, TxLocation loc) {
        auto& v = index[a];
        if (v.empty() || v.back() != loc) v.push_back(loc);
    }

    static void pop_location(LocationIndex& index, const Address& a, TxLocation loc) {
        auto it = index.find(a);
        if (it == index.end()) return;
        if (!it->second.empty() && it->second.back() == loc) it->second.pop_back();
        if (it->second.empty()) index.erase(it);
    }

    void unindex_coin(const Address& a, const OutPoint& op) {
        auto it = by_address_.find(a);
        if (it == by_address_.end()) return;
        it->second.erase(op);
        if (it->second.empty()) by_address_.erase(it);
    }

    std::vector<ConfirmedTx> collect(const LocationIndex& index, const Address& a) const {
        std::vector<ConfirmedTx> out;
        auto it = index.find(a);
        if (it == index.end()) return out;
        out.reserve(it->second.size());
        for (auto loc : it->second) out.push_back(confirmed(loc));
        return out;
    }

    std::set<OutPoint> pending_spent() const {
        std::set<OutPoint> spent;
        for (const auto& tx : pending_)
            for (const auto& in : tx.inputs) spent.insert(in.prevout);
        return spent;
    }

    Hash256 build_and_submit(Wallet& wallet, std::vector<TxOutput> outputs, Amount fee,
                             const SendOptions& opts) {
        Amount needed = fee;
        for (const auto& o : outputs) needed += output_value(o);

        std::vector<Coin> selected;
        Amount gathered;
        auto take = [&](const std::vector<Coin>& pool) {
            for (const auto& c : pool) {
                if (gathered >= needed) return;
                if (std::any_of(selected.begin(), selected.end(),
                                [&](const Coin& s) { return s.outpoint == c.outpoint; }))
                    continue;
                selected.push_back(c);
                gathered += c.output.amount;
            }
        };
        if (opts.from) {
            if (!wallet.owns(*opts.from))
                fail(Errc::not_owner, "wallet '" + wallet.label() + "' does not control " + opts.from->str());
            take(coins(wallet, opts.minconf, opts.from));
            if (selected.empty())
                fail(Errc::insufficient_funds, "no spendable funds at " + opts.from->str());
        }
        take(coins(wallet, opts.minconf));
        if (gathered < needed)
            fail(Errc::insufficient_funds, "balance " + format_amount(balance(wallet, opts.minconf)) +
                                               " below required " + format_amount(needed));

        auto change_to = opts.from ? *opts.from : wallet.primary_address();
        if (auto change = gathered - needed; !change.is_zero())
            outputs.emplace_back(PaymentOutput{change_to, change});

        Transaction tx;
        tx.outputs = std::move(outputs);
        tx.comment = opts.comment;
        tx.comment_to = opts.comment_to;
        for (const auto& c : selected) {
            const auto& pub = wallet.key_for(c.output.address).public_key();
            tx.inputs.push_back(TxInput{c.outpoint, Bytes(pub.begin(), pub.end()), {}});
        }
        auto sighash = tx.signature_hash();
        for (auto& in : tx.inputs) {
            const auto& key = wallet.key_for(Address::from_public_key(in.public_key));
            in.signature = key.sign(sighash);
        }
        return submit(std::move(tx));
    }

    LedgerParams params_;
    std::vector<Block> blocks_;
    std::vector<std::vector<TxMeta>> meta_;
    UtxoSet utxo_;
    std::unordered_map<Address, std::set<OutPoint>> by_address_;
    std::unordered_map<Hash256, TxLocation, Hash256Hasher> tx_index_;
    LocationIndex paid_to_;
    LocationIndex spent_from_;
    std::vector<Transaction> pending_;
    std::unordered_set<Hash256, Hash256Hasher> pending_ids_;
    Amount minted_;
};

/// Single-writer owner of a ledger. Writers serialize through `write`; each
/// write publishes an immutable snapshot that readers may hold concurrently.
class LedgerHost {
public:
    explicit LedgerHost(Ledger ledger)
        : working_(std::move(ledger)), published_(std::make_shared<const Ledger>(working_)) {}

    template <class Fn>
    auto write(Fn&& fn) {
        std::lock_guard writer(write_mutex_);
        struct Publish {
            LedgerHost& host;
            ~Publish() {
                auto snap = std::make_shared<const Ledger>(host.working_);
                std::unique_lock lock(host.snapshot_mutex_);
                host.published_ = std::move(snap);
            }
        } publish{*this};
        return std::forward<Fn>(fn)(working_);
    }

    std::shared_ptr<const Ledger> snapshot() const {
        std::shared_lock lock(snapshot_mutex_);
        return published_;
    }

private:
    std::mutex write_mutex_;
    mutable std::shared_mutex snapshot_mutex_;
    Ledger working_;
    std::shared_ptr<const Ledger> published_;
};

} // namespace btcpgp
