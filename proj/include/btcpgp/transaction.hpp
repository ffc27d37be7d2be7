#pragma once

#include <btcpgp/address.hpp>
#include <btcpgp/amount.hpp>
#include <btcpgp/hash.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace btcpgp {

/// Largest payload a data-carrier output may hold.
inline constexpr std::size_t kMaxDataPayload = 80;

struct OutPoint {
    Hash256 txid{};
    std::uint32_t index = 0;

    auto operator<=>(const OutPoint&) const = default;
};

struct TxInput {
    OutPoint prevout;
    Bytes public_key;
    Bytes signature;

    bool operator==(const TxInput&) const = default;
};

struct PaymentOutput {
    Address address;
    Amount amount;

    bool operator==(const PaymentOutput&) const = default;
};

/// Provably unspendable output carrying up to 80 bytes; always zero value.
struct DataOutput {
    Bytes payload;

    bool operator==(const DataOutput&) const = default;
};

using TxOutput = std::variant<PaymentOutput, DataOutput>;

inline Amount output_value(const TxOutput& out) {
    if (auto* p = std::get_if<PaymentOutput>(&out)) return p->amount;
    return Amount{};
}

struct Transaction {
    std::vector<TxInput> inputs;
    std::vector<TxOutput> outputs;
    std::optional<std::string> comment;
    std::optional<std::string> comment_to;

    bool operator==(const Transaction&) const = default;

    bool is_coinbase() const noexcept { return inputs.empty(); }

    Amount output_total() const {
        Amount total;
        for (const auto& o : outputs) total += output_value(o);
        return total;
    }

    /// Canonical encoding: length-prefixed fields in declaration order,
    /// big-endian integers.
    Bytes encode() const { return encode_impl(true); }

    Hash256 txid() const { return sha256(encode()); }

    /// Digest every input signs: the canonical encoding with signatures blanked.
    Hash256 signature_hash() const { return sha256(encode_impl(false)); }

    static Transaction decode(ByteView data, Errc code = Errc::corrupt_ledger) {
        ByteReader r(data, code);
        Transaction tx;
        auto n_in = r.u32();
        if (n_in > r.remaining()) r.error("implausible input count");
        for (std::uint32_t i = 0; i < n_in; ++i) {
            TxInput in;
            auto txid = r.raw(32);
            std::copy(txid.begin(), txid.end(), in.prevout.txid.begin());
            in.prevout.index = r.u32();
            in.public_key = r.var();
            in.signature = r.var();
            tx.inputs.push_back(std::move(in));
        }
        auto n_out = r.u32();
        if (n_out > r.remaining()) r.error("implausible output count");
        for (std::uint32_t i = 0; i < n_out; ++i) {
            auto kind = r.u8();
            if (kind == kPaymentTag) {
                auto text = r.str();
                if (!Address::is_valid(text)) r.error("output address fails validation");
                auto amount = Amount::sats(r.u64());
                tx.outputs.emplace_back(PaymentOutput{Address::parse(text), amount});
            } else if (kind == kDataTag) {
                DataOutput d{r.var()};
                if (r.u64() != 0) r.error("data-carrier output with nonzero value");
                tx.outputs.emplace_back(std::move(d));
            } else {
                r.error("unknown output kind");
            }
        }
        tx.comment = read_optional(r);
        tx.comment_to = read_optional(r);
        r.expect_done("transaction");
        return tx;
    }

private:
    static constexpr std::uint8_t kPaymentTag = 1;
    static constexpr std::uint8_t kDataTag = 2;

    Bytes encode_impl(bool with_signatures) const {
        ByteWriter w;
        w.u32(static_cast<std::uint32_t>(inputs.size()));
        for (const auto& in : inputs) {
            w.raw(in.prevout.txid).u32(in.prevout.index).var(in.public_key);
            w.var(with_signatures ? ByteView(in.signature) : ByteView{});
        }
        w.u32(static_cast<std::uint32_t>(outputs.size()));
        for (const auto& out : outputs) {
            if (auto* p = std::get_if<PaymentOutput>(&out)) {
                w.u8(kPaymentTag).str(p->address.str()).u64(p->amount.satoshis());
            } else {
                w.u8(kDataTag).var(std::get<DataOutput>(out).payload).u64(0);
            }
        }
        write_optional(w, comment);
        write_optional(w, comment_to);
        return std::move(w).take();
    }

    static void write_optional(ByteWriter& w, const std::optional<std::string>& s) {
        w.u8(s ? 1 : 0);
        if (s) w.str(*s);
    }

    static std::optional<std::string> read_optional(ByteReader& r) {
        auto flag = r.u8();
        if (flag > 1) r.error("bad optional flag");
        if (flag == 0) return std::nullopt;
        return r.str();
    }
};

} // namespace btcpgp
