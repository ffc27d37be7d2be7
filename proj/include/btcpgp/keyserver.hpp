#pragma once

#include <btcpgp/armor.hpp>
#include <btcpgp/ledger.hpp>

#include <map>

namespace btcpgp {

inline constexpr std::size_t kFragmentHeaderSize = 5;
inline constexpr std::size_t kChunkSize = 75;
inline constexpr std::size_t kMaxFragments = 255;
inline constexpr std::size_t kMaxKeyBytes = kChunkSize * kMaxFragments; // 19,125
/// Per-fragment miner fee of a storage transaction.
inline constexpr Amount kStorageFee = Amount::sats(100'000);

static_assert(kFragmentHeaderSize + kChunkSize == kMaxDataPayload);

/// Wire layout: bytes 0-2 key short id (big-endian), byte 3 fid, byte 4 total.
struct FragmentHeader {
    std::uint32_t key_short3 = 0;
    std::uint8_t fid = 0;
    std::uint8_t total = 0;

    bool operator==(const FragmentHeader&) const = default;
};

struct FragmentMessage {
    FragmentHeader header;
    Bytes data;

    bool operator==(const FragmentMessage&) const = default;

    Bytes encode() const {
        Bytes out;
        out.reserve(kFragmentHeaderSize + data.size());
        out.push_back(static_cast<std::uint8_t>(header.key_short3 >> 16));
        out.push_back(static_cast<std::uint8_t>(header.key_short3 >> 8));
        out.push_back(static_cast<std::uint8_t>(header.key_short3));
        out.push_back(header.fid);
        out.push_back(header.total);
        out.insert(out.end(), data.begin(), data.end());
        return out;
    }
};

inline std::vector<FragmentMessage> fragment_key(KeyId keyid, ByteView payload) {
    if (payload.empty()) fail(Errc::empty_payload, "nothing to fragment");
    if (payload.size() > kMaxKeyBytes)
        fail(Errc::key_too_large, std::to_string(payload.size()) + " bytes exceeds the " +
                                      std::to_string(kMaxKeyBytes) + "-byte fragment limit");
    const auto total = static_cast<std::uint8_t>((payload.size() + kChunkSize - 1) / kChunkSize);
    std::vector<FragmentMessage> out;
    out.reserve(total);
    for (std::size_t fid = 0; fid < total; ++fid) {
        auto chunk = payload.subspan(fid * kChunkSize, std::min(kChunkSize, payload.size() - fid * kChunkSize));
        out.push_back(FragmentMessage{{keyid.short3(), static_cast<std::uint8_t>(fid), total},
                                      Bytes(chunk.begin(), chunk.end())});
    }
    return out;
}

inline FragmentMessage decode_fragment(ByteView payload) {
    if (payload.size() <= kFragmentHeaderSize)
        fail(Errc::payload_too_short, "fragment of " + std::to_string(payload.size()) + " bytes carries no data");
    if (payload.size() > kMaxDataPayload)
        fail(Errc::payload_too_large, "fragment of " + std::to_string(payload.size()) + " bytes exceeds 80");
    FragmentMessage m;
    m.header.key_short3 = std::uint32_t{payload[0]} << 16 | std::uint32_t{payload[1]} << 8 | payload[2];
    m.header.fid = payload[3];
    m.header.total = payload[4];
    if (m.header.total == 0 || m.header.fid >= m.header.total)
        fail(Errc::header_invariant_violated, "fragment header fid=" + std::to_string(m.header.fid) +
                                                  " total=" + std::to_string(m.header.total));
    m.data.assign(payload.begin() + kFragmentHeaderSize, payload.end());
    return m;
}

/// Steps 3-8 of retrieval over raw data payloads in any order: decode, keep
/// fragments for `keyid`, check the headers agree and every fid is present,
/// then concatenate by fid. Payloads that are not fragments are skipped.
inline Bytes reassemble_fragments(const std::vector<Bytes>& payloads, KeyId keyid) {
    std::vector<FragmentMessage> decoded;
    for (const auto& p : payloads) {
        try {
            decoded.push_back(decode_fragment(p));
        } catch (const Error&) {
        }
    }
    if (decoded.empty()) fail(Errc::no_fragments_found, "no key fragments at this address");

    std::optional<std::uint8_t> total;
    std::map<std::uint8_t, const Bytes*> by_fid;
    for (const auto& m : decoded) {
        if (m.header.key_short3 != keyid.short3()) continue;
        if (total && *total != m.header.total)
            fail(Errc::inconsistent_headers, "fragments of " + keyid.hex() + " disagree on the total count");
        total = m.header.total;
        auto [it, inserted] = by_fid.emplace(m.header.fid, &m.data);
        if (!inserted && *it->second != m.data)
            fail(Errc::duplicate_fragment, "fragment " + std::to_string(m.header.fid) + " appears with different data");
    }
    if (!total) fail(Errc::key_id_mismatch, "no fragment matches key id " + keyid.hex());

    std::vector<std::uint8_t> missing;
    for (unsigned fid = 0; fid < *total; ++fid)
        if (!by_fid.contains(static_cast<std::uint8_t>(fid))) missing.push_back(static_cast<std::uint8_t>(fid));
    if (!missing.empty()) {
        std::string list;
        for (auto f : missing) list += (list.empty() ? "" : ",") + std::to_string(f);
        throw IncompleteKeyError(missing, "key " + keyid.hex() + " is missing fragments " + list);
    }
    Bytes out;
    for (const auto& [fid, data] : by_fid) out.insert(out.end(), data->begin(), data->end());
    return out;
}

/// Collects the data payloads confirmed at `owner_address` and reassembles
/// the key. The caller parses the bytes (decode_certificate).
inline Bytes retrieve_key(const Address& owner_address, KeyId keyid, const Ledger& ledger) {
    std::vector<Bytes> payloads;
    for (auto& r : ledger.list_data_by_address(owner_address)) payloads.push_back(std::move(r.payload));
    if (payloads.empty()) fail(Errc::no_fragments_found, "no data transactions pay " + owner_address.str());
    return reassemble_fragments(payloads, keyid);
}

struct StorageReceipt {
    KeyId keyid;
    Address owner_address;
    std::vector<Hash256> txids; // index = fid
    std::size_t total = 0;
};

/// Funds ran out after some fragments were submitted. Those stay in the
/// ledger; pass stored_txids() back to store_payload to resume.
class PartialStorageError : public Error {
public:
    PartialStorageError(std::vector<Hash256> stored, Errc cause, const std::string& what)
        : Error(Errc::partial_storage, what), stored_(std::move(stored)), cause_(cause) {}

    const std::vector<Hash256>& stored_txids() const noexcept { return stored_; }
    Errc cause() const noexcept { return cause_; }

private:
    std::vector<Hash256> stored_;
    Errc cause_;
};

inline Amount storage_cost(std::size_t fragments, const LedgerParams& params) {
    return (kStorageFee + params.dust) * fragments;
}

/// One data transaction per fragment, in fid order, each paying dust to
/// `owner_address`. Transactions chain through pending change (minconf 0) so
/// the whole key can be submitted before a block is mined. `resume` lists the
/// txids of fragments already stored by an earlier interrupted call.
inline StorageReceipt store_payload(Ledger& ledger, Wallet& wallet, KeyId keyid, ByteView payload,
                                    const Address& owner_address, std::vector<Hash256> resume = {}) {
    auto fragments = fragment_key(keyid, payload);
    if (resume.size() > fragments.size()) fail(Errc::invalid_argument, "more resumed fragments than the key has");
    auto remaining = fragments.size() - resume.size();
    auto need = storage_cost(remaining, ledger.params());
    if (ledger.balance(wallet, 0) < need)
        fail(Errc::insufficient_funds, "storing " + std::to_string(remaining) + " fragments needs " +
                                           format_amount(need) + ", wallet holds " +
                                           format_amount(ledger.balance(wallet, 0)));

    StorageReceipt receipt{keyid, owner_address, std::move(resume), fragments.size()};
    SendOptions opts;
    opts.minconf = 0;
    for (auto i = receipt.txids.size(); i < fragments.size(); ++i) {
        try {
            receipt.txids.push_back(ledger.send_data(wallet, owner_address, fragments[i].encode(), kStorageFee, opts));
        } catch (const Error& e) {
            if (receipt.txids.empty()) throw;
            throw PartialStorageError(receipt.txids, e.code(),
                                      "stored " + std::to_string(receipt.txids.size()) + " of " +
                                          std::to_string(fragments.size()) + " fragments: " + e.what());
        }
    }
    return receipt;
}

/// Stores the certificate's binary serialization under its key id.
inline StorageReceipt store_key(Ledger& ledger, Wallet& wallet, const BitcoinPgpCertificate& cert,
                                const Address& owner_address) {
    return store_payload(ledger, wallet, cert.key_id(), encode_certificate(cert), owner_address);
}

inline BitcoinPgpCertificate fetch_certificate(const Address& owner_address, KeyId keyid, const Ledger& ledger) {
    auto cert = decode_certificate(retrieve_key(owner_address, keyid, ledger));
    if (cert.key_id() != keyid) fail(Errc::key_id_mismatch, "reassembled certificate has key id " + cert.key_id().hex());
    return cert;
}

} // namespace btcpgp
