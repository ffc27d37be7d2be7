#pragma once

#include <btcpgp/certificate.hpp>
#include <btcpgp/ledger.hpp>

#include <map>
#include <set>
#include <sstream>

namespace btcpgp {

/// Incentive paid owner -> endorser after every endorsement. Not configurable.
inline constexpr Amount kEndorsementFee = Amount::sats(100'000);
inline constexpr Amount kDefaultRevocationAmount = Amount::sats(1'700);

// Transaction comments written by the protocol steps. Only the verify tag is
// load-bearing (trust_weight uses it to pair Tx-1 with its return address);
// the others annotate the ledger.
namespace tags {
inline std::string verify(KeyId id) { return "btcpgp:verify:" + id.hex(); }
inline std::string verify_return(const Hash256& tx1) { return "btcpgp:return:" + to_hex(tx1); }
inline constexpr std::string_view revoke = "btcpgp:revoke";
inline std::string endorse_fee(ByteView signature) { return "btcpgp:endorse-fee:" + to_hex(sha256(signature)); }
} // namespace tags

// ---------------------------------------------------------------------------
// identity verification (Tx-1 / Tx-2)

enum class VerificationStatus { initiated, returned, confirmed, failed };

inline const char* to_string(VerificationStatus s) {
    switch (s) {
    case VerificationStatus::initiated: return "Initiated";
    case VerificationStatus::returned: return "Returned";
    case VerificationStatus::confirmed: return "Confirmed";
    case VerificationStatus::failed: return "Failed";
    }
    return "?";
}

struct VerificationRecord {
    KeyId cert_keyid;
    Address verifier_return_address;
    Amount amount;
    Hash256 tx1{};
    std::optional<Hash256> tx2;
    VerificationStatus status = VerificationStatus::initiated;

    bool operator==(const VerificationRecord&) const = default;

    /// Short handle used by the CLI: the first 16 hex digits of Tx-1.
    std::string id() const { return to_hex(tx1).substr(0, 16); }
};

/// "<keyid hex> <return address> <amount sats> <tx1 hex> <tx2 hex|-> <status>"
inline std::string format_record(const VerificationRecord& r) {
    std::ostringstream out;
    out << r.cert_keyid.hex() << ' ' << r.verifier_return_address.str() << ' ' << r.amount.satoshis() << ' '
        << to_hex(r.tx1) << ' ' << (r.tx2 ? to_hex(*r.tx2) : "-") << ' ' << to_string(r.status);
    return out.str();
}

inline VerificationRecord parse_record(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::string keyid, addr, tx1, tx2, status;
    std::uint64_t sats = 0;
    if (!(in >> keyid >> addr >> sats >> tx1 >> tx2 >> status))
        fail(Errc::invalid_argument, "malformed verification record");
    std::optional<VerificationStatus> st;
    for (auto s : {VerificationStatus::initiated, VerificationStatus::returned, VerificationStatus::confirmed,
                   VerificationStatus::failed})
        if (status == to_string(s)) st = s;
    if (!st) fail(Errc::invalid_argument, "unknown verification status '" + status + "'");
    VerificationRecord r{KeyId::parse_hex(keyid), Address::parse(addr), Amount::sats(sats), hash_from_hex(tx1),
                         std::nullopt, *st};
    if (tx2 != "-") r.tx2 = hash_from_hex(tx2);
    return r;
}

struct RevocationStatus {
    bool revoked = false;
    std::optional<Hash256> txid;
    Amount amount;
};

/// Revoked iff a confirmed transaction spends from the identity address and
/// pays the revocation address. Payments from anyone else do not count.
inline RevocationStatus check_revocation_status(const BitcoinPgpCertificate& cert, const Ledger& ledger) {
    auto addrs = extract_addresses(cert);
    for (const auto& c : ledger.transactions_paying(addrs.revocation))
        if (c.spends_from(addrs.identity)) return {true, c.txid, c.paid_to(addrs.revocation)};
    return {};
}

/// Sends Tx-1: the verifier's stake to the certificate's identity address.
inline VerificationRecord initiate_verification(Ledger& ledger, Wallet& verifier, const BitcoinPgpCertificate& cert,
                                                Amount amount, const Address& return_address) {
    if (amount.is_zero()) fail(Errc::invalid_amount, "verification stake must be positive");
    auto addrs = extract_addresses(cert);
    if (check_revocation_status(cert, ledger).revoked)
        fail(Errc::revoked_certificate, "certificate " + cert.key_id().hex() + " is revoked");
    SendOptions opts;
    opts.comment = tags::verify(cert.key_id());
    opts.comment_to = return_address.str();
    auto tx1 = ledger.send_to_address(verifier, addrs.identity, amount, opts);
    return VerificationRecord{cert.key_id(), return_address, amount, tx1, std::nullopt, VerificationStatus::initiated};
}

/// Identity address a record's Tx-1 paid; Tx-1 always carries it as output 0.
inline Address verification_target(const Ledger& ledger, const VerificationRecord& record) {
    const auto* tx1 = ledger.transaction(record.tx1);
    if (tx1 == nullptr || tx1->outputs.empty() || !std::holds_alternative<PaymentOutput>(tx1->outputs.front()))
        fail(Errc::transaction_not_confirmed, "Tx-1 " + to_hex(record.tx1) + " not found on the ledger");
    return std::get<PaymentOutput>(tx1->outputs.front()).address;
}

/// Sends Tx-2: the owner returns exactly the staked amount from the identity address.
inline Hash256 return_verification(Ledger& ledger, Wallet& owner, VerificationRecord& record) {
    if (record.tx2 || record.status == VerificationStatus::returned || record.status == VerificationStatus::confirmed)
        fail(Errc::already_returned, "verification " + record.id() + " was already returned");
    auto conf = ledger.confirmations(record.tx1);
    if (!conf || *conf == 0)
        fail(Errc::transaction_not_confirmed, "Tx-1 " + to_hex(record.tx1) + " is not confirmed");
    auto identity = verification_target(ledger, record);
    if (!owner.owns(identity))
        fail(Errc::not_owner, "wallet '" + owner.label() + "' does not control " + identity.str());
    SendOptions opts;
    opts.from = identity;
    opts.comment = tags::verify_return(record.tx1);
    auto tx2 = ledger.send_to_address(owner, record.verifier_return_address, record.amount, opts);
    record.tx2 = tx2;
    record.status = VerificationStatus::returned;
    return tx2;
}

/// Tx-1 and Tx-2 are equal when a confirmed transaction after Tx-1 moves the
/// same amount from the identity address to the verifier's return address.
inline bool check_verification(const Ledger& ledger, VerificationRecord& record) {
    auto tx1 = ledger.find_confirmed(record.tx1);
    if (!tx1) return false;
    auto identity = verification_target(ledger, record);
    for (const auto& c : ledger.transactions_paying(record.verifier_return_address)) {
        if (c.location <= tx1->location || !c.spends_from(identity)) continue;
        for (const auto& out : c.tx->outputs) {
            auto* p = std::get_if<PaymentOutput>(&out);
            if (p && p->address == record.verifier_return_address && p->amount == record.amount) {
                if (!record.tx2) record.tx2 = c.txid;
                record.status = VerificationStatus::confirmed;
                return true;
            }
        }
    }
    if (record.tx2 && ledger.find_confirmed(*record.tx2)) record.status = VerificationStatus::failed;
    return false;
}

struct RoundTrip {
    Address verifier;
    Amount amount;
    Hash256 tx1{};
    Hash256 tx2{};
    TxLocation returned_at;
};

struct TrustWeight {
    std::vector<RoundTrip> round_trips; // ordered by Tx-2 position
    Amount effective_weight;
};

/// All confirmed verification round trips for `cert`. The effective weight
/// counts only the first round trip of each distinct verifier.
inline TrustWeight trust_weight(const BitcoinPgpCertificate& cert, const Ledger& ledger) {
    auto identity = extract_addresses(cert).identity;
    const auto tag = tags::verify(cert.key_id());
    auto returns = ledger.transactions_spending_from(identity);
    std::set<Hash256> used;

    TrustWeight tw;
    for (const auto& c : ledger.transactions_paying(identity)) {
        if (c.tx->comment != tag || !c.tx->comment_to || !Address::is_valid(*c.tx->comment_to) ||
            c.spends_from(identity))
            continue;
        auto verifier = Address::parse(*c.tx->comment_to);
        auto amount = c.paid_to(identity);
        for (const auto& r : returns) {
            if (r.location <= c.location || used.contains(r.txid)) continue;
            bool match = std::any_of(r.tx->outputs.begin(), r.tx->outputs.end(), [&](const TxOutput& o) {
                auto* p = std::get_if<PaymentOutput>(&o);
                return p && p->address == verifier && p->amount == amount;
            });
            if (!match) continue;
            used.insert(r.txid);
            tw.round_trips.push_back(RoundTrip{verifier, amount, c.txid, r.txid, r.location});
            break;
        }
    }
    std::stable_sort(tw.round_trips.begin(), tw.round_trips.end(),
                     [](const RoundTrip& a, const RoundTrip& b) { return a.returned_at < b.returned_at; });
    std::set<Address> counted;
    for (const auto& rt : tw.round_trips)
        if (counted.insert(rt.verifier).second) tw.effective_weight += rt.amount;
    return tw;
}

// ---------------------------------------------------------------------------
// revocation

/// Pays `amount` from the identity address to the revocation address.
inline Hash256 revoke_certificate(Ledger& ledger, Wallet& owner, const BitcoinPgpCertificate& cert,
                                  Amount amount = kDefaultRevocationAmount) {
    auto addrs = extract_addresses(cert);
    if (!owner.owns(addrs.identity))
        fail(Errc::not_owner, "only the certificate owner can revoke " + cert.key_id().hex());
    if (amount.is_zero()) fail(Errc::invalid_amount, "revocation amount must be positive");
    if (check_revocation_status(cert, ledger).revoked)
        fail(Errc::already_revoked, "certificate " + cert.key_id().hex() + " is already revoked");
    for (const auto& tx : ledger.pending()) {
        bool pays_rev = std::any_of(tx.outputs.begin(), tx.outputs.end(), [&](const TxOutput& o) {
            auto* p = std::get_if<PaymentOutput>(&o);
            return p && p->address == addrs.revocation;
        });
        auto from = ledger.pending_input_addresses(tx);
        if (pays_rev && std::find(from.begin(), from.end(), addrs.identity) != from.end())
            fail(Errc::already_revoked, "a revocation for " + cert.key_id().hex() + " is already pending");
    }
    SendOptions opts;
    opts.from = addrs.identity;
    opts.comment = std::string(tags::revoke);
    return ledger.send_to_address(owner, addrs.revocation, amount, opts);
}

// ---------------------------------------------------------------------------
// endorsement and validity

enum class Validity { invalid, marginal, valid };

inline const char* to_string(Validity v) {
    switch (v) {
    case Validity::invalid: return "Invalid";
    case Validity::marginal: return "Marginal Validity";
    case Validity::valid: return "Valid";
    }
    return "?";
}

/// Explicit consent to endorse; there is deliberately no default.
enum class Confirm : bool { no = false, yes = true };

struct EndorserCredentials {
    const BitcoinPgpCertificate& certificate;
    const LockedPrivateKey& private_key;
    std::string_view passphrase;
};

struct EndorsementResult {
    BitcoinPgpCertificate certificate; // target with the endorsement appended
    Endorsement endorsement;
    std::optional<std::string> warning; // set when the fee could not be paid
};

/// Bytes an endorser signs: the target's canonical bytes bound to the
/// endorsement's own trust level, address and signing time.
inline Bytes endorsement_message(const BitcoinPgpCertificate& target, const Endorsement& e) {
    ByteWriter w;
    w.str("btcpgp-endorsement-v1").var(canonical_bytes(target));
    w.u64(e.endorser_keyid.id64).u8(static_cast<std::uint8_t>(e.trust_level)).str(e.endorser_address.str());
    w.i64(e.signed_at);
    return std::move(w).take();
}

inline bool verify_endorsement(const BitcoinPgpCertificate& target, const Endorsement& e) {
    if (PublicKeyMaterial{std::string(PgpKey::kRsa), e.endorser_public_key}.key_id() != e.endorser_keyid) return false;
    try {
        return PgpKey::from_public_der(e.endorser_public_key).verify(endorsement_message(target, e), e.signature);
    } catch (const Error&) {
        return false;
    }
}

/// True when the endorsement's fee transaction is confirmed, spends from the
/// target's identity address and pays exactly the fixed fee to the endorser.
inline bool check_endorsement_fee(const Ledger& ledger, const BitcoinPgpCertificate& target, const Endorsement& e) {
    if (!e.fee_txid) return false;
    auto c = ledger.find_confirmed(*e.fee_txid);
    if (!c) return false;
    auto identity = extract_addresses(target).identity;
    return c->spends_from(identity) && c->paid_to(e.endorser_address) == kEndorsementFee;
}

/// Signs `target` on behalf of a verified endorser, then pays the fixed fee
/// from the owner's identity address. The signature is produced first; if the
/// fee cannot be paid the endorsement is still returned, without fee_txid and
/// with a FeePaymentFailed warning.
inline EndorsementResult endorse_certificate(Ledger& ledger, const EndorserCredentials& endorser,
                                             const Address& endorser_address, Wallet& owner_wallet,
                                             const BitcoinPgpCertificate& target, TrustLevel trust, Confirm confirm) {
    if (confirm != Confirm::yes) fail(Errc::missing_confirmation, "endorsement requires explicit confirmation");
    auto addrs = extract_addresses(target);
    if (check_revocation_status(target, ledger).revoked)
        fail(Errc::revoked_certificate, "certificate " + target.key_id().hex() + " is revoked");
    auto tw = trust_weight(target, ledger);
    if (std::none_of(tw.round_trips.begin(), tw.round_trips.end(),
                     [&](const RoundTrip& rt) { return rt.verifier == endorser_address; }))
        fail(Errc::not_confirmed_verifier,
             endorser_address.str() + " has no confirmed verification of " + target.key_id().hex());
    if (endorser.private_key.key_id != endorser.certificate.key_id())
        fail(Errc::invalid_argument, "private key does not belong to the endorser certificate");

    auto key = unlock_private_key(endorser.private_key, endorser.passphrase);
    Endorsement e{endorser.certificate.key_id(), endorser.certificate.public_key.der, endorser_address, trust,
                  ledger.current_time(), {}, std::nullopt};
    e.signature = key.sign(endorsement_message(target, e));

    EndorsementResult result{target, e, std::nullopt};
    try {
        SendOptions opts;
        opts.from = addrs.identity;
        opts.comment = tags::endorse_fee(e.signature);
        result.endorsement.fee_txid = ledger.send_to_address(owner_wallet, endorser_address, kEndorsementFee, opts);
    } catch (const Error& err) {
        result.warning = std::string(token(Errc::fee_payment_failed)) + ": " + err.token() + ": " + err.what();
    }
    result.certificate.endorsements.push_back(result.endorsement);
    return result;
}

struct ValidityReport {
    Validity validity = Validity::invalid;
    std::size_t complete = 0;
    std::size_t marginal = 0;
    std::vector<std::string> warnings;
};

/// >=1 complete or >=2 marginal endorsements: Valid; exactly one marginal:
/// Marginal Validity; otherwise Invalid. Each endorser counts once at its
/// highest level; bad signatures and self-endorsements are ignored.
inline ValidityReport assess_validity(const BitcoinPgpCertificate& target, bool revoked) {
    ValidityReport report;
    if (revoked) {
        report.warnings.push_back("certificate is revoked");
        return report;
    }
    std::map<KeyId, TrustLevel> best;
    for (const auto& e : target.endorsements) {
        if (e.endorser_keyid == target.key_id()) {
            report.warnings.push_back("ignoring self-endorsement");
            continue;
        }
        if (!verify_endorsement(target, e)) {
            report.warnings.push_back("ignoring endorsement by " + e.endorser_keyid.hex() + ": bad signature");
            continue;
        }
        auto& level = best[e.endorser_keyid];
        level = std::max(level, e.trust_level);
    }
    for (const auto& [id, level] : best) {
        if (level == TrustLevel::complete) ++report.complete;
        if (level == TrustLevel::marginal) ++report.marginal;
    }
    if (report.complete >= 1 || report.marginal >= 2)
        report.validity = Validity::valid;
    else if (report.marginal == 1)
        report.validity = Validity::marginal;
    return report;
}

inline Validity compute_validity(const BitcoinPgpCertificate& target, bool revoked = false) {
    return assess_validity(target, revoked).validity;
}

inline Validity compute_validity(const BitcoinPgpCertificate& target, const Ledger& ledger) {
    return compute_validity(target, check_revocation_status(target, ledger).revoked);
}

} // namespace btcpgp
