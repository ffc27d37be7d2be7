#pragma once

#include <btcpgp/btcpgp.hpp>

#include <set>

#include <gtest/gtest.h>

namespace btcpgp::test {

/// Ledger plus a funded "bank" wallet that can pay anyone.
struct Chain {
    Ledger ledger;
    RandomSource rng;
    Wallet bank{"bank"};

    explicit Chain(std::uint64_t seed = 1, unsigned blocks = 2) : rng(RandomSource::seeded(seed)) {
        bank.new_address(rng);
        for (unsigned i = 0; i < blocks; ++i) ledger.mine_block(bank);
    }

    Wallet wallet(const std::string& label) {
        Wallet w(label);
        w.new_address(rng);
        return w;
    }

    void pay(const Address& to, Amount a) { ledger.send_to_address(bank, to, a); }

    void mine(unsigned n = 1) {
        for (unsigned i = 0; i < n; ++i) ledger.mine_block(bank);
    }
};

/// Hand-built transaction spending `inputs` (all owned by `w`), signed.
inline Transaction raw_spend(const Wallet& w, const std::vector<OutPoint>& inputs, const Ledger& ledger,
                             std::vector<TxOutput> outputs) {
    Transaction tx;
    tx.outputs = std::move(outputs);
    for (const auto& op : inputs) {
        const auto& entry = ledger.utxo_set().at(op);
        const auto& pub = w.key_for(entry.output.address).public_key();
        tx.inputs.push_back(TxInput{op, Bytes(pub.begin(), pub.end()), {}});
    }
    auto sighash = tx.signature_hash();
    for (auto& in : tx.inputs) in.signature = w.key_for(Address::from_public_key(in.public_key)).sign(sighash);
    return tx;
}

inline GeneratedCertificate make_cert(Wallet& owner, RandomSource& rng, const std::string& name = "Alice",
                                      unsigned bits = 1024) {
    CertificateParams p;
    p.name = name;
    p.email = name + "@example.org";
    p.passphrase = "pwd";
    p.key_length = bits;
    p.created_at = 1'500'000'000;
    return generate_certificate(p, owner, rng);
}

/// An endorsement signed offline (no fee transaction).
inline Endorsement offline_endorsement(const BitcoinPgpCertificate& target, const GeneratedCertificate& endorser,
                                       TrustLevel level, std::int64_t signed_at = 1'500'000'000) {
    Endorsement e{endorser.certificate.key_id(), endorser.certificate.public_key.der,
                  extract_addresses(endorser.certificate).identity, level, signed_at, {}, std::nullopt};
    e.signature = unlock_private_key(endorser.private_key, "pwd").sign(endorsement_message(target, e));
    return e;
}

/// Token of the Error `fn` throws, or "none".
template <class Fn>
std::string error_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.token();
    }
    return "none";
}

} // namespace btcpgp::test
