#pragma once

#include <btcpgp/armor.hpp>
#include <btcpgp/trustops.hpp>

namespace btcpgp {

/// Amounts of the scripted Alice/Bob scenario, in satoshis.
namespace walkthrough {
inline constexpr Amount kBobFunding = Amount::sats(3'367'300);
inline constexpr Amount kAliceFunding = Amount::sats(342'400);
inline constexpr Amount kVerificationAmount = Amount::sats(856'179);
inline constexpr Amount kRevocationAmount = Amount::sats(1'700);
} // namespace walkthrough

struct WalkthroughParties {
    Wallet bank{"bank"};
    Wallet alice{"alice"};
    Wallet bob{"bob"};
};

struct WalkthroughTranscript {
    std::vector<std::string> lines;
    BitcoinPgpCertificate certificate;
    LockedPrivateKey private_key;
    std::optional<VerificationRecord> record;
    Hash256 revocation_txid{};
    bool verified = false;
    bool revoked = false;
    Amount bob_start;
    Amount alice_before_return;

    std::string text() const {
        std::string out;
        for (const auto& l : lines) out += l + '\n';
        return out;
    }
};

/// Alice certifies a key, Bob verifies it with a round trip, Alice later
/// revokes it. Every send is mined straight away by the bank wallet.
inline WalkthroughTranscript run_paper_walkthrough(Ledger& ledger, WalkthroughParties& p, RandomSource& rng,
                                                   unsigned key_length = 2048) {
    using namespace walkthrough;
    WalkthroughTranscript t;
    auto say = [&](std::string line) { t.lines.push_back(std::move(line)); };

    if (p.bank.addresses().empty()) p.bank.new_address(rng);
    if (p.bob.addresses().empty()) p.bob.new_address(rng);
    ledger.mine_block(p.bank);
    ledger.mine_block(p.bank); // coinbase needs a confirmation before it is spent

    // 1. certificate generation
    CertificateParams params;
    params.name = "Alice";
    params.email = "alice@bitcoinpgp.com";
    params.passphrase = "pwd";
    params.key_length = key_length;
    params.created_at = ledger.current_time();
    auto generated = generate_certificate(params, p.alice, rng);
    t.certificate = generated.certificate;
    t.private_key = generated.private_key;
    auto addrs = extract_addresses(t.certificate);
    say("1. Alice generates a Bitcoin-based PGP certificate");
    say("Key-Type: " + params.key_type);
    say("Name-Comment: " + addrs.identity.str() + "|" + addrs.revocation.str());
    say("Passphrase: " + params.passphrase);
    say("Name-Real: " + params.name);
    say("Name-Email: " + params.email);
    say("Key-Length: " + std::to_string(params.key_length));
    say("KeyID: " + t.certificate.key_id().hex());

    ledger.send_to_address(p.bank, p.bob.primary_address(), kBobFunding);
    ledger.send_to_address(p.bank, addrs.identity, kAliceFunding);
    ledger.mine_block(p.bank);

    // 2. out of band
    auto bobs_copy = parse_certificate(serialize_certificate(t.certificate));
    say("2. Alice sends the certificate to Bob");

    // 3. Tx-1
    say("3. Bob sends an identity-verification transaction");
    t.bob_start = ledger.balance(p.bob);
    say("Current Balance is: " + format_amount(t.bob_start));
    const auto bob_return = p.bob.primary_address();
    t.record = initiate_verification(ledger, p.bob, bobs_copy, kVerificationAmount, bob_return);
    say("Sending " + format_amount(kVerificationAmount) + " to " + addrs.identity.str());
    ledger.mine_block(p.bank);

    // 4. Tx-2
    say("4. Alice returns the identity-verification funds");
    t.alice_before_return = ledger.balance_of(addrs.identity);
    say("Current Balance is: " + format_amount(t.alice_before_return));
    return_verification(ledger, p.alice, *t.record);
    say("Sending " + format_amount(t.record->amount) + " to " + bob_return.str());
    ledger.mine_block(p.bank);

    // 5. check
    say("5. Bob checks for the returned funds");
    say("Amount Sent: " + format_amount(t.record->amount));
    t.verified = check_verification(ledger, *t.record);
    if (t.verified) say("Transaction of " + format_amount(t.record->amount) + " Found!");
    say(std::string("Result = ") + (t.verified ? "True" : "False"));

    // 6. validity before revocation
    say("6. Bob checks the certificate");
    auto before = check_revocation_status(bobs_copy, ledger);
    say(std::string("Result = ") + (!before.revoked && verify_self_signature(bobs_copy) ? "True" : "False"));

    // 7. revocation
    say("7. Alice revokes the certificate");
    t.revocation_txid = revoke_certificate(ledger, p.alice, t.certificate, kRevocationAmount);
    ledger.mine_block(p.bank);
    say("Sent Revocation Transaction of Amount: " + format_amount(kRevocationAmount) +
        " to Revocation Address: " + addrs.revocation.str());
    say(addrs.identity.str());
    if (check_revocation_status(t.certificate, ledger).revoked) say("Certificate Successfully Revoked");

    // 8. validity after revocation
    say("8. Bob checks the certificate again");
    auto after = check_revocation_status(bobs_copy, ledger);
    t.revoked = after.revoked;
    if (after.revoked) {
        say("Bitcoin Address Verified");
        say("Amount Sent: " + format_amount(after.amount));
        say("Revoke Transaction of " + format_amount(after.amount) + " Found!");
    }
    say(std::string("Status: ") + (after.revoked ? "Revoked" : "Valid"));
    return t;
}

} // namespace btcpgp
