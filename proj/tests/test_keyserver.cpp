#include "support.hpp"

#include <algorithm>

using namespace btcpgp;
using namespace btcpgp::test;

namespace {

constexpr KeyId kKey{0x0102030405A1B2C3};

std::size_t ceil_div(std::size_t n, std::size_t d) { return n / d + (n % d != 0); }

Bytes random_payload(RandomSource& rng, std::size_t n) { return rng.bytes(n); }

std::vector<Bytes> encoded(const std::vector<FragmentMessage>& frags) {
    std::vector<Bytes> out;
    for (const auto& f : frags) out.push_back(f.encode());
    return out;
}

} // namespace

TEST(Fragment, CountFollowsCeiling) {
    Bytes payload(400, 0x5A);
    for (std::size_t n = 1; n <= 400; ++n) {
        auto frags = fragment_key(kKey, ByteView(payload).first(n));
        ASSERT_EQ(frags.size(), ceil_div(n, 75)) << n;
    }
    EXPECT_EQ(fragment_key(kKey, Bytes(75)).size(), 1u);
}

TEST(Fragment, BoundarySizes) {
    auto sizes = [](std::size_t n) {
        std::vector<std::size_t> out;
        for (const auto& f : fragment_key(kKey, Bytes(n))) out.push_back(f.data.size());
        return out;
    };
    EXPECT_EQ(sizes(76), (std::vector<std::size_t>{75, 1}));
    EXPECT_EQ(sizes(151), (std::vector<std::size_t>{75, 75, 1}));
    EXPECT_EQ(fragment_key(kKey, Bytes(19'125)).size(), 255u);
    EXPECT_EQ(error_of([] { fragment_key(kKey, Bytes{}); }), "EmptyPayload");
    EXPECT_EQ(error_of([] { fragment_key(kKey, Bytes(19'126)); }), "KeyTooLarge");
}

TEST(Fragment, HeaderWireFormat) {
    auto frags = fragment_key(kKey, Bytes(151, 0xEE));
    auto wire = frags[1].encode();
    ASSERT_EQ(wire.size(), 80u);
    EXPECT_EQ(wire[0], 0xA1);
    EXPECT_EQ(wire[1], 0xB2);
    EXPECT_EQ(wire[2], 0xC3);
    EXPECT_EQ(wire[3], 1);
    EXPECT_EQ(wire[4], 3);
    EXPECT_EQ(frags[2].encode().size(), 6u);
    for (const auto& f : frags) {
        EXPECT_EQ(decode_fragment(f.encode()), f);
        EXPECT_LE(f.encode().size(), kMaxDataPayload);
    }
}

TEST(Fragment, DecodeErrors) {
    EXPECT_EQ(error_of([] { decode_fragment(Bytes{1, 2, 3, 0, 1}); }), "PayloadTooShort");
    EXPECT_EQ(error_of([] { decode_fragment(Bytes{1, 2, 3, 3, 2, 9}); }), "HeaderInvariantViolated");
    EXPECT_EQ(error_of([] { decode_fragment(Bytes{1, 2, 3, 0, 0, 9}); }), "HeaderInvariantViolated");
    EXPECT_EQ(error_of([] { decode_fragment(Bytes(81, 1)); }), "PayloadTooLarge");
}

TEST(Reassemble, AnyOrderRoundTrips) {
    auto rng = RandomSource::seeded(std::uint64_t{12});
    for (int trial = 0; trial < 50; ++trial) {
        auto payload = random_payload(rng, 1 + rng.uniform(2'000));
        auto wire = encoded(fragment_key(kKey, payload));
        for (std::size_t i = wire.size(); i > 1; --i) std::swap(wire[i - 1], wire[rng.uniform(i)]);
        EXPECT_EQ(reassemble_fragments(wire, kKey), payload);
    }
}

TEST(Reassemble, MissingFragmentSweep) {
    auto rng = RandomSource::seeded(std::uint64_t{13});
    auto wire = encoded(fragment_key(kKey, random_payload(rng, 600)));
    for (std::size_t drop = 0; drop < wire.size(); ++drop) {
        auto partial = wire;
        partial.erase(partial.begin() + static_cast<long>(drop));
        try {
            reassemble_fragments(partial, kKey);
            ADD_FAILURE() << "missing fid " << drop << " went unnoticed";
        } catch (const IncompleteKeyError& e) {
            EXPECT_EQ(e.missing_fids(), std::vector<std::uint8_t>{static_cast<std::uint8_t>(drop)});
        }
    }
}

TEST(Reassemble, HeaderConflicts) {
    auto wire = encoded(fragment_key(kKey, Bytes(200, 1)));
    EXPECT_EQ(error_of([&] { reassemble_fragments(wire, KeyId{0x999999}); }), "KeyIdMismatch");
    EXPECT_EQ(error_of([&] { reassemble_fragments({}, kKey); }), "NoFragmentsFound");
    EXPECT_EQ(error_of([&] { reassemble_fragments({Bytes{1, 2}}, kKey); }), "NoFragmentsFound");

    auto dup = wire;
    dup.push_back(wire[1]); // identical duplicate is harmless
    EXPECT_EQ(reassemble_fragments(dup, kKey), Bytes(200, 1));
    dup.back().back() ^= 0xFF;
    EXPECT_EQ(error_of([&] { reassemble_fragments(dup, kKey); }), "DuplicateFragment");

    auto other_total = encoded(fragment_key(kKey, Bytes(40, 2)));
    auto mixed = wire;
    mixed.push_back(other_total[0]);
    EXPECT_EQ(error_of([&] { reassemble_fragments(mixed, kKey); }), "InconsistentHeaders");
}

TEST(KeyServer, StoreRetrieveThroughLedger) {
    Chain c(5, 4);
    Wallet alice("alice");
    auto gen = make_cert(alice, c.rng);
    auto owner = extract_addresses(gen.certificate).identity;
    auto payload = encode_certificate(gen.certificate);
    auto before = c.ledger.list_data_by_address(owner).size();
    auto receipt = store_key(c.ledger, c.bank, gen.certificate, owner);
    EXPECT_EQ(receipt.total, ceil_div(payload.size(), 75));
    EXPECT_EQ(receipt.txids.size(), receipt.total);
    EXPECT_EQ(error_of([&] { retrieve_key(owner, gen.certificate.key_id(), c.ledger); }), "NoFragmentsFound");
    auto r = c.ledger.mine_block(c.bank);
    EXPECT_TRUE(r.rejected.empty());
    EXPECT_EQ(c.ledger.list_data_by_address(owner).size(), before + receipt.total);
    EXPECT_EQ(retrieve_key(owner, gen.certificate.key_id(), c.ledger), payload);
    EXPECT_EQ(fetch_certificate(owner, gen.certificate.key_id(), c.ledger), gen.certificate);
    EXPECT_EQ(error_of([&] { retrieve_key(owner, KeyId{gen.certificate.key_id().id64 ^ 1}, c.ledger); }),
              "KeyIdMismatch");

    // every storage transaction pays exactly the 0.001 fee: inputs - outputs
    for (const auto& txid : receipt.txids) {
        auto tx = c.ledger.find_confirmed(txid);
        ASSERT_TRUE(tx);
        EXPECT_EQ(tx->paid_to(owner), Amount::sats(546));
    }
    Amount fees = r.block.transactions[0].output_total() - Amount::coins(50);
    EXPECT_EQ(fees, kStorageFee * receipt.total);
}

TEST(KeyServer, ScatteredAcrossBlocks) {
    Chain c(6, 3);
    Wallet owner_wallet = c.wallet("owner");
    auto owner = owner_wallet.primary_address();
    auto rng = RandomSource::seeded(std::uint64_t{99});
    auto payload = random_payload(rng, 450); // six fragments
    auto frags = fragment_key(kKey, payload);
    ASSERT_EQ(frags.size(), 6u);
    // confirm in the order 5,3 | 1,0 | 4,2 over three blocks
    std::vector<std::vector<int>> blocks{{5, 3}, {1, 0}, {4, 2}};
    for (const auto& blk : blocks) {
        for (int fid : blk) c.ledger.send_data(c.bank, owner, frags[fid].encode(), kStorageFee);
        c.mine();
    }
    auto records = c.ledger.list_data_by_address(owner);
    std::set<std::uint64_t> heights;
    for (const auto& r : records) heights.insert(r.height);
    EXPECT_EQ(heights.size(), 3u);
    EXPECT_EQ(retrieve_key(owner, kKey, c.ledger), payload);
}

TEST(KeyServer, TwoKeysShareAnAddress) {
    Chain c(7, 3);
    auto owner = c.wallet("owner").primary_address();
    auto rng = RandomSource::seeded(std::uint64_t{100});
    KeyId k1{0x111111}, k2{0x222222};
    auto p1 = random_payload(rng, 300), p2 = random_payload(rng, 170);
    store_payload(c.ledger, c.bank, k1, p1, owner);
    store_payload(c.ledger, c.bank, k2, p2, owner);
    c.mine();
    EXPECT_EQ(retrieve_key(owner, k1, c.ledger), p1);
    EXPECT_EQ(retrieve_key(owner, k2, c.ledger), p2);
}

TEST(KeyServer, CensoredFragmentReported) {
    Chain c(8, 3);
    auto owner = c.wallet("owner").primary_address();
    auto frags = fragment_key(kKey, Bytes(300, 3));
    for (std::size_t i = 0; i < frags.size(); ++i)
        if (i != 2) c.ledger.send_data(c.bank, owner, frags[i].encode(), kStorageFee, {0, {}, {}, {}});
    c.mine();
    try {
        retrieve_key(owner, kKey, c.ledger);
        FAIL() << "expected IncompleteKey";
    } catch (const IncompleteKeyError& e) {
        EXPECT_STREQ(e.token(), "IncompleteKey");
        EXPECT_EQ(e.missing_fids(), std::vector<std::uint8_t>{2});
    }
}

TEST(KeyServer, ExactFundingBoundary) {
    Chain c(9, 2);
    auto owner = c.wallet("owner").primary_address();
    // exact need for n fragments is n * (0.001 + dust)
    const auto need = Amount::sats(3 * (100'000 + 546));
    Wallet poor = c.wallet("poor");
    c.pay(poor.primary_address(), need - Amount::sats(1));
    c.mine();
    EXPECT_EQ(error_of([&] { store_payload(c.ledger, poor, kKey, Bytes(225, 1), owner); }), "InsufficientFunds");
    EXPECT_TRUE(c.ledger.pending().empty());

    Wallet exact = c.wallet("exact");
    c.pay(exact.primary_address(), need);
    c.mine();
    auto receipt = store_payload(c.ledger, exact, kKey, Bytes(225, 1), owner);
    EXPECT_EQ(receipt.total, 3u);
    EXPECT_TRUE(c.ledger.mine_block(c.bank).rejected.empty());
    EXPECT_TRUE(c.ledger.balance(exact).is_zero());
    EXPECT_EQ(retrieve_key(owner, kKey, c.ledger), Bytes(225, 1));
}

TEST(KeyServer, ResumeAfterPartialStorage) {
    Chain c(10, 3);
    auto owner = c.wallet("owner").primary_address();
    auto payload = Bytes(500, 4);
    auto frags = fragment_key(kKey, payload);
    std::vector<Hash256> stored;
    SendOptions opts;
    opts.minconf = 0;
    for (int i = 0; i < 3; ++i) stored.push_back(c.ledger.send_data(c.bank, owner, frags[i].encode(), kStorageFee, opts));
    auto receipt = store_payload(c.ledger, c.bank, kKey, payload, owner, stored);
    EXPECT_EQ(receipt.txids.size(), frags.size());
    EXPECT_TRUE(std::equal(stored.begin(), stored.end(), receipt.txids.begin()));
    c.mine();
    EXPECT_EQ(retrieve_key(owner, kKey, c.ledger), payload);
}
