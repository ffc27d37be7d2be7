// btcpgp: command-line front end over a local state directory.
//
//   state-dir/
//     config            key=value settings
//     ledger.dat        confirmed blocks
//     pending.dat       pending pool, one transaction hex per line
//     wallets/<l>.dat   wallets
//     records/<id>.rec  verification records
//     keys/<keyid>.sec  passphrase-locked private keys
//
// Exit codes: 0 success (a False result is still success), 1 usage, 2 domain error.

#include <btcpgp/btcpgp.hpp>

#include <CLI11.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace btcpgp;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, std::string_view text) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) fail(Errc::io_error, "cannot write " + p.string());
    }
    fs::rename(tmp, p);
}

struct Globals {
    std::string state_dir = ".btcpgp";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> time;
    bool auto_mine = false;
};

class State {
public:
    explicit State(const Globals& g) : dir_(g.state_dir), globals_(g) {
        fs::create_directories(dir_ / "wallets");
        fs::create_directories(dir_ / "records");
        fs::create_directories(dir_ / "keys");
        lock_fd_ = ::open((dir_ / "lock").c_str(), O_CREAT | O_RDWR, 0600);
        if (lock_fd_ < 0 || ::flock(lock_fd_, LOCK_EX) != 0) fail(Errc::io_error, "cannot lock " + dir_.string());

        if (fs::exists(dir_ / "config")) {
            std::istringstream in(read_file(dir_ / "config"));
            for (std::string line; std::getline(in, line);)
                if (auto eq = line.find('='); eq != std::string::npos) config_[line.substr(0, eq)] = line.substr(eq + 1);
        } else {
            config_ = {{"auto_mine", "false"},
                       {"payment_fee", "0.00001"},
                       {"default_revocation_amount", "0.000017"},
                       {"fixed_clock", g.time ? "true" : "false"},
                       {"genesis_time", std::to_string(g.time.value_or(LedgerParams{}.genesis_time))},
                       {"rng_counter", "0"}};
        }
        params_.fixed_clock = config_["fixed_clock"] == "true";
        params_.genesis_time = std::stoll(config_["genesis_time"]);
        params_.payment_fee = parse_amount(config_["payment_fee"]);

        if (fs::exists(dir_ / "ledger.dat")) {
            ledger_.emplace(load_ledger(dir_ / "ledger.dat", params_));
            if (fs::exists(dir_ / "pending.dat")) {
                std::istringstream in(read_file(dir_ / "pending.dat"));
                for (std::string line; std::getline(in, line);)
                    if (!line.empty()) ledger_->submit(Transaction::decode(from_hex(line, Errc::corrupt_ledger)));
            }
        } else {
            ledger_.emplace(params_);
        }

        // Each invocation draws from its own slice of the seeded stream so
        // replays of the same command sequence stay identical.
        if (g.seed) {
            auto counter = std::stoull(config_["rng_counter"]);
            ByteWriter w;
            w.u64(*g.seed).u64(counter);
            rng_.emplace(RandomSource::seeded(w.bytes()));
            config_["rng_counter"] = std::to_string(counter + 1);
        } else {
            rng_.emplace(RandomSource::entropy());
        }
    }

    ~State() {
        if (lock_fd_ >= 0) ::close(lock_fd_);
    }

    Ledger& ledger() { return *ledger_; }
    RandomSource& rng() { return *rng_; }
    bool auto_mine() const { return globals_.auto_mine || config_.at("auto_mine") == "true"; }
    Amount default_revocation_amount() { return parse_amount(config_["default_revocation_amount"]); }

    std::int64_t now() const { return globals_.time.value_or(ledger_->current_time()); }

    fs::path wallet_path(const std::string& label) const { return dir_ / "wallets" / (label + ".dat"); }

    Wallet& wallet(const std::string& label) {
        if (auto it = wallets_.find(label); it != wallets_.end()) return it->second;
        if (!fs::exists(wallet_path(label))) fail(Errc::invalid_argument, "no wallet named '" + label + "'");
        return wallets_.emplace(label, Wallet::load(wallet_path(label))).first->second;
    }

    Wallet& wallet_or_create(const std::string& label) {
        if (!wallets_.contains(label) && !fs::exists(wallet_path(label))) {
            Wallet w(label);
            w.new_address(rng());
            wallets_.emplace(label, std::move(w));
        }
        return wallet(label);
    }

    Wallet& create_wallet(const std::string& label) {
        if (wallets_.contains(label) || fs::exists(wallet_path(label)))
            fail(Errc::invalid_argument, "wallet '" + label + "' already exists");
        return wallet_or_create(label);
    }

    fs::path record_path(const std::string& id) const { return dir_ / "records" / (id + ".rec"); }

    VerificationRecord record(const std::string& id) {
        if (!fs::exists(record_path(id))) fail(Errc::invalid_argument, "no verification record '" + id + "'");
        return parse_record(read_file(record_path(id)));
    }

    void save_record(const VerificationRecord& r) { write_file(record_path(r.id()), format_record(r) + "\n"); }

    fs::path key_path(KeyId id) const { return dir_ / "keys" / (id.hex() + ".sec"); }

    /// Mines one block to the "miner" wallet when auto-mining is on.
    void maybe_mine() {
        if (!auto_mine() || ledger_->pending().empty()) return;
        report(ledger_->mine_block(wallet_or_create("miner")));
    }

    void report(const MineResult& r) {
        std::cout << "Mined block " << r.block.height << " (" << r.block.transactions.size() - 1 << " transactions)\n";
        for (const auto& rej : r.rejected) std::cerr << "warning: rejected " << to_hex(rej.txid) << ": " << rej.reason << "\n";
    }

    void commit() {
        save_ledger(*ledger_, dir_ / "ledger.dat");
        std::string pending;
        for (const auto& tx : ledger_->pending()) pending += to_hex(tx.encode()) + "\n";
        write_file(dir_ / "pending.dat", pending);
        for (const auto& [label, w] : wallets_) w.save(wallet_path(label));
        std::string cfg;
        for (const auto& [k, v] : config_) cfg += k + "=" + v + "\n";
        write_file(dir_ / "config", cfg);
    }

private:
    fs::path dir_;
    Globals globals_;
    std::map<std::string, std::string> config_;
    LedgerParams params_;
    std::optional<Ledger> ledger_;
    std::optional<RandomSource> rng_;
    std::map<std::string, Wallet> wallets_;
    int lock_fd_ = -1;
};

BitcoinPgpCertificate load_cert(const std::string& path) { return parse_certificate(read_file(path)); }

std::string balance_line(Amount a) { return "Current Balance is: " + format_amount(a); }

void print_status(const BitcoinPgpCertificate& cert, const Ledger& ledger) {
    auto rev = check_revocation_status(cert, ledger);
    auto report = assess_validity(cert, rev.revoked);
    auto tw = trust_weight(cert, ledger);
    std::cout << "Status: " << (rev.revoked ? "Revoked" : "Valid") << "\n";
    if (rev.revoked)
        std::cout << "Revoke Transaction of " << format_amount(rev.amount) << " Found! (" << to_hex(*rev.txid) << ")\n";
    std::cout << "Validity: " << to_string(report.validity) << " (" << report.complete << " complete, "
              << report.marginal << " marginal)\n";
    std::cout << "Trust weight: " << format_amount(tw.effective_weight) << " (" << tw.round_trips.size()
              << " round trips)\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bitcoin-backed PGP certificates over a local ledger"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--state-dir", g.state_dir, "State directory")->capture_default_str();
    app.add_option("--seed", g.seed, "Deterministic randomness seed");
    app.add_option("--time", g.time, "Fixed timestamp (seconds since the epoch)");
    app.add_flag("--auto-mine", g.auto_mine, "Mine a block after every sending command");

    std::function<void(State&)> action;
    auto on = [&](CLI::App* cmd, std::function<void(State&)> fn) {
        cmd->callback([&action, fn] { action = fn; });
    };

    std::string label = "default", to, from, amount_text, cert_file, out_file, passphrase, record_id, address, keyid;
    std::string name, email, trust_text, endorser_cert, endorser_address;
    unsigned key_length = 2048, count = 1, minconf = 1;
    bool confirm = false;

    // wallet
    auto* wallet = app.add_subcommand("wallet", "Wallet management")->require_subcommand(1);
    auto* wnew = wallet->add_subcommand("new", "Create a wallet (or add an address with --add)");
    bool add_address = false;
    wnew->add_option("--label", label)->capture_default_str();
    wnew->add_flag("--add", add_address, "Add an address to an existing wallet");
    on(wnew, [&](State& s) {
        auto& w = add_address ? s.wallet(label) : s.create_wallet(label);
        std::cout << (add_address ? w.new_address(s.rng()) : w.primary_address()).str() << "\n";
    });
    auto* wbal = wallet->add_subcommand("balance", "Show balances");
    wbal->add_option("--label", label)->capture_default_str();
    wbal->add_option("--minconf", minconf)->capture_default_str();
    on(wbal, [&](State& s) {
        auto& w = s.wallet(label);
        std::cout << balance_line(s.ledger().balance(w, minconf)) << "\n";
        for (const auto& a : w.addresses())
            std::cout << a.str() << " " << format_amount(s.ledger().balance_of(a, minconf)) << "\n";
    });
    auto* wfund = wallet->add_subcommand("fund", "Mine reward blocks to a wallet");
    wfund->add_option("--label", label)->capture_default_str();
    wfund->add_option("--blocks", count)->capture_default_str();
    on(wfund, [&](State& s) {
        auto& w = s.wallet(label);
        for (unsigned i = 0; i < count; ++i) s.report(s.ledger().mine_block(w));
        std::cout << balance_line(s.ledger().balance(w)) << "\n";
    });
    auto* wsend = wallet->add_subcommand("send", "Pay an address");
    wsend->add_option("--label", label)->capture_default_str();
    wsend->add_option("--to", to)->required();
    wsend->add_option("--amount", amount_text)->required();
    wsend->add_option("--from", from, "Spend from this wallet address first");
    on(wsend, [&](State& s) {
        SendOptions opts;
        if (!from.empty()) opts.from = Address::parse(from);
        auto amount = parse_amount(amount_text);
        auto txid = s.ledger().send_to_address(s.wallet(label), Address::parse(to), amount, opts);
        std::cout << "Sending " << format_amount(amount) << " to " << to << "\n" << to_hex(txid) << "\n";
        s.maybe_mine();
    });

    // cert
    auto* cert = app.add_subcommand("cert", "Certificates")->require_subcommand(1);
    auto* cgen = cert->add_subcommand("generate", "Generate a Bitcoin-based PGP certificate");
    cgen->add_option("--wallet", label)->capture_default_str();
    cgen->add_option("--name", name)->required();
    cgen->add_option("--email", email)->required();
    cgen->add_option("--passphrase", passphrase)->required();
    cgen->add_option("--key-length", key_length)->capture_default_str();
    cgen->add_option("--out", out_file)->required();
    on(cgen, [&](State& s) {
        CertificateParams p;
        p.name = name;
        p.email = email;
        p.passphrase = passphrase;
        p.key_length = key_length;
        p.created_at = s.now();
        auto gen = generate_certificate(p, s.wallet_or_create(label), s.rng());
        write_file(out_file, serialize_certificate(gen.certificate));
        write_file(s.key_path(gen.certificate.key_id()), serialize_private_key(gen.private_key));
        auto addrs = extract_addresses(gen.certificate);
        std::cout << "Key-Type: " << p.key_type << "\nName-Comment: " << addrs.identity.str() << "|"
                  << addrs.revocation.str() << "\nPassphrase: " << p.passphrase << "\nName-Real: " << p.name
                  << "\nName-Email: " << p.email << "\nKey-Length: " << p.key_length
                  << "\nKeyID: " << gen.certificate.key_id().hex() << "\n";
    });
    auto* cinspect = cert->add_subcommand("inspect", "Show certificate fields");
    cinspect->add_option("file", cert_file)->required();
    on(cinspect, [&](State& s) {
        auto c = load_cert(cert_file);
        auto addrs = extract_addresses(c);
        std::cout << "Version: " << c.version << "\nName-Real: " << c.holder_name << "\nName-Email: "
                  << c.holder_email << "\nKey-Type: " << c.public_key.algorithm << "\nKey-Length: " << c.key_length
                  << "\nKeyID: " << c.key_id().hex() << "\nIdentity-Address: " << addrs.identity.str()
                  << "\nRevocation-Address: " << addrs.revocation.str() << "\nValid-From: " << c.validity_start
                  << "\nValid-Until: " << c.validity_end << "\nSelf-Signature: "
                  << (verify_self_signature(c) ? "good" : "BAD") << "\n";
        for (const auto& e : c.endorsements)
            std::cout << "Endorsement: " << e.endorser_keyid.hex() << " " << to_string(e.trust_level) << " "
                      << (verify_endorsement(c, e) ? "good" : "BAD") << " fee="
                      << (e.fee_txid ? to_hex(*e.fee_txid) : "unpaid") << "\n";
        print_status(c, s.ledger());
    });

    // verify
    auto* verify = app.add_subcommand("verify", "Identity verification round trips")->require_subcommand(1);
    auto* vstart = verify->add_subcommand("start", "Send Tx-1 to the certificate's identity address");
    vstart->add_option("--wallet", label)->capture_default_str();
    vstart->add_option("--cert", cert_file)->required();
    vstart->add_option("--amount", amount_text)->required();
    vstart->add_option("--return-address", address, "Defaults to the wallet's primary address");
    on(vstart, [&](State& s) {
        auto& w = s.wallet(label);
        auto c = load_cert(cert_file);
        auto ret = address.empty() ? w.primary_address() : Address::parse(address);
        std::cout << balance_line(s.ledger().balance(w)) << "\n";
        auto rec = initiate_verification(s.ledger(), w, c, parse_amount(amount_text), ret);
        s.save_record(rec);
        std::cout << "Sending " << format_amount(rec.amount) << " to " << extract_addresses(c).identity.str()
                  << "\nRecord: " << rec.id() << "\n";
        s.maybe_mine();
    });
    auto* vret = verify->add_subcommand("return", "Return the stake (Tx-2) as the certificate owner");
    vret->add_option("--wallet", label)->capture_default_str();
    vret->add_option("--record", record_id)->required();
    on(vret, [&](State& s) {
        auto rec = s.record(record_id);
        auto& w = s.wallet(label);
        std::cout << balance_line(s.ledger().balance_of(verification_target(s.ledger(), rec))) << "\n";
        return_verification(s.ledger(), w, rec);
        s.save_record(rec);
        std::cout << "Sending " << format_amount(rec.amount) << " to " << rec.verifier_return_address.str() << "\n";
        s.maybe_mine();
    });
    auto* vcheck = verify->add_subcommand("check", "Check for the returned stake");
    vcheck->add_option("--record", record_id)->required();
    on(vcheck, [&](State& s) {
        auto rec = s.record(record_id);
        std::cout << "Amount Sent: " << format_amount(rec.amount) << "\n";
        bool ok = check_verification(s.ledger(), rec);
        s.save_record(rec);
        if (ok) std::cout << "Transaction of " << format_amount(rec.amount) << " Found!\n";
        std::cout << "Result = " << (ok ? "True" : "False") << "\n";
    });

    // endorse
    auto* endorse = app.add_subcommand("endorse", "Sign another certificate and collect the endorsement fee");
    endorse->add_option("--cert", cert_file, "Certificate to endorse (updated in place)")->required();
    endorse->add_option("--trust", trust_text)->required()->check(CLI::IsMember({"complete", "marginal"}));
    endorse->add_flag("--confirm", confirm, "Required: confirm the endorsement");
    endorse->add_option("--endorser-cert", endorser_cert)->required();
    endorse->add_option("--passphrase", passphrase, "Endorser key passphrase")->required();
    endorse->add_option("--endorser-address", endorser_address, "Address that verified the certificate")->required();
    endorse->add_option("--owner-wallet", label, "Wallet holding the certificate's identity address")
        ->capture_default_str();
    on(endorse, [&](State& s) {
        auto target = load_cert(cert_file);
        auto endorser = load_cert(endorser_cert);
        auto locked = parse_private_key(read_file(s.key_path(endorser.key_id())));
        auto trust = trust_text == "complete" ? TrustLevel::complete : TrustLevel::marginal;
        auto r = endorse_certificate(s.ledger(), {endorser, locked, passphrase}, Address::parse(endorser_address),
                                     s.wallet(label), target, trust, confirm ? Confirm::yes : Confirm::no);
        write_file(cert_file, serialize_certificate(r.certificate));
        std::cout << "Endorsed " << target.key_id().hex() << " as " << trust_text << "\n";
        if (r.endorsement.fee_txid) std::cout << "Fee " << format_amount(kEndorsementFee) << " paid: " << to_hex(*r.endorsement.fee_txid) << "\n";
        if (r.warning) std::cerr << "warning: " << *r.warning << "\n";
        s.maybe_mine();
    });

    // revoke
    auto* revoke = app.add_subcommand("revoke", "Revoke a certificate");
    revoke->add_option("--wallet", label)->capture_default_str();
    revoke->add_option("--cert", cert_file)->required();
    revoke->add_option("--amount", amount_text);
    on(revoke, [&](State& s) {
        auto c = load_cert(cert_file);
        auto amount = amount_text.empty() ? s.default_revocation_amount() : parse_amount(amount_text);
        auto addrs = extract_addresses(c);
        auto txid = revoke_certificate(s.ledger(), s.wallet(label), c, amount);
        std::cout << "Sent Revocation Transaction of Amount: " << format_amount(amount)
                  << " to Revocation Address: " << addrs.revocation.str() << "\n"
                  << addrs.identity.str() << "\n" << to_hex(txid) << "\n";
        s.maybe_mine();
        if (check_revocation_status(c, s.ledger()).revoked) std::cout << "Certificate Successfully Revoked\n";
    });

    auto* status = app.add_subcommand("status", "Revocation status, validity and trust weight");
    status->add_option("--cert", cert_file)->required();
    on(status, [&](State& s) { print_status(load_cert(cert_file), s.ledger()); });

    // keyserver
    auto* ks = app.add_subcommand("keyserver", "Store and fetch certificates in the ledger")->require_subcommand(1);
    auto* kstore = ks->add_subcommand("store", "Store a certificate as data transactions");
    kstore->add_option("--wallet", label, "Wallet paying the storage fees")->capture_default_str();
    kstore->add_option("--cert", cert_file)->required();
    kstore->add_option("--address", address, "Owner address (defaults to the identity address)");
    on(kstore, [&](State& s) {
        auto c = load_cert(cert_file);
        auto owner = address.empty() ? extract_addresses(c).identity : Address::parse(address);
        auto receipt = store_key(s.ledger(), s.wallet(label), c, owner);
        std::cout << "Stored " << c.key_id().hex() << " in " << receipt.total << " fragments at " << owner.str() << "\n";
        for (const auto& t : receipt.txids) std::cout << to_hex(t) << "\n";
        s.maybe_mine();
    });
    auto* kfetch = ks->add_subcommand("fetch", "Reassemble a certificate from the ledger");
    kfetch->add_option("--address", address)->required();
    kfetch->add_option("--keyid", keyid)->required();
    kfetch->add_option("--out", out_file);
    on(kfetch, [&](State& s) {
        auto c = fetch_certificate(Address::parse(address), KeyId::parse_hex(keyid), s.ledger());
        auto text = serialize_certificate(c);
        if (out_file.empty())
            std::cout << text;
        else
            write_file(out_file, text);
    });

    auto* mine = app.add_subcommand("mine", "Mine pending transactions");
    mine->add_option("--count", count)->capture_default_str();
    std::string miner = "miner";
    mine->add_option("--wallet", miner, "Miner wallet (created if missing)")->capture_default_str();
    on(mine, [&](State& s) {
        auto& w = s.wallet_or_create(miner);
        for (unsigned i = 0; i < count; ++i) s.report(s.ledger().mine_block(w));
    });

    auto* demo = app.add_subcommand("demo", "Scripted scenarios")->require_subcommand(1);
    auto* walk = demo->add_subcommand("run-paper-walkthrough", "Alice and Bob: certify, verify, revoke");
    walk->add_option("--key-length", key_length)->capture_default_str();
    on(walk, [&](State& s) {
        WalkthroughParties p;
        auto t = run_paper_walkthrough(s.ledger(), p, s.rng(), key_length);
        std::cout << t.text();
        auto path = fs::path(g.state_dir) / ("alice-" + t.certificate.key_id().hex() + ".cert");
        write_file(path, serialize_certificate(t.certificate));
        std::cout << "Certificate written to " << path.string() << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        State state(g);
        action(state);
        state.commit();
    } catch (const Error& e) {
        std::cerr << "error: " << e.token() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << token(Errc::io_error) << ": " << e.what() << "\n";
        return 2;
    }
    return 0;
}
