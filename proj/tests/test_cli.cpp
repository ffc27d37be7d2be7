#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("btcpgp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    CliResult run(const std::string& args, const fs::path& state = {}) {
        auto err_file = dir / "stderr.txt";
        std::string cmd = std::string(BTCPGP_CLI) + " --state-dir " + (state.empty() ? dir / "state" : state).string() +
                          " --seed 2016 --time 1450000000 " + args + " 2>" + err_file.string();
        CliResult r;
        FILE* p = ::popen(cmd.c_str(), "r");
        char buf[4096];
        while (auto n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
        int status = ::pclose(p);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(err_file);
        std::stringstream ss;
        ss << in.rdbuf();
        r.err = ss.str();
        return r;
    }

    static std::string field(const std::string& text, const std::string& key) {
        auto pos = text.find(key);
        if (pos == std::string::npos) return {};
        pos += key.size();
        return text.substr(pos, text.find('\n', pos) - pos);
    }
};

} // namespace

TEST_F(Cli, WalkthroughPrintsGoldenLines) {
    auto r = run("demo run-paper-walkthrough");
    ASSERT_EQ(r.code, 0) << r.err;
    for (auto line : {"Current Balance is: 0.033673\n", "Current Balance is: 0.01198579\n",
                      "Transaction of 0.00856179 Found!\n", "Result = True\n",
                      "Sent Revocation Transaction of Amount: 0.000017 to Revocation Address: ",
                      "Certificate Successfully Revoked\n", "Bitcoin Address Verified\n", "Amount Sent: 0.000017\n",
                      "Revoke Transaction of 0.000017 Found!\n", "Status: Revoked\n"})
        EXPECT_NE(r.out.find(line), std::string::npos) << line;
    EXPECT_NE(r.out.find("Sending 0.00856179 to 1"), std::string::npos);
}

TEST_F(Cli, ReplayIsDeterministic) {
    auto a = run("demo run-paper-walkthrough", dir / "a");
    auto b = run("demo run-paper-walkthrough", dir / "b");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out.substr(0, a.out.rfind("Certificate written")), b.out.substr(0, b.out.rfind("Certificate written")));
    std::ifstream la(dir / "a" / "ledger.dat"), lb(dir / "b" / "ledger.dat");
    std::stringstream sa, sb;
    sa << la.rdbuf();
    sb << lb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(Cli, VerificationAndErrors) {
    auto cert = (dir / "alice.cert").string();
    ASSERT_EQ(run("wallet new --label alice").code, 0);
    ASSERT_EQ(run("wallet new --label bob").code, 0);
    ASSERT_EQ(run("wallet fund --label bob --blocks 2").code, 0);
    auto gen = run("cert generate --wallet alice --name Alice --email alice@bitcoinpgp.com --passphrase pwd "
                   "--key-length 1024 --out " + cert);
    ASSERT_EQ(gen.code, 0) << gen.err;
    auto keyid = field(gen.out, "KeyID: ");
    ASSERT_EQ(keyid.size(), 16u);
    auto id_addr = field(run("cert inspect " + cert).out, "Identity-Address: ");

    ASSERT_EQ(run("--auto-mine wallet send --label bob --to " + id_addr + " --amount 0.003424").code, 0);
    auto start = run("--auto-mine verify start --wallet bob --cert " + cert + " --amount 0.00856179");
    ASSERT_EQ(start.code, 0) << start.err;
    auto rec = field(start.out, "Record: ");

    auto check = run("verify check --record " + rec);
    EXPECT_EQ(check.code, 0);
    EXPECT_NE(check.out.find("Result = False"), std::string::npos);

    auto ret = run("--auto-mine verify return --wallet alice --record " + rec);
    ASSERT_EQ(ret.code, 0) << ret.err;
    EXPECT_NE(ret.out.find("Current Balance is: 0.01198579"), std::string::npos);
    EXPECT_NE(run("verify check --record " + rec).out.find("Result = True"), std::string::npos);
    EXPECT_NE(run("verify return --wallet alice --record " + rec).err.find("AlreadyReturned"), std::string::npos);

    auto endorse = run("endorse --cert " + cert + " --trust complete --endorser-cert " + cert +
                       " --passphrase pwd --endorser-address " + id_addr + " --owner-wallet alice");
    EXPECT_EQ(endorse.code, 2);
    EXPECT_NE(endorse.err.find("MissingConfirmation"), std::string::npos);

    ASSERT_EQ(run("--auto-mine keyserver store --wallet bob --cert " + cert).code, 0);
    auto fetched = run("keyserver fetch --address " + id_addr + " --keyid " + keyid);
    EXPECT_EQ(fetched.code, 0) << fetched.err;
    std::ifstream in(cert);
    std::stringstream original;
    original << in.rdbuf();
    EXPECT_EQ(fetched.out, original.str());

    auto miss = run("keyserver fetch --address " + id_addr + " --keyid 00000000000000ff");
    EXPECT_EQ(miss.code, 2);
    EXPECT_NE(miss.err.find("KeyIdMismatch"), std::string::npos);

    auto rev = run("--auto-mine revoke --wallet alice --cert " + cert);
    EXPECT_EQ(rev.code, 0) << rev.err;
    EXPECT_NE(rev.out.find("Certificate Successfully Revoked"), std::string::npos);
    EXPECT_NE(run("status --cert " + cert).out.find("Status: Revoked"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("nonsense").code, 1);
    EXPECT_EQ(run("verify check").code, 1);
    EXPECT_EQ(run("endorse --cert x --trust total --endorser-cert y --passphrase p --endorser-address z").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, DomainErrorsExitTwo) {
    auto r = run("wallet balance --label nobody");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("InvalidArgument"), std::string::npos);
    run("wallet new --label a");
    auto send = run("wallet send --label a --to 1Lk3XuR3dvPebRS6QgmVXVBjm7NBkuTuM7 --amount 0.000000001");
    EXPECT_EQ(send.code, 2);
    EXPECT_NE(send.err.find("InvalidAmount"), std::string::npos);
    auto bad_addr = run("wallet send --label a --to 1Lk3XuR3dvPebRS6QgmVXVBjm7NBkuTuM8 --amount 1");
    EXPECT_NE(bad_addr.err.find("InvalidAddress"), std::string::npos);
}

TEST_F(Cli, CorruptLedgerDetected) {
    ASSERT_EQ(run("mine --count 2").code, 0);
    auto path = dir / "state" / "ledger.dat";
    auto size = fs::file_size(path);
    fs::resize_file(path, size - 5);
    auto r = run("mine");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("CorruptLedger"), std::string::npos);
}
