#pragma once

#include <btcpgp/ledger.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace btcpgp {

inline constexpr std::string_view kLedgerHeader = "BTCPGP-LEDGER v1";

/// One block per line: "<height> <prev_hash hex> <timestamp> <tx hex>,<tx hex>,..."
inline std::string format_block_record(const Block& b) {
    std::string line = std::to_string(b.height) + ' ' + to_hex(b.prev_hash) + ' ' + std::to_string(b.timestamp) + ' ';
    for (std::size_t i = 0; i < b.transactions.size(); ++i) {
        if (i) line.push_back(',');
        line += to_hex(b.transactions[i].encode());
    }
    return line;
}

inline Block parse_block_record(std::string_view line) {
    auto bad = [&](const char* why) -> Block { fail(Errc::corrupt_ledger, std::string("ledger record: ") + why); };
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (fields.size() < 3) {
        auto sp = line.find(' ', pos);
        if (sp == std::string_view::npos) return bad("too few fields");
        fields.push_back(line.substr(pos, sp - pos));
        pos = sp + 1;
    }
    auto tx_list = line.substr(pos);
    auto parse_int = [&](std::string_view s, auto& out) {
        std::istringstream in{std::string(s)};
        if (s.empty() || !(in >> out) || !in.eof()) bad("bad integer field");
    };

    Block b;
    parse_int(fields[0], b.height);
    b.prev_hash = hash_from_hex(fields[1], Errc::corrupt_ledger);
    parse_int(fields[2], b.timestamp);
    if (tx_list.empty()) return bad("block without transactions");
    std::size_t start = 0;
    for (;;) {
        auto comma = tx_list.find(',', start);
        auto hex = tx_list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (hex.empty()) return bad("empty transaction entry");
        b.transactions.push_back(Transaction::decode(from_hex(hex, Errc::corrupt_ledger)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    b.seal();
    return b;
}

inline std::string serialize_ledger(const Ledger& ledger) {
    std::string out(kLedgerHeader);
    out.push_back('\n');
    for (const auto& b : ledger.blocks()) {
        out += format_block_record(b);
        out.push_back('\n');
    }
    return out;
}

/// Every record must be newline-terminated, so a file cut mid-record is rejected.
inline Ledger deserialize_ledger(std::string_view text, LedgerParams params = {}) {
    if (!text.starts_with(kLedgerHeader) || text.size() <= kLedgerHeader.size() ||
        text[kLedgerHeader.size()] != '\n')
        fail(Errc::corrupt_ledger, "missing ledger format header");
    if (text.back() != '\n') fail(Errc::corrupt_ledger, "truncated ledger file");
    std::vector<Block> blocks;
    std::size_t pos = kLedgerHeader.size() + 1;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        blocks.push_back(parse_block_record(text.substr(pos, nl - pos)));
        pos = nl + 1;
    }
    return Ledger::from_blocks(params, std::move(blocks));
}

inline void save_ledger(const Ledger& ledger, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << serialize_ledger(ledger);
        if (!out) fail(Errc::io_error, "cannot write ledger " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline Ledger load_ledger(const std::filesystem::path& path, LedgerParams params = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot read ledger " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize_ledger(buf.str(), params);
}

} // namespace btcpgp
