#pragma once

#include <btcpgp/address.hpp>
#include <btcpgp/signing_key.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace btcpgp {

/// Holder of the signing keys behind a set of addresses.
class Wallet {
public:
    explicit Wallet(std::string label = "default") : label_(std::move(label)) {}

    const std::string& label() const noexcept { return label_; }

    const Address& new_address(RandomSource& rng) { return import_key(SigningKey::generate(rng)); }

    const Address& import_key(const SigningKey& key) {
        auto addr = Address::from_public_key(key.public_key());
        auto [it, inserted] = keys_.emplace(addr, key);
        if (inserted) order_.push_back(addr);
        return it->first;
    }

    bool owns(const Address& addr) const { return keys_.contains(addr); }

    const SigningKey& key_for(const Address& addr) const {
        auto it = keys_.find(addr);
        if (it == keys_.end())
            fail(Errc::not_owner, "wallet '" + label_ + "' does not control " + addr.str());
        return it->second;
    }

    /// Addresses in creation order.
    const std::vector<Address>& addresses() const noexcept { return order_; }

    /// First address created; receives change from unrestricted sends.
    const Address& primary_address() const {
        if (order_.empty()) fail(Errc::invalid_argument, "wallet '" + label_ + "' has no addresses");
        return order_.front();
    }

    std::string serialize() const {
        std::ostringstream out;
        out << "label=" << label_ << '\n';
        for (const auto& addr : order_) out << "key=" << to_hex(keys_.at(addr).seed()) << '\n';
        return out.str();
    }

    static Wallet deserialize(std::string_view text) {
        Wallet w;
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) fail(Errc::invalid_argument, "malformed wallet line");
            auto key = line.substr(0, eq);
            auto value = line.substr(eq + 1);
            if (key == "label") {
                w.label_ = value;
            } else if (key == "key") {
                auto raw = from_hex(value);
                if (raw.size() != 32) fail(Errc::invalid_argument, "wallet key must be 32 bytes");
                SigningKey::Seed seed{};
                std::copy(raw.begin(), raw.end(), seed.begin());
                w.import_key(SigningKey::from_seed(seed));
            } else {
                fail(Errc::invalid_argument, "unknown wallet field '" + key + "'");
            }
        }
        return w;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        out << serialize();
        if (!out) fail(Errc::io_error, "cannot write wallet " + path.string());
    }

    static Wallet load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) fail(Errc::io_error, "cannot read wallet " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        return deserialize(buf.str());
    }

private:
    std::string label_;
    std::vector<Address> order_;
    std::unordered_map<Address, SigningKey> keys_;
};

} // namespace btcpgp
