#pragma once

#include <btcpgp/base58.hpp>

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace btcpgp {

/// Base58Check pay-to-key-hash address: version byte + HASH160(pubkey).
class Address {
public:
    static constexpr std::uint8_t kKeyHashVersion = 0x00; // renders with a leading '1'
    static constexpr std::uint8_t kScriptHashVersion = 0x05; // leading '3'
    static constexpr std::size_t kMinLength = 27;
    static constexpr std::size_t kMaxLength = 34;

    static Address from_key_hash(const KeyHash& hash, std::uint8_t version = kKeyHashVersion) {
        Bytes payload;
        payload.reserve(21);
        payload.push_back(version);
        payload.insert(payload.end(), hash.begin(), hash.end());
        return Address(base58::encode_check(payload));
    }

    static Address from_public_key(ByteView public_key) { return from_key_hash(hash160(public_key)); }

    static bool is_valid(std::string_view text) { return decode(text).has_value(); }

    static Address parse(std::string_view text) {
        if (!decode(text))
            fail(Errc::invalid_address, "invalid address '" + std::string(text) + "'");
        return Address(std::string(text));
    }

    const std::string& str() const noexcept { return text_; }

    KeyHash key_hash() const {
        auto payload = *decode(text_);
        KeyHash h{};
        std::copy(payload.begin() + 1, payload.end(), h.begin());
        return h;
    }

    auto operator<=>(const Address&) const = default;

private:
    explicit Address(std::string text) : text_(std::move(text)) {}

    static std::optional<Bytes> decode(std::string_view text) {
        if (text.size() < kMinLength || text.size() > kMaxLength) return std::nullopt;
        if (text.front() != '1' && text.front() != '3') return std::nullopt;
        auto payload = base58::decode_check(text);
        if (!payload || payload->size() != 21) return std::nullopt;
        auto version = (*payload)[0];
        if (version != kKeyHashVersion && version != kScriptHashVersion) return std::nullopt;
        // Non-canonical spellings (e.g. extra leading '1') must not alias a valid address.
        if (base58::encode_check(*payload) != text) return std::nullopt;
        return payload;
    }

    std::string text_;
};

} // namespace btcpgp

template <>
struct std::hash<btcpgp::Address> {
    std::size_t operator()(const btcpgp::Address& a) const noexcept {
        return std::hash<std::string>{}(a.str());
    }
};
