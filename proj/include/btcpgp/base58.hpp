#pragma once

#include <btcpgp/hash.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace btcpgp::base58 {

inline constexpr std::string_view kAlphabet =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

inline std::string encode(ByteView data) {
    std::size_t zeros = 0;
    while (zeros < data.size() && data[zeros] == 0) ++zeros;

    // Base-58 digits, little-endian, built by repeated multiply-add.
    std::vector<std::uint8_t> digits;
    digits.reserve(data.size() * 138 / 100 + 1);
    for (std::size_t i = zeros; i < data.size(); ++i) {
        int carry = data[i];
        for (auto& d : digits) {
            carry += d * 256;
            d = static_cast<std::uint8_t>(carry % 58);
            carry /= 58;
        }
        while (carry > 0) {
            digits.push_back(static_cast<std::uint8_t>(carry % 58));
            carry /= 58;
        }
    }

    std::string out(zeros, '1');
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(kAlphabet[*it]);
    return out;
}

inline std::optional<Bytes> decode(std::string_view text) {
    std::size_t ones = 0;
    while (ones < text.size() && text[ones] == '1') ++ones;

    std::vector<std::uint8_t> bytes; // little-endian
    for (std::size_t i = ones; i < text.size(); ++i) {
        auto pos = kAlphabet.find(text[i]);
        if (pos == std::string_view::npos) return std::nullopt;
        int carry = static_cast<int>(pos);
        for (auto& b : bytes) {
            carry += b * 58;
            b = static_cast<std::uint8_t>(carry & 0xff);
            carry >>= 8;
        }
        while (carry > 0) {
            bytes.push_back(static_cast<std::uint8_t>(carry & 0xff));
            carry >>= 8;
        }
    }

    Bytes out(ones, 0);
    out.insert(out.end(), bytes.rbegin(), bytes.rend());
    return out;
}

/// payload || first four bytes of SHA256d(payload)
inline std::string encode_check(ByteView payload) {
    Bytes buf(payload.begin(), payload.end());
    auto check = sha256d(payload);
    buf.insert(buf.end(), check.begin(), check.begin() + 4);
    return encode(buf);
}

inline std::optional<Bytes> decode_check(std::string_view text) {
    auto raw = decode(text);
    if (!raw || raw->size() < 4) return std::nullopt;
    ByteView body(raw->data(), raw->size() - 4);
    auto check = sha256d(body);
    if (!std::equal(check.begin(), check.begin() + 4, raw->end() - 4)) return std::nullopt;
    raw->resize(raw->size() - 4);
    return raw;
}

} // namespace btcpgp::base58
