#pragma once

#include <btcpgp/error.hpp>

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace btcpgp {

inline constexpr std::uint64_t kSatoshisPerCoin = 100'000'000;

/// Non-negative amount in satoshis. Arithmetic is exact; underflow and
/// overflow throw instead of wrapping.
class Amount {
public:
    constexpr Amount() noexcept = default;

    static constexpr Amount sats(std::uint64_t v) noexcept { return Amount(v); }
    static constexpr Amount coins(std::uint64_t v) noexcept { return Amount(v * kSatoshisPerCoin); }

    constexpr std::uint64_t satoshis() const noexcept { return sats_; }
    constexpr bool is_zero() const noexcept { return sats_ == 0; }

    constexpr auto operator<=>(const Amount&) const noexcept = default;

    Amount& operator+=(Amount o) {
        if (sats_ > std::numeric_limits<std::uint64_t>::max() - o.sats_)
            fail(Errc::invalid_amount, "amount overflow");
        sats_ += o.sats_;
        return *this;
    }
    Amount& operator-=(Amount o) {
        if (o.sats_ > sats_) fail(Errc::invalid_amount, "amount underflow");
        sats_ -= o.sats_;
        return *this;
    }
    friend Amount operator+(Amount a, Amount b) { return a += b; }
    friend Amount operator-(Amount a, Amount b) { return a -= b; }
    friend Amount operator*(Amount a, std::uint64_t k) {
        if (k != 0 && a.sats_ > std::numeric_limits<std::uint64_t>::max() / k)
            fail(Errc::invalid_amount, "amount overflow");
        return Amount(a.sats_ * k);
    }

private:
    constexpr explicit Amount(std::uint64_t v) noexcept : sats_(v) {}

    std::uint64_t sats_ = 0;
};

/// Parses a decimal coin amount ("0.00856179") exactly; at most 8 fractional
/// digits, no sign, no exponent.
inline Amount parse_amount(std::string_view text) {
    auto bad = [&](const char* why) -> Amount {
        fail(Errc::invalid_amount, std::string("invalid amount '") + std::string(text) + "': " + why);
    };
    if (text.empty()) return bad("empty");
    auto dot = text.find('.');
    auto whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() && frac.empty()) return bad("no digits");
    if (dot != std::string_view::npos && frac.empty()) return bad("missing fractional digits");
    if (frac.size() > 8) return bad("more than 8 fractional digits");

    std::uint64_t coins = 0;
    for (char c : whole) {
        if (c < '0' || c > '9') return bad("non-digit character");
        if (coins > (std::numeric_limits<std::uint64_t>::max() / kSatoshisPerCoin - 9) / 10)
            return bad("too large");
        coins = coins * 10 + static_cast<std::uint64_t>(c - '0');
    }
    std::uint64_t sub = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        char c = i < frac.size() ? frac[i] : '0';
        if (c < '0' || c > '9') return bad("non-digit character");
        sub = sub * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return Amount::sats(coins * kSatoshisPerCoin + sub);
}

/// Shortest exact decimal form: 856179 sat -> "0.00856179", 3367300 -> "0.033673".
inline std::string format_amount(Amount a) {
    auto whole = a.satoshis() / kSatoshisPerCoin;
    auto sub = a.satoshis() % kSatoshisPerCoin;
    std::string out = std::to_string(whole);
    if (sub == 0) return out;
    std::string frac = std::to_string(sub);
    frac.insert(0, 8 - frac.size(), '0');
    while (frac.back() == '0') frac.pop_back();
    return out + "." + frac;
}

} // namespace btcpgp
