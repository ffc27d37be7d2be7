#pragma once

#include <btcpgp/error.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace btcpgp {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_hex(ByteView data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace detail {
inline int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace detail

/// Throws `code` on odd length or non-hex characters.
inline Bytes from_hex(std::string_view hex, Errc code = Errc::invalid_argument) {
    if (hex.size() % 2 != 0) fail(code, "hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = detail::hex_value(hex[i]);
        int lo = detail::hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) fail(code, "invalid hex character");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

/// Big-endian, length-prefixed field writer used by every canonical encoding.
class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v) {
        buf_.push_back(v);
        return *this;
    }
    ByteWriter& u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
        return *this;
    }
    ByteWriter& u64(std::uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
        return *this;
    }
    ByteWriter& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
    ByteWriter& raw(ByteView data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
        return *this;
    }
    ByteWriter& var(ByteView data) {
        u32(static_cast<std::uint32_t>(data.size()));
        return raw(data);
    }
    ByteWriter& str(std::string_view s) { return var(as_bytes(s)); }

    const Bytes& bytes() const& noexcept { return buf_; }
    Bytes take() && noexcept { return std::move(buf_); }

private:
    Bytes buf_;
};

/// Reader counterpart of ByteWriter; any underrun throws `code`.
class ByteReader {
public:
    ByteReader(ByteView data, Errc code) : data_(data), code_(code) {}

    std::uint8_t u8() { return need(1)[0]; }
    std::uint32_t u32() {
        auto p = need(4);
        std::uint32_t v = 0;
        for (auto b : p) v = v << 8 | b;
        return v;
    }
    std::uint64_t u64() {
        auto p = need(8);
        std::uint64_t v = 0;
        for (auto b : p) v = v << 8 | b;
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    Bytes raw(std::size_t n) {
        auto p = need(n);
        return Bytes(p.begin(), p.end());
    }
    Bytes var() { return raw(u32()); }
    std::string str() {
        auto p = need(u32());
        return std::string(p.begin(), p.end());
    }

    bool done() const noexcept { return pos_ == data_.size(); }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    void expect_done(const char* what) const {
        if (!done()) fail(code_, std::string("trailing bytes after ") + what);
    }
    [[noreturn]] void error(const std::string& what) const { fail(code_, what); }

private:
    ByteView need(std::size_t n) {
        if (n > remaining()) fail(code_, "truncated encoding");
        auto p = data_.subspan(pos_, n);
        pos_ += n;
        return p;
    }

    ByteView data_;
    std::size_t pos_ = 0;
    Errc code_;
};

} // namespace btcpgp
