#pragma once

#include <btcpgp/bytes.hpp>

#include <openssl/evp.h>
#include <openssl/provider.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <string>

namespace btcpgp {

/// SHA-256 is the project-wide 256-bit hash (txids, block hashes, key ids).
using Hash256 = std::array<std::uint8_t, 32>;
using KeyHash = std::array<std::uint8_t, 20>;

namespace detail {

// RIPEMD-160 lives in the legacy provider on OpenSSL 3.0; loading any provider
// explicitly disables the implicit default one, so load both.
inline void ensure_providers() {
    static const bool loaded = [] {
        OSSL_PROVIDER_load(nullptr, "default");
        OSSL_PROVIDER_load(nullptr, "legacy");
        return true;
    }();
    (void)loaded;
}

template <std::size_t N>
std::array<std::uint8_t, N> digest(const EVP_MD* md, ByteView data) {
    std::array<std::uint8_t, N> out{};
    unsigned int len = 0;
    if (md == nullptr || EVP_Digest(data.data(), data.size(), out.data(), &len, md, nullptr) != 1 ||
        len != N)
        fail(Errc::invalid_argument, "digest computation failed");
    return out;
}

} // namespace detail

inline Hash256 sha256(ByteView data) { return detail::digest<32>(EVP_sha256(), data); }

inline Hash256 sha256d(ByteView data) {
    auto first = sha256(data);
    return sha256(first);
}

inline KeyHash hash160(ByteView data) {
    detail::ensure_providers();
    auto inner = sha256(data);
    return detail::digest<20>(EVP_ripemd160(), inner);
}

inline std::string to_hex(const Hash256& h) { return to_hex(ByteView(h)); }

inline Hash256 hash_from_hex(std::string_view hex, Errc code = Errc::invalid_argument) {
    auto raw = from_hex(hex, code);
    if (raw.size() != 32) fail(code, "expected 32-byte hash");
    Hash256 h{};
    std::copy(raw.begin(), raw.end(), h.begin());
    return h;
}

struct Hash256Hasher {
    std::size_t operator()(const Hash256& h) const noexcept {
        std::size_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | h[i];
        return v;
    }
};

} // namespace btcpgp
