#pragma once

#include <btcpgp/hash.hpp>

#include <openssl/rand.h>

#include <optional>

namespace btcpgp {

/// Source of key material and nonces. Either the OS entropy pool or a
/// deterministic SHA-256 counter-mode stream derived from a seed; the seeded
/// form exists for replayable test runs and the CLI's `--seed` flag.
class RandomSource {
public:
    static RandomSource entropy() { return RandomSource(std::nullopt); }

    static RandomSource seeded(ByteView seed) { return RandomSource(sha256(seed)); }

    static RandomSource seeded(std::uint64_t seed) {
        ByteWriter w;
        w.u64(seed);
        return seeded(w.bytes());
    }

    RandomSource(RandomSource&&) noexcept = default;
    RandomSource& operator=(RandomSource&&) noexcept = default;
    RandomSource(const RandomSource&) = delete;
    RandomSource& operator=(const RandomSource&) = delete;

    bool deterministic() const noexcept { return key_.has_value(); }

    void fill(std::span<std::uint8_t> out) {
        if (!key_) {
            if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
                fail(Errc::invalid_argument, "entropy source unavailable");
            return;
        }
        std::size_t written = 0;
        while (written < out.size()) {
            ByteWriter w;
            w.raw(*key_).u64(counter_++);
            auto block = sha256(w.bytes());
            auto n = std::min(block.size(), out.size() - written);
            std::copy_n(block.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(written));
            written += n;
        }
    }

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out);
        return out;
    }

    template <std::size_t N>
    std::array<std::uint8_t, N> array() {
        std::array<std::uint8_t, N> out{};
        fill(out);
        return out;
    }

    std::uint64_t next_u64() {
        auto b = array<8>();
        std::uint64_t v = 0;
        for (auto x : b) v = v << 8 | x;
        return v;
    }

    /// Uniform in [0, bound); bound must be positive.
    std::uint64_t uniform(std::uint64_t bound) {
        auto limit = UINT64_MAX - UINT64_MAX % bound;
        for (;;) {
            auto v = next_u64();
            if (v < limit) return v % bound;
        }
    }

private:
    explicit RandomSource(std::optional<Hash256> key) : key_(key) {}

    std::optional<Hash256> key_;
    std::uint64_t counter_ = 0;
};

} // namespace btcpgp
