#pragma once

#include <btcpgp/random.hpp>

#include <openssl/evp.h>

#include <array>
#include <memory>

namespace btcpgp {

namespace detail {
struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const noexcept { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* p) const noexcept { EVP_MD_CTX_free(p); }
};
using PkeyPtr = std::shared_ptr<EVP_PKEY>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
} // namespace detail

/// Ed25519 keypair controlling one ledger address. Signatures are
/// deterministic, so seeded runs reproduce identical txids.
class SigningKey {
public:
    using Seed = std::array<std::uint8_t, 32>;
    using PublicKey = std::array<std::uint8_t, 32>;

    static SigningKey from_seed(const Seed& seed) {
        EVP_PKEY* raw =
            EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
        if (raw == nullptr) fail(Errc::invalid_argument, "cannot load Ed25519 key");
        detail::PkeyPtr pkey(raw, detail::PkeyDeleter{});
        PublicKey pub{};
        std::size_t len = pub.size();
        if (EVP_PKEY_get_raw_public_key(raw, pub.data(), &len) != 1 || len != pub.size())
            fail(Errc::invalid_argument, "cannot derive Ed25519 public key");
        return SigningKey(seed, pub, std::move(pkey));
    }

    static SigningKey generate(RandomSource& rng) { return from_seed(rng.array<32>()); }

    const Seed& seed() const noexcept { return seed_; }
    const PublicKey& public_key() const noexcept { return public_; }

    Bytes sign(ByteView message) const {
        detail::MdCtxPtr ctx(EVP_MD_CTX_new());
        Bytes sig(64);
        std::size_t len = sig.size();
        if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey_.get()) != 1 ||
            EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
            fail(Errc::invalid_argument, "Ed25519 signing failed");
        sig.resize(len);
        return sig;
    }

private:
    SigningKey(const Seed& seed, const PublicKey& pub, detail::PkeyPtr pkey)
        : seed_(seed), public_(pub), pkey_(std::move(pkey)) {}

    Seed seed_;
    PublicKey public_;
    detail::PkeyPtr pkey_;
};

inline bool verify_ed25519(ByteView public_key, ByteView message, ByteView signature) {
    if (public_key.size() != 32 || signature.size() != 64) return false;
    EVP_PKEY* raw = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                                public_key.size());
    if (raw == nullptr) return false;
    std::unique_ptr<EVP_PKEY, detail::PkeyDeleter> pkey(raw);
    detail::MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1)
        return false;
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                            message.size()) == 1;
}

} // namespace btcpgp
