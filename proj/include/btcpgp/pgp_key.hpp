#pragma once

#include <btcpgp/signing_key.hpp>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/param_build.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include <array>
#include <memory>
#include <string>

namespace btcpgp {

namespace detail {

struct BnDeleter {
    void operator()(BIGNUM* p) const noexcept { BN_clear_free(p); }
};
struct BnCtxDeleter {
    void operator()(BN_CTX* p) const noexcept { BN_CTX_free(p); }
};
struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const noexcept { EVP_PKEY_CTX_free(p); }
};
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* p) const noexcept { EVP_CIPHER_CTX_free(p); }
};
struct ParamBldDeleter {
    void operator()(OSSL_PARAM_BLD* p) const noexcept { OSSL_PARAM_BLD_free(p); }
};
struct ParamDeleter {
    void operator()(OSSL_PARAM* p) const noexcept { OSSL_PARAM_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

inline BnPtr bn() {
    BnPtr p(BN_secure_new());
    if (!p) fail(Errc::invalid_argument, "BIGNUM allocation failed");
    return p;
}

inline void check(int rc, const char* what) {
    if (rc != 1) fail(Errc::invalid_argument, std::string("crypto failure: ") + what);
}

// Random prime of exactly `bits` bits with the top two bits set (so the
// product of two such primes has exactly 2*bits bits) and gcd(p-1, e) = 1.
// Candidates come from `rng`, which makes seeded key generation replayable.
inline BnPtr random_prime(int bits, const BIGNUM* e, RandomSource& rng, BN_CTX* ctx) {
    auto p = bn();
    auto pm1 = bn();
    auto g = bn();
    if (bits < 64 || bits % 8 != 0) fail(Errc::unsupported_key_length, "prime size must be a multiple of 8, >= 64");
    const auto len = static_cast<std::size_t>(bits / 8);
    for (;;) {
        auto raw = rng.bytes(len);
        raw[0] |= 0xC0;
        raw[len - 1] |= 0x01;
        if (BN_bin2bn(raw.data(), static_cast<int>(raw.size()), p.get()) == nullptr)
            fail(Errc::invalid_argument, "BN_bin2bn failed");
        while (BN_num_bits(p.get()) == bits) {
            if (BN_check_prime(p.get(), ctx, nullptr) == 1) {
                check(BN_sub(pm1.get(), p.get(), BN_value_one()), "BN_sub");
                check(BN_gcd(g.get(), pm1.get(), e, ctx), "BN_gcd");
                if (BN_is_one(g.get())) return p;
            }
            check(BN_add_word(p.get(), 2), "BN_add_word");
        }
    }
}

inline Bytes aead(bool seal, ByteView key, ByteView nonce, ByteView input, ByteView aad) {
    CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx || key.size() != 32 || nonce.size() != 12) fail(Errc::invalid_argument, "bad AEAD parameters");
    constexpr std::size_t tag_len = 16;
    if (!seal && input.size() < tag_len) fail(Errc::decryption_failed, "ciphertext too short");
    auto body = seal ? input : input.first(input.size() - tag_len);
    Bytes out(body.size() + (seal ? tag_len : 0));
    int len = 0;
    auto init = seal ? EVP_EncryptInit_ex : EVP_DecryptInit_ex;
    check(init(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()), "AEAD init");
    auto update = seal ? EVP_EncryptUpdate : EVP_DecryptUpdate;
    if (!aad.empty()) check(update(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())), "AEAD aad");
    if (!body.empty())
        check(update(ctx.get(), out.data(), &len, body.data(), static_cast<int>(body.size())), "AEAD update");
    if (seal) {
        check(EVP_EncryptFinal_ex(ctx.get(), out.data() + body.size(), &len), "AEAD final");
        check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, tag_len, out.data() + body.size()),
              "AEAD tag");
        return out;
    }
    Bytes tag(input.end() - tag_len, input.end());
    check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, tag_len, tag.data()), "AEAD tag");
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + body.size(), &len) != 1)
        fail(Errc::decryption_failed, "authentication tag mismatch");
    return out;
}

} // namespace detail

/// AES-256-GCM; output is ciphertext || 16-byte tag.
inline Bytes aead_seal(ByteView key, ByteView nonce, ByteView plaintext, ByteView aad = {}) {
    return detail::aead(true, key, nonce, plaintext, aad);
}

/// Throws DecryptionFailed when the tag does not authenticate.
inline Bytes aead_open(ByteView key, ByteView nonce, ByteView sealed, ByteView aad = {}) {
    return detail::aead(false, key, nonce, sealed, aad);
}

inline constexpr int kKdfIterations = 20'000;

/// PBKDF2-HMAC-SHA256 passphrase key.
inline std::array<std::uint8_t, 32> derive_passphrase_key(std::string_view passphrase, ByteView salt) {
    std::array<std::uint8_t, 32> key{};
    detail::check(PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                                    static_cast<int>(salt.size()), kKdfIterations, EVP_sha256(),
                                    static_cast<int>(key.size()), key.data()),
                  "PBKDF2");
    return key;
}

/// Asymmetric certificate key. RSA is the one implemented algorithm; the
/// surface (generate, sign, verify, encrypt, decrypt, DER import/export) is
/// what the certificate layer depends on.
class PgpKey {
public:
    static constexpr std::string_view kRsa = "RSA";

    static bool supported_length(unsigned bits) noexcept {
        return bits == 1024 || bits == 2048 || bits == 4096 || bits == 8192;
    }

    static PgpKey generate(std::string_view algorithm, unsigned bits, RandomSource& rng) {
        if (algorithm != kRsa) fail(Errc::invalid_argument, "unsupported key type '" + std::string(algorithm) + "'");
        if (!supported_length(bits))
            fail(Errc::unsupported_key_length, "unsupported key length " + std::to_string(bits));
        using namespace detail;
        BnCtxPtr ctx(BN_CTX_secure_new());
        auto e = bn();
        check(BN_set_word(e.get(), RSA_F4), "BN_set_word");
        auto half = static_cast<int>(bits / 2);
        BnPtr p, q;
        do {
            p = random_prime(half, e.get(), rng, ctx.get());
            q = random_prime(half, e.get(), rng, ctx.get());
        } while (BN_cmp(p.get(), q.get()) == 0);
        if (BN_cmp(p.get(), q.get()) < 0) std::swap(p, q);

        auto n = bn(), pm1 = bn(), qm1 = bn(), phi = bn(), g = bn(), lambda = bn(), rem = bn();
        auto d = bn(), dp = bn(), dq = bn(), qinv = bn();
        check(BN_mul(n.get(), p.get(), q.get(), ctx.get()), "BN_mul");
        check(BN_sub(pm1.get(), p.get(), BN_value_one()), "BN_sub");
        check(BN_sub(qm1.get(), q.get(), BN_value_one()), "BN_sub");
        check(BN_mul(phi.get(), pm1.get(), qm1.get(), ctx.get()), "BN_mul");
        check(BN_gcd(g.get(), pm1.get(), qm1.get(), ctx.get()), "BN_gcd");
        check(BN_div(lambda.get(), rem.get(), phi.get(), g.get(), ctx.get()), "BN_div");
        if (BN_mod_inverse(d.get(), e.get(), lambda.get(), ctx.get()) == nullptr) fail(Errc::invalid_argument, "no RSA inverse");
        check(BN_mod(dp.get(), d.get(), pm1.get(), ctx.get()), "BN_mod");
        check(BN_mod(dq.get(), d.get(), qm1.get(), ctx.get()), "BN_mod");
        if (BN_mod_inverse(qinv.get(), q.get(), p.get(), ctx.get()) == nullptr) fail(Errc::invalid_argument, "no CRT inverse");

        std::unique_ptr<OSSL_PARAM_BLD, ParamBldDeleter> bld(OSSL_PARAM_BLD_new());
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()), "param n");
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get()), "param e");
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_D, d.get()), "param d");
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR1, p.get()), "param p");
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_FACTOR2, q.get()), "param q");
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT1, dp.get()), "param dp");
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_EXPONENT2, dq.get()), "param dq");
        check(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_COEFFICIENT1, qinv.get()), "param qinv");
        std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld.get()));
        PkeyCtxPtr pctx(EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
        EVP_PKEY* raw = nullptr;
        if (!params || !pctx || EVP_PKEY_fromdata_init(pctx.get()) != 1 ||
            EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) != 1)
            fail(Errc::invalid_argument, "cannot assemble RSA key");
        return PgpKey(PkeyPtr(raw, PkeyDeleter{}), true);
    }

    static PgpKey from_public_der(ByteView der) {
        const unsigned char* p = der.data();
        EVP_PKEY* raw = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
        if (raw == nullptr || p != der.data() + der.size()) {
            EVP_PKEY_free(raw);
            fail(Errc::bad_signature_encoding, "malformed public key encoding");
        }
        return PgpKey(detail::PkeyPtr(raw, detail::PkeyDeleter{}), false);
    }

    static PgpKey from_private_der(ByteView der) {
        const unsigned char* p = der.data();
        EVP_PKEY* raw = d2i_AutoPrivateKey(nullptr, &p, static_cast<long>(der.size()));
        if (raw == nullptr) fail(Errc::decryption_failed, "malformed private key encoding");
        return PgpKey(detail::PkeyPtr(raw, detail::PkeyDeleter{}), true);
    }

    std::string algorithm() const { return std::string(kRsa); }
    unsigned bits() const { return static_cast<unsigned>(EVP_PKEY_get_bits(pkey_.get())); }
    bool has_private() const noexcept { return private_; }

    Bytes public_der() const {
        unsigned char* out = nullptr;
        int len = i2d_PUBKEY(pkey_.get(), &out);
        if (len <= 0) fail(Errc::invalid_argument, "cannot encode public key");
        Bytes der(out, out + len);
        OPENSSL_free(out);
        return der;
    }

    Bytes private_der() const {
        if (!private_) fail(Errc::invalid_argument, "no private key material");
        unsigned char* out = nullptr;
        int len = i2d_PrivateKey(pkey_.get(), &out);
        if (len <= 0) fail(Errc::invalid_argument, "cannot encode private key");
        Bytes der(out, out + len);
        OPENSSL_clear_free(out, static_cast<std::size_t>(len));
        return der;
    }

    /// RSASSA-PKCS1-v1_5 over SHA-256 (deterministic).
    Bytes sign(ByteView message) const {
        detail::MdCtxPtr ctx(EVP_MD_CTX_new());
        std::size_t len = 0;
        detail::check(EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, pkey_.get()), "sign init");
        detail::check(EVP_DigestSign(ctx.get(), nullptr, &len, message.data(), message.size()), "sign size");
        Bytes sig(len);
        detail::check(EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()), "sign");
        sig.resize(len);
        return sig;
    }

    bool verify(ByteView message, ByteView signature) const {
        detail::MdCtxPtr ctx(EVP_MD_CTX_new());
        if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, pkey_.get()) != 1) return false;
        return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(), message.size()) == 1;
    }

    /// Hybrid encryption: a fresh AES-256-GCM key wrapped with RSA-OAEP(SHA-256).
    /// Layout: u32 wrapped-key length, wrapped key, 12-byte nonce, ciphertext || tag.
    Bytes encrypt(ByteView plaintext, RandomSource& rng) const {
        auto session = rng.array<32>();
        auto nonce = rng.array<12>();
        detail::PkeyCtxPtr ctx(EVP_PKEY_CTX_new(pkey_.get(), nullptr));
        detail::check(EVP_PKEY_encrypt_init(ctx.get()), "encrypt init");
        detail::check(EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING), "oaep");
        detail::check(EVP_PKEY_CTX_set_rsa_oaep_md(ctx.get(), EVP_sha256()), "oaep md");
        std::size_t len = 0;
        detail::check(EVP_PKEY_encrypt(ctx.get(), nullptr, &len, session.data(), session.size()), "wrap size");
        Bytes wrapped(len);
        detail::check(EVP_PKEY_encrypt(ctx.get(), wrapped.data(), &len, session.data(), session.size()), "wrap");
        wrapped.resize(len);
        ByteWriter w;
        w.var(wrapped).raw(nonce).raw(aead_seal(session, nonce, plaintext));
        OPENSSL_cleanse(session.data(), session.size());
        return std::move(w).take();
    }

    Bytes decrypt(ByteView ciphertext) const {
        if (!private_) fail(Errc::decryption_failed, "no private key material");
        ByteReader r(ciphertext, Errc::decryption_failed);
        auto wrapped = r.var();
        auto nonce = r.raw(12);
        auto sealed = r.raw(r.remaining());
        detail::PkeyCtxPtr ctx(EVP_PKEY_CTX_new(pkey_.get(), nullptr));
        detail::check(EVP_PKEY_decrypt_init(ctx.get()), "decrypt init");
        detail::check(EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING), "oaep");
        detail::check(EVP_PKEY_CTX_set_rsa_oaep_md(ctx.get(), EVP_sha256()), "oaep md");
        Bytes session(wrapped.size());
        std::size_t len = session.size();
        if (EVP_PKEY_decrypt(ctx.get(), session.data(), &len, wrapped.data(), wrapped.size()) != 1 || len != 32)
            fail(Errc::decryption_failed, "cannot unwrap session key");
        session.resize(len);
        auto plain = aead_open(session, nonce, sealed);
        OPENSSL_cleanse(session.data(), session.size());
        return plain;
    }

private:
    PgpKey(detail::PkeyPtr pkey, bool has_private) : pkey_(std::move(pkey)), private_(has_private) {}

    detail::PkeyPtr pkey_;
    bool private_ = false;
};

} // namespace btcpgp
