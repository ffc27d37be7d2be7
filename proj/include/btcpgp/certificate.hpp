#pragma once

#include <btcpgp/address.hpp>
#include <btcpgp/pgp_key.hpp>
#include <btcpgp/wallet.hpp>

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace btcpgp {

/// 8-byte key identifier: the low 8 bytes of SHA-256 over the canonical
/// public-key encoding. The low 3 bytes travel in key-server fragment headers.
struct KeyId {
    std::uint64_t id64 = 0;

    std::uint32_t short3() const noexcept { return static_cast<std::uint32_t>(id64 & 0xFFFFFF); }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id64));
        return buf;
    }

    static KeyId parse_hex(std::string_view text) {
        auto raw = from_hex(text);
        if (raw.size() != 8) fail(Errc::invalid_argument, "key id must be 16 hex digits");
        KeyId id;
        for (auto b : raw) id.id64 = id.id64 << 8 | b;
        return id;
    }

    auto operator<=>(const KeyId&) const = default;
};

struct PublicKeyMaterial {
    std::string algorithm;
    Bytes der; // SubjectPublicKeyInfo

    bool operator==(const PublicKeyMaterial&) const = default;

    Bytes canonical() const {
        ByteWriter w;
        w.str(algorithm).var(der);
        return std::move(w).take();
    }

    KeyId key_id() const {
        auto h = sha256(canonical());
        KeyId id;
        for (std::size_t i = h.size() - 8; i < h.size(); ++i) id.id64 = id.id64 << 8 | h[i];
        return id;
    }
};

enum class TrustLevel : std::uint8_t { none = 0, marginal = 1, complete = 2 };

inline const char* to_string(TrustLevel t) {
    switch (t) {
    case TrustLevel::none: return "none";
    case TrustLevel::marginal: return "marginal";
    case TrustLevel::complete: return "complete";
    }
    return "?";
}

/// A web-of-trust signature over another certificate plus the incentive fee
/// that followed it.
struct Endorsement {
    KeyId endorser_keyid;
    Bytes endorser_public_key; // DER, needed to check the signature offline
    Address endorser_address;
    TrustLevel trust_level = TrustLevel::none;
    std::int64_t signed_at = 0;
    Bytes signature;
    std::optional<Hash256> fee_txid;

    bool operator==(const Endorsement&) const = default;
};

struct BitcoinPgpCertificate {
    std::string version = "BTCPGP-1";
    std::string holder_name;
    std::string holder_email;
    std::string comment; // "<identity address>|<revocation address>"
    PublicKeyMaterial public_key;
    unsigned key_length = 0;
    std::int64_t validity_start = 0;
    std::int64_t validity_end = 0;
    std::string preferred_symmetric_alg = "AES-256-equivalent";
    Bytes self_signature;
    std::vector<Endorsement> endorsements;

    bool operator==(const BitcoinPgpCertificate&) const = default;

    KeyId key_id() const { return public_key.key_id(); }
};

/// Deterministic encoding of every field except the self-signature and the
/// endorsements; the self-signature and endorsement signatures cover it.
inline Bytes canonical_bytes(const BitcoinPgpCertificate& c) {
    ByteWriter w;
    w.str(c.version).str(c.holder_name).str(c.holder_email).str(c.comment);
    w.str(c.public_key.algorithm).var(c.public_key.der).u32(c.key_length);
    w.i64(c.validity_start).i64(c.validity_end).str(c.preferred_symmetric_alg);
    return std::move(w).take();
}

struct CertificateAddresses {
    Address identity;
    Address revocation;
};

/// Splits the comment field into the identity-verification and revocation
/// addresses. Both must validate and differ.
inline CertificateAddresses extract_addresses(const BitcoinPgpCertificate& c) {
    auto bar = c.comment.find('|');
    if (bar == std::string::npos || c.comment.find('|', bar + 1) != std::string::npos)
        fail(Errc::malformed_comment, "comment must hold exactly two '|'-separated addresses");
    auto id_text = std::string_view(c.comment).substr(0, bar);
    auto rev_text = std::string_view(c.comment).substr(bar + 1);
    if (!Address::is_valid(id_text) || !Address::is_valid(rev_text))
        fail(Errc::malformed_comment, "comment carries an invalid address");
    if (id_text == rev_text) fail(Errc::malformed_comment, "identity and revocation addresses must differ");
    return {Address::parse(id_text), Address::parse(rev_text)};
}

inline bool verify_self_signature(const BitcoinPgpCertificate& c) {
    try {
        auto key = PgpKey::from_public_der(c.public_key.der);
        return key.verify(canonical_bytes(c), c.self_signature);
    } catch (const Error&) {
        return false;
    }
}

/// Private key sealed with AES-256-GCM under a PBKDF2 passphrase key.
struct LockedPrivateKey {
    KeyId key_id;
    Bytes salt;
    Bytes nonce;
    Bytes sealed;

    bool operator==(const LockedPrivateKey&) const = default;

    Bytes encode() const {
        ByteWriter w;
        w.u64(key_id.id64).var(salt).var(nonce).var(sealed);
        return std::move(w).take();
    }

    static LockedPrivateKey decode(ByteView data) {
        ByteReader r(data, Errc::malformed_armor);
        LockedPrivateKey k;
        k.key_id.id64 = r.u64();
        k.salt = r.var();
        k.nonce = r.var();
        k.sealed = r.var();
        r.expect_done("private key");
        return k;
    }
};

namespace detail {
inline Bytes key_id_bytes(KeyId id) {
    ByteWriter w;
    w.u64(id.id64);
    return std::move(w).take();
}
} // namespace detail

inline LockedPrivateKey lock_private_key(const PgpKey& key, std::string_view passphrase, RandomSource& rng) {
    LockedPrivateKey locked;
    locked.key_id = PublicKeyMaterial{key.algorithm(), key.public_der()}.key_id();
    locked.salt = rng.bytes(16);
    locked.nonce = rng.bytes(12);
    auto kek = derive_passphrase_key(passphrase, locked.salt);
    auto der = key.private_der();
    locked.sealed = aead_seal(kek, locked.nonce, der, detail::key_id_bytes(locked.key_id));
    OPENSSL_cleanse(der.data(), der.size());
    OPENSSL_cleanse(kek.data(), kek.size());
    return locked;
}

/// Throws WrongPassphrase when the passphrase does not open the key.
inline PgpKey unlock_private_key(const LockedPrivateKey& locked, std::string_view passphrase) {
    auto kek = derive_passphrase_key(passphrase, locked.salt);
    Bytes der;
    try {
        der = aead_open(kek, locked.nonce, locked.sealed, detail::key_id_bytes(locked.key_id));
    } catch (const Error&) {
        fail(Errc::wrong_passphrase, "passphrase does not unlock key " + locked.key_id.hex());
    }
    auto key = PgpKey::from_private_der(der);
    OPENSSL_cleanse(der.data(), der.size());
    return key;
}

struct CertificateParams {
    std::string key_type = "RSA";
    std::string name;
    std::string email;
    std::string passphrase;
    unsigned key_length = 2048;
    /// Seconds since the epoch; the current time when unset.
    std::optional<std::int64_t> created_at;
    std::int64_t validity_seconds = 2 * 365 * 24 * 3600;
};

struct GeneratedCertificate {
    BitcoinPgpCertificate certificate;
    LockedPrivateKey private_key;
};

/// Creates two fresh wallet addresses, a keypair of the requested size and a
/// self-signed certificate whose comment is "idAddr|revAddr".
inline GeneratedCertificate generate_certificate(const CertificateParams& params, Wallet& wallet,
                                                 RandomSource& rng) {
    if (!PgpKey::supported_length(params.key_length))
        fail(Errc::unsupported_key_length,
             "key length " + std::to_string(params.key_length) + " not in {1024, 2048, 4096, 8192}");
    if (params.validity_seconds <= 0) fail(Errc::invalid_argument, "validity period must be positive");

    const auto& id_addr = wallet.new_address(rng);
    auto id_text = id_addr.str();
    const auto& rev_addr = wallet.new_address(rng);

    auto key = PgpKey::generate(params.key_type, params.key_length, rng);

    BitcoinPgpCertificate c;
    c.holder_name = params.name;
    c.holder_email = params.email;
    c.comment = id_text + "|" + rev_addr.str();
    c.public_key = PublicKeyMaterial{key.algorithm(), key.public_der()};
    c.key_length = params.key_length;
    c.validity_start = params.created_at.value_or(std::chrono::duration_cast<std::chrono::seconds>(
                                                      std::chrono::system_clock::now().time_since_epoch())
                                                      .count());
    c.validity_end = c.validity_start + params.validity_seconds;
    c.self_signature = key.sign(canonical_bytes(c));

    return {std::move(c), lock_private_key(key, params.passphrase, rng)};
}

inline Bytes sign_message(const LockedPrivateKey& key, std::string_view passphrase, std::string_view message) {
    return unlock_private_key(key, passphrase).sign(as_bytes(message));
}

inline bool verify_message(const BitcoinPgpCertificate& signer, std::string_view message, ByteView signature) {
    try {
        return PgpKey::from_public_der(signer.public_key.der).verify(as_bytes(message), signature);
    } catch (const Error&) {
        return false;
    }
}

inline Bytes encrypt_message(const BitcoinPgpCertificate& recipient, std::string_view message, RandomSource& rng) {
    return PgpKey::from_public_der(recipient.public_key.der).encrypt(as_bytes(message), rng);
}

inline std::string decrypt_message(const LockedPrivateKey& key, std::string_view passphrase, ByteView ciphertext) {
    auto plain = unlock_private_key(key, passphrase).decrypt(ciphertext);
    return std::string(plain.begin(), plain.end());
}

} // namespace btcpgp
