#pragma once

#include <btcpgp/certificate.hpp>

#include <openssl/evp.h>

#include <string>
#include <string_view>

namespace btcpgp {

inline constexpr std::string_view kCertificateLabel = "BTCPGP CERTIFICATE";
inline constexpr std::string_view kPrivateKeyLabel = "BTCPGP PRIVATE KEY";
inline constexpr std::size_t kArmorLineWidth = 64;

inline std::string base64_encode(ByteView data) {
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

/// Strict decoding: length multiple of 4, padding only at the end.
inline std::optional<Bytes> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) return std::nullopt;
    std::size_t pad = 0;
    while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
    if (text.substr(0, text.size() - pad).find('=') != std::string_view::npos) return std::nullopt;
    Bytes out(text.size() / 4 * 3);
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) return std::nullopt;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

inline std::string armor(std::string_view label, ByteView body) {
    std::string out = "-----BEGIN " + std::string(label) + "-----\n";
    auto b64 = base64_encode(body);
    for (std::size_t i = 0; i < b64.size(); i += kArmorLineWidth) {
        out += b64.substr(i, kArmorLineWidth);
        out.push_back('\n');
    }
    out += "-----END " + std::string(label) + "-----\n";
    return out;
}

inline Bytes dearmor(std::string_view label, std::string_view text) {
    const std::string begin = "-----BEGIN " + std::string(label) + "-----";
    const std::string end = "-----END " + std::string(label) + "-----";
    auto b = text.find(begin);
    if (b == std::string_view::npos) fail(Errc::malformed_armor, "missing BEGIN line");
    auto e = text.find(end, b + begin.size());
    if (e == std::string_view::npos) fail(Errc::malformed_armor, "missing END line");
    std::string b64;
    for (char c : text.substr(b + begin.size(), e - b - begin.size()))
        if (c != '\n' && c != '\r') b64.push_back(c);
    auto body = base64_decode(b64);
    if (!body || body->empty()) fail(Errc::malformed_armor, "armor body is not valid base64");
    return *body;
}

namespace detail {

inline Bytes encode_endorsement(const Endorsement& e) {
    ByteWriter w;
    w.u64(e.endorser_keyid.id64).var(e.endorser_public_key).str(e.endorser_address.str());
    w.u8(static_cast<std::uint8_t>(e.trust_level)).i64(e.signed_at).var(e.signature);
    w.u8(e.fee_txid ? 1 : 0);
    if (e.fee_txid) w.raw(*e.fee_txid);
    return std::move(w).take();
}

inline Endorsement decode_endorsement(ByteView data) {
    ByteReader r(data, Errc::bad_signature_encoding);
    KeyId keyid{r.u64()};
    auto public_key = r.var();
    auto addr = r.str();
    if (!Address::is_valid(addr)) r.error("endorser address invalid");
    Endorsement e{keyid, std::move(public_key), Address::parse(addr), TrustLevel::none, 0, {}, std::nullopt};
    auto trust = r.u8();
    if (trust > 2) r.error("unknown trust level");
    e.trust_level = static_cast<TrustLevel>(trust);
    e.signed_at = r.i64();
    e.signature = r.var();
    auto has_fee = r.u8();
    if (has_fee > 1) r.error("bad fee flag");
    if (has_fee) {
        auto raw = r.raw(32);
        Hash256 h{};
        std::copy(raw.begin(), raw.end(), h.begin());
        e.fee_txid = h;
    }
    r.expect_done("endorsement");
    return e;
}

inline BitcoinPgpCertificate decode_canonical(ByteView data) {
    ByteReader r(data, Errc::malformed_armor);
    BitcoinPgpCertificate c;
    c.version = r.str();
    c.holder_name = r.str();
    c.holder_email = r.str();
    c.comment = r.str();
    c.public_key.algorithm = r.str();
    c.public_key.der = r.var();
    c.key_length = r.u32();
    c.validity_start = r.i64();
    c.validity_end = r.i64();
    c.preferred_symmetric_alg = r.str();
    r.expect_done("certificate fields");
    return c;
}

} // namespace detail

/// Binary certificate serialization: canonical bytes, self-signature,
/// endorsement records. This is the payload the key server stores.
inline Bytes encode_certificate(const BitcoinPgpCertificate& c) {
    ByteWriter w;
    w.var(canonical_bytes(c)).var(c.self_signature).u32(static_cast<std::uint32_t>(c.endorsements.size()));
    for (const auto& e : c.endorsements) w.var(detail::encode_endorsement(e));
    return std::move(w).take();
}

inline BitcoinPgpCertificate decode_certificate(ByteView data) {
    ByteReader r(data, Errc::malformed_armor);
    auto c = detail::decode_canonical(r.var());
    if (c.validity_start >= c.validity_end) fail(Errc::malformed_armor, "validity period is empty");
    c.self_signature = r.var();
    if (c.key_length == 0 || c.self_signature.size() != c.key_length / 8)
        fail(Errc::bad_signature_encoding, "self-signature length does not match key length");
    auto count = r.u32();
    if (count > r.remaining()) r.error("implausible endorsement count");
    for (std::uint32_t i = 0; i < count; ++i) c.endorsements.push_back(detail::decode_endorsement(r.var()));
    r.expect_done("certificate");
    return c;
}

inline std::string serialize_certificate(const BitcoinPgpCertificate& c) {
    return armor(kCertificateLabel, encode_certificate(c));
}

inline BitcoinPgpCertificate parse_certificate(std::string_view text) {
    return decode_certificate(dearmor(kCertificateLabel, text));
}

inline std::string serialize_private_key(const LockedPrivateKey& k) { return armor(kPrivateKeyLabel, k.encode()); }

inline LockedPrivateKey parse_private_key(std::string_view text) {
    return LockedPrivateKey::decode(dearmor(kPrivateKeyLabel, text));
}

} // namespace btcpgp
