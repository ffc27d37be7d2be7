#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace btcpgp {

enum class Errc {
    invalid_argument,
    invalid_amount,
    invalid_address,
    insufficient_funds,
    payload_too_large,
    validation_failure,
    transaction_not_confirmed,
    corrupt_ledger,
    io_error,
    unsupported_key_length,
    malformed_armor,
    bad_signature_encoding,
    malformed_comment,
    wrong_passphrase,
    verification_failed,
    decryption_failed,
    not_owner,
    already_returned,
    already_revoked,
    revoked_certificate,
    not_confirmed_verifier,
    missing_confirmation,
    fee_payment_failed,
    empty_payload,
    key_too_large,
    no_fragments_found,
    key_id_mismatch,
    incomplete_key,
    inconsistent_headers,
    duplicate_fragment,
    payload_too_short,
    header_invariant_violated,
    partial_storage,
};

/// Stable token printed by the CLI for each error kind.
constexpr const char* token(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::invalid_amount: return "InvalidAmount";
    case Errc::invalid_address: return "InvalidAddress";
    case Errc::insufficient_funds: return "InsufficientFunds";
    case Errc::payload_too_large: return "PayloadTooLarge";
    case Errc::validation_failure: return "ValidationFailure";
    case Errc::transaction_not_confirmed: return "TransactionNotConfirmed";
    case Errc::corrupt_ledger: return "CorruptLedger";
    case Errc::io_error: return "IoError";
    case Errc::unsupported_key_length: return "UnsupportedKeyLength";
    case Errc::malformed_armor: return "MalformedArmor";
    case Errc::bad_signature_encoding: return "BadSignatureEncoding";
    case Errc::malformed_comment: return "MalformedComment";
    case Errc::wrong_passphrase: return "WrongPassphrase";
    case Errc::verification_failed: return "VerificationFailed";
    case Errc::decryption_failed: return "DecryptionFailed";
    case Errc::not_owner: return "NotOwner";
    case Errc::already_returned: return "AlreadyReturned";
    case Errc::already_revoked: return "AlreadyRevoked";
    case Errc::revoked_certificate: return "RevokedCertificate";
    case Errc::not_confirmed_verifier: return "NotConfirmedVerifier";
    case Errc::missing_confirmation: return "MissingConfirmation";
    case Errc::fee_payment_failed: return "FeePaymentFailed";
    case Errc::empty_payload: return "EmptyPayload";
    case Errc::key_too_large: return "KeyTooLarge";
    case Errc::no_fragments_found: return "NoFragmentsFound";
    case Errc::key_id_mismatch: return "KeyIdMismatch";
    case Errc::incomplete_key: return "IncompleteKey";
    case Errc::inconsistent_headers: return "InconsistentHeaders";
    case Errc::duplicate_fragment: return "DuplicateFragment";
    case Errc::payload_too_short: return "PayloadTooShort";
    case Errc::header_invariant_violated: return "HeaderInvariantViolated";
    case Errc::partial_storage: return "PartialStorage";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }
    const char* token() const noexcept { return btcpgp::token(code_); }

private:
    Errc code_;
};

/// Raised by key retrieval when some fragment ids never reached the ledger.
class IncompleteKeyError : public Error {
public:
    IncompleteKeyError(std::vector<std::uint8_t> missing, const std::string& what)
        : Error(Errc::incomplete_key, what), missing_(std::move(missing)) {}

    const std::vector<std::uint8_t>& missing_fids() const noexcept { return missing_; }

private:
    std::vector<std::uint8_t> missing_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace btcpgp
