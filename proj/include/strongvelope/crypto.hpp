// SPDX-License-Identifier: Apache-2.0
//
// Cryptographic building blocks of the protocol: Ed25519 message signatures,
// X25519 pairwise keys, HMAC-derived IVs and nonces, AES-128-CBC sender key
// wrapping and AES-128-CTR payload encryption.

#pragma once

#include <optional>
#include <string_view>

#include "strongvelope/bytes.hpp"
#include "strongvelope/random.hpp"

namespace strongvelope {

inline constexpr std::string_view kSignatureMagic = "strongvelopesig";
inline constexpr std::string_view kPairwiseKeyInfo = "strongvelope pairwise key\x01";
inline constexpr std::string_view kPayloadNonceLabel = "payload";

/// 8-byte decoded user handle.
using ParticipantId = ByteArray<8, struct ParticipantIdTag>;
using SenderKey = ByteArray<16, struct SenderKeyTag>;
using MasterNonce = ByteArray<16, struct MasterNonceTag>;
using PairwiseKey = ByteArray<16, struct PairwiseKeyTag>;
using WrapIv = ByteArray<16, struct WrapIvTag>;
using PayloadNonce = ByteArray<12, struct PayloadNonceTag>;
using Signature = ByteArray<64, struct SignatureTag>;
using SignSeed = ByteArray<32, struct SignSeedTag>;
using SignPublicKey = ByteArray<32, struct SignPublicKeyTag>;
using DhSecret = ByteArray<32, struct DhSecretTag>;
using DhPublicKey = ByteArray<32, struct DhPublicKeyTag>;

struct SignKeyPair
{
    SignSeed secret_seed;
    SignPublicKey public_key;

    static SignKeyPair from_seed(const SignSeed& seed);
    static SignKeyPair generate(RandomSource& rng);
};

struct DhKeyPair
{
    DhSecret secret_scalar; // clamped
    DhPublicKey public_point;

    /// Clamps `secret` and computes the matching public point.
    static DhKeyPair from_secret(const DhSecret& secret);
    static DhKeyPair generate(RandomSource& rng);
};

/// X25519 then HKDF-SHA256 (empty salt, info kPairwiseKeyInfo), first 16
/// bytes. Throws KeyAgreementError for an all-zero shared secret.
PairwiseKey derive_pairwise_key(const DhKeyPair& own, const DhPublicKey& other_public);

/// First 16 bytes of HMAC-SHA256(key = nonce, msg = handle).
WrapIv derive_recipient_iv(const MasterNonce& nonce, const ParticipantId& recipient);

/// First 12 bytes of HMAC-SHA256(key = nonce, msg = "payload").
PayloadNonce derive_payload_nonce(const MasterNonce& nonce);

/// AES-128-CBC without padding over one or two concatenated sender keys
/// (current first). Throws CryptoError unless the input is 16 or 32 bytes.
Bytes wrap_sender_keys(ByteView keys, const PairwiseKey& pairwise, const WrapIv& iv);
Bytes wrap_sender_keys(const SenderKey& current, const std::optional<SenderKey>& previous,
                       const PairwiseKey& pairwise, const WrapIv& iv);

struct UnwrappedKeys
{
    SenderKey current;
    std::optional<SenderKey> previous;
};

/// Inverse of wrap_sender_keys. Throws CryptoError unless 16 or 32 bytes.
UnwrappedKeys unwrap_sender_keys(ByteView ciphertext, const PairwiseKey& pairwise, const WrapIv& iv);

/// AES-128-CTR, counter block = nonce || be32(counter), counter from 0.
/// The same call decrypts.
Bytes encrypt_payload(ByteView plaintext, const SenderKey& key, const PayloadNonce& nonce);
inline Bytes decrypt_payload(ByteView ciphertext, const SenderKey& key, const PayloadNonce& nonce)
{
    return encrypt_payload(ciphertext, key, nonce);
}

/// Ed25519 over kSignatureMagic || body.
Signature sign_message(ByteView body, const SignKeyPair& keys);

/// False for any failure, including a signature that is not 64 bytes.
bool verify_message(ByteView body, ByteView signature, const SignPublicKey& signer);

namespace detail {

Bytes hmac_sha256(ByteView key, ByteView message);
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);
Bytes sha256(ByteView data);

} // namespace detail

} // namespace strongvelope
