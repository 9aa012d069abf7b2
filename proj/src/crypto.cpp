// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/crypto.hpp"

#include <algorithm>
#include <memory>

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/params.h>

#include "strongvelope/errors.hpp"

namespace strongvelope {

namespace {

struct PkeyFree { void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); } };
struct PkeyCtxFree { void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); } };
struct MdCtxFree { void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); } };
struct CipherCtxFree { void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); } };
struct KdfFree { void operator()(EVP_KDF* p) const { EVP_KDF_free(p); } };
struct KdfCtxFree { void operator()(EVP_KDF_CTX* p) const { EVP_KDF_CTX_free(p); } };

using Pkey = std::unique_ptr<EVP_PKEY, PkeyFree>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxFree>;
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

void check(int ok, const char* what)
{
    if (ok != 1) {
        throw CryptoError(std::string("OpenSSL failure in ") + what);
    }
}

template <typename T>
T* check_ptr(T* p, const char* what)
{
    if (p == nullptr) {
        throw CryptoError(std::string("OpenSSL failure in ") + what);
    }
    return p;
}

Pkey raw_private(int type, ByteView secret)
{
    return Pkey(check_ptr(EVP_PKEY_new_raw_private_key(type, nullptr, secret.data(), secret.size()),
                          "EVP_PKEY_new_raw_private_key"));
}

Pkey raw_public(int type, ByteView pub)
{
    return Pkey(check_ptr(EVP_PKEY_new_raw_public_key(type, nullptr, pub.data(), pub.size()),
                          "EVP_PKEY_new_raw_public_key"));
}

template <typename Out>
Out public_of(EVP_PKEY* key)
{
    Out out;
    std::size_t len = out.size();
    check(EVP_PKEY_get_raw_public_key(key, out.data(), &len), "EVP_PKEY_get_raw_public_key");
    return out;
}

enum class Direction { Encrypt, Decrypt };

Bytes aes128(const EVP_CIPHER* cipher, Direction dir, ByteView key, ByteView iv, ByteView input, bool pad)
{
    CipherCtx ctx(check_ptr(EVP_CIPHER_CTX_new(), "EVP_CIPHER_CTX_new"));
    const int enc = dir == Direction::Encrypt ? 1 : 0;
    check(EVP_CipherInit_ex(ctx.get(), cipher, nullptr, key.data(), iv.data(), enc), "EVP_CipherInit_ex");
    check(EVP_CIPHER_CTX_set_padding(ctx.get(), pad ? 1 : 0), "EVP_CIPHER_CTX_set_padding");
    Bytes out(input.size() + 16);
    int len = 0;
    int total = 0;
    if (!input.empty()) {
        check(EVP_CipherUpdate(ctx.get(), out.data(), &len, input.data(), static_cast<int>(input.size())),
              "EVP_CipherUpdate");
        total = len;
    }
    check(EVP_CipherFinal_ex(ctx.get(), out.data() + total, &len), "EVP_CipherFinal_ex");
    total += len;
    out.resize(static_cast<std::size_t>(total));
    return out;
}

} // namespace

namespace detail {

Bytes hmac_sha256(ByteView key, ByteView message)
{
    Bytes out(32);
    unsigned int len = 0;
    static const std::uint8_t kEmpty = 0;
    const std::uint8_t* key_ptr = key.empty() ? &kEmpty : key.data();
    check_ptr(HMAC(EVP_sha256(), key_ptr, static_cast<int>(key.size()), message.data(), message.size(), out.data(),
                   &len),
              "HMAC");
    return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length)
{
    std::unique_ptr<EVP_KDF, KdfFree> kdf(check_ptr(EVP_KDF_fetch(nullptr, "HKDF", nullptr), "EVP_KDF_fetch"));
    std::unique_ptr<EVP_KDF_CTX, KdfCtxFree> ctx(check_ptr(EVP_KDF_CTX_new(kdf.get()), "EVP_KDF_CTX_new"));

    char digest[] = "SHA256";
    OSSL_PARAM params[5];
    std::size_t n = 0;
    params[n++] = OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0);
    params[n++] = OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_KEY, const_cast<std::uint8_t*>(ikm.data()),
                                                    ikm.size());
    if (!salt.empty()) {
        params[n++] = OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_SALT, const_cast<std::uint8_t*>(salt.data()),
                                                        salt.size());
    }
    params[n++] = OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_INFO, const_cast<std::uint8_t*>(info.data()),
                                                    info.size());
    params[n] = OSSL_PARAM_construct_end();

    Bytes out(length);
    check(EVP_KDF_derive(ctx.get(), out.data(), out.size(), params), "EVP_KDF_derive");
    return out;
}

Bytes sha256(ByteView data)
{
    Bytes out(32);
    unsigned int len = 0;
    check(EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr), "EVP_Digest");
    return out;
}

} // namespace detail

SignKeyPair SignKeyPair::from_seed(const SignSeed& seed)
{
    auto key = raw_private(EVP_PKEY_ED25519, seed.view());
    return {seed, public_of<SignPublicKey>(key.get())};
}

SignKeyPair SignKeyPair::generate(RandomSource& rng)
{
    return from_seed(rng.generate<SignSeed>());
}

DhKeyPair DhKeyPair::from_secret(const DhSecret& secret)
{
    DhSecret clamped = secret;
    clamped.data()[0] &= 248;
    clamped.data()[31] &= 127;
    clamped.data()[31] |= 64;
    auto key = raw_private(EVP_PKEY_X25519, clamped.view());
    return {clamped, public_of<DhPublicKey>(key.get())};
}

DhKeyPair DhKeyPair::generate(RandomSource& rng)
{
    return from_secret(rng.generate<DhSecret>());
}

PairwiseKey derive_pairwise_key(const DhKeyPair& own, const DhPublicKey& other_public)
{
    auto mine = raw_private(EVP_PKEY_X25519, own.secret_scalar.view());
    auto peer = raw_public(EVP_PKEY_X25519, other_public.view());
    PkeyCtx ctx(check_ptr(EVP_PKEY_CTX_new(mine.get(), nullptr), "EVP_PKEY_CTX_new"));
    check(EVP_PKEY_derive_init(ctx.get()), "EVP_PKEY_derive_init");
    check(EVP_PKEY_derive_set_peer(ctx.get(), peer.get()), "EVP_PKEY_derive_set_peer");

    std::array<std::uint8_t, 32> shared{};
    std::size_t len = shared.size();
    // OpenSSL itself refuses an all-zero result; either way it is a
    // key-agreement failure, not an internal error.
    if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != shared.size() ||
        std::all_of(shared.begin(), shared.end(), [](std::uint8_t b) { return b == 0; })) {
        throw KeyAgreementError("X25519 produced no usable shared secret (low-order public key?)");
    }

    auto okm = detail::hkdf_sha256(shared, {}, as_bytes(kPairwiseKeyInfo), 32);
    return PairwiseKey::from_view(ByteView(okm).first(PairwiseKey::kSize));
}

WrapIv derive_recipient_iv(const MasterNonce& nonce, const ParticipantId& recipient)
{
    auto mac = detail::hmac_sha256(nonce.view(), recipient.view());
    return WrapIv::from_view(ByteView(mac).first(WrapIv::kSize));
}

PayloadNonce derive_payload_nonce(const MasterNonce& nonce)
{
    auto mac = detail::hmac_sha256(nonce.view(), as_bytes(kPayloadNonceLabel));
    return PayloadNonce::from_view(ByteView(mac).first(PayloadNonce::kSize));
}

Bytes wrap_sender_keys(ByteView keys, const PairwiseKey& pairwise, const WrapIv& iv)
{
    if (keys.size() != 16 && keys.size() != 32) {
        throw CryptoError("sender key wrap expects 16 or 32 bytes, got " + std::to_string(keys.size()));
    }
    return aes128(EVP_aes_128_cbc(), Direction::Encrypt, pairwise.view(), iv.view(), keys, false);
}

Bytes wrap_sender_keys(const SenderKey& current, const std::optional<SenderKey>& previous,
                       const PairwiseKey& pairwise, const WrapIv& iv)
{
    Bytes plain(current.view().begin(), current.view().end());
    if (previous) {
        append(plain, previous->view());
    }
    return wrap_sender_keys(plain, pairwise, iv);
}

UnwrappedKeys unwrap_sender_keys(ByteView ciphertext, const PairwiseKey& pairwise, const WrapIv& iv)
{
    if (ciphertext.size() != 16 && ciphertext.size() != 32) {
        throw CryptoError("wrapped sender keys must be 16 or 32 bytes, got " + std::to_string(ciphertext.size()));
    }
    auto plain = aes128(EVP_aes_128_cbc(), Direction::Decrypt, pairwise.view(), iv.view(), ciphertext, false);
    UnwrappedKeys out{SenderKey::from_view(ByteView(plain).first(16)), std::nullopt};
    if (plain.size() == 32) {
        out.previous = SenderKey::from_view(ByteView(plain).subspan(16));
    }
    return out;
}

Bytes encrypt_payload(ByteView plaintext, const SenderKey& key, const PayloadNonce& nonce)
{
    // OpenSSL increments all 128 bits of the counter block; below 2^32
    // blocks that equals a 32-bit counter after the 12-byte nonce.
    if (plaintext.size() / 16 >= (std::size_t{1} << 32)) {
        throw CryptoError("payload exceeds the 32-bit block counter");
    }
    std::array<std::uint8_t, 16> counter_block{};
    std::copy(nonce.view().begin(), nonce.view().end(), counter_block.begin());
    return aes128(EVP_aes_128_ctr(), Direction::Encrypt, key.view(), counter_block, plaintext, false);
}

Signature sign_message(ByteView body, const SignKeyPair& keys)
{
    Bytes message(kSignatureMagic.begin(), kSignatureMagic.end());
    append(message, body);

    auto key = raw_private(EVP_PKEY_ED25519, keys.secret_seed.view());
    MdCtx ctx(check_ptr(EVP_MD_CTX_new(), "EVP_MD_CTX_new"));
    check(EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()), "EVP_DigestSignInit");
    Signature sig;
    std::size_t len = sig.size();
    check(EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()), "EVP_DigestSign");
    return sig;
}

bool verify_message(ByteView body, ByteView signature, const SignPublicKey& signer)
{
    if (signature.size() != Signature::kSize) {
        return false;
    }
    Bytes message(kSignatureMagic.begin(), kSignatureMagic.end());
    append(message, body);

    EVP_PKEY* raw = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, signer.data(), signer.size());
    if (raw == nullptr) {
        return false;
    }
    Pkey key(raw);
    MdCtx ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
        return false;
    }
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(), message.size()) == 1;
}

} // namespace strongvelope
