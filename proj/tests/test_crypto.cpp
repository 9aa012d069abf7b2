// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <openssl/evp.h>

#include <set>

#include "strongvelope/crypto.hpp"
#include "strongvelope/errors.hpp"
#include "test_support.hpp"

using namespace strongvelope;

namespace {

// Plain Ed25519 verification with no message prefix.
bool raw_ed25519_verify(ByteView message, ByteView signature, const SignPublicKey& pub)
{
    EVP_PKEY* key = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    bool ok = key && ctx && EVP_DigestVerifyInit(ctx, nullptr, nullptr, nullptr, key) == 1 &&
              EVP_DigestVerify(ctx, signature.data(), signature.size(), message.data(), message.size()) == 1;
    EVP_MD_CTX_free(ctx);
    EVP_PKEY_free(key);
    return ok;
}

} // namespace

TEST_SUITE("crypto")
{
    TEST_CASE("pairwise key vectors")
    {
        auto vectors = sv_test::load_vectors("pairwise");
        REQUIRE(vectors.size() >= 3);
        for (const auto& v : vectors) {
            auto own = DhKeyPair::from_secret(DhSecret::from_view(v.bytes("own_secret")));
            auto key = derive_pairwise_key(own, DhPublicKey::from_view(v.bytes("other_public")));
            CHECK(to_hex(key.view()) == v.fields.at("expected"));
        }
    }

    TEST_CASE("pairwise key is symmetric")
    {
        DeterministicRandom rng(as_bytes("pairwise symmetry"));
        for (int i = 0; i < 50; ++i) {
            auto a = DhKeyPair::generate(rng);
            auto b = DhKeyPair::generate(rng);
            CHECK(derive_pairwise_key(a, b.public_point) == derive_pairwise_key(b, a.public_point));
        }
    }

    TEST_CASE("low-order peer point is rejected")
    {
        DeterministicRandom rng(as_bytes("low order"));
        auto a = DhKeyPair::generate(rng);
        CHECK_THROWS_AS(derive_pairwise_key(a, DhPublicKey{}), KeyAgreementError);
        auto one = DhPublicKey::from_hex("01" + std::string(62, '0'));
        CHECK_THROWS_AS(derive_pairwise_key(a, one), KeyAgreementError);
    }

    TEST_CASE("recipient IV vectors")
    {
        auto vectors = sv_test::load_vectors("recipient_iv");
        REQUIRE(vectors.size() >= 3);
        for (const auto& v : vectors) {
            auto iv = derive_recipient_iv(MasterNonce::from_view(v.bytes("nonce")),
                                          ParticipantId::from_view(v.bytes("handle")));
            CHECK(to_hex(iv.view()) == v.fields.at("expected"));
        }
    }

    TEST_CASE("recipient IVs differ per recipient")
    {
        DeterministicRandom rng(as_bytes("iv"));
        auto nonce = rng.generate<MasterNonce>();
        std::set<WrapIv> seen;
        for (int i = 0; i < 200; ++i) {
            seen.insert(derive_recipient_iv(nonce, rng.generate<ParticipantId>()));
        }
        CHECK(seen.size() == 200);
    }

    TEST_CASE("payload nonce vectors")
    {
        auto vectors = sv_test::load_vectors("payload_nonce");
        REQUIRE(vectors.size() >= 3);
        for (const auto& v : vectors) {
            auto n = derive_payload_nonce(MasterNonce::from_view(v.bytes("nonce")));
            CHECK(to_hex(n.view()) == v.fields.at("expected"));
        }
    }

    TEST_CASE("CBC key wrap vectors")
    {
        auto vectors = sv_test::load_vectors("cbc_wrap");
        REQUIRE(vectors.size() >= 3);
        for (const auto& v : vectors) {
            auto key = PairwiseKey::from_view(v.bytes("key"));
            auto iv = WrapIv::from_view(v.bytes("iv"));
            Bytes plain = v.bytes("plaintext");
            Bytes wrapped = wrap_sender_keys(plain, key, iv);
            CHECK(to_hex(wrapped) == v.fields.at("expected"));

            auto back = unwrap_sender_keys(wrapped, key, iv);
            CHECK(back.current.view()[0] == plain[0]);
            CHECK(back.previous.has_value() == (plain.size() == 32));
        }
    }

    TEST_CASE("key wrap round trip and lengths")
    {
        DeterministicRandom rng(as_bytes("wrap"));
        auto pk = rng.generate<PairwiseKey>();
        auto iv = rng.generate<WrapIv>();
        auto cur = rng.generate<SenderKey>();
        auto prev = rng.generate<SenderKey>();

        auto one = wrap_sender_keys(cur, std::nullopt, pk, iv);
        CHECK(one.size() == 16);
        auto r1 = unwrap_sender_keys(one, pk, iv);
        CHECK(r1.current == cur);
        CHECK_FALSE(r1.previous);

        auto two = wrap_sender_keys(cur, prev, pk, iv);
        CHECK(two.size() == 32);
        auto r2 = unwrap_sender_keys(two, pk, iv);
        CHECK(r2.current == cur);
        CHECK(r2.previous == prev);

        CHECK_THROWS_AS(wrap_sender_keys(Bytes(24), pk, iv), CryptoError);
        CHECK_THROWS_AS(unwrap_sender_keys(Bytes(15), pk, iv), CryptoError);
        CHECK_THROWS_AS(unwrap_sender_keys(Bytes{}, pk, iv), CryptoError);
    }

    TEST_CASE("CTR payload vectors")
    {
        auto vectors = sv_test::load_vectors("ctr_payload");
        REQUIRE(vectors.size() >= 3);
        for (const auto& v : vectors) {
            auto key = SenderKey::from_view(v.bytes("key"));
            auto nonce = PayloadNonce::from_view(v.bytes("nonce"));
            Bytes ct = encrypt_payload(v.bytes("plaintext"), key, nonce);
            CHECK(to_hex(ct) == v.fields.at("expected"));
            CHECK(decrypt_payload(ct, key, nonce) == v.bytes("plaintext"));
        }
    }

    TEST_CASE("CTR payload round trip (property)")
    {
        std::mt19937_64 gen(23);
        DeterministicRandom rng(as_bytes("ctr"));
        for (std::size_t len : {0u, 1u, 15u, 16u, 17u, 1000u, 65536u}) {
            auto key = rng.generate<SenderKey>();
            auto nonce = rng.generate<PayloadNonce>();
            Bytes plain = sv_test::random_bytes(gen, len);
            Bytes ct = encrypt_payload(plain, key, nonce);
            CHECK(ct.size() == len);
            CHECK(decrypt_payload(ct, key, nonce) == plain);
        }
    }

    TEST_CASE("signature vectors")
    {
        auto vectors = sv_test::load_vectors("signature");
        REQUIRE(vectors.size() >= 3);
        for (const auto& v : vectors) {
            auto keys = SignKeyPair::from_seed(SignSeed::from_view(v.bytes("seed")));
            CHECK(to_hex(keys.public_key.view()) == v.fields.at("public"));
            Bytes body = v.bytes("body");
            auto sig = sign_message(body, keys);
            CHECK(to_hex(sig.view()) == v.fields.at("expected"));
            CHECK(verify_message(body, sig.view(), keys.public_key));
        }
    }

    TEST_CASE("signatures are domain separated")
    {
        for (const auto& v : sv_test::load_vectors("signature")) {
            auto keys = SignKeyPair::from_seed(SignSeed::from_view(v.bytes("seed")));
            Bytes body = v.bytes("body");
            auto sig = sign_message(body, keys);
            CHECK(to_hex(sig.view()) != v.fields.at("unprefixed"));
            CHECK_FALSE(raw_ed25519_verify(body, sig.view(), keys.public_key));
            CHECK_FALSE(verify_message(body, v.bytes("unprefixed"), keys.public_key));
            CHECK(raw_ed25519_verify(body, v.bytes("unprefixed"), keys.public_key));
        }
    }

    TEST_CASE("signature rejection")
    {
        DeterministicRandom rng(as_bytes("sig"));
        auto keys = SignKeyPair::generate(rng);
        auto other = SignKeyPair::generate(rng);
        ByteView text = as_bytes("records after the signature");
        Bytes body(text.begin(), text.end());
        auto sig = sign_message(body, keys);

        CHECK(verify_message(body, sig.view(), keys.public_key));
        CHECK_FALSE(verify_message(body, sig.view(), other.public_key));
        CHECK_FALSE(verify_message(body, ByteView(sig.data(), 63), keys.public_key));
        CHECK_FALSE(verify_message(body, Bytes{}, keys.public_key));

        for (std::size_t i = 0; i < body.size(); ++i) {
            Bytes flipped = body;
            flipped[i] ^= 0x01;
            CHECK_FALSE(verify_message(flipped, sig.view(), keys.public_key));
        }
        Bytes bad_sig(sig.view().begin(), sig.view().end());
        bad_sig[10] ^= 0x80;
        CHECK_FALSE(verify_message(body, bad_sig, keys.public_key));

        auto empty_sig = sign_message({}, keys);
        CHECK(verify_message({}, empty_sig.view(), keys.public_key));
    }

    TEST_CASE("DH clamping")
    {
        auto raw = DhSecret::from_hex(std::string(64, 'f'));
        auto kp = DhKeyPair::from_secret(raw);
        CHECK((kp.secret_scalar.view()[0] & 7) == 0);
        CHECK((kp.secret_scalar.view()[31] & 0x80) == 0);
        CHECK((kp.secret_scalar.view()[31] & 0x40) == 0x40);
    }

    TEST_CASE("deterministic random is reproducible and forks independently")
    {
        DeterministicRandom a(as_bytes("seed")), b(as_bytes("seed"));
        CHECK(a.generate<SenderKey>() == b.generate<SenderKey>());
        auto fa = a.fork("x");
        auto fb = DeterministicRandom(as_bytes("seed")).fork("x");
        CHECK(fa.generate<SenderKey>() == fb.generate<SenderKey>());
        CHECK(DeterministicRandom(as_bytes("seed")).fork("y").generate<SenderKey>() !=
              DeterministicRandom(as_bytes("seed")).fork("x").generate<SenderKey>());
    }

    TEST_CASE("system random nonces do not repeat")
    {
        SystemRandom rng;
        std::set<MasterNonce> seen;
        for (int i = 0; i < 10000; ++i) {
            seen.insert(rng.generate<MasterNonce>());
        }
        CHECK(seen.size() == 10000);
    }
}
