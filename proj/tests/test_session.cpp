// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <set>

#include "strongvelope/errors.hpp"
#include "strongvelope/simulation.hpp"

using namespace strongvelope;

namespace {

Bytes text(std::string_view s)
{
    auto v = as_bytes(s);
    return Bytes(v.begin(), v.end());
}

std::vector<RecordType> layout(const Bytes& wire)
{
    std::vector<RecordType> out;
    for (const auto& r : decode_message(wire).records) {
        out.push_back(r.type);
    }
    return out;
}

/// RECIPIENT handle -> KEYS value, paired by position.
std::map<ParticipantId, Bytes> keys_by_recipient(const Bytes& wire)
{
    auto msg = decode_message(wire);
    auto recipients = msg.values(RecordType::Recipient);
    auto keys = msg.values(RecordType::Keys);
    std::map<ParticipantId, Bytes> out;
    for (std::size_t i = 0; i < recipients.size(); ++i) {
        out[ParticipantId::from_view(recipients[i])] = Bytes(keys[i].begin(), keys[i].end());
    }
    return out;
}

struct Group
{
    Simulation sim{as_bytes("session tests")};

    explicit Group(std::vector<std::string> start = {"alice", "bob", "carol"},
                   std::vector<std::string> extra = {"dave"})
    {
        for (const auto& n : start) {
            sim.declare(n);
        }
        for (const auto& n : extra) {
            sim.declare(n);
        }
        sim.start(start);
    }

    const Bytes& wire(std::uint64_t seq) const { return sim.sent(seq).message.wire; }
    MessageType type(std::uint64_t seq) const { return sim.sent(seq).message.type; }
};

} // namespace

TEST_SUITE("session")
{
    TEST_CASE("keyed message layout")
    {
        Group g;
        auto seq = g.sim.send("alice", text("hello"));
        CHECK(g.type(seq) == MessageType::GroupKeyed);
        using R = RecordType;
        CHECK(layout(g.wire(seq)) == std::vector<R>{R::Signature, R::MessageType, R::Nonce, R::Recipient, R::Recipient,
                                                    R::Keys, R::Keys, R::KeyIds, R::Payload});
        auto msg = decode_message(g.wire(seq));
        CHECK(msg.find(R::Nonce)->value.size() == 16);
        CHECK(msg.find(R::KeyIds)->value.size() == 4);
        for (const auto& k : msg.values(R::Keys)) {
            CHECK(k.size() == 16);
        }
        auto recipients = keys_by_recipient(g.wire(seq));
        CHECK(recipients.count(g.sim.handle("bob")) == 1);
        CHECK(recipients.count(g.sim.handle("carol")) == 1);
        CHECK(recipients.count(g.sim.handle("alice")) == 0);

        const auto& pub = g.sim.session("alice").sign_keys().public_key;
        CHECK(verify_message(signed_span(g.wire(seq)), signature_value(g.wire(seq)), pub));

        for (const char* who : {"bob", "carol"}) {
            const Delivery* d = g.sim.delivery(who, seq);
            REQUIRE(d);
            REQUIRE(d->decrypted());
            CHECK(*d->result->payload == text("hello"));
            REQUIRE(d->result->learned_keys.size() == 1);
            const auto& learned = d->result->learned_keys[0];
            CHECK(learned.participant == g.sim.handle("alice"));
            CHECK(learned.id == g.sim.sent(seq).message.key_id);
            CHECK(learned.key == g.sim.session("alice").ring().own_current()->key);
        }
    }

    TEST_CASE("blind keyed message")
    {
        Group g;
        auto seq = g.sim.send("alice", std::nullopt);
        CHECK(g.type(seq) == MessageType::GroupKeyed);
        CHECK_FALSE(decode_message(g.wire(seq)).find(RecordType::Payload));
        const Delivery* d = g.sim.delivery("bob", seq);
        REQUIRE(d);
        REQUIRE(d->result);
        CHECK(d->result->status == InboundStatus::Blind);
        CHECK_FALSE(d->result->displayable());
        CHECK(d->result->learned_keys.size() == 1);
    }

    TEST_CASE("followup layout")
    {
        Group g;
        g.sim.send("alice", text("one"));
        auto seq = g.sim.send("alice", text("two"));
        CHECK(g.type(seq) == MessageType::GroupFollowup);
        using R = RecordType;
        CHECK(layout(g.wire(seq)) == std::vector<R>{R::Signature, R::MessageType, R::Nonce, R::KeyIds, R::Payload});
        CHECK(decode_message(g.wire(seq)).find(R::KeyIds)->value.size() == 4);
        for (const char* who : {"bob", "carol"}) {
            const Delivery* d = g.sim.delivery(who, seq);
            REQUIRE(d);
            REQUIRE(d->decrypted());
            CHECK(*d->result->payload == text("two"));
            CHECK(d->result->learned_keys.empty());
        }
    }

    TEST_CASE("rotation every 16 sends")
    {
        Group g;
        for (int i = 1; i <= 33; ++i) {
            auto seq = g.sim.send("alice", text("m" + std::to_string(i)));
            bool keyed = i == 1 || i == 17 || i == 33;
            CHECK_MESSAGE(g.type(seq) == (keyed ? MessageType::GroupKeyed : MessageType::GroupFollowup), "send ", i);
        }
        CHECK(g.sim.session("alice").ring().own_previous().has_value());
    }

    TEST_CASE("re-send after 30 total messages")
    {
        Group g;
        g.sim.send("alice", text("keyed"));
        for (int i = 0; i < 28; ++i) {
            g.sim.send("bob", text("chatter"));
        }
        auto before_key = g.sim.session("alice").ring().own_current()->id;
        auto seq = g.sim.send("alice", text("still followup"));
        CHECK(g.type(seq) == MessageType::GroupFollowup);
        g.sim.send("bob", text("one more"));
        seq = g.sim.send("alice", text("re-send"));
        CHECK(g.type(seq) == MessageType::GroupKeyed);
        // Re-send distributes the existing key rather than a new one.
        CHECK(g.sim.sent(seq).message.key_id == before_key);
    }

    TEST_CASE("re-sends do not postpone rotation")
    {
        Group g;
        std::set<KeyId> ids;
        for (int i = 1; i <= 17; ++i) {
            auto seq = g.sim.send("alice", text("a"));
            ids.insert(g.sim.sent(seq).message.key_id);
            g.sim.send("bob", text("b"));
            g.sim.send("carol", text("c"));
        }
        // 51 messages: alice re-sent at least once and rotated on her 17th send.
        CHECK(ids.size() == 2);
        CHECK(g.sim.session("alice").counters().sent_since_keyed == 1);
    }

    TEST_CASE("blind followup is refused")
    {
        Group g;
        g.sim.send("alice", text("keyed"));
        auto& s = g.sim.session("alice");
        CHECK_THROWS_AS(s.send_message(std::nullopt, g.sim.now()), BlindFollowupError);
    }

    TEST_CASE("followup without a key is a state error")
    {
        Group g;
        CHECK_THROWS_AS(g.sim.session("alice").build_followup_message(text("x"), g.sim.now()), StateError);
    }

    TEST_CASE("including a participant withholds the previous key")
    {
        Group g;
        g.sim.send("alice", text("before"));
        g.sim.include("alice", {"dave"});
        auto seq = g.sim.send("alice", text("welcome"));
        CHECK(g.type(seq) == MessageType::AlterParticipants);

        auto keys = keys_by_recipient(g.wire(seq));
        REQUIRE(keys.size() == 3);
        CHECK(keys.at(g.sim.handle("dave")).size() == 16);
        CHECK(keys.at(g.sim.handle("bob")).size() == 32);
        CHECK(keys.at(g.sim.handle("carol")).size() == 32);

        auto msg = decode_message(g.wire(seq));
        CHECK(msg.find(RecordType::KeyIds)->value.size() == 8);
        REQUIRE(msg.count(RecordType::IncParticipant) == 1);
        CHECK(msg.find(RecordType::IncParticipant)->value == Bytes(g.sim.handle("dave").view().begin(),
                                                                    g.sim.handle("dave").view().end()));
        CHECK(msg.count(RecordType::ExcParticipant) == 0);

        const Delivery* d = g.sim.delivery("dave", seq);
        REQUIRE(d);
        REQUIRE(d->decrypted());
        CHECK(*d->result->payload == text("welcome"));
        CHECK(g.sim.session("dave").ring().key_ids(g.sim.handle("alice")).size() == 1);
        CHECK(g.sim.session("alice").participants().count(g.sim.handle("dave")) == 1);
        CHECK(g.sim.session("alice").pending_include().empty());
    }

    TEST_CASE("excluding a participant addresses only the rest")
    {
        Group g;
        g.sim.send("alice", text("before"));
        g.sim.exclude("alice", {"carol"});
        auto seq = g.sim.send("alice", text("after"));
        CHECK(g.type(seq) == MessageType::AlterParticipants);
        auto keys = keys_by_recipient(g.wire(seq));
        CHECK(keys.size() == 1);
        CHECK(keys.count(g.sim.handle("bob")) == 1);
        auto msg = decode_message(g.wire(seq));
        CHECK(msg.count(RecordType::ExcParticipant) == 1);

        const Delivery* d = g.sim.delivery("carol", seq);
        if (d && d->result) {
            CHECK_FALSE(d->result->payload);
        }
        CHECK(g.sim.session("carol").excluded());
        CHECK_THROWS_AS(g.sim.session("carol").send_message(text("x"), g.sim.now()), StateError);
    }

    TEST_CASE("include and exclude in one message")
    {
        Group g;
        g.sim.send("alice", text("before"));
        g.sim.include("alice", {"dave"});
        g.sim.exclude("alice", {"carol"});
        auto seq = g.sim.send("alice", text("swap"));
        auto msg = decode_message(g.wire(seq));
        CHECK(msg.count(RecordType::IncParticipant) == 1);
        CHECK(msg.count(RecordType::ExcParticipant) == 1);
        auto keys = keys_by_recipient(g.wire(seq));
        CHECK(keys.size() == 2);
        CHECK(keys.count(g.sim.handle("carol")) == 0);
    }

    TEST_CASE("membership preconditions")
    {
        Group g;
        auto& s = g.sim.session("alice");
        auto bob = g.sim.handle("bob");
        auto dave = g.sim.handle("dave");
        CHECK_THROWS_AS(s.alter_participants({bob}, {}), MembershipError);
        CHECK_THROWS_AS(s.alter_participants({}, {dave}), MembershipError);
        CHECK_THROWS_AS(s.alter_participants({}, {s.me()}), MembershipError);
        CHECK_THROWS_AS(s.alter_participants({dave}, {dave}), MembershipError);
        CHECK(s.pending_include().empty());
        CHECK(s.pending_exclude().empty());
    }

    TEST_CASE("recipients of an alter message send keyed next")
    {
        Group g;
        g.sim.send("alice", text("a"));
        g.sim.send("bob", text("b"));
        g.sim.send("bob", text("b2"));
        g.sim.exclude("alice", {"carol"});
        g.sim.send("alice", text("bye carol"));
        auto seq = g.sim.send("bob", text("after"));
        CHECK(g.type(seq) != MessageType::GroupFollowup);
        CHECK(keys_by_recipient(g.wire(seq)).count(g.sim.handle("carol")) == 0);
    }

    TEST_CASE("tampering anywhere after the signature is rejected")
    {
        Group g;
        g.sim.send("alice", text("one"));
        auto seq = g.sim.send("alice", text("two"));
        for (auto s : {std::uint64_t{0}, seq}) {
            Bytes wire = g.wire(s);
            const std::size_t start = 1 + kRecordHeaderSize + 64;
            for (std::size_t i = start; i < wire.size(); ++i) {
                Bytes t = wire;
                t[i] ^= 0x01;
                CHECK_THROWS_AS(g.sim.session("bob").receive_message(t, g.sim.handle("alice")), AuthenticityError);
            }
        }
    }

    TEST_CASE("wrong claimed sender fails authentication")
    {
        Group g;
        auto seq = g.sim.send("alice", text("x"));
        CHECK_THROWS_AS(g.sim.session("bob").receive_message(g.wire(seq), g.sim.handle("carol")),
                        AuthenticityError);
        CHECK_THROWS_AS(g.sim.session("bob").receive_message(g.wire(seq), ParticipantId{}), UnknownParticipant);
    }

    TEST_CASE("followup with an unknown key id is reported missing")
    {
        Group g;
        g.sim.send("alice", text("k"));
        auto f = g.sim.send("alice", text("f"));
        // Same identity as bob, but it never saw the keyed message.
        Session& bob = g.sim.session("bob");
        Directory directory;
        for (const char* who : {"alice", "bob", "carol"}) {
            const Session& s = g.sim.session(who);
            directory[s.me()] = {s.sign_keys().public_key, s.dh_keys().public_point};
        }
        DeterministicRandom rng(as_bytes("stranger"));
        Session stranger(bob.me(), bob.sign_keys(), bob.dh_keys(), directory, bob.participants(), rng);
        auto r = stranger.receive_message(g.wire(f), g.sim.handle("alice"));
        CHECK(r.status == InboundStatus::MissingKey);
        CHECK_FALSE(r.payload);
    }

    TEST_CASE("keyed message not addressed to us is skipped")
    {
        Group g;
        g.sim.send("alice", text("k"));
        g.sim.exclude("alice", {"carol"});
        auto seq = g.sim.send("alice", text("secret"));
        // Deliver again by hand to observe the status.
        Session& carol = g.sim.session("carol");
        auto r = carol.receive_message(g.wire(seq), g.sim.handle("alice"));
        CHECK(r.status == InboundStatus::NotAddressed);
        CHECK_FALSE(r.payload);
        CHECK(r.learned_keys.empty());
    }

    TEST_CASE("own messages are readable from history")
    {
        Group g;
        auto k = g.sim.send("alice", text("mine"));
        auto f = g.sim.send("alice", text("mine too"));
        auto& alice = g.sim.session("alice");
        auto r1 = alice.receive_message(g.wire(k), alice.me());
        CHECK(r1.status == InboundStatus::Delivered);
        CHECK(*r1.payload == text("mine"));
        auto r2 = alice.receive_message(g.wire(f), alice.me());
        CHECK(*r2.payload == text("mine too"));
    }

    TEST_CASE("seeding")
    {
        SUBCASE("empty batch changes nothing")
        {
            Group g;
            auto& s = g.sim.session("alice");
            auto before = s.ring().size();
            auto outcome = s.seed_from_history({});
            CHECK_FALSE(outcome.own_key_found);
            CHECK(outcome.processed == 0);
            CHECK(s.ring().size() == before);
        }
        SUBCASE("recent own keyed message is found in one batch")
        {
            Group g;
            for (int i = 0; i < 10; ++i) {
                g.sim.send("bob", text("b"));
            }
            g.sim.send("alice", text("a"));
            g.sim.send("alice", text("a2"));
            auto key = g.sim.session("alice").ring().own_current()->key;
            auto report = g.sim.resume("alice");
            CHECK(report.own_key_found);
            CHECK(report.batches == 1);
            REQUIRE(g.sim.session("alice").ring().own_current());
            CHECK(g.sim.session("alice").ring().own_current()->key == key);
            auto seq = g.sim.send("alice", text("continuing"));
            CHECK(g.type(seq) == MessageType::GroupFollowup);
            CHECK(g.sim.delivery("bob", seq)->decrypted());
        }
        SUBCASE("no own messages means rotation")
        {
            Group g;
            for (int i = 0; i < 40; ++i) {
                g.sim.send("bob", text("b"));
            }
            auto report = g.sim.resume("alice");
            CHECK_FALSE(report.own_key_found);
            CHECK(report.batches == 2);
            CHECK_FALSE(g.sim.session("alice").ring().own_current());
            auto seq = g.sim.send("alice", text("hi"));
            CHECK(g.type(seq) == MessageType::GroupKeyed);
            CHECK(g.sim.delivery("carol", seq)->decrypted());
        }
        SUBCASE("malformed history entries are skipped with a diagnostic")
        {
            Group g;
            g.sim.send("bob", text("b"));
            std::vector<HistoryEntry> batch{{g.sim.handle("bob"), Bytes{0x00, 0x7f}},
                                            {g.sim.handle("bob"), g.wire(0)}};
            auto outcome = g.sim.session("alice").seed_from_history(batch);
            CHECK(outcome.diagnostics.size() == 1);
            CHECK(outcome.processed == 1);
        }
    }

    TEST_CASE("master nonces do not repeat")
    {
        Simulation sim(as_bytes("nonces"), RotationPolicy{1000000, 1000000, 32});
        sim.declare("alice");
        sim.declare("bob");
        sim.start({"alice", "bob"});
        auto& alice = sim.session("alice");
        std::set<Bytes> nonces;
        Bytes payload = text("x");
        for (int i = 0; i < 10000; ++i) {
            auto out = alice.send_message(payload, sim.now());
            nonces.insert(decode_message(out.wire).find(RecordType::Nonce)->value);
        }
        CHECK(nonces.size() == 10000);
    }
}
