// SPDX-License-Identifier: Apache-2.0
//
// Multi-party harness: one Session per named participant on top of a
// ChatRoom, with a simulated clock and seeded randomness. Every post is
// delivered synchronously, in log order, to each room member that has a
// session.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "strongvelope/session.hpp"
#include "strongvelope/transport.hpp"

namespace strongvelope {

struct Delivery
{
    std::optional<InboundResult> result; // absent when receive threw
    std::string error;

    bool decrypted() const { return result && result->status == InboundStatus::Delivered; }
};

struct SentRecord
{
    std::string sender;
    OutboundMessage message;
    std::optional<Bytes> payload;
};

struct SeedReport
{
    bool own_key_found = false;
    std::size_t batches = 0;
    std::size_t messages = 0;
};

class Simulation
{
public:
    static constexpr std::int64_t kDefaultStartTime = 1'700'000'000;

    explicit Simulation(ByteView seed, RotationPolicy policy = {}, std::int64_t start_time = kDefaultStartTime);

    /// Registers a participant's identity. The handle defaults to 8 bytes
    /// from the seeded stream. Throws std::invalid_argument for a duplicate
    /// name or handle.
    const ParticipantId& declare(const std::string& name, std::optional<ParticipantId> handle = std::nullopt);

    /// Creates sessions for `names` with that set as the composition and
    /// adds them to the room.
    void start(const std::vector<std::string>& names);

    /// Sends through `name`'s session, posts, delivers. Returns the seq.
    std::uint64_t send(const std::string& name, std::optional<Bytes> payload);

    /// Queues an inclusion at `actor`; new participants get a session with
    /// no history and join the room.
    void include(const std::string& actor, const std::vector<std::string>& names);
    void exclude(const std::string& actor, const std::vector<std::string>& names);

    /// Channel membership only, independent of the encrypted session.
    void join_room(const std::string& name);
    void leave_room(const std::string& name);

    /// Replaces `name`'s session with a fresh one and seeds it from room
    /// history, newest batch first, until its own key is found or history
    /// runs out.
    SeedReport resume(const std::string& name);

    void advance(std::int64_t seconds) { now_ += seconds; }
    std::int64_t now() const { return now_; }

    const ParticipantId& handle(const std::string& name) const;
    bool has_session(const std::string& name) const;
    Session& session(const std::string& name);
    const Session& session(const std::string& name) const;
    ChatRoom& room() { return room_; }
    const ChatRoom& room() const { return room_; }
    const RotationPolicy& policy() const { return policy_; }

    const SentRecord& sent(std::uint64_t seq) const;
    std::optional<std::uint64_t> last_seq() const;
    /// What `name` got for message `seq`; nullptr if it was not delivered.
    const Delivery* delivery(const std::string& name, std::uint64_t seq) const;
    std::vector<std::string> names() const;

private:
    struct Member
    {
        ParticipantId id;
        SignKeyPair sign;
        DhKeyPair dh;
        std::unique_ptr<DeterministicRandom> rng;
        std::unique_ptr<Session> session;
        std::map<std::uint64_t, Delivery> deliveries;
    };

    Member& member(const std::string& name);
    const Member& member(const std::string& name) const;
    Directory directory() const;
    void create_session(Member& m, ParticipantSet participants);

    DeterministicRandom root_;
    RotationPolicy policy_;
    std::int64_t now_;
    ChatRoom room_;
    std::map<std::string, Member> members_;
    std::map<std::uint64_t, SentRecord> sent_;
};

} // namespace strongvelope
