// SPDX-License-Identifier: Apache-2.0
//
// Per-participant encryption handler. A Session builds outgoing keyed,
// followup and alter-participant messages and consumes incoming ones,
// tracking sender keys and group composition. Sender identity is taken
// from transport metadata and bound through the signature check against
// the directory entry for that sender.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "strongvelope/crypto.hpp"
#include "strongvelope/key_store.hpp"
#include "strongvelope/wire_codec.hpp"

namespace strongvelope {

struct PublicIdentity
{
    SignPublicKey sign;
    DhPublicKey dh;
};

using Directory = std::map<ParticipantId, PublicIdentity>;
using ParticipantSet = std::set<ParticipantId>;

struct OutboundMessage
{
    Bytes wire;
    MessageType type;
    KeyId key_id;
};

enum class InboundStatus {
    Delivered,    // payload decrypted
    Blind,        // valid message without payload, nothing to display
    NotAddressed, // keyed message with no RECIPIENT record for us
    MissingKey,   // payload references a key we do not hold
};

std::string_view inbound_status_name(InboundStatus status);

struct LearnedKey
{
    ParticipantId participant;
    KeyId id;
    SenderKey key;
};

struct MembershipDelta
{
    ParticipantSet included;
    ParticipantSet excluded;
};

struct InboundResult
{
    ParticipantId sender;
    MessageType type = MessageType::GroupKeyed;
    InboundStatus status = InboundStatus::Blind;
    KeyId key_id;
    std::optional<Bytes> payload;
    std::vector<LearnedKey> learned_keys;
    MembershipDelta membership_delta;

    bool displayable() const { return payload.has_value(); }
};

struct HistoryEntry
{
    ParticipantId sender;
    Bytes wire;
};

struct SeedOutcome
{
    bool own_key_found = false;
    std::size_t processed = 0;
    std::vector<std::string> diagnostics; // one line per skipped message
};

struct SessionCounters
{
    std::uint64_t sent_since_keyed = 0; // since the last rotation; re-sends do not reset it
    std::uint64_t total_since_keyed = 0;
};

enum class KeyedMode {
    Rotate, // fresh sender key
    Resend, // re-distribute the current key
};

class Session
{
public:
    /// `participants` is the current composition and must contain `me`;
    /// every participant must have a directory entry. `rng` must outlive
    /// the session.
    Session(ParticipantId me, SignKeyPair sign_keys, DhKeyPair dh_keys, Directory directory,
            ParticipantSet participants, RandomSource& rng, RotationPolicy policy = {});

    /// Picks the message form: alter-participants when membership changes
    /// are pending; keyed when there is no sender key yet or rotation or
    /// re-send is due; followup otherwise. A blind send (no payload) that
    /// would produce a followup throws BlindFollowupError.
    OutboundMessage send_message(std::optional<ByteView> payload, std::int64_t now);

    /// Keyed message to the composition after pending changes are applied.
    /// Emitted as ALTER_PARTICIPANTS if changes are pending, otherwise
    /// GROUP_KEYED. Clears pending changes and resets the counters.
    OutboundMessage build_keyed_message(std::optional<ByteView> payload, std::int64_t now,
                                        KeyedMode mode = KeyedMode::Rotate);

    /// Throws StateError without a current key, with pending changes, or
    /// while rotation or re-send is due.
    OutboundMessage build_followup_message(ByteView payload, std::int64_t now);

    /// Queues membership changes for the next send. Throws MembershipError
    /// when the sets overlap, an include is already a participant, an
    /// exclude is not one, or `me` is excluded.
    void alter_participants(const ParticipantSet& include, const ParticipantSet& exclude);

    /// Verifies, extracts keys, applies membership changes and decrypts.
    /// Throws AuthenticityError on a bad signature, UnknownParticipant for a
    /// sender without directory entry, WireError/StructureError for
    /// malformed content and KeyConflictError for a key that contradicts
    /// one already held.
    InboundResult receive_message(ByteView wire, const ParticipantId& claimed_sender);

    /// Feeds one history batch (oldest first). Call with successively older
    /// batches until own_key_found or history runs out; in the latter case
    /// the next send rotates.
    SeedOutcome seed_from_history(std::span<const HistoryEntry> batch);

    void add_directory_entry(const ParticipantId& participant, const PublicIdentity& identity);

    const ParticipantId& me() const { return me_; }
    const SignKeyPair& sign_keys() const { return sign_keys_; }
    const DhKeyPair& dh_keys() const { return dh_keys_; }
    const ParticipantSet& participants() const { return participants_; }
    const ParticipantSet& pending_include() const { return pending_include_; }
    const ParticipantSet& pending_exclude() const { return pending_exclude_; }
    /// Composition the next keyed message is addressed to (self included).
    ParticipantSet effective_participants() const;
    const KeyRing& ring() const { return ring_; }
    const SessionCounters& counters() const { return counters_; }
    const RotationPolicy& policy() const { return policy_; }
    /// Set after an alter message excluded us; sending is refused.
    bool excluded() const { return excluded_; }

private:
    struct Processed
    {
        InboundResult result;
        std::vector<ParticipantId> recipients;
        std::optional<KeyId> referenced_key;
    };

    Processed process(ByteView wire, const ParticipantId& sender, bool apply_membership);
    const PublicIdentity& identity_of(const ParticipantId& participant) const;
    void apply_remote_delta(const MembershipDelta& delta);
    OutboundMessage finish(std::vector<TlvRecord> body, MessageType type, const KeyId& key_id);

    ParticipantId me_;
    SignKeyPair sign_keys_;
    DhKeyPair dh_keys_;
    Directory directory_;
    ParticipantSet participants_;
    ParticipantSet pending_include_;
    ParticipantSet pending_exclude_;
    KeyRing ring_;
    SessionCounters counters_;
    RotationPolicy policy_;
    RandomSource* rng_;
    bool excluded_ = false;

    // Everyone each own key was ever sent to; decides who may receive it
    // again as the previous key.
    std::map<KeyId, ParticipantSet> distributed_to_;
    // Newest own key ID referenced by any own message seen while seeding.
    std::optional<KeyId> latest_own_reference_;
};

} // namespace strongvelope
