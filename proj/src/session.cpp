// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/session.hpp"

#include <algorithm>

#include "strongvelope/errors.hpp"

namespace strongvelope {

std::string_view inbound_status_name(InboundStatus status)
{
    switch (status) {
    case InboundStatus::Delivered: return "delivered";
    case InboundStatus::Blind: return "blind";
    case InboundStatus::NotAddressed: return "not-addressed";
    case InboundStatus::MissingKey: return "missing-key";
    }
    return "?";
}

namespace {

TlvRecord record(RecordType type, ByteView value)
{
    return {type, Bytes(value.begin(), value.end())};
}

TlvRecord key_id_record(const KeyId& current, const std::optional<KeyId>& previous)
{
    TlvRecord r{RecordType::KeyIds, {}};
    append(r.value, current.to_bytes());
    if (previous) {
        append(r.value, previous->to_bytes());
    }
    return r;
}

ParticipantId participant_from(ByteView value, std::string_view what)
{
    if (value.size() != ParticipantId::kSize) {
        throw StructureError(std::string(what) + " value must be 8 bytes, got " + std::to_string(value.size()));
    }
    return ParticipantId::from_view(value);
}

const TlvRecord& require(const ProtocolMessage& msg, RecordType type)
{
    const TlvRecord* r = msg.find(type);
    if (r == nullptr) {
        throw StructureError("missing " + std::string(record_type_name(type)) + " record");
    }
    return *r;
}

} // namespace

Session::Session(ParticipantId me, SignKeyPair sign_keys, DhKeyPair dh_keys, Directory directory,
                 ParticipantSet participants, RandomSource& rng, RotationPolicy policy)
    : me_(me),
      sign_keys_(std::move(sign_keys)),
      dh_keys_(std::move(dh_keys)),
      directory_(std::move(directory)),
      participants_(std::move(participants)),
      policy_(policy),
      rng_(&rng)
{
    policy_.validate();
    if (!participants_.contains(me_)) {
        throw MembershipError("own handle " + me_.hex() + " is not among the participants");
    }
    directory_.try_emplace(me_, PublicIdentity{sign_keys_.public_key, dh_keys_.public_point});
}

void Session::add_directory_entry(const ParticipantId& participant, const PublicIdentity& identity)
{
    directory_[participant] = identity;
}

const PublicIdentity& Session::identity_of(const ParticipantId& participant) const
{
    auto it = directory_.find(participant);
    if (it == directory_.end()) {
        throw UnknownParticipant("no public keys known for participant " + participant.hex());
    }
    return it->second;
}

ParticipantSet Session::effective_participants() const
{
    ParticipantSet out = participants_;
    out.insert(pending_include_.begin(), pending_include_.end());
    for (const auto& p : pending_exclude_) {
        out.erase(p);
    }
    return out;
}

// Sending --------------------------------------------------------------------

OutboundMessage Session::send_message(std::optional<ByteView> payload, std::int64_t now)
{
    if (excluded_) {
        throw StateError("this participant has been excluded from the chat");
    }
    if (!pending_include_.empty() || !pending_exclude_.empty() || !ring_.own_current()) {
        return build_keyed_message(payload, now, KeyedMode::Rotate);
    }
    const auto due = due_actions(counters_.sent_since_keyed, counters_.total_since_keyed, policy_);
    if (due.rotate) {
        return build_keyed_message(payload, now, KeyedMode::Rotate);
    }
    if (due.resend) {
        return build_keyed_message(payload, now, KeyedMode::Resend);
    }
    if (!payload) {
        throw BlindFollowupError();
    }
    return build_followup_message(*payload, now);
}

OutboundMessage Session::build_keyed_message(std::optional<ByteView> payload, std::int64_t now, KeyedMode mode)
{
    if (excluded_) {
        throw StateError("this participant has been excluded from the chat");
    }
    const ParticipantSet composition = effective_participants();
    std::vector<ParticipantId> recipients;
    for (const auto& p : composition) {
        if (p != me_) {
            recipients.push_back(p);
        }
    }
    if (recipients.empty()) {
        throw StateError("a keyed message needs at least one other participant");
    }
    std::vector<PairwiseKey> pairwise;
    pairwise.reserve(recipients.size());
    for (const auto& r : recipients) {
        pairwise.push_back(derive_pairwise_key(dh_keys_, identity_of(r).dh));
    }

    const bool altering = !pending_include_.empty() || !pending_exclude_.empty();
    const bool rotating = mode == KeyedMode::Rotate || altering || !ring_.own_current();
    if (rotating) {
        auto fresh = ring_.rotate(now, *rng_);
        ring_.record_participant_key(me_, fresh.id, fresh.key);
    }
    const OwnKey current = *ring_.own_current();
    const std::optional<OwnKey> previous = ring_.own_previous();

    auto entitled_to_previous = [&](const ParticipantId& r) {
        if (!previous || pending_include_.contains(r)) {
            return false;
        }
        auto it = distributed_to_.find(previous->id);
        return it != distributed_to_.end() && it->second.contains(r);
    };

    const auto nonce = rng_->generate<MasterNonce>();
    const MessageType type = altering ? MessageType::AlterParticipants : MessageType::GroupKeyed;

    std::vector<TlvRecord> body;
    body.push_back({RecordType::MessageType, {static_cast<std::uint8_t>(type)}});
    body.push_back(record(RecordType::Nonce, nonce.view()));
    for (const auto& r : recipients) {
        body.push_back(record(RecordType::Recipient, r.view()));
    }
    bool any_previous = false;
    for (std::size_t i = 0; i < recipients.size(); ++i) {
        std::optional<SenderKey> prev_key;
        if (entitled_to_previous(recipients[i])) {
            prev_key = previous->key;
            any_previous = true;
        }
        auto iv = derive_recipient_iv(nonce, recipients[i]);
        body.push_back({RecordType::Keys, wrap_sender_keys(current.key, prev_key, pairwise[i], iv)});
    }
    body.push_back(key_id_record(current.id, any_previous ? std::optional<KeyId>(previous->id) : std::nullopt));
    for (const auto& p : pending_include_) {
        body.push_back(record(RecordType::IncParticipant, p.view()));
    }
    for (const auto& p : pending_exclude_) {
        body.push_back(record(RecordType::ExcParticipant, p.view()));
    }
    if (payload) {
        body.push_back({RecordType::Payload, encrypt_payload(*payload, current.key, derive_payload_nonce(nonce))});
    }

    auto out = finish(std::move(body), type, current.id);

    distributed_to_[current.id].insert(recipients.begin(), recipients.end());
    participants_ = composition;
    pending_include_.clear();
    pending_exclude_.clear();
    // The keyed message itself is the first one counted towards the next
    // re-send. A re-send keeps counting towards rotation, otherwise a busy
    // room would never rotate.
    counters_ = {rotating ? 1 : counters_.sent_since_keyed + 1, 1};
    return out;
}

OutboundMessage Session::build_followup_message(ByteView payload, [[maybe_unused]] std::int64_t now)
{
    if (excluded_) {
        throw StateError("this participant has been excluded from the chat");
    }
    if (!ring_.own_current()) {
        throw StateError("no sender key yet; a keyed message must be sent first");
    }
    if (!pending_include_.empty() || !pending_exclude_.empty()) {
        throw StateError("membership changes pending; an alter-participants message must be sent first");
    }
    const auto due = due_actions(counters_.sent_since_keyed, counters_.total_since_keyed, policy_);
    if (due.rotate || due.resend) {
        throw StateError("key rotation or re-send is due; a keyed message must be sent");
    }
    const OwnKey current = *ring_.own_current();
    const auto nonce = rng_->generate<MasterNonce>();

    std::vector<TlvRecord> body;
    body.push_back({RecordType::MessageType, {static_cast<std::uint8_t>(MessageType::GroupFollowup)}});
    body.push_back(record(RecordType::Nonce, nonce.view()));
    body.push_back(key_id_record(current.id, std::nullopt));
    body.push_back({RecordType::Payload, encrypt_payload(payload, current.key, derive_payload_nonce(nonce))});

    auto out = finish(std::move(body), MessageType::GroupFollowup, current.id);
    ++counters_.sent_since_keyed;
    ++counters_.total_since_keyed;
    return out;
}

OutboundMessage Session::finish(std::vector<TlvRecord> body, MessageType type, const KeyId& key_id)
{
    const Bytes signed_part = encode_records(body);
    const Signature sig = sign_message(signed_part, sign_keys_);

    OutboundMessage out{{kProtocolVersion}, type, key_id};
    encode_record(record(RecordType::Signature, sig.view()), out.wire);
    append(out.wire, signed_part);
    return out;
}

void Session::alter_participants(const ParticipantSet& include, const ParticipantSet& exclude)
{
    const ParticipantSet current = effective_participants();
    for (const auto& p : include) {
        if (exclude.contains(p)) {
            throw MembershipError("participant " + p.hex() + " both included and excluded");
        }
        if (current.contains(p)) {
            throw MembershipError("participant " + p.hex() + " is already in the chat");
        }
        identity_of(p);
    }
    for (const auto& p : exclude) {
        if (p == me_) {
            throw MembershipError("cannot exclude oneself");
        }
        if (!current.contains(p)) {
            throw MembershipError("participant " + p.hex() + " is not in the chat");
        }
    }
    for (const auto& p : include) {
        if (pending_exclude_.erase(p) == 0) {
            pending_include_.insert(p);
        }
    }
    for (const auto& p : exclude) {
        if (pending_include_.erase(p) == 0) {
            pending_exclude_.insert(p);
        }
    }
}

// Receiving ------------------------------------------------------------------

void Session::apply_remote_delta(const MembershipDelta& delta)
{
    for (const auto& p : delta.included) {
        if (p == me_) {
            excluded_ = false;
            continue;
        }
        if (pending_exclude_.erase(p) == 0 && !participants_.contains(p)) {
            pending_include_.insert(p);
        }
    }
    for (const auto& p : delta.excluded) {
        if (p == me_) {
            excluded_ = true;
            continue;
        }
        if (pending_include_.erase(p) == 0 && participants_.contains(p)) {
            pending_exclude_.insert(p);
        }
    }
}

Session::Processed Session::process(ByteView wire, const ParticipantId& sender, bool apply_membership)
{
    const bool own = sender == me_;
    const PublicIdentity& sender_identity = identity_of(sender);

    if (wire.empty()) {
        throw StructureError("empty message");
    }
    if (wire[0] != kProtocolVersion) {
        throw UnsupportedVersion(wire[0]);
    }
    // Authenticate before interpreting anything beyond the signature record.
    if (!verify_message(signed_span(wire), signature_value(wire), sender_identity.sign)) {
        throw AuthenticityError("signature verification failed for message from " + sender.hex());
    }
    const ProtocolMessage msg = decode_message(wire);

    Processed out;
    InboundResult& result = out.result;
    result.sender = sender;

    const TlvRecord& type_rec = require(msg, RecordType::MessageType);
    if (type_rec.value.size() != 1 || !message_type_from_byte(type_rec.value[0])) {
        throw StructureError("invalid MESSAGE_TYPE value");
    }
    result.type = *message_type_from_byte(type_rec.value[0]);

    const TlvRecord& nonce_rec = require(msg, RecordType::Nonce);
    if (nonce_rec.value.size() != MasterNonce::kSize) {
        throw StructureError("NONCE must be 16 bytes");
    }
    const auto nonce = MasterNonce::from_view(nonce_rec.value);

    const TlvRecord& ids_rec = require(msg, RecordType::KeyIds);
    if (ids_rec.value.size() != KeyId::kSize && ids_rec.value.size() != 2 * KeyId::kSize) {
        throw StructureError("KEY_IDS must hold one or two 4-byte IDs");
    }
    const ByteView ids_view(ids_rec.value);
    const KeyId current_id = KeyId::from_bytes(ids_view.first(KeyId::kSize));
    std::optional<KeyId> previous_id;
    if (ids_view.size() == 2 * KeyId::kSize) {
        previous_id = KeyId::from_bytes(ids_view.subspan(KeyId::kSize));
    }
    result.key_id = current_id;
    out.referenced_key = current_id;

    for (auto v : msg.values(RecordType::IncParticipant)) {
        result.membership_delta.included.insert(participant_from(v, "INC_PARTICIPANT"));
    }
    for (auto v : msg.values(RecordType::ExcParticipant)) {
        result.membership_delta.excluded.insert(participant_from(v, "EXC_PARTICIPANT"));
    }

    bool addressed = true;
    if (result.type != MessageType::GroupFollowup) {
        const auto keys = msg.values(RecordType::Keys);
        for (auto v : msg.values(RecordType::Recipient)) {
            out.recipients.push_back(participant_from(v, "RECIPIENT"));
        }

        // Own message: any recipient's pairwise key is also ours. Prefer one
        // that was sent the previous key as well.
        std::optional<std::size_t> slot;
        for (std::size_t i = 0; i < out.recipients.size(); ++i) {
            if (own ? (!slot || keys[i].size() > keys[*slot].size()) : out.recipients[i] == me_) {
                slot = i;
            }
        }

        if (!slot) {
            addressed = false;
        } else {
            const ParticipantId& addressee = out.recipients[*slot];
            const DhPublicKey& peer = own ? identity_of(addressee).dh : sender_identity.dh;
            const auto unwrapped = unwrap_sender_keys(keys[*slot], derive_pairwise_key(dh_keys_, peer),
                                                      derive_recipient_iv(nonce, addressee));
            if (unwrapped.previous && !previous_id) {
                throw StructureError("KEYS carries a previous key but KEY_IDS names only one ID");
            }
            ring_.record_participant_key(sender, current_id, unwrapped.current);
            result.learned_keys.push_back({sender, current_id, unwrapped.current});
            if (unwrapped.previous) {
                ring_.record_participant_key(sender, *previous_id, *unwrapped.previous);
                result.learned_keys.push_back({sender, *previous_id, *unwrapped.previous});
            }
            if (own) {
                ring_.note_issued(current_id);
                distributed_to_[current_id].insert(out.recipients.begin(), out.recipients.end());
                if (previous_id) {
                    for (std::size_t i = 0; i < out.recipients.size(); ++i) {
                        if (keys[i].size() == 2 * SenderKey::kSize) {
                            distributed_to_[*previous_id].insert(out.recipients[i]);
                        }
                    }
                }
            }
        }
    }

    if (apply_membership && !own && result.type == MessageType::AlterParticipants) {
        apply_remote_delta(result.membership_delta);
    }

    if (!addressed) {
        result.status = InboundStatus::NotAddressed;
        return out;
    }
    const TlvRecord* payload = msg.find(RecordType::Payload);
    if (payload == nullptr) {
        result.status = InboundStatus::Blind;
        return out;
    }
    auto key = ring_.lookup(sender, current_id);
    if (!key) {
        result.status = InboundStatus::MissingKey;
        return out;
    }
    result.payload = decrypt_payload(payload->value, *key, derive_payload_nonce(nonce));
    result.status = InboundStatus::Delivered;
    return out;
}

InboundResult Session::receive_message(ByteView wire, const ParticipantId& claimed_sender)
{
    auto processed = process(wire, claimed_sender, true);
    if (claimed_sender != me_) {
        ++counters_.total_since_keyed;
    }
    return std::move(processed.result);
}

SeedOutcome Session::seed_from_history(std::span<const HistoryEntry> batch)
{
    SeedOutcome outcome;
    if (batch.empty()) {
        return outcome;
    }
    for (const auto& entry : batch) {
        try {
            auto processed = process(entry.wire, entry.sender, false);
            ++outcome.processed;
            if (entry.sender == me_ && processed.referenced_key &&
                (!latest_own_reference_ || *latest_own_reference_ < *processed.referenced_key)) {
                latest_own_reference_ = processed.referenced_key;
            }
        } catch (const Error& e) {
            outcome.diagnostics.push_back("skipped message from " + entry.sender.hex() + ": " + e.what());
        }
    }
    if (!latest_own_reference_) {
        return outcome;
    }
    ring_.note_issued(*latest_own_reference_);
    auto key = ring_.lookup(me_, *latest_own_reference_);
    if (!key) {
        return outcome;
    }
    std::optional<OwnKey> previous;
    for (const auto& id : ring_.key_ids(me_)) {
        if (id < *latest_own_reference_) {
            previous = OwnKey{id, *ring_.lookup(me_, id)};
        }
    }
    ring_.restore_own(OwnKey{*latest_own_reference_, *key}, previous);
    outcome.own_key_found = true;
    return outcome;
}

} // namespace strongvelope
