// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/key_store.hpp"

#include <stdexcept>

#include "strongvelope/errors.hpp"

namespace strongvelope {

std::array<std::uint8_t, KeyId::kSize> KeyId::to_bytes() const
{
    return {static_cast<std::uint8_t>(day >> 8), static_cast<std::uint8_t>(day & 0xff),
            static_cast<std::uint8_t>(counter >> 8), static_cast<std::uint8_t>(counter & 0xff)};
}

KeyId KeyId::from_bytes(ByteView bytes)
{
    if (bytes.size() != kSize) {
        throw std::invalid_argument("key ID must be 4 bytes, got " + std::to_string(bytes.size()));
    }
    return {static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]),
            static_cast<std::uint16_t>((bytes[2] << 8) | bytes[3])};
}

std::string KeyId::hex() const
{
    auto b = to_bytes();
    return to_hex(b);
}

KeyId new_key_id(std::int64_t now, const std::optional<KeyId>& last)
{
    std::int64_t days = now / kSecondsPerDay;
    if (now < 0 && now % kSecondsPerDay != 0) {
        --days; // floor
    }
    KeyId id{static_cast<std::uint16_t>(days), 0};
    if (last && id.day == last->day) {
        if (last->counter == 0xFFFF) {
            throw KeyIdError(KeyIdError::Kind::CounterOverflow,
                             "key ID counter exhausted for day " + std::to_string(id.day));
        }
        id.counter = static_cast<std::uint16_t>(last->counter + 1);
    }
    if (last && id <= *last) {
        throw KeyIdError(KeyIdError::Kind::NotMonotonic,
                         "key ID " + id.hex() + " does not follow " + last->hex() + " (clock went backwards?)");
    }
    return id;
}

void RotationPolicy::validate() const
{
    if (rotate_after_sent == 0 || resend_after_total == 0 || history_batch == 0) {
        throw std::invalid_argument("rotation policy counts must be at least 1");
    }
}

DueActions due_actions(std::uint64_t sent_since_keyed, std::uint64_t total_since_keyed, const RotationPolicy& policy)
{
    DueActions due;
    due.rotate = sent_since_keyed >= policy.rotate_after_sent;
    due.resend = !due.rotate && total_since_keyed >= policy.resend_after_total;
    return due;
}

void KeyRing::record_participant_key(const ParticipantId& participant, const KeyId& id, const SenderKey& key)
{
    auto [it, inserted] = entries_.try_emplace({participant, id}, key);
    if (!inserted && it->second != key) {
        throw KeyConflictError("conflicting sender key for participant " + participant.hex() + " key ID " + id.hex());
    }
}

std::optional<SenderKey> KeyRing::lookup(const ParticipantId& participant, const KeyId& id) const
{
    auto it = entries_.find({participant, id});
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<KeyId> KeyRing::key_ids(const ParticipantId& participant) const
{
    std::vector<KeyId> out;
    for (auto it = entries_.lower_bound({participant, KeyId{}});
         it != entries_.end() && it->first.first == participant; ++it) {
        out.push_back(it->first.second);
    }
    return out;
}

OwnKey KeyRing::rotate(std::int64_t now, RandomSource& rng)
{
    OwnKey fresh{new_key_id(now, last_issued_), rng.generate<SenderKey>()};
    own_previous_ = own_current_;
    own_current_ = fresh;
    last_issued_ = fresh.id;
    return fresh;
}

void KeyRing::restore_own(const std::optional<OwnKey>& current, const std::optional<OwnKey>& previous)
{
    own_current_ = current;
    own_previous_ = previous;
    if (current) {
        note_issued(current->id);
    }
}

void KeyRing::note_issued(const KeyId& id)
{
    if (!last_issued_ || *last_issued_ < id) {
        last_issued_ = id;
    }
}

} // namespace strongvelope
