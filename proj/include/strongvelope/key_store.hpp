// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "strongvelope/crypto.hpp"

namespace strongvelope {

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// 32-bit sender key identifier: UTC day (high 16 bits) and a per-day
/// counter (low 16 bits). Serialized big-endian so byte order is numeric
/// order.
struct KeyId
{
    std::uint16_t day = 0;
    std::uint16_t counter = 0;

    static constexpr std::size_t kSize = 4;

    std::uint32_t value() const { return (std::uint32_t{day} << 16) | counter; }
    std::array<std::uint8_t, kSize> to_bytes() const;
    static KeyId from_bytes(ByteView bytes); // throws std::invalid_argument unless 4 bytes
    std::string hex() const;

    auto operator<=>(const KeyId&) const = default;
};

/// Next key ID after `last` at time `now` (UNIX seconds). Throws KeyIdError
/// on counter overflow within a day or when the result would not exceed
/// `last` (clock regression, day wrap-around).
KeyId new_key_id(std::int64_t now, const std::optional<KeyId>& last);

struct RotationPolicy
{
    std::uint32_t rotate_after_sent = 16;
    std::uint32_t resend_after_total = 30;
    std::uint32_t history_batch = 32;

    /// Throws std::invalid_argument if any count is zero.
    void validate() const;
};

struct DueActions
{
    bool rotate = false;
    bool resend = false; // false whenever rotate is set; a rotation distributes keys anyway

    bool operator==(const DueActions&) const = default;
};

DueActions due_actions(std::uint64_t sent_since_keyed, std::uint64_t total_since_keyed, const RotationPolicy& policy);

struct OwnKey
{
    KeyId id;
    SenderKey key;

    bool operator==(const OwnKey&) const = default;
};

/// Known sender keys by (participant, key ID), plus this client's own
/// current and previous key.
class KeyRing
{
public:
    /// Idempotent for an identical key; throws KeyConflictError if the slot
    /// already holds a different key.
    void record_participant_key(const ParticipantId& participant, const KeyId& id, const SenderKey& key);

    std::optional<SenderKey> lookup(const ParticipantId& participant, const KeyId& id) const;

    /// Key IDs known for one participant, ascending.
    std::vector<KeyId> key_ids(const ParticipantId& participant) const;
    std::size_t size() const { return entries_.size(); }

    /// New own key: previous := current, current := fresh key with the next ID.
    /// Propagates KeyIdError from new_key_id.
    OwnKey rotate(std::int64_t now, RandomSource& rng);

    const std::optional<OwnKey>& own_current() const { return own_current_; }
    const std::optional<OwnKey>& own_previous() const { return own_previous_; }

    /// Installs own keys recovered from history. `last_issued` is the highest
    /// own ID ever seen and bounds the next generated ID.
    void restore_own(const std::optional<OwnKey>& current, const std::optional<OwnKey>& previous);
    void note_issued(const KeyId& id);
    const std::optional<KeyId>& last_issued() const { return last_issued_; }

private:
    std::map<std::pair<ParticipantId, KeyId>, SenderKey> entries_;
    std::optional<OwnKey> own_current_;
    std::optional<OwnKey> own_previous_;
    std::optional<KeyId> last_issued_;
};

} // namespace strongvelope
