// SPDX-License-Identifier: Apache-2.0
//
// In-memory chat room: a single totally ordered, append-only log with
// server-assigned sequence numbers and sender IDs. Channel membership is
// kept separately from who participates in the encrypted session.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <vector>

#include "strongvelope/crypto.hpp"
#include "strongvelope/session.hpp"

namespace strongvelope {

struct LoggedMessage
{
    std::uint64_t seq = 0;
    ParticipantId sender;
    Bytes wire;

    bool operator==(const LoggedMessage&) const = default;
};

class ChatRoom
{
public:
    ChatRoom() = default;
    explicit ChatRoom(ParticipantSet members) : members_(std::move(members)) {}

    /// Appends and returns the assigned sequence number. Throws
    /// TransportError if `sender` is not a member.
    std::uint64_t post(const ParticipantId& sender, Bytes wire);

    /// Up to `limit` messages with seq < before_seq (newest when absent),
    /// oldest first. Throws std::invalid_argument for limit 0.
    std::vector<LoggedMessage> fetch_history(std::optional<std::uint64_t> before_seq, std::size_t limit) const;

    /// Messages with seq >= from_seq, in order.
    std::vector<LoggedMessage> messages_since(std::uint64_t from_seq) const;

    void set_members(ParticipantSet members);
    void add_member(const ParticipantId& member);
    void remove_member(const ParticipantId& member);
    bool is_member(const ParticipantId& member) const;
    ParticipantSet members() const;
    std::size_t size() const;

    /// One line per message: "<seq> <sender hex> <wire hex>".
    void write_log(std::ostream& out) const;
    /// Throws std::invalid_argument on a malformed line or a sequence gap.
    static std::vector<LoggedMessage> read_log(std::istream& in);

private:
    mutable std::mutex mutex_;
    std::vector<LoggedMessage> log_;
    ParticipantSet members_;
};

/// Converts a history batch for Session::seed_from_history.
std::vector<HistoryEntry> to_history(const std::vector<LoggedMessage>& batch);

} // namespace strongvelope
