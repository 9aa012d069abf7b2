// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/transport.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "strongvelope/errors.hpp"

namespace strongvelope {

std::uint64_t ChatRoom::post(const ParticipantId& sender, Bytes wire)
{
    std::lock_guard lock(mutex_);
    if (!members_.contains(sender)) {
        throw TransportError("participant " + sender.hex() + " is not a member of the room");
    }
    const std::uint64_t seq = log_.size();
    log_.push_back({seq, sender, std::move(wire)});
    return seq;
}

std::vector<LoggedMessage> ChatRoom::fetch_history(std::optional<std::uint64_t> before_seq, std::size_t limit) const
{
    if (limit == 0) {
        throw std::invalid_argument("history batch limit must be at least 1");
    }
    std::lock_guard lock(mutex_);
    const std::size_t end = before_seq ? std::min<std::uint64_t>(*before_seq, log_.size()) : log_.size();
    const std::size_t begin = end > limit ? end - limit : 0;
    return {log_.begin() + static_cast<std::ptrdiff_t>(begin), log_.begin() + static_cast<std::ptrdiff_t>(end)};
}

std::vector<LoggedMessage> ChatRoom::messages_since(std::uint64_t from_seq) const
{
    std::lock_guard lock(mutex_);
    if (from_seq >= log_.size()) {
        return {};
    }
    return {log_.begin() + static_cast<std::ptrdiff_t>(from_seq), log_.end()};
}

void ChatRoom::set_members(ParticipantSet members)
{
    std::lock_guard lock(mutex_);
    members_ = std::move(members);
}

void ChatRoom::add_member(const ParticipantId& member)
{
    std::lock_guard lock(mutex_);
    members_.insert(member);
}

void ChatRoom::remove_member(const ParticipantId& member)
{
    std::lock_guard lock(mutex_);
    members_.erase(member);
}

bool ChatRoom::is_member(const ParticipantId& member) const
{
    std::lock_guard lock(mutex_);
    return members_.contains(member);
}

ParticipantSet ChatRoom::members() const
{
    std::lock_guard lock(mutex_);
    return members_;
}

std::size_t ChatRoom::size() const
{
    std::lock_guard lock(mutex_);
    return log_.size();
}

void ChatRoom::write_log(std::ostream& out) const
{
    std::lock_guard lock(mutex_);
    for (const auto& m : log_) {
        out << m.seq << ' ' << m.sender.hex() << ' ' << to_hex(m.wire) << '\n';
    }
}

std::vector<LoggedMessage> ChatRoom::read_log(std::istream& in)
{
    std::vector<LoggedMessage> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        LoggedMessage m;
        std::string sender, wire;
        if (!(fields >> m.seq >> sender >> wire)) {
            throw std::invalid_argument("log line " + std::to_string(line_no) + ": expected '<seq> <sender> <wire>'");
        }
        if (m.seq != out.size()) {
            throw std::invalid_argument("log line " + std::to_string(line_no) + ": sequence gap");
        }
        m.sender = ParticipantId::from_hex(sender);
        m.wire = from_hex(wire);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<HistoryEntry> to_history(const std::vector<LoggedMessage>& batch)
{
    std::vector<HistoryEntry> out;
    out.reserve(batch.size());
    for (const auto& m : batch) {
        out.push_back({m.sender, m.wire});
    }
    return out;
}

} // namespace strongvelope
