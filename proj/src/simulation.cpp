// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/simulation.hpp"

#include <stdexcept>

#include "strongvelope/errors.hpp"

namespace strongvelope {

Simulation::Simulation(ByteView seed, RotationPolicy policy, std::int64_t start_time)
    : root_(seed), policy_(policy), now_(start_time)
{
    policy_.validate();
}

const ParticipantId& Simulation::declare(const std::string& name, std::optional<ParticipantId> handle)
{
    if (members_.contains(name)) {
        throw std::invalid_argument("participant '" + name + "' declared twice");
    }
    auto rng = std::make_unique<DeterministicRandom>(root_.fork("participant:" + name));
    ParticipantId id = handle ? *handle : rng->generate<ParticipantId>();
    for (const auto& [other, m] : members_) {
        if (m.id == id) {
            throw std::invalid_argument("participants '" + other + "' and '" + name + "' share a handle");
        }
    }
    Member m{id, SignKeyPair::generate(*rng), DhKeyPair::generate(*rng), std::move(rng), nullptr, {}};
    const PublicIdentity identity{m.sign.public_key, m.dh.public_point};
    for (auto& [other, existing] : members_) {
        if (existing.session) {
            existing.session->add_directory_entry(id, identity);
        }
    }
    return members_.emplace(name, std::move(m)).first->second.id;
}

Simulation::Member& Simulation::member(const std::string& name)
{
    auto it = members_.find(name);
    if (it == members_.end()) {
        throw std::invalid_argument("unknown participant '" + name + "'");
    }
    return it->second;
}

const Simulation::Member& Simulation::member(const std::string& name) const
{
    return const_cast<Simulation*>(this)->member(name);
}

Directory Simulation::directory() const
{
    Directory dir;
    for (const auto& [name, m] : members_) {
        dir.emplace(m.id, PublicIdentity{m.sign.public_key, m.dh.public_point});
    }
    return dir;
}

void Simulation::create_session(Member& m, ParticipantSet participants)
{
    m.session = std::make_unique<Session>(m.id, m.sign, m.dh, directory(), std::move(participants), *m.rng, policy_);
}

void Simulation::start(const std::vector<std::string>& names)
{
    ParticipantSet composition;
    for (const auto& n : names) {
        composition.insert(member(n).id);
    }
    for (const auto& n : names) {
        Member& m = member(n);
        create_session(m, composition);
        room_.add_member(m.id);
    }
}

std::uint64_t Simulation::send(const std::string& name, std::optional<Bytes> payload)
{
    Member& m = member(name);
    if (!m.session) {
        throw StateError("participant '" + name + "' has no session");
    }
    std::optional<ByteView> view;
    if (payload) {
        view = ByteView(*payload);
    }
    OutboundMessage out = m.session->send_message(view, now_);
    const std::uint64_t seq = room_.post(m.id, out.wire);
    const Bytes wire = out.wire;
    sent_.emplace(seq, SentRecord{name, std::move(out), std::move(payload)});

    for (auto& [other, r] : members_) {
        if (other == name || !r.session || !room_.is_member(r.id)) {
            continue;
        }
        Delivery d;
        try {
            d.result = r.session->receive_message(wire, m.id);
        } catch (const std::exception& e) {
            d.error = e.what();
        }
        r.deliveries.emplace(seq, std::move(d));
    }
    return seq;
}

void Simulation::include(const std::string& actor, const std::vector<std::string>& names)
{
    Member& a = member(actor);
    ParticipantSet ids;
    for (const auto& n : names) {
        ids.insert(member(n).id);
    }
    a.session->alter_participants(ids, {});
    const ParticipantSet composition = a.session->effective_participants();
    for (const auto& n : names) {
        Member& m = member(n);
        create_session(m, composition);
        room_.add_member(m.id);
    }
}

void Simulation::exclude(const std::string& actor, const std::vector<std::string>& names)
{
    ParticipantSet ids;
    for (const auto& n : names) {
        ids.insert(member(n).id);
    }
    member(actor).session->alter_participants({}, ids);
}

void Simulation::join_room(const std::string& name) { room_.add_member(member(name).id); }

void Simulation::leave_room(const std::string& name) { room_.remove_member(member(name).id); }

SeedReport Simulation::resume(const std::string& name)
{
    Member& m = member(name);
    ParticipantSet composition = m.session ? m.session->participants() : room_.members();
    composition.insert(m.id);
    create_session(m, composition);

    SeedReport report;
    std::optional<std::uint64_t> before;
    while (true) {
        auto batch = room_.fetch_history(before, policy_.history_batch);
        if (batch.empty()) {
            break;
        }
        ++report.batches;
        report.messages += batch.size();
        const auto entries = to_history(batch);
        if (m.session->seed_from_history(entries).own_key_found) {
            report.own_key_found = true;
            break;
        }
        before = batch.front().seq;
    }
    return report;
}

const ParticipantId& Simulation::handle(const std::string& name) const { return member(name).id; }

bool Simulation::has_session(const std::string& name) const { return member(name).session != nullptr; }

Session& Simulation::session(const std::string& name)
{
    Member& m = member(name);
    if (!m.session) {
        throw StateError("participant '" + name + "' has no session");
    }
    return *m.session;
}

const Session& Simulation::session(const std::string& name) const
{
    return const_cast<Simulation*>(this)->session(name);
}

const SentRecord& Simulation::sent(std::uint64_t seq) const
{
    auto it = sent_.find(seq);
    if (it == sent_.end()) {
        throw std::out_of_range("no message with seq " + std::to_string(seq));
    }
    return it->second;
}

std::optional<std::uint64_t> Simulation::last_seq() const
{
    if (sent_.empty()) {
        return std::nullopt;
    }
    return sent_.rbegin()->first;
}

const Delivery* Simulation::delivery(const std::string& name, std::uint64_t seq) const
{
    const Member& m = member(name);
    auto it = m.deliveries.find(seq);
    return it == m.deliveries.end() ? nullptr : &it->second;
}

std::vector<std::string> Simulation::names() const
{
    std::vector<std::string> out;
    for (const auto& [name, m] : members_) {
        out.push_back(name);
    }
    return out;
}

} // namespace strongvelope
