// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/wire_codec.hpp"

#include <algorithm>
#include <cstdio>

#include "strongvelope/errors.hpp"

namespace strongvelope {

namespace {

std::string hex_byte(std::uint8_t b)
{
    char buf[5];
    std::snprintf(buf, sizeof buf, "0x%02x", b);
    return buf;
}

} // namespace

UnknownRecordType::UnknownRecordType(std::size_t offset, std::uint8_t type_byte)
    : ParseError(offset, "unknown record type " + hex_byte(type_byte)), type_byte_(type_byte)
{}

UnsupportedVersion::UnsupportedVersion(std::uint8_t version)
    : WireError("unsupported protocol version " + hex_byte(version)), version_(version)
{}

std::optional<RecordType> record_type_from_byte(std::uint8_t code)
{
    if (code >= 0x01 && code <= 0x0a) {
        return static_cast<RecordType>(code);
    }
    return std::nullopt;
}

std::string_view record_type_name(RecordType type)
{
    switch (type) {
    case RecordType::Signature: return "SIGNATURE";
    case RecordType::MessageType: return "MESSAGE_TYPE";
    case RecordType::Nonce: return "NONCE";
    case RecordType::Recipient: return "RECIPIENT";
    case RecordType::Keys: return "KEYS";
    case RecordType::KeyIds: return "KEY_IDS";
    case RecordType::Payload: return "PAYLOAD";
    case RecordType::IncParticipant: return "INC_PARTICIPANT";
    case RecordType::ExcParticipant: return "EXC_PARTICIPANT";
    case RecordType::OwnKey: return "OWN_KEY";
    }
    return "?";
}

std::optional<MessageType> message_type_from_byte(std::uint8_t code)
{
    if (code <= 0x02) {
        return static_cast<MessageType>(code);
    }
    return std::nullopt;
}

std::string_view message_type_name(MessageType type)
{
    switch (type) {
    case MessageType::GroupKeyed: return "GROUP_KEYED";
    case MessageType::GroupFollowup: return "GROUP_FOLLOWUP";
    case MessageType::AlterParticipants: return "ALTER_PARTICIPANTS";
    }
    return "?";
}

std::optional<MessageType> message_type_from_name(std::string_view name)
{
    for (auto t : {MessageType::GroupKeyed, MessageType::GroupFollowup, MessageType::AlterParticipants}) {
        if (message_type_name(t) == name) {
            return t;
        }
    }
    return std::nullopt;
}

const TlvRecord* ProtocolMessage::find(RecordType type) const
{
    auto it = std::find_if(records.begin(), records.end(), [&](const TlvRecord& r) { return r.type == type; });
    return it == records.end() ? nullptr : &*it;
}

std::size_t ProtocolMessage::count(RecordType type) const
{
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const TlvRecord& r) { return r.type == type; }));
}

std::vector<ByteView> ProtocolMessage::values(RecordType type) const
{
    std::vector<ByteView> out;
    for (const auto& r : records) {
        if (r.type == type) {
            out.emplace_back(r.value);
        }
    }
    return out;
}

void encode_record(const TlvRecord& record, Bytes& out)
{
    if (record.value.size() > kMaxRecordValue) {
        throw EncodeError(std::string(record_type_name(record.type)) + " value of " +
                          std::to_string(record.value.size()) + " bytes exceeds the 16-bit length field");
    }
    const auto len = static_cast<std::uint16_t>(record.value.size());
    out.push_back(static_cast<std::uint8_t>(record.type));
    out.push_back(static_cast<std::uint8_t>(len >> 8));
    out.push_back(static_cast<std::uint8_t>(len & 0xff));
    append(out, record.value);
}

Bytes encode_record(const TlvRecord& record)
{
    Bytes out;
    out.reserve(kRecordHeaderSize + record.value.size());
    encode_record(record, out);
    return out;
}

Bytes encode_records(const std::vector<TlvRecord>& records)
{
    Bytes out;
    for (const auto& r : records) {
        encode_record(r, out);
    }
    return out;
}

std::vector<TlvRecord> decode_records(ByteView data, std::size_t base_offset)
{
    std::vector<TlvRecord> records;
    std::size_t pos = 0;
    while (pos < data.size()) {
        const std::size_t at = base_offset + pos;
        auto type = record_type_from_byte(data[pos]);
        if (!type) {
            throw UnknownRecordType(at, data[pos]);
        }
        if (data.size() - pos < kRecordHeaderSize) {
            throw ParseError(data.size() + base_offset,
                             "truncated record header (" + std::to_string(data.size() - pos) + " of 3 bytes)");
        }
        const std::size_t len = (std::size_t{data[pos + 1]} << 8) | data[pos + 2];
        pos += kRecordHeaderSize;
        const std::size_t available = data.size() - pos;
        if (len > available) {
            throw ParseError(base_offset + pos, "truncated " + std::string(record_type_name(*type)) + " record (" +
                                                    std::to_string(len) + " bytes declared, " +
                                                    std::to_string(available) + " present)");
        }
        records.push_back({*type, Bytes(data.begin() + pos, data.begin() + pos + len)});
        pos += len;
    }
    return records;
}

std::vector<std::string> structural_problems(std::uint8_t version, const std::vector<TlvRecord>& records)
{
    std::vector<std::string> problems;
    if (version != kProtocolVersion) {
        problems.push_back("unsupported protocol version " + hex_byte(version));
    }
    if (!records.empty() && records.front().type != RecordType::Signature) {
        problems.push_back("first record is " + std::string(record_type_name(records.front().type)) +
                           ", expected SIGNATURE");
    }
    std::size_t recipients = 0, keys = 0;
    for (const auto& r : records) {
        recipients += r.type == RecordType::Recipient;
        keys += r.type == RecordType::Keys;
    }
    if (recipients != keys) {
        problems.push_back(std::to_string(keys) + " KEYS records for " + std::to_string(recipients) +
                           " RECIPIENT records");
    }
    return problems;
}

namespace {

void enforce_structure(std::uint8_t version, const std::vector<TlvRecord>& records)
{
    if (version != kProtocolVersion) {
        throw UnsupportedVersion(version);
    }
    auto problems = structural_problems(version, records);
    if (!problems.empty()) {
        throw StructureError(problems.front());
    }
}

} // namespace

Bytes encode_message(const ProtocolMessage& message)
{
    enforce_structure(message.version, message.records);
    Bytes out{message.version};
    for (const auto& r : message.records) {
        encode_record(r, out);
    }
    return out;
}

ProtocolMessage decode_message(ByteView data)
{
    if (data.empty()) {
        throw StructureError("empty message");
    }
    if (data[0] != kProtocolVersion) {
        throw UnsupportedVersion(data[0]);
    }
    ProtocolMessage message{data[0], decode_records(data.subspan(1), 1)};
    enforce_structure(message.version, message.records);
    return message;
}

namespace {

// Returns [value_begin, value_end) of the leading SIGNATURE record.
std::pair<std::size_t, std::size_t> locate_signature(ByteView data)
{
    if (data.size() < 2) {
        throw StructureError("message has no SIGNATURE record");
    }
    if (data[1] != static_cast<std::uint8_t>(RecordType::Signature)) {
        throw StructureError("first record is not SIGNATURE");
    }
    if (data.size() < 1 + kRecordHeaderSize) {
        throw ParseError(data.size(), "truncated SIGNATURE record header");
    }
    const std::size_t len = (std::size_t{data[2]} << 8) | data[3];
    const std::size_t begin = 1 + kRecordHeaderSize;
    if (len > data.size() - begin) {
        throw ParseError(begin, "truncated SIGNATURE record");
    }
    return {begin, begin + len};
}

} // namespace

ByteView signed_span(ByteView data)
{
    return data.subspan(locate_signature(data).second);
}

ByteView signature_value(ByteView data)
{
    auto [begin, end] = locate_signature(data);
    return data.subspan(begin, end - begin);
}

} // namespace strongvelope
