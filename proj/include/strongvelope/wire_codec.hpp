// SPDX-License-Identifier: Apache-2.0
//
// Message framing: one protocol-version byte followed by TLV records, each
// a 1-byte type, a 2-byte big-endian length and the value bytes.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strongvelope/bytes.hpp"

namespace strongvelope {

inline constexpr std::uint8_t kProtocolVersion = 0x00;
inline constexpr std::size_t kMaxRecordValue = 0xFFFF;
inline constexpr std::size_t kRecordHeaderSize = 3;

enum class RecordType : std::uint8_t {
    Signature = 0x01,
    MessageType = 0x02,
    Nonce = 0x03,
    Recipient = 0x04,
    Keys = 0x05,
    KeyIds = 0x06,
    Payload = 0x07,
    IncParticipant = 0x08,
    ExcParticipant = 0x09,
    OwnKey = 0x0a,
};

std::optional<RecordType> record_type_from_byte(std::uint8_t code);
std::string_view record_type_name(RecordType type);

enum class MessageType : std::uint8_t {
    GroupKeyed = 0x00,
    GroupFollowup = 0x01,
    AlterParticipants = 0x02,
};

std::optional<MessageType> message_type_from_byte(std::uint8_t code);
std::string_view message_type_name(MessageType type);
std::optional<MessageType> message_type_from_name(std::string_view name);

struct TlvRecord
{
    RecordType type;
    Bytes value;

    bool operator==(const TlvRecord&) const = default;
};

struct ProtocolMessage
{
    std::uint8_t version = kProtocolVersion;
    std::vector<TlvRecord> records;

    bool operator==(const ProtocolMessage&) const = default;

    /// First record of the given type, or nullptr.
    const TlvRecord* find(RecordType type) const;
    std::size_t count(RecordType type) const;
    std::vector<ByteView> values(RecordType type) const;
};

/// Throws EncodeError when the value exceeds kMaxRecordValue.
void encode_record(const TlvRecord& record, Bytes& out);
Bytes encode_record(const TlvRecord& record);
Bytes encode_records(const std::vector<TlvRecord>& records);

/// Parses a sequence of records spanning all of `data`. Reported offsets are
/// relative to `data` plus `base_offset`, so callers parsing a message body
/// can report positions within the whole message.
std::vector<TlvRecord> decode_records(ByteView data, std::size_t base_offset = 0);

/// Structural rules of a message: version, SIGNATURE first, KEYS/RECIPIENT
/// parity. Returns one line per violation; empty when the message is sound.
std::vector<std::string> structural_problems(std::uint8_t version, const std::vector<TlvRecord>& records);

/// Throws StructureError if the message breaks a structural rule other than
/// the version, UnsupportedVersion for a version other than kProtocolVersion.
Bytes encode_message(const ProtocolMessage& message);

/// Inverse of encode_message, enforcing the same rules.
ProtocolMessage decode_message(ByteView data);

/// The bytes covered by the signature: everything after the SIGNATURE
/// record's value. Only the version byte and the first record header are
/// inspected, so this works on messages whose body is corrupt.
ByteView signed_span(ByteView data);

/// The SIGNATURE record's value located the same way as signed_span.
ByteView signature_value(ByteView data);

} // namespace strongvelope
