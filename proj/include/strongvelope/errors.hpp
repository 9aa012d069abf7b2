// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace strongvelope {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Wire format -------------------------------------------------------------

class WireError : public Error
{
public:
    using Error::Error;
};

/// Malformed TLV framing. `offset` is the position of the offending byte in
/// the buffer handed to the decoder.
class ParseError : public WireError
{
public:
    ParseError(std::size_t offset, const std::string& what)
        : WireError("offset " + std::to_string(offset) + ": " + what), offset_(offset)
    {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UnknownRecordType : public ParseError
{
public:
    UnknownRecordType(std::size_t offset, std::uint8_t type_byte);
    std::uint8_t type_byte() const noexcept { return type_byte_; }

private:
    std::uint8_t type_byte_;
};

class EncodeError : public WireError
{
public:
    using WireError::WireError;
};

/// Well-framed but violates message structure (ordering, parity, sizes).
class StructureError : public WireError
{
public:
    using WireError::WireError;
};

class UnsupportedVersion : public WireError
{
public:
    explicit UnsupportedVersion(std::uint8_t version);
    std::uint8_t version() const noexcept { return version_; }

private:
    std::uint8_t version_;
};

// Crypto ------------------------------------------------------------------

class CryptoError : public Error
{
public:
    using Error::Error;
};

class KeyAgreementError : public CryptoError
{
public:
    using CryptoError::CryptoError;
};

// Key management ----------------------------------------------------------

class KeyIdError : public Error
{
public:
    enum class Kind { CounterOverflow, NotMonotonic };
    KeyIdError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class KeyConflictError : public Error
{
public:
    using Error::Error;
};

// Session -----------------------------------------------------------------

class SessionError : public Error
{
public:
    using Error::Error;
};

class StateError : public SessionError
{
public:
    using SessionError::SessionError;
};

class MembershipError : public SessionError
{
public:
    using SessionError::SessionError;
};

class UnknownParticipant : public SessionError
{
public:
    using SessionError::SessionError;
};

class AuthenticityError : public SessionError
{
public:
    using SessionError::SessionError;
};

class BlindFollowupError : public StateError
{
public:
    BlindFollowupError() : StateError("a followup message must carry a payload") {}
};

// Transport ---------------------------------------------------------------

class TransportError : public Error
{
public:
    using Error::Error;
};

} // namespace strongvelope
