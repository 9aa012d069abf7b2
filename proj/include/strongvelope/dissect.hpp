// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "strongvelope/crypto.hpp"

namespace strongvelope {

struct DissectReport
{
    std::string text;
    bool parsed = false;          // TLV framing decoded
    bool structure_ok = false;    // ordering and KEYS/RECIPIENT parity hold
    std::optional<bool> signature_valid; // set when a public key was given

    bool ok() const { return parsed && structure_ok && signature_valid.value_or(true); }
};

/// Human-readable breakdown of a wire message. Record lines have the form
///   [i] NAME type=0xTT length=N value=<hex>
/// so the wire can be reassembled from the report. Malformed framing is
/// reported with its byte offset rather than thrown.
DissectReport dissect(ByteView wire, const std::optional<SignPublicKey>& signer = std::nullopt);

} // namespace strongvelope
