// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/dissect.hpp"

#include <cstdio>
#include <sstream>

#include "strongvelope/errors.hpp"
#include "strongvelope/wire_codec.hpp"

namespace strongvelope {

namespace {

std::string hex_byte(std::uint8_t b)
{
    char buf[5];
    std::snprintf(buf, sizeof buf, "0x%02x", b);
    return buf;
}

} // namespace

DissectReport dissect(ByteView wire, const std::optional<SignPublicKey>& signer)
{
    DissectReport report;
    std::ostringstream out;
    if (wire.empty()) {
        out << "error: empty message\n";
        report.text = out.str();
        return report;
    }
    out << "version: " << hex_byte(wire[0]) << (wire[0] == kProtocolVersion ? "" : " (unsupported)") << '\n';

    std::vector<TlvRecord> records;
    try {
        records = decode_records(wire.subspan(1), 1);
    } catch (const ParseError& e) {
        out << "error: " << e.what() << '\n';
        report.text = out.str();
        return report;
    }
    report.parsed = true;

    out << "records: " << records.size() << '\n';
    std::size_t offset = 1;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << "  [" << i << "] " << record_type_name(r.type) << " type=" << hex_byte(static_cast<std::uint8_t>(r.type))
            << " length=" << r.value.size() << " offset=" << offset << " value=" << to_hex(r.value) << '\n';
        offset += kRecordHeaderSize + r.value.size();
    }

    ProtocolMessage msg{wire[0], records};
    if (const TlvRecord* t = msg.find(RecordType::MessageType)) {
        auto type = t->value.size() == 1 ? message_type_from_byte(t->value[0]) : std::nullopt;
        out << "message type: "
            << (type ? std::string(message_type_name(*type)) : "invalid (" + to_hex(t->value) + ")") << '\n';
    } else {
        out << "message type: absent\n";
    }
    if (!msg.find(RecordType::Payload)) {
        out << "payload: none (blind message)\n";
    }

    auto problems = structural_problems(wire[0], records);
    report.structure_ok = problems.empty();
    if (problems.empty()) {
        out << "structure: ok\n";
    }
    for (const auto& p : problems) {
        out << "structure: " << p << '\n';
    }

    if (signer) {
        bool valid = false;
        try {
            valid = verify_message(signed_span(wire), signature_value(wire), *signer);
        } catch (const WireError&) {
            valid = false;
        }
        report.signature_valid = valid;
        out << "signature: " << (valid ? "VALID" : "INVALID") << '\n';
    } else {
        out << "signature: not checked (no public key given)\n";
    }
    report.text = out.str();
    return report;
}

} // namespace strongvelope
