// SPDX-License-Identifier: Apache-2.0

#include "strongvelope/random.hpp"

#include <openssl/rand.h>

#include "strongvelope/crypto.hpp"
#include "strongvelope/errors.hpp"

namespace strongvelope {

void SystemRandom::fill(std::span<std::uint8_t> out)
{
    if (!out.empty()) {
        if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
            throw CryptoError("RAND_bytes failed");
        }
    }
}

DeterministicRandom::DeterministicRandom(ByteView seed) : seed_(seed.begin(), seed.end()) {}

void DeterministicRandom::fill(std::span<std::uint8_t> out)
{
    for (auto& b : out) {
        if (used_ == buffer_.size()) {
            Bytes input = seed_;
            for (int shift = 56; shift >= 0; shift -= 8) {
                input.push_back(static_cast<std::uint8_t>(block_ >> shift));
            }
            auto digest = detail::sha256(input);
            std::copy(digest.begin(), digest.end(), buffer_.begin());
            ++block_;
            used_ = 0;
        }
        b = buffer_[used_++];
    }
}

DeterministicRandom DeterministicRandom::fork(std::string_view label) const
{
    Bytes material = seed_;
    material.push_back(0x00);
    append(material, as_bytes(label));
    return DeterministicRandom(detail::sha256(material));
}

} // namespace strongvelope
