// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "strongvelope/bytes.hpp"

namespace strongvelope {

/// Source of key material and nonces. Sessions take one by reference so
/// tests and scenario runs can substitute a seeded generator.
class RandomSource
{
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    template <typename T>
    T generate()
    {
        T value;
        fill({value.data(), value.size()});
        return value;
    }
};

/// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemRandom final : public RandomSource
{
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream: block i = SHA-256(seed || be64(i)). Not for
/// production keys.
class DeterministicRandom final : public RandomSource
{
public:
    explicit DeterministicRandom(ByteView seed);

    void fill(std::span<std::uint8_t> out) override;

    /// Independent stream for a named sub-component, derived from the seed
    /// only (not from how much of this stream has been consumed).
    DeterministicRandom fork(std::string_view label) const;

private:
    Bytes seed_;
    std::uint64_t block_ = 0;
    std::array<std::uint8_t, 32> buffer_{};
    std::size_t used_ = 32;
};

} // namespace strongvelope
