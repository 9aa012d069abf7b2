// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace strongvelope {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Lower-case hex, two characters per byte.
std::string to_hex(ByteView data);

/// Accepts upper or lower case; whitespace is skipped. Throws
/// std::invalid_argument on odd length or a non-hex character.
Bytes from_hex(std::string_view text);

inline ByteView as_bytes(std::string_view text)
{
    return {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()};
}

inline void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

/// Fixed-width byte string. The tag keeps keys, nonces and handles of the
/// same width from being mixed up.
template <std::size_t N, typename Tag>
class ByteArray
{
public:
    static constexpr std::size_t kSize = N;

    ByteArray() = default;
    explicit ByteArray(const std::array<std::uint8_t, N>& bytes) : bytes_(bytes) {}

    /// Throws std::invalid_argument unless `data` is exactly N bytes.
    static ByteArray from_view(ByteView data)
    {
        if (data.size() != N) {
            throw std::invalid_argument("expected " + std::to_string(N) + " bytes, got " +
                                        std::to_string(data.size()));
        }
        ByteArray out;
        std::copy(data.begin(), data.end(), out.bytes_.begin());
        return out;
    }

    static ByteArray from_hex(std::string_view text) { return from_view(strongvelope::from_hex(text)); }

    ByteView view() const { return bytes_; }
    const std::array<std::uint8_t, N>& array() const { return bytes_; }
    std::uint8_t* data() { return bytes_.data(); }
    const std::uint8_t* data() const { return bytes_.data(); }
    constexpr std::size_t size() const { return N; }
    std::string hex() const { return to_hex(bytes_); }

    auto operator<=>(const ByteArray&) const = default;

private:
    std::array<std::uint8_t, N> bytes_{};
};

} // namespace strongvelope
