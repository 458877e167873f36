#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lockopt/rng.hpp"

namespace lockopt {

/// A locking key: a designer-supplied bit string. Bit i of the key is the
/// value wired to KEY[i] in locked source. Hex I/O uses the standard integer
/// convention: bit 0 is the least-significant bit of the rightmost digit.
class Key {
  public:
    Key() = default;

    static Key zeros(size_t nbits);
    static Key random(size_t nbits, Rng& rng);
    /// Parses a hex string ("0x" prefix optional) into an nbits key.
    /// Throws Error if the value does not fit.
    static Key from_hex(std::string_view hex, size_t nbits);

    size_t size() const { return bits_.size(); }
    uint8_t bit(size_t i) const { return bits_[i]; }
    void set_bit(size_t i, uint8_t v) { bits_[i] = v ? 1 : 0; }
    void flip_bit(size_t i) { bits_[i] ^= 1; }

    /// Value of bits [offset, offset+length), bit `offset` as LSB. length <= 32.
    uint32_t segment(size_t offset, int length) const;

    std::string to_hex() const;

    const std::vector<uint8_t>& bits() const { return bits_; }

    bool operator==(const Key&) const = default;
    bool operator<(const Key& o) const { return bits_ < o.bits_; }

  private:
    std::vector<uint8_t> bits_;
};

}  // namespace lockopt
