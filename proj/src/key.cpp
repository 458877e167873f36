#include "lockopt/key.hpp"

#include "lockopt/common.hpp"

namespace lockopt {

Key Key::zeros(size_t nbits) {
    Key k;
    k.bits_.assign(nbits, 0);
    return k;
}

Key Key::random(size_t nbits, Rng& rng) {
    Key k;
    k.bits_.resize(nbits);
    for (size_t i = 0; i < nbits; ++i) k.bits_[i] = static_cast<uint8_t>(rng.next() & 1u);
    return k;
}

static int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Key Key::from_hex(std::string_view hex, size_t nbits) {
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) {
        hex.remove_prefix(2);
    }
    if (hex.empty()) throw Error("empty key string");
    Key k = zeros(nbits);
    // Rightmost digit holds bits 0..3.
    size_t bit = 0;
    for (size_t i = hex.size(); i-- > 0;) {
        int d = hex_digit(hex[i]);
        if (d < 0) throw Error(std::string("invalid hex digit in key: '") + hex[i] + "'");
        for (int j = 0; j < 4; ++j, ++bit) {
            uint8_t v = static_cast<uint8_t>((d >> j) & 1);
            if (bit < nbits) {
                k.bits_[bit] = v;
            } else if (v) {
                throw Error("key value does not fit in " + std::to_string(nbits) + " bits");
            }
        }
    }
    return k;
}

uint32_t Key::segment(size_t offset, int length) const {
    uint32_t v = 0;
    for (int j = 0; j < length; ++j) {
        v |= static_cast<uint32_t>(bits_[offset + static_cast<size_t>(j)]) << j;
    }
    return v;
}

std::string Key::to_hex() const {
    if (bits_.empty()) return "0";
    size_t ndigits = (bits_.size() + 3) / 4;
    std::string out(ndigits, '0');
    static const char* digits = "0123456789abcdef";
    for (size_t d = 0; d < ndigits; ++d) {
        int v = 0;
        for (int j = 0; j < 4; ++j) {
            size_t bit = d * 4 + static_cast<size_t>(j);
            if (bit < bits_.size() && bits_[bit]) v |= 1 << j;
        }
        out[ndigits - 1 - d] = digits[v];
    }
    return out;
}

}  // namespace lockopt
