#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lockopt {

/// Unsigned big integer; just enough arithmetic for design-space products.
class BigUint {
  public:
    BigUint() : limbs_{0} {}
    explicit BigUint(uint64_t v);

    void multiply(uint32_t m);

    /// Decimal representation, no leading zeros.
    std::string str() const;

    bool fits_u64() const { return limbs_.size() <= 2; }
    uint64_t as_u64() const;

    bool operator==(const BigUint& o) const { return limbs_ == o.limbs_; }

  private:
    std::vector<uint32_t> limbs_;  // little-endian base 2^32
};

}  // namespace lockopt
