#include "lockopt/bigint.hpp"

#include <algorithm>

namespace lockopt {

BigUint::BigUint(uint64_t v) {
    limbs_.push_back(static_cast<uint32_t>(v));
    if (v >> 32) limbs_.push_back(static_cast<uint32_t>(v >> 32));
}

void BigUint::multiply(uint32_t m) {
    uint64_t carry = 0;
    for (uint32_t& limb : limbs_) {
        uint64_t prod = static_cast<uint64_t>(limb) * m + carry;
        limb = static_cast<uint32_t>(prod);
        carry = prod >> 32;
    }
    while (carry) {
        limbs_.push_back(static_cast<uint32_t>(carry));
        carry >>= 32;
    }
    while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
}

std::string BigUint::str() const {
    // Repeated division by 1e9, collecting decimal chunks.
    std::vector<uint32_t> work(limbs_.rbegin(), limbs_.rend());  // big-endian
    std::string out;
    std::vector<uint32_t> chunks;
    while (!(work.size() == 1 && work[0] == 0)) {
        uint64_t rem = 0;
        std::vector<uint32_t> quot;
        for (uint32_t limb : work) {
            uint64_t cur = (rem << 32) | limb;
            uint32_t q = static_cast<uint32_t>(cur / 1'000'000'000ull);
            rem = cur % 1'000'000'000ull;
            if (!quot.empty() || q != 0) quot.push_back(q);
        }
        if (quot.empty()) quot.push_back(0);
        chunks.push_back(static_cast<uint32_t>(rem));
        work = std::move(quot);
    }
    if (chunks.empty()) return "0";
    out = std::to_string(chunks.back());
    for (auto it = chunks.rbegin() + 1; it != chunks.rend(); ++it) {
        std::string part = std::to_string(*it);
        out += std::string(9 - part.size(), '0') + part;
    }
    return out;
}

uint64_t BigUint::as_u64() const {
    uint64_t v = limbs_[0];
    if (limbs_.size() > 1) v |= static_cast<uint64_t>(limbs_[1]) << 32;
    return v;
}

}  // namespace lockopt
