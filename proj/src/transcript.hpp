#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "curve.hpp"

namespace zkt {

// Domain-separated Fiat-Shamir transcript over SHA-256 chaining.
// Two oracles are exposed by tag: "NARK" and "ACC".
class Transcript {
  public:
    explicit Transcript(std::string_view domain_tag);

    void absorb_bytes(std::string_view label, const uint8_t* data, size_t len);
    void absorb_u64(std::string_view label, u64 v);
    void absorb_fr(std::string_view label, const Fr& v);
    void absorb_g1(std::string_view label, const G1& p);
    void absorb_g2(std::string_view label, const G2& p);

    Fr challenge(std::string_view label);

  private:
    std::array<uint8_t, 32> state_{};
};

inline Transcript nark_transcript() { return Transcript("NARK"); }
inline Transcript acc_transcript() { return Transcript("ACC"); }

}  // namespace zkt
