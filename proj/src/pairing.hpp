#pragma once

#include "curve.hpp"

namespace zkt {

// Optimal ate pairing on BN254.
Gt pairing(const G1& p, const G2& q);

// Product of pairings e(p_i, q_i): shared final exponentiation.
Gt multi_pairing(std::span<const G1> ps, std::span<const G2> qs);

// Miller loop only (no final exponentiation); for batching.
Fp12 miller_loop(const G1& p, const G2& q);
Fp12 final_exponentiation(const Fp12& f);

}  // namespace zkt
