#include "ext_field.hpp"

namespace zkt {

namespace {

// Frobenius coefficients: FROB6_C1[i] = xi^{i(p-1)/3}, FROB6_C2[i] = xi^{i*2(p-1)/3},
// FROB12_C1[i] = xi^{i(p-1)/6}. Computed once from the modulus.
struct FrobTables {
    Fp2 f12[4];  // for w-coefficient under frobenius^k, k=0..3
    Fp2 f6_v[4];
    Fp2 f6_v2[4];

    FrobTables() {
        // (p-1)/6 etc. as limb arrays: p-1 then divide by small ints.
        Limbs pm1 = FpParams::MOD;
        pm1[0] -= 1;
        auto div_small = [](Limbs x, u64 d) {
            u128 rem = 0;
            for (int i = 3; i >= 0; --i) {
                u128 cur = (rem << 64) | x[i];
                x[i] = (u64)(cur / d);
                rem = cur % d;
            }
            return x;
        };
        Limbs e6 = div_small(pm1, 6);
        Limbs e3 = div_small(pm1, 3);
        Limbs e2 = div_small(pm1, 2);
        Fp2 xi{Fp::from_u64(9), Fp::one()};
        Fp2 g12 = xi.pow(e6);
        Fp2 g6v = xi.pow(e3);
        Fp2 g6v2 = g6v.sqr();
        (void)e2;
        for (int k = 0; k < 4; ++k) {
            f12[k] = Fp2::one();
            f6_v[k] = Fp2::one();
            f6_v2[k] = Fp2::one();
        }
        // frobenius^1 coefficients; higher powers composed by repeated application.
        f12[1] = g12;
        f6_v[1] = g6v;
        f6_v2[1] = g6v2;
    }
};

const FrobTables& frob_tables() {
    static FrobTables t;
    return t;
}

Fp6 frob_once(const Fp6& a) {
    const FrobTables& t = frob_tables();
    return {a.c0.conj(), a.c1.conj().mul(t.f6_v[1]), a.c2.conj().mul(t.f6_v2[1])};
}

Fp12 frob_once(const Fp12& a) {
    const FrobTables& t = frob_tables();
    Fp6 r0 = frob_once(a.c0);
    Fp6 r1 = frob_once(a.c1);
    return {r0, r1.mul_fp2(t.f12[1])};
}

}  // namespace

Fp12 Fp12::frobenius(int power) const {
    Fp12 r = *this;
    for (int i = 0; i < power; ++i) r = frob_once(r);
    return r;
}

Fp12 Fp12::pow(const std::vector<u64>& e) const {
    Fp12 acc = one(), base = *this;
    for (size_t i = 0; i < e.size(); ++i) {
        u64 w = e[i];
        for (int b = 0; b < 64; ++b) {
            if ((w >> b) & 1) acc = acc.mul(base);
            base = base.sqr();
        }
    }
    return acc;
}

Gt Gt::exp(const Fr& s) const {
    Limbs e = s.canonical();
    return Gt{v.pow({e[0], e[1], e[2], e[3]})};
}

}  // namespace zkt
