#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace zkt {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using Limbs = std::array<u64, 4>;

// BN254 base-field parameters.
struct FpParams {
    static constexpr Limbs MOD = {0x3c208c16d87cfd47ull, 0x97816a916871ca8dull,
                                  0xb85045b68181585dull, 0x30644e72e131a029ull};
    static constexpr u64 INV = 0x87d20782e4866389ull;
    static constexpr Limbs R1 = {0xd35d438dc58f0d9dull, 0x0a78eb28f5c70b3dull,
                                 0x666ea36f7879462cull, 0x0e0a77c19a07df2full};
    static constexpr Limbs R2 = {0xf32cfc5b538afa89ull, 0xb5e71911d44501fbull,
                                 0x47ab1eff0a417ff6ull, 0x06d89f71cab8351full};
    static constexpr Limbs R3 = {0xb1cd6dafda1530dfull, 0x62f210e6a7283db6ull,
                                 0xef7f0b0c0ada0afbull, 0x20fd6e902d592544ull};
    static constexpr const char* DEC =
        "21888242871839275222246405745257275088696311157297823662689037894645226208583";
};

// BN254 scalar-field parameters.
struct FrParams {
    static constexpr Limbs MOD = {0x43e1f593f0000001ull, 0x2833e84879b97091ull,
                                  0xb85045b68181585dull, 0x30644e72e131a029ull};
    static constexpr u64 INV = 0xc2e1f593efffffffull;
    static constexpr Limbs R1 = {0xac96341c4ffffffbull, 0x36fc76959f60cd29ull,
                                 0x666ea36f7879462eull, 0x0e0a77c19a07df2full};
    static constexpr Limbs R2 = {0x1bb8e645ae216da7ull, 0x53fe3ab1e35c59e3ull,
                                 0x8c49833d53bb8085ull, 0x0216d0b17f4e44a5ull};
    static constexpr Limbs R3 = {0x5e94d8e1b4bf0040ull, 0x2a489cbe1cfbb6b8ull,
                                 0x893cc664a19fcfedull, 0x0cf8594b7fcc657cull};
    static constexpr const char* DEC =
        "21888242871839275222246405745257275088548364400416034343698204186575808495617";
};

namespace detail {

inline bool limbs_gte(const Limbs& a, const Limbs& b) {
    for (int i = 3; i >= 0; --i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return true;
}

// a += b, returns carry
inline u64 limbs_add(Limbs& a, const Limbs& b) {
    u128 c = 0;
    for (int i = 0; i < 4; ++i) {
        c += (u128)a[i] + b[i];
        a[i] = (u64)c;
        c >>= 64;
    }
    return (u64)c;
}

// a -= b, returns borrow
inline u64 limbs_sub(Limbs& a, const Limbs& b) {
    u64 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        u64 bi = b[i] + borrow;
        borrow = (bi < b[i]) || (a[i] < bi) ? 1 : 0;
        a[i] = a[i] - bi;
    }
    return borrow;
}

}  // namespace detail

// Prime-field element in Montgomery form (always reduced below the modulus).
template <typename P>
struct Fe {
    Limbs v{0, 0, 0, 0};

    static constexpr Fe zero() { return Fe{}; }
    static Fe one() { return Fe{P::R1}; }

    static Fe from_u64(u64 x) {
        Fe r;
        r.v = {x, 0, 0, 0};
        return mont_mul(r, Fe{P::R2});
    }

    static Fe from_i64(long long x) {
        if (x >= 0) return from_u64((u64)x);
        return from_u64((u64)(-x)).neg();
    }

    // Reduces arbitrary 4 limbs mod p into Montgomery form.
    static Fe from_limbs(const Limbs& raw) {
        Fe t;
        t.v = raw;
        while (detail::limbs_gte(t.v, P::MOD)) detail::limbs_sub(t.v, P::MOD);
        return mont_mul(t, Fe{P::R2});
    }

    // 64 bytes little-endian -> field element (used by hash-to-field).
    static Fe from_bytes_wide(const uint8_t bytes[64]) {
        Limbs lo, hi;
        std::memcpy(lo.data(), bytes, 32);
        std::memcpy(hi.data(), bytes + 32, 32);
        Fe a, b;
        a.v = lo;
        b.v = hi;
        // lo*R2*R^-1 + hi*R3*R^-1 = (lo + hi*2^256)*R mod p
        Fe res = mont_mul(a, Fe{P::R2});
        Fe res2 = mont_mul(b, Fe{P::R3});
        return res.add(res2);
    }

    bool is_zero() const { return v[0] == 0 && v[1] == 0 && v[2] == 0 && v[3] == 0; }
    bool operator==(const Fe& o) const { return v == o.v; }
    bool operator!=(const Fe& o) const { return v != o.v; }

    Fe add(const Fe& o) const {
        Fe r = *this;
        u64 carry = detail::limbs_add(r.v, o.v);
        if (carry || detail::limbs_gte(r.v, P::MOD)) detail::limbs_sub(r.v, P::MOD);
        return r;
    }

    Fe sub(const Fe& o) const {
        Fe r = *this;
        if (detail::limbs_sub(r.v, o.v)) detail::limbs_add(r.v, P::MOD);
        return r;
    }

    Fe dbl() const { return add(*this); }

    Fe neg() const {
        if (is_zero()) return *this;
        Fe r;
        r.v = P::MOD;
        detail::limbs_sub(r.v, v);
        return r;
    }

    // CIOS Montgomery multiplication.
    static Fe mont_mul(const Fe& a, const Fe& b) {
        u64 t[5] = {0, 0, 0, 0, 0};
        for (int i = 0; i < 4; ++i) {
            u128 c = 0;
            for (int j = 0; j < 4; ++j) {
                c += (u128)t[j] + (u128)a.v[j] * b.v[i];
                t[j] = (u64)c;
                c >>= 64;
            }
            u64 t4 = t[4] + (u64)c;
            u64 t5 = (u64)(((u128)t[4] + (u128)c) >> 64);

            u64 m = t[0] * P::INV;
            c = (u128)t[0] + (u128)m * P::MOD[0];
            c >>= 64;
            for (int j = 1; j < 4; ++j) {
                c += (u128)t[j] + (u128)m * P::MOD[j];
                t[j - 1] = (u64)c;
                c >>= 64;
            }
            c += t4;
            t[3] = (u64)c;
            t[4] = t5 + (u64)(c >> 64);
        }
        Fe r;
        r.v = {t[0], t[1], t[2], t[3]};
        if (t[4] || detail::limbs_gte(r.v, P::MOD)) detail::limbs_sub(r.v, P::MOD);
        return r;
    }

    Fe mul(const Fe& o) const { return mont_mul(*this, o); }
    Fe sqr() const { return mont_mul(*this, *this); }

    Fe pow(const Limbs& e) const {
        Fe base = *this;
        Fe acc = one();
        bool started = false;
        for (int i = 3; i >= 0; --i) {
            for (int b = 63; b >= 0; --b) {
                if (started) acc = acc.sqr();
                if ((e[i] >> b) & 1) {
                    if (started)
                        acc = acc.mul(base);
                    else {
                        acc = base;
                        started = true;
                    }
                }
            }
        }
        return started ? acc : one();
    }

    Fe pow_u64(u64 e) const { return pow({e, 0, 0, 0}); }

    Fe inverse() const {
        // modulus - 2
        Limbs e = P::MOD;
        e[0] -= 2;  // both moduli are odd and > 2, no borrow
        return pow(e);
    }

    // Canonical (non-Montgomery) limbs.
    Limbs canonical() const {
        Fe t;
        t.v = v;
        Fe onev;
        onev.v = {1, 0, 0, 0};
        return mont_mul(t, onev).v;
    }

    void to_bytes(uint8_t out[32]) const {
        Limbs c = canonical();
        std::memcpy(out, c.data(), 32);
    }

    static Fe from_bytes(const uint8_t in[32]) {
        Limbs raw;
        std::memcpy(raw.data(), in, 32);
        return from_limbs(raw);
    }

    // Canonical value interpreted as integer is > (p-1)/2 (used for sign bit and
    // signed decode).
    bool is_negative() const {
        Limbs c = canonical();
        Limbs half = P::MOD;
        // half = (p-1)/2
        u64 carry = 0;
        for (int i = 3; i >= 0; --i) {
            u64 cur = half[i];
            half[i] = (cur >> 1) | (carry << 63);
            carry = cur & 1;
        }
        return !detail::limbs_gte(half, c);  // c > half
    }

    std::string to_dec() const {
        Limbs c = canonical();
        // Repeated division by 10 over limbs.
        std::string s;
        bool nz = true;
        while (nz) {
            u128 rem = 0;
            nz = false;
            for (int i = 3; i >= 0; --i) {
                u128 cur = (rem << 64) | c[i];
                c[i] = (u64)(cur / 10);
                rem = cur % 10;
                if (c[i]) nz = true;
            }
            s.push_back((char)('0' + (int)rem));
        }
        std::reverse(s.begin(), s.end());
        return s.empty() ? "0" : s;
    }
};

using Fp = Fe<FpParams>;
using Fr = Fe<FrParams>;

// Batch inversion (Montgomery trick); zero entries stay zero.
template <typename F>
inline void batch_inverse(std::vector<F>& xs) {
    size_t n = xs.size();
    std::vector<F> prefix(n);
    F acc = F::one();
    for (size_t i = 0; i < n; ++i) {
        prefix[i] = acc;
        if (!xs[i].is_zero()) acc = acc.mul(xs[i]);
    }
    F inv = acc.inverse();
    for (size_t i = n; i-- > 0;) {
        if (xs[i].is_zero()) continue;
        F xi = xs[i];
        xs[i] = inv.mul(prefix[i]);
        inv = inv.mul(xi);
    }
}

}  // namespace zkt
