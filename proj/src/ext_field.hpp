#pragma once

#include "field.hpp"

namespace zkt {

// Fp2 = Fp[u] / (u^2 + 1)
struct Fp2 {
    Fp c0, c1;

    static Fp2 zero() { return {Fp::zero(), Fp::zero()}; }
    static Fp2 one() { return {Fp::one(), Fp::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool operator==(const Fp2& o) const { return c0 == o.c0 && c1 == o.c1; }
    bool operator!=(const Fp2& o) const { return !(*this == o); }

    Fp2 add(const Fp2& o) const { return {c0.add(o.c0), c1.add(o.c1)}; }
    Fp2 sub(const Fp2& o) const { return {c0.sub(o.c0), c1.sub(o.c1)}; }
    Fp2 dbl() const { return {c0.dbl(), c1.dbl()}; }
    Fp2 neg() const { return {c0.neg(), c1.neg()}; }
    Fp2 conj() const { return {c0, c1.neg()}; }

    Fp2 mul(const Fp2& o) const {
        Fp aa = c0.mul(o.c0);
        Fp bb = c1.mul(o.c1);
        Fp ad_bc = c0.add(c1).mul(o.c0.add(o.c1)).sub(aa).sub(bb);
        return {aa.sub(bb), ad_bc};
    }

    Fp2 sqr() const {
        // (c0 + c1 u)^2 = (c0+c1)(c0-c1) + 2 c0 c1 u
        Fp t0 = c0.add(c1);
        Fp t1 = c0.sub(c1);
        Fp t2 = c0.mul(c1);
        return {t0.mul(t1), t2.dbl()};
    }

    Fp2 mul_fp(const Fp& s) const { return {c0.mul(s), c1.mul(s)}; }

    Fp2 inverse() const {
        Fp norm = c0.sqr().add(c1.sqr());
        Fp ni = norm.inverse();
        return {c0.mul(ni), c1.mul(ni).neg()};
    }

    Fp2 pow(const Limbs& e) const {
        Fp2 base = *this, acc = one();
        for (int i = 3; i >= 0; --i)
            for (int b = 63; b >= 0; --b) {
                acc = acc.sqr();
                if ((e[i] >> b) & 1) acc = acc.mul(base);
            }
        return acc;
    }

    // multiply by the sextic non-residue xi = 9 + u
    Fp2 mul_by_xi() const {
        Fp nine = Fp::from_u64(9);
        return {c0.mul(nine).sub(c1), c1.mul(nine).add(c0)};
    }
};

// Fp6 = Fp2[v] / (v^3 - xi)
struct Fp6 {
    Fp2 c0, c1, c2;

    static Fp6 zero() { return {Fp2::zero(), Fp2::zero(), Fp2::zero()}; }
    static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
    bool operator==(const Fp6& o) const { return c0 == o.c0 && c1 == o.c1 && c2 == o.c2; }

    Fp6 add(const Fp6& o) const { return {c0.add(o.c0), c1.add(o.c1), c2.add(o.c2)}; }
    Fp6 sub(const Fp6& o) const { return {c0.sub(o.c0), c1.sub(o.c1), c2.sub(o.c2)}; }
    Fp6 dbl() const { return {c0.dbl(), c1.dbl(), c2.dbl()}; }
    Fp6 neg() const { return {c0.neg(), c1.neg(), c2.neg()}; }

    // multiply by v: (c0,c1,c2) -> (xi*c2, c0, c1)
    Fp6 mul_by_v() const { return {c2.mul_by_xi(), c0, c1}; }

    Fp6 mul(const Fp6& o) const {
        Fp2 aa = c0.mul(o.c0);
        Fp2 bb = c1.mul(o.c1);
        Fp2 cc = c2.mul(o.c2);
        Fp2 t0 = c1.add(c2).mul(o.c1.add(o.c2)).sub(bb).sub(cc).mul_by_xi().add(aa);
        Fp2 t1 = c0.add(c1).mul(o.c0.add(o.c1)).sub(aa).sub(bb).add(cc.mul_by_xi());
        Fp2 t2 = c0.add(c2).mul(o.c0.add(o.c2)).sub(aa).sub(cc).add(bb);
        return {t0, t1, t2};
    }

    Fp6 sqr() const { return mul(*this); }

    // sparse multiply by (b0 + b1 v)
    Fp6 mul_by_01(const Fp2& b0, const Fp2& b1) const {
        Fp2 aa = c0.mul(b0);
        Fp2 bb = c1.mul(b1);
        Fp2 t0 = c1.add(c2).mul(b1).sub(bb).mul_by_xi().add(aa);
        Fp2 t1 = c0.add(c1).mul(b0.add(b1)).sub(aa).sub(bb);
        Fp2 t2 = c0.add(c2).mul(b0).sub(aa).add(bb);
        return {t0, t1, t2};
    }

    Fp6 mul_fp2(const Fp2& s) const { return {c0.mul(s), c1.mul(s), c2.mul(s)}; }

    Fp6 inverse() const {
        Fp2 t0 = c0.sqr().sub(c1.mul(c2).mul_by_xi());
        Fp2 t1 = c2.sqr().mul_by_xi().sub(c0.mul(c1));
        Fp2 t2 = c1.sqr().sub(c0.mul(c2));
        Fp2 f = c0.mul(t0).add(c2.mul(t1).mul_by_xi()).add(c1.mul(t2).mul_by_xi());
        Fp2 fi = f.inverse();
        return {t0.mul(fi), t1.mul(fi), t2.mul(fi)};
    }
};

// Fp12 = Fp6[w] / (w^2 - v)
struct Fp12 {
    Fp6 c0, c1;

    static Fp12 zero() { return {Fp6::zero(), Fp6::zero()}; }
    static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }
    bool is_one() const { return *this == one(); }
    bool operator==(const Fp12& o) const { return c0 == o.c0 && c1 == o.c1; }
    bool operator!=(const Fp12& o) const { return !(*this == o); }

    Fp12 add(const Fp12& o) const { return {c0.add(o.c0), c1.add(o.c1)}; }
    Fp12 sub(const Fp12& o) const { return {c0.sub(o.c0), c1.sub(o.c1)}; }
    Fp12 neg() const { return {c0.neg(), c1.neg()}; }

    Fp12 mul(const Fp12& o) const {
        Fp6 aa = c0.mul(o.c0);
        Fp6 bb = c1.mul(o.c1);
        Fp6 hi = c0.add(c1).mul(o.c0.add(o.c1)).sub(aa).sub(bb);
        return {aa.add(bb.mul_by_v()), hi};
    }

    Fp12 sqr() const {
        Fp6 aa = c0.mul(c1);
        Fp6 t = c0.add(c1).mul(c0.add(c1.mul_by_v()));
        return {t.sub(aa).sub(aa.mul_by_v()), aa.dbl()};
    }

    Fp12 conj() const { return {c0, c1.neg()}; }

    Fp12 inverse() const {
        Fp6 t = c0.sqr().sub(c1.sqr().mul_by_v());
        Fp6 ti = t.inverse();
        return {c0.mul(ti), c1.mul(ti).neg()};
    }

    Fp12 pow(const std::vector<u64>& e) const;  // big-endian-agnostic, little-endian limbs

    Fp12 pow_u64(u64 e) const {
        Fp12 acc = one(), base = *this;
        while (e) {
            if (e & 1) acc = acc.mul(base);
            base = base.sqr();
            e >>= 1;
        }
        return acc;
    }

    // sparse multiply by a + b*w + c*v*w  (line evaluation shape, D-twist)
    Fp12 mul_by_034(const Fp2& a, const Fp2& b, const Fp2& c) const {
        Fp6 t0 = c0.mul_fp2(a);
        Fp6 t1 = c1.mul_by_01(b, c);
        Fp6 hi = c0.add(c1).mul_by_01(a.add(b), c).sub(t0).sub(t1);
        return {t0.add(t1.mul_by_v()), hi};
    }

    Fp12 frobenius(int power) const;
};

// GT wrapper: target-group element, multiplicative notation.
struct Gt {
    Fp12 v = Fp12::one();

    static Gt one() { return Gt{};
    }
    bool is_one() const { return v.is_one(); }
    bool operator==(const Gt& o) const { return v == o.v; }
    bool operator!=(const Gt& o) const { return !(v == o.v); }

    Gt mul(const Gt& o) const { return Gt{v.mul(o.v)}; }
    Gt inverse() const { return Gt{v.conj()}; }  // valid in the cyclotomic subgroup
    Gt exp(const Fr& s) const;
};

}  // namespace zkt
