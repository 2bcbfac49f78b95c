
#include "pairing.hpp"

namespace zkt {

namespace {

constexpr u64 BN_X = 4965661367192848881ull;  // BN parameter
// 6x+2 = 29793968203157093288 is 65 bits: an implicit leading 1 bit, then ATE_LOOP_LOW.
constexpr u64 ATE_LOOP_LOW = 6 * BN_X + 2;  // low 64 bits (wraps mod 2^64)

struct TwistFrobConsts {
    Fp2 qx, qy;  // xi^{(p-1)/3}, xi^{(p-1)/2}
    TwistFrobConsts() {
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
        Fp2 xi{Fp::from_u64(9), Fp::one()};
        qx = xi.pow(div_small(pm1, 3));
        qy = xi.pow(div_small(pm1, 2));
    }
};

const TwistFrobConsts& twist_consts() {
    static TwistFrobConsts c;
    return c;
}

struct G2Affine {
    Fp2 x, y;
};

struct G2Proj {
    Fp2 x, y, z;
};

struct LineCoeffs {
    Fp2 c0, c1, c2;
};

// Homogeneous-projective doubling step; returns line coefficients (D-twist shape).
LineCoeffs doubling_step(G2Proj& r, const Fp& half) {
    Fp2 a = r.x.mul(r.y).mul_fp(half);
    Fp2 b = r.y.sqr();
    Fp2 c = r.z.sqr();
    Fp2 e = G2Curve::b().mul(c.dbl().add(c));
    Fp2 f = e.dbl().add(e);
    Fp2 g = b.add(f).mul_fp(half);
    Fp2 h = r.y.add(r.z).sqr().sub(b.add(c));
    Fp2 i = e.sub(b);
    Fp2 j = r.x.sqr();
    Fp2 e2 = e.sqr();
    r.x = a.mul(b.sub(f));
    r.y = g.sqr().sub(e2.dbl().add(e2));
    r.z = b.mul(h);
    return {h.neg(), j.dbl().add(j), i};
}

LineCoeffs addition_step(G2Proj& r, const G2Affine& q) {
    Fp2 theta = r.y.sub(q.y.mul(r.z));
    Fp2 lambda = r.x.sub(q.x.mul(r.z));
    Fp2 c = theta.sqr();
    Fp2 d = lambda.sqr();
    Fp2 e = lambda.mul(d);
    Fp2 f = r.z.mul(c);
    Fp2 g = r.x.mul(d);
    Fp2 h = e.add(f).sub(g.dbl());
    r.x = lambda.mul(h);
    r.y = theta.mul(g.sub(h)).sub(e.mul(r.y));
    r.z = e.mul(r.z);
    Fp2 j = theta.mul(q.x).sub(lambda.mul(q.y));
    return {lambda, theta.neg(), j};
}

void ell(Fp12& f, const LineCoeffs& l, const Fp& px, const Fp& py) {
    Fp2 c0 = l.c0.mul_fp(py);
    Fp2 c1 = l.c1.mul_fp(px);
    f = f.mul_by_034(c0, c1, l.c2);
}

G2Affine mul_by_char(const G2Affine& q) {
    const auto& tc = twist_consts();
    return {q.x.conj().mul(tc.qx), q.y.conj().mul(tc.qy)};
}

}  // namespace

Fp12 miller_loop(const G1& p, const G2& q) {
    if (p.is_identity() || q.is_identity()) return Fp12::one();
    auto [px, py] = p.to_affine();
    auto [qx, qy] = q.to_affine();
    G2Affine qa{qx, qy};
    G2Proj r{qa.x, qa.y, Fp2::one()};
    Fp half = Fp::from_u64(2).inverse();

    Fp12 f = Fp12::one();
    for (int i = 63; i >= 0; --i) {
        f = f.sqr();
        ell(f, doubling_step(r, half), px, py);
        if ((ATE_LOOP_LOW >> i) & 1) ell(f, addition_step(r, qa), px, py);
    }
    G2Affine q1 = mul_by_char(qa);
    G2Affine q2 = mul_by_char(q1);
    q2.y = q2.y.neg();
    ell(f, addition_step(r, q1), px, py);
    ell(f, addition_step(r, q2), px, py);
    return f;
}

Fp12 final_exponentiation(const Fp12& f) {
    // easy part: f^((p^6-1)(p^2+1))
    Fp12 m = f.conj().mul(f.inverse());
    m = m.frobenius(2).mul(m);

    // hard part via the base-p digits of (p^4-p^2+1)/r:
    //   lambda0 = -(36x^3+30x^2+18x+2), lambda1 = -(36x^3+18x^2+12x-1),
    //   lambda2 = 6x^2+1, lambda3 = 1
    // After the easy part m is cyclotomic, so inverse = conjugate.
    Fp12 a = m.pow_u64(BN_X);   // m^x
    Fp12 b = a.pow_u64(BN_X);   // m^{x^2}
    Fp12 c = b.pow_u64(BN_X);   // m^{x^3}
    Fp12 c36 = c.pow_u64(36);
    Fp12 t0 = c36.mul(b.pow_u64(30)).mul(a.pow_u64(18)).mul(m.sqr()).conj();  // m^{lambda0}
    Fp12 t1 = c36.mul(b.pow_u64(18)).mul(a.pow_u64(12)).conj().mul(m);        // m^{lambda1}
    Fp12 t2 = b.pow_u64(6).mul(m);                                            // m^{lambda2}
    return t0.mul(t1.frobenius(1)).mul(t2.frobenius(2)).mul(m.frobenius(3));
}

Gt pairing(const G1& p, const G2& q) { return Gt{final_exponentiation(miller_loop(p, q))}; }

Gt multi_pairing(std::span<const G1> ps, std::span<const G2> qs) {
    Fp12 f = Fp12::one();
    size_t n = std::min(ps.size(), qs.size());
    for (size_t i = 0; i < n; ++i) {
        if (ps[i].is_identity() || qs[i].is_identity()) continue;
        f = f.mul(miller_loop(ps[i], qs[i]));
    }
    return Gt{final_exponentiation(f)};
}

}  // namespace zkt
