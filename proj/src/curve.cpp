#include "curve.hpp"

namespace zkt {

Fp G1Curve::b() { return Fp::from_u64(3); }

Jac<Fp> G1Curve::generator() {
    Jac<Fp> g;
    g.x = Fp::from_u64(1);
    g.y = Fp::from_u64(2);
    g.z = Fp::one();
    return g;
}

Fp2 G2Curve::b() {
    // 3 / (9 + u)
    Fp2 three{Fp::from_u64(3), Fp::zero()};
    Fp2 xi{Fp::from_u64(9), Fp::one()};
    return three.mul(xi.inverse());
}

namespace {
Fp fp_from_dec(const char* s) {
    Fp r = Fp::zero();
    Fp ten = Fp::from_u64(10);
    for (const char* c = s; *c; ++c) r = r.mul(ten).add(Fp::from_u64((u64)(*c - '0')));
    return r;
}
}  // namespace

Jac<Fp2> G2Curve::generator() {
    // standard BN254 G2 generator
    Jac<Fp2> g;
    g.x.c0 = fp_from_dec(
        "10857046999023057135944570762232829481370756359578518086990519993285655852781");
    g.x.c1 = fp_from_dec(
        "11559732032986387107991004021392285783925812861821192530917403151452391805634");
    g.y.c0 = fp_from_dec(
        "8495653923123431417604973247489272438418190587263600148770280649306958101930");
    g.y.c1 = fp_from_dec(
        "4082367875863433681332203403145435568316851327593401208105741076214120093531");
    g.z = Fp2::one();
    return g;
}

namespace {

template <typename P>
P msm_impl(std::span<const P> bases, std::span<const Fr> scalars) {
    size_t n = std::min(bases.size(), scalars.size());
    if (n == 0) return P::identity();
    if (n < 8) {
        P acc = P::identity();
        for (size_t i = 0; i < n; ++i) acc = acc.add(bases[i].scalar_mul(scalars[i]));
        return acc;
    }
    int c = 3;
    if (n >= 32) c = 5;
    if (n >= 256) c = 8;
    if (n >= 4096) c = 11;
    int windows = (254 + c - 1) / c;
    std::vector<Limbs> es(n);
    for (size_t i = 0; i < n; ++i) es[i] = scalars[i].canonical();

    P total = P::identity();
    for (int w = windows - 1; w >= 0; --w) {
        if (w != windows - 1)
            for (int k = 0; k < c; ++k) total = total.dbl();
        std::vector<P> buckets((size_t)1 << c, P::identity());
        int bit0 = w * c;
        for (size_t i = 0; i < n; ++i) {
            u64 frag = 0;
            for (int k = c - 1; k >= 0; --k) {
                int bit = bit0 + k;
                u64 b = (bit < 256) ? (es[i][bit >> 6] >> (bit & 63)) & 1 : 0;
                frag = (frag << 1) | b;
            }
            if (frag) buckets[frag] = buckets[frag].add(bases[i]);
        }
        P running = P::identity(), sum = P::identity();
        for (size_t b = buckets.size() - 1; b >= 1; --b) {
            running = running.add(buckets[b]);
            sum = sum.add(running);
        }
        total = total.add(sum);
    }
    return total;
}

}  // namespace

G1 msm(std::span<const G1> bases, std::span<const Fr> scalars) { return msm_impl(bases, scalars); }
G2 msm_g2(std::span<const G2> bases, std::span<const Fr> scalars) {
    return msm_impl(bases, scalars);
}

std::optional<Fp> fp_sqrt(const Fp& a) {
    if (a.is_zero()) return a;
    // p = 3 mod 4: candidate = a^((p+1)/4)
    Limbs e = FpParams::MOD;
    e[0] += 1;  // p+1; p ends in ...47 so no carry
    u64 carry = 0;
    for (int i = 3; i >= 0; --i) {
        u64 cur = e[i];
        e[i] = (cur >> 2) | (carry << 62);
        carry = cur & 3;
    }
    Fp cand = a.pow(e);
    if (cand.sqr() == a) return cand;
    return std::nullopt;
}

std::optional<Fp2> fp2_sqrt(const Fp2& a) {
    if (a.is_zero()) return a;
    Fp norm = a.c0.sqr().add(a.c1.sqr());
    auto s = fp_sqrt(norm);
    if (!s) return std::nullopt;
    Fp inv2 = Fp::from_u64(2).inverse();
    Fp delta = a.c0.add(*s).mul(inv2);
    auto x0 = fp_sqrt(delta);
    if (!x0) {
        delta = a.c0.sub(*s).mul(inv2);
        x0 = fp_sqrt(delta);
        if (!x0) return std::nullopt;
    }
    if (x0->is_zero()) {
        // pure imaginary case: a = a1*u, handled by generic path below failing
        auto x1 = fp_sqrt(a.c0.neg());
        if (x1) {
            Fp2 r{Fp::zero(), *x1};
            if (r.sqr() == a) return r;
        }
        return std::nullopt;
    }
    Fp x1 = a.c1.mul(x0->dbl().inverse());
    Fp2 r{*x0, x1};
    if (r.sqr() == a) return r;
    return std::nullopt;
}

namespace {

void fp_write(const Fp& f, uint8_t* out) { f.to_bytes(out); }

uint8_t flag_of(bool inf, bool odd) { return inf ? 2 : (odd ? 1 : 0); }

bool y_is_odd(const Fp& y) { return y.canonical()[0] & 1; }

}  // namespace

void g1_write(const G1& p, uint8_t out[G1_BYTES]) {
    std::memset(out, 0, G1_BYTES);
    if (p.is_identity()) {
        out[32] = 2;
        return;
    }
    auto [x, y] = p.to_affine();
    fp_write(x, out);
    out[32] = flag_of(false, y_is_odd(y));
}

std::optional<G1> g1_read(const uint8_t in[G1_BYTES]) {
    if (in[32] == 2) return G1::identity();
    if (in[32] > 2) return std::nullopt;
    Fp x = Fp::from_bytes(in);
    auto y = fp_sqrt(x.sqr().mul(x).add(G1Curve::b()));
    if (!y) return std::nullopt;
    Fp yy = *y;
    if (y_is_odd(yy) != (in[32] == 1)) yy = yy.neg();
    G1 p = G1::from_affine(x, yy);
    return p;
}

void g2_write(const G2& p, uint8_t out[G2_BYTES]) {
    std::memset(out, 0, G2_BYTES);
    if (p.is_identity()) {
        out[64] = 2;
        return;
    }
    auto [x, y] = p.to_affine();
    fp_write(x.c0, out);
    fp_write(x.c1, out + 32);
    bool odd = y.c0.is_zero() ? y_is_odd(y.c1) : y_is_odd(y.c0);
    out[64] = flag_of(false, odd);
}

std::optional<G2> g2_read(const uint8_t in[G2_BYTES]) {
    if (in[64] == 2) return G2::identity();
    if (in[64] > 2) return std::nullopt;
    Fp2 x{Fp::from_bytes(in), Fp::from_bytes(in + 32)};
    auto y = fp2_sqrt(x.sqr().mul(x).add(G2Curve::b()));
    if (!y) return std::nullopt;
    Fp2 yy = *y;
    bool odd = yy.c0.is_zero() ? y_is_odd(yy.c1) : y_is_odd(yy.c0);
    if (odd != (in[64] == 1)) yy = yy.neg();
    G2 p = G2::from_affine(x, yy);
    if (!p.in_subgroup()) return std::nullopt;
    return p;
}

}  // namespace zkt
