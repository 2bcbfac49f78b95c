#pragma once

#include <optional>
#include <span>

#include "ext_field.hpp"

namespace zkt {

// Jacobian point over field F for y^2 = x^3 + b (a = 0).
template <typename F>
struct Jac {
    F x = F::zero(), y = F::one(), z = F::zero();  // z=0 encodes infinity

    bool is_inf() const { return z.is_zero(); }
};

struct G1Curve {
    using Field = Fp;
    static Fp b();
    static Jac<Fp> generator();
};

struct G2Curve {
    using Field = Fp2;
    static Fp2 b();
    static Jac<Fp2> generator();
};

template <typename C>
struct Point {
    using F = typename C::Field;
    Jac<F> p;

    static Point identity() { return Point{}; }
    static Point generator() { return Point{C::generator()}; }
    bool is_identity() const { return p.is_inf(); }

    static Point from_affine(const F& x, const F& y) {
        Point r;
        r.p.x = x;
        r.p.y = y;
        r.p.z = F::one();
        return r;
    }

    Point dbl() const {
        if (p.is_inf()) return *this;
        F A = p.x.sqr();
        F B = p.y.sqr();
        F Cc = B.sqr();
        F D = p.x.add(B).sqr().sub(A).sub(Cc).dbl();
        F E = A.dbl().add(A);
        F Fv = E.sqr();
        Point r;
        r.p.x = Fv.sub(D.dbl());
        r.p.y = E.mul(D.sub(r.p.x)).sub(Cc.dbl().dbl().dbl());
        r.p.z = p.y.mul(p.z).dbl();
        return r;
    }

    Point add(const Point& o) const {
        if (p.is_inf()) return o;
        if (o.p.is_inf()) return *this;
        F z1z1 = p.z.sqr();
        F z2z2 = o.p.z.sqr();
        F u1 = p.x.mul(z2z2);
        F u2 = o.p.x.mul(z1z1);
        F s1 = p.y.mul(o.p.z).mul(z2z2);
        F s2 = o.p.y.mul(p.z).mul(z1z1);
        if (u1 == u2) {
            if (s1 == s2) return dbl();
            return identity();
        }
        F h = u2.sub(u1);
        F i = h.dbl().sqr();
        F j = h.mul(i);
        F rr = s2.sub(s1).dbl();
        F v = u1.mul(i);
        Point out;
        out.p.x = rr.sqr().sub(j).sub(v.dbl());
        out.p.y = rr.mul(v.sub(out.p.x)).sub(s1.mul(j).dbl());
        out.p.z = p.z.add(o.p.z).sqr().sub(z1z1).sub(z2z2).mul(h);
        return out;
    }

    Point neg() const {
        Point r = *this;
        r.p.y = r.p.y.neg();
        return r;
    }

    Point sub(const Point& o) const { return add(o.neg()); }

    Point scalar_mul_limbs(const Limbs& e) const {
        Point acc = identity();
        bool started = false;
        for (int i = 3; i >= 0; --i)
            for (int b = 63; b >= 0; --b) {
                if (started) acc = acc.dbl();
                if ((e[i] >> b) & 1) {
                    acc = acc.add(*this);
                    started = true;
                }
            }
        return acc;
    }

    Point scalar_mul(const Fr& s) const { return scalar_mul_limbs(s.canonical()); }

    bool in_subgroup() const { return scalar_mul_limbs(FrParams::MOD).is_identity(); }

    // affine coords; undefined for identity
    std::pair<F, F> to_affine() const {
        F zi = p.z.inverse();
        F zi2 = zi.sqr();
        return {p.x.mul(zi2), p.y.mul(zi2).mul(zi)};
    }

    bool operator==(const Point& o) const {
        if (is_identity() || o.is_identity()) return is_identity() == o.is_identity();
        F z1z1 = p.z.sqr();
        F z2z2 = o.p.z.sqr();
        if (!(p.x.mul(z2z2) == o.p.x.mul(z1z1))) return false;
        return p.y.mul(o.p.z).mul(z2z2) == o.p.y.mul(p.z).mul(z1z1);
    }
    bool operator!=(const Point& o) const { return !(*this == o); }

    bool on_curve() const {
        if (is_identity()) return true;
        auto [ax, ay] = to_affine();
        return ay.sqr() == ax.sqr().mul(ax).add(C::b());
    }
};

using G1 = Point<G1Curve>;
using G2 = Point<G2Curve>;

// Multi-scalar multiplication (Pippenger buckets).
G1 msm(std::span<const G1> bases, std::span<const Fr> scalars);
G2 msm_g2(std::span<const G2> bases, std::span<const Fr> scalars);

// Serialization: x coordinate + flag byte (0=finite even-y, 1=finite odd-y, 2=infinity).
constexpr size_t G1_BYTES = 33;
constexpr size_t G2_BYTES = 65;
void g1_write(const G1& p, uint8_t out[G1_BYTES]);
void g2_write(const G2& p, uint8_t out[G2_BYTES]);
std::optional<G1> g1_read(const uint8_t in[G1_BYTES]);
std::optional<G2> g2_read(const uint8_t in[G2_BYTES]);

std::optional<Fp> fp_sqrt(const Fp& a);
std::optional<Fp2> fp2_sqrt(const Fp2& a);

}  // namespace zkt
