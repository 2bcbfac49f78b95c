#include <gmp.h>

#include "doctest.h"
#include "pairing.hpp"
#include "test_rng.hpp"

using namespace zkt;

TEST_CASE("G1 group law") {
    TestRng rng(1);
    G1 g = G1::generator();
    CHECK(g.on_curve());
    CHECK(g.add(g) == g.dbl());
    CHECK(g.add(G1::identity()) == g);
    CHECK(g.sub(g).is_identity());
    Fr a = rng.fr(), b = rng.fr();
    G1 p = g.scalar_mul(a), q = g.scalar_mul(b);
    CHECK(p.add(q) == g.scalar_mul(a.add(b)));
    CHECK(p.scalar_mul(b) == q.scalar_mul(a));
    CHECK(p.on_curve());
}

TEST_CASE("G2 group law") {
    TestRng rng(2);
    G2 g = G2::generator();
    CHECK(g.on_curve());
    CHECK(g.in_subgroup());
    Fr a = rng.fr(), b = rng.fr();
    G2 p = g.scalar_mul(a), q = g.scalar_mul(b);
    CHECK(p.add(q) == g.scalar_mul(a.add(b)));
    CHECK(p.on_curve());
}

TEST_CASE("point serialization roundtrip") {
    TestRng rng(3);
    for (int i = 0; i < 10; ++i) {
        G1 p = G1::generator().scalar_mul(rng.fr());
        uint8_t buf[G1_BYTES];
        g1_write(p, buf);
        auto back = g1_read(buf);
        REQUIRE(back.has_value());
        CHECK(*back == p);
    }
    for (int i = 0; i < 5; ++i) {
        G2 p = G2::generator().scalar_mul(rng.fr());
        uint8_t buf[G2_BYTES];
        g2_write(p, buf);
        auto back = g2_read(buf);
        REQUIRE(back.has_value());
        CHECK(*back == p);
    }
    uint8_t buf[G1_BYTES];
    g1_write(G1::identity(), buf);
    auto back = g1_read(buf);
    REQUIRE(back.has_value());
    CHECK(back->is_identity());
}

TEST_CASE("msm matches naive") {
    TestRng rng(4);
    std::vector<G1> bases;
    std::vector<Fr> scalars;
    G1 naive = G1::identity();
    for (int i = 0; i < 300; ++i) {
        G1 b = G1::generator().scalar_mul(rng.fr());
        Fr s = rng.fr();
        bases.push_back(b);
        scalars.push_back(s);
        naive = naive.add(b.scalar_mul(s));
    }
    CHECK(msm(bases, scalars) == naive);
}

TEST_CASE("fp12 tower sanity") {
    TestRng rng(5);
    Fp12 a, b;
    a.c0 = {{rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}};
    a.c1 = {{rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}};
    b.c0 = {{rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}};
    b.c1 = {{rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}, {rng.fp(), rng.fp()}};
    CHECK(a.mul(b) == b.mul(a));
    CHECK(a.mul(a.inverse()) == Fp12::one());
    CHECK(a.sqr() == a.mul(a));
    // frobenius is the p-power map
    Fp12 f1 = a.frobenius(1);
    Fp12 byexp = a.pow({FpParams::MOD[0], FpParams::MOD[1], FpParams::MOD[2], FpParams::MOD[3]});
    CHECK(f1 == byexp);
}

TEST_CASE("pairing bilinearity") {
    TestRng rng(6);
    G1 g1 = G1::generator();
    G2 g2 = G2::generator();
    Gt base = pairing(g1, g2);
    CHECK(!base.is_one());

    for (int i = 0; i < 5; ++i) {
        Fr a = rng.fr(), b = rng.fr();
        Gt lhs = pairing(g1.scalar_mul(a), g2.scalar_mul(b));
        Gt rhs = base.exp(a.mul(b));
        CHECK(lhs == rhs);
    }
    // e(P, Q+R) = e(P,Q) e(P,R)
    Fr a = rng.fr(), b = rng.fr();
    G2 qa = g2.scalar_mul(a), qb = g2.scalar_mul(b);
    CHECK(pairing(g1, qa.add(qb)) == pairing(g1, qa).mul(pairing(g1, qb)));
    // identity handling
    CHECK(pairing(G1::identity(), g2).is_one());
}

TEST_CASE("final exponentiation chain matches plain exponent") {
    // (p^4 - p^2 + 1) / r via GMP
    mpz_t p, r, e, tmp;
    mpz_inits(p, r, e, tmp, nullptr);
    mpz_set_str(p, FpParams::DEC, 10);
    mpz_set_str(r, FrParams::DEC, 10);
    mpz_pow_ui(e, p, 4);
    mpz_pow_ui(tmp, p, 2);
    mpz_sub(e, e, tmp);
    mpz_add_ui(e, e, 1);
    mpz_divexact(e, e, r);
    std::vector<u64> limbs((mpz_sizeinbase(e, 2) + 63) / 64, 0);
    size_t count = 0;
    mpz_export(limbs.data(), &count, -1, 8, 0, 0, e);

    TestRng rng(7);
    G1 p1 = G1::generator().scalar_mul(rng.fr());
    G2 p2 = G2::generator().scalar_mul(rng.fr());
    Fp12 f = miller_loop(p1, p2);
    // easy part
    Fp12 m = f.conj().mul(f.inverse());
    m = m.frobenius(2).mul(m);
    Fp12 plain = m.pow(limbs);
    CHECK(final_exponentiation(f) == plain);
    mpz_clears(p, r, e, tmp, nullptr);
}

TEST_CASE("multi pairing equals product") {
    TestRng rng(8);
    std::vector<G1> ps;
    std::vector<G2> qs;
    Gt prod = Gt::one();
    for (int i = 0; i < 3; ++i) {
        G1 p = G1::generator().scalar_mul(rng.fr());
        G2 q = G2::generator().scalar_mul(rng.fr());
        ps.push_back(p);
        qs.push_back(q);
        prod = prod.mul(pairing(p, q));
    }
    CHECK(multi_pairing(ps, qs) == prod);
}
