#include "doctest.h"
#include "poly.hpp"
#include "test_rng.hpp"

using namespace zkt;

TEST_CASE("domain roots of unity") {
    auto d1 = EvaluationDomain::radix2(1);
    CHECK(d1.omega == Fr::one());

    auto d4 = EvaluationDomain::radix2(4);
    CHECK(d4.omega.pow_u64(4) == Fr::one());
    CHECK(d4.omega.pow_u64(2) != Fr::one());

    // all 16 powers distinct (brute-force enumeration)
    auto d16 = EvaluationDomain::radix2(16);
    auto els = d16.elements();
    for (size_t i = 0; i < 16; ++i)
        for (size_t j = i + 1; j < 16; ++j) CHECK(els[i] != els[j]);
    CHECK(d16.omega.pow_u64(16) == Fr::one());

    CHECK_THROWS_AS(EvaluationDomain::radix2(3), ConfigError);
    CHECK_THROWS_AS(EvaluationDomain::radix2(0), ConfigError);
    // vanishing polynomial is zero on every element
    for (const auto& e : els) CHECK(d16.vanishing_at(e).is_zero());
}

TEST_CASE("interpolation") {
    auto d = EvaluationDomain::radix2(8);
    // all zeros -> zero polynomial
    CHECK(interpolate(std::vector<Fr>(8, Fr::zero()), d).is_zero());
    // constant c -> degree-0 polynomial c
    Fr c = Fr::from_u64(7);
    Poly pc = interpolate(std::vector<Fr>(8, c), d);
    CHECK(pc.degree() == 0);
    CHECK(pc.coeff(0) == c);
    // roundtrip on random vector
    TestRng rng(1);
    std::vector<Fr> v;
    for (int i = 0; i < 8; ++i) v.push_back(rng.fr());
    Poly f = interpolate(v, d);
    CHECK(evaluate_on_domain(f, d) == v);
    // pointwise check
    auto els = d.elements();
    for (size_t i = 0; i < 8; ++i) CHECK(f.eval(els[i]) == v[i]);

    CHECK_THROWS_AS(interpolate(std::vector<Fr>(4, c), d), ShapeError);
}

TEST_CASE("fft roundtrip up to 2^10") {
    TestRng rng(2);
    for (size_t n : {2u, 16u, 256u, 1024u}) {
        auto d = EvaluationDomain::radix2(n);
        std::vector<Fr> v;
        for (size_t i = 0; i < n; ++i) v.push_back(rng.fr());
        CHECK(evaluate_on_domain(interpolate(v, d), d) == v);
    }
}

TEST_CASE("quotient by vanishing") {
    auto d = EvaluationDomain::radix2(8);
    // X^n - 1 -> 1
    std::vector<Fr> zn(9, Fr::zero());
    zn[0] = Fr::one().neg();
    zn[8] = Fr::one();
    Poly z{zn};
    Poly q = quotient_by_vanishing(z, d);
    CHECK(q == Poly::constant(Fr::one()));
    // zero -> zero
    CHECK(quotient_by_vanishing(Poly::zero(), d).is_zero());
    // (X^n - 1)(X + 3) -> X + 3
    Poly lin{{Fr::from_u64(3), Fr::one()}};
    CHECK(quotient_by_vanishing(z.mul(lin), d) == lin);
    // re-multiply reproduces numerator exactly
    TestRng rng(3);
    std::vector<Fr> rc;
    for (int i = 0; i < 5; ++i) rc.push_back(rng.fr());
    Poly t{rc};
    Poly num = z.mul(t);
    CHECK(quotient_by_vanishing(num, d).mul(z) == num);
    // non-vanishing numerator rejected
    Poly bad = num.add(Poly::constant(Fr::one()));
    CHECK_THROWS_AS(quotient_by_vanishing(bad, d), WitnessError);
}

TEST_CASE("quotient linear") {
    // constant f: q = 0
    Poly fc = Poly::constant(Fr::from_u64(9));
    CHECK(quotient_linear(fc, Fr::from_u64(5), Fr::from_u64(9)).is_zero());
    // f = X^2 at x=1: q = X + 1
    Poly x2{{Fr::zero(), Fr::zero(), Fr::one()}};
    Poly q = quotient_linear(x2, Fr::one(), Fr::one());
    CHECK(q == Poly({Fr::one(), Fr::one()}));
    // random degree-7 f: q(t)(t-x) == f(t) - y at random t
    TestRng rng(4);
    std::vector<Fr> rc;
    for (int i = 0; i < 8; ++i) rc.push_back(rng.fr());
    Poly f{rc};
    Fr x = rng.fr();
    Fr y = f.eval(x);
    Poly qq = quotient_linear(f, x, y);
    for (int i = 0; i < 10; ++i) {
        Fr t = rng.fr();
        CHECK(qq.eval(t).mul(t.sub(x)) == f.eval(t).sub(y));
    }
    CHECK_THROWS_AS(quotient_linear(f, x, y.add(Fr::one())), WitnessError);
}

TEST_CASE("poly mul schoolbook vs fft") {
    TestRng rng(5);
    std::vector<Fr> a, b;
    for (int i = 0; i < 100; ++i) a.push_back(rng.fr());
    for (int i = 0; i < 70; ++i) b.push_back(rng.fr());
    Poly fa{a}, fb{b};
    Poly prod = fa.mul(fb);  // fft path
    // naive check at random points
    for (int i = 0; i < 5; ++i) {
        Fr t = rng.fr();
        CHECK(prod.eval(t) == fa.eval(t).mul(fb.eval(t)));
    }
}
