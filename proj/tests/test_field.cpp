#include <gmp.h>

#include "doctest.h"
#include "field.hpp"
#include "test_rng.hpp"

using namespace zkt;

namespace {

void to_mpz(mpz_t out, const Limbs& l) {
    mpz_import(out, 4, -1, 8, 0, 0, l.data());
}

template <typename P>
void check_against_gmp() {
    mpz_t mod, a, b, c, expect;
    mpz_inits(mod, a, b, c, expect, nullptr);
    mpz_set_str(mod, P::DEC, 10);

    TestRng rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        Fe<P> x = Fe<P>::from_limbs({rng.next(), rng.next(), rng.next(), rng.next()});
        Fe<P> y = Fe<P>::from_limbs({rng.next(), rng.next(), rng.next(), rng.next()});
        to_mpz(a, x.canonical());
        to_mpz(b, y.canonical());

        // mul
        mpz_mul(c, a, b);
        mpz_mod(c, c, mod);
        to_mpz(expect, x.mul(y).canonical());
        CHECK(mpz_cmp(c, expect) == 0);
        // add
        mpz_add(c, a, b);
        mpz_mod(c, c, mod);
        to_mpz(expect, x.add(y).canonical());
        CHECK(mpz_cmp(c, expect) == 0);
        // sub
        mpz_sub(c, a, b);
        mpz_mod(c, c, mod);
        to_mpz(expect, x.sub(y).canonical());
        CHECK(mpz_cmp(c, expect) == 0);
        // inverse
        if (!x.is_zero()) {
            Fe<P> xi = x.inverse();
            CHECK(x.mul(xi) == Fe<P>::one());
        }
    }
    mpz_clears(mod, a, b, c, expect, nullptr);
}

}  // namespace

TEST_CASE("Fp arithmetic matches GMP") { check_against_gmp<FpParams>(); }
TEST_CASE("Fr arithmetic matches GMP") { check_against_gmp<FrParams>(); }

TEST_CASE("field basics") {
    CHECK(Fr::from_u64(2).add(Fr::from_u64(3)) == Fr::from_u64(5));
    CHECK(Fr::from_u64(7).mul(Fr::from_u64(6)) == Fr::from_u64(42));
    CHECK(Fr::from_i64(-1).add(Fr::one()) == Fr::zero());
    CHECK(Fr::from_u64(10).to_dec() == "10");
    Fr x = Fr::from_u64(123456789);
    uint8_t buf[32];
    x.to_bytes(buf);
    CHECK(Fr::from_bytes(buf) == x);
}

TEST_CASE("wide reduction") {
    // from_bytes_wide(x || 0) == from_bytes(x)
    TestRng rng(3);
    for (int i = 0; i < 20; ++i) {
        uint8_t wide[64] = {0};
        for (int j = 0; j < 32; ++j) wide[j] = (uint8_t)rng.next();
        Fr a = Fr::from_bytes_wide(wide);
        Fr b = Fr::from_bytes(wide);
        // b is reduction of the low 256 bits; equal since high part zero
        CHECK(a == b);
    }
}

TEST_CASE("batch inverse") {
    TestRng rng(11);
    std::vector<Fr> xs;
    for (int i = 0; i < 50; ++i) xs.push_back(rng.fr());
    xs[7] = Fr::zero();
    std::vector<Fr> orig = xs;
    batch_inverse(xs);
    for (size_t i = 0; i < xs.size(); ++i) {
        if (orig[i].is_zero())
            CHECK(xs[i].is_zero());
        else
            CHECK(orig[i].mul(xs[i]) == Fr::one());
    }
}
