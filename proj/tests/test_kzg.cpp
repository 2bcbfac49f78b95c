#include "doctest.h"
#include "kzg.hpp"
#include "test_rng.hpp"

using namespace zkt;

namespace {
const Srs& test_srs() {
    static Srs srs = Srs::setup_str("kzg-test-seed", 300);
    return srs;
}

Poly random_poly(TestRng& rng, int deg) {
    std::vector<Fr> c;
    for (int i = 0; i <= deg; ++i) c.push_back(rng.fr());
    return Poly{c};
}
}  // namespace

TEST_CASE("setup basics") {
    Srs tiny = Srs::setup_str("s", 1);
    CHECK(tiny.g1.size() == 2);
    CHECK(tiny.g1[0] == G1::generator());
    REQUIRE(tiny.test_trapdoor.has_value());
    CHECK(tiny.g1[1] == G1::generator().scalar_mul(*tiny.test_trapdoor));

    // determinism
    Srs a = Srs::setup_str("same-seed", 8);
    Srs b = Srs::setup_str("same-seed", 8);
    CHECK(a.serialize() == b.serialize());
    Srs c = Srs::setup_str("other-seed", 8);
    CHECK(a.serialize() != c.serialize());

    CHECK_THROWS_AS(Srs::setup_str("s", 0), ConfigError);
}

TEST_CASE("srs pairing consistency") {
    const Srs& srs = test_srs();
    CHECK(srs.spot_check(4));
    // exact spot: e([tau^3]_1, [tau^5]_2) == e([tau^8]_1, [1]_2)
    CHECK(pairing(srs.g1[3], srs.g2[5]) == pairing(srs.g1[8], srs.g2[0]));
}

TEST_CASE("srs file roundtrip strips trapdoor") {
    Srs a = Srs::setup_str("file-seed", 16);
    auto bytes = a.serialize();
    Srs back = Srs::deserialize(bytes);
    CHECK(back.g1.size() == a.g1.size());
    CHECK(!back.test_trapdoor.has_value());
    CHECK(back.serialize() == bytes);
    // truncation -> format error
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(Srs::deserialize(bytes), FormatError);
}

TEST_CASE("commit basics") {
    const Srs& srs = test_srs();
    CHECK(kzg_commit(srs, Poly::zero()).is_identity());
    CHECK(kzg_commit(srs, Poly::constant(Fr::one())) == G1::generator());
    // homomorphism
    TestRng rng(1);
    Poly f = random_poly(rng, 20), g = random_poly(rng, 17);
    CHECK(kzg_commit(srs, f).add(kzg_commit(srs, g)) == kzg_commit(srs, f.add(g)));
    // degree overflow
    CHECK_THROWS_AS(kzg_commit(srs, random_poly(rng, 301)), ConfigError);
    // commitment matches direct evaluation at the trapdoor
    Fr tau = *srs.test_trapdoor;
    CHECK(kzg_commit(srs, f) == G1::generator().scalar_mul(f.eval(tau)));
}

TEST_CASE("hiding blinders give distinct commitments") {
    const Srs& srs = test_srs();
    TestRng rng(2);
    Poly f = random_poly(rng, 10);
    G1 c1 = kzg_commit_blinded(srs, f, rng.fr());
    G1 c2 = kzg_commit_blinded(srs, f, rng.fr());
    CHECK(c1 != c2);
}

TEST_CASE("open and verify") {
    const Srs& srs = test_srs();
    TestRng rng(3);
    // constant
    Poly fc = Poly::constant(Fr::from_u64(5));
    auto pf = kzg_open(srs, fc, rng.fr());
    CHECK(pf.value == Fr::from_u64(5));
    CHECK(kzg_verify(srs, kzg_commit(srs, fc), pf));
    // f = X^2 at 2 -> 4
    Poly x2{{Fr::zero(), Fr::zero(), Fr::one()}};
    auto pf2 = kzg_open(srs, x2, Fr::from_u64(2));
    CHECK(pf2.value == Fr::from_u64(4));
    CHECK(kzg_verify(srs, kzg_commit(srs, x2), pf2));
    // proof for f against commitment of g != f rejects
    Poly f = random_poly(rng, 12), g = random_poly(rng, 12);
    auto pf3 = kzg_open(srs, f, rng.fr());
    CHECK(!kzg_verify(srs, kzg_commit(srs, g), pf3));
}

TEST_CASE("completeness over random openings") {
    const Srs& srs = test_srs();
    TestRng rng(4);
    for (int i = 0; i < 50; ++i) {
        Poly f = random_poly(rng, 1 + (int)(rng.next() % 40));
        Fr x = rng.fr();
        auto pf = kzg_open(srs, f, x);
        CHECK(pf.value == f.eval(x));
        CHECK(kzg_verify(srs, kzg_commit(srs, f), pf));
    }
}

TEST_CASE("binding fuzz") {
    const Srs& srs = test_srs();
    TestRng rng(5);
    for (int i = 0; i < 20; ++i) {
        Poly f = random_poly(rng, 64), g = random_poly(rng, 64);
        if (f == g) continue;
        CHECK(kzg_commit(srs, f) != kzg_commit(srs, g));
    }
}

TEST_CASE("batch open") {
    const Srs& srs = test_srs();
    TestRng rng(6);

    // single polynomial reduces to plain open
    Poly f = random_poly(rng, 9);
    Fr x = rng.fr(), gamma = rng.fr();
    std::vector<Poly> single{f};
    G1 w = kzg_batch_open(srs, single, x, gamma);
    auto pf = kzg_open(srs, f, x);
    CHECK(w == pf.witness);

    // 3 random polys accept
    std::vector<Poly> fs{random_poly(rng, 15), random_poly(rng, 10), random_poly(rng, 20)};
    std::vector<G1> coms;
    std::vector<Fr> values;
    for (const auto& p : fs) {
        coms.push_back(kzg_commit(srs, p));
        values.push_back(p.eval(x));
    }
    G1 w3 = kzg_batch_open(srs, fs, x, gamma);
    CHECK(kzg_batch_verify(srs, coms, values, x, gamma, w3));

    // one perturbed value rejects for 100 random gammas
    for (int t = 0; t < 100; ++t) {
        Fr g2 = rng.fr();
        G1 wt = kzg_batch_open(srs, fs, x, g2);
        auto bad = values;
        bad[t % 3] = bad[t % 3].add(Fr::one());
        CHECK(!kzg_batch_verify(srs, coms, bad, x, g2, wt));
    }
}
