#include "doctest.h"
#include "polyiop.hpp"
#include "test_rng.hpp"

using namespace zkt;

namespace {

const Srs& srs() {
    static Srs s = Srs::setup_str("iop-test", 200);
    return s;
}

CommittedPoly commit_evals(const std::vector<Fr>& evals, BlinderSource* blinders = nullptr) {
    auto d = EvaluationDomain::radix2(evals.size());
    Poly p = interpolate(evals, d);
    if (blinders) p = blinders->blind(p, evals.size());
    return commit_poly(srs(), p);
}

std::vector<Fr> frs(std::initializer_list<long> vals) {
    std::vector<Fr> out;
    for (long v : vals) out.push_back(Fr::from_i64(v));
    return out;
}

CqTable nonpos_table(long bound) {
    std::vector<Fr> vals;
    long count = 1;
    while (count < 2 * bound + 2) count <<= 1;
    for (long v = 0; v > -count; --v) vals.push_back(Fr::from_i64(v));
    // pad with duplicates of an existing entry
    while (vals.size() & (vals.size() - 1)) vals.push_back(Fr::zero());
    return cq_preprocess(srs(), vals);
}

}  // namespace

TEST_CASE("generic iop: trivial and boolean") {
    BlinderSource bl(1);
    // N=1, R=f1, f1=0: trivially valid
    IopCircuit c;
    c.arity = 1;
    c.n = 8;
    c.root = c.var(0);
    CommittedPoly zero = commit_poly(srs(), bl.blind(Poly::zero(), 8));
    IopProof pf = iop_prove(srs(), c, {zero});
    CHECK(iop_verify(srs(), c, {zero.com}, pf) == IopVerdict::Accept);

    // boolean vector in {0,1}^8
    CommittedPoly f = commit_evals(frs({0, 1, 1, 0, 1, 0, 0, 1}), &bl);
    IopProof bp = boolean_check(srs(), f, 8);
    CHECK(verify_boolean(srs(), f.com, 8, bp) == IopVerdict::Accept);
    // all ones
    CommittedPoly ones = commit_evals(frs({1, 1, 1, 1}), &bl);
    CHECK(verify_boolean(srs(), ones.com, 4, boolean_check(srs(), ones, 4)) ==
          IopVerdict::Accept);
    // value 2 inside: prove-time error
    CommittedPoly bad = commit_evals(frs({0, 2, 1, 0}), &bl);
    CHECK_THROWS_AS(boolean_check(srs(), bad, 4), WitnessError);
}

TEST_CASE("iop step-4 vs opening rejection") {
    BlinderSource bl(2);
    CommittedPoly f = commit_evals(frs({1, 0, 1, 1}), &bl);
    IopProof pf = boolean_check(srs(), f, 4);
    // value forgery: caught at step 4
    IopProof v1 = pf;
    v1.q_at_z = v1.q_at_z.add(Fr::one());
    CHECK(verify_boolean(srs(), f.com, 4, v1) == IopVerdict::Step4Reject);
    // commitment forgery: h1 replaced -> caught at the pairing check
    IopProof v2 = pf;
    v2.h1 = v2.h1.add(G1::generator());
    CHECK(verify_boolean(srs(), f.com, 4, v2) == IopVerdict::OpeningReject);
    // consistent value forgeries (step-4 satisfied by recomputing q) still die
    // at the openings
    IopProof v3 = pf;
    v3.f_at_z[0] = v3.f_at_z[0].add(Fr::one());
    auto dom = EvaluationDomain::radix2(4);
    // pick q_at_z so step 4 passes: R(f) = f(1-f)
    Transcript tr = nark_transcript();
    // recompute zeta the same way the verifier does
    IopCircuit c = boolean_circuit(4);
    auto dgst = c.digest();
    tr.absorb_bytes("circuit", dgst.data(), dgst.size());
    for (const auto& p : v3.f_coms) tr.absorb_g1("f", p);
    tr.absorb_g1("q", v3.q_com);
    Fr zeta = tr.challenge("zeta");
    while (dom.vanishing_at(zeta).is_zero()) zeta = tr.challenge("zeta-retry");
    Fr r = v3.f_at_z[0].mul(Fr::one().sub(v3.f_at_z[0]));
    v3.q_at_z = r.mul(dom.vanishing_at(zeta).inverse());
    CHECK(verify_boolean(srs(), f.com, 4, v3) == IopVerdict::OpeningReject);
}

TEST_CASE("iop arity-2 with shift") {
    BlinderSource bl(3);
    // R = f2(x) - f1(wx) : f2 is the cyclic left-shift of f1
    TestRng rng(1);
    std::vector<Fr> a;
    for (int i = 0; i < 8; ++i) a.push_back(rng.fr());
    std::vector<Fr> b;
    for (int i = 0; i < 8; ++i) b.push_back(a[(i + 1) % 8]);
    IopCircuit c;
    c.arity = 2;
    c.n = 8;
    c.root = c.sub(c.var(1), c.shifted(0));
    CommittedPoly f1 = commit_evals(a, &bl), f2 = commit_evals(b, &bl);
    IopProof pf = iop_prove(srs(), c, {f1, f2});
    CHECK(iop_verify(srs(), c, {f1.com, f2.com}, pf) == IopVerdict::Accept);
    // flipped witness fails at prove time
    std::vector<Fr> bbad = b;
    bbad[5] = bbad[5].add(Fr::one());
    CHECK_THROWS_AS(iop_prove(srs(), c, {f1, commit_evals(bbad, &bl)}), WitnessError);
}

TEST_CASE("blinding: same witness, fresh blinders, both verify") {
    BlinderSource b1(10), b2(20);
    std::vector<Fr> v = frs({1, 1, 0, 1});
    CommittedPoly f1 = commit_evals(v, &b1);
    CommittedPoly f2 = commit_evals(v, &b2);
    CHECK(f1.com != f2.com);
    CHECK(verify_boolean(srs(), f1.com, 4, boolean_check(srs(), f1, 4)) == IopVerdict::Accept);
    CHECK(verify_boolean(srs(), f2.com, 4, boolean_check(srs(), f2, 4)) == IopVerdict::Accept);
}

TEST_CASE("one-to-one multiset check") {
    BlinderSource bl(4);
    CommittedPoly f = commit_evals(frs({3, 1, 4, 1}), &bl);
    CommittedPoly g = commit_evals(frs({1, 4, 3, 1}), &bl);
    auto pf = one_to_one_prove(srs(), f, g, 4, bl);
    CHECK(one_to_one_verify(srs(), f.com, g.com, 4, pf));
    // not a permutation -> prove fails (grand product does not close)
    CommittedPoly h = commit_evals(frs({1, 4, 3, 2}), &bl);
    CHECK_THROWS_AS(one_to_one_prove(srs(), f, h, 4, bl), WitnessError);
}

TEST_CASE("ordered check descending") {
    BlinderSource bl(5);
    auto table = nonpos_table(16);
    // already sorted, g = f
    CommittedPoly f0 = commit_evals(frs({9, 7, 3, 1}), &bl);
    CommittedPoly g0 = commit_evals(frs({9, 7, 3, 1}), &bl);
    auto pf0 = ordered_prove(srs(), table, f0, g0, 4, bl);
    CHECK(ordered_verify(srs(), table, f0.com, g0.com, 4, pf0));
    // f=[3,1,2, 0] descending g=[3,2,1, 0]
    CommittedPoly f = commit_evals(frs({3, 1, 2, 0}), &bl);
    CommittedPoly g = commit_evals(frs({3, 2, 1, 0}), &bl);
    auto pf = ordered_prove(srs(), table, f, g, 4, bl);
    CHECK(ordered_verify(srs(), table, f.com, g.com, 4, pf));
    // unsorted claimed order: range component rejects
    CommittedPoly gbad = commit_evals(frs({3, 1, 2, 0}), &bl);
    auto pfbad = ordered_prove(srs(), table, f, gbad, 4, bl, /*bypass=*/true);
    std::string why;
    CHECK(!ordered_verify(srs(), table, f.com, gbad.com, 4, pfbad, &why));
    CHECK(why == "ordered: range check");
}

TEST_CASE("ordered check vs sort oracle: all permutations of 4") {
    BlinderSource bl(6);
    auto table = nonpos_table(16);
    std::vector<long> base{7, 2, 9, 4};
    std::vector<int> idx{0, 1, 2, 3};
    int cases = 0;
    do {
        std::vector<Fr> fe;
        for (int i : idx) fe.push_back(Fr::from_i64(base[(size_t)i]));
        std::vector<long> sorted = {[&] {
            std::vector<long> s;
            for (int i : idx) s.push_back(base[(size_t)i]);
            std::sort(s.rbegin(), s.rend());
            return s;
        }()[0]};
        std::vector<long> s;
        for (int i : idx) s.push_back(base[(size_t)i]);
        std::sort(s.rbegin(), s.rend());
        std::vector<Fr> ge;
        for (long v : s) ge.push_back(Fr::from_i64(v));
        CommittedPoly f = commit_evals(fe, &bl), g = commit_evals(ge, &bl);
        auto pf = ordered_prove(srs(), table, f, g, 4, bl);
        CHECK(ordered_verify(srs(), table, f.com, g.com, 4, pf));
        (void)sorted;
        ++cases;
    } while (std::next_permutation(idx.begin(), idx.end()));
    CHECK(cases == 24);
}

TEST_CASE("max proof") {
    BlinderSource bl(7);
    auto table = nonpos_table(16);
    // constant vector: max = the constant
    CommittedPoly fc = commit_evals(frs({5, 5, 5, 5}), &bl);
    CommittedPoly gc = commit_evals(frs({5, 0, 0, 0}), &bl);
    auto pfc = max_prove(srs(), table, fc, gc, 4, bl);
    CHECK(max_verify(srs(), table, fc.com, gc.com, 4, pfc));
    // f=[4,9,2,7]: max 9 accepts
    CommittedPoly f = commit_evals(frs({4, 9, 2, 7}), &bl);
    CommittedPoly g = commit_evals(frs({9, 0, 0, 0}), &bl);
    auto pf = max_prove(srs(), table, f, g, 4, bl);
    CHECK(max_verify(srs(), table, f.com, g.com, 4, pf));
    // claimed 7 rejects
    CommittedPoly gbad = commit_evals(frs({7, 0, 0, 0}), &bl);
    auto pfbad = max_prove(srs(), table, f, gbad, 4, bl, /*bypass=*/true);
    CHECK(!max_verify(srs(), table, f.com, gbad.com, 4, pfbad));
}

TEST_CASE("copy constraint identity and slice") {
    BlinderSource bl(8);
    // identity map, m = n = 4, no pads
    {
        std::vector<Fr> v = frs({4, 5, 6, 7});
        CommittedPoly in = commit_evals(v, &bl);
        CommittedPoly out = commit_evals(v, &bl);
        CopyMap map;
        map.p1 = map.p2 = 1;
        map.m = map.n = 4;
        map.sigma = {0, 1, 2, 3};
        auto pf = copy_constraint_prove(srs(), map, {in}, {out}, bl);
        std::string why;
        CHECK(copy_constraint_verify(srs(), map, {in.com}, {out.com}, pf, &why));
    }
    // slice: outputs = inputs[2..6] of an 8-vector
    {
        std::vector<Fr> v = frs({10, 11, 12, 13, 14, 15, 16, 17});
        std::vector<Fr> w = frs({12, 13, 14, 15});
        CommittedPoly in = commit_evals(v, &bl);
        CommittedPoly out = commit_evals(w, &bl);
        CopyMap map;
        map.p1 = map.p2 = 1;
        map.m = 8;
        map.n = 4;
        map.sigma = {2, 3, 4, 5};
        auto pf = copy_constraint_prove(srs(), map, {in}, {out}, bl);
        std::string why;
        CHECK(copy_constraint_verify(srs(), map, {in.com}, {out.com}, pf, &why));
        // wrong slice start
        CopyMap bad = map;
        bad.sigma = {1, 2, 3, 4};
        CHECK_THROWS_AS(copy_constraint_prove(srs(), bad, {in}, {out}, bl), WitnessError);
    }
    // pads: output tail is a constant pad value
    {
        std::vector<Fr> v = frs({1, 2, 3, 4});
        std::vector<Fr> w = frs({2, 3, 0, 0});
        CommittedPoly in = commit_evals(v, &bl);
        CommittedPoly out = commit_evals(w, &bl);
        CopyMap map;
        map.p1 = map.p2 = 1;
        map.m = 4;
        map.n = 4;
        map.sigma = {1, 2, CopyMap::PAD_BASE + 0, CopyMap::PAD_BASE + 0};
        map.pad_values = {Fr::zero()};
        auto pf = copy_constraint_prove(srs(), map, {in}, {out}, bl);
        std::string why;
        CHECK(copy_constraint_verify(srs(), map, {in.com}, {out.com}, pf, &why));
        // forged pad: claim pad value 1 while outputs carry 0
        CopyMap forged = map;
        forged.pad_values = {Fr::one()};
        CHECK_THROWS_AS(copy_constraint_prove(srs(), forged, {in}, {out}, bl), WitnessError);
    }
}

TEST_CASE("copy constraint element-chasing oracle on small slices") {
    BlinderSource bl(9);
    TestRng rng(2);
    for (size_t m : {4u, 8u}) {
        std::vector<Fr> v;
        for (size_t i = 0; i < m; ++i) v.push_back(rng.fr());
        for (size_t start = 0; start + 2 <= m; ++start) {
            size_t n = 2;
            std::vector<Fr> w(v.begin() + (long)start, v.begin() + (long)(start + n));
            CommittedPoly in = commit_evals(v, &bl);
            CommittedPoly out = commit_evals(w, &bl);
            CopyMap map;
            map.p1 = map.p2 = 1;
            map.m = m;
            map.n = n;
            for (size_t i = 0; i < n; ++i) map.sigma.push_back(start + i);
            auto pf = copy_constraint_prove(srs(), map, {in}, {out}, bl);
            CHECK(copy_constraint_verify(srs(), map, {in.com}, {out.com}, pf));
        }
    }
}

TEST_CASE("div mod") {
    BlinderSource bl(11);
    // range table [0, 16)
    std::vector<Fr> range;
    for (long v = 0; v < 16; ++v) range.push_back(Fr::from_i64(v));
    auto table = cq_preprocess(srs(), range);

    // a = 0 -> q = 0, r = 0
    {
        CommittedPoly zero = commit_poly(srs(), Poly::zero());
        CommittedPoly b = commit_evals(frs({4, 4, 4, 4}));
        auto pf = div_mod_prove(srs(), table, zero, b, zero, zero, 4);
        CHECK(div_mod_verify(srs(), table, zero.com, b.com, zero.com, zero.com, 4, pf));
    }
    // a=[7,9,12,5], b=4 -> q=[1,2,3,1], r=[3,1,0,1]  (integer division oracle)
    {
        CommittedPoly a = commit_evals(frs({7, 9, 12, 5}));
        CommittedPoly b = commit_evals(frs({4, 4, 4, 4}));
        CommittedPoly q = commit_evals(frs({1, 2, 3, 1}));
        CommittedPoly r = commit_evals(frs({3, 1, 0, 1}));
        auto pf = div_mod_prove(srs(), table, a, b, q, r, 4);
        std::string why;
        CHECK(div_mod_verify(srs(), table, a.com, b.com, q.com, r.com, 4, pf, &why));
        // r >= b: range component rejects
        CommittedPoly qbad = commit_evals(frs({0, 2, 3, 1}));
        CommittedPoly rbad = commit_evals(frs({7, 1, 0, 1}));
        auto pfbad = div_mod_prove(srs(), table, a, b, qbad, rbad, 4, true);
        CHECK(!div_mod_verify(srs(), table, a.com, b.com, qbad.com, rbad.com, 4, pfbad, &why));
        CHECK(why == "divmod: b-1-r range");
    }
}
