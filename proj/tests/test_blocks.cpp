#include "accumulate.hpp"
#include "doctest.h"
#include "test_rng.hpp"

using namespace zkt;

namespace {

const Srs& srs() {
    static Srs s = Srs::setup_str("blocks-test", 64);
    return s;
}

Poly interp_u64(const std::vector<u64>& vals) {
    auto d = EvaluationDomain::radix2(vals.size());
    std::vector<Fr> evals;
    for (u64 v : vals) evals.push_back(Fr::from_u64(v));
    return interpolate(evals, d);
}

CommittedPoly cp(const Poly& p) { return commit_poly(srs(), p); }

CommittedPoly random_row(TestRng& rng, size_t n) {
    auto d = EvaluationDomain::radix2(n);
    std::vector<Fr> evals;
    for (size_t i = 0; i < n; ++i) evals.push_back(rng.fr());
    return cp(interpolate(evals, d));
}

using Mat = std::vector<std::vector<Fr>>;

Mat random_mat(TestRng& rng, size_t rows, size_t cols, u64 modulo = 0) {
    Mat m(rows, std::vector<Fr>(cols));
    for (auto& r : m)
        for (auto& v : r) v = modulo ? Fr::from_u64(rng.next() % modulo) : rng.fr();
    return m;
}

std::vector<CommittedPoly> commit_mat(const Mat& m, size_t padded_cols) {
    std::vector<CommittedPoly> rows;
    auto d = EvaluationDomain::radix2(padded_cols);
    for (const auto& r : m) {
        std::vector<Fr> evals(padded_cols, Fr::zero());
        std::copy(r.begin(), r.end(), evals.begin());
        rows.push_back(cp(interpolate(evals, d)));
    }
    return rows;
}

// naive O(l*m*n) oracle: C = A B^T
Mat naive_matmul_bt(const Mat& a, const Mat& b) {
    size_t l = a.size(), m = b.size(), n = a[0].size();
    Mat c(l, std::vector<Fr>(m, Fr::zero()));
    for (size_t i = 0; i < l; ++i)
        for (size_t k = 0; k < m; ++k)
            for (size_t j = 0; j < n; ++j) c[i][k] = c[i][k].add(a[i][j].mul(b[k][j]));
    return c;
}

}  // namespace

TEST_CASE("kind table") {
    int foldable = 0;
    for (int i = 0; i < BLOCK_KIND_COUNT; ++i)
        if (is_foldable((BlockKind)i)) ++foldable;
    CHECK(foldable == 13);
    CHECK(is_foldable(BlockKind::Cq2));
    CHECK(!is_foldable(BlockKind::Div));
    CHECK(!is_foldable(BlockKind::CopyConstraint));
    CHECK(!is_foldable(BlockKind::Ordered));
}

TEST_CASE("add block") {
    auto st = make_linear_structure(BlockKind::Add);
    // g = 0, h = f
    Poly f = interp_u64({5, 6, 7, 8});
    G1 cf = kzg_commit(srs(), f);
    CHECK(verify_block(st, prove_add(cf, G1::identity(), cf)));
    // hand sum: [1,2] + [3,4] = [4,6]
    G1 c1 = kzg_commit(srs(), interp_u64({1, 2}));
    G1 c2 = kzg_commit(srs(), interp_u64({3, 4}));
    G1 c3 = kzg_commit(srs(), interp_u64({4, 6}));
    CHECK(verify_block(st, prove_add(c1, c2, c3)));
    // perturbed output rejects
    CHECK(!verify_block(st, prove_add(c1, c2, c3.add(G1::generator()))));
    // wrong kind tag -> format error
    BlockProof bad = prove_sub(c1, c2, c3);
    CHECK_THROWS_AS(verify_block(st, bad), FormatError);
}

TEST_CASE("sub eq concat blocks") {
    TestRng rng(1);
    auto f = random_row(rng, 4), g = random_row(rng, 4);
    Poly diff = f.poly.sub(g.poly);
    G1 cd = kzg_commit(srs(), diff);
    CHECK(verify_block(make_linear_structure(BlockKind::Sub), prove_sub(f.com, g.com, cd)));
    CHECK(!verify_block(make_linear_structure(BlockKind::Sub),
                        prove_sub(f.com, g.com, cd.add(G1::generator()))));
    CHECK(verify_block(make_linear_structure(BlockKind::Eq), prove_eq(f.com, f.com)));
    CHECK(!verify_block(make_linear_structure(BlockKind::Eq), prove_eq(f.com, g.com)));

    auto st = make_linear_structure(BlockKind::Concat, 2);
    CHECK(verify_block(st, prove_concat({f.com, g.com}, {f.com, g.com})));
    CHECK(!verify_block(st, prove_concat({f.com, g.com}, {g.com, f.com})));
}

TEST_CASE("mulconst block") {
    TestRng rng(2);
    // c=1, g=f
    auto f = random_row(rng, 4);
    CHECK(verify_block(make_mulconst_structure(Fr::one()), prove_mulconst(f.com, f.com)));
    // c=0, g=0
    CHECK(verify_block(make_mulconst_structure(Fr::zero()),
                       prove_mulconst(f.com, G1::identity())));
    // c=3: g=3f accepts, g=3f+1 rejects
    Fr three = Fr::from_u64(3);
    auto st = make_mulconst_structure(three);
    G1 g3 = kzg_commit(srs(), f.poly.scale(three));
    CHECK(verify_block(st, prove_mulconst(f.com, g3)));
    G1 gbad = kzg_commit(srs(), f.poly.scale(three).add(Poly::constant(Fr::one())));
    CHECK(!verify_block(st, prove_mulconst(f.com, gbad)));
}

TEST_CASE("mulscalar block") {
    TestRng rng(3);
    auto st = make_mulscalar_structure();
    auto f = random_row(rng, 4);
    // S = 1 -> g = f
    CHECK(verify_block(st, prove_mulscalar(srs(), f.com, f.com, Fr::one())));
    // S = 0 -> g = 0
    CHECK(verify_block(st, prove_mulscalar(srs(), f.com, G1::identity(), Fr::zero())));
    // random S
    Fr s = rng.fr();
    G1 g = kzg_commit(srs(), f.poly.scale(s));
    BlockProof pf = prove_mulscalar(srs(), f.com, g, s);
    CHECK(verify_block(st, pf));
    // dual replaced by commitment of S+1 rejects
    BlockProof forged = pf;
    forged.x.g2[0] = G2::generator().scalar_mul(s.add(Fr::one()));
    CHECK(!verify_block(st, forged));
}

TEST_CASE("mul block") {
    TestRng rng(4);
    size_t n = 8;
    auto st = make_mul_structure(srs(), n);
    auto dom = EvaluationDomain::radix2(n);
    // h = 1 -> g = f, t = 0
    auto f = random_row(rng, n);
    auto one = cp(Poly::constant(Fr::one()));
    CHECK(verify_block(st, prove_mul(srs(), n, f, one, f)));
    // f = h = 0 -> g = 0
    auto zero = cp(Poly::zero());
    CHECK(verify_block(st, prove_mul(srs(), n, zero, zero, zero)));
    // random f,h; g from pointwise products
    auto h = random_row(rng, n);
    auto fe = evaluate_on_domain(f.poly, dom);
    auto he = evaluate_on_domain(h.poly, dom);
    std::vector<Fr> ge(n);
    for (size_t i = 0; i < n; ++i) ge[i] = fe[i].mul(he[i]);
    auto g = cp(interpolate(ge, dom));
    CHECK(verify_block(st, prove_mul(srs(), n, f, h, g)));
    // perturbed output -> prove-time quotient error
    ge[3] = ge[3].add(Fr::one());
    auto gbad = cp(interpolate(ge, dom));
    CHECK_THROWS_AS(prove_mul(srs(), n, f, h, gbad), WitnessError);
    // bypass emits a proof that the verifier rejects
    CHECK(!verify_block(st, prove_mul(srs(), n, f, h, gbad, true)));
    // blinded witnesses still prove correctly (blinding vanishes on H)
    std::vector<Fr> bf{rng.fr(), rng.fr()}, bh{rng.fr(), rng.fr()}, bg{rng.fr(), rng.fr()};
    std::vector<Fr> zc(n + 1, Fr::zero());
    zc[0] = Fr::one().neg();
    zc[n] = Fr::one();
    Poly zpoly{zc};
    auto fb = cp(f.poly.add(zpoly.mul(Poly{bf})));
    auto hb = cp(h.poly.add(zpoly.mul(Poly{bh})));
    auto gb = cp(g.poly.add(zpoly.mul(Poly{bg})));
    CHECK(verify_block(st, prove_mul(srs(), n, fb, hb, gb)));
    CHECK(fb.com != f.com);
}

TEST_CASE("sum block") {
    TestRng rng(5);
    size_t n = 4;
    auto st = make_sum_structure(srs(), n);
    // f = 0 -> total 0
    CHECK(verify_block(st, prove_sum(srs(), n, cp(Poly::zero()), Fr::zero())));
    // constant c over H of size n -> total c*n
    Fr c = Fr::from_u64(9);
    CHECK(verify_block(st, prove_sum(srs(), n, cp(Poly::constant(c)), c.mul(Fr::from_u64(n)))));
    // evals [1,2,3,4]: 10 accepts, 11 rejects (naive sum oracle)
    Poly f = interp_u64({1, 2, 3, 4});
    CHECK(verify_block(st, prove_sum(srs(), n, cp(f), Fr::from_u64(10))));
    CHECK(!verify_block(st, prove_sum(srs(), n, cp(f), Fr::from_u64(11))));
    // random vector vs naive sum
    auto dom = EvaluationDomain::radix2(n);
    std::vector<Fr> evals;
    Fr total = Fr::zero();
    for (size_t i = 0; i < n; ++i) {
        evals.push_back(rng.fr());
        total = total.add(evals.back());
    }
    CHECK(verify_block(st, prove_sum(srs(), n, cp(interpolate(evals, dom)), total)));
}

TEST_CASE("matmul block vs naive oracle") {
    TestRng rng(6);
    SharedRandomness rand{rng.fr(), rng.fr()};
    // identity 2x2 times random B
    {
        Mat a = {{Fr::one(), Fr::zero()}, {Fr::zero(), Fr::one()}};
        Mat b = random_mat(rng, 2, 2);
        Mat c = naive_matmul_bt(a, b);
        auto st = make_matmul_structure(srs(), 2, 2, 2);
        auto pf = prove_matmul(srs(), rand, commit_mat(a, 2), commit_mat(b, 2),
                               commit_mat(c, 2), 2);
        CHECK(verify_block(st, pf));
    }
    // A = 0 -> C = 0
    {
        Mat a(2, std::vector<Fr>(2, Fr::zero()));
        Mat b = random_mat(rng, 2, 2);
        Mat c = naive_matmul_bt(a, b);
        auto pf = prove_matmul(srs(), rand, commit_mat(a, 2), commit_mat(b, 2),
                               commit_mat(c, 2), 2);
        CHECK(verify_block(make_matmul_structure(srs(), 2, 2, 2), pf));
    }
    // random 3x2 times (3x2)^T with padding of m to 4
    {
        Mat a = random_mat(rng, 3, 2);
        Mat b = random_mat(rng, 3, 2);
        b.push_back(std::vector<Fr>(2, Fr::zero()));  // pad rows to 4
        Mat c = naive_matmul_bt(a, b);
        auto st = make_matmul_structure(srs(), 3, 4, 2);
        auto pf = prove_matmul(srs(), rand, commit_mat(a, 2), commit_mat(b, 2),
                               commit_mat(c, 4), 2);
        CHECK(verify_block(st, pf));
        // single entry of C perturbed rejects over 20 random (alpha, beta)
        Mat cbad = c;
        cbad[1][2] = cbad[1][2].add(Fr::one());
        int rejects = 0;
        for (int t = 0; t < 20; ++t) {
            SharedRandomness r2{rng.fr(), rng.fr()};
            auto bad =
                prove_matmul(srs(), r2, commit_mat(a, 2), commit_mat(b, 2), commit_mat(cbad, 4), 2);
            if (!verify_block(st, bad)) ++rejects;
        }
        CHECK(rejects == 20);
    }
    // exhaustive 2x2 * 2x2 over entries {0,1,2}
    {
        auto st = make_matmul_structure(srs(), 2, 2, 2);
        std::vector<Mat> mats;
        for (int bits = 0; bits < 81; ++bits) {
            int v = bits;
            Mat m(2, std::vector<Fr>(2));
            for (int i = 0; i < 4; ++i) {
                m[i / 2][i % 2] = Fr::from_u64((u64)(v % 3));
                v /= 3;
            }
            mats.push_back(m);
        }
        // sample pairs (the full 81x81 grid is covered by the acceptance suite)
        for (size_t i = 0; i < mats.size(); i += 9) {
            for (size_t j = 0; j < mats.size(); j += 27) {
                Mat c = naive_matmul_bt(mats[i], mats[j]);
                auto pf = prove_matmul(srs(), rand, commit_mat(mats[i], 2), commit_mat(mats[j], 2),
                                       commit_mat(c, 2), 2);
                CHECK(verify_block(st, pf));
            }
        }
    }
}

TEST_CASE("permute block") {
    TestRng rng(7);
    SharedRandomness rand{rng.fr(), rng.fr()};
    // identity permutation on 2x4
    {
        Mat a = random_mat(rng, 2, 4);
        std::vector<size_t> p0 = {0, 4};          // row offsets (flat r*n)
        std::vector<size_t> p1 = {0, 1, 2, 3};    // column offsets
        auto st = make_permute_structure(srs(), 2, 4, 2, 4);
        auto pf = prove_permute(srs(), rand, commit_mat(a, 4), commit_mat(a, 4), p0, p1, 4);
        CHECK(verify_block(st, pf));
    }
    // 2x2 transpose of random A: B[r][c] = A[c][r], flat = c*2 + r
    {
        Mat a = random_mat(rng, 2, 2);
        Mat b = {{a[0][0], a[1][0]}, {a[0][1], a[1][1]}};
        std::vector<size_t> p0 = {0, 1};
        std::vector<size_t> p1 = {0, 2};
        auto st = make_permute_structure(srs(), 2, 2, 2, 2);
        auto pf = prove_permute(srs(), rand, commit_mat(a, 2), commit_mat(b, 2), p0, p1, 2);
        CHECK(verify_block(st, pf));
        // swap two entries of B -> rejects over 20 random alpha
        Mat bbad = b;
        std::swap(bbad[0][0], bbad[1][1]);
        int rejects = 0;
        for (int t = 0; t < 20; ++t) {
            SharedRandomness r2{rng.fr(), rng.fr()};
            auto bad = prove_permute(srs(), r2, commit_mat(a, 2), commit_mat(bbad, 2), p0, p1, 2);
            if (!verify_block(st, bad)) ++rejects;
        }
        CHECK(rejects == 20);
    }
}

TEST_CASE("relax and decide") {
    TestRng rng(8);
    auto st = make_linear_structure(BlockKind::Add);
    auto f = random_row(rng, 4), g = random_row(rng, 4);
    G1 h = kzg_commit(srs(), f.poly.add(g.poly));
    BlockProof pf = prove_add(f.com, g.com, h);
    Accumulator acc = relax(st, pf);
    CHECK(acc.is_proof);
    CHECK(acc.mu == Fr::one());
    CHECK(decide(st, acc));
    // mutated proof: decide(relax(.)) == verify_block(.) == false
    BlockProof bad = pf;
    bad.x.g1[2] = bad.x.g1[2].add(G1::generator());
    CHECK(!verify_block(st, bad));
    CHECK(!decide(st, relax(st, bad)));
    // non-foldable kind -> unsupported fold error
    BlockProof cc;
    cc.x.kind = BlockKind::CopyConstraint;
    BlockStructure fake;
    fake.kind = BlockKind::CopyConstraint;
    CHECK_THROWS_AS(relax(fake, cc), UnsupportedFoldError);
}

namespace {

BlockProof random_add_proof(TestRng& rng) {
    auto f = random_row(rng, 4), g = random_row(rng, 4);
    G1 h = kzg_commit(srs(), f.poly.add(g.poly));
    return prove_add(f.com, g.com, h);
}

BlockProof random_mul_proof(TestRng& rng, size_t n) {
    auto dom = EvaluationDomain::radix2(n);
    auto f = random_row(rng, n), h = random_row(rng, n);
    auto fe = evaluate_on_domain(f.poly, dom);
    auto he = evaluate_on_domain(h.poly, dom);
    std::vector<Fr> ge(n);
    for (size_t i = 0; i < n; ++i) ge[i] = fe[i].mul(he[i]);
    return prove_mul(srs(), n, f, h, cp(interpolate(ge, dom)));
}

}  // namespace

TEST_CASE("fold two honest add accumulators") {
    TestRng rng(9);
    auto st = make_linear_structure(BlockKind::Add);
    Accumulator a1 = relax(st, random_add_proof(rng));
    Accumulator a2 = relax(st, random_add_proof(rng));
    auto [folded, pf] = fold(st, a1, a2);
    CHECK(!folded.is_proof);
    CHECK(pf.e_j.empty());  // degree-1 kind: no cross terms
    CHECK(decide(st, folded));
    CHECK(fold_verify(st, a1, a2, pf, folded));
    // tampered E rejects at decide
    Accumulator tampered = folded;
    tampered.e[0] = tampered.e[0].mul(pairing(G1::generator(), G2::generator()));
    CHECK(!decide(st, tampered));
    CHECK(!fold_verify(st, a1, a2, pf, tampered));
    // result mu off by one rejects in replay
    Accumulator off = folded;
    off.mu = off.mu.add(Fr::one());
    CHECK(!fold_verify(st, a1, a2, pf, off));
}

TEST_CASE("fold degree-2 kind with cross terms") {
    TestRng rng(10);
    size_t n = 8;
    auto st = make_mul_structure(srs(), n);
    Accumulator a1 = relax(st, random_mul_proof(rng, n));
    Accumulator a2 = relax(st, random_mul_proof(rng, n));
    auto [folded, pf] = fold(st, a1, a2);
    REQUIRE(pf.e_j.size() == 1);
    CHECK(decide(st, folded));
    CHECK(fold_verify(st, a1, a2, pf, folded));
    // fold the folded accumulator with a fresh proof (acc x acc case)
    Accumulator a3 = relax(st, random_mul_proof(rng, n));
    auto [folded2, pf2] = fold(st, folded, a3);
    CHECK(decide(st, folded2));
    CHECK(fold_verify(st, folded, a3, pf2, folded2));
    // pf element replaced by random -> replay rejects
    CorrectionTerms bad = pf2;
    bad.e_j[0][0] = bad.e_j[0][0].mul(pairing(G1::generator(), G2::generator()));
    CHECK(!fold_verify(st, folded, a3, bad, folded2));
}

TEST_CASE("step-2 expansion identity at random points") {
    TestRng rng(11);
    size_t n = 8;
    auto st = make_mul_structure(srs(), n);
    Accumulator a1 = relax(st, random_mul_proof(rng, n));
    Accumulator a2 = relax(st, random_mul_proof(rng, n));
    // also exercise folded (non-trivial mu/e) inputs
    auto [f1, pf1] = fold(st, a1, a2);
    Accumulator a3 = relax(st, random_mul_proof(rng, n));
    auto coeffs = expansion_coefficients(st, f1, a3);
    size_t d = (size_t)st.degree;
    // ends must equal stored errors
    for (size_t t = 0; t < st.num_tests(); ++t) {
        CHECK(coeffs[0][t] == a3.e[t]);
        CHECK(coeffs[d][t] == f1.e[t]);
    }
    for (Fr x : {Fr::from_u64(2), Fr::from_u64(3), Fr::from_u64(5)}) {
        // fold with gamma := x by hand
        Accumulator folded;
        folded.x.kind = st.kind;
        folded.mu = x.mul(f1.mu).add(a3.mu);
        folded.x.g1.resize(st.n_g1);
        for (size_t i = 0; i < st.n_g1; ++i)
            folded.x.g1[i] = f1.x.g1[i].scalar_mul(x).add(a3.x.g1[i]);
        folded.x.g2.resize(st.n_g2);
        for (size_t i = 0; i < st.n_g2; ++i)
            folded.x.g2[i] = f1.x.g2[i].scalar_mul(x).add(a3.x.g2[i]);
        for (size_t t = 0; t < st.num_tests(); ++t) {
            Gt lhs = eval_test(st, folded.x, folded.mu, t);
            Gt rhs = Gt::one();
            Fr xp = Fr::one();
            for (size_t k = 0; k <= d; ++k) {
                rhs = rhs.mul(coeffs[k][t].exp(xp));
                xp = xp.mul(x);
            }
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("fold tree shapes and schedules") {
    TestRng rng(12);
    auto st = make_linear_structure(BlockKind::Add);
    for (size_t n : {1u, 2u, 3u, 4u, 8u}) {
        std::vector<BlockProof> proofs;
        for (size_t i = 0; i < n; ++i) proofs.push_back(random_add_proof(rng));
        FoldTree tree = fold_tree(st, proofs);
        size_t expect_depth = 0;
        while (((size_t)1 << expect_depth) < n) ++expect_depth;
        CHECK(tree.depth == expect_depth);
        CHECK(decide(st, tree.root()));
        CHECK(fold_tree_verify(st, tree));
    }
    CHECK_THROWS_AS(fold_tree(st, {}), FoldError);

    // left-chain vs right-chain vs tree: all accepted by decide
    std::vector<BlockProof> proofs;
    for (int i = 0; i < 5; ++i) proofs.push_back(random_add_proof(rng));
    std::vector<Accumulator> accs;
    for (const auto& p : proofs) accs.push_back(relax(st, p));
    Accumulator left = accs[0];
    for (size_t i = 1; i < accs.size(); ++i) left = fold(st, left, accs[i]).first;
    Accumulator right = accs.back();
    for (size_t i = accs.size() - 1; i-- > 0;) right = fold(st, accs[i], right).first;
    Accumulator tree_root = fold_tree(st, proofs).root();
    CHECK(decide(st, left));
    CHECK(decide(st, right));
    CHECK(decide(st, tree_root));
    // the accumulators themselves differ; acceptance is the invariant
    CHECK(!(left.x.g1[0] == tree_root.x.g1[0]));

    // workers > 1 produce the identical tree
    std::vector<BlockProof> many;
    for (int i = 0; i < 16; ++i) many.push_back(random_add_proof(rng));
    FoldTree t1 = fold_tree(st, many, 1);
    FoldTree t4 = fold_tree(st, many, 4);
    CHECK(t1.depth == 4);
    REQUIRE(t1.nodes.size() == t4.nodes.size());
    CHECK(t1.root().mu == t4.root().mu);
    CHECK(t1.root().x.g1[0] == t4.root().x.g1[0]);
}

TEST_CASE("fold error paths") {
    TestRng rng(13);
    auto st_add = make_linear_structure(BlockKind::Add);
    auto st_eq = make_linear_structure(BlockKind::Eq);
    Accumulator a = relax(st_add, random_add_proof(rng));
    auto f = random_row(rng, 4);
    Accumulator b = relax(st_eq, prove_eq(f.com, f.com));
    CHECK_THROWS_AS(fold(st_add, a, b), FoldError);
}

TEST_CASE("mutation fuzz: verify_block and decide agree") {
    TestRng rng(14);
    size_t n = 8;
    auto st = make_mul_structure(srs(), n);
    for (int iter = 0; iter < 10; ++iter) {
        BlockProof pf = random_mul_proof(rng, n);
        // mutate one random slot
        BlockProof bad = pf;
        size_t which = rng.next() % (bad.x.g1.size() + bad.x.g2.size());
        if (which < bad.x.g1.size())
            bad.x.g1[which] = bad.x.g1[which].add(G1::generator());
        else
            bad.x.g2[which - bad.x.g1.size()] =
                bad.x.g2[which - bad.x.g1.size()].add(G2::generator());
        CHECK(verify_block(st, pf));
        CHECK(!verify_block(st, bad));
        CHECK(decide(st, relax(st, pf)) == verify_block(st, pf));
        CHECK(decide(st, relax(st, bad)) == verify_block(st, bad));
    }
}
