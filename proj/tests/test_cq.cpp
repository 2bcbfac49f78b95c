#include "cq.hpp"
#include "doctest.h"
#include "test_rng.hpp"

using namespace zkt;

namespace {

const Srs& srs() {
    static Srs s = Srs::setup_str("cq-test", 80);
    return s;
}

CommittedPoly commit_evals(const std::vector<Fr>& evals) {
    auto d = EvaluationDomain::radix2(evals.size());
    return commit_poly(srs(), interpolate(evals, d));
}

std::vector<Fr> range_table(long lo, long hi) {  // [lo, hi)
    std::vector<Fr> out;
    for (long v = lo; v < hi; ++v) out.push_back(Fr::from_i64(v));
    return out;
}

}  // namespace

TEST_CASE("group fft matches naive dft") {
    TestRng rng(1);
    auto d = EvaluationDomain::radix2(8);
    std::vector<G1> pts;
    std::vector<Fr> scalars;
    for (int i = 0; i < 8; ++i) {
        scalars.push_back(rng.fr());
        pts.push_back(G1::generator().scalar_mul(scalars.back()));
    }
    auto copy = pts;
    fft_group(copy, d, false);
    auto els = d.elements();
    for (size_t i = 0; i < 8; ++i) {
        // naive: sum_j pts[j] * omega^{ij}
        G1 acc = G1::identity();
        for (size_t j = 0; j < 8; ++j) acc = acc.add(pts[j].scalar_mul(els[i].pow_u64(j)));
        CHECK(copy[i] == acc);
    }
    fft_group(copy, d, true);
    for (size_t i = 0; i < 8; ++i) CHECK(copy[i] == pts[i]);
}

TEST_CASE("cq preprocessing identities") {
    auto table = cq_preprocess(srs(), range_table(0, 8));
    REQUIRE(srs().test_trapdoor.has_value());
    Fr tau = *srs().test_trapdoor;
    auto els = table.V.elements();
    for (size_t i = 0; i < table.N; ++i) {
        // Lagrange commitment equals direct evaluation at the trapdoor
        Poly li = interpolate([&] {
            std::vector<Fr> e(table.N, Fr::zero());
            e[i] = Fr::one();
            return e;
        }(), table.V);
        CHECK(table.li[i] == G1::generator().scalar_mul(li.eval(tau)));
        // shifted Lagrange
        Fr li0 = li.coeff(0);
        Poly shifted{std::vector<Fr>(li.c.begin() + 1, li.c.end())};
        CHECK(table.li_shift[i] == G1::generator().scalar_mul(shifted.eval(tau)));
        // cached quotient: L_i (T - t_i) / Z_V
        Poly num = li.mul(table.t_poly.sub(Poly::constant(table.values[i])));
        Poly qi = quotient_by_vanishing(num, table.V);
        CHECK(table.qi[i] == G1::generator().scalar_mul(qi.eval(tau)));
        (void)li0;
    }
}

TEST_CASE("cq accepts contained vectors") {
    auto table = cq_preprocess(srs(), range_table(0, 8));
    auto st = make_cq_structure(srs(), table, 4);
    // [1,3,5] padded with an in-table value
    std::vector<Fr> v{Fr::from_u64(1), Fr::from_u64(3), Fr::from_u64(5), Fr::from_u64(0)};
    auto f = commit_evals(v);
    BlockProof pf = prove_cq(srs(), table, f, 4);
    CHECK(verify_block(st, pf));
    // decide(relax(.)) agrees
    CHECK(decide(st, relax(st, pf)));
}

TEST_CASE("cq rejects out-of-table element") {
    auto table = cq_preprocess(srs(), range_table(0, 8));
    auto st = make_cq_structure(srs(), table, 4);
    std::vector<Fr> v{Fr::from_u64(1), Fr::from_u64(3), Fr::from_u64(9), Fr::from_u64(5)};
    auto f = commit_evals(v);
    CHECK_THROWS_AS(prove_cq(srs(), table, f, 4), WitnessError);
    BlockProof pf = prove_cq(srs(), table, f, 4, /*bypass=*/true);
    CHECK(!verify_block(st, pf));
}

TEST_CASE("cq negative fuzz") {
    auto table = cq_preprocess(srs(), range_table(0, 16));
    auto st = make_cq_structure(srs(), table, 4);
    TestRng rng(2);
    int false_accepts = 0;
    for (int iter = 0; iter < 25; ++iter) {
        std::vector<Fr> v;
        for (int j = 0; j < 4; ++j) v.push_back(Fr::from_u64(rng.next() % 16));
        v[rng.next() % 4] = Fr::from_u64(16 + rng.next() % 100);  // one element outside
        auto f = commit_evals(v);
        BlockProof pf = prove_cq(srs(), table, f, 4, true);
        if (verify_block(st, pf)) ++false_accepts;
    }
    CHECK(false_accepts == 0);
}

TEST_CASE("cq folding") {
    auto table = cq_preprocess(srs(), range_table(0, 8));
    auto st = make_cq_structure(srs(), table, 4);
    TestRng rng(3);
    std::vector<BlockProof> proofs;
    for (int i = 0; i < 4; ++i) {
        std::vector<Fr> v;
        for (int j = 0; j < 4; ++j) v.push_back(Fr::from_u64(rng.next() % 8));
        proofs.push_back(prove_cq(srs(), table, commit_evals(v), 4));
    }
    FoldTree tree = fold_tree(st, proofs);
    CHECK(tree.depth == 2);
    CHECK(decide(st, tree.root()));
    CHECK(fold_tree_verify(st, tree));
    // challenge tampering on a leaf is caught by replay
    FoldTree bad = tree;
    bad.leaves[0].x.challenges[0] = bad.leaves[0].x.challenges[0].add(Fr::one());
    CHECK(!fold_tree_verify(st, bad));
}

TEST_CASE("cq2 relu table") {
    // ReLU over [-8, 8)
    std::vector<Fr> ins = range_table(-8, 8);
    std::vector<Fr> outs;
    for (long v = -8; v < 8; ++v) outs.push_back(Fr::from_i64(v > 0 ? v : 0));
    auto table = cq2_preprocess(srs(), ins, outs);
    auto st = make_cq2_structure(srs(), table, 4);

    std::vector<Fr> xin{Fr::from_i64(-2), Fr::from_i64(0), Fr::from_i64(3), Fr::from_i64(0)};
    std::vector<Fr> xout{Fr::from_i64(0), Fr::from_i64(0), Fr::from_i64(3), Fr::from_i64(0)};
    auto fin = commit_evals(xin), fout = commit_evals(xout);
    BlockProof pf = prove_cq2(srs(), table, fin, fout, 4);
    CHECK(verify_block(st, pf));
    CHECK(decide(st, relax(st, pf)));

    // wrong output pair rejects
    std::vector<Fr> bad{Fr::from_i64(1), Fr::from_i64(0), Fr::from_i64(3), Fr::from_i64(0)};
    auto fbad = commit_evals(bad);
    CHECK_THROWS_AS(prove_cq2(srs(), table, fin, fbad, 4), WitnessError);
    CHECK(!verify_block(st, prove_cq2(srs(), table, fin, fbad, 4, true)));
}

TEST_CASE("cq2 folding") {
    std::vector<Fr> ins = range_table(0, 8);
    std::vector<Fr> outs;
    for (long v = 0; v < 8; ++v) outs.push_back(Fr::from_i64(v * v));
    auto table = cq2_preprocess(srs(), ins, outs);
    auto st = make_cq2_structure(srs(), table, 4);
    TestRng rng(4);
    std::vector<BlockProof> proofs;
    for (int i = 0; i < 3; ++i) {
        std::vector<Fr> xin, xout;
        for (int j = 0; j < 4; ++j) {
            u64 v = rng.next() % 8;
            xin.push_back(Fr::from_u64(v));
            xout.push_back(Fr::from_u64(v * v));
        }
        proofs.push_back(prove_cq2(srs(), table, commit_evals(xin), commit_evals(xout), 4));
    }
    FoldTree tree = fold_tree(st, proofs);
    CHECK(decide(st, tree.root()));
    CHECK(fold_tree_verify(st, tree));
}

TEST_CASE("cqlin matches naive fixed-matrix product") {
    TestRng rng(5);
    size_t I = 4, O = 4;
    std::vector<std::vector<Fr>> mrows(O, std::vector<Fr>(I));
    for (auto& r : mrows)
        for (auto& v : r) v = Fr::from_u64(rng.next() % 7);
    auto M = cqlin_preprocess(srs(), mrows);
    SharedRandomness rand{rng.fr(), rng.fr()};
    auto comb = cqlin_combine(srs(), M, rand);
    CHECK(comb.b_dual == cqlin_expected_bdual(M, rand));
    auto st = make_cqlin_structure(srs(), I, O);

    // 3 input rows
    std::vector<std::vector<Fr>> x(3, std::vector<Fr>(I));
    for (auto& r : x)
        for (auto& v : r) v = rng.fr();
    std::vector<CommittedPoly> xr, yr;
    for (const auto& r : x) {
        xr.push_back(commit_evals(r));
        std::vector<Fr> y(O, Fr::zero());
        for (size_t o = 0; o < O; ++o)
            for (size_t j = 0; j < I; ++j) y[o] = y[o].add(r[j].mul(mrows[o][j]));
        yr.push_back(commit_evals(y));
    }
    BlockProof pf = prove_cqlin(srs(), M, comb, rand, xr, yr);
    CHECK(verify_block(st, pf));

    // wrong output rejects (w.h.p. over alpha/beta)
    auto ybad = yr;
    std::vector<Fr> wrong(O, Fr::one());
    ybad[1] = commit_evals(wrong);
    CHECK(!verify_block(st, prove_cqlin(srs(), M, comb, rand, xr, ybad)));

    // folding across two different matrices of the same shape
    std::vector<std::vector<Fr>> m2rows(O, std::vector<Fr>(I));
    for (auto& r : m2rows)
        for (auto& v : r) v = Fr::from_u64(rng.next() % 5);
    auto M2 = cqlin_preprocess(srs(), m2rows);
    auto comb2 = cqlin_combine(srs(), M2, rand);
    std::vector<CommittedPoly> yr2;
    for (const auto& r : x) {
        std::vector<Fr> y(O, Fr::zero());
        for (size_t o = 0; o < O; ++o)
            for (size_t j = 0; j < I; ++j) y[o] = y[o].add(r[j].mul(m2rows[o][j]));
        yr2.push_back(commit_evals(y));
    }
    BlockProof pf2 = prove_cqlin(srs(), M2, comb2, rand, xr, yr2);
    CHECK(verify_block(st, pf2));
    auto [folded, cpf] = fold(st, relax(st, pf), relax(st, pf2));
    CHECK(decide(st, folded));
    CHECK(fold_verify(st, relax(st, pf), relax(st, pf2), cpf, folded));
}
