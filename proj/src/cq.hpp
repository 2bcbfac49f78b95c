#pragma once

#include <map>

#include "accumulate.hpp"

namespace zkt {

// Preprocessed lookup table: Lagrange-basis commitments and cached quotient
// commitments over the table domain V. Preprocessing is O(N log N) group ops;
// proving is independent of N.
struct CqTable {
    size_t N = 0;
    EvaluationDomain V;
    std::vector<Fr> values;
    Poly t_poly;
    G2 t_dual;                    // [T(tau)]_2
    std::vector<G1> li;           // [L_i(tau)]_1
    std::vector<G1> li_shift;     // [(L_i(X) - L_i(0)) / X]_1
    std::vector<G1> qi;           // cached quotients [L_i (T - t_i) / Z_V]_1
    std::map<Limbs, size_t> index_of;
    std::array<uint8_t, 32> id{};

    bool contains(const Fr& v) const { return index_of.count(v.canonical()) != 0; }
};

CqTable cq_preprocess(const Srs& srs, const std::vector<Fr>& values);

// Input -> output map table for CQ2: two aligned columns over one domain.
struct CqPairTable {
    size_t N = 0;
    EvaluationDomain V;
    std::vector<Fr> in_values, out_values;
    Poly in_poly, out_poly;
    G2 in_dual, out_dual;
    std::vector<G1> li, li_shift;
    std::vector<G1> qi_in, qi_out;
    std::map<std::pair<Limbs, Limbs>, size_t> index_of;
    std::array<uint8_t, 32> id{};

    bool contains(const Fr& in, const Fr& out) const {
        return index_of.count({in.canonical(), out.canonical()}) != 0;
    }
};

CqPairTable cq2_preprocess(const Srs& srs, const std::vector<Fr>& ins,
                           const std::vector<Fr>& outs);

BlockStructure make_cq_structure(const Srs& srs, const CqTable& table, size_t n);
BlockStructure make_cq2_structure(const Srs& srs, const CqPairTable& table, size_t n);

// All evaluations of f on H_n lie in the table. bypass emits a proof doomed to
// fail verification instead of raising (negative-path tests).
BlockProof prove_cq(const Srs& srs, const CqTable& table, const CommittedPoly& f, size_t n,
                    bool bypass = false);

// Every (in, out) evaluation pair on H_n is a row of the pair table.
BlockProof prove_cq2(const Srs& srs, const CqPairTable& table, const CommittedPoly& f_in,
                     const CommittedPoly& f_out, size_t n, bool bypass = false);

// Fixed-matrix linear map: preprocessed per-row G2 duals serve as the
// verification key; folding stays available across instances of equal shape.
struct CqLinMatrix {
    size_t out_dim = 0, in_dim = 0;  // O rows, I columns (both powers of two)
    std::vector<std::vector<Fr>> rows;
    std::vector<Poly> row_polys;  // over H_I
    std::vector<G2> row_duals;    // [M_o(tau)]_2
    std::array<uint8_t, 32> id{};
};

CqLinMatrix cqlin_preprocess(const Srs& srs, const std::vector<std::vector<Fr>>& rows);

// Per (matrix, beta) prover/verifier cache: the beta-combined row polynomial.
struct CqLinCombined {
    Poly b_poly;
    G2 b_dual;
};
CqLinCombined cqlin_combine(const Srs& srs, const CqLinMatrix& m, const SharedRandomness& rand);
G2 cqlin_expected_bdual(const CqLinMatrix& m, const SharedRandomness& rand);

BlockStructure make_cqlin_structure(const Srs& srs, size_t in_dim, size_t out_dim);

// y_rows = x_rows * M^T. x rows over H_I, y rows over H_O.
BlockProof prove_cqlin(const Srs& srs, const CqLinMatrix& m, const CqLinCombined& comb,
                       const SharedRandomness& rand, const std::vector<CommittedPoly>& x_rows,
                       const std::vector<CommittedPoly>& y_rows);

// group-valued radix-2 FFT (scalar twiddles), used by table preprocessing
void fft_group(std::vector<G1>& a, const EvaluationDomain& d, bool invert);

}  // namespace zkt
