#pragma once

#include <string>
#include <unordered_map>

#include "kzg.hpp"
#include "transcript.hpp"

namespace zkt {

enum class BlockKind : uint8_t {
    Add,
    Sub,
    Eq,
    Concat,
    Mul,
    MulConst,
    MulScalar,
    Sum,
    MatMul,
    Permute,
    Cq,
    Cq2,
    CqLin,
    Div,
    Mod,
    BooleanCheck,
    MaxProof,
    CopyConstraint,
    OneToOne,
    Ordered,
};

constexpr int BLOCK_KIND_COUNT = 20;
const char* kind_name(BlockKind k);
bool is_foldable(BlockKind k);

// Verifier randomness shared across every MatMul/Permute/CQLin instance of a
// model proof; derived after all witness commitments are absorbed.
struct SharedRandomness {
    Fr alpha = Fr::from_u64(3);
    Fr beta = Fr::from_u64(5);
};

// Public side of a block proof / accumulator. Identity commitment scheme:
// witness slots coincide with these.
struct BlockInstance {
    BlockKind kind = BlockKind::Add;
    std::vector<Fr> pi;          // public scalar inputs
    std::vector<Fr> challenges;  // transcript-derived r_i
    std::vector<G1> g1;          // commitment slots in G1
    std::vector<G2> g2;          // commitment slots in G2

    void absorb_into(Transcript& t) const;
};

struct BlockProof {
    BlockInstance x;
};

// One side of a pairing term: instance slot or structure constant.
struct TermRef {
    enum Where : uint8_t { SLOT, CONST } where = CONST;
    int idx = 0;
    static TermRef slot(int i) { return {SLOT, i}; }
    static TermRef cnst(int i) { return {CONST, i}; }
};

// sign * coeff * pi[pi_idx]? * chal[chal_idx]? * mu^mu_pow * e(a, b)
struct RelaxedTerm {
    bool neg = false;
    int coeff = -1;   // index into consts, -1 for 1
    int pi = -1;      // index into instance pi
    int chal = -1;    // index into instance challenges
    int mu_pow = 0;
    TermRef a;  // G1 side
    TermRef b;  // G2 side
};

struct RelaxedTest {
    std::vector<RelaxedTerm> terms;
};

// Challenge schedule step: absorb the declared instance prefix, then draw.
struct ChallengeStep {
    size_t g1_prefix = 0;
    size_t g2_prefix = 0;
    size_t pi_prefix = 0;
    const char* label = "r";
};

// Structural description of one fold group: the relaxed algebraic tests, the
// constants they reference, and the transcript schedule. All instances folded
// together share one structure.
struct BlockStructure {
    BlockKind kind = BlockKind::Add;
    std::string key;  // fold-group identity (kind + parameters)
    int degree = 1;   // homogenization degree d
    std::vector<RelaxedTest> tests;
    std::vector<Fr> consts;
    std::vector<G1> const_g1;
    std::vector<G2> const_g2;
    size_t n_g1 = 0, n_g2 = 0, n_pi = 0, n_chal = 0;
    std::vector<ChallengeStep> schedule;

    size_t num_tests() const { return tests.size(); }
    std::array<uint8_t, 32> digest() const;
    void check_homogeneous() const;  // every term degree == degree
};

// --- structure builders -----------------------------------------------------

BlockStructure make_linear_structure(BlockKind kind, size_t rows = 1);  // Add/Sub/Eq/Concat
BlockStructure make_mulconst_structure(const Fr& c);
BlockStructure make_mulscalar_structure();
BlockStructure make_mul_structure(const Srs& srs, size_t n);
BlockStructure make_sum_structure(const Srs& srs, size_t n);
BlockStructure make_matmul_structure(const Srs& srs, size_t l, size_t m, size_t n);
// B is the claimed rearrangement of A: B[r][c] = flat(A)[p0[r] + p1[c]]
BlockStructure make_permute_structure(const Srs& srs, size_t m, size_t n, size_t m2, size_t n2);

// --- instance evaluation ----------------------------------------------------

// Slot-count / shape validation; FormatError on mismatch.
void check_format(const BlockStructure& st, const BlockInstance& x);

// Evaluate test #idx at the given slack; identity element means "holds".
Gt eval_test(const BlockStructure& st, const BlockInstance& x, const Fr& mu, size_t idx);

// Original verifier: all tests hold exactly at mu=1.
bool verify_block(const BlockStructure& st, const BlockProof& proof);

// Re-derive the transcript challenges for an instance (fresh leaf derivation).
std::vector<Fr> derive_challenges(const BlockStructure& st, const BlockInstance& x);

// --- provers for the pairing-equation blocks ---------------------------------

struct CommittedPoly {
    Poly poly;
    G1 com;
};

CommittedPoly commit_poly(const Srs& srs, Poly p);

// Linear blocks. No prover-side precheck: a violated relation yields a proof
// the verifier rejects.
BlockProof prove_linear(BlockKind kind, const std::vector<G1>& lhs, const std::vector<G1>& rhs);
BlockProof prove_add(const G1& f, const G1& g, const G1& h);
BlockProof prove_sub(const G1& f, const G1& g, const G1& h);
BlockProof prove_eq(const G1& f, const G1& g);
BlockProof prove_concat(const std::vector<G1>& fs, const std::vector<G1>& gs);

BlockProof prove_mulconst(const G1& f, const G1& g);

BlockProof prove_mulscalar(const Srs& srs, const G1& f, const G1& g, const Fr& scalar);

// g|_H = f|_H * h|_H. Throws WitnessError when the relation fails on H,
// unless bypass is set (test-only dishonest proofs).
BlockProof prove_mul(const Srs& srs, size_t n, const CommittedPoly& f, const CommittedPoly& h,
                     const CommittedPoly& g, bool bypass = false);

// total = sum of f over H; g commitment is [total]_1.
BlockProof prove_sum(const Srs& srs, size_t n, const CommittedPoly& f, const Fr& total);

// rows as committed polynomials over H_n; C = A B^T with C rows over H_m
// (m = number of B rows, a power of two).
BlockProof prove_matmul(const Srs& srs, const SharedRandomness& rand,
                        const std::vector<CommittedPoly>& a_rows,
                        const std::vector<CommittedPoly>& b_rows,
                        const std::vector<CommittedPoly>& c_rows, size_t n);

// A rows over H_n, B rows over H_{n2}; flat labels r*n+c on the A grid.
BlockProof prove_permute(const Srs& srs, const SharedRandomness& rand,
                         const std::vector<CommittedPoly>& a_rows,
                         const std::vector<CommittedPoly>& b_rows,
                         const std::vector<size_t>& p0, const std::vector<size_t>& p1, size_t n);

// Verifier-side derived slots for MatMul/Permute leaves: the alpha/beta row
// combinations every verifier recomputes from the DAG edge commitments.
G1 combine_rows(const std::vector<G1>& rows, const Fr& base);
std::vector<Fr> power_vector(const Fr& base, size_t count);
// D(X) interpolating the beta powers for MatMul (domain size m).
Poly matmul_d_poly(const SharedRandomness& rand, size_t m);
// C/D weight polynomials for Permute.
Poly permute_c_poly(const SharedRandomness& rand, size_t n);
Poly permute_d_poly(const SharedRandomness& rand, const std::vector<size_t>& p1, size_t n2);
// Permute row-combination weights: alpha^(n*r) for A rows, alpha^(p0[r]) for B rows.
std::vector<Fr> permute_a_row_weights(const SharedRandomness& rand, size_t m, size_t n);
std::vector<Fr> permute_b_row_weights(const SharedRandomness& rand, const std::vector<size_t>& p0);

}  // namespace zkt
