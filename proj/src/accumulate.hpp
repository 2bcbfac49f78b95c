#pragma once

#include "blocks.hpp"

namespace zkt {

// Relaxed instance. Identity commitment: the witness ([m_i], e) coincides with
// the instance ([C_i], E), so one object carries both sides.
struct Accumulator {
    BlockInstance x;
    Fr mu = Fr::one();
    std::vector<Gt> e;     // one error per test
    bool is_proof = false;  // b flag: mu=1 and e=identity when set

    void absorb_into(Transcript& t) const;
};

// pf: the d-1 committed cross-term vectors (identity commitment, so the
// vectors themselves), index j=1..d-1, each of length num_tests().
struct CorrectionTerms {
    std::vector<std::vector<Gt>> e_j;
};

// mu=1, e=0 embedding of a proof; non-foldable kinds are rejected.
Accumulator relax(const BlockStructure& st, const BlockProof& pf);

// Error-term expansion of the folded relaxed test: acc is the X-weighted side.
// Returns coefficients j=1..d-1 per test.
std::vector<std::vector<Gt>> cross_terms(const BlockStructure& st, const Accumulator& acc,
                                         const Accumulator& acc2);

// Full coefficient list j=0..d (0 must equal acc2.e, d must equal acc.e);
// used by the step-2 identity property test.
std::vector<std::vector<Gt>> expansion_coefficients(const BlockStructure& st,
                                                    const Accumulator& acc,
                                                    const Accumulator& acc2);

Fr fold_challenge(const BlockStructure& st, const Accumulator& acc, const Accumulator& acc2,
                  const CorrectionTerms& pf);

// Prover fold: RLC with gamma on (mu, pi, r, C) and error update.
std::pair<Accumulator, CorrectionTerms> fold(const BlockStructure& st, const Accumulator& acc,
                                             const Accumulator& acc2);

// Verifier replay of one fold; instance-only (identity commitment makes the
// witness redundant). No pairings.
bool fold_verify(const BlockStructure& st, const Accumulator& acc, const Accumulator& acc2,
                 const CorrectionTerms& pf, const Accumulator& result);

// Decider: the relaxed algebraic tests hold with slack mu and error e.
bool decide(const BlockStructure& st, const Accumulator& acc);

struct FoldNode {
    Accumulator left, right, result;
    CorrectionTerms pf;
};

struct FoldTree {
    std::vector<Accumulator> leaves;
    std::vector<FoldNode> nodes;  // level order, leaves first
    size_t depth = 0;
    Accumulator root() const;
};

// Balanced binary reduction, leaf 2i with 2i+1, odd node promoted unfolded.
FoldTree fold_tree(const BlockStructure& st, const std::vector<BlockProof>& proofs,
                   size_t workers = 1);

// Replays every node of the tree.
bool fold_tree_verify(const BlockStructure& st, const FoldTree& tree);

}  // namespace zkt
