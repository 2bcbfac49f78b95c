#pragma once

#include "cq.hpp"

namespace zkt {

// Expression tree for the constraint R(f_1(x)..f_N(x), f_1(wx)..f_N(wx)).
// Variable i in [0,N) is f_i(x); variable N+i is f_i(wx).
struct IopExpr {
    enum Op : uint8_t { VAR, CONST, ADD, SUB, MUL } op = CONST;
    int var = 0;
    Fr k = Fr::zero();
    int lhs = -1, rhs = -1;
};

struct IopCircuit {
    size_t arity = 0;  // N
    size_t n = 0;      // domain size
    std::vector<IopExpr> nodes;
    int root = -1;

    int add_node(IopExpr e) {
        nodes.push_back(e);
        return (int)nodes.size() - 1;
    }
    int var(size_t i) { return add_node({IopExpr::VAR, (int)i, Fr::zero(), -1, -1}); }
    int shifted(size_t i) { return add_node({IopExpr::VAR, (int)(arity + i), Fr::zero(), -1, -1}); }
    int constant(const Fr& c) { return add_node({IopExpr::CONST, 0, c, -1, -1}); }
    int add(int a, int b) { return add_node({IopExpr::ADD, 0, Fr::zero(), a, b}); }
    int sub(int a, int b) { return add_node({IopExpr::SUB, 0, Fr::zero(), a, b}); }
    int mul(int a, int b) { return add_node({IopExpr::MUL, 0, Fr::zero(), a, b}); }

    Fr eval(std::span<const Fr> vals) const;  // vals has 2*arity entries
    size_t total_degree() const;
    std::array<uint8_t, 32> digest() const;
};

struct IopProof {
    std::vector<G1> f_coms;
    G1 q_com;
    std::vector<Fr> f_at_z, f_at_wz;
    Fr q_at_z;
    G1 h1, h2;
};

enum class IopVerdict { Accept, Step4Reject, OpeningReject, Malformed };

// Deterministic blinder stream (seeded per proof by the caller).
struct BlinderSource {
    u64 state;
    explicit BlinderSource(u64 seed = 0x5eedb11d) : state(seed) {}
    Fr next();
    // witness polynomial blinding g + Z_H * b with deg(b) = blind_degree
    Poly blind(const Poly& g, size_t n, size_t blind_degree = 3);
};

// Witness polynomials are supplied already blinded and committed; the proof
// references their commitments verbatim.
IopProof iop_prove(const Srs& srs, const IopCircuit& c, const std::vector<CommittedPoly>& fs);
IopVerdict iop_verify(const Srs& srs, const IopCircuit& c, const std::vector<G1>& f_coms,
                      const IopProof& pf);

// selector polynomial: 1 at omega^i, 0 elsewhere on H_n
Poly selector_poly(size_t i, size_t n);

IopCircuit boolean_circuit(size_t n);
IopProof boolean_check(const Srs& srs, const CommittedPoly& f, size_t n);
IopVerdict verify_boolean(const Srs& srs, const G1& f_com, size_t n, const IopProof& pf);

// One-to-one (multiset equality) via a grand product; gamma is drawn from the
// transcript after both commitments are absorbed.
struct OneToOneProof {
    G1 z_com;
    IopProof one_check;
    IopProof recurrence;
};
OneToOneProof one_to_one_prove(const Srs& srs, const CommittedPoly& f, const CommittedPoly& g,
                               size_t n, BlinderSource& blinders);
bool one_to_one_verify(const Srs& srs, const G1& f_com, const G1& g_com, size_t n,
                       const OneToOneProof& pf, std::string* why = nullptr);

// OrderedCheck: g is f sorted (descending or ascending); one-to-one +
// masked-difference IOP + CQ range check on the differences.
struct OrderedProof {
    OneToOneProof one_to_one;
    G1 d_com;
    IopProof sub_check;
    BlockProof range;  // CQ proof for d against the direction table
};
OrderedProof ordered_prove(const Srs& srs, const CqTable& dir_table, const CommittedPoly& f,
                           const CommittedPoly& g, size_t n, BlinderSource& blinders,
                           bool bypass = false);
bool ordered_verify(const Srs& srs, const CqTable& dir_table, const G1& f_com, const G1& g_com,
                    size_t n, const OrderedProof& pf, std::string* why = nullptr);

// MaxProof: g(omega^0) is the maximum of f's evaluations.
struct MaxProofBundle {
    G1 sorted_com;  // f' (descending)
    OrderedProof ordered;
    IopProof ith_zero;  // L_0(x) * (f'(x) - g(x)) = 0
};
MaxProofBundle max_prove(const Srs& srs, const CqTable& nonneg_desc_table, const CommittedPoly& f,
                         const CommittedPoly& g, size_t n, BlinderSource& blinders,
                         bool bypass = false);
bool max_verify(const Srs& srs, const CqTable& nonneg_desc_table, const G1& f_com,
                const G1& g_com, size_t n, const MaxProofBundle& pf, std::string* why = nullptr);

// Extended copy constraints with pads (public wiring sigma).
struct CopyMap {
    size_t p1 = 1, p2 = 1;  // input / output column counts
    size_t m = 0, n = 0;    // input / output evals per column
    // sigma[output flat index over p2*n] = input flat index over p1*m, or
    // pad_base + pad index
    std::vector<size_t> sigma;
    std::vector<Fr> pad_values;  // indexed by pad index
    static constexpr size_t PAD_BASE = ~(size_t)0 >> 1;
};

struct CopyProof {
    std::vector<G1> in_cc_coms;   // interleaved re-encodings over H_N
    std::vector<G1> out_cc_coms;
    std::vector<G1> link_quotients;  // subdomain agreement with the originals
    G1 z_com;
    IopProof one_check;
    IopProof perm_check;
    std::vector<IopProof> pad_checks;
};
CopyProof copy_constraint_prove(const Srs& srs, const CopyMap& map,
                                const std::vector<CommittedPoly>& inputs,
                                const std::vector<CommittedPoly>& outputs,
                                BlinderSource& blinders);
bool copy_constraint_verify(const Srs& srs, const CopyMap& map, const std::vector<G1>& in_coms,
                            const std::vector<G1>& out_coms, const CopyProof& pf,
                            std::string* why = nullptr);

// Batched Div/Mod: a = q*b + r with 0 <= r < b, proved with Mul + Add + two CQ
// range components (the composite itself is not foldable; the CQ parts are).
struct DivModProof {
    G1 prod_com;        // q*b interpolated product
    BlockProof mul;     // q * b = prod
    BlockProof add;     // prod + r = a
    BlockProof cq_r;    // r in [0, 2^k)
    BlockProof cq_br;   // b - 1 - r in [0, 2^k)
};
DivModProof div_mod_prove(const Srs& srs, const CqTable& range_table, const CommittedPoly& a,
                          const CommittedPoly& b, const CommittedPoly& q, const CommittedPoly& r,
                          size_t n, bool bypass = false);
bool div_mod_verify(const Srs& srs, const CqTable& range_table, const G1& a_com, const G1& b_com,
                    const G1& q_com, const G1& r_com, size_t n, const DivModProof& pf,
                    std::string* why = nullptr);

}  // namespace zkt
