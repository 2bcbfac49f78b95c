#include "accumulate.hpp"

#include <atomic>
#include <thread>

#include "serial.hpp"

namespace zkt {

void Accumulator::absorb_into(Transcript& t) const {
    x.absorb_into(t);
    t.absorb_fr("mu", mu);
    t.absorb_u64("b", is_proof ? 1 : 0);
    t.absorb_u64("ne", e.size());
    ByteWriter w;
    for (const auto& g : e) w.gt(g);
    t.absorb_bytes("e", w.buf.data(), w.buf.size());
}

Accumulator relax(const BlockStructure& st, const BlockProof& pf) {
    if (!is_foldable(st.kind)) throw UnsupportedFoldError("block kind is not foldable");
    check_format(st, pf.x);
    Accumulator acc;
    acc.x = pf.x;
    acc.mu = Fr::one();
    acc.e.assign(st.num_tests(), Gt::one());
    acc.is_proof = true;
    return acc;
}

namespace {

// (hi*X + lo) binomial factors multiplied into a coefficient vector
void mul_binomial(std::vector<Fr>& coeffs, const Fr& hi, const Fr& lo) {
    std::vector<Fr> out(coeffs.size() + 1, Fr::zero());
    for (size_t i = 0; i < coeffs.size(); ++i) {
        out[i] = out[i].add(coeffs[i].mul(lo));
        out[i + 1] = out[i + 1].add(coeffs[i].mul(hi));
    }
    coeffs = std::move(out);
}

struct PairList {
    std::vector<G1> ps;
    std::vector<G2> qs;
    void push(const G1& p, const G2& q, const Fr& s) {
        if (s.is_zero()) return;
        ps.push_back(s == Fr::one() ? p : p.scalar_mul(s));
        qs.push_back(q);
    }
};

}  // namespace

std::vector<std::vector<Gt>> expansion_coefficients(const BlockStructure& st,
                                                    const Accumulator& acc,
                                                    const Accumulator& acc2) {
    size_t d = (size_t)st.degree;
    std::vector<std::vector<Gt>> out(d + 1, std::vector<Gt>(st.num_tests(), Gt::one()));
    // per coefficient k and test: one multi-pairing
    for (size_t ti = 0; ti < st.tests.size(); ++ti) {
        std::vector<PairList> per_k(d + 1);
        for (const auto& t : st.tests[ti].terms) {
            // scalar polynomial in X from the binomial factors
            std::vector<Fr> s{t.coeff >= 0 ? st.consts[(size_t)t.coeff] : Fr::one()};
            if (t.neg) s[0] = s[0].neg();
            for (int i = 0; i < t.mu_pow; ++i) mul_binomial(s, acc.mu, acc2.mu);
            if (t.pi >= 0) mul_binomial(s, acc.x.pi[(size_t)t.pi], acc2.x.pi[(size_t)t.pi]);
            if (t.chal >= 0)
                mul_binomial(s, acc.x.challenges[(size_t)t.chal],
                             acc2.x.challenges[(size_t)t.chal]);
            // pairing factor: powers of X with point pairs
            struct PP {
                size_t pow;
                const G1* p;
                const G2* q;
            };
            std::vector<PP> pps;
            bool aslot = t.a.where == TermRef::SLOT, bslot = t.b.where == TermRef::SLOT;
            const G1& a1 = aslot ? acc.x.g1[(size_t)t.a.idx] : st.const_g1[(size_t)t.a.idx];
            const G1& a2 = aslot ? acc2.x.g1[(size_t)t.a.idx] : st.const_g1[(size_t)t.a.idx];
            const G2& b1 = bslot ? acc.x.g2[(size_t)t.b.idx] : st.const_g2[(size_t)t.b.idx];
            const G2& b2 = bslot ? acc2.x.g2[(size_t)t.b.idx] : st.const_g2[(size_t)t.b.idx];
            if (aslot && bslot) {
                pps = {{2, &a1, &b1}, {1, &a1, &b2}, {1, &a2, &b1}, {0, &a2, &b2}};
            } else if (aslot) {
                pps = {{1, &a1, &b1}, {0, &a2, &b1}};
            } else if (bslot) {
                pps = {{1, &a1, &b1}, {0, &a1, &b2}};
            } else {
                pps = {{0, &a1, &b1}};
            }
            for (const auto& pp : pps) {
                for (size_t j = 0; j < s.size(); ++j) {
                    size_t k = pp.pow + j;
                    per_k[k].push(*pp.p, *pp.q, s[j]);
                }
            }
        }
        for (size_t k = 0; k <= d; ++k) out[k][ti] = multi_pairing(per_k[k].ps, per_k[k].qs);
    }
    return out;
}

std::vector<std::vector<Gt>> cross_terms(const BlockStructure& st, const Accumulator& acc,
                                         const Accumulator& acc2) {
    size_t d = (size_t)st.degree;
    if (d <= 1) return {};
    // only the middle coefficients j = 1..d-1 are needed: the ends are the
    // stored errors of the two inputs
    auto all = expansion_coefficients(st, acc, acc2);
    std::vector<std::vector<Gt>> mid;
    for (size_t j = 1; j < d; ++j) mid.push_back(std::move(all[j]));
    return mid;
}

Fr fold_challenge(const BlockStructure& st, const Accumulator& acc, const Accumulator& acc2,
                  const CorrectionTerms& pf) {
    Transcript t = acc_transcript();
    auto dgst = st.digest();
    t.absorb_bytes("structure", dgst.data(), dgst.size());
    acc.absorb_into(t);
    acc2.absorb_into(t);
    ByteWriter w;
    for (const auto& vec : pf.e_j)
        for (const auto& g : vec) w.gt(g);
    t.absorb_bytes("pf", w.buf.data(), w.buf.size());
    return t.challenge("gamma");
}

namespace {

// step 1: challenge re-derivation applies only to b=1 instances
bool challenges_consistent(const BlockStructure& st, const Accumulator& acc) {
    if (!acc.is_proof || st.n_chal == 0) return true;
    auto expect = derive_challenges(st, acc.x);
    for (size_t i = 0; i < expect.size(); ++i)
        if (!(expect[i] == acc.x.challenges[i])) return false;
    return true;
}

BlockInstance rlc_instance(const BlockInstance& a, const BlockInstance& b, const Fr& gamma) {
    BlockInstance out;
    out.kind = a.kind;
    out.pi.resize(a.pi.size());
    for (size_t i = 0; i < a.pi.size(); ++i) out.pi[i] = gamma.mul(a.pi[i]).add(b.pi[i]);
    out.challenges.resize(a.challenges.size());
    for (size_t i = 0; i < a.challenges.size(); ++i)
        out.challenges[i] = gamma.mul(a.challenges[i]).add(b.challenges[i]);
    out.g1.resize(a.g1.size());
    for (size_t i = 0; i < a.g1.size(); ++i) out.g1[i] = a.g1[i].scalar_mul(gamma).add(b.g1[i]);
    out.g2.resize(a.g2.size());
    for (size_t i = 0; i < a.g2.size(); ++i) out.g2[i] = a.g2[i].scalar_mul(gamma).add(b.g2[i]);
    return out;
}

std::vector<Gt> combine_errors(const std::vector<Gt>& e_hi, const std::vector<Gt>& e_lo,
                               const std::vector<std::vector<Gt>>& cross, const Fr& gamma,
                               size_t d) {
    size_t nt = e_hi.size();
    std::vector<Gt> out(nt);
    // e'' = e_lo + sum_j gamma^j cross_j + gamma^d e_hi  (additive notation)
    Fr g = gamma;
    std::vector<Fr> gpow(d + 1, Fr::one());
    for (size_t j = 1; j <= d; ++j) gpow[j] = gpow[j - 1].mul(gamma);
    (void)g;
    for (size_t i = 0; i < nt; ++i) {
        Gt acc = e_lo[i];
        for (size_t j = 1; j < d; ++j) acc = acc.mul(cross[j - 1][i].exp(gpow[j]));
        acc = acc.mul(e_hi[i].exp(gpow[d]));
        out[i] = acc;
    }
    return out;
}

}  // namespace

std::pair<Accumulator, CorrectionTerms> fold(const BlockStructure& st, const Accumulator& acc,
                                             const Accumulator& acc2) {
    if (acc.x.kind != acc2.x.kind) throw FoldError("fold across different block kinds");
    if (!is_foldable(st.kind)) throw UnsupportedFoldError("block kind is not foldable");
    check_format(st, acc.x);
    check_format(st, acc2.x);
    if (!challenges_consistent(st, acc) || !challenges_consistent(st, acc2))
        throw FoldError("challenge re-derivation failed on a proof input");

    CorrectionTerms pf{cross_terms(st, acc, acc2)};
    Fr gamma = fold_challenge(st, acc, acc2, pf);

    Accumulator out;
    out.x = rlc_instance(acc.x, acc2.x, gamma);
    out.mu = gamma.mul(acc.mu).add(acc2.mu);
    out.e = combine_errors(acc.e, acc2.e, pf.e_j, gamma, (size_t)st.degree);
    out.is_proof = false;
    return {out, pf};
}

bool fold_verify(const BlockStructure& st, const Accumulator& acc, const Accumulator& acc2,
                 const CorrectionTerms& pf, const Accumulator& result) {
    if (acc.x.kind != st.kind || acc2.x.kind != st.kind) return false;
    try {
        check_format(st, acc.x);
        check_format(st, acc2.x);
        check_format(st, result.x);
    } catch (const FormatError&) {
        return false;
    }
    if (pf.e_j.size() + 1 != (size_t)st.degree) return false;
    for (const auto& v : pf.e_j)
        if (v.size() != st.num_tests()) return false;
    if (!challenges_consistent(st, acc) || !challenges_consistent(st, acc2)) return false;
    if (result.is_proof) return false;

    Fr gamma = fold_challenge(st, acc, acc2, pf);
    BlockInstance expect = rlc_instance(acc.x, acc2.x, gamma);
    if (!(result.mu == gamma.mul(acc.mu).add(acc2.mu))) return false;
    for (size_t i = 0; i < expect.pi.size(); ++i)
        if (!(expect.pi[i] == result.x.pi[i])) return false;
    for (size_t i = 0; i < expect.challenges.size(); ++i)
        if (!(expect.challenges[i] == result.x.challenges[i])) return false;
    for (size_t i = 0; i < expect.g1.size(); ++i)
        if (expect.g1[i] != result.x.g1[i]) return false;
    for (size_t i = 0; i < expect.g2.size(); ++i)
        if (expect.g2[i] != result.x.g2[i]) return false;
    auto e_expect = combine_errors(acc.e, acc2.e, pf.e_j, gamma, (size_t)st.degree);
    if (result.e.size() != e_expect.size()) return false;
    for (size_t i = 0; i < e_expect.size(); ++i)
        if (!(e_expect[i] == result.e[i])) return false;
    return true;
}

bool decide(const BlockStructure& st, const Accumulator& acc) {
    try {
        check_format(st, acc.x);
    } catch (const FormatError&) {
        return false;
    }
    if (acc.e.size() != st.num_tests()) return false;
    if (acc.is_proof) {
        if (!(acc.mu == Fr::one())) return false;
        for (const auto& g : acc.e)
            if (!g.is_one()) return false;
        if (!challenges_consistent(st, acc)) return false;
    }
    for (size_t i = 0; i < st.tests.size(); ++i) {
        if (!(eval_test(st, acc.x, acc.mu, i) == acc.e[i])) return false;
    }
    return true;
}

Accumulator FoldTree::root() const {
    if (!nodes.empty()) return nodes.back().result;
    if (leaves.size() == 1) return leaves[0];
    throw FoldError("malformed fold tree");
}

FoldTree fold_tree(const BlockStructure& st, const std::vector<BlockProof>& proofs,
                   size_t workers) {
    if (proofs.empty()) throw FoldError("fold_tree: empty proof list");
    FoldTree tree;
    tree.leaves.reserve(proofs.size());
    for (const auto& p : proofs) {
        if (p.x.kind != st.kind) throw FoldError("fold_tree: mixed block kinds");
        tree.leaves.push_back(relax(st, p));
    }
    std::vector<Accumulator> level = tree.leaves;
    while (level.size() > 1) {
        ++tree.depth;
        size_t pairs = level.size() / 2;
        std::vector<FoldNode> results(pairs);
        size_t nw = std::max<size_t>(1, std::min(workers, pairs));
        std::vector<std::thread> ts;
        std::atomic<size_t> next{0};
        auto work = [&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= pairs) break;
                auto [res, pf] = fold(st, level[2 * i], level[2 * i + 1]);
                results[i] = FoldNode{level[2 * i], level[2 * i + 1], std::move(res),
                                      std::move(pf)};
            }
        };
        if (nw == 1) {
            work();
        } else {
            for (size_t w = 0; w < nw; ++w) ts.emplace_back(work);
            for (auto& t : ts) t.join();
        }
        std::vector<Accumulator> up;
        up.reserve(pairs + 1);
        for (size_t i = 0; i < pairs; ++i) up.push_back(results[i].result);
        if (level.size() % 2 == 1) up.push_back(level.back());  // odd node promoted
        for (auto& n : results) tree.nodes.push_back(std::move(n));
        level = std::move(up);
    }
    return tree;
}

namespace {

bool acc_equal(const Accumulator& a, const Accumulator& b) {
    if (a.x.kind != b.x.kind || a.is_proof != b.is_proof) return false;
    if (!(a.mu == b.mu)) return false;
    if (a.x.pi != b.x.pi || a.x.challenges != b.x.challenges) return false;
    if (a.x.g1.size() != b.x.g1.size() || a.x.g2.size() != b.x.g2.size()) return false;
    for (size_t i = 0; i < a.x.g1.size(); ++i)
        if (a.x.g1[i] != b.x.g1[i]) return false;
    for (size_t i = 0; i < a.x.g2.size(); ++i)
        if (a.x.g2[i] != b.x.g2[i]) return false;
    if (a.e.size() != b.e.size()) return false;
    for (size_t i = 0; i < a.e.size(); ++i)
        if (!(a.e[i] == b.e[i])) return false;
    return true;
}

}  // namespace

bool fold_tree_verify(const BlockStructure& st, const FoldTree& tree) {
    if (tree.leaves.empty()) return false;
    for (const auto& leaf : tree.leaves) {
        if (!leaf.is_proof) return false;
        if (!(leaf.mu == Fr::one())) return false;
        for (const auto& g : leaf.e)
            if (!g.is_one()) return false;
    }
    // replay the deterministic reduction shape
    std::vector<const Accumulator*> level;
    for (const auto& l : tree.leaves) level.push_back(&l);
    size_t node_idx = 0;
    while (level.size() > 1) {
        size_t pairs = level.size() / 2;
        std::vector<const Accumulator*> up;
        for (size_t i = 0; i < pairs; ++i) {
            if (node_idx >= tree.nodes.size()) return false;
            const FoldNode& n = tree.nodes[node_idx++];
            // the recorded children must match the replayed schedule
            if (!acc_equal(n.left, *level[2 * i]) || !acc_equal(n.right, *level[2 * i + 1]))
                return false;
            if (!fold_verify(st, n.left, n.right, n.pf, n.result)) return false;
            up.push_back(&n.result);
        }
        if (level.size() % 2 == 1) up.push_back(level.back());
        level = std::move(up);
    }
    return node_idx == tree.nodes.size();
}

}  // namespace zkt
