#include "blocks.hpp"

#include <openssl/sha.h>

#include "serial.hpp"

namespace zkt {

const char* kind_name(BlockKind k) {
    switch (k) {
        case BlockKind::Add: return "Add";
        case BlockKind::Sub: return "Sub";
        case BlockKind::Eq: return "Eq";
        case BlockKind::Concat: return "Concat";
        case BlockKind::Mul: return "Mul";
        case BlockKind::MulConst: return "MulConst";
        case BlockKind::MulScalar: return "MulScalar";
        case BlockKind::Sum: return "Sum";
        case BlockKind::MatMul: return "MatMul";
        case BlockKind::Permute: return "Permute";
        case BlockKind::Cq: return "CQ";
        case BlockKind::Cq2: return "CQ2";
        case BlockKind::CqLin: return "CQLin";
        case BlockKind::Div: return "Div";
        case BlockKind::Mod: return "Mod";
        case BlockKind::BooleanCheck: return "BooleanCheck";
        case BlockKind::MaxProof: return "MaxProof";
        case BlockKind::CopyConstraint: return "CopyConstraint";
        case BlockKind::OneToOne: return "OneToOne";
        case BlockKind::Ordered: return "Ordered";
    }
    return "?";
}

bool is_foldable(BlockKind k) {
    switch (k) {
        case BlockKind::Add:
        case BlockKind::Sub:
        case BlockKind::Eq:
        case BlockKind::Concat:
        case BlockKind::Mul:
        case BlockKind::MulConst:
        case BlockKind::MulScalar:
        case BlockKind::Sum:
        case BlockKind::MatMul:
        case BlockKind::Permute:
        case BlockKind::Cq:
        case BlockKind::Cq2:
        case BlockKind::CqLin:
            return true;
        default:
            return false;
    }
}

void BlockInstance::absorb_into(Transcript& t) const {
    t.absorb_u64("kind", (u64)kind);
    t.absorb_u64("npi", pi.size());
    for (const auto& v : pi) t.absorb_fr("pi", v);
    t.absorb_u64("nchal", challenges.size());
    for (const auto& v : challenges) t.absorb_fr("r", v);
    t.absorb_u64("ng1", g1.size());
    for (const auto& p : g1) t.absorb_g1("c1", p);
    t.absorb_u64("ng2", g2.size());
    for (const auto& p : g2) t.absorb_g2("c2", p);
}

std::array<uint8_t, 32> BlockStructure::digest() const {
    ByteWriter w;
    w.str(key);
    w.u64v((u64)degree);
    w.u64v(consts.size());
    for (const auto& c : consts) w.fr(c);
    w.u64v(const_g1.size());
    for (const auto& p : const_g1) w.g1(p);
    w.u64v(const_g2.size());
    for (const auto& p : const_g2) w.g2(p);
    std::array<uint8_t, 32> out;
    SHA256(w.buf.data(), w.buf.size(), out.data());
    return out;
}

void BlockStructure::check_homogeneous() const {
    for (const auto& test : tests) {
        for (const auto& t : test.terms) {
            int d = t.mu_pow + (t.pi >= 0 ? 1 : 0) + (t.chal >= 0 ? 1 : 0) +
                    (t.a.where == TermRef::SLOT ? 1 : 0) + (t.b.where == TermRef::SLOT ? 1 : 0);
            if (d != degree) throw ConfigError("relaxed test is not homogeneous");
        }
    }
}

namespace {

// shared constant indices used by most structures
struct ConstIdx {
    int one1 = 0;  // [1]_1 in const_g1
};

RelaxedTerm term(TermRef a, TermRef b, bool neg = false, int mu_pow = 0, int coeff = -1,
                 int pi = -1, int chal = -1) {
    RelaxedTerm t;
    t.a = a;
    t.b = b;
    t.neg = neg;
    t.mu_pow = mu_pow;
    t.coeff = coeff;
    t.pi = pi;
    t.chal = chal;
    return t;
}

}  // namespace

BlockStructure make_linear_structure(BlockKind kind, size_t rows) {
    BlockStructure st;
    st.kind = kind;
    st.degree = 1;
    st.const_g2 = {G2::generator()};
    switch (kind) {
        case BlockKind::Add:
            st.key = "Add";
            st.n_g1 = 3;
            st.tests = {{{term(TermRef::slot(0), TermRef::cnst(0)),
                          term(TermRef::slot(1), TermRef::cnst(0)),
                          term(TermRef::slot(2), TermRef::cnst(0), true)}}};
            break;
        case BlockKind::Sub:
            st.key = "Sub";
            st.n_g1 = 3;
            st.tests = {{{term(TermRef::slot(0), TermRef::cnst(0)),
                          term(TermRef::slot(1), TermRef::cnst(0), true),
                          term(TermRef::slot(2), TermRef::cnst(0), true)}}};
            break;
        case BlockKind::Eq:
            st.key = "Eq";
            st.n_g1 = 2;
            st.tests = {{{term(TermRef::slot(0), TermRef::cnst(0)),
                          term(TermRef::slot(1), TermRef::cnst(0), true)}}};
            break;
        case BlockKind::Concat: {
            st.key = "Concat/" + std::to_string(rows);
            st.n_g1 = 2 * rows;
            for (size_t i = 0; i < rows; ++i) {
                RelaxedTest t;
                t.terms = {term(TermRef::slot((int)i), TermRef::cnst(0)),
                           term(TermRef::slot((int)(rows + i)), TermRef::cnst(0), true)};
                st.tests.push_back(std::move(t));
            }
            break;
        }
        default:
            throw ConfigError("not a linear block kind");
    }
    st.check_homogeneous();
    return st;
}

BlockStructure make_mulconst_structure(const Fr& c) {
    BlockStructure st;
    st.kind = BlockKind::MulConst;
    st.key = "MulConst/" + c.to_dec();
    st.degree = 1;
    st.n_g1 = 2;
    st.consts = {c};
    st.const_g2 = {G2::generator()};
    st.tests = {{{term(TermRef::slot(0), TermRef::cnst(0), false, 0, 0),
                  term(TermRef::slot(1), TermRef::cnst(0), true)}}};
    st.check_homogeneous();
    return st;
}

BlockStructure make_mulscalar_structure() {
    BlockStructure st;
    st.kind = BlockKind::MulScalar;
    st.key = "MulScalar";
    st.degree = 2;
    st.n_g1 = 3;  // f, g, s
    st.n_g2 = 1;  // s'
    st.const_g1 = {G1::generator()};
    st.const_g2 = {G2::generator()};
    // e(f, s') - mu e(g, 1) = e1 ; mu e(1, s') - mu e(s, 1) = e2
    st.tests = {{{term(TermRef::slot(0), TermRef::slot(0)),
                  term(TermRef::slot(1), TermRef::cnst(0), true, 1)}},
                {{term(TermRef::cnst(0), TermRef::slot(0), false, 1),
                  term(TermRef::slot(2), TermRef::cnst(0), true, 1)}}};
    st.check_homogeneous();
    return st;
}

BlockStructure make_mul_structure(const Srs& srs, size_t n) {
    if (srs.max_degree() < n) throw ConfigError("srs too small for Mul domain");
    BlockStructure st;
    st.kind = BlockKind::Mul;
    st.key = "Mul/" + std::to_string(n);
    st.degree = 2;
    st.n_g1 = 4;  // f, h, g, t
    st.n_g2 = 1;  // h'
    st.const_g1 = {G1::generator()};
    st.const_g2 = {G2::generator(), srs.g2[n].sub(G2::generator())};  // [1]_2, [tau^n - 1]_2
    // e(f,h') - mu e(g,1) - mu e(t, Zn) = e1
    st.tests = {{{term(TermRef::slot(0), TermRef::slot(0)),
                  term(TermRef::slot(2), TermRef::cnst(0), true, 1),
                  term(TermRef::slot(3), TermRef::cnst(1), true, 1)}},
                // mu e(1,h') - mu e(h,1) = e2
                {{term(TermRef::cnst(0), TermRef::slot(0), false, 1),
                  term(TermRef::slot(1), TermRef::cnst(0), true, 1)}}};
    st.check_homogeneous();
    return st;
}

BlockStructure make_sum_structure(const Srs& srs, size_t n) {
    BlockStructure st;
    st.kind = BlockKind::Sum;
    st.key = "Sum/" + std::to_string(n);
    st.degree = 1;
    st.n_g1 = 3;  // f, g(total), f1
    st.consts = {Fr::from_u64(n).inverse()};
    st.const_g2 = {G2::generator(), srs.g2[1]};
    // e(f,1) - n^-1 e(g,1) - e(f1, tau) = e1
    st.tests = {{{term(TermRef::slot(0), TermRef::cnst(0)),
                  term(TermRef::slot(1), TermRef::cnst(0), true, 0, 0),
                  term(TermRef::slot(2), TermRef::cnst(1), true)}}};
    st.check_homogeneous();
    return st;
}

BlockStructure make_matmul_structure(const Srs& srs, size_t l, size_t m, size_t n) {
    if (srs.max_degree() < std::max(n, m)) throw ConfigError("srs too small for MatMul");
    BlockStructure st;
    st.kind = BlockKind::MatMul;
    st.key = "MatMul/" + std::to_string(l) + "x" + std::to_string(n) + "/" + std::to_string(m);
    st.degree = 2;
    // g1: A B C L l0 Ql Ql0 R Qr Qr0 ; g2: B' D'
    st.n_g1 = 10;
    st.n_g2 = 2;
    st.consts = {Fr::from_u64(n).mul(Fr::from_u64(m).inverse())};  // n/m
    st.const_g1 = {G1::generator()};
    st.const_g2 = {G2::generator(), srs.g2[1], srs.g2[n].sub(G2::generator()),
                   srs.g2[m].sub(G2::generator())};
    enum { A = 0, B, C, L, L0, QL, QL0, R, QR, QR0 };
    enum { ONE2 = 0, TAU2, ZN2, ZM2 };
    st.tests = {
        // e(A,B') - mu e(L,1) - mu e(Ql, Zn) = e1
        {{term(TermRef::slot(A), TermRef::slot(0)),
          term(TermRef::slot(L), TermRef::cnst(ONE2), true, 1),
          term(TermRef::slot(QL), TermRef::cnst(ZN2), true, 1)}},
        // mu e(1,B') - mu e(B,1) = e2
        {{term(TermRef::cnst(0), TermRef::slot(0), false, 1),
          term(TermRef::slot(B), TermRef::cnst(ONE2), true, 1)}},
        // mu ( e(L,1) - e(l0,1) - e(Ql0,tau) ) = e3
        {{term(TermRef::slot(L), TermRef::cnst(ONE2), false, 1),
          term(TermRef::slot(L0), TermRef::cnst(ONE2), true, 1),
          term(TermRef::slot(QL0), TermRef::cnst(TAU2), true, 1)}},
        // e(C,D') - mu e(R,1) - mu e(Qr, Zm) = e4
        {{term(TermRef::slot(C), TermRef::slot(1)),
          term(TermRef::slot(R), TermRef::cnst(ONE2), true, 1),
          term(TermRef::slot(QR), TermRef::cnst(ZM2), true, 1)}},
        // mu ( e(R,1) - (n/m) e(l0,1) - e(Qr0,tau) ) = e5
        {{term(TermRef::slot(R), TermRef::cnst(ONE2), false, 1),
          term(TermRef::slot(L0), TermRef::cnst(ONE2), true, 1, 0),
          term(TermRef::slot(QR0), TermRef::cnst(TAU2), true, 1)}},
    };
    st.check_homogeneous();
    return st;
}

BlockStructure make_permute_structure(const Srs& srs, size_t m, size_t n, size_t m2, size_t n2) {
    if (srs.max_degree() < std::max(n, n2)) throw ConfigError("srs too small for Permute");
    BlockStructure st;
    st.kind = BlockKind::Permute;
    st.key = "Permute/" + std::to_string(m) + "x" + std::to_string(n) + "->" +
             std::to_string(m2) + "x" + std::to_string(n2);
    st.degree = 2;
    // g1: A B L l0 Ql Ql0 R Qr Qr0 ; g2: C' D'
    st.n_g1 = 9;
    st.n_g2 = 2;
    st.consts = {Fr::from_u64(n).mul(Fr::from_u64(n2).inverse())};
    st.const_g1 = {G1::generator()};
    st.const_g2 = {G2::generator(), srs.g2[1], srs.g2[n].sub(G2::generator()),
                   srs.g2[n2].sub(G2::generator())};
    enum { A = 0, B, L, L0, QL, QL0, R, QR, QR0 };
    enum { ONE2 = 0, TAU2, ZN2, ZN22 };
    st.tests = {
        {{term(TermRef::slot(A), TermRef::slot(0)),
          term(TermRef::slot(L), TermRef::cnst(ONE2), true, 1),
          term(TermRef::slot(QL), TermRef::cnst(ZN2), true, 1)}},
        {{term(TermRef::slot(L), TermRef::cnst(ONE2), false, 1),
          term(TermRef::slot(L0), TermRef::cnst(ONE2), true, 1),
          term(TermRef::slot(QL0), TermRef::cnst(TAU2), true, 1)}},
        {{term(TermRef::slot(B), TermRef::slot(1)),
          term(TermRef::slot(R), TermRef::cnst(ONE2), true, 1),
          term(TermRef::slot(QR), TermRef::cnst(ZN22), true, 1)}},
        {{term(TermRef::slot(R), TermRef::cnst(ONE2), false, 1),
          term(TermRef::slot(L0), TermRef::cnst(ONE2), true, 1, 0),
          term(TermRef::slot(QR0), TermRef::cnst(TAU2), true, 1)}},
    };
    st.check_homogeneous();
    return st;
}

void check_format(const BlockStructure& st, const BlockInstance& x) {
    if (x.kind != st.kind) throw FormatError("block kind tag mismatch");
    if (x.g1.size() != st.n_g1 || x.g2.size() != st.n_g2 || x.pi.size() != st.n_pi ||
        x.challenges.size() != st.n_chal)
        throw FormatError("block instance slot counts do not match structure");
}

namespace {

const G1& resolve_g1(const BlockStructure& st, const BlockInstance& x, const TermRef& r) {
    return r.where == TermRef::SLOT ? x.g1[(size_t)r.idx] : st.const_g1[(size_t)r.idx];
}
const G2& resolve_g2(const BlockStructure& st, const BlockInstance& x, const TermRef& r) {
    return r.where == TermRef::SLOT ? x.g2[(size_t)r.idx] : st.const_g2[(size_t)r.idx];
}

Fr term_scalar(const BlockStructure& st, const BlockInstance& x, const Fr& mu,
               const RelaxedTerm& t) {
    Fr s = t.coeff >= 0 ? st.consts[(size_t)t.coeff] : Fr::one();
    if (t.pi >= 0) s = s.mul(x.pi[(size_t)t.pi]);
    if (t.chal >= 0) s = s.mul(x.challenges[(size_t)t.chal]);
    for (int i = 0; i < t.mu_pow; ++i) s = s.mul(mu);
    if (t.neg) s = s.neg();
    return s;
}

}  // namespace

Gt eval_test(const BlockStructure& st, const BlockInstance& x, const Fr& mu, size_t idx) {
    const RelaxedTest& test = st.tests[idx];
    std::vector<G1> ps;
    std::vector<G2> qs;
    ps.reserve(test.terms.size());
    qs.reserve(test.terms.size());
    for (const auto& t : test.terms) {
        Fr s = term_scalar(st, x, mu, t);
        if (s.is_zero()) continue;
        G1 a = resolve_g1(st, x, t.a);
        if (!(s == Fr::one())) a = a.scalar_mul(s);
        ps.push_back(a);
        qs.push_back(resolve_g2(st, x, t.b));
    }
    return multi_pairing(ps, qs);
}

bool verify_block(const BlockStructure& st, const BlockProof& proof) {
    check_format(st, proof.x);
    // challenges must be transcript-derivable
    if (st.n_chal > 0) {
        auto expect = derive_challenges(st, proof.x);
        for (size_t i = 0; i < expect.size(); ++i)
            if (!(expect[i] == proof.x.challenges[i])) return false;
    }
    for (size_t i = 0; i < st.tests.size(); ++i) {
        if (!eval_test(st, proof.x, Fr::one(), i).is_one()) return false;
    }
    return true;
}

std::vector<Fr> derive_challenges(const BlockStructure& st, const BlockInstance& x) {
    Transcript t = nark_transcript();
    auto d = st.digest();
    t.absorb_bytes("structure", d.data(), d.size());
    std::vector<Fr> out;
    size_t g1_done = 0, g2_done = 0, pi_done = 0;
    for (const auto& step : st.schedule) {
        for (; pi_done < std::min(step.pi_prefix, x.pi.size()); ++pi_done)
            t.absorb_fr("pi", x.pi[pi_done]);
        for (; g1_done < std::min(step.g1_prefix, x.g1.size()); ++g1_done)
            t.absorb_g1("c1", x.g1[g1_done]);
        for (; g2_done < std::min(step.g2_prefix, x.g2.size()); ++g2_done)
            t.absorb_g2("c2", x.g2[g2_done]);
        out.push_back(t.challenge(step.label));
    }
    return out;
}

CommittedPoly commit_poly(const Srs& srs, Poly p) {
    G1 c = kzg_commit(srs, p);
    return {std::move(p), c};
}

BlockProof prove_linear(BlockKind kind, const std::vector<G1>& lhs, const std::vector<G1>& rhs) {
    BlockProof pf;
    pf.x.kind = kind;
    pf.x.g1 = lhs;
    pf.x.g1.insert(pf.x.g1.end(), rhs.begin(), rhs.end());
    return pf;
}

BlockProof prove_add(const G1& f, const G1& g, const G1& h) {
    return prove_linear(BlockKind::Add, {f, g, h}, {});
}
BlockProof prove_sub(const G1& f, const G1& g, const G1& h) {
    return prove_linear(BlockKind::Sub, {f, g, h}, {});
}
BlockProof prove_eq(const G1& f, const G1& g) { return prove_linear(BlockKind::Eq, {f, g}, {}); }
BlockProof prove_concat(const std::vector<G1>& fs, const std::vector<G1>& gs) {
    if (fs.size() != gs.size()) throw ShapeError("concat arity mismatch");
    return prove_linear(BlockKind::Concat, fs, gs);
}

BlockProof prove_mulconst(const G1& f, const G1& g) {
    BlockProof pf;
    pf.x.kind = BlockKind::MulConst;
    pf.x.g1 = {f, g};
    return pf;
}

BlockProof prove_mulscalar(const Srs& srs, const G1& f, const G1& g, const Fr& scalar) {
    BlockProof pf;
    pf.x.kind = BlockKind::MulScalar;
    pf.x.g1 = {f, g, G1::generator().scalar_mul(scalar)};
    pf.x.g2 = {G2::generator().scalar_mul(scalar)};
    (void)srs;
    return pf;
}

BlockProof prove_mul(const Srs& srs, size_t n, const CommittedPoly& f, const CommittedPoly& h,
                     const CommittedPoly& g, bool bypass) {
    auto d = EvaluationDomain::radix2(n);
    Poly num = f.poly.mul(h.poly).sub(g.poly);
    Poly t;
    if (bypass) {
        try {
            t = quotient_by_vanishing(num, d);
        } catch (const WitnessError&) {
            t = Poly::zero();
        }
    } else {
        t = quotient_by_vanishing(num, d);  // WitnessError surfaces to caller
    }
    BlockProof pf;
    pf.x.kind = BlockKind::Mul;
    pf.x.g1 = {f.com, h.com, g.com, kzg_commit(srs, t)};
    pf.x.g2 = {kzg_commit_g2(srs, h.poly)};
    return pf;
}

BlockProof prove_sum(const Srs& srs, size_t n, const CommittedPoly& f, const Fr& total) {
    // f1 = (f - f(0)) / X ; sum over H equals n * f(0)
    Poly f1;
    if (!f.poly.is_zero()) {
        std::vector<Fr> c(f.poly.c.begin() + 1, f.poly.c.end());
        f1 = Poly{std::move(c)};
    }
    BlockProof pf;
    pf.x.kind = BlockKind::Sum;
    pf.x.g1 = {f.com, G1::generator().scalar_mul(total), kzg_commit(srs, f1)};
    (void)n;
    return pf;
}

G1 combine_rows(const std::vector<G1>& rows, const Fr& base) {
    G1 acc = G1::identity();
    Fr w = Fr::one();
    for (const auto& r : rows) {
        acc = acc.add(r.scalar_mul(w));
        w = w.mul(base);
    }
    return acc;
}

std::vector<Fr> power_vector(const Fr& base, size_t count) {
    std::vector<Fr> out(count);
    Fr w = Fr::one();
    for (size_t i = 0; i < count; ++i) {
        out[i] = w;
        w = w.mul(base);
    }
    return out;
}

Poly matmul_d_poly(const SharedRandomness& rand, size_t m) {
    auto dom = EvaluationDomain::radix2(m);
    return interpolate(power_vector(rand.beta, m), dom);
}

namespace {

Poly combine_row_polys(const std::vector<CommittedPoly>& rows, const std::vector<Fr>& weights) {
    Poly acc = Poly::zero();
    for (size_t i = 0; i < rows.size(); ++i) acc = acc.add(rows[i].poly.scale(weights[i]));
    return acc;
}

G1 combine_row_coms(const std::vector<CommittedPoly>& rows, const std::vector<Fr>& weights) {
    G1 acc = G1::identity();
    for (size_t i = 0; i < rows.size(); ++i) acc = acc.add(rows[i].com.scalar_mul(weights[i]));
    return acc;
}

// Sum-check gadget material for one side: L interpolating the pointwise
// product, its quotients, and the constant coefficient.
struct SideProof {
    Poly lpoly;
    G1 l_com, l0_com, q_com, q0_com;
    Fr l0;
};

SideProof inner_product_side(const Srs& srs, const Poly& u, const Poly& w,
                             const EvaluationDomain& dom) {
    auto ue = evaluate_on_domain(u, dom);
    auto we = evaluate_on_domain(w, dom);
    std::vector<Fr> le(dom.n);
    for (size_t i = 0; i < dom.n; ++i) le[i] = ue[i].mul(we[i]);
    Poly L = interpolate(le, dom);
    Poly q = quotient_by_vanishing(u.mul(w).sub(L), dom);
    Poly q0;
    if (!L.is_zero()) q0 = Poly{std::vector<Fr>(L.c.begin() + 1, L.c.end())};
    SideProof s;
    s.lpoly = L;
    s.l0 = L.coeff(0);
    s.l_com = kzg_commit(srs, L);
    s.l0_com = G1::generator().scalar_mul(s.l0);
    s.q_com = kzg_commit(srs, q);
    s.q0_com = kzg_commit(srs, q0);
    return s;
}

}  // namespace

BlockProof prove_matmul(const Srs& srs, const SharedRandomness& rand,
                        const std::vector<CommittedPoly>& a_rows,
                        const std::vector<CommittedPoly>& b_rows,
                        const std::vector<CommittedPoly>& c_rows, size_t n) {
    size_t l = a_rows.size(), m = b_rows.size();
    if (c_rows.size() != l) throw ShapeError("matmul: C row count != A row count");
    auto aw = power_vector(rand.alpha, l);
    auto bw = power_vector(rand.beta, m);
    auto dom_n = EvaluationDomain::radix2(n);
    auto dom_m = EvaluationDomain::radix2(m);

    Poly apoly = combine_row_polys(a_rows, aw);
    Poly bpoly = combine_row_polys(b_rows, bw);
    Poly cpoly = combine_row_polys(c_rows, aw);
    Poly dpoly = matmul_d_poly(rand, m);

    SideProof left = inner_product_side(srs, apoly, bpoly, dom_n);
    SideProof right = inner_product_side(srs, cpoly, dpoly, dom_m);

    BlockProof pf;
    pf.x.kind = BlockKind::MatMul;
    pf.x.g1 = {combine_row_coms(a_rows, aw),
               combine_row_coms(b_rows, bw),
               combine_row_coms(c_rows, aw),
               left.l_com,
               left.l0_com,
               left.q_com,
               left.q0_com,
               right.l_com,
               right.q_com,
               right.q0_com};
    pf.x.g2 = {kzg_commit_g2(srs, bpoly), kzg_commit_g2(srs, dpoly)};
    return pf;
}

Poly permute_c_poly(const SharedRandomness& rand, size_t n) {
    auto dom = EvaluationDomain::radix2(n);
    return interpolate(power_vector(rand.alpha, n), dom);
}

Poly permute_d_poly(const SharedRandomness& rand, const std::vector<size_t>& p1, size_t n2) {
    auto dom = EvaluationDomain::radix2(n2);
    std::vector<Fr> evals(n2);
    for (size_t i = 0; i < n2; ++i) evals[i] = rand.alpha.pow({(u64)p1[i], 0, 0, 0});
    return interpolate(evals, dom);
}

std::vector<Fr> permute_a_row_weights(const SharedRandomness& rand, size_t m, size_t n) {
    std::vector<Fr> out(m);
    for (size_t r = 0; r < m; ++r) out[r] = rand.alpha.pow({(u64)(r * n), 0, 0, 0});
    return out;
}

std::vector<Fr> permute_b_row_weights(const SharedRandomness& rand, const std::vector<size_t>& p0) {
    std::vector<Fr> out(p0.size());
    for (size_t r = 0; r < p0.size(); ++r) out[r] = rand.alpha.pow({(u64)p0[r], 0, 0, 0});
    return out;
}

BlockProof prove_permute(const Srs& srs, const SharedRandomness& rand,
                         const std::vector<CommittedPoly>& a_rows,
                         const std::vector<CommittedPoly>& b_rows,
                         const std::vector<size_t>& p0, const std::vector<size_t>& p1, size_t n) {
    size_t m = a_rows.size(), m2 = b_rows.size();
    if (p0.size() != m2) throw ShapeError("permute: p0 size != B rows");
    size_t n2 = p1.size();
    auto dom_n = EvaluationDomain::radix2(n);
    auto dom_n2 = EvaluationDomain::radix2(n2);

    auto aw = permute_a_row_weights(rand, m, n);
    auto bw = permute_b_row_weights(rand, p0);
    Poly apoly = combine_row_polys(a_rows, aw);
    Poly bpoly = combine_row_polys(b_rows, bw);
    Poly cpoly = permute_c_poly(rand, n);
    Poly dpoly = permute_d_poly(rand, p1, n2);

    SideProof left = inner_product_side(srs, apoly, cpoly, dom_n);
    SideProof right = inner_product_side(srs, bpoly, dpoly, dom_n2);

    BlockProof pf;
    pf.x.kind = BlockKind::Permute;
    pf.x.g1 = {combine_row_coms(a_rows, aw),
               combine_row_coms(b_rows, bw),
               left.l_com,
               left.l0_com,
               left.q_com,
               left.q0_com,
               right.l_com,
               right.q_com,
               right.q0_com};
    pf.x.g2 = {kzg_commit_g2(srs, cpoly), kzg_commit_g2(srs, dpoly)};
    return pf;
}

}  // namespace zkt
