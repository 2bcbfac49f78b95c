#include "cq.hpp"

#include <openssl/sha.h>

#include "serial.hpp"

namespace zkt {

void fft_group(std::vector<G1>& a, const EvaluationDomain& d, bool invert) {
    size_t n = d.n;
    if (a.size() != n) throw ShapeError("group fft size mismatch");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        Fr wn = invert ? d.omega_inv : d.omega;
        for (size_t k = len; k < n; k <<= 1) wn = wn.sqr();
        for (size_t i = 0; i < n; i += len) {
            Fr w = Fr::one();
            for (size_t j = 0; j < len / 2; ++j) {
                G1 u = a[i + j];
                G1 v = (w == Fr::one()) ? a[i + j + len / 2] : a[i + j + len / 2].scalar_mul(w);
                a[i + j] = u.add(v);
                a[i + j + len / 2] = u.sub(v);
                w = w.mul(wn);
            }
        }
    }
    if (invert) {
        for (auto& x : a) x = x.scalar_mul(d.n_inv);
    }
}

namespace {

// All KZG opening proofs of t_poly at every point of the domain (FK-style):
// h_i = [(T(tau) - T(v_i)) / (tau - v_i)]_1 for all i, in O(N log N) group ops.
std::vector<G1> all_opening_proofs(const Srs& srs, const Poly& t_poly,
                                   const EvaluationDomain& dom) {
    size_t N = dom.n;
    if (srs.max_degree() < N) throw ConfigError("srs too small for table preprocessing");
    // D_m = sum_{k} that{t}_{k+m+1} [tau^k]_1  computed by circular correlation
    size_t M = 2 * N;
    auto big = EvaluationDomain::radix2(M);
    std::vector<G1> A(M, G1::identity());
    for (size_t i = 0; i + 1 < N; ++i) A[i] = srs.g1[i];  // S_0..S_{N-2}
    std::vector<Fr> brev(M, Fr::zero());
    for (size_t j = 0; j < N; ++j) brev[M - 1 - j] = t_poly.coeff(j);
    // conv(A, brev) via FFTs
    fft_group(A, big, false);
    fft_in_place(brev, big, false);
    for (size_t i = 0; i < M; ++i) A[i] = A[i].scalar_mul(brev[i]);
    fft_group(A, big, true);
    // D_m = conv[M - m - 2], m = 0..N-2
    std::vector<G1> D(N, G1::identity());
    for (size_t m = 0; m + 1 < N; ++m) D[m] = A[M - m - 2];
    // h_i = sum_m D_m v_i^m : forward DFT of D over the table domain
    fft_group(D, dom, false);
    return D;
}

std::vector<G1> lagrange_commitments(const Srs& srs, const EvaluationDomain& dom) {
    std::vector<G1> s(srs.g1.begin(), srs.g1.begin() + (long)dom.n);
    fft_group(s, dom, true);
    return s;
}

std::vector<G1> lagrange_shift_commitments(const Srs& srs, const EvaluationDomain& dom) {
    // U_i = omega^{-i} * IFFT(S')_i with S' = [S_0 .. S_{N-2}, O]
    std::vector<G1> s(srs.g1.begin(), srs.g1.begin() + (long)dom.n);
    s[dom.n - 1] = G1::identity();
    for (size_t i = dom.n - 1; i-- > 0;) s[i + 1] = srs.g1[i];
    s[0] = G1::identity();
    // s = [O, S_0, ..., S_{N-2}] corresponds to sum_{k>=1} S_{k-1} x^k; we need
    // sum_{k=0}^{N-2} S_k omega^{-i(k+1)} / N = IFFT of that vector at i.
    fft_group(s, dom, true);
    return s;
}

std::array<uint8_t, 32> digest_values(const std::vector<Fr>& a, const std::vector<Fr>& b) {
    ByteWriter w;
    w.u64v(a.size());
    for (const auto& v : a) w.fr(v);
    w.u64v(b.size());
    for (const auto& v : b) w.fr(v);
    std::array<uint8_t, 32> out;
    SHA256(w.buf.data(), w.buf.size(), out.data());
    return out;
}

}  // namespace

CqTable cq_preprocess(const Srs& srs, const std::vector<Fr>& values) {
    CqTable t;
    t.N = values.size();
    if (t.N == 0 || (t.N & (t.N - 1)) != 0) throw ConfigError("table size must be a power of two");
    t.V = EvaluationDomain::radix2(t.N);
    t.values = values;
    t.t_poly = interpolate(values, t.V);
    t.t_dual = kzg_commit_g2(srs, t.t_poly);
    t.li = lagrange_commitments(srs, t.V);
    t.li_shift = lagrange_shift_commitments(srs, t.V);
    auto h = all_opening_proofs(srs, t.t_poly, t.V);
    t.qi.resize(t.N);
    Fr ninv = Fr::from_u64(t.N).inverse();
    Fr vi = Fr::one();
    for (size_t i = 0; i < t.N; ++i) {
        t.qi[i] = h[i].scalar_mul(vi.mul(ninv));
        vi = vi.mul(t.V.omega);
    }
    for (size_t i = 0; i < t.N; ++i) t.index_of.emplace(values[i].canonical(), i);
    t.id = digest_values(values, {});
    return t;
}

CqPairTable cq2_preprocess(const Srs& srs, const std::vector<Fr>& ins,
                           const std::vector<Fr>& outs) {
    if (ins.size() != outs.size()) throw ShapeError("cq2 table columns must align");
    CqPairTable t;
    t.N = ins.size();
    if (t.N == 0 || (t.N & (t.N - 1)) != 0) throw ConfigError("table size must be a power of two");
    t.V = EvaluationDomain::radix2(t.N);
    t.in_values = ins;
    t.out_values = outs;
    t.in_poly = interpolate(ins, t.V);
    t.out_poly = interpolate(outs, t.V);
    t.in_dual = kzg_commit_g2(srs, t.in_poly);
    t.out_dual = kzg_commit_g2(srs, t.out_poly);
    t.li = lagrange_commitments(srs, t.V);
    t.li_shift = lagrange_shift_commitments(srs, t.V);
    auto hin = all_opening_proofs(srs, t.in_poly, t.V);
    auto hout = all_opening_proofs(srs, t.out_poly, t.V);
    t.qi_in.resize(t.N);
    t.qi_out.resize(t.N);
    Fr ninv = Fr::from_u64(t.N).inverse();
    Fr vi = Fr::one();
    for (size_t i = 0; i < t.N; ++i) {
        Fr s = vi.mul(ninv);
        t.qi_in[i] = hin[i].scalar_mul(s);
        t.qi_out[i] = hout[i].scalar_mul(s);
        vi = vi.mul(t.V.omega);
    }
    for (size_t i = 0; i < t.N; ++i)
        t.index_of.emplace(std::make_pair(ins[i].canonical(), outs[i].canonical()), i);
    t.id = digest_values(ins, outs);
    return t;
}

namespace {

std::string hex_of(const std::array<uint8_t, 32>& d) {
    static const char* k = "0123456789abcdef";
    std::string s;
    for (uint8_t b : d) {
        s.push_back(k[b >> 4]);
        s.push_back(k[b & 15]);
    }
    return s;
}

RelaxedTerm cq_term(TermRef a, TermRef b, bool neg, int mu_pow, int coeff = -1, int pi = -1,
                    int chal = -1) {
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

BlockStructure make_cq_structure(const Srs& srs, const CqTable& table, size_t n) {
    if (n > table.N) throw ConfigError("cq vector longer than table");
    size_t N = table.N;
    BlockStructure st;
    st.kind = BlockKind::Cq;
    st.key = "CQ/" + hex_of(table.id) + "/" + std::to_string(n);
    st.degree = 2;
    // g1: f m A Qa A0 B Qb B0 P ; g2: f'
    st.n_g1 = 9;
    st.n_g2 = 1;
    st.n_pi = 1;    // a0
    st.n_chal = 1;  // beta
    st.consts = {Fr::from_u64(N).mul(Fr::from_u64(n).inverse())};
    st.const_g1 = {G1::generator()};
    st.const_g2 = {G2::generator(),
                   srs.g2[1],
                   table.t_dual,
                   srs.g2[N].sub(G2::generator()),
                   srs.g2[n].sub(G2::generator()),
                   srs.g2[N - n + 1]};
    enum { F = 0, Mm, A, QA, A0, B, QB, B0, P };
    enum { ONE2 = 0, TAU2, T2, ZV2, ZH2, DEG2 };
    auto S = TermRef::slot;
    auto K = TermRef::cnst;
    st.tests = {
        // mu e(A,T) + beta e(A,1) - mu e(m,1) - mu e(Qa,Zv) = e1
        {{cq_term(S(A), K(T2), false, 1), cq_term(S(A), K(ONE2), false, 0, -1, -1, 0),
          cq_term(S(Mm), K(ONE2), true, 1), cq_term(S(QA), K(ZV2), true, 1)}},
        // mu e(A,1) - mu a0 e(1,1) - mu e(A0,tau) = e2
        {{cq_term(S(A), K(ONE2), false, 1), cq_term(K(0), K(ONE2), true, 1, -1, 0),
          cq_term(S(A0), K(TAU2), true, 1)}},
        // e(B,f') + beta e(B,1) - mu^2 e(1,1) - mu e(Qb,Zh) = e3
        {{cq_term(S(B), TermRef::slot(0), false, 0), cq_term(S(B), K(ONE2), false, 0, -1, -1, 0),
          cq_term(K(0), K(ONE2), true, 2), cq_term(S(QB), K(ZH2), true, 1)}},
        // mu e(B,1) - (N/n) mu a0 e(1,1) - mu e(B0,tau) = e4
        {{cq_term(S(B), K(ONE2), false, 1), cq_term(K(0), K(ONE2), true, 1, 0, 0),
          cq_term(S(B0), K(TAU2), true, 1)}},
        // mu e(B0, tau^{N-n+1}) - mu e(P,1) = e5
        {{cq_term(S(B0), K(DEG2), false, 1), cq_term(S(P), K(ONE2), true, 1)}},
        // mu e(1,f') - mu e(f,1) = e6
        {{cq_term(K(0), TermRef::slot(0), false, 1), cq_term(S(F), K(ONE2), true, 1)}},
    };
    st.schedule = {{2, 1, 0, "beta"}};
    st.check_homogeneous();
    return st;
}

BlockProof prove_cq(const Srs& srs, const CqTable& table, const CommittedPoly& f, size_t n,
                    bool bypass) {
    auto dom = EvaluationDomain::radix2(n);
    auto fe = evaluate_on_domain(f.poly, dom);
    // multiplicities
    std::map<size_t, u64> mult;
    for (const auto& v : fe) {
        auto it = table.index_of.find(v.canonical());
        if (it == table.index_of.end()) {
            if (!bypass) throw WitnessError("cq: vector element not in table");
            continue;
        }
        mult[it->second]++;
    }
    G1 m_com = G1::identity(), a_com = G1::identity(), qa_com = G1::identity(),
       a0_com = G1::identity();

    BlockProof pf;
    pf.x.kind = BlockKind::Cq;
    pf.x.g1.resize(9);
    pf.x.g2.resize(1);
    pf.x.pi.resize(1);
    // commit f, f', m then draw beta
    for (const auto& [i, c] : mult) m_com = m_com.add(table.li[i].scalar_mul(Fr::from_u64(c)));
    pf.x.g1[0] = f.com;
    pf.x.g1[1] = m_com;
    pf.x.g2[0] = kzg_commit_g2(srs, f.poly);

    auto st = make_cq_structure(srs, table, n);
    BlockInstance partial = pf.x;
    Fr beta = derive_challenges(st, partial)[0];
    pf.x.challenges = {beta};

    // A-side: sparse over present table entries
    Fr a0 = Fr::zero();
    std::vector<Fr> denom;
    std::vector<std::pair<size_t, Fr>> entries;
    for (const auto& [i, c] : mult) denom.push_back(table.values[i].add(beta));
    batch_inverse(denom);
    size_t di = 0;
    for (const auto& [i, c] : mult) {
        Fr ai = Fr::from_u64(c).mul(denom[di++]);
        entries.emplace_back(i, ai);
        a0 = a0.add(ai);
    }
    a0 = a0.mul(Fr::from_u64(table.N).inverse());
    for (const auto& [i, ai] : entries) {
        a_com = a_com.add(table.li[i].scalar_mul(ai));
        qa_com = qa_com.add(table.qi[i].scalar_mul(ai));
        a0_com = a0_com.add(table.li_shift[i].scalar_mul(ai));
    }

    // B-side over the vector domain
    std::vector<Fr> binv(fe);
    for (auto& v : binv) v = v.add(beta);
    batch_inverse(binv);
    Poly bpoly = interpolate(binv, dom);
    Poly prod = bpoly.mul(f.poly.add(Poly::constant(beta))).sub(Poly::constant(Fr::one()));
    Poly qb;
    try {
        qb = quotient_by_vanishing(prod, dom);
    } catch (const WitnessError&) {
        if (!bypass) throw;
        qb = Poly::zero();
    }
    Poly b0;
    if (!bpoly.is_zero()) b0 = Poly{std::vector<Fr>(bpoly.c.begin() + 1, bpoly.c.end())};
    Poly p = b0.shift(table.N - n + 1);

    pf.x.g1[2] = a_com;
    pf.x.g1[3] = qa_com;
    pf.x.g1[4] = a0_com;
    pf.x.g1[5] = kzg_commit(srs, bpoly);
    pf.x.g1[6] = kzg_commit(srs, qb);
    pf.x.g1[7] = kzg_commit(srs, b0);
    pf.x.g1[8] = kzg_commit(srs, p);
    pf.x.pi[0] = a0;
    return pf;
}

BlockStructure make_cq2_structure(const Srs& srs, const CqPairTable& table, size_t n) {
    if (n > table.N) throw ConfigError("cq2 vector longer than table");
    size_t N = table.N;
    BlockStructure st;
    st.kind = BlockKind::Cq2;
    st.key = "CQ2/" + hex_of(table.id) + "/" + std::to_string(n);
    st.degree = 2;
    // g1: fin fout z m A Qa A0 B Qb B0 P ; g2: z'
    st.n_g1 = 11;
    st.n_g2 = 1;
    st.n_pi = 1;    // a0
    st.n_chal = 2;  // lambda, beta
    st.consts = {Fr::from_u64(N).mul(Fr::from_u64(n).inverse())};
    st.const_g1 = {G1::generator()};
    st.const_g2 = {G2::generator(),
                   srs.g2[1],
                   table.in_dual,
                   table.out_dual,
                   srs.g2[N].sub(G2::generator()),
                   srs.g2[n].sub(G2::generator()),
                   srs.g2[N - n + 1]};
    enum { FIN = 0, FOUT, Z, Mm, A, QA, A0, B, QB, B0, P };
    enum { ONE2 = 0, TAU2, TIN2, TOUT2, ZV2, ZH2, DEG2 };
    auto S = TermRef::slot;
    auto K = TermRef::cnst;
    st.tests = {
        // mu e(z,1) - mu e(fin,1) - lambda e(fout,1) = e0
        {{cq_term(S(Z), K(ONE2), false, 1), cq_term(S(FIN), K(ONE2), true, 1),
          cq_term(S(FOUT), K(ONE2), true, 0, -1, -1, 0)}},
        // mu e(A,Tin) + lambda e(A,Tout) + beta e(A,1) - mu e(m,1) - mu e(Qa,Zv) = e1
        {{cq_term(S(A), K(TIN2), false, 1), cq_term(S(A), K(TOUT2), false, 0, -1, -1, 0),
          cq_term(S(A), K(ONE2), false, 0, -1, -1, 1), cq_term(S(Mm), K(ONE2), true, 1),
          cq_term(S(QA), K(ZV2), true, 1)}},
        // mu e(A,1) - mu a0 e(1,1) - mu e(A0,tau) = e2
        {{cq_term(S(A), K(ONE2), false, 1), cq_term(K(0), K(ONE2), true, 1, -1, 0),
          cq_term(S(A0), K(TAU2), true, 1)}},
        // e(B,z') + beta e(B,1) - mu^2 e(1,1) - mu e(Qb,Zh) = e3
        {{cq_term(S(B), TermRef::slot(0), false, 0),
          cq_term(S(B), K(ONE2), false, 0, -1, -1, 1), cq_term(K(0), K(ONE2), true, 2),
          cq_term(S(QB), K(ZH2), true, 1)}},
        // mu e(B,1) - (N/n) mu a0 e(1,1) - mu e(B0,tau) = e4
        {{cq_term(S(B), K(ONE2), false, 1), cq_term(K(0), K(ONE2), true, 1, 0, 0),
          cq_term(S(B0), K(TAU2), true, 1)}},
        // mu e(B0, tau^{N-n+1}) - mu e(P,1) = e5
        {{cq_term(S(B0), K(DEG2), false, 1), cq_term(S(P), K(ONE2), true, 1)}},
        // mu e(1,z') - mu e(z,1) = e6
        {{cq_term(K(0), TermRef::slot(0), false, 1), cq_term(S(Z), K(ONE2), true, 1)}},
    };
    st.schedule = {{2, 0, 0, "lambda"}, {4, 1, 0, "beta"}};
    st.check_homogeneous();
    return st;
}

BlockProof prove_cq2(const Srs& srs, const CqPairTable& table, const CommittedPoly& f_in,
                     const CommittedPoly& f_out, size_t n, bool bypass) {
    auto dom = EvaluationDomain::radix2(n);
    auto ine = evaluate_on_domain(f_in.poly, dom);
    auto oute = evaluate_on_domain(f_out.poly, dom);

    BlockProof pf;
    pf.x.kind = BlockKind::Cq2;
    pf.x.g1.resize(11);
    pf.x.g2.resize(1);
    pf.x.pi.resize(1);
    pf.x.g1[0] = f_in.com;
    pf.x.g1[1] = f_out.com;

    auto st = make_cq2_structure(srs, table, n);
    // lambda after (fin, fout)
    BlockInstance partial = pf.x;
    Transcript t0 = nark_transcript();
    auto dgst = st.digest();
    // use the shared schedule machinery: derive both challenges in two passes
    (void)t0;
    (void)dgst;
    std::vector<Fr> ch = derive_challenges(st, partial);
    Fr lambda = ch[0];

    Poly zpoly = f_in.poly.add(f_out.poly.scale(lambda));
    G1 zcom = f_in.com.add(f_out.com.scalar_mul(lambda));
    pf.x.g1[2] = zcom;
    pf.x.g2[0] = kzg_commit_g2(srs, zpoly);

    // multiplicities over pairs
    std::map<size_t, u64> mult;
    for (size_t j = 0; j < n; ++j) {
        auto it = table.index_of.find({ine[j].canonical(), oute[j].canonical()});
        if (it == table.index_of.end()) {
            if (!bypass) throw WitnessError("cq2: (in,out) pair not in table");
            continue;
        }
        mult[it->second]++;
    }
    G1 m_com = G1::identity();
    for (const auto& [i, c] : mult) m_com = m_com.add(table.li[i].scalar_mul(Fr::from_u64(c)));
    pf.x.g1[3] = m_com;

    ch = derive_challenges(st, pf.x);
    Fr beta = ch[1];
    pf.x.challenges = {lambda, beta};

    // A-side over combined table values
    Fr a0 = Fr::zero();
    std::vector<Fr> denom;
    for (const auto& [i, c] : mult)
        denom.push_back(table.in_values[i].add(lambda.mul(table.out_values[i])).add(beta));
    batch_inverse(denom);
    G1 a_com = G1::identity(), qa_com = G1::identity(), a0_com = G1::identity();
    size_t di = 0;
    for (const auto& [i, c] : mult) {
        Fr ai = Fr::from_u64(c).mul(denom[di++]);
        a0 = a0.add(ai);
        a_com = a_com.add(table.li[i].scalar_mul(ai));
        qa_com = qa_com.add(table.qi_in[i].add(table.qi_out[i].scalar_mul(lambda)).scalar_mul(ai));
        a0_com = a0_com.add(table.li_shift[i].scalar_mul(ai));
    }
    a0 = a0.mul(Fr::from_u64(table.N).inverse());

    // B-side over combined vector values
    std::vector<Fr> ze(n);
    for (size_t j = 0; j < n; ++j) ze[j] = ine[j].add(lambda.mul(oute[j]));
    std::vector<Fr> binv(ze);
    for (auto& v : binv) v = v.add(beta);
    batch_inverse(binv);
    Poly bpoly = interpolate(binv, dom);
    Poly prod = bpoly.mul(zpoly.add(Poly::constant(beta))).sub(Poly::constant(Fr::one()));
    Poly qb;
    try {
        qb = quotient_by_vanishing(prod, dom);
    } catch (const WitnessError&) {
        if (!bypass) throw;
        qb = Poly::zero();
    }
    Poly b0;
    if (!bpoly.is_zero()) b0 = Poly{std::vector<Fr>(bpoly.c.begin() + 1, bpoly.c.end())};
    Poly p = b0.shift(table.N - n + 1);

    pf.x.g1[4] = a_com;
    pf.x.g1[5] = qa_com;
    pf.x.g1[6] = a0_com;
    pf.x.g1[7] = kzg_commit(srs, bpoly);
    pf.x.g1[8] = kzg_commit(srs, qb);
    pf.x.g1[9] = kzg_commit(srs, b0);
    pf.x.g1[10] = kzg_commit(srs, p);
    pf.x.pi[0] = a0;
    return pf;
}

CqLinMatrix cqlin_preprocess(const Srs& srs, const std::vector<std::vector<Fr>>& rows) {
    CqLinMatrix m;
    m.out_dim = rows.size();
    m.in_dim = rows.empty() ? 0 : rows[0].size();
    if (m.out_dim == 0 || (m.out_dim & (m.out_dim - 1)) != 0)
        throw ConfigError("cqlin: output dim must be a power of two");
    if (m.in_dim == 0 || (m.in_dim & (m.in_dim - 1)) != 0)
        throw ConfigError("cqlin: input dim must be a power of two");
    m.rows = rows;
    auto dom = EvaluationDomain::radix2(m.in_dim);
    ByteWriter w;
    for (const auto& r : rows) {
        if (r.size() != m.in_dim) throw ShapeError("cqlin: ragged matrix");
        m.row_polys.push_back(interpolate(r, dom));
        m.row_duals.push_back(kzg_commit_g2(srs, m.row_polys.back()));
        for (const auto& v : r) w.fr(v);
    }
    SHA256(w.buf.data(), w.buf.size(), m.id.data());
    return m;
}

CqLinCombined cqlin_combine(const Srs& srs, const CqLinMatrix& m, const SharedRandomness& rand) {
    CqLinCombined c;
    Fr w = Fr::one();
    c.b_poly = Poly::zero();
    for (size_t o = 0; o < m.out_dim; ++o) {
        c.b_poly = c.b_poly.add(m.row_polys[o].scale(w));
        w = w.mul(rand.beta);
    }
    c.b_dual = kzg_commit_g2(srs, c.b_poly);
    return c;
}

G2 cqlin_expected_bdual(const CqLinMatrix& m, const SharedRandomness& rand) {
    G2 acc = G2::identity();
    Fr w = Fr::one();
    for (size_t o = 0; o < m.out_dim; ++o) {
        acc = acc.add(m.row_duals[o].scalar_mul(w));
        w = w.mul(rand.beta);
    }
    return acc;
}

BlockStructure make_cqlin_structure(const Srs& srs, size_t in_dim, size_t out_dim) {
    if (srs.max_degree() < std::max(in_dim, out_dim)) throw ConfigError("srs too small for cqlin");
    BlockStructure st;
    st.kind = BlockKind::CqLin;
    st.key = "CQLin/" + std::to_string(in_dim) + "->" + std::to_string(out_dim);
    st.degree = 2;
    // g1: A C L l0 Ql Ql0 R Qr Qr0 ; g2: B' D'
    st.n_g1 = 9;
    st.n_g2 = 2;
    st.consts = {Fr::from_u64(in_dim).mul(Fr::from_u64(out_dim).inverse())};
    st.const_g1 = {G1::generator()};
    st.const_g2 = {G2::generator(), srs.g2[1], srs.g2[in_dim].sub(G2::generator()),
                   srs.g2[out_dim].sub(G2::generator())};
    enum { A = 0, C, L, L0, QL, QL0, R, QR, QR0 };
    enum { ONE2 = 0, TAU2, ZI2, ZO2 };
    auto S = TermRef::slot;
    auto K = TermRef::cnst;
    st.tests = {
        {{cq_term(S(A), TermRef::slot(0), false, 0), cq_term(S(L), K(ONE2), true, 1),
          cq_term(S(QL), K(ZI2), true, 1)}},
        {{cq_term(S(L), K(ONE2), false, 1), cq_term(S(L0), K(ONE2), true, 1),
          cq_term(S(QL0), K(TAU2), true, 1)}},
        {{cq_term(S(C), TermRef::slot(1), false, 0), cq_term(S(R), K(ONE2), true, 1),
          cq_term(S(QR), K(ZO2), true, 1)}},
        {{cq_term(S(R), K(ONE2), false, 1), cq_term(S(L0), K(ONE2), true, 1, 0),
          cq_term(S(QR0), K(TAU2), true, 1)}},
    };
    st.check_homogeneous();
    return st;
}

BlockProof prove_cqlin(const Srs& srs, const CqLinMatrix& m, const CqLinCombined& comb,
                       const SharedRandomness& rand, const std::vector<CommittedPoly>& x_rows,
                       const std::vector<CommittedPoly>& y_rows) {
    if (x_rows.size() != y_rows.size()) throw ShapeError("cqlin: row count mismatch");
    size_t l = x_rows.size();
    auto dom_i = EvaluationDomain::radix2(m.in_dim);
    auto dom_o = EvaluationDomain::radix2(m.out_dim);
    auto aw = power_vector(rand.alpha, l);

    Poly apoly = Poly::zero();
    G1 acom = G1::identity();
    Poly cpoly = Poly::zero();
    G1 ccom = G1::identity();
    for (size_t i = 0; i < l; ++i) {
        apoly = apoly.add(x_rows[i].poly.scale(aw[i]));
        acom = acom.add(x_rows[i].com.scalar_mul(aw[i]));
        cpoly = cpoly.add(y_rows[i].poly.scale(aw[i]));
        ccom = ccom.add(y_rows[i].com.scalar_mul(aw[i]));
    }
    Poly dpoly = matmul_d_poly(rand, m.out_dim);

    // left: <a, b>; right: <c, beta-powers>
    auto ue = evaluate_on_domain(apoly, dom_i);
    auto we = evaluate_on_domain(comb.b_poly, dom_i);
    std::vector<Fr> le(dom_i.n);
    for (size_t i = 0; i < dom_i.n; ++i) le[i] = ue[i].mul(we[i]);
    Poly L = interpolate(le, dom_i);
    Poly ql = quotient_by_vanishing(apoly.mul(comb.b_poly).sub(L), dom_i);
    Poly ql0;
    if (!L.is_zero()) ql0 = Poly{std::vector<Fr>(L.c.begin() + 1, L.c.end())};

    auto ce = evaluate_on_domain(cpoly, dom_o);
    auto de = evaluate_on_domain(dpoly, dom_o);
    std::vector<Fr> re(dom_o.n);
    for (size_t i = 0; i < dom_o.n; ++i) re[i] = ce[i].mul(de[i]);
    Poly R = interpolate(re, dom_o);
    Poly qr = quotient_by_vanishing(cpoly.mul(dpoly).sub(R), dom_o);
    Poly qr0;
    if (!R.is_zero()) qr0 = Poly{std::vector<Fr>(R.c.begin() + 1, R.c.end())};

    BlockProof pf;
    pf.x.kind = BlockKind::CqLin;
    pf.x.g1 = {acom,
               ccom,
               kzg_commit(srs, L),
               G1::generator().scalar_mul(L.coeff(0)),
               kzg_commit(srs, ql),
               kzg_commit(srs, ql0),
               kzg_commit(srs, R),
               kzg_commit(srs, qr),
               kzg_commit(srs, qr0)};
    pf.x.g2 = {comb.b_dual, kzg_commit_g2(srs, dpoly)};
    return pf;
}

}  // namespace zkt
