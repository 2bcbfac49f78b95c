#include "polyiop.hpp"

#include <openssl/sha.h>

#include "serial.hpp"

namespace zkt {

Fr IopCircuit::eval(std::span<const Fr> vals) const {
    std::vector<Fr> out(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        const IopExpr& e = nodes[i];
        switch (e.op) {
            case IopExpr::VAR: out[i] = vals[(size_t)e.var]; break;
            case IopExpr::CONST: out[i] = e.k; break;
            case IopExpr::ADD: out[i] = out[(size_t)e.lhs].add(out[(size_t)e.rhs]); break;
            case IopExpr::SUB: out[i] = out[(size_t)e.lhs].sub(out[(size_t)e.rhs]); break;
            case IopExpr::MUL: out[i] = out[(size_t)e.lhs].mul(out[(size_t)e.rhs]); break;
        }
    }
    return out[(size_t)root];
}

size_t IopCircuit::total_degree() const {
    std::vector<size_t> deg(nodes.size(), 0);
    for (size_t i = 0; i < nodes.size(); ++i) {
        const IopExpr& e = nodes[i];
        switch (e.op) {
            case IopExpr::VAR: deg[i] = 1; break;
            case IopExpr::CONST: deg[i] = 0; break;
            case IopExpr::ADD:
            case IopExpr::SUB:
                deg[i] = std::max(deg[(size_t)e.lhs], deg[(size_t)e.rhs]);
                break;
            case IopExpr::MUL: deg[i] = deg[(size_t)e.lhs] + deg[(size_t)e.rhs]; break;
        }
    }
    return deg[(size_t)root];
}

std::array<uint8_t, 32> IopCircuit::digest() const {
    ByteWriter w;
    w.u64v(arity);
    w.u64v(n);
    w.u64v(nodes.size());
    for (const auto& e : nodes) {
        w.u8((uint8_t)e.op);
        w.u64v((u64)e.var);
        w.fr(e.k);
        w.u64v((u64)(e.lhs + 1));
        w.u64v((u64)(e.rhs + 1));
    }
    w.u64v((u64)(root + 1));
    std::array<uint8_t, 32> out;
    SHA256(w.buf.data(), w.buf.size(), out.data());
    return out;
}

Fr BlinderSource::next() {
    auto step = [this] {
        state += 0x9e3779b97f4a7c15ull;
        u64 z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    Limbs l{step(), step(), step(), step()};
    return Fr::from_limbs(l);
}

Poly BlinderSource::blind(const Poly& g, size_t n, size_t blind_degree) {
    std::vector<Fr> zc(n + 1, Fr::zero());
    zc[0] = Fr::one().neg();
    zc[n] = Fr::one();
    std::vector<Fr> bc(blind_degree + 1);
    for (auto& c : bc) c = next();
    return g.add(Poly{zc}.mul(Poly{bc}));
}

namespace {

std::vector<Fr> coset_evals(const Poly& p, const EvaluationDomain& big, const Fr& shift) {
    std::vector<Fr> c(big.n, Fr::zero());
    Fr s = Fr::one();
    for (size_t i = 0; i < p.c.size(); ++i) {
        c[i] = p.c[i].mul(s);
        s = s.mul(shift);
    }
    fft_in_place(c, big, false);
    return c;
}

Poly coset_interp(std::vector<Fr> evals, const EvaluationDomain& big, const Fr& shift) {
    fft_in_place(evals, big, true);
    Fr si = shift.inverse();
    Fr s = Fr::one();
    for (size_t i = 0; i < evals.size(); ++i) {
        evals[i] = evals[i].mul(s);
        s = s.mul(si);
    }
    return Poly{std::move(evals)};
}

Fr iop_zeta(const IopCircuit& c, const std::vector<G1>& f_coms, const G1& q_com, Transcript& t) {
    auto d = c.digest();
    t.absorb_bytes("circuit", d.data(), d.size());
    for (const auto& p : f_coms) t.absorb_g1("f", p);
    t.absorb_g1("q", q_com);
    Fr zeta = t.challenge("zeta");
    auto dom = EvaluationDomain::radix2(c.n);
    while (dom.vanishing_at(zeta).is_zero()) zeta = t.challenge("zeta-retry");
    return zeta;
}

Fr iop_gamma(const IopProof& pf, Transcript& t) {
    for (const auto& v : pf.f_at_z) t.absorb_fr("fz", v);
    for (const auto& v : pf.f_at_wz) t.absorb_fr("fwz", v);
    t.absorb_fr("qz", pf.q_at_z);
    return t.challenge("gamma");
}

}  // namespace

IopProof iop_prove(const Srs& srs, const IopCircuit& c, const std::vector<CommittedPoly>& fs) {
    if (fs.size() != c.arity) throw ShapeError("iop: witness count != arity");
    auto dom = EvaluationDomain::radix2(c.n);

    // witness validity on H
    std::vector<std::vector<Fr>> evals;
    for (const auto& f : fs) evals.push_back(evaluate_on_domain(f.poly, dom));
    for (size_t t = 0; t < c.n; ++t) {
        std::vector<Fr> vals(2 * c.arity);
        for (size_t i = 0; i < c.arity; ++i) {
            vals[i] = evals[i][t];
            vals[c.arity + i] = evals[i][(t + 1) % c.n];
        }
        if (!c.eval(vals).is_zero())
            throw WitnessError("iop: constraint violated on H at row " + std::to_string(t));
    }

    // compose on a coset and divide by Z_H
    size_t max_deg = 0;
    for (const auto& f : fs) max_deg = std::max(max_deg, (size_t)std::max(0L, f.poly.degree()));
    size_t comp_deg = c.total_degree() * std::max(max_deg, c.n) + 1;
    size_t M = 1;
    while (M < comp_deg + 1) M <<= 1;
    auto big = EvaluationDomain::radix2(M);
    Fr shift = Fr::from_u64(5);

    std::vector<std::vector<Fr>> fe(c.arity), fwe(c.arity);
    for (size_t i = 0; i < c.arity; ++i) {
        fe[i] = coset_evals(fs[i].poly, big, shift);
        Poly shifted = fs[i].poly;
        Fr w = Fr::one();
        for (size_t k = 0; k < shifted.c.size(); ++k) {
            shifted.c[k] = shifted.c[k].mul(w);
            w = w.mul(dom.omega);
        }
        fwe[i] = coset_evals(shifted, big, shift);
    }
    std::vector<Fr> zh(M);
    {
        auto ce = coset_evals(Poly{[&] {
                                  std::vector<Fr> zc(c.n + 1, Fr::zero());
                                  zc[0] = Fr::one().neg();
                                  zc[c.n] = Fr::one();
                                  return zc;
                              }()},
                              big, shift);
        zh = ce;
    }
    batch_inverse(zh);
    std::vector<Fr> qe(M);
    std::vector<Fr> vals(2 * c.arity);
    for (size_t t = 0; t < M; ++t) {
        for (size_t i = 0; i < c.arity; ++i) {
            vals[i] = fe[i][t];
            vals[c.arity + i] = fwe[i][t];
        }
        qe[t] = c.eval(vals).mul(zh[t]);
    }
    Poly q = coset_interp(std::move(qe), big, shift);

    IopProof pf;
    for (const auto& f : fs) pf.f_coms.push_back(f.com);
    pf.q_com = kzg_commit(srs, q);

    Transcript tr = nark_transcript();
    Fr zeta = iop_zeta(c, pf.f_coms, pf.q_com, tr);
    Fr wz = zeta.mul(dom.omega);
    for (const auto& f : fs) {
        pf.f_at_z.push_back(f.poly.eval(zeta));
        pf.f_at_wz.push_back(f.poly.eval(wz));
    }
    pf.q_at_z = q.eval(zeta);
    Fr gamma = iop_gamma(pf, tr);

    // h1 = (Q - Q(z) + sum_k gamma^k (f_k - f_k(z))) / (X - z)
    Poly p1 = q.sub(Poly::constant(pf.q_at_z));
    Fr gp = gamma;
    for (size_t k = 0; k < c.arity; ++k) {
        p1 = p1.add(fs[k].poly.sub(Poly::constant(pf.f_at_z[k])).scale(gp));
        gp = gp.mul(gamma);
    }
    pf.h1 = kzg_commit(srs, quotient_linear(p1, zeta, Fr::zero()));
    // h2 = (sum_k gamma^{k-1} (f_k - f_k(wz))) / (X - wz)
    Poly p2 = Poly::zero();
    gp = Fr::one();
    for (size_t k = 0; k < c.arity; ++k) {
        p2 = p2.add(fs[k].poly.sub(Poly::constant(pf.f_at_wz[k])).scale(gp));
        gp = gp.mul(gamma);
    }
    pf.h2 = kzg_commit(srs, quotient_linear(p2, zeta.mul(dom.omega), Fr::zero()));
    return pf;
}

IopVerdict iop_verify(const Srs& srs, const IopCircuit& c, const std::vector<G1>& f_coms,
                      const IopProof& pf) {
    if (pf.f_coms.size() != c.arity || f_coms.size() != c.arity ||
        pf.f_at_z.size() != c.arity || pf.f_at_wz.size() != c.arity)
        return IopVerdict::Malformed;
    for (size_t i = 0; i < c.arity; ++i)
        if (pf.f_coms[i] != f_coms[i]) return IopVerdict::Malformed;

    auto dom = EvaluationDomain::radix2(c.n);
    Transcript tr = nark_transcript();
    Fr zeta = iop_zeta(c, pf.f_coms, pf.q_com, tr);
    Fr wz = zeta.mul(dom.omega);

    // step 4: scalar identity
    std::vector<Fr> vals(2 * c.arity);
    for (size_t i = 0; i < c.arity; ++i) {
        vals[i] = pf.f_at_z[i];
        vals[c.arity + i] = pf.f_at_wz[i];
    }
    if (!(c.eval(vals) == pf.q_at_z.mul(dom.vanishing_at(zeta)))) return IopVerdict::Step4Reject;

    Fr gamma = iop_gamma(pf, tr);
    // first opening check at zeta
    G1 agg1 = pf.q_com.sub(G1::generator().scalar_mul(pf.q_at_z));
    Fr gp = gamma;
    for (size_t k = 0; k < c.arity; ++k) {
        agg1 = agg1.add(
            pf.f_coms[k].sub(G1::generator().scalar_mul(pf.f_at_z[k])).scalar_mul(gp));
        gp = gp.mul(gamma);
    }
    G2 tz = srs.g2[1].sub(G2::generator().scalar_mul(zeta));
    {
        std::array<G1, 2> ps{pf.h1, agg1.neg()};
        std::array<G2, 2> qs{tz, srs.g2[0]};
        if (!multi_pairing(ps, qs).is_one()) return IopVerdict::OpeningReject;
    }
    G1 agg2 = G1::identity();
    gp = Fr::one();
    for (size_t k = 0; k < c.arity; ++k) {
        agg2 = agg2.add(
            pf.f_coms[k].sub(G1::generator().scalar_mul(pf.f_at_wz[k])).scalar_mul(gp));
        gp = gp.mul(gamma);
    }
    G2 twz = srs.g2[1].sub(G2::generator().scalar_mul(wz));
    {
        std::array<G1, 2> ps{pf.h2, agg2.neg()};
        std::array<G2, 2> qs{twz, srs.g2[0]};
        if (!multi_pairing(ps, qs).is_one()) return IopVerdict::OpeningReject;
    }
    return IopVerdict::Accept;
}

Poly selector_poly(size_t i, size_t n) {
    auto dom = EvaluationDomain::radix2(n);
    std::vector<Fr> e(n, Fr::zero());
    e[i] = Fr::one();
    return interpolate(e, dom);
}

IopCircuit boolean_circuit(size_t n) {
    IopCircuit c;
    c.arity = 1;
    c.n = n;
    int v = c.var(0);
    int one = c.constant(Fr::one());
    int omv = c.sub(one, v);
    c.root = c.mul(v, omv);
    return c;
}

IopProof boolean_check(const Srs& srs, const CommittedPoly& f, size_t n) {
    return iop_prove(srs, boolean_circuit(n), {f});
}

IopVerdict verify_boolean(const Srs& srs, const G1& f_com, size_t n, const IopProof& pf) {
    return iop_verify(srs, boolean_circuit(n), {f_com}, pf);
}

namespace {

Fr one_to_one_gamma(const G1& f_com, const G1& g_com, size_t n) {
    Transcript t = nark_transcript();
    t.absorb_u64("onetoone-n", n);
    t.absorb_g1("f", f_com);
    t.absorb_g1("g", g_com);
    return t.challenge("gamma");
}

IopCircuit one_check_circuit(size_t n) {
    // f1 = z, f2 = L_0 selector ; R = f2 * (f1 - 1)
    IopCircuit c;
    c.arity = 2;
    c.n = n;
    int z = c.var(0);
    int sel = c.var(1);
    int one = c.constant(Fr::one());
    c.root = c.mul(sel, c.sub(z, one));
    return c;
}

IopCircuit recurrence_circuit(size_t n, const Fr& gamma) {
    // f1 = z (with shift), f2 = g, f3 = f ; R = z(wx)(g+gamma) - z(x)(f+gamma)
    IopCircuit c;
    c.arity = 3;
    c.n = n;
    int zw = c.shifted(0);
    int z = c.var(0);
    int g = c.var(1);
    int f = c.var(2);
    int gm = c.constant(gamma);
    c.root = c.sub(c.mul(zw, c.add(g, gm)), c.mul(z, c.add(f, gm)));
    return c;
}

}  // namespace

OneToOneProof one_to_one_prove(const Srs& srs, const CommittedPoly& f, const CommittedPoly& g,
                               size_t n, BlinderSource& blinders) {
    auto dom = EvaluationDomain::radix2(n);
    Fr gamma = one_to_one_gamma(f.com, g.com, n);
    auto fe = evaluate_on_domain(f.poly, dom);
    auto ge = evaluate_on_domain(g.poly, dom);
    std::vector<Fr> den(ge);
    for (auto& v : den) v = v.add(gamma);
    batch_inverse(den);
    std::vector<Fr> ze(n);
    ze[0] = Fr::one();
    for (size_t t = 0; t + 1 < n; ++t) ze[t + 1] = ze[t].mul(fe[t].add(gamma)).mul(den[t]);
    CommittedPoly z = commit_poly(srs, blinders.blind(interpolate(ze, dom), n));
    CommittedPoly sel = commit_poly(srs, selector_poly(0, n));

    OneToOneProof pf;
    pf.z_com = z.com;
    pf.one_check = iop_prove(srs, one_check_circuit(n), {z, sel});
    pf.recurrence = iop_prove(srs, recurrence_circuit(n, gamma), {z, g, f});
    return pf;
}

bool one_to_one_verify(const Srs& srs, const G1& f_com, const G1& g_com, size_t n,
                       const OneToOneProof& pf, std::string* why) {
    Fr gamma = one_to_one_gamma(f_com, g_com, n);
    G1 sel_com = kzg_commit(srs, selector_poly(0, n));
    if (iop_verify(srs, one_check_circuit(n), {pf.z_com, sel_com}, pf.one_check) !=
        IopVerdict::Accept) {
        if (why) *why = "one-to-one: one check";
        return false;
    }
    if (iop_verify(srs, recurrence_circuit(n, gamma), {pf.z_com, g_com, f_com}, pf.recurrence) !=
        IopVerdict::Accept) {
        if (why) *why = "one-to-one: grand product recurrence";
        return false;
    }
    return true;
}

namespace {

IopCircuit sub_check_circuit(size_t n) {
    // f1 = g, f2 = d, f3 = L_last ; R = f2 - (f1(wx) - f1(x)) * (1 - f3)
    IopCircuit c;
    c.arity = 3;
    c.n = n;
    int gw = c.shifted(0);
    int g = c.var(0);
    int d = c.var(1);
    int sel = c.var(2);
    int one = c.constant(Fr::one());
    c.root = c.sub(d, c.mul(c.sub(gw, g), c.sub(one, sel)));
    return c;
}

}  // namespace

OrderedProof ordered_prove(const Srs& srs, const CqTable& dir_table, const CommittedPoly& f,
                           const CommittedPoly& g, size_t n, BlinderSource& blinders,
                           bool bypass) {
    auto dom = EvaluationDomain::radix2(n);
    OrderedProof pf;
    pf.one_to_one = one_to_one_prove(srs, f, g, n, blinders);
    auto ge = evaluate_on_domain(g.poly, dom);
    std::vector<Fr> de(n, Fr::zero());
    for (size_t t = 0; t + 1 < n; ++t) de[t] = ge[t + 1].sub(ge[t]);
    CommittedPoly d = commit_poly(srs, blinders.blind(interpolate(de, dom), n));
    pf.d_com = d.com;
    CommittedPoly sel = commit_poly(srs, selector_poly(n - 1, n));
    pf.sub_check = iop_prove(srs, sub_check_circuit(n), {g, d, sel});
    pf.range = prove_cq(srs, dir_table, d, n, bypass);
    return pf;
}

bool ordered_verify(const Srs& srs, const CqTable& dir_table, const G1& f_com, const G1& g_com,
                    size_t n, const OrderedProof& pf, std::string* why) {
    if (!one_to_one_verify(srs, f_com, g_com, n, pf.one_to_one, why)) return false;
    G1 sel_com = kzg_commit(srs, selector_poly(n - 1, n));
    if (iop_verify(srs, sub_check_circuit(n), {g_com, pf.d_com, sel_com}, pf.sub_check) !=
        IopVerdict::Accept) {
        if (why) *why = "ordered: sub check";
        return false;
    }
    auto st = make_cq_structure(srs, dir_table, n);
    if (pf.range.x.g1.empty() || pf.range.x.g1[0] != pf.d_com) {
        if (why) *why = "ordered: range proof not bound to d";
        return false;
    }
    if (!verify_block(st, pf.range)) {
        if (why) *why = "ordered: range check";
        return false;
    }
    return true;
}

namespace {

IopCircuit ith_zero_circuit(size_t n) {
    // f1 = selector, f2 = d ; R = f1 * f2
    IopCircuit c;
    c.arity = 2;
    c.n = n;
    c.root = c.mul(c.var(0), c.var(1));
    return c;
}

}  // namespace

MaxProofBundle max_prove(const Srs& srs, const CqTable& dir_table, const CommittedPoly& f,
                         const CommittedPoly& g, size_t n, BlinderSource& blinders, bool bypass) {
    auto dom = EvaluationDomain::radix2(n);
    auto fe = evaluate_on_domain(f.poly, dom);
    // sorted descending copy (by signed value)
    std::vector<Fr> sorted(fe);
    std::sort(sorted.begin(), sorted.end(), [](const Fr& a, const Fr& b) {
        bool na = a.is_negative(), nb = b.is_negative();
        if (na != nb) return nb;  // nonnegative first
        return detail::limbs_gte(a.canonical(), b.canonical()) && a != b;
    });
    MaxProofBundle pf;
    CommittedPoly fs = commit_poly(srs, blinders.blind(interpolate(sorted, dom), n));
    pf.sorted_com = fs.com;
    pf.ordered = ordered_prove(srs, dir_table, f, fs, n, blinders, bypass);
    CommittedPoly sel = commit_poly(srs, selector_poly(0, n));
    CommittedPoly d{fs.poly.sub(g.poly), fs.com.sub(g.com)};
    if (bypass) {
        // force an invalid witness path through the bypass-friendly circuit by
        // zeroing the claimed difference
        try {
            pf.ith_zero = iop_prove(srs, ith_zero_circuit(n), {sel, d});
        } catch (const WitnessError&) {
            IopProof dummy;
            dummy.f_coms = {sel.com, d.com};
            dummy.f_at_z.resize(2, Fr::zero());
            dummy.f_at_wz.resize(2, Fr::zero());
            pf.ith_zero = dummy;
        }
    } else {
        pf.ith_zero = iop_prove(srs, ith_zero_circuit(n), {sel, d});
    }
    return pf;
}

bool max_verify(const Srs& srs, const CqTable& dir_table, const G1& f_com, const G1& g_com,
                size_t n, const MaxProofBundle& pf, std::string* why) {
    if (!ordered_verify(srs, dir_table, f_com, pf.sorted_com, n, pf.ordered, why)) return false;
    G1 sel_com = kzg_commit(srs, selector_poly(0, n));
    G1 d_com = pf.sorted_com.sub(g_com);
    if (iop_verify(srs, ith_zero_circuit(n), {sel_com, d_com}, pf.ith_zero) !=
        IopVerdict::Accept) {
        if (why) *why = "max: i-th is zero";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// CopyConstraint

namespace {

struct CopyWiring {
    size_t N = 0;
    size_t cols = 0;  // p1 + p2
    std::vector<size_t> sigma;       // over cols*N positions
    std::vector<Fr> labels;          // label per position: (k+1) * omega^t
    std::vector<size_t> pad_rep;     // representative position per pad index
};

CopyWiring build_wiring(const CopyMap& map) {
    size_t N = std::max(map.m, map.n);
    size_t cols = map.p1 + map.p2;
    size_t sm = N / map.m, sn = N / map.n;
    CopyWiring w;
    w.N = N;
    w.cols = cols;
    auto dom = EvaluationDomain::radix2(N);
    auto els = dom.elements();
    w.labels.resize(cols * N);
    for (size_t k = 0; k < cols; ++k)
        for (size_t t = 0; t < N; ++t)
            w.labels[k * N + t] = Fr::from_u64(k + 1).mul(els[t]);

    // partitions as linked cycles: start with identity
    w.sigma.resize(cols * N);
    for (size_t i = 0; i < w.sigma.size(); ++i) w.sigma[i] = i;
    std::vector<std::vector<size_t>> groups;                 // positions per partition
    std::map<size_t, size_t> pad_group;                      // pad idx -> group id
    std::vector<std::vector<size_t>> copy_groups(map.p1 * map.m);  // source chains

    for (size_t of = 0; of < map.sigma.size(); ++of) {
        size_t j = of / map.n, jj = of % map.n;
        size_t big_out = (map.p1 + j) * N + sn * jj;
        size_t src = map.sigma[of];
        if (src >= CopyMap::PAD_BASE) {
            size_t pidx = src - CopyMap::PAD_BASE;
            auto it = pad_group.find(pidx);
            if (it == pad_group.end()) {
                groups.push_back({big_out});
                pad_group[pidx] = groups.size() - 1;
            } else {
                groups[it->second].push_back(big_out);
            }
        } else {
            size_t i = src / map.m, ii = src % map.m;
            size_t big_in = i * N + sm * ii;
            if (copy_groups[src].empty()) copy_groups[src].push_back(big_in);
            copy_groups[src].push_back(big_out);
        }
    }
    for (auto& g : copy_groups)
        if (g.size() > 1) groups.push_back(std::move(g));
    // pad representatives (smallest position)
    w.pad_rep.assign(map.pad_values.size(), SIZE_MAX);
    for (const auto& [pidx, gid] : pad_group) {
        auto& g = groups[gid];
        w.pad_rep[pidx] = *std::min_element(g.begin(), g.end());
    }
    // cycles
    for (const auto& g : groups) {
        if (g.size() < 2) continue;
        for (size_t i = 0; i < g.size(); ++i) w.sigma[g[i]] = g[(i + 1) % g.size()];
    }
    return w;
}

Fr copy_beta_gamma(Transcript& t, const char* label) { return t.challenge(label); }

}  // namespace

CopyProof copy_constraint_prove(const Srs& srs, const CopyMap& map,
                                const std::vector<CommittedPoly>& inputs,
                                const std::vector<CommittedPoly>& outputs,
                                BlinderSource& blinders) {
    if (inputs.size() != map.p1 || outputs.size() != map.p2)
        throw ShapeError("copy constraint: column count mismatch");
    CopyWiring wir = build_wiring(map);
    size_t N = wir.N, cols = wir.cols;
    auto dom = EvaluationDomain::radix2(N);
    auto dm = EvaluationDomain::radix2(map.m);
    auto dn = EvaluationDomain::radix2(map.n);
    size_t sm = N / map.m, sn = N / map.n;

    CopyProof pf;
    // interleaved re-encodings
    std::vector<CommittedPoly> cc;  // all columns
    std::vector<std::vector<Fr>> vals(cols, std::vector<Fr>(N, Fr::zero()));
    for (size_t i = 0; i < map.p1; ++i) {
        auto e = evaluate_on_domain(inputs[i].poly, dm);
        for (size_t t = 0; t < map.m; ++t) vals[i][sm * t] = e[t];
    }
    for (size_t j = 0; j < map.p2; ++j) {
        auto e = evaluate_on_domain(outputs[j].poly, dn);
        for (size_t t = 0; t < map.n; ++t) vals[map.p1 + j][sn * t] = e[t];
    }
    for (size_t k = 0; k < cols; ++k) {
        Poly base = interpolate(vals[k], dom);
        cc.push_back(commit_poly(srs, blinders.blind(base, N)));
    }
    for (size_t i = 0; i < map.p1; ++i) pf.in_cc_coms.push_back(cc[i].com);
    for (size_t j = 0; j < map.p2; ++j) pf.out_cc_coms.push_back(cc[map.p1 + j].com);

    // subdomain links: (cc - original) / Z_{H_sub}
    for (size_t i = 0; i < map.p1; ++i) {
        Poly q = quotient_by_vanishing(cc[i].poly.sub(inputs[i].poly), dm);
        pf.link_quotients.push_back(kzg_commit(srs, q));
    }
    for (size_t j = 0; j < map.p2; ++j) {
        Poly q = quotient_by_vanishing(cc[map.p1 + j].poly.sub(outputs[j].poly), dn);
        pf.link_quotients.push_back(kzg_commit(srs, q));
    }

    // transcript: beta, gamma after all commitments
    Transcript tr = nark_transcript();
    tr.absorb_u64("copy-N", N);
    for (const auto& c : cc) tr.absorb_g1("cc", c.com);
    Fr beta = copy_beta_gamma(tr, "beta");
    Fr gamma = copy_beta_gamma(tr, "gamma");

    // grand product z over rows
    std::vector<Fr> num(N, Fr::one()), den(N, Fr::one());
    for (size_t t = 0; t < N; ++t) {
        for (size_t k = 0; k < cols; ++k) {
            Fr v = vals[k][t];
            num[t] = num[t].mul(v.add(beta.mul(wir.labels[k * N + t])).add(gamma));
            den[t] = den[t].mul(v.add(beta.mul(wir.labels[wir.sigma[k * N + t]])).add(gamma));
        }
    }
    batch_inverse(den);
    std::vector<Fr> ze(N);
    ze[0] = Fr::one();
    for (size_t t = 0; t + 1 < N; ++t) ze[t + 1] = ze[t].mul(num[t]).mul(den[t]);
    CommittedPoly z = commit_poly(srs, blinders.blind(interpolate(ze, dom), N));
    pf.z_com = z.com;

    // public polynomials: identity labels and sigma labels per column
    std::vector<CommittedPoly> s_id, s_sig;
    auto els = dom.elements();
    for (size_t k = 0; k < cols; ++k) {
        std::vector<Fr> ide(N), sge(N);
        for (size_t t = 0; t < N; ++t) {
            ide[t] = wir.labels[k * N + t];
            sge[t] = wir.labels[wir.sigma[k * N + t]];
        }
        s_id.push_back(commit_poly(srs, interpolate(ide, dom)));
        s_sig.push_back(commit_poly(srs, interpolate(sge, dom)));
    }
    CommittedPoly sel0 = commit_poly(srs, selector_poly(0, N));

    // one check
    pf.one_check = iop_prove(srs, one_check_circuit(N), {z, sel0});

    // permutation check circuit:
    // z(x) * prod_k (w_k + beta*S_id_k + gamma) - z(wx) * prod_k (w_k + beta*S_sig_k + gamma)
    IopCircuit c;
    c.arity = 1 + 3 * cols;
    c.n = N;
    int zz = c.var(0);
    int zzw = c.shifted(0);
    int gmc = c.constant(gamma);
    int btc = c.constant(beta);
    int lhs = zz, rhs = zzw;
    for (size_t k = 0; k < cols; ++k) {
        int wv = c.var(1 + k);
        int idv = c.var(1 + cols + k);
        int sgv = c.var(1 + 2 * cols + k);
        lhs = c.mul(lhs, c.add(wv, c.add(c.mul(btc, idv), gmc)));
        rhs = c.mul(rhs, c.add(wv, c.add(c.mul(btc, sgv), gmc)));
    }
    c.root = c.sub(lhs, rhs);
    std::vector<CommittedPoly> perm_witness;
    perm_witness.push_back(z);
    for (size_t k = 0; k < cols; ++k) perm_witness.push_back(cc[k]);
    for (size_t k = 0; k < cols; ++k) perm_witness.push_back(s_id[k]);
    for (size_t k = 0; k < cols; ++k) perm_witness.push_back(s_sig[k]);
    pf.perm_check = iop_prove(srs, c, perm_witness);

    // pad checks: L_t(x) * (G(x) - pad) = 0 at the representative position
    for (size_t p = 0; p < map.pad_values.size(); ++p) {
        size_t rep = wir.pad_rep[p];
        if (rep == SIZE_MAX) continue;  // unused pad value
        size_t k = rep / N, t = rep % N;
        IopCircuit pc;
        pc.arity = 2;
        pc.n = N;
        int selv = pc.var(0);
        int gv = pc.var(1);
        pc.root = pc.mul(selv, pc.sub(gv, pc.constant(map.pad_values[p])));
        CommittedPoly selp = commit_poly(srs, selector_poly(t, N));
        pf.pad_checks.push_back(iop_prove(srs, pc, {selp, cc[k]}));
    }
    (void)els;
    return pf;
}

bool copy_constraint_verify(const Srs& srs, const CopyMap& map, const std::vector<G1>& in_coms,
                            const std::vector<G1>& out_coms, const CopyProof& pf,
                            std::string* why) {
    if (in_coms.size() != map.p1 || out_coms.size() != map.p2 ||
        pf.in_cc_coms.size() != map.p1 || pf.out_cc_coms.size() != map.p2 ||
        pf.link_quotients.size() != map.p1 + map.p2) {
        if (why) *why = "copy: malformed";
        return false;
    }
    CopyWiring wir = build_wiring(map);
    size_t N = wir.N, cols = wir.cols;
    auto dom = EvaluationDomain::radix2(N);

    // subdomain links
    G2 zm = srs.g2[map.m].sub(G2::generator());
    G2 zn = srs.g2[map.n].sub(G2::generator());
    for (size_t i = 0; i < map.p1 + map.p2; ++i) {
        bool is_in = i < map.p1;
        G1 diff = is_in ? pf.in_cc_coms[i].sub(in_coms[i])
                        : pf.out_cc_coms[i - map.p1].sub(out_coms[i - map.p1]);
        std::array<G1, 2> ps{diff, pf.link_quotients[i].neg()};
        std::array<G2, 2> qs{srs.g2[0], is_in ? zm : zn};
        if (!multi_pairing(ps, qs).is_one()) {
            if (why) *why = "copy: subdomain link";
            return false;
        }
    }

    Transcript tr = nark_transcript();
    tr.absorb_u64("copy-N", N);
    for (const auto& c : pf.in_cc_coms) tr.absorb_g1("cc", c);
    for (const auto& c : pf.out_cc_coms) tr.absorb_g1("cc", c);
    Fr beta = copy_beta_gamma(tr, "beta");
    Fr gamma = copy_beta_gamma(tr, "gamma");

    G1 sel0 = kzg_commit(srs, selector_poly(0, N));
    if (iop_verify(srs, one_check_circuit(N), {pf.z_com, sel0}, pf.one_check) !=
        IopVerdict::Accept) {
        if (why) *why = "copy: one check";
        return false;
    }

    IopCircuit c;
    c.arity = 1 + 3 * cols;
    c.n = N;
    int zz = c.var(0);
    int zzw = c.shifted(0);
    int gmc = c.constant(gamma);
    int btc = c.constant(beta);
    int lhs = zz, rhs = zzw;
    for (size_t k = 0; k < cols; ++k) {
        int wv = c.var(1 + k);
        int idv = c.var(1 + cols + k);
        int sgv = c.var(1 + 2 * cols + k);
        lhs = c.mul(lhs, c.add(wv, c.add(c.mul(btc, idv), gmc)));
        rhs = c.mul(rhs, c.add(wv, c.add(c.mul(btc, sgv), gmc)));
    }
    c.root = c.sub(lhs, rhs);
    std::vector<G1> perm_coms;
    perm_coms.push_back(pf.z_com);
    for (size_t k = 0; k < map.p1; ++k) perm_coms.push_back(pf.in_cc_coms[k]);
    for (size_t k = 0; k < map.p2; ++k) perm_coms.push_back(pf.out_cc_coms[k]);
    for (size_t k = 0; k < cols; ++k) {
        std::vector<Fr> ide(N);
        for (size_t t = 0; t < N; ++t) ide[t] = wir.labels[k * N + t];
        perm_coms.push_back(kzg_commit(srs, interpolate(ide, dom)));
    }
    for (size_t k = 0; k < cols; ++k) {
        std::vector<Fr> sge(N);
        for (size_t t = 0; t < N; ++t) sge[t] = wir.labels[wir.sigma[k * N + t]];
        perm_coms.push_back(kzg_commit(srs, interpolate(sge, dom)));
    }
    if (iop_verify(srs, c, perm_coms, pf.perm_check) != IopVerdict::Accept) {
        if (why) *why = "copy: permutation check";
        return false;
    }

    size_t pc_idx = 0;
    for (size_t p = 0; p < map.pad_values.size(); ++p) {
        size_t rep = wir.pad_rep[p];
        if (rep == SIZE_MAX) continue;
        if (pc_idx >= pf.pad_checks.size()) {
            if (why) *why = "copy: missing pad check";
            return false;
        }
        size_t k = rep / N, t = rep % N;
        IopCircuit pcirc;
        pcirc.arity = 2;
        pcirc.n = N;
        int selv = pcirc.var(0);
        int gv = pcirc.var(1);
        pcirc.root = pcirc.mul(selv, pcirc.sub(gv, pcirc.constant(map.pad_values[p])));
        G1 selc = kzg_commit(srs, selector_poly(t, N));
        G1 colc = k < map.p1 ? pf.in_cc_coms[k] : pf.out_cc_coms[k - map.p1];
        if (iop_verify(srs, pcirc, {selc, colc}, pf.pad_checks[pc_idx]) != IopVerdict::Accept) {
            if (why) *why = "copy: pad check";
            return false;
        }
        ++pc_idx;
    }
    return pc_idx == pf.pad_checks.size();
}

DivModProof div_mod_prove(const Srs& srs, const CqTable& range_table, const CommittedPoly& a,
                          const CommittedPoly& b, const CommittedPoly& q, const CommittedPoly& r,
                          size_t n, bool bypass) {
    auto dom = EvaluationDomain::radix2(n);
    auto qe = evaluate_on_domain(q.poly, dom);
    auto be = evaluate_on_domain(b.poly, dom);
    std::vector<Fr> pe(n);
    for (size_t t = 0; t < n; ++t) pe[t] = qe[t].mul(be[t]);
    CommittedPoly prod = commit_poly(srs, interpolate(pe, dom));

    DivModProof pf;
    pf.prod_com = prod.com;
    pf.mul = prove_mul(srs, n, q, b, prod, bypass);
    pf.add = prove_add(prod.com, r.com, a.com);
    pf.cq_r = prove_cq(srs, range_table, r, n, bypass);
    // b - 1 - r
    CommittedPoly br{b.poly.sub(Poly::constant(Fr::one())).sub(r.poly),
                     b.com.sub(G1::generator()).sub(r.com)};
    pf.cq_br = prove_cq(srs, range_table, br, n, bypass);
    return pf;
}

bool div_mod_verify(const Srs& srs, const CqTable& range_table, const G1& a_com, const G1& b_com,
                    const G1& q_com, const G1& r_com, size_t n, const DivModProof& pf,
                    std::string* why) {
    auto mul_st = make_mul_structure(srs, n);
    if (pf.mul.x.g1.size() != 4 || pf.mul.x.g1[0] != q_com || pf.mul.x.g1[1] != b_com ||
        pf.mul.x.g1[2] != pf.prod_com) {
        if (why) *why = "divmod: mul instance binding";
        return false;
    }
    if (!verify_block(mul_st, pf.mul)) {
        if (why) *why = "divmod: mul";
        return false;
    }
    auto add_st = make_linear_structure(BlockKind::Add);
    if (pf.add.x.g1.size() != 3 || pf.add.x.g1[0] != pf.prod_com || pf.add.x.g1[1] != r_com ||
        pf.add.x.g1[2] != a_com) {
        if (why) *why = "divmod: add instance binding";
        return false;
    }
    if (!verify_block(add_st, pf.add)) {
        if (why) *why = "divmod: add";
        return false;
    }
    auto cq_st = make_cq_structure(srs, range_table, n);
    if (pf.cq_r.x.g1.empty() || pf.cq_r.x.g1[0] != r_com) {
        if (why) *why = "divmod: r range binding";
        return false;
    }
    if (!verify_block(cq_st, pf.cq_r)) {
        if (why) *why = "divmod: r range";
        return false;
    }
    G1 br_com = b_com.sub(G1::generator()).sub(r_com);
    if (pf.cq_br.x.g1.empty() || pf.cq_br.x.g1[0] != br_com) {
        if (why) *why = "divmod: b-1-r binding";
        return false;
    }
    if (!verify_block(cq_st, pf.cq_br)) {
        if (why) *why = "divmod: b-1-r range";
        return false;
    }
    return true;
}

}  // namespace zkt
