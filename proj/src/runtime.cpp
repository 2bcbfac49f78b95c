#include "runtime.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "serial.hpp"

namespace zkt {

namespace {

u64 mix64(u64 a, u64 b, u64 c) {
    u64 z = a * 0x9e3779b97f4a7c15ull + b * 0xbf58476d1ce4e5b9ull + c + 0x94d049bb133111ebull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Poly interp_values(const std::vector<int64_t>& vals, size_t plen) {
    auto dom = EvaluationDomain::radix2(plen);
    std::vector<Fr> evals(plen, Fr::zero());
    for (size_t i = 0; i < vals.size() && i < plen; ++i) evals[i] = field_encode(vals[i]);
    return interpolate(evals, dom);
}

// edge blinding: f + Z_H * (b1 * X). The zero constant term keeps constant
// coefficients intact for the Sum gadget.
Poly blind_edge_poly(Poly base, size_t plen, u64 seed) {
    Limbs l{mix64(seed, 1, 1), mix64(seed, 2, 2), mix64(seed, 3, 3), mix64(seed, 4, 4)};
    Fr b1 = Fr::from_limbs(l);
    std::vector<Fr> zc(plen + 1, Fr::zero());
    zc[0] = Fr::one().neg();
    zc[plen] = Fr::one();
    Poly zb = Poly{zc}.mul(Poly{{Fr::zero(), b1}});
    return base.add(zb);
}

void parallel_for(size_t count, size_t workers, const std::function<void(size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= count) break;
            fn(i);
        }
    };
    std::vector<std::thread> ts;
    size_t nw = std::min(workers, count);
    for (size_t w = 0; w < nw; ++w) ts.emplace_back(work);
    for (auto& t : ts) t.join();
}

bool edge_stored(EdgeClass c) {
    return c == EdgeClass::Witness || c == EdgeClass::Weight || c == EdgeClass::Bcast ||
           c == EdgeClass::Output;
}

}  // namespace

const CqTable& ProverContext::set_table(const BlockDag& dag, int id) {
    auto it = set_tables.find(id);
    if (it != set_tables.end()) return it->second;
    const TableSpec& spec = dag.plan.tables[(size_t)id];
    if (spec.pair) throw ConfigError("table is a pair table");
    auto t = cq_preprocess(*srs, spec.in_column());
    return set_tables.emplace(id, std::move(t)).first->second;
}

const CqPairTable& ProverContext::pair_table(const BlockDag& dag, int id) {
    auto it = pair_tables.find(id);
    if (it != pair_tables.end()) return it->second;
    const TableSpec& spec = dag.plan.tables[(size_t)id];
    if (!spec.pair) throw ConfigError("table is a set table");
    auto t = cq2_preprocess(*srs, spec.in_column(), spec.out_column());
    return pair_tables.emplace(id, std::move(t)).first->second;
}

const CqLinMatrix& ProverContext::matrix(const BlockDag& dag, int id) {
    auto it = matrices.find(id);
    if (it != matrices.end()) return it->second;
    const MatrixSpec& spec = dag.plan.matrices[(size_t)id];
    std::vector<std::vector<Fr>> rows;
    for (const auto& r : spec.rows) {
        std::vector<Fr> row;
        for (int64_t v : r) row.push_back(field_encode(v));
        rows.push_back(std::move(row));
    }
    auto m = cqlin_preprocess(*srs, rows);
    return matrices.emplace(id, std::move(m)).first->second;
}

// ---------------------------------------------------------------------------
// witness generation

namespace {

struct WitnessGen {
    const BlockDag& dag;
    const Srs& srs;
    u64 seed;
    WitnessStore store;

    WitnessGen(const BlockDag& d, const Srs& s, u64 sd) : dag(d), srs(s), seed(sd) {
        store.edges.resize(d.edges.size());
    }

    EdgeWitness& W(int e) { return store.edges[(size_t)e]; }
    const DagEdge& E(int e) const { return dag.edges[(size_t)e]; }

    void commit_edge(int e) {
        const DagEdge& ed = E(e);
        EdgeWitness& w = W(e);
        for (size_t r = 0; r < w.rows.size(); ++r) {
            RowWitness& row = w.rows[r];
            for (int64_t v : row.values) {
                if (std::abs(v) > (1ll << 62))
                    throw QuantOverflowError("quantization overflow on edge " + ed.name);
            }
            if (ed.cls == EdgeClass::Bcast) {
                Fr v = field_encode(row.values.empty() ? 0 : row.values[0]);
                row.poly = Poly::constant(v);
                row.com = G1::generator().scalar_mul(v);
            } else {
                Poly base = interp_values(row.values, ed.plen);
                if (ed.cls == EdgeClass::Witness)
                    row.poly = blind_edge_poly(std::move(base), ed.plen,
                                               mix64(seed, (u64)e, (u64)r));
                else
                    row.poly = std::move(base);  // Weight/Const/Output: deterministic
                row.com = kzg_commit(srs, row.poly);
            }
        }
        w.ready = true;
    }

    void ensure(int e);

    void materialize_values(int e, std::vector<std::vector<int64_t>> vals) {
        EdgeWitness& w = W(e);
        if (w.ready) return;
        w.rows.resize(vals.size());
        for (size_t r = 0; r < vals.size(); ++r) w.rows[r].values = std::move(vals[r]);
        commit_edge(e);
    }

    std::vector<int64_t> padded(const std::vector<int64_t>& v, size_t plen) const {
        std::vector<int64_t> out(v);
        out.resize(plen, 0);
        return out;
    }

    void run_node(const DagNode& n);

    void run(const std::vector<ScaledTensor>& inputs) {
        for (size_t i = 0; i < dag.input_edges.size(); ++i) {
            int e = dag.input_edges[i];
            const DagEdge& ed = E(e);
            const ScaledTensor& t = inputs.at(i);
            std::vector<std::vector<int64_t>> rows(ed.rows, std::vector<int64_t>(ed.len, 0));
            if (t.rank() == 4 && ed.rows == t.shape[0] * t.shape[2] * t.shape[3] &&
                ed.len == t.shape[1]) {
                // channels-last layout for convolution inputs
                size_t B = t.shape[0], C = t.shape[1], H = t.shape[2], Wd = t.shape[3];
                for (size_t b = 0; b < B; ++b)
                    for (size_t c = 0; c < C; ++c)
                        for (size_t y = 0; y < H; ++y)
                            for (size_t x = 0; x < Wd; ++x)
                                rows[(b * H + y) * Wd + x][c] =
                                    t.data[((b * C + c) * H + y) * Wd + x];
            } else {
                if (t.numel() != ed.rows * ed.len)
                    throw ShapeError("input tensor does not match edge " + ed.name);
                for (size_t r = 0; r < ed.rows; ++r)
                    for (size_t c = 0; c < ed.len; ++c) rows[r][c] = t.data[r * ed.len + c];
            }
            materialize_values(e, std::move(rows));
        }
        for (const auto& n : dag.nodes) run_node(n);
        for (size_t e = 0; e < dag.edges.size(); ++e) ensure((int)e);

        // shared randomness after all commitments
        Transcript t = nark_transcript();
        t.absorb_u64("model-edges", dag.edges.size());
        for (size_t e = 0; e < dag.edges.size(); ++e) {
            if (!edge_stored(dag.edges[e].cls)) continue;
            for (const auto& row : store.edges[e].rows) t.absorb_g1("edge", row.com);
        }
        store.rand.alpha = t.challenge("alpha");
        store.rand.beta = t.challenge("beta");
    }
};

void WitnessGen::ensure(int e) {
    EdgeWitness& w = W(e);
    if (w.ready) return;
    const DagEdge& ed = E(e);
    if (ed.cls == EdgeClass::Const || ed.cls == EdgeClass::Weight) {
        std::vector<std::vector<int64_t>> rows(ed.rows, std::vector<int64_t>(ed.len, 0));
        for (size_t r = 0; r < ed.rows; ++r)
            for (size_t c = 0; c < ed.len; ++c) rows[r][c] = ed.const_data[r * ed.len + c];
        materialize_values(e, std::move(rows));
        return;
    }
    if (ed.cls == EdgeClass::Derived) {
        std::vector<std::vector<int64_t>> vals(ed.rows);
        w.rows.resize(ed.rows);
        for (size_t r = 0; r < ed.rows; ++r) {
            std::vector<int64_t> acc(ed.len, 0);
            Poly poly;
            G1 com = G1::identity();
            for (const auto& src : ed.derivation[r]) {
                ensure(src.edge);
                const RowWitness& sw = store.edges[(size_t)src.edge].rows[src.row];
                for (size_t c = 0; c < ed.len && c < sw.values.size(); ++c)
                    acc[c] += sw.values[c];
                poly = poly.add(sw.poly);
                com = com.add(sw.com);
            }
            w.rows[r].values = std::move(acc);
            w.rows[r].poly = std::move(poly);
            w.rows[r].com = com;
        }
        w.ready = true;
        return;
    }
    if (ed.rec_role == 'q' || ed.rec_role == 'r') {
        ensure(ed.rec_a);
        ensure(ed.rec_b);
        const EdgeWitness& aw = W(ed.rec_a);
        const EdgeWitness& bw = W(ed.rec_b);
        std::vector<std::vector<int64_t>> qv(ed.rows), rv(ed.rows);
        for (size_t r = 0; r < ed.rows; ++r) {
            const auto& av = aw.rows[r % aw.rows.size()].values;
            const auto& bv = bw.rows[r % bw.rows.size()].values;
            qv[r].resize(E(ed.rec_a).len);
            rv[r].resize(E(ed.rec_a).len);
            for (size_t c = 0; c < av.size(); ++c) {
                int64_t b = bv[c % bv.size()];
                if (b <= 0) throw WitnessError("division by non-positive value on " + ed.name);
                int64_t q = av[c] / b;
                if (av[c] < 0 && q * b != av[c]) --q;
                qv[r][c] = q;
                rv[r][c] = av[c] - q * b;
            }
        }
        if (ed.rec_role == 'q') {
            materialize_values(e, std::move(qv));
        } else {
            // remainder polynomial is a2 - prod so the Add identity holds
            ensure(ed.rec_prod);
            EdgeWitness& wr = W(e);
            wr.rows.resize(ed.rows);
            for (size_t r = 0; r < ed.rows; ++r) {
                wr.rows[r].values = std::move(rv[r]);
                const RowWitness& a2row = aw.rows[r % aw.rows.size()];
                const RowWitness& prod_row = W(ed.rec_prod).rows[r];
                wr.rows[r].poly = a2row.poly.sub(prod_row.poly);
                wr.rows[r].com = a2row.com.sub(prod_row.com);
            }
            wr.ready = true;
        }
        return;
    }
    if (ed.rec_role == 'i') {
        ensure(ed.rec_a);
        const EdgeWitness& aw = W(ed.rec_a);
        std::vector<std::vector<int64_t>> vals(ed.rows);
        for (size_t r = 0; r < ed.rows; ++r) {
            const auto& av = aw.rows[r].values;
            size_t best = 0;
            for (size_t i = 1; i < av.size(); ++i)
                if (av[i] > av[best]) best = i;
            vals[r] = {(int64_t)best};
        }
        materialize_values(e, std::move(vals));
        return;
    }
    throw WitnessError("edge " + ed.name + " was never produced");
}

void WitnessGen::run_node(const DagNode& n) {
    auto in_vals = [&](size_t i) -> const std::vector<int64_t>& {
        ensure(n.ins[i].edge);
        return store.edges[(size_t)n.ins[i].edge]
            .rows[n.ins[i].row == EdgeRef::WHOLE ? 0 : n.ins[i].row]
            .values;
    };
    auto out_ready = [&](size_t i) { return W(n.outs[i].edge).ready; };

    switch (n.kind) {
        case BlockKind::Add:
        case BlockKind::Sub:
        case BlockKind::MulConst: {
            ensure(n.ins[0].edge);
            if (n.kind != BlockKind::MulConst) ensure(n.ins[1].edge);
            if (out_ready(0)) return;  // binding-only (division chain)
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            if (w.rows.size() < oe.rows) w.rows.resize(oe.rows);
            size_t r = n.outs[0].row;
            const RowWitness& a = store.row(n.ins[0]);
            RowWitness& out = w.rows[r];
            out.values.assign(oe.len, 0);
            if (n.kind == BlockKind::MulConst) {
                int64_t c = field_decode(n.cconst);
                for (size_t i = 0; i < oe.len && i < a.values.size(); ++i)
                    out.values[i] = a.values[i] * c;
                out.poly = a.poly.scale(n.cconst);
                out.com = a.com.scalar_mul(n.cconst);
            } else {
                const RowWitness& b = store.row(n.ins[1]);
                for (size_t i = 0; i < oe.len; ++i) {
                    int64_t av = i < a.values.size() ? a.values[i] : 0;
                    int64_t bv = i < b.values.size() ? b.values[i] : 0;
                    out.values[i] = n.kind == BlockKind::Add ? av + bv : av - bv;
                }
                out.poly = n.kind == BlockKind::Add ? a.poly.add(b.poly) : a.poly.sub(b.poly);
                out.com = n.kind == BlockKind::Add ? a.com.add(b.com) : a.com.sub(b.com);
            }
            // mark ready once every row is materialized
            bool all = true;
            for (const auto& row : w.rows) all = all && !row.values.empty();
            if (w.rows.size() == oe.rows && all) w.ready = true;
            return;
        }
        case BlockKind::Mul: {
            ensure(n.ins[0].edge);
            ensure(n.ins[1].edge);
            if (out_ready(0)) return;
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            if (w.rows.size() < oe.rows) w.rows.resize(oe.rows);
            size_t r = n.outs[0].row;
            const auto& a = store.row(n.ins[0]);
            const auto& b = store.row(n.ins[1]);
            RowWitness& out = w.rows[r];
            out.values.assign(oe.len, 0);
            for (size_t i = 0; i < oe.len; ++i) {
                int64_t av = i < a.values.size() ? a.values[i] : 0;
                int64_t bv = b.values.size() == 1 ? b.values[0]
                                                  : (i < b.values.size() ? b.values[i] : 0);
                out.values[i] = av * bv;
            }
            Poly base = interp_values(padded(out.values, oe.plen), oe.plen);
            out.poly = blind_edge_poly(std::move(base), oe.plen,
                                       mix64(seed, (u64)n.outs[0].edge, r));
            out.com = kzg_commit(srs, out.poly);
            bool all = true;
            for (const auto& row : w.rows) all = all && !row.values.empty();
            if (w.rows.size() == oe.rows && all) w.ready = true;
            return;
        }
        case BlockKind::Cq2: {
            const auto& iv = in_vals(0);
            if (out_ready(0)) return;
            const TableSpec& spec = dag.plan.tables[(size_t)n.table];
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            if (w.rows.size() < oe.rows) w.rows.resize(oe.rows);
            RowWitness& out = w.rows[n.outs[0].row];
            out.values.assign(oe.len, 0);
            for (size_t i = 0; i < oe.len; ++i) {
                int64_t v = i < iv.size() ? iv[i] : 0;
                out.values[i] = quant_apply(spec.fn, v, spec.scale_bits, spec.param);
            }
            Poly base = interp_values(padded(out.values, oe.plen), oe.plen);
            out.poly = blind_edge_poly(std::move(base), oe.plen,
                                       mix64(seed, (u64)n.outs[0].edge, n.outs[0].row));
            out.com = kzg_commit(srs, out.poly);
            bool all = true;
            for (const auto& row : w.rows) all = all && !row.values.empty();
            if (w.rows.size() == oe.rows && all) w.ready = true;
            return;
        }
        case BlockKind::CqLin: {
            ensure(n.ins[0].edge);
            if (out_ready(0)) return;
            const MatrixSpec& m = dag.plan.matrices[(size_t)n.matrix];
            const DagEdge& oe = E(n.outs[0].edge);
            const EdgeWitness& xin = W(n.ins[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            w.rows.resize(oe.rows);
            for (size_t r = 0; r < oe.rows; ++r) {
                RowWitness& out = w.rows[r];
                out.values.assign(oe.len, 0);
                const auto& xv = xin.rows[r].values;
                for (size_t o = 0; o < m.rows.size() && o < oe.len; ++o) {
                    int64_t acc = 0;
                    for (size_t j = 0; j < m.rows[o].size() && j < xv.size(); ++j)
                        acc += xv[j] * m.rows[o][j];
                    out.values[o] = acc;
                }
                Poly base = interp_values(padded(out.values, oe.plen), oe.plen);
                out.poly = blind_edge_poly(std::move(base), oe.plen,
                                           mix64(seed, (u64)n.outs[0].edge, r));
                out.com = kzg_commit(srs, out.poly);
            }
            w.ready = true;
            return;
        }
        case BlockKind::MatMul: {
            ensure(n.ins[0].edge);
            ensure(n.ins[1].edge);
            if (out_ready(0)) return;
            const EdgeWitness& aw = W(n.ins[0].edge);
            const EdgeWitness& bw = W(n.ins[1].edge);
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            w.rows.resize(oe.rows);
            for (size_t r = 0; r < oe.rows; ++r) {
                RowWitness& out = w.rows[r];
                out.values.assign(oe.len, 0);
                const auto& av = aw.rows[r].values;
                for (size_t k = 0; k < bw.rows.size() && k < oe.len; ++k) {
                    const auto& bv = bw.rows[k].values;
                    int64_t acc = 0;
                    for (size_t j = 0; j < av.size() && j < bv.size(); ++j) acc += av[j] * bv[j];
                    out.values[k] = acc;
                }
                Poly base = interp_values(padded(out.values, oe.plen), oe.plen);
                out.poly = blind_edge_poly(std::move(base), oe.plen,
                                           mix64(seed, (u64)n.outs[0].edge, r));
                out.com = kzg_commit(srs, out.poly);
            }
            w.ready = true;
            return;
        }
        case BlockKind::Permute: {
            ensure(n.ins[0].edge);
            if (out_ready(0)) return;
            const DagEdge& ie = E(n.ins[0].edge);
            const EdgeWitness& iw = W(n.ins[0].edge);
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            w.rows.resize(oe.rows);
            size_t grid = ie.rows * ie.plen;
            for (size_t r = 0; r < oe.rows; ++r) {
                RowWitness& out = w.rows[r];
                out.values.assign(oe.len, 0);
                for (size_t c = 0; c < oe.len; ++c) {
                    size_t flat = n.p0[r] + n.p1[c];
                    if (flat >= grid) continue;  // pad label
                    size_t sr = flat / ie.plen, sc = flat % ie.plen;
                    const auto& sv = iw.rows[sr].values;
                    out.values[c] = sc < sv.size() ? sv[sc] : 0;
                }
                Poly base = interp_values(padded(out.values, oe.plen), oe.plen);
                out.poly = blind_edge_poly(std::move(base), oe.plen,
                                           mix64(seed, (u64)n.outs[0].edge, r));
                out.com = kzg_commit(srs, out.poly);
            }
            w.ready = true;
            return;
        }
        case BlockKind::Sum: {
            const auto& iv = in_vals(0);
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            if (w.rows.size() < oe.rows) w.rows.resize(oe.rows);
            int64_t tot = 0;
            for (int64_t v : iv) tot += v;
            w.rows[n.outs[0].row].values = {tot};
            bool all = true;
            for (const auto& row : w.rows) all = all && !row.values.empty();
            if (w.rows.size() == oe.rows && all) {
                commit_edge(n.outs[0].edge);
            }
            return;
        }
        case BlockKind::MaxProof: {
            const auto& iv = in_vals(0);
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            if (w.rows.size() < oe.rows) w.rows.resize(oe.rows);
            int64_t m = iv.empty() ? 0 : iv[0];
            const DagEdge& ie = E(n.ins[0].edge);
            for (size_t i = 0; i < ie.plen; ++i) {
                int64_t v = i < iv.size() ? iv[i] : 0;
                m = std::max(m, v);
            }
            w.rows[n.outs[0].row].values = {m};
            bool all = true;
            for (const auto& row : w.rows) all = all && !row.values.empty();
            if (w.rows.size() == oe.rows && all) commit_edge(n.outs[0].edge);
            return;
        }
        case BlockKind::CopyConstraint: {
            if (n.cc_sigma_from_output) {
                ensure(n.ins[0].edge);
                return;  // output (max bcast) produced by the MaxProof node
            }
            // gather/assemble: out[j] = input column values per sigma
            for (const auto& in : n.ins) ensure(in.edge);
            if (out_ready(0)) return;
            const DagEdge& oe = E(n.outs[0].edge);
            EdgeWitness& w = W(n.outs[0].edge);
            if (w.rows.size() < oe.rows) w.rows.resize(oe.rows);
            RowWitness& out = w.rows[n.outs[0].row == EdgeRef::WHOLE ? 0 : n.outs[0].row];
            out.values.assign(oe.len, 0);
            for (size_t j = 0; j < oe.len && j < n.cc_sigma.size(); ++j) {
                size_t src = n.cc_sigma[j];
                if (src == ~(size_t)0) {
                    out.values[j] = n.cc_pads.empty() ? 0 : n.cc_pads[0];
                    continue;
                }
                size_t col = src / n.cc_m, pos = src % n.cc_m;
                const auto& cv = store.row(n.ins[col]).values;
                out.values[j] = pos < cv.size() ? cv[pos] : 0;
            }
            Poly base = interp_values(padded(out.values, oe.plen), oe.plen);
            size_t r = n.outs[0].row == EdgeRef::WHOLE ? 0 : n.outs[0].row;
            out.poly =
                blind_edge_poly(std::move(base), oe.plen, mix64(seed, (u64)n.outs[0].edge, r));
            out.com = kzg_commit(srs, out.poly);
            bool all = true;
            for (const auto& row : w.rows) all = all && !row.values.empty();
            if (w.rows.size() == oe.rows && all) w.ready = true;
            return;
        }
        case BlockKind::Eq:
        case BlockKind::Concat:
        case BlockKind::Cq:
        case BlockKind::BooleanCheck: {
            for (const auto& in : n.ins) ensure(in.edge);
            return;  // binding-only nodes
        }
        default:
            throw ConfigError("witness generation: unhandled node kind");
    }
}

}  // namespace

WitnessStore generate_witness(const BlockDag& dag, const Srs& srs,
                              const std::vector<ScaledTensor>& inputs, u64 seed) {
    if (inputs.size() != dag.input_edges.size())
        throw ShapeError("input count does not match dag inputs");
    WitnessGen gen(dag, srs, seed);
    gen.run(inputs);
    return std::move(gen.store);
}

// ---------------------------------------------------------------------------
// structures +  proving

BlockStructure node_structure(const BlockDag& dag, const DagNode& n, ProverContext& ctx,
                              const SharedRandomness& rand) {
    const Srs& srs = *ctx.srs;
    switch (n.kind) {
        case BlockKind::Add:
        case BlockKind::Sub:
        case BlockKind::Eq:
            return make_linear_structure(n.kind);
        case BlockKind::Concat:
            return make_linear_structure(BlockKind::Concat, n.ins.size());
        case BlockKind::MulConst: {
            auto st = make_mulconst_structure(n.cconst);
            return st;
        }
        case BlockKind::MulScalar:
            return make_mulscalar_structure();
        case BlockKind::Mul:
            return make_mul_structure(srs, n.n);
        case BlockKind::Sum:
            return make_sum_structure(srs, n.n);
        case BlockKind::MatMul: {
            size_t l = dag.edges[(size_t)n.ins[0].edge].rows;
            size_t m = dag.edges[(size_t)n.ins[1].edge].rows;
            return make_matmul_structure(srs, l, m, n.n);
        }
        case BlockKind::Permute: {
            size_t m = dag.edges[(size_t)n.ins[0].edge].rows;
            size_t m2 = n.p0.size();
            size_t n2 = n.p1.size();
            return make_permute_structure(srs, m, n.n, m2, n2);
        }
        case BlockKind::Cq:
            return make_cq_structure(srs, ctx.set_table(dag, n.table), n.n);
        case BlockKind::Cq2:
            return make_cq2_structure(srs, ctx.pair_table(dag, n.table), n.n);
        case BlockKind::CqLin: {
            const CqLinMatrix& m = ctx.matrix(dag, n.matrix);
            return make_cqlin_structure(srs, m.in_dim, m.out_dim);
        }
        default:
            throw UnsupportedFoldError("no structure for non-foldable kind");
    }
    (void)rand;
}

namespace {

CommittedPoly cp_of(const WitnessStore& store, const EdgeRef& r) {
    const RowWitness& rw = store.row(r);
    return {rw.poly, rw.com};
}

std::vector<CommittedPoly> whole_edge(const WitnessStore& store, int edge) {
    std::vector<CommittedPoly> out;
    for (const auto& row : store.edges[(size_t)edge].rows) out.push_back({row.poly, row.com});
    return out;
}

CopyMap node_copy_map(const BlockDag& dag, const DagNode& n, const WitnessStore* store,
                      const std::vector<std::vector<int64_t>>* outputs_by_edge) {
    CopyMap map;
    map.p1 = n.cc_sigma_from_output ? 1 : n.ins.size();
    map.p2 = 1;
    map.m = n.cc_m;
    map.n = n.cc_n;
    if (n.cc_sigma_from_output) {
        // sigma = [claimed argmax index]
        int idx_edge = n.ins[1].edge;
        size_t row = n.ins[1].row;
        int64_t idx;
        if (store) {
            idx = store->edges[(size_t)idx_edge].rows[row].values[0];
        } else {
            idx = outputs_by_edge->at((size_t)idx_edge)[row];
        }
        if (idx < 0 || (size_t)idx >= map.m) throw FormatError("argmax index out of range");
        map.sigma = {(size_t)idx};
    } else {
        for (size_t v : n.cc_sigma)
            map.sigma.push_back(v == ~(size_t)0 ? CopyMap::PAD_BASE : v);
        for (int64_t p : n.cc_pads) map.pad_values.push_back(field_encode(p));
    }
    (void)dag;
    return map;
}

struct NodeProof {
    bool standalone = false;
    BlockProof block;
    StandaloneProof extra;
};

NodeProof prove_node(const BlockDag& dag, const DagNode& n, size_t node_idx,
                     const WitnessStore& store, ProverContext& ctx, u64 seed) {
    const Srs& srs = *ctx.srs;
    NodeProof out;
    switch (n.kind) {
        case BlockKind::Add:
        case BlockKind::Sub:
            out.block = prove_linear(n.kind,
                                     {store.row(n.ins[0]).com, store.row(n.ins[1]).com,
                                      store.row(n.outs[0]).com},
                                     {});
            return out;
        case BlockKind::Eq:
            out.block = prove_eq(store.row(n.ins[0]).com, store.row(n.ins[1]).com);
            return out;
        case BlockKind::Concat: {
            std::vector<G1> fs, gs;
            for (const auto& r : n.ins) fs.push_back(store.row(r).com);
            for (const auto& r : n.outs) gs.push_back(store.row(r).com);
            out.block = prove_concat(fs, gs);
            return out;
        }
        case BlockKind::MulConst:
            out.block = prove_mulconst(store.row(n.ins[0]).com, store.row(n.outs[0]).com);
            return out;
        case BlockKind::Mul:
            out.block = prove_mul(srs, n.n, cp_of(store, n.ins[0]), cp_of(store, n.ins[1]),
                                  cp_of(store, n.outs[0]));
            return out;
        case BlockKind::Sum: {
            const RowWitness& f = store.row(n.ins[0]);
            const RowWitness& g = store.row(n.outs[0]);
            out.block = prove_sum(srs, n.n, {f.poly, f.com}, field_encode(g.values[0]));
            return out;
        }
        case BlockKind::MatMul:
            out.block = prove_matmul(srs, store.rand, whole_edge(store, n.ins[0].edge),
                                     whole_edge(store, n.ins[1].edge),
                                     whole_edge(store, n.outs[0].edge), n.n);
            return out;
        case BlockKind::Permute:
            out.block = prove_permute(srs, store.rand, whole_edge(store, n.ins[0].edge),
                                      whole_edge(store, n.outs[0].edge), n.p0, n.p1, n.n);
            return out;
        case BlockKind::Cq:
            out.block = prove_cq(srs, ctx.set_table(dag, n.table), cp_of(store, n.ins[0]), n.n);
            return out;
        case BlockKind::Cq2:
            out.block = prove_cq2(srs, ctx.pair_table(dag, n.table), cp_of(store, n.ins[0]),
                                  cp_of(store, n.outs[0]), n.n);
            return out;
        case BlockKind::CqLin: {
            const CqLinMatrix& m = ctx.matrix(dag, n.matrix);
            auto comb = cqlin_combine(srs, m, store.rand);
            out.block = prove_cqlin(srs, m, comb, store.rand, whole_edge(store, n.ins[0].edge),
                                    whole_edge(store, n.outs[0].edge));
            return out;
        }
        case BlockKind::BooleanCheck: {
            out.standalone = true;
            out.extra.type = StandaloneProof::BOOLEAN;
            out.extra.node = node_idx;
            out.extra.boolean = boolean_check(srs, cp_of(store, n.ins[0]), n.n);
            return out;
        }
        case BlockKind::MaxProof: {
            out.standalone = true;
            out.extra.type = StandaloneProof::MAXPROOF;
            out.extra.node = node_idx;
            BlinderSource bl(mix64(seed, node_idx, 77));
            out.extra.max = max_prove(srs, ctx.set_table(dag, n.table), cp_of(store, n.ins[0]),
                                      cp_of(store, n.outs[0]), n.n, bl);
            return out;
        }
        case BlockKind::CopyConstraint: {
            out.standalone = true;
            out.extra.type = StandaloneProof::COPY;
            out.extra.node = node_idx;
            BlinderSource bl(mix64(seed, node_idx, 99));
            CopyMap map = node_copy_map(dag, n, &store, nullptr);
            std::vector<CommittedPoly> ins;
            size_t ncols = map.p1;
            for (size_t i = 0; i < ncols; ++i) ins.push_back(cp_of(store, n.ins[i]));
            std::vector<CommittedPoly> outs{cp_of(store, n.outs[0])};
            out.extra.copy = copy_constraint_prove(srs, map, ins, outs, bl);
            return out;
        }
        default:
            throw ConfigError("prove_node: unhandled kind " + std::string(kind_name(n.kind)));
    }
}

}  // namespace

ProofBundle prove_model(const BlockDag& dag, const WitnessStore& store, ProverContext& ctx,
                        const std::array<uint8_t, 32>& model_hash, size_t workers, u64 seed) {
    ProofBundle bundle;
    bundle.model_hash = model_hash;
    bundle.srs_hash = ctx.srs->digest();
    bundle.scale_bits = (uint32_t)dag.scale_bits;
    bundle.seed = seed;

    // preprocess all referenced tables/matrices up front (parallel-friendly)
    std::vector<int> set_ids, pair_ids, mat_ids;
    for (const auto& n : dag.nodes) {
        if (n.kind == BlockKind::Cq || n.kind == BlockKind::MaxProof) set_ids.push_back(n.table);
        if (n.kind == BlockKind::Cq2) pair_ids.push_back(n.table);
        if (n.kind == BlockKind::CqLin) mat_ids.push_back(n.matrix);
    }
    for (int id : set_ids) ctx.set_table(dag, id);
    for (int id : pair_ids) ctx.pair_table(dag, id);
    for (int id : mat_ids) ctx.matrix(dag, id);

    // stored commitments
    for (size_t e = 0; e < dag.edges.size(); ++e) {
        if (!edge_stored(dag.edges[e].cls)) continue;
        std::vector<G1> coms;
        for (const auto& row : store.edges[e].rows) coms.push_back(row.com);
        bundle.edge_coms[(uint32_t)e] = std::move(coms);
    }
    // revealed outputs
    for (int e : dag.output_edges) {
        std::vector<int64_t> vals;
        for (const auto& row : store.edges[(size_t)e].rows)
            vals.insert(vals.end(), row.values.begin(), row.values.end());
        bundle.outputs.push_back(std::move(vals));
    }

    // per-node proofs in parallel
    std::vector<NodeProof> proofs(dag.nodes.size());
    parallel_for(dag.nodes.size(), workers, [&](size_t i) {
        proofs[i] = prove_node(dag, dag.nodes[i], i, store, ctx, seed);
    });

    // group foldable proofs by structure key
    std::map<std::string, FoldGroup> groups;
    std::map<std::string, BlockStructure> structs;
    for (size_t i = 0; i < dag.nodes.size(); ++i) {
        const DagNode& n = dag.nodes[i];
        if (proofs[i].standalone) {
            bundle.standalone.push_back(std::move(proofs[i].extra));
            continue;
        }
        BlockStructure st = node_structure(dag, n, ctx, store.rand);
        auto [it, fresh] = groups.try_emplace(st.key);
        if (fresh) {
            it->second.key = st.key;
            it->second.kind = n.kind;
            structs.emplace(st.key, std::move(st));
        }
        it->second.node_indices.push_back(i);
    }
    std::vector<std::pair<std::string, std::vector<BlockProof>>> work;
    for (auto& [key, grp] : groups) {
        std::vector<BlockProof> ps;
        for (size_t idx : grp.node_indices) ps.push_back(std::move(proofs[idx].block));
        work.emplace_back(key, std::move(ps));
    }
    std::vector<FoldTree> trees(work.size());
    parallel_for(work.size(), std::max<size_t>(1, workers / 2), [&](size_t i) {
        const BlockStructure& st = structs.at(work[i].first);
        trees[i] = fold_tree(st, work[i].second, workers);
    });
    size_t wi = 0;
    for (auto& [key, grp] : groups) {
        grp.tree = std::move(trees[wi++]);
        bundle.groups.push_back(std::move(grp));
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// verification

namespace {

struct EdgeComs {
    std::vector<std::vector<G1>> coms;  // per edge, per row
    bool resolve(const BlockDag& dag, const ProofBundle& bundle, const Srs& srs,
                 std::string* why);
    const G1& at(const EdgeRef& r) const {
        return coms[(size_t)r.edge][r.row == EdgeRef::WHOLE ? 0 : r.row];
    }
};

bool EdgeComs::resolve(const BlockDag& dag, const ProofBundle& bundle, const Srs& srs,
                       std::string* why) {
    coms.assign(dag.edges.size(), {});
    // outputs: quilt index per output edge
    std::map<int, size_t> out_pos;
    for (size_t i = 0; i < dag.output_edges.size(); ++i) out_pos[dag.output_edges[i]] = i;

    std::function<bool(int)> fill = [&](int e) -> bool {
        auto& slot = coms[(size_t)e];
        if (!slot.empty()) return true;
        const DagEdge& ed = dag.edges[(size_t)e];
        switch (ed.cls) {
            case EdgeClass::Const:
            case EdgeClass::Weight: {
                for (size_t r = 0; r < ed.rows; ++r) {
                    std::vector<int64_t> vals(ed.const_data.begin() + (long)(r * ed.len),
                                              ed.const_data.begin() + (long)((r + 1) * ed.len));
                    slot.push_back(kzg_commit(srs, interp_values(vals, ed.plen)));
                }
                return true;
            }
            case EdgeClass::Output: {
                auto it = out_pos.find(e);
                auto stored = bundle.edge_coms.find((uint32_t)e);
                if (it == out_pos.end() || stored == bundle.edge_coms.end()) {
                    if (why) *why = "missing output data for edge " + ed.name;
                    return false;
                }
                const auto& vals = bundle.outputs[it->second];
                if (vals.size() != ed.rows * ed.len) {
                    if (why) *why = "output size mismatch on " + ed.name;
                    return false;
                }
                for (size_t r = 0; r < ed.rows; ++r) {
                    std::vector<int64_t> row(vals.begin() + (long)(r * ed.len),
                                             vals.begin() + (long)((r + 1) * ed.len));
                    slot.push_back(kzg_commit(srs, interp_values(row, ed.plen)));
                }
                // revealed values must match the committed activations
                if (stored->second.size() != slot.size()) {
                    if (why) *why = "output commitment count mismatch on " + ed.name;
                    return false;
                }
                for (size_t r = 0; r < slot.size(); ++r)
                    if (slot[r] != stored->second[r]) {
                        if (why) *why = "revealed outputs do not match commitments on " + ed.name;
                        return false;
                    }
                return true;
            }
            default:
                break;
        }
        if (ed.cls == EdgeClass::Witness || ed.cls == EdgeClass::Bcast) {
            auto stored = bundle.edge_coms.find((uint32_t)e);
            if (stored == bundle.edge_coms.end() || stored->second.size() != ed.rows) {
                if (why) *why = "missing commitments for edge " + ed.name;
                return false;
            }
            slot = stored->second;
            return true;
        }
        // Derived
        for (size_t r = 0; r < ed.rows; ++r) {
            G1 acc = G1::identity();
            for (const auto& src : ed.derivation[r]) {
                if (!fill(src.edge)) return false;
                acc = acc.add(coms[(size_t)src.edge][src.row]);
            }
            slot.push_back(acc);
        }
        return true;
    };
    for (size_t e = 0; e < dag.edges.size(); ++e)
        if (!fill((int)e)) return false;
    return true;
}

}  // namespace

VerifierReport verify_model(const BlockDag& dag, const ProofBundle& bundle, ProverContext& ctx,
                            const std::array<uint8_t, 32>& model_hash) {
    auto t0 = std::chrono::steady_clock::now();
    const Srs& srs = *ctx.srs;
    VerifierReport rep;
    if (bundle.model_hash != model_hash) {
        rep.add("header: model hash", false);
        return rep;
    }
    rep.add("header: model hash", true);
    if (bundle.srs_hash != srs.digest()) {
        rep.add("header: srs hash", false);
        return rep;
    }
    rep.add("header: srs hash", true);

    std::string why;
    EdgeComs ec;
    if (!ec.resolve(dag, bundle, srs, &why)) {
        rep.add("commitments: " + why, false);
        return rep;
    }
    rep.add("commitments resolved", true);

    // shared randomness replay
    SharedRandomness rand;
    {
        Transcript t = nark_transcript();
        t.absorb_u64("model-edges", dag.edges.size());
        for (size_t e = 0; e < dag.edges.size(); ++e) {
            if (!edge_stored(dag.edges[e].cls)) continue;
            for (const auto& com : ec.coms[e]) t.absorb_g1("edge", com);
        }
        rand.alpha = t.challenge("alpha");
        rand.beta = t.challenge("beta");
    }

    // group bookkeeping: expected leaves per group key in node order
    std::map<std::string, std::vector<size_t>> expect_groups;
    std::map<std::string, BlockStructure> structs;
    std::map<size_t, const StandaloneProof*> standalone_of;
    for (const auto& sp : bundle.standalone) standalone_of[sp.node] = &sp;

    bool all_ok = true;
    std::map<std::string, size_t> group_cursor;
    std::map<std::string, const FoldGroup*> group_of;
    for (const auto& g : bundle.groups) group_of[g.key] = &g;

    // first pass: standalone proofs and group membership + leaf binding
    std::vector<std::vector<int64_t>> outs_by_edge(dag.edges.size());
    for (size_t i = 0; i < dag.output_edges.size(); ++i)
        outs_by_edge[(size_t)dag.output_edges[i]] = bundle.outputs.size() > i ? bundle.outputs[i]
                                                                              : std::vector<int64_t>{};

    for (size_t i = 0; i < dag.nodes.size(); ++i) {
        const DagNode& n = dag.nodes[i];
        if (!is_foldable(n.kind)) {
            auto it = standalone_of.find(i);
            if (it == standalone_of.end()) {
                rep.add("standalone proof missing for node " + std::to_string(i), false);
                all_ok = false;
                continue;
            }
            const StandaloneProof& sp = *it->second;
            bool ok = false;
            std::string reason;
            switch (n.kind) {
                case BlockKind::BooleanCheck:
                    ok = sp.type == StandaloneProof::BOOLEAN &&
                         verify_boolean(srs, ec.at(n.ins[0]), n.n, sp.boolean) ==
                             IopVerdict::Accept;
                    break;
                case BlockKind::MaxProof:
                    ok = sp.type == StandaloneProof::MAXPROOF &&
                         max_verify(srs, ctx.set_table(dag, n.table), ec.at(n.ins[0]),
                                    ec.at(n.outs[0]), n.n, sp.max, &reason);
                    break;
                case BlockKind::CopyConstraint: {
                    if (sp.type != StandaloneProof::COPY) break;
                    CopyMap map;
                    try {
                        map = node_copy_map(dag, n, nullptr, &outs_by_edge);
                    } catch (const FormatError&) {
                        break;
                    }
                    std::vector<G1> ins;
                    for (size_t c = 0; c < map.p1; ++c) ins.push_back(ec.at(n.ins[c]));
                    ok = copy_constraint_verify(srs, map, ins, {ec.at(n.outs[0])}, sp.copy,
                                                &reason);
                    break;
                }
                default:
                    reason = "unhandled standalone kind";
            }
            rep.add("node " + std::to_string(i) + " [" + kind_name(n.kind) + "] " + reason, ok);
            all_ok = all_ok && ok;
            continue;
        }
        BlockStructure st = node_structure(dag, n, ctx, rand);
        std::string key = st.key;
        if (!structs.count(key)) structs.emplace(key, std::move(st));
        expect_groups[key].push_back(i);
    }

    // second pass: per-group replay, leaf binding, decide
    for (const auto& [key, nodes] : expect_groups) {
        auto git = group_of.find(key);
        if (git == group_of.end()) {
            rep.add("fold group missing: " + key, false);
            all_ok = false;
            continue;
        }
        const FoldGroup& grp = *git->second;
        const BlockStructure& st = structs.at(key);
        bool ok = grp.tree.leaves.size() == nodes.size();
        // leaf binding: verifier-derivable slots must match the dag commitments
        for (size_t li = 0; ok && li < nodes.size(); ++li) {
            const DagNode& n = dag.nodes[nodes[li]];
            const BlockInstance& x = grp.tree.leaves[li].x;
            auto eq1 = [&](size_t slot, const G1& expect) {
                if (slot >= x.g1.size() || x.g1[slot] != expect) ok = false;
            };
            auto eq2 = [&](size_t slot, const G2& expect) {
                if (slot >= x.g2.size() || !(x.g2[slot] == expect)) ok = false;
            };
            switch (n.kind) {
                case BlockKind::Add:
                case BlockKind::Sub: {
                    eq1(0, ec.at(n.ins[0]));
                    eq1(1, ec.at(n.ins[1]));
                    eq1(2, ec.at(n.outs[0]));
                    break;
                }
                case BlockKind::Eq: {
                    eq1(0, ec.at(n.ins[0]));
                    eq1(1, ec.at(n.ins[1]));
                    break;
                }
                case BlockKind::Concat: {
                    for (size_t k = 0; k < n.ins.size(); ++k) eq1(k, ec.at(n.ins[k]));
                    for (size_t k = 0; k < n.outs.size(); ++k)
                        eq1(n.ins.size() + k, ec.at(n.outs[k]));
                    break;
                }
                case BlockKind::MulConst: {
                    eq1(0, ec.at(n.ins[0]));
                    eq1(1, ec.at(n.outs[0]));
                    break;
                }
                case BlockKind::Mul: {
                    eq1(0, ec.at(n.ins[0]));
                    eq1(1, ec.at(n.ins[1]));
                    eq1(2, ec.at(n.outs[0]));
                    break;
                }
                case BlockKind::Sum: {
                    eq1(0, ec.at(n.ins[0]));
                    eq1(1, ec.at(n.outs[0]));
                    break;
                }
                case BlockKind::MatMul: {
                    const auto& arows = ec.coms[(size_t)n.ins[0].edge];
                    const auto& brows = ec.coms[(size_t)n.ins[1].edge];
                    const auto& crows = ec.coms[(size_t)n.outs[0].edge];
                    eq1(0, combine_rows(arows, rand.alpha));
                    eq1(1, combine_rows(brows, rand.beta));
                    eq1(2, combine_rows(crows, rand.alpha));
                    eq2(1, kzg_commit_g2(srs, matmul_d_poly(rand, brows.size())));
                    break;
                }
                case BlockKind::Permute: {
                    const auto& arows = ec.coms[(size_t)n.ins[0].edge];
                    const auto& brows = ec.coms[(size_t)n.outs[0].edge];
                    auto aw = permute_a_row_weights(rand, arows.size(), n.n);
                    auto bw = permute_b_row_weights(rand, n.p0);
                    G1 acomb = G1::identity(), bcomb = G1::identity();
                    for (size_t r = 0; r < arows.size(); ++r)
                        acomb = acomb.add(arows[r].scalar_mul(aw[r]));
                    for (size_t r = 0; r < brows.size(); ++r)
                        bcomb = bcomb.add(brows[r].scalar_mul(bw[r]));
                    eq1(0, acomb);
                    eq1(1, bcomb);
                    eq2(0, kzg_commit_g2(srs, permute_c_poly(rand, n.n)));
                    eq2(1, kzg_commit_g2(srs, permute_d_poly(rand, n.p1, n.p1.size())));
                    break;
                }
                case BlockKind::Cq: {
                    eq1(0, ec.at(n.ins[0]));
                    break;
                }
                case BlockKind::Cq2: {
                    eq1(0, ec.at(n.ins[0]));
                    eq1(1, ec.at(n.outs[0]));
                    break;
                }
                case BlockKind::CqLin: {
                    const auto& xrows = ec.coms[(size_t)n.ins[0].edge];
                    const auto& yrows = ec.coms[(size_t)n.outs[0].edge];
                    eq1(0, combine_rows(xrows, rand.alpha));
                    eq1(1, combine_rows(yrows, rand.alpha));
                    const CqLinMatrix& m = ctx.matrix(dag, n.matrix);
                    eq2(0, cqlin_expected_bdual(m, rand));
                    eq2(1, kzg_commit_g2(srs, matmul_d_poly(rand, m.out_dim)));
                    break;
                }
                default:
                    ok = false;
            }
        }
        rep.add("group " + key + ": leaf binding", ok);
        all_ok = all_ok && ok;
        if (!ok) continue;
        bool replay = fold_tree_verify(st, grp.tree);
        rep.add("group " + key + ": fold replay", replay);
        bool decided = replay && decide(st, grp.tree.root());
        rep.add("group " + key + ": decider", decided);
        all_ok = all_ok && replay && decided;
    }

    rep.overall = all_ok;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// bundle serialization

namespace {

void write_instance(ByteWriter& w, const BlockInstance& x) {
    w.u8((uint8_t)x.kind);
    w.u64v(x.pi.size());
    for (const auto& v : x.pi) w.fr(v);
    w.u64v(x.challenges.size());
    for (const auto& v : x.challenges) w.fr(v);
    w.u64v(x.g1.size());
    for (const auto& p : x.g1) w.g1(p);
    w.u64v(x.g2.size());
    for (const auto& p : x.g2) w.g2(p);
}

BlockInstance read_instance(ByteReader& r) {
    BlockInstance x;
    x.kind = (BlockKind)r.u8();
    x.pi.resize(r.u64v());
    for (auto& v : x.pi) v = r.fr();
    x.challenges.resize(r.u64v());
    for (auto& v : x.challenges) v = r.fr();
    size_t n1 = r.u64v();
    if (n1 > 4096) throw FormatError("instance too large");
    x.g1.resize(n1);
    for (auto& p : x.g1) p = r.g1();
    size_t n2 = r.u64v();
    if (n2 > 4096) throw FormatError("instance too large");
    x.g2.resize(n2);
    for (auto& p : x.g2) p = r.g2();
    return x;
}

void write_acc(ByteWriter& w, const Accumulator& a) {
    write_instance(w, a.x);
    w.fr(a.mu);
    w.u8(a.is_proof ? 1 : 0);
    w.u64v(a.e.size());
    for (const auto& g : a.e) w.gt(g);
}

Accumulator read_acc(ByteReader& r) {
    Accumulator a;
    a.x = read_instance(r);
    a.mu = r.fr();
    a.is_proof = r.u8() != 0;
    size_t ne = r.u64v();
    if (ne > 64) throw FormatError("too many error terms");
    a.e.resize(ne);
    for (auto& g : a.e) g = r.gt();
    return a;
}

void write_iop(ByteWriter& w, const IopProof& p) {
    w.u64v(p.f_coms.size());
    for (const auto& c : p.f_coms) w.g1(c);
    w.g1(p.q_com);
    for (const auto& v : p.f_at_z) w.fr(v);
    for (const auto& v : p.f_at_wz) w.fr(v);
    w.fr(p.q_at_z);
    w.g1(p.h1);
    w.g1(p.h2);
}

IopProof read_iop(ByteReader& r) {
    IopProof p;
    size_t n = r.u64v();
    if (n > 1024) throw FormatError("iop arity too large");
    p.f_coms.resize(n);
    for (auto& c : p.f_coms) c = r.g1();
    p.q_com = r.g1();
    p.f_at_z.resize(n);
    for (auto& v : p.f_at_z) v = r.fr();
    p.f_at_wz.resize(n);
    for (auto& v : p.f_at_wz) v = r.fr();
    p.q_at_z = r.fr();
    p.h1 = r.g1();
    p.h2 = r.g1();
    return p;
}

void write_max(ByteWriter& w, const MaxProofBundle& m) {
    w.g1(m.sorted_com);
    // ordered proof
    w.g1(m.ordered.one_to_one.z_com);
    write_iop(w, m.ordered.one_to_one.one_check);
    write_iop(w, m.ordered.one_to_one.recurrence);
    w.g1(m.ordered.d_com);
    write_iop(w, m.ordered.sub_check);
    write_instance(w, m.ordered.range.x);
    write_iop(w, m.ith_zero);
}

MaxProofBundle read_max(ByteReader& r) {
    MaxProofBundle m;
    m.sorted_com = r.g1();
    m.ordered.one_to_one.z_com = r.g1();
    m.ordered.one_to_one.one_check = read_iop(r);
    m.ordered.one_to_one.recurrence = read_iop(r);
    m.ordered.d_com = r.g1();
    m.ordered.sub_check = read_iop(r);
    m.ordered.range.x = read_instance(r);
    m.ith_zero = read_iop(r);
    return m;
}

void write_copy(ByteWriter& w, const CopyProof& c) {
    w.u64v(c.in_cc_coms.size());
    for (const auto& p : c.in_cc_coms) w.g1(p);
    w.u64v(c.out_cc_coms.size());
    for (const auto& p : c.out_cc_coms) w.g1(p);
    w.u64v(c.link_quotients.size());
    for (const auto& p : c.link_quotients) w.g1(p);
    w.g1(c.z_com);
    write_iop(w, c.one_check);
    write_iop(w, c.perm_check);
    w.u64v(c.pad_checks.size());
    for (const auto& p : c.pad_checks) write_iop(w, p);
}

CopyProof read_copy(ByteReader& r) {
    CopyProof c;
    size_t n = r.u64v();
    if (n > 4096) throw FormatError("copy proof too large");
    c.in_cc_coms.resize(n);
    for (auto& p : c.in_cc_coms) p = r.g1();
    n = r.u64v();
    if (n > 4096) throw FormatError("copy proof too large");
    c.out_cc_coms.resize(n);
    for (auto& p : c.out_cc_coms) p = r.g1();
    n = r.u64v();
    if (n > 4096) throw FormatError("copy proof too large");
    c.link_quotients.resize(n);
    for (auto& p : c.link_quotients) p = r.g1();
    c.z_com = r.g1();
    c.one_check = read_iop(r);
    c.perm_check = read_iop(r);
    n = r.u64v();
    if (n > 1024) throw FormatError("copy proof too large");
    c.pad_checks.resize(n);
    for (auto& p : c.pad_checks) p = read_iop(r);
    return c;
}

}  // namespace

std::vector<uint8_t> serialize_bundle(const ProofBundle& b) {
    ByteWriter w;
    w.tag("ZKTPRF01");
    w.bytes(b.model_hash.data(), 32);
    w.bytes(b.srs_hash.data(), 32);
    w.u32(b.scale_bits);
    w.u64v(b.seed);
    w.u64v(b.edge_coms.size());
    for (const auto& [e, coms] : b.edge_coms) {
        w.u32(e);
        w.u64v(coms.size());
        for (const auto& c : coms) w.g1(c);
    }
    w.u64v(b.outputs.size());
    for (const auto& vals : b.outputs) {
        w.u64v(vals.size());
        for (int64_t v : vals) w.u64v((u64)v);
    }
    w.u64v(b.groups.size());
    for (const auto& g : b.groups) {
        w.str(g.key);
        w.u8((uint8_t)g.kind);
        w.u64v(g.node_indices.size());
        for (size_t idx : g.node_indices) w.u64v(idx);
        w.u64v(g.tree.leaves.size());
        for (const auto& l : g.tree.leaves) write_acc(w, l);
        w.u64v(g.tree.nodes.size());
        for (const auto& nd : g.tree.nodes) {
            w.u64v(nd.pf.e_j.size());
            for (const auto& vec : nd.pf.e_j) {
                w.u64v(vec.size());
                for (const auto& gt : vec) w.gt(gt);
            }
            write_acc(w, nd.result);
        }
        w.u64v(g.tree.depth);
    }
    w.u64v(b.standalone.size());
    for (const auto& sp : b.standalone) {
        w.u8((uint8_t)sp.type);
        w.u64v(sp.node);
        switch (sp.type) {
            case StandaloneProof::BOOLEAN: write_iop(w, sp.boolean); break;
            case StandaloneProof::MAXPROOF: write_max(w, sp.max); break;
            case StandaloneProof::COPY: write_copy(w, sp.copy); break;
        }
    }
    return std::move(w.buf);
}

ProofBundle deserialize_bundle(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_tag("ZKTPRF01");
    ProofBundle b;
    std::memcpy(b.model_hash.data(), r.take(32), 32);
    std::memcpy(b.srs_hash.data(), r.take(32), 32);
    b.scale_bits = r.u32();
    b.seed = r.u64v();
    size_t ne = r.u64v();
    if (ne > 1u << 20) throw FormatError("too many edges");
    for (size_t i = 0; i < ne; ++i) {
        uint32_t e = r.u32();
        size_t rows = r.u64v();
        if (rows > 1u << 20) throw FormatError("too many rows");
        std::vector<G1> coms(rows);
        for (auto& c : coms) c = r.g1();
        b.edge_coms[e] = std::move(coms);
    }
    size_t no = r.u64v();
    if (no > 1u << 16) throw FormatError("too many outputs");
    for (size_t i = 0; i < no; ++i) {
        size_t cnt = r.u64v();
        if (cnt > 1u << 24) throw FormatError("output too large");
        std::vector<int64_t> vals(cnt);
        for (auto& v : vals) v = (int64_t)r.u64v();
        b.outputs.push_back(std::move(vals));
    }
    size_t ng = r.u64v();
    if (ng > 1u << 12) throw FormatError("too many groups");
    for (size_t i = 0; i < ng; ++i) {
        FoldGroup g;
        g.key = r.str();
        g.kind = (BlockKind)r.u8();
        size_t nn = r.u64v();
        if (nn > 1u << 20) throw FormatError("group too large");
        g.node_indices.resize(nn);
        for (auto& idx : g.node_indices) idx = r.u64v();
        size_t nl = r.u64v();
        if (nl > 1u << 20) throw FormatError("too many leaves");
        g.tree.leaves.resize(nl);
        for (auto& l : g.tree.leaves) l = read_acc(r);
        size_t nfn = r.u64v();
        if (nfn > 1u << 20) throw FormatError("too many fold nodes");
        g.tree.nodes.resize(nfn);
        for (auto& nd : g.tree.nodes) {
            size_t nj = r.u64v();
            if (nj > 8) throw FormatError("too many correction vectors");
            nd.pf.e_j.resize(nj);
            for (auto& vec : nd.pf.e_j) {
                size_t nv = r.u64v();
                if (nv > 64) throw FormatError("correction vector too long");
                vec.resize(nv);
                for (auto& gt : vec) gt = r.gt();
            }
            nd.result = read_acc(r);
        }
        g.tree.depth = r.u64v();
        // rebuild left/right children from the deterministic reduction shape
        std::vector<Accumulator*> level;
        for (auto& l : g.tree.leaves) level.push_back(&l);
        size_t cursor = 0;
        while (level.size() > 1) {
            size_t pairs = level.size() / 2;
            std::vector<Accumulator*> up;
            for (size_t p = 0; p < pairs; ++p) {
                if (cursor >= g.tree.nodes.size()) throw FormatError("fold tree shape mismatch");
                g.tree.nodes[cursor].left = *level[2 * p];
                g.tree.nodes[cursor].right = *level[2 * p + 1];
                up.push_back(&g.tree.nodes[cursor].result);
                ++cursor;
            }
            if (level.size() % 2 == 1) up.push_back(level.back());
            level = std::move(up);
        }
        if (cursor != g.tree.nodes.size()) throw FormatError("fold tree shape mismatch");
        b.groups.push_back(std::move(g));
    }
    size_t ns = r.u64v();
    if (ns > 1u << 20) throw FormatError("too many standalone proofs");
    for (size_t i = 0; i < ns; ++i) {
        StandaloneProof sp;
        sp.type = (StandaloneProof::Type)r.u8();
        sp.node = r.u64v();
        switch (sp.type) {
            case StandaloneProof::BOOLEAN: sp.boolean = read_iop(r); break;
            case StandaloneProof::MAXPROOF: sp.max = read_max(r); break;
            case StandaloneProof::COPY: sp.copy = read_copy(r); break;
            default: throw FormatError("unknown standalone proof type");
        }
        b.standalone.push_back(std::move(sp));
    }
    if (!r.done()) throw FormatError("trailing bytes in proof bundle");
    return b;
}

}  // namespace zkt
