#include "transpile.hpp"

#include <set>

#include <openssl/sha.h>

#include "json.hpp"
#include "serial.hpp"

namespace zkt {

using nlohmann::json;

std::string TableSpec::key() const {
    return std::string(quant_fn_name(fn)) + "/" + std::to_string(param) + "/" +
           std::to_string(lo) + ".." + std::to_string(hi) + "/s" + std::to_string(scale_bits) +
           (pair ? "/pair" : "/set");
}

std::vector<Fr> TableSpec::in_column() const {
    std::vector<Fr> out;
    out.reserve(size);
    for (int64_t v = lo; v <= hi; ++v) out.push_back(field_encode(v));
    while (out.size() < size) out.push_back(field_encode(lo));  // duplicate padding
    return out;
}

std::vector<Fr> TableSpec::out_column() const {
    std::vector<Fr> out;
    out.reserve(size);
    for (int64_t v = lo; v <= hi; ++v)
        out.push_back(field_encode(quant_apply(fn, v, scale_bits, param)));
    while (out.size() < size) out.push_back(field_encode(quant_apply(fn, lo, scale_bits, param)));
    return out;
}

std::string MatrixSpec::key() const {
    ByteWriter w;
    for (const auto& r : rows)
        for (int64_t v : r) w.u64v((u64)v);
    w.u64v(rows.size());
    std::array<uint8_t, 32> d;
    SHA256(w.buf.data(), w.buf.size(), d.data());
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (uint8_t b : d) {
        s.push_back(hex[b >> 4]);
        s.push_back(hex[b & 15]);
    }
    return s;
}

int LookupTablePlan::intern_table(const TableSpec& t) {
    for (size_t i = 0; i < tables.size(); ++i)
        if (tables[i].key() == t.key()) return (int)i;
    tables.push_back(t);
    return (int)tables.size() - 1;
}

int LookupTablePlan::intern_matrix(MatrixSpec m) {
    std::string k = m.key();
    for (size_t i = 0; i < matrices.size(); ++i)
        if (matrices[i].key() == k) return (int)i;
    matrices.push_back(std::move(m));
    return (int)matrices.size() - 1;
}

namespace {

struct Binding {
    int edge = -1;
    bool channels_last = false;
    size_t B = 0, C = 0, Hg = 0, Wg = 0;  // grid when channels_last
};

struct Lowerer {
    const ModelGraph& g;
    int s;
    BlockDag dag;
    std::map<std::string, Binding> bind;
    std::map<std::string, int> const_cache;
    std::set<std::string> fused_away;
    int64_t input_bound;

    explicit Lowerer(const ModelGraph& graph, int scale_bits)
        : g(graph), s(scale_bits), input_bound(1ll << (scale_bits + 2)) {
        dag.scale_bits = scale_bits;
    }

    DagEdge make_edge(const std::string& name, EdgeClass cls, size_t rows, size_t len, int scale,
                      int64_t lo, int64_t hi) {
        DagEdge e;
        e.name = name;
        e.cls = cls;
        e.rows = rows;
        e.len = len;
        e.plen = next_pow2(len);
        e.scale_bits = scale;
        e.lo = lo;
        e.hi = hi;
        return e;
    }

    int const_edge(int64_t value, size_t len, int scale) {
        std::string key = "c/" + std::to_string(value) + "/" + std::to_string(len) + "/" +
                          std::to_string(scale);
        auto it = const_cache.find(key);
        if (it != const_cache.end()) return it->second;
        DagEdge e = make_edge(key, EdgeClass::Const, 1, len, scale, value, value);
        e.const_data.assign(len, value);
        int id = dag.add_edge(std::move(e));
        const_cache[key] = id;
        return id;
    }

    // weight edge from an initializer laid out as rows x len
    int weight_edge(const std::string& name, const ScaledTensor& t, size_t rows, size_t len,
                    int scale, int lift_bits = 0) {
        DagEdge e = make_edge("w/" + name, EdgeClass::Weight, rows, len, scale, 0, 0);
        e.const_data.reserve(rows * len);
        int64_t lo = 0, hi = 0;
        for (int64_t v : t.data) {
            int64_t lifted = v << lift_bits;
            e.const_data.push_back(lifted);
            lo = std::min(lo, lifted);
            hi = std::max(hi, lifted);
        }
        e.lo = lo;
        e.hi = hi;
        return dag.add_edge(std::move(e));
    }

    const DagEdge& E(int id) const { return dag.edges[(size_t)id]; }
    DagEdge& E(int id) { return dag.edges[(size_t)id]; }

    // ------------------------------------------------------------------
    // small lowering helpers

    int rescale_rows(int src, QuantFn fn, int param, int out_scale, const std::string& layer) {
        const DagEdge& e = E(src);
        TableSpec spec;
        spec.pair = true;
        spec.fn = fn;
        spec.param = param;
        spec.lo = e.lo;
        spec.hi = e.hi;
        spec.scale_bits = e.scale_bits;
        spec.size = next_pow2((size_t)(e.hi - e.lo + 1));
        if (spec.size < e.plen) spec.size = e.plen;
        if (spec.size > ((size_t)1 << dag.max_table_bits))
            throw ConfigError("range-plan error: table for " + layer + " needs " +
                              std::to_string(spec.size) + " entries");
        int64_t olo = INT64_MAX, ohi = INT64_MIN;
        for (int64_t v : {e.lo, e.hi, (int64_t)0}) {
            if (v < e.lo || v > e.hi) continue;
            int64_t o = quant_apply(fn, v, e.scale_bits, param);
            olo = std::min(olo, o);
            ohi = std::max(ohi, o);
        }
        // non-monotone functions: sweep table endpoints cheaply
        for (int64_t v = e.lo; v <= e.hi; v += std::max<int64_t>(1, (e.hi - e.lo) / 64)) {
            int64_t o = quant_apply(fn, v, e.scale_bits, param);
            olo = std::min(olo, o);
            ohi = std::max(ohi, o);
        }
        int table = dag.plan.intern_table(spec);
        int out = dag.add_edge(make_edge(e.name + "/" + quant_fn_name(fn), EdgeClass::Witness,
                                         e.rows, e.len, out_scale, olo, ohi));
        for (size_t r = 0; r < e.rows; ++r) {
            DagNode n;
            n.kind = BlockKind::Cq2;
            n.layer = layer;
            n.table = table;
            n.n = e.plen;
            n.ins = {{src, r}};
            n.outs = {{out, r}};
            dag.nodes.push_back(std::move(n));
        }
        return out;
    }

    int add_rows(int a, int b, const std::string& layer, EdgeClass cls = EdgeClass::Witness) {
        const DagEdge& ea = E(a);
        const DagEdge& eb = E(b);
        if (ea.plen != eb.plen) throw ShapeError("add: row length mismatch in " + layer);
        size_t rows = std::max(ea.rows, eb.rows);
        int out = dag.add_edge(make_edge(ea.name + "+", cls, rows, ea.len, ea.scale_bits,
                                         ea.lo + eb.lo, ea.hi + eb.hi));
        for (size_t r = 0; r < rows; ++r) {
            DagNode n;
            n.kind = BlockKind::Add;
            n.layer = layer;
            n.n = ea.plen;
            n.ins = {{a, r % ea.rows}, {b, r % eb.rows}};
            n.outs = {{out, r}};
            dag.nodes.push_back(std::move(n));
        }
        return out;
    }

    int sub_rows(int a, int b, const std::string& layer) {
        const DagEdge& ea = E(a);
        const DagEdge& eb = E(b);
        size_t rows = std::max(ea.rows, eb.rows);
        int out = dag.add_edge(make_edge(ea.name + "-", EdgeClass::Witness, rows, ea.len,
                                         ea.scale_bits, ea.lo - eb.hi, ea.hi - eb.lo));
        for (size_t r = 0; r < rows; ++r) {
            DagNode n;
            n.kind = BlockKind::Sub;
            n.layer = layer;
            n.n = ea.plen;
            n.ins = {{a, r % ea.rows}, {b, r % eb.rows}};
            n.outs = {{out, r}};
            dag.nodes.push_back(std::move(n));
        }
        return out;
    }

    int mul_rows(int a, int b, const std::string& layer) {
        const DagEdge& ea = E(a);
        const DagEdge& eb = E(b);
        size_t rows = std::max(ea.rows, eb.rows);
        int64_t m1 = std::max(std::abs(ea.lo), std::abs(ea.hi));
        int64_t m2 = std::max(std::abs(eb.lo), std::abs(eb.hi));
        int out = dag.add_edge(make_edge(ea.name + "*", EdgeClass::Witness, rows, ea.len,
                                         ea.scale_bits + eb.scale_bits, -m1 * m2, m1 * m2));
        for (size_t r = 0; r < rows; ++r) {
            DagNode n;
            n.kind = BlockKind::Mul;
            n.layer = layer;
            n.n = ea.plen;
            n.ins = {{a, r % ea.rows}, {b, r % eb.rows}};
            n.outs = {{out, r}};
            dag.nodes.push_back(std::move(n));
        }
        return out;
    }

    int mulconst_rows(int a, int64_t cval, int cscale, const std::string& layer) {
        const DagEdge& ea = E(a);
        int out = dag.add_edge(make_edge(ea.name + "*c", EdgeClass::Witness, ea.rows, ea.len,
                                         ea.scale_bits + cscale,
                                         std::min({ea.lo * cval, ea.hi * cval}),
                                         std::max({ea.lo * cval, ea.hi * cval})));
        for (size_t r = 0; r < ea.rows; ++r) {
            DagNode n;
            n.kind = BlockKind::MulConst;
            n.layer = layer;
            n.n = ea.plen;
            n.cconst = field_encode(cval);
            n.ins = {{a, r}};
            n.outs = {{out, r}};
            dag.nodes.push_back(std::move(n));
        }
        return out;
    }

    // fixed-matrix product: y rows = x rows * M^T, with padding to pow2 dims
    int cqlin_rows(int x, const std::vector<std::vector<int64_t>>& mat, const std::string& layer,
                   size_t logical_out) {
        const DagEdge& ex = E(x);
        size_t I = ex.plen;
        size_t O = next_pow2(mat.size());
        MatrixSpec spec;
        spec.rows.assign(O, std::vector<int64_t>(I, 0));
        int64_t wmax = 0;
        int64_t l1 = 0;
        for (size_t o = 0; o < mat.size(); ++o) {
            int64_t rowsum = 0;
            for (size_t j = 0; j < mat[o].size(); ++j) {
                spec.rows[o][j] = mat[o][j];
                rowsum += std::abs(mat[o][j]);
                wmax = std::max(wmax, std::abs(mat[o][j]));
            }
            l1 = std::max(l1, rowsum);
        }
        int matrix = dag.plan.intern_matrix(std::move(spec));
        int64_t xb = std::max(std::abs(ex.lo), std::abs(ex.hi));
        int out = dag.add_edge(make_edge(ex.name + "@M", EdgeClass::Witness, ex.rows, logical_out,
                                         ex.scale_bits + s, -l1 * xb, l1 * xb));
        E(out).plen = O;
        DagNode n;
        n.kind = BlockKind::CqLin;
        n.layer = layer;
        n.matrix = matrix;
        n.n = I;
        n.ins = {{x, EdgeRef::WHOLE}};
        n.outs = {{out, EdgeRef::WHOLE}};
        dag.nodes.push_back(std::move(n));
        return out;
    }

    // sum over a row -> broadcast scalar edge
    int sum_rows(int a, const std::string& layer) {
        const DagEdge& ea = E(a);
        int64_t n64 = (int64_t)ea.plen;
        int out = dag.add_edge(make_edge(ea.name + "/sum", EdgeClass::Bcast, ea.rows, 1,
                                         ea.scale_bits, ea.lo * n64, ea.hi * n64));
        for (size_t r = 0; r < ea.rows; ++r) {
            DagNode n;
            n.kind = BlockKind::Sum;
            n.layer = layer;
            n.n = ea.plen;
            n.ins = {{a, r}};
            n.outs = {{out, r}};
            dag.nodes.push_back(std::move(n));
        }
        return out;
    }

    // max over a row -> broadcast scalar edge (MaxProof composite)
    int max_rows(int a, const std::string& layer) {
        const DagEdge& ea = E(a);
        // sorted-difference range table (nonpositive values)
        TableSpec dir;
        dir.pair = false;
        dir.fn = QuantFn::Identity;
        dir.lo = std::min<int64_t>(ea.lo - ea.hi, -1);
        dir.hi = 0;
        dir.scale_bits = ea.scale_bits;
        dir.size = next_pow2((size_t)(dir.hi - dir.lo + 1));
        if (dir.size < ea.plen) dir.size = ea.plen;
        if (dir.size > ((size_t)1 << dag.max_table_bits))
            throw ConfigError("range-plan error: max-difference table too large in " + layer);
        int table = dag.plan.intern_table(dir);
        int out = dag.add_edge(
            make_edge(ea.name + "/max", EdgeClass::Bcast, ea.rows, 1, ea.scale_bits, ea.lo, ea.hi));
        for (size_t r = 0; r < ea.rows; ++r) {
            DagNode n;
            n.kind = BlockKind::MaxProof;
            n.layer = layer;
            n.table = table;
            n.n = ea.plen;
            n.ins = {{a, r}};
            n.outs = {{out, r}};
            dag.nodes.push_back(std::move(n));
        }
        return out;
    }

    // q = floor(a<<s / b), r remainder; emits the batched div component blocks
    std::pair<int, int> div_rows(int a, int b, const std::string& layer) {
        int a2 = mulconst_rows(a, 1ll << s, s, layer);  // lift to 2s
        const DagEdge& ea2 = E(a2);
        const DagEdge& eb = E(b);
        size_t rows = std::max(ea2.rows, eb.rows);
        // q bounded by a2/b_min ~ conservative: |q| <= |a2|
        int q = dag.add_edge(make_edge(ea2.name + "/q", EdgeClass::Witness, rows, ea2.len,
                                       ea2.scale_bits - eb.scale_bits,
                                       std::min<int64_t>(ea2.lo, 0), std::max<int64_t>(ea2.hi, 0)));
        int64_t rmax = std::max<int64_t>(std::max(std::abs(eb.lo), std::abs(eb.hi)), 1);
        int r = dag.add_edge(
            make_edge(ea2.name + "/r", EdgeClass::Witness, rows, ea2.len, ea2.scale_bits, 0, rmax));
        // prod = q*b must equal a2 - r; prove q*b = prod, prod + r = a2
        int64_t pm = std::max(std::abs(ea2.lo), std::abs(ea2.hi)) + rmax;
        int prod = dag.add_edge(make_edge(ea2.name + "/qb", EdgeClass::Witness, rows, ea2.len,
                                          ea2.scale_bits, -pm, pm));
        E(q).rec_role = 'q';
        E(q).rec_a = a2;
        E(q).rec_b = b;
        E(r).rec_role = 'r';
        E(r).rec_a = a2;
        E(r).rec_b = b;
        E(r).rec_prod = prod;
        size_t plen = ea2.plen;
        TableSpec range;
        range.pair = false;
        range.fn = QuantFn::Identity;
        range.lo = 0;
        range.hi = rmax;
        range.scale_bits = eb.scale_bits;
        range.size = next_pow2((size_t)(rmax + 1));
        if (range.size < plen) range.size = plen;
        if (range.size > ((size_t)1 << dag.max_table_bits))
            throw ConfigError("range-plan error: div remainder table too large in " + layer);
        int table = dag.plan.intern_table(range);
        int ones = const_edge(1, E(b).len, eb.scale_bits);
        int bm1 = sub_rows(b, ones, layer);
        int br = sub_rows(bm1, r, layer);
        for (size_t row = 0; row < rows; ++row) {
            DagNode mn;
            mn.kind = BlockKind::Mul;
            mn.layer = layer;
            mn.n = plen;
            mn.ins = {{q, row % E(q).rows}, {b, row % eb.rows}};
            mn.outs = {{prod, row}};
            dag.nodes.push_back(std::move(mn));
            DagNode an;
            an.kind = BlockKind::Add;
            an.layer = layer;
            an.n = plen;
            an.ins = {{prod, row}, {r, row}};
            an.outs = {{a2, row % ea2.rows}};
            dag.nodes.push_back(std::move(an));
            DagNode c1;
            c1.kind = BlockKind::Cq;
            c1.layer = layer;
            c1.table = table;
            c1.n = plen;
            c1.ins = {{r, row}};
            dag.nodes.push_back(std::move(c1));
            DagNode c2;
            c2.kind = BlockKind::Cq;
            c2.layer = layer;
            c2.table = table;
            c2.n = plen;
            c2.ins = {{br, row}};
            dag.nodes.push_back(std::move(c2));
        }
        return {q, r};
    }

    int relabel(const std::string& name, const std::vector<std::vector<EdgeRef>>& rows, size_t len,
                int scale, int64_t lo, int64_t hi) {
        DagEdge e = make_edge(name, EdgeClass::Derived, rows.size(), len, scale, lo, hi);
        e.derivation = rows;
        return dag.add_edge(std::move(e));
    }

    // ------------------------------------------------------------------
    // per-layer lowering

    void lower_node(const GraphNode& n);
    void run();
    Binding input_binding(const GraphNode& n, size_t idx) {
        auto it = bind.find(n.inputs[idx]);
        if (it == bind.end())
            throw UnsupportedLayerError("transpiler: input " + n.inputs[idx] + " of node " +
                                        n.name + " has no lowering");
        return it->second;
    }
};

void Lowerer::run() {
    for (const auto& name : g.graph_inputs) {
        auto shp = g.value_shapes.at(name);
        if (shp.size() == 4) {
            // channels-last conv layout: rows = B*H*W, len = C
            size_t B = shp[0], C = shp[1], H = shp[2], W = shp[3];
            DagEdge e = make_edge("in/" + name, EdgeClass::Witness, B * H * W, C, s, -input_bound,
                                  input_bound);
            int id = dag.add_edge(std::move(e));
            bind[name] = Binding{id, true, B, C, H, W};
            dag.input_edges.push_back(id);
        } else {
            size_t rows = 1, len = shp.empty() ? 1 : shp.back();
            for (size_t i = 0; i + 1 < shp.size(); ++i) rows *= shp[i];
            DagEdge e =
                make_edge("in/" + name, EdgeClass::Witness, rows, len, s, -input_bound,
                          input_bound);
            int id = dag.add_edge(std::move(e));
            bind[name] = Binding{id};
            dag.input_edges.push_back(id);
        }
    }
    for (const auto& n : g.nodes) lower_node(n);
    for (const auto& name : g.graph_outputs) {
        auto it = bind.find(name);
        if (it == bind.end()) throw ShapeError("graph output " + name + " was not lowered");
        // outputs are revealed: re-class terminal edge
        DagEdge& e = E(it->second.edge);
        if (e.cls == EdgeClass::Witness || e.cls == EdgeClass::Bcast) e.cls = EdgeClass::Output;
        dag.output_edges.push_back(it->second.edge);
    }
}

void Lowerer::lower_node(const GraphNode& n) {
    const std::string& op = n.op;
    if (fused_away.count(n.name)) return;

    auto simple_table = [&](QuantFn fn) {
        Binding in = input_binding(n, 0);
        int out = rescale_rows(in.edge, fn, 0, s, n.name);
        Binding b = in;
        b.edge = out;
        bind[n.outputs[0]] = b;
    };

    if (op == "Relu") {
        simple_table(QuantFn::Relu);
    } else if (op == "Gelu") {
        simple_table(QuantFn::Gelu);
    } else if (op == "Tanh") {
        simple_table(QuantFn::Tanh);
    } else if (op == "Sigmoid") {
        simple_table(QuantFn::Sigmoid);
    } else if (op == "Exp") {
        simple_table(QuantFn::Exp);
    } else if (op == "Pow") {
        if (n.attr_int("exponent", 3) != 3)
            throw UnsupportedLayerError("Pow exponent != 3 at " + n.name);
        simple_table(QuantFn::Cube);
    } else if (op == "Identity") {
        bind[n.outputs[0]] = input_binding(n, 0);
    } else if (op == "Add" || op == "Sub" || op == "Mul") {
        Binding a = input_binding(n, 0);
        // scalar initializer operand becomes MulConst / constant-poly Add
        bool b_is_scalar_init =
            g.is_initializer(n.inputs[1]) && g.initializers.at(n.inputs[1]).numel() == 1;
        if (op == "Mul" && b_is_scalar_init) {
            int64_t c = g.initializers.at(n.inputs[1]).data[0];
            int prod = mulconst_rows(a.edge, c, s, n.name);
            int out = rescale_rows(prod, QuantFn::Rescale, s, s, n.name);
            Binding b = a;
            b.edge = out;
            bind[n.outputs[0]] = b;
            return;
        }
        int bedge;
        if (g.is_initializer(n.inputs[1])) {
            const ScaledTensor& t = g.initializers.at(n.inputs[1]);
            if (t.numel() == 1) {
                bedge = const_edge(t.data[0], E(a.edge).len, t.scale_bits);
            } else {
                bedge = weight_edge(n.inputs[1], t, t.rows(), t.row_len(), t.scale_bits);
            }
        } else {
            bedge = input_binding(n, 1).edge;
        }
        int out;
        if (op == "Add")
            out = add_rows(a.edge, bedge, n.name);
        else if (op == "Sub")
            out = sub_rows(a.edge, bedge, n.name);
        else {
            int prod = mul_rows(a.edge, bedge, n.name);
            out = rescale_rows(prod, QuantFn::Rescale, s, s, n.name);
        }
        Binding b = a;
        b.edge = out;
        bind[n.outputs[0]] = b;
    } else if (op == "And") {
        Binding a = input_binding(n, 0);
        Binding b = input_binding(n, 1);
        // boolean check both inputs, then pointwise product (scale 0)
        for (int e : {a.edge, b.edge}) {
            for (size_t r = 0; r < E(e).rows; ++r) {
                DagNode bn;
                bn.kind = BlockKind::BooleanCheck;
                bn.layer = n.name;
                bn.n = E(e).plen;
                bn.ins = {{e, r}};
                dag.nodes.push_back(std::move(bn));
            }
        }
        int out = mul_rows(a.edge, b.edge, n.name);
        E(out).scale_bits = 0;
        E(out).lo = 0;
        E(out).hi = 1;
        Binding ob = a;
        ob.edge = out;
        bind[n.outputs[0]] = ob;
    } else if (op == "Eq") {
        Binding a = input_binding(n, 0);
        Binding b = input_binding(n, 1);
        for (size_t r = 0; r < E(a.edge).rows; ++r) {
            DagNode en;
            en.kind = BlockKind::Eq;
            en.layer = n.name;
            en.n = E(a.edge).plen;
            en.ins = {{a.edge, r}, {b.edge, r % E(b.edge).rows}};
            dag.nodes.push_back(std::move(en));
        }
        bind[n.outputs[0]] = a;
    } else if (op == "Div" || op == "Mod") {
        Binding a = input_binding(n, 0);
        int bedge = g.is_initializer(n.inputs[1])
                        ? weight_edge(n.inputs[1], g.initializers.at(n.inputs[1]),
                                      g.initializers.at(n.inputs[1]).rows(),
                                      g.initializers.at(n.inputs[1]).row_len(), s)
                        : input_binding(n, 1).edge;
        auto [q, r] = div_rows(a.edge, bedge, n.name);
        Binding ob = a;
        ob.edge = op == "Div" ? q : r;
        bind[n.outputs[0]] = ob;
    } else if (op == "Gemm") {
        Binding x = input_binding(n, 0);
        const ScaledTensor& w = g.initializers.at(n.inputs[1]);
        size_t N = w.shape[0], K = w.shape[1];
        std::vector<std::vector<int64_t>> mat(N, std::vector<int64_t>(K));
        for (size_t o = 0; o < N; ++o)
            for (size_t k = 0; k < K; ++k) mat[o][k] = w.data[o * K + k];
        int y = cqlin_rows(x.edge, mat, n.name, N);
        if (n.inputs.size() > 2 && !n.inputs[2].empty()) {
            const ScaledTensor& bt = g.initializers.at(n.inputs[2]);
            int bedge = weight_edge(n.inputs[2], bt, 1, bt.numel(), 2 * s, s);
            E(bedge).plen = E(y).plen;
            y = add_rows(y, bedge, n.name);
        }
        // fuse a following ReLU into the rescale table
        bool fuse_relu = false;
        auto cons = g.consumers(n.outputs[0]);
        if (cons.size() == 1 && g.nodes[cons[0]].op == "Relu") fuse_relu = true;
        int out = rescale_rows(y, fuse_relu ? QuantFn::ReluRescale : QuantFn::Rescale, s, s,
                               n.name);
        Binding ob;
        ob.edge = out;
        bind[fuse_relu ? g.nodes[cons[0]].outputs[0] : n.outputs[0]] = ob;
        if (fuse_relu) {
            bind[n.outputs[0]] = ob;
            fused_away.insert(g.nodes[cons[0]].name);
        }
    } else if (op == "MatMul") {
        Binding a = input_binding(n, 0);
        Binding bb = input_binding(n, 1);
        // transpose B via Permute, then MatMul over rows
        const DagEdge& be = E(bb.edge);
        size_t K = be.rows, Nn = be.len;
        size_t Np = next_pow2(Nn), Kp = be.plen;
        int bt = dag.add_edge(make_edge(be.name + "^T", EdgeClass::Witness, Np, K, be.scale_bits,
                                        be.lo, be.hi));
        E(bt).plen = Kp;
        {
            DagNode pn;
            pn.kind = BlockKind::Permute;
            pn.layer = n.name;
            pn.n = Np;  // A-side row length (source grid)
            // source grid rows=K, cols=Np (padded); dest rows=Np, cols=Kp
            for (size_t r2 = 0; r2 < Np; ++r2) pn.p0.push_back(r2);
            for (size_t c2 = 0; c2 < Kp; ++c2) pn.p1.push_back(c2 * Np);
            pn.ins = {{bb.edge, EdgeRef::WHOLE}};
            pn.outs = {{bt, EdgeRef::WHOLE}};
            dag.nodes.push_back(std::move(pn));
        }
        const DagEdge& ae = E(a.edge);
        int64_t xb = std::max(std::abs(ae.lo), std::abs(ae.hi));
        int64_t yb = std::max(std::abs(be.lo), std::abs(be.hi));
        int64_t bound = (int64_t)Kp * xb * yb;
        int c = dag.add_edge(make_edge(ae.name + "@", EdgeClass::Witness, ae.rows, Nn,
                                       ae.scale_bits + be.scale_bits, -bound, bound));
        E(c).plen = Np;
        DagNode mm;
        mm.kind = BlockKind::MatMul;
        mm.layer = n.name;
        mm.n = Kp;
        mm.ins = {{a.edge, EdgeRef::WHOLE}, {bt, EdgeRef::WHOLE}};
        mm.outs = {{c, EdgeRef::WHOLE}};
        dag.nodes.push_back(std::move(mm));
        int out = rescale_rows(c, QuantFn::Rescale, s, s, n.name);
        Binding ob;
        ob.edge = out;
        bind[n.outputs[0]] = ob;
    } else if (op == "Conv" || op == "CustomConv" || op == "ConcatConv") {
        Binding x = input_binding(n, 0);
        if (!x.channels_last)
            throw UnsupportedLayerError("conv input must be in channels-last layout at " + n.name);
        const ScaledTensor& w = g.initializers.at(n.inputs[1]);
        size_t O = w.shape[0], C = w.shape[1], kh = w.shape[2], kw = w.shape[3];
        if (C != x.C) throw ShapeError("conv channel mismatch at " + n.name);
        size_t pad = (size_t)n.attr_int("pad", 0);
        size_t B = x.B, H = x.Hg, W = x.Wg;
        int src = x.edge;
        size_t HP = H, WP = W;
        if (pad > 0) {
            // zero-extended grid: border rows have empty derivations
            HP = H + 2 * pad;
            WP = W + 2 * pad;
            std::vector<std::vector<EdgeRef>> rows(B * HP * WP);
            for (size_t b2 = 0; b2 < B; ++b2)
                for (size_t i = 0; i < H; ++i)
                    for (size_t j = 0; j < W; ++j)
                        rows[(b2 * HP + i + pad) * WP + j + pad] = {
                            {x.edge, (b2 * H + i) * W + j}};
            src = relabel(E(x.edge).name + "/pad", rows, E(x.edge).len, E(x.edge).scale_bits,
                          E(x.edge).lo, E(x.edge).hi);
        }
        // kh*kw fixed-matrix products
        std::vector<int> slices;
        for (size_t p = 0; p < kh; ++p)
            for (size_t q = 0; q < kw; ++q) {
                std::vector<std::vector<int64_t>> mat(O, std::vector<int64_t>(C));
                for (size_t o = 0; o < O; ++o)
                    for (size_t c2 = 0; c2 < C; ++c2)
                        mat[o][c2] = w.data[((o * C + c2) * kh + p) * kw + q];
                slices.push_back(cqlin_rows(src, mat, n.name, O));
            }
        // window selection: free homomorphic sums
        size_t HO = HP - kh + 1, WO = WP - kw + 1;
        std::vector<std::vector<EdgeRef>> sel(B * HO * WO);
        int64_t lo = 0, hi = 0;
        for (int sl : slices) {
            lo += E(sl).lo;
            hi += E(sl).hi;
        }
        for (size_t b2 = 0; b2 < B; ++b2)
            for (size_t r2 = 0; r2 < HO; ++r2)
                for (size_t c2 = 0; c2 < WO; ++c2) {
                    auto& terms = sel[(b2 * HO + r2) * WO + c2];
                    size_t si = 0;
                    for (size_t p = 0; p < kh; ++p)
                        for (size_t q = 0; q < kw; ++q, ++si)
                            terms.push_back(
                                {slices[si], (b2 * HP + r2 + p) * WP + (c2 + q)});
                }
        int ypre = relabel(E(src).name + "/conv", sel, O, 2 * s, lo, hi);
        if (n.inputs.size() > 2 && !n.inputs[2].empty()) {
            const ScaledTensor& bt = g.initializers.at(n.inputs[2]);
            int bedge = weight_edge(n.inputs[2], bt, 1, bt.numel(), 2 * s, s);
            E(bedge).plen = E(ypre).plen;
            ypre = add_rows(ypre, bedge, n.name);
        }
        bool fuse_relu = false;
        auto cons = g.consumers(n.outputs[0]);
        if (cons.size() == 1 && g.nodes[cons[0]].op == "Relu") fuse_relu = true;
        int out = rescale_rows(ypre, fuse_relu ? QuantFn::ReluRescale : QuantFn::Rescale, s, s,
                               n.name);
        Binding ob;
        ob.edge = out;
        ob.channels_last = true;
        ob.B = B;
        ob.C = O;
        ob.Hg = HO;
        ob.Wg = WO;
        bind[fuse_relu ? g.nodes[cons[0]].outputs[0] : n.outputs[0]] = ob;
        if (fuse_relu) {
            bind[n.outputs[0]] = ob;
            fused_away.insert(g.nodes[cons[0]].name);
        }
    } else if (op == "GlobalSumPool") {
        Binding x = input_binding(n, 0);
        if (!x.channels_last) throw UnsupportedLayerError("GlobalSumPool needs conv layout");
        std::vector<std::vector<EdgeRef>> rows(x.B);
        for (size_t b2 = 0; b2 < x.B; ++b2)
            for (size_t i = 0; i < x.Hg * x.Wg; ++i)
                rows[b2].push_back({x.edge, b2 * x.Hg * x.Wg + i});
        int64_t k = (int64_t)(x.Hg * x.Wg);
        int out = relabel(E(x.edge).name + "/gsp", rows, E(x.edge).len, E(x.edge).scale_bits,
                          E(x.edge).lo * k, E(x.edge).hi * k);
        Binding ob;
        ob.edge = out;
        bind[n.outputs[0]] = ob;
    } else if (op == "Softmax") {
        Binding x = input_binding(n, 0);
        int mx = max_rows(x.edge, n.name);
        int shifted = sub_rows(x.edge, mx, n.name);
        E(shifted).lo = std::min<int64_t>(E(shifted).lo, -1);
        E(shifted).hi = 0;  // x - max <= 0
        int ex = rescale_rows(shifted, QuantFn::Exp, 0, s, n.name);
        int tot = sum_rows(ex, n.name);
        E(tot).lo = std::max<int64_t>(E(tot).lo, 1);
        auto [q, r] = div_rows(ex, tot, n.name);
        (void)r;
        Binding ob;
        ob.edge = q;
        bind[n.outputs[0]] = ob;
    } else if (op == "ReduceSum") {
        Binding x = input_binding(n, 0);
        Binding ob;
        ob.edge = sum_rows(x.edge, n.name);
        bind[n.outputs[0]] = ob;
    } else if (op == "ReduceMax") {
        Binding x = input_binding(n, 0);
        Binding ob;
        ob.edge = max_rows(x.edge, n.name);
        bind[n.outputs[0]] = ob;
    } else if (op == "ArgMax") {
        Binding x = input_binding(n, 0);
        const DagEdge& ex = E(x.edge);
        int mx = max_rows(x.edge, n.name);
        // index edge: public output data; the selection CopyConstraint binds
        // max-broadcast to f at the claimed index at verification time
        int idx = dag.add_edge(make_edge(ex.name + "/argmax", EdgeClass::Output, ex.rows, 1, 0, 0,
                                         (int64_t)ex.plen - 1));
        E(idx).rec_role = 'i';
        E(idx).rec_a = x.edge;
        for (size_t r = 0; r < ex.rows; ++r) {
            DagNode cc;
            cc.kind = BlockKind::CopyConstraint;
            cc.layer = n.name;
            cc.cc_m = ex.plen;
            cc.cc_n = 1;
            cc.cc_sigma_from_output = true;
            cc.ins = {{x.edge, r}, {idx, r}};
            cc.outs = {{mx, r}};
            dag.nodes.push_back(std::move(cc));
        }
        Binding ob;
        ob.edge = idx;
        bind[n.outputs[0]] = ob;
    } else if (op == "Reshape" || op == "Transpose" || op == "ReshapeTrans") {
        Binding x = input_binding(n, 0);
        const DagEdge& ex = E(x.edge);
        auto in_shape = g.value_shapes.at(n.inputs[0]);
        std::vector<size_t> mid_shape = in_shape;
        std::vector<size_t> perm;
        if (op != "Transpose") {
            mid_shape.clear();
            for (auto v : n.attrs.at("shape").ints) mid_shape.push_back((size_t)v);
        }
        if (op != "Reshape")
            for (auto v : n.attrs.at("perm").ints) perm.push_back((size_t)v);
        else {
            perm.resize(mid_shape.size());
            for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        }
        std::vector<size_t> out_shape(perm.size());
        for (size_t i = 0; i < perm.size(); ++i) out_shape[i] = mid_shape[perm[i]];
        size_t out_len = out_shape.empty() ? 1 : out_shape.back();
        size_t out_rows = 1;
        for (size_t i = 0; i + 1 < out_shape.size(); ++i) out_rows *= out_shape[i];

        bool last_kept = perm.back() == perm.size() - 1 && mid_shape.back() == ex.len;
        if (last_kept) {
            // free relabeling of whole rows
            std::vector<size_t> mid_strides(mid_shape.size(), 1);
            for (size_t i = mid_shape.size() - 1; i-- > 0;)
                mid_strides[i] = mid_strides[i + 1] * mid_shape[i + 1];
            std::vector<std::vector<EdgeRef>> rows(out_rows);
            // iterate output row indices (all axes but last)
            size_t rank = out_shape.size();
            std::vector<size_t> idx(rank, 0);
            for (size_t r2 = 0; r2 < out_rows; ++r2) {
                size_t rem = r2;
                for (size_t i = rank - 1; i-- > 0;) {
                    idx[i] = 0;
                }
                // decompose r2 over out_shape[0..rank-2]
                for (size_t i = rank - 1; i-- > 0;) {
                    size_t dim = out_shape[i];
                    idx[i] = rem % dim;
                    rem /= dim;
                }
                size_t src_flat = 0;
                for (size_t i = 0; i + 1 < rank; ++i) src_flat += idx[i] * mid_strides[perm[i]];
                rows[r2] = {{x.edge, src_flat / ex.len}};
            }
            int out = relabel(ex.name + "/relabel", rows, out_len, ex.scale_bits, ex.lo, ex.hi);
            Binding ob;
            ob.edge = out;
            bind[n.outputs[0]] = ob;
        } else {
            // data moves across the last axis: one Permute with flat maps
            size_t in_plen = ex.plen;
            size_t out_plen = next_pow2(out_len);
            std::vector<size_t> mid_strides(mid_shape.size(), 1);
            for (size_t i = mid_shape.size() - 1; i-- > 0;)
                mid_strides[i] = mid_strides[i + 1] * mid_shape[i + 1];
            // padded source flat: row-major over [rows, plen]
            auto src_flat_of = [&](const std::vector<size_t>& oidx) {
                size_t flat = 0;
                for (size_t i = 0; i < oidx.size(); ++i) flat += oidx[i] * mid_strides[perm[i]];
                size_t r2 = flat / mid_shape.back();
                size_t c2 = flat % mid_shape.back();
                return r2 * in_plen + c2;
            };
            size_t rank = out_shape.size();
            std::vector<size_t> p0(out_rows), p1(out_plen, 0);
            // separability: flat = p0[row] + p1[col]; col contributes via the
            // moved source axis stride
            std::vector<size_t> oidx(rank, 0);
            for (size_t r2 = 0; r2 < out_rows; ++r2) {
                size_t rem = r2;
                for (size_t i = rank - 1; i-- > 0;) {
                    oidx[i] = rem % out_shape[i];
                    rem /= out_shape[i];
                }
                oidx[rank - 1] = 0;
                p0[r2] = src_flat_of(oidx);
            }
            std::fill(oidx.begin(), oidx.end(), 0);
            for (size_t c2 = 0; c2 < out_len; ++c2) {
                oidx[rank - 1] = c2;
                p1[c2] = src_flat_of(oidx);
            }
            for (size_t c2 = out_len; c2 < out_plen; ++c2)
                p1[c2] = (ex.rows * in_plen) + c2;  // out-of-grid labels for pad cols
            int out = dag.add_edge(make_edge(ex.name + "/perm", EdgeClass::Witness, out_rows,
                                             out_len, ex.scale_bits, ex.lo, ex.hi));
            DagNode pn;
            pn.kind = BlockKind::Permute;
            pn.layer = n.name;
            pn.n = in_plen;
            pn.p0 = p0;
            pn.p1 = p1;
            pn.ins = {{x.edge, EdgeRef::WHOLE}};
            pn.outs = {{out, EdgeRef::WHOLE}};
            dag.nodes.push_back(std::move(pn));
            Binding ob;
            ob.edge = out;
            bind[n.outputs[0]] = ob;
        }
    } else if (op == "Concat") {
        size_t axis = (size_t)n.attr_int("axis", 0);
        std::vector<Binding> ins;
        for (size_t i = 0; i < n.inputs.size(); ++i) ins.push_back(input_binding(n, i));
        auto in0_shape = g.value_shapes.at(n.inputs[0]);
        if (axis == in0_shape.size() - 1)
            throw UnsupportedLayerError("Concat across the last axis lowers to CopyConstraint; "
                                        "not in the desk lowering set at " +
                                        n.name);
        // leading-axis concat: rows relabel + Concat block binding
        std::vector<std::vector<EdgeRef>> rows;
        int64_t lo = 0, hi = 0;
        for (const auto& b : ins) {
            const DagEdge& e = E(b.edge);
            for (size_t r = 0; r < e.rows; ++r) rows.push_back({{b.edge, r}});
            lo = std::min(lo, e.lo);
            hi = std::max(hi, e.hi);
        }
        const DagEdge& e0 = E(ins[0].edge);
        int out = relabel("concat", rows, e0.len, e0.scale_bits, lo, hi);
        DagNode cn;
        cn.kind = BlockKind::Concat;
        cn.layer = n.name;
        cn.n = e0.plen;
        size_t out_row = 0;
        for (const auto& b : ins)
            for (size_t r = 0; r < E(b.edge).rows; ++r) {
                cn.ins.push_back({b.edge, r});
                cn.outs.push_back({out, out_row++});
            }
        dag.nodes.push_back(std::move(cn));
        Binding ob;
        ob.edge = out;
        bind[n.outputs[0]] = ob;
    } else if (op == "Split" || op == "Slice") {
        Binding x = input_binding(n, 0);
        const DagEdge& ex = E(x.edge);
        auto in_shape = g.value_shapes.at(n.inputs[0]);
        size_t axis = (size_t)n.attr_int("axis", 0);
        if (axis == in_shape.size() - 1) {
            // last-axis slice: CopyConstraint gather
            if (op == "Split") throw UnsupportedLayerError("Split on last axis at " + n.name);
            size_t start = (size_t)n.attr_int("start", 0), end = (size_t)n.attr_int("end", 0);
            size_t out_len = end - start;
            int out = dag.add_edge(make_edge(ex.name + "/slice", EdgeClass::Witness, ex.rows,
                                             out_len, ex.scale_bits, ex.lo, ex.hi));
            size_t out_plen = E(out).plen;
            for (size_t r = 0; r < ex.rows; ++r) {
                DagNode cc;
                cc.kind = BlockKind::CopyConstraint;
                cc.layer = n.name;
                cc.cc_m = ex.plen;
                cc.cc_n = out_plen;
                for (size_t i = 0; i < out_len; ++i) cc.cc_sigma.push_back(start + i);
                for (size_t i = out_len; i < out_plen; ++i) cc.cc_sigma.push_back(~(size_t)0);
                cc.cc_pads = {0};
                cc.ins = {{x.edge, r}};
                cc.outs = {{out, r}};
                dag.nodes.push_back(std::move(cc));
            }
            Binding ob;
            ob.edge = out;
            bind[n.outputs[0]] = ob;
        } else {
            // leading-axis: free row selection
            size_t inner_rows = 1;
            for (size_t i = axis + 1; i + 1 < in_shape.size(); ++i) inner_rows *= in_shape[i];
            size_t outer = 1;
            for (size_t i = 0; i < axis; ++i) outer *= in_shape[i];
            size_t dim = in_shape[axis];
            auto rows_for = [&](size_t start, size_t count) {
                std::vector<std::vector<EdgeRef>> rows;
                for (size_t oi = 0; oi < outer; ++oi)
                    for (size_t k = 0; k < count; ++k)
                        for (size_t ii = 0; ii < inner_rows; ++ii)
                            rows.push_back(
                                {{x.edge, (oi * dim + start + k) * inner_rows + ii}});
                return rows;
            };
            if (op == "Slice") {
                size_t start = (size_t)n.attr_int("start", 0), end = (size_t)n.attr_int("end", 0);
                int out = relabel(ex.name + "/slice", rows_for(start, end - start), ex.len,
                                  ex.scale_bits, ex.lo, ex.hi);
                Binding ob;
                ob.edge = out;
                bind[n.outputs[0]] = ob;
            } else {
                size_t parts = n.outputs.size();
                size_t piece = dim / parts;
                for (size_t p = 0; p < parts; ++p) {
                    int out = relabel(ex.name + "/split" + std::to_string(p),
                                      rows_for(p * piece, piece), ex.len, ex.scale_bits, ex.lo,
                                      ex.hi);
                    Binding ob;
                    ob.edge = out;
                    bind[n.outputs[p]] = ob;
                }
            }
        }
    } else if (op == "MaxPool") {
        Binding x = input_binding(n, 0);
        const DagEdge& ex = E(x.edge);
        size_t k = (size_t)n.attr_int("kernel", 2);
        size_t L = ex.len, OL = L / k;
        size_t wp = next_pow2(k);
        int out = dag.add_edge(make_edge(ex.name + "/maxpool", EdgeClass::Witness, ex.rows, OL,
                                         ex.scale_bits, ex.lo, ex.hi));
        size_t out_plen = E(out).plen;
        for (size_t r = 0; r < ex.rows; ++r) {
            // per-window gather + max, then assemble the output row
            std::vector<int> maxes;
            for (size_t wdw = 0; wdw < OL; ++wdw) {
                int wedge = dag.add_edge(make_edge(ex.name + "/w", EdgeClass::Witness, 1, k,
                                                   ex.scale_bits, ex.lo, ex.hi));
                E(wedge).plen = wp;
                DagNode gather;
                gather.kind = BlockKind::CopyConstraint;
                gather.layer = n.name;
                gather.cc_m = ex.plen;
                gather.cc_n = wp;
                for (size_t i = 0; i < k; ++i) gather.cc_sigma.push_back(wdw * k + i);
                for (size_t i = k; i < wp; ++i) gather.cc_sigma.push_back(~(size_t)0);
                gather.cc_pads = {ex.lo};  // pad with the lower bound so max is unaffected
                gather.ins = {{x.edge, r}};
                gather.outs = {{wedge, 0}};
                dag.nodes.push_back(std::move(gather));
                int mb = dag.add_edge(make_edge(ex.name + "/wmax", EdgeClass::Bcast, 1, 1,
                                                ex.scale_bits, ex.lo, ex.hi));
                DagNode mp;
                mp.kind = BlockKind::MaxProof;
                mp.layer = n.name;
                mp.n = wp;
                mp.ins = {{wedge, 0}};
                mp.outs = {{mb, 0}};
                dag.nodes.push_back(std::move(mp));
                maxes.push_back(mb);
            }
            DagNode assemble;
            assemble.kind = BlockKind::CopyConstraint;
            assemble.layer = n.name;
            assemble.cc_m = 1;
            assemble.cc_n = out_plen;
            for (size_t i = 0; i < OL; ++i) assemble.cc_sigma.push_back(i);  // column i, pos 0
            for (size_t i = OL; i < out_plen; ++i) assemble.cc_sigma.push_back(~(size_t)0);
            assemble.cc_pads = {0};
            for (int mb : maxes) assemble.ins.push_back({mb, 0});
            assemble.outs = {{out, r}};
            dag.nodes.push_back(std::move(assemble));
        }
        Binding ob;
        ob.edge = out;
        bind[n.outputs[0]] = ob;
    } else {
        throw UnsupportedLayerError("unsupported layer: op=" + op + " node=" + n.name);
    }
}

}  // namespace

BlockDag lower(const ModelGraph& g, int scale_bits) {
    ModelGraph copy = g;
    infer_shapes(copy, scale_bits);
    Lowerer lw(copy, scale_bits);
    lw.run();
    lint_scales(lw.dag);
    return std::move(lw.dag);
}

void lint_scales(const BlockDag& dag) {
    for (const auto& n : dag.nodes) {
        if (n.kind == BlockKind::Cq2) {
            const TableSpec& t = dag.plan.tables[(size_t)n.table];
            const DagEdge& in = dag.edges[(size_t)n.ins[0].edge];
            if (t.scale_bits != in.scale_bits)
                throw ConfigError("scale lint: table scale mismatch on edge " + in.name);
            if (in.lo < t.lo || in.hi > t.hi)
                throw ConfigError("scale lint: edge range exceeds table on " + in.name);
        }
        if (n.kind == BlockKind::Mul && !n.outs.empty()) {
            const DagEdge& out = dag.edges[(size_t)n.outs[0].edge];
            const DagEdge& a = dag.edges[(size_t)n.ins[0].edge];
            const DagEdge& b = dag.edges[(size_t)n.ins[1].edge];
            if (out.scale_bits != a.scale_bits + b.scale_bits)
                throw ConfigError("scale lint: Mul output scale wrong on " + out.name);
        }
    }
    // every doubled-scale edge must be rescaled before reaching a table of the
    // base scale: covered by the per-table scale equality above
}

std::string BlockDag::to_json() const {
    json j;
    j["scale_bits"] = scale_bits;
    j["edges"] = json::array();
    for (const auto& e : edges) {
        json je;
        je["name"] = e.name;
        je["class"] = (int)e.cls;
        je["rows"] = e.rows;
        je["len"] = e.len;
        je["plen"] = e.plen;
        je["scale_bits"] = e.scale_bits;
        j["edges"].push_back(je);
    }
    j["nodes"] = json::array();
    for (const auto& n : nodes) {
        json jn;
        jn["kind"] = kind_name(n.kind);
        jn["layer"] = n.layer;
        jn["n"] = n.n;
        if (n.table >= 0) jn["table"] = n.table;
        if (n.matrix >= 0) jn["matrix"] = n.matrix;
        json ins = json::array(), outs = json::array();
        for (const auto& r : n.ins) ins.push_back({r.edge, r.row == EdgeRef::WHOLE ? -1 : (long)r.row});
        for (const auto& r : n.outs)
            outs.push_back({r.edge, r.row == EdgeRef::WHOLE ? -1 : (long)r.row});
        jn["ins"] = ins;
        jn["outs"] = outs;
        j["nodes"].push_back(jn);
    }
    j["tables"] = json::array();
    for (const auto& t : plan.tables) j["tables"].push_back(t.key());
    j["matrices"] = plan.matrices.size();
    return j.dump(1);
}

}  // namespace zkt
