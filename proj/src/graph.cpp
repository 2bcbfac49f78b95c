#include "graph.hpp"

#include <openssl/sha.h>

#include <fstream>
#include <functional>
#include <set>

#include "json.hpp"

namespace zkt {

using nlohmann::json;

namespace {

const std::set<std::string>& supported_ops() {
    static std::set<std::string> ops = {
        "Gemm",    "MatMul",    "Conv",      "CustomConv", "ConcatConv", "Add",
        "Sub",     "Mul",       "Div",       "Mod",        "And",        "Eq",
        "Relu",    "Gelu",      "Tanh",      "Sigmoid",    "Exp",        "Softmax",
        "Reshape", "Transpose", "ReshapeTrans", "Concat",  "Split",      "Slice",
        "MaxPool", "ArgMax",    "ReduceSum", "ReduceMax",  "Identity",   "Pow",
    };
    return ops;
}

// --- base64 ------------------------------------------------------------

const char B64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const uint8_t* data, size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (size_t i = 0; i < len; i += 3) {
        uint32_t v = (uint32_t)data[i] << 16;
        if (i + 1 < len) v |= (uint32_t)data[i + 1] << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(B64[(v >> 18) & 63]);
        out.push_back(B64[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? B64[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? B64[v & 63] : '=');
    }
    return out;
}

std::vector<uint8_t> b64_decode(const std::string& s) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<uint8_t> out;
    uint32_t buf = 0;
    int bits = 0;
    for (char c : s) {
        if (c == '=' || c == '\n' || c == ' ') continue;
        int v = val(c);
        if (v < 0) throw FormatError("invalid base64");
        buf = (buf << 6) | (uint32_t)v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back((uint8_t)(buf >> bits));
        }
    }
    return out;
}

std::string encode_i64(const std::vector<int64_t>& v) {
    return b64_encode((const uint8_t*)v.data(), v.size() * 8);
}

std::vector<int64_t> decode_i64(const std::string& s) {
    auto bytes = b64_decode(s);
    if (bytes.size() % 8) throw FormatError("initializer byte length not a multiple of 8");
    std::vector<int64_t> out(bytes.size() / 8);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

}  // namespace

bool op_supported(const std::string& op) { return supported_ops().count(op) != 0; }

const GraphNode* ModelGraph::producer(const std::string& tensor) const {
    for (const auto& n : nodes)
        for (const auto& o : n.outputs)
            if (o == tensor) return &n;
    return nullptr;
}

std::vector<size_t> ModelGraph::consumers(const std::string& tensor) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < nodes.size(); ++i)
        for (const auto& in : nodes[i].inputs)
            if (in == tensor) {
                out.push_back(i);
                break;
            }
    return out;
}

std::string ModelGraph::fresh_name(const std::string& base) const {
    std::set<std::string> used;
    for (const auto& n : nodes) {
        used.insert(n.name);
        for (const auto& o : n.outputs) used.insert(o);
    }
    for (const auto& [k, v] : initializers) used.insert(k);
    std::string cand = base;
    int i = 0;
    while (used.count(cand)) cand = base + "_" + std::to_string(i++);
    return cand;
}

ModelGraph parse_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw FormatError(std::string("model json parse: ") + e.what());
    }
    ModelGraph g;
    for (const auto& jn : j.value("nodes", json::array())) {
        GraphNode n;
        n.op = jn.at("op").get<std::string>();
        n.name = jn.value("name", "");
        for (const auto& s : jn.value("inputs", json::array())) n.inputs.push_back(s);
        for (const auto& s : jn.value("outputs", json::array())) n.outputs.push_back(s);
        for (const auto& [k, v] : jn.value("attrs", json::object()).items()) {
            if (v.is_number_integer())
                n.attrs[k] = Attr::of_int(v.get<int64_t>());
            else if (v.is_number_float())
                n.attrs[k] = Attr::of_float(v.get<double>());
            else if (v.is_array()) {
                std::vector<int64_t> ints;
                for (const auto& x : v) ints.push_back(x.get<int64_t>());
                n.attrs[k] = Attr::of_ints(std::move(ints));
            } else if (v.is_string()) {
                Attr a;
                a.kind = Attr::STRING;
                a.s = v.get<std::string>();
                n.attrs[k] = a;
            }
        }
        g.nodes.push_back(std::move(n));
    }
    for (const auto& [name, jt] : j.value("initializers", json::object()).items()) {
        ScaledTensor t;
        for (const auto& d : jt.at("shape")) t.shape.push_back(d.get<size_t>());
        t.scale_bits = jt.value("scale_bits", 0);
        t.data = decode_i64(jt.at("data_b64").get<std::string>());
        if (t.data.size() != t.numel()) throw FormatError("initializer size mismatch: " + name);
        g.initializers[name] = std::move(t);
    }
    for (const auto& s : j.value("graph_inputs", json::array())) g.graph_inputs.push_back(s);
    for (const auto& s : j.value("graph_outputs", json::array())) g.graph_outputs.push_back(s);
    return g;
}

std::string model_to_json(const ModelGraph& g) {
    json j;
    j["nodes"] = json::array();
    for (const auto& n : g.nodes) {
        json jn;
        jn["op"] = n.op;
        jn["name"] = n.name;
        jn["inputs"] = n.inputs;
        jn["outputs"] = n.outputs;
        json attrs = json::object();
        for (const auto& [k, a] : n.attrs) {
            switch (a.kind) {
                case Attr::INT: attrs[k] = a.i; break;
                case Attr::FLOAT: attrs[k] = a.f; break;
                case Attr::INTS: attrs[k] = a.ints; break;
                case Attr::STRING: attrs[k] = a.s; break;
            }
        }
        jn["attrs"] = attrs;
        j["nodes"].push_back(jn);
    }
    json inits = json::object();
    for (const auto& [name, t] : g.initializers) {
        json jt;
        jt["shape"] = t.shape;
        jt["scale_bits"] = t.scale_bits;
        jt["data_b64"] = encode_i64(t.data);
        inits[name] = jt;
    }
    j["initializers"] = inits;
    j["graph_inputs"] = g.graph_inputs;
    j["graph_outputs"] = g.graph_outputs;
    return j.dump(1);
}

ModelGraph load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open model file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_model_json(text);
}

void save_model(const ModelGraph& g, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp);
        f << model_to_json(g);
        if (!f) throw IoError("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("rename failed for " + path);
}

std::array<uint8_t, 32> model_digest(const ModelGraph& g) {
    std::string j = model_to_json(g);
    std::array<uint8_t, 32> out;
    SHA256((const uint8_t*)j.data(), j.size(), out.data());
    return out;
}

namespace {

std::vector<size_t> attr_shape(const GraphNode& n, const std::string& key) {
    auto it = n.attrs.find(key);
    if (it == n.attrs.end()) throw ShapeError(n.op + " node missing attr " + key);
    std::vector<size_t> out;
    for (auto v : it->second.ints) out.push_back((size_t)v);
    return out;
}

size_t shape_numel(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
}

}  // namespace

void infer_shapes(ModelGraph& g, int default_scale_bits) {
    // topological order check: every input produced before use
    std::set<std::string> known;
    for (const auto& [k, t] : g.initializers) {
        known.insert(k);
        g.value_shapes[k] = t.shape;
        g.value_scales[k] = t.scale_bits;
    }
    for (const auto& in : g.graph_inputs) known.insert(in);

    for (const auto& n : g.nodes) {
        if (!op_supported(n.op))
            throw UnsupportedLayerError("unsupported layer: op=" + n.op + " node=" + n.name);
        for (const auto& in : n.inputs) {
            if (!in.empty() && !known.count(in))
                throw FormatError("edge consumed before produced (or cycle): " + in + " at node " +
                                  n.name);
        }
        for (const auto& out : n.outputs) {
            if (known.count(out)) throw FormatError("tensor produced twice: " + out);
            known.insert(out);
        }
    }

    auto shape_of = [&](const std::string& name) -> std::vector<size_t> {
        auto it = g.value_shapes.find(name);
        if (it == g.value_shapes.end()) throw ShapeError("unknown shape for tensor " + name);
        return it->second;
    };
    int s = default_scale_bits;
    auto set_out = [&](const GraphNode& n, size_t idx, std::vector<size_t> shape, int scale) {
        g.value_shapes[n.outputs[idx]] = std::move(shape);
        g.value_scales[n.outputs[idx]] = scale;
    };

    for (const auto& n : g.nodes) {
        const std::string& op = n.op;
        if (op == "Gemm") {
            auto x = shape_of(n.inputs[0]);
            auto w = shape_of(n.inputs[1]);
            if (x.size() != 2 || w.size() != 2 || x[1] != w[1])
                throw ShapeError("Gemm shape mismatch at " + n.name);
            set_out(n, 0, {x[0], w[0]}, s);
        } else if (op == "MatMul") {
            auto a = shape_of(n.inputs[0]);
            auto b = shape_of(n.inputs[1]);
            if (a.size() < 2 || b.size() != 2 || a.back() != b[b.size() - 2])
                throw ShapeError("MatMul shape mismatch at " + n.name);
            auto out = a;
            out.back() = b.back();
            set_out(n, 0, out, s);
        } else if (op == "Conv" || op == "CustomConv" || op == "ConcatConv") {
            auto x = shape_of(n.inputs[0]);  // [B, C, H, W]
            auto w = shape_of(n.inputs[1]);  // [O, C, kh, kw]
            if (x.size() != 4 || w.size() != 4 || x[1] != w[1])
                throw ShapeError("Conv shape mismatch at " + n.name);
            size_t pad = (size_t)n.attr_int("pad", 0);
            size_t ho = x[2] + 2 * pad - w[2] + 1, wo = x[3] + 2 * pad - w[3] + 1;
            set_out(n, 0, {x[0], w[0], ho, wo}, s);
        } else if (op == "Add" || op == "Sub" || op == "Mul" || op == "Div" || op == "Mod" ||
                   op == "And" || op == "Eq" || op == "Pow") {
            auto a = shape_of(n.inputs[0]);
            set_out(n, 0, a, op == "And" || op == "Eq" ? g.value_scales[n.inputs[0]] : s);
        } else if (op == "Relu" || op == "Gelu" || op == "Tanh" || op == "Sigmoid" ||
                   op == "Exp" || op == "Softmax" || op == "Identity") {
            set_out(n, 0, shape_of(n.inputs[0]), s);
        } else if (op == "Reshape") {
            auto shape = attr_shape(n, "shape");
            auto in = shape_of(n.inputs[0]);
            if (shape_numel(shape) != shape_numel(in))
                throw ShapeError("Reshape numel mismatch at " + n.name);
            set_out(n, 0, shape, g.value_scales[n.inputs[0]]);
        } else if (op == "Transpose") {
            auto perm = attr_shape(n, "perm");
            auto in = shape_of(n.inputs[0]);
            if (perm.size() != in.size()) throw ShapeError("Transpose perm rank at " + n.name);
            std::vector<size_t> out(in.size());
            for (size_t i = 0; i < in.size(); ++i) out[i] = in[perm[i]];
            set_out(n, 0, out, g.value_scales[n.inputs[0]]);
        } else if (op == "ReshapeTrans") {
            auto shape = attr_shape(n, "shape");
            auto perm = attr_shape(n, "perm");
            std::vector<size_t> out(shape.size());
            for (size_t i = 0; i < shape.size(); ++i) out[i] = shape[perm[i]];
            set_out(n, 0, out, g.value_scales[n.inputs[0]]);
        } else if (op == "Concat") {
            size_t axis = (size_t)n.attr_int("axis", 0);
            auto out = shape_of(n.inputs[0]);
            for (size_t i = 1; i < n.inputs.size(); ++i) out[axis] += shape_of(n.inputs[i])[axis];
            set_out(n, 0, out, g.value_scales[n.inputs[0]]);
        } else if (op == "Split") {
            size_t axis = (size_t)n.attr_int("axis", 0);
            auto in = shape_of(n.inputs[0]);
            size_t parts = n.outputs.size();
            if (in[axis] % parts) throw ShapeError("Split uneven at " + n.name);
            auto piece = in;
            piece[axis] = in[axis] / parts;
            for (size_t i = 0; i < parts; ++i) set_out(n, i, piece, g.value_scales[n.inputs[0]]);
        } else if (op == "Slice") {
            size_t axis = (size_t)n.attr_int("axis", 0);
            size_t start = (size_t)n.attr_int("start", 0);
            size_t end = (size_t)n.attr_int("end", 0);
            auto out = shape_of(n.inputs[0]);
            if (end > out[axis] || start >= end) throw ShapeError("Slice bounds at " + n.name);
            out[axis] = end - start;
            set_out(n, 0, out, g.value_scales[n.inputs[0]]);
        } else if (op == "MaxPool") {
            size_t k = (size_t)n.attr_int("kernel", 2);
            auto in = shape_of(n.inputs[0]);
            if (in.back() % k) throw ShapeError("MaxPool kernel must divide last axis");
            auto out = in;
            out.back() = in.back() / k;
            set_out(n, 0, out, g.value_scales[n.inputs[0]]);
        } else if (op == "ArgMax") {
            auto in = shape_of(n.inputs[0]);
            auto out = in;
            out.back() = 1;
            set_out(n, 0, out, 0);
        } else if (op == "ReduceSum" || op == "ReduceMax") {
            auto in = shape_of(n.inputs[0]);
            auto out = in;
            out.back() = 1;
            set_out(n, 0, out, s);
        } else {
            throw UnsupportedLayerError("unsupported layer: op=" + op + " node=" + n.name);
        }
    }
}

// ---------------------------------------------------------------------------
// Reference evaluator

namespace {

struct Eval {
    const ModelGraph& g;
    int s;
    std::map<std::string, ScaledTensor> vals;

    const ScaledTensor& get(const std::string& name) {
        auto it = vals.find(name);
        if (it != vals.end()) return it->second;
        auto init = g.initializers.find(name);
        if (init != g.initializers.end()) return init->second;
        throw ShapeError("evaluator: missing tensor " + name);
    }

    static int64_t lift(int64_t v, int from_scale, int to_scale) {
        if (to_scale >= from_scale) return v << (to_scale - from_scale);
        return quant_rescale(v, from_scale - to_scale);
    }

    ScaledTensor pointwise(const ScaledTensor& a, QuantFn fn, int param) {
        ScaledTensor out = a;
        for (auto& v : out.data) v = quant_apply(fn, v, a.scale_bits, param);
        return out;
    }

    void run() {
        for (const auto& n : g.nodes) exec(n);
    }

    void exec(const GraphNode& n) {
        const std::string& op = n.op;
        if (op == "Gemm") {
            const auto& x = get(n.inputs[0]);
            const auto& w = get(n.inputs[1]);
            const ScaledTensor* b = n.inputs.size() > 2 ? &get(n.inputs[2]) : nullptr;
            size_t M = x.shape[0], K = x.shape[1], N = w.shape[0];
            ScaledTensor out{{M, N}, s, std::vector<int64_t>(M * N, 0)};
            for (size_t i = 0; i < M; ++i)
                for (size_t j = 0; j < N; ++j) {
                    int64_t acc = 0;
                    for (size_t k = 0; k < K; ++k) acc += x.data[i * K + k] * w.data[j * K + k];
                    if (b) acc += b->data[j] << s;
                    out.data[i * N + j] = quant_rescale(acc, s);
                }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "MatMul") {
            const auto& a = get(n.inputs[0]);
            const auto& b = get(n.inputs[1]);
            size_t K = a.shape.back(), N = b.shape.back();
            size_t M = a.numel() / K;
            ScaledTensor out;
            out.shape = a.shape;
            out.shape.back() = N;
            out.scale_bits = s;
            out.data.assign(M * N, 0);
            for (size_t i = 0; i < M; ++i)
                for (size_t j = 0; j < N; ++j) {
                    int64_t acc = 0;
                    for (size_t k = 0; k < K; ++k) acc += a.data[i * K + k] * b.data[k * N + j];
                    out.data[i * N + j] = quant_rescale(acc, s);
                }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Conv" || op == "CustomConv" || op == "ConcatConv") {
            const auto& x = get(n.inputs[0]);
            const auto& w = get(n.inputs[1]);
            const ScaledTensor* bias = n.inputs.size() > 2 ? &get(n.inputs[2]) : nullptr;
            size_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
            size_t O = w.shape[0], kh = w.shape[2], kw = w.shape[3];
            size_t pad = (size_t)n.attr_int("pad", 0);
            size_t HP = H + 2 * pad, WP = W + 2 * pad;
            size_t HO = HP - kh + 1, WO = WP - kw + 1;
            ScaledTensor out{{B, O, HO, WO}, s, std::vector<int64_t>(B * O * HO * WO, 0)};
            auto xat = [&](size_t b2, size_t c, long i, long j) -> int64_t {
                long ii = i - (long)pad, jj = j - (long)pad;
                if (ii < 0 || jj < 0 || ii >= (long)H || jj >= (long)W) return 0;
                return x.data[((b2 * C + c) * H + (size_t)ii) * W + (size_t)jj];
            };
            for (size_t b2 = 0; b2 < B; ++b2)
                for (size_t o = 0; o < O; ++o)
                    for (size_t i = 0; i < HO; ++i)
                        for (size_t j = 0; j < WO; ++j) {
                            int64_t acc = 0;
                            for (size_t c = 0; c < C; ++c)
                                for (size_t p = 0; p < kh; ++p)
                                    for (size_t q = 0; q < kw; ++q)
                                        acc += xat(b2, c, (long)(i + p), (long)(j + q)) *
                                               w.data[((o * C + c) * kh + p) * kw + q];
                            if (bias) acc += bias->data[o] << s;
                            out.data[((b2 * O + o) * HO + i) * WO + j] = quant_rescale(acc, s);
                        }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Add" || op == "Sub" || op == "Mul" || op == "Div" || op == "Mod" ||
                   op == "And" || op == "Eq") {
            const auto& a = get(n.inputs[0]);
            const auto& b = get(n.inputs[1]);
            ScaledTensor out = a;
            size_t bn = b.numel();
            for (size_t i = 0; i < out.data.size(); ++i) {
                int64_t av = a.data[i], bv = b.data[i % bn];
                if (op == "Add")
                    out.data[i] = av + bv;
                else if (op == "Sub")
                    out.data[i] = av - bv;
                else if (op == "Mul")
                    out.data[i] = quant_rescale(av * bv, s);
                else if (op == "And") {
                    if ((av | bv) & ~1ll) throw WitnessError("And input is not boolean");
                    out.data[i] = av & bv;
                } else if (op == "Eq") {
                    if (av != bv) throw WitnessError("Eq operands differ");
                    out.data[i] = av;
                } else {  // Div / Mod: a at 2s (lifted), b at s -> q at s
                    if (bv <= 0) throw WitnessError("division by non-positive value");
                    int64_t lifted = av << s;
                    int64_t q = lifted / bv;
                    if (lifted < 0 && q * bv != lifted) --q;  // floor
                    int64_t r = lifted - q * bv;
                    out.data[i] = op == "Div" ? q : r;
                }
            }
            out.scale_bits = op == "And" || op == "Eq" ? a.scale_bits : s;
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Relu") {
            vals[n.outputs[0]] = pointwise(get(n.inputs[0]), QuantFn::Relu, 0);
        } else if (op == "Gelu") {
            vals[n.outputs[0]] = pointwise(get(n.inputs[0]), QuantFn::Gelu, 0);
        } else if (op == "Tanh") {
            vals[n.outputs[0]] = pointwise(get(n.inputs[0]), QuantFn::Tanh, 0);
        } else if (op == "Sigmoid") {
            vals[n.outputs[0]] = pointwise(get(n.inputs[0]), QuantFn::Sigmoid, 0);
        } else if (op == "Exp") {
            vals[n.outputs[0]] = pointwise(get(n.inputs[0]), QuantFn::Exp, 0);
        } else if (op == "Pow") {
            int64_t e = n.attr_int("exponent", 3);
            if (e != 3) throw UnsupportedLayerError("Pow supports exponent 3 only");
            vals[n.outputs[0]] = pointwise(get(n.inputs[0]), QuantFn::Cube, 0);
        } else if (op == "Softmax") {
            const auto& x = get(n.inputs[0]);
            size_t L = x.row_len(), R = x.rows();
            ScaledTensor out = x;
            out.scale_bits = s;
            for (size_t r = 0; r < R; ++r) {
                int64_t m = x.data[r * L];
                for (size_t i = 1; i < L; ++i) m = std::max(m, x.data[r * L + i]);
                int64_t tot = 0;
                std::vector<int64_t> e(L);
                for (size_t i = 0; i < L; ++i) {
                    e[i] = quant_apply(QuantFn::Exp, x.data[r * L + i] - m, s);
                    tot += e[i];
                }
                for (size_t i = 0; i < L; ++i) out.data[r * L + i] = (e[i] << s) / tot;
            }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Reshape") {
            ScaledTensor out = get(n.inputs[0]);
            out.shape = attr_shape(n, "shape");
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Transpose" || op == "ReshapeTrans") {
            ScaledTensor in = get(n.inputs[0]);
            if (op == "ReshapeTrans") in.shape = attr_shape(n, "shape");
            auto perm = attr_shape(n, "perm");
            size_t rank = in.shape.size();
            std::vector<size_t> out_shape(rank);
            for (size_t i = 0; i < rank; ++i) out_shape[i] = in.shape[perm[i]];
            ScaledTensor out{out_shape, in.scale_bits,
                             std::vector<int64_t>(in.data.size(), 0)};
            std::vector<size_t> in_strides(rank, 1), out_strides(rank, 1);
            for (size_t i = rank - 1; i-- > 0;) {
                in_strides[i] = in_strides[i + 1] * in.shape[i + 1];
                out_strides[i] = out_strides[i + 1] * out_shape[i + 1];
            }
            std::vector<size_t> idx(rank, 0);
            for (size_t flat = 0; flat < in.data.size(); ++flat) {
                size_t rem = flat;
                for (size_t i = 0; i < rank; ++i) {
                    idx[i] = rem / in_strides[i];
                    rem %= in_strides[i];
                }
                size_t of = 0;
                for (size_t i = 0; i < rank; ++i) of += idx[perm[i]] * out_strides[i];
                out.data[of] = in.data[flat];
            }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Concat") {
            size_t axis = (size_t)n.attr_int("axis", 0);
            std::vector<const ScaledTensor*> ins;
            for (const auto& name : n.inputs) ins.push_back(&get(name));
            auto out_shape = ins[0]->shape;
            for (size_t i = 1; i < ins.size(); ++i) out_shape[axis] += ins[i]->shape[axis];
            ScaledTensor out{out_shape, ins[0]->scale_bits, {}};
            out.data.resize(out.numel());
            // outer = dims before axis, inner = dims after axis
            size_t outer = 1, inner = 1;
            for (size_t i = 0; i < axis; ++i) outer *= out_shape[i];
            for (size_t i = axis + 1; i < out_shape.size(); ++i) inner *= out_shape[i];
            size_t off = 0;
            for (size_t oi = 0; oi < outer; ++oi) {
                for (const auto* t : ins) {
                    size_t chunk = t->shape[axis] * inner;
                    std::memcpy(out.data.data() + (off),
                                t->data.data() + oi * chunk, chunk * 8);
                    off += chunk;
                }
            }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Split") {
            const auto& in = get(n.inputs[0]);
            size_t axis = (size_t)n.attr_int("axis", 0);
            size_t parts = n.outputs.size();
            size_t outer = 1, inner = 1;
            for (size_t i = 0; i < axis; ++i) outer *= in.shape[i];
            for (size_t i = axis + 1; i < in.shape.size(); ++i) inner *= in.shape[i];
            size_t piece_axis = in.shape[axis] / parts;
            auto piece_shape = in.shape;
            piece_shape[axis] = piece_axis;
            for (size_t p = 0; p < parts; ++p) {
                ScaledTensor out{piece_shape, in.scale_bits, {}};
                out.data.resize(out.numel());
                for (size_t oi = 0; oi < outer; ++oi)
                    std::memcpy(out.data.data() + oi * piece_axis * inner,
                                in.data.data() + (oi * parts + p) * piece_axis * inner,
                                piece_axis * inner * 8);
                vals[n.outputs[p]] = std::move(out);
            }
        } else if (op == "Slice") {
            const auto& in = get(n.inputs[0]);
            size_t axis = (size_t)n.attr_int("axis", 0);
            size_t start = (size_t)n.attr_int("start", 0), end = (size_t)n.attr_int("end", 0);
            size_t outer = 1, inner = 1;
            for (size_t i = 0; i < axis; ++i) outer *= in.shape[i];
            for (size_t i = axis + 1; i < in.shape.size(); ++i) inner *= in.shape[i];
            auto out_shape = in.shape;
            out_shape[axis] = end - start;
            ScaledTensor out{out_shape, in.scale_bits, {}};
            out.data.resize(out.numel());
            for (size_t oi = 0; oi < outer; ++oi)
                std::memcpy(out.data.data() + oi * (end - start) * inner,
                            in.data.data() + (oi * in.shape[axis] + start) * inner,
                            (end - start) * inner * 8);
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "MaxPool") {
            const auto& in = get(n.inputs[0]);
            size_t k = (size_t)n.attr_int("kernel", 2);
            size_t L = in.row_len(), R = in.rows();
            auto out_shape = in.shape;
            out_shape.back() = L / k;
            ScaledTensor out{out_shape, in.scale_bits, std::vector<int64_t>(R * L / k, 0)};
            for (size_t r = 0; r < R; ++r)
                for (size_t i = 0; i < L / k; ++i) {
                    int64_t m = in.data[r * L + i * k];
                    for (size_t j = 1; j < k; ++j) m = std::max(m, in.data[r * L + i * k + j]);
                    out.data[r * (L / k) + i] = m;
                }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "ArgMax") {
            const auto& in = get(n.inputs[0]);
            size_t L = in.row_len(), R = in.rows();
            auto out_shape = in.shape;
            out_shape.back() = 1;
            ScaledTensor out{out_shape, 0, std::vector<int64_t>(R, 0)};
            for (size_t r = 0; r < R; ++r) {
                size_t best = 0;
                for (size_t i = 1; i < L; ++i)
                    if (in.data[r * L + i] > in.data[r * L + best]) best = i;  // ties: lowest
                out.data[r] = (int64_t)best;
            }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "ReduceSum" || op == "ReduceMax") {
            const auto& in = get(n.inputs[0]);
            size_t L = in.row_len(), R = in.rows();
            auto out_shape = in.shape;
            out_shape.back() = 1;
            ScaledTensor out{out_shape, in.scale_bits, std::vector<int64_t>(R, 0)};
            for (size_t r = 0; r < R; ++r) {
                int64_t acc = in.data[r * L];
                for (size_t i = 1; i < L; ++i) {
                    int64_t v = in.data[r * L + i];
                    acc = op == "ReduceSum" ? acc + v : std::max(acc, v);
                }
                out.data[r] = acc;
            }
            vals[n.outputs[0]] = std::move(out);
        } else if (op == "Identity") {
            vals[n.outputs[0]] = get(n.inputs[0]);
        } else {
            throw UnsupportedLayerError("evaluator: unsupported op " + op);
        }
    }
};

}  // namespace

std::map<std::string, ScaledTensor> evaluate_graph(
    const ModelGraph& g, const std::map<std::string, ScaledTensor>& inputs, int scale_bits) {
    Eval ev{g, scale_bits, inputs};
    ev.run();
    return std::move(ev.vals);
}

// ---------------------------------------------------------------------------
// Rewrite rules

namespace {

void erase_nodes(ModelGraph& g, const std::set<size_t>& idxs) {
    std::vector<GraphNode> keep;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        if (!idxs.count(i)) keep.push_back(std::move(g.nodes[i]));
    g.nodes = std::move(keep);
}

// scalar initializer matching a float constant (within fixed-point tolerance)
bool is_scalar_const(const ModelGraph& g, const std::string& name, double expect) {
    auto it = g.initializers.find(name);
    if (it == g.initializers.end()) return false;
    if (it->second.numel() != 1) return false;
    double v = quant_decode(it->second.data[0], it->second.scale_bits);
    return std::abs(v - expect) < 0.05;
}

// Matches the tanh-approximation subgraph and fuses it into one Gelu node.
// x -> Pow3 -> Mul(0.044715) -> Add(x) -> Mul(sqrt(2/pi)) -> Tanh -> Add(1)
//   -> Mul(x) -> Mul(0.5)
bool rule_gelu(ModelGraph& g) {
    for (size_t ti = 0; ti < g.nodes.size(); ++ti) {
        if (g.nodes[ti].op != "Tanh") continue;
        const GraphNode& tanh = g.nodes[ti];
        // upstream: Mul(sqrt(2/pi)) <- Add(x, Mul(0.044715, Pow(x,3)))
        const GraphNode* mul_c2 = g.producer(tanh.inputs[0]);
        if (!mul_c2 || mul_c2->op != "Mul") continue;
        int c2_side = is_scalar_const(g, mul_c2->inputs[1], 0.7978845608) ? 1
                      : is_scalar_const(g, mul_c2->inputs[0], 0.7978845608) ? 0
                                                                            : -1;
        if (c2_side < 0) continue;
        const GraphNode* add_in = g.producer(mul_c2->inputs[c2_side ^ 1]);
        if (!add_in || add_in->op != "Add") continue;
        // one side is x, other is Mul(0.044715, Pow(x,3))
        std::string x_name;
        const GraphNode* mul_c1 = nullptr;
        for (int side = 0; side < 2; ++side) {
            const GraphNode* cand = g.producer(add_in->inputs[(size_t)side]);
            if (cand && cand->op == "Mul") {
                mul_c1 = cand;
                x_name = add_in->inputs[(size_t)(side ^ 1)];
            }
        }
        if (!mul_c1) continue;
        int c1_side = is_scalar_const(g, mul_c1->inputs[1], 0.044715) ? 1
                      : is_scalar_const(g, mul_c1->inputs[0], 0.044715) ? 0
                                                                        : -1;
        if (c1_side < 0) continue;
        const GraphNode* pow3 = g.producer(mul_c1->inputs[(size_t)(c1_side ^ 1)]);
        if (!pow3 || pow3->op != "Pow" || pow3->inputs[0] != x_name) continue;
        // downstream: Add(1) -> Mul(x) -> Mul(0.5)
        auto cons1 = g.consumers(tanh.outputs[0]);
        if (cons1.size() != 1 || g.nodes[cons1[0]].op != "Add") continue;
        const GraphNode& add1 = g.nodes[cons1[0]];
        bool add1_ok = is_scalar_const(g, add1.inputs[0], 1.0) ||
                       is_scalar_const(g, add1.inputs[1], 1.0);
        if (!add1_ok) continue;
        auto cons2 = g.consumers(add1.outputs[0]);
        if (cons2.size() != 1 || g.nodes[cons2[0]].op != "Mul") continue;
        const GraphNode& mulx = g.nodes[cons2[0]];
        if (mulx.inputs[0] != x_name && mulx.inputs[1] != x_name) continue;
        auto cons3 = g.consumers(mulx.outputs[0]);
        if (cons3.size() != 1 || g.nodes[cons3[0]].op != "Mul") continue;
        const GraphNode& half = g.nodes[cons3[0]];
        if (!is_scalar_const(g, half.inputs[0], 0.5) && !is_scalar_const(g, half.inputs[1], 0.5))
            continue;

        GraphNode fused;
        fused.op = "Gelu";
        fused.name = g.fresh_name("gelu_fused");
        fused.inputs = {x_name};
        fused.outputs = {half.outputs[0]};

        std::set<size_t> dead;
        for (size_t i = 0; i < g.nodes.size(); ++i) {
            const GraphNode* p = &g.nodes[i];
            if (p == &tanh || p == mul_c2 || p == add_in || p == mul_c1 || p == pow3 ||
                p == &add1 || p == &mulx || p == &half)
                dead.insert(i);
        }
        size_t insert_at = *dead.begin();
        erase_nodes(g, dead);
        g.nodes.insert(g.nodes.begin() + (long)std::min(insert_at, g.nodes.size()),
                       std::move(fused));
        return true;
    }
    return false;
}

bool rule_reshape_trans(ModelGraph& g) {
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i].op != "Reshape") continue;
        auto cons = g.consumers(g.nodes[i].outputs[0]);
        if (cons.size() != 1 || g.nodes[cons[0]].op != "Transpose") continue;
        GraphNode fused;
        fused.op = "ReshapeTrans";
        fused.name = g.fresh_name("reshape_trans");
        fused.inputs = g.nodes[i].inputs;
        fused.outputs = g.nodes[cons[0]].outputs;
        fused.attrs["shape"] = g.nodes[i].attrs.at("shape");
        fused.attrs["perm"] = g.nodes[cons[0]].attrs.at("perm");
        std::set<size_t> dead{i, cons[0]};
        erase_nodes(g, dead);
        g.nodes.insert(g.nodes.begin() + (long)std::min(i, g.nodes.size()), std::move(fused));
        return true;
    }
    return false;
}

bool rule_custom_cnn(ModelGraph& g) {
    for (auto& n : g.nodes) {
        if (n.op != "Conv") continue;
        if (!g.is_initializer(n.inputs[1])) continue;  // dynamic weights: skip
        if (n.attr_int("stride", 1) != 1) continue;
        n.op = "CustomConv";
        return true;
    }
    return false;
}

// Two convolutions over the same input feeding a channel concat merge into a
// single CustomConv with stacked kernels.
bool rule_concat_conv(ModelGraph& g) {
    for (size_t ci = 0; ci < g.nodes.size(); ++ci) {
        const GraphNode& cat = g.nodes[ci];
        if (cat.op != "Concat" || cat.attr_int("axis", 0) != 1 || cat.inputs.size() != 2)
            continue;
        const GraphNode* a = g.producer(cat.inputs[0]);
        const GraphNode* b = g.producer(cat.inputs[1]);
        if (!a || !b) continue;
        auto is_conv = [](const GraphNode* n) {
            return n->op == "Conv" || n->op == "CustomConv";
        };
        if (!is_conv(a) || !is_conv(b)) continue;
        if (a->inputs[0] != b->inputs[0]) continue;
        if (!g.is_initializer(a->inputs[1]) || !g.is_initializer(b->inputs[1])) continue;
        if (a->inputs.size() != b->inputs.size()) continue;
        if (g.consumers(a->outputs[0]).size() != 1 || g.consumers(b->outputs[0]).size() != 1)
            continue;
        const ScaledTensor& wa = g.initializers.at(a->inputs[1]);
        const ScaledTensor& wb = g.initializers.at(b->inputs[1]);
        if (wa.shape[1] != wb.shape[1] || wa.shape[2] != wb.shape[2] || wa.shape[3] != wb.shape[3])
            continue;
        if (a->attr_int("pad", 0) != b->attr_int("pad", 0)) continue;

        ScaledTensor wm;
        wm.shape = {wa.shape[0] + wb.shape[0], wa.shape[1], wa.shape[2], wa.shape[3]};
        wm.scale_bits = wa.scale_bits;
        wm.data = wa.data;
        wm.data.insert(wm.data.end(), wb.data.begin(), wb.data.end());
        std::string wname = g.fresh_name("concatconv_w");
        g.initializers[wname] = std::move(wm);

        GraphNode fused;
        fused.op = "CustomConv";
        fused.name = g.fresh_name("concat_conv");
        fused.inputs = {a->inputs[0], wname};
        if (a->inputs.size() > 2) {
            ScaledTensor bm = g.initializers.at(a->inputs[2]);
            const ScaledTensor& bb = g.initializers.at(b->inputs[2]);
            bm.shape = {bm.numel() + bb.numel()};
            bm.data.insert(bm.data.end(), bb.data.begin(), bb.data.end());
            std::string bname = g.fresh_name("concatconv_b");
            g.initializers[bname] = std::move(bm);
            fused.inputs.push_back(bname);
        }
        fused.outputs = {cat.outputs[0]};
        fused.attrs["pad"] = Attr::of_int(a->attr_int("pad", 0));

        std::set<size_t> dead{ci};
        for (size_t i = 0; i < g.nodes.size(); ++i)
            if (&g.nodes[i] == a || &g.nodes[i] == b) dead.insert(i);
        size_t at = *dead.begin();
        erase_nodes(g, dead);
        g.nodes.insert(g.nodes.begin() + (long)std::min(at, g.nodes.size()), std::move(fused));
        return true;
    }
    return false;
}

}  // namespace

std::vector<RewriteRule> default_rules() {
    std::vector<RewriteRule> rules;
    rules.push_back({"GeLU", rule_gelu});
    rules.push_back({"ReshapeTrans", rule_reshape_trans});
    rules.push_back({"CustomCNN", rule_custom_cnn});
    rules.push_back({"ConcatConv", rule_concat_conv});
    // Pattern stubs for LLM-scale rules; recognized but not rewritten.
    rules.push_back({"MultiHeadMatMul", [](ModelGraph&) { return false; }});
    rules.push_back({"RoPE", [](ModelGraph&) { return false; }});
    rules.push_back({"MultiHeadConv", [](ModelGraph&) { return false; }});
    return rules;
}

ModelGraph apply_rules(const ModelGraph& g, const std::vector<RewriteRule>& rules) {
    ModelGraph out = g;
    size_t cap = 10 * (out.nodes.size() + 1);
    size_t iter = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : rules) {
            if (r.apply_once(out)) {
                changed = true;
                if (++iter > cap) throw CompilerError("rewrite rules did not reach a fixpoint");
                break;  // restart scan after every successful rewrite
            }
        }
    }
    return out;
}

}  // namespace zkt
