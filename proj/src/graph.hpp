#pragma once

#include <map>
#include <optional>
#include <string>

#include "quant.hpp"

namespace zkt {

struct Attr {
    enum Kind : uint8_t { INT, FLOAT, INTS, STRING } kind = INT;
    int64_t i = 0;
    double f = 0;
    std::vector<int64_t> ints;
    std::string s;

    static Attr of_int(int64_t v) {
        Attr a;
        a.kind = INT;
        a.i = v;
        return a;
    }
    static Attr of_float(double v) {
        Attr a;
        a.kind = FLOAT;
        a.f = v;
        return a;
    }
    static Attr of_ints(std::vector<int64_t> v) {
        Attr a;
        a.kind = INTS;
        a.ints = std::move(v);
        return a;
    }
};

struct GraphNode {
    std::string op;
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, Attr> attrs;

    int64_t attr_int(const std::string& k, int64_t dflt) const {
        auto it = attrs.find(k);
        return it == attrs.end() ? dflt : it->second.i;
    }
    double attr_float(const std::string& k, double dflt) const {
        auto it = attrs.find(k);
        return it == attrs.end() ? dflt : it->second.f;
    }
};

struct ModelGraph {
    std::vector<GraphNode> nodes;
    std::map<std::string, ScaledTensor> initializers;
    std::vector<std::string> graph_inputs;
    std::vector<std::string> graph_outputs;
    std::map<std::string, std::vector<size_t>> value_shapes;  // filled by shape inference
    std::map<std::string, int> value_scales;

    bool is_initializer(const std::string& name) const { return initializers.count(name) != 0; }
    const GraphNode* producer(const std::string& tensor) const;
    std::vector<size_t> consumers(const std::string& tensor) const;  // node indices
    std::string fresh_name(const std::string& base) const;
};

// Supported op set (desk scale); unknown ops raise UnsupportedLayerError.
bool op_supported(const std::string& op);

ModelGraph load_model(const std::string& path);
ModelGraph parse_model_json(const std::string& json_text);
std::string model_to_json(const ModelGraph& g);
void save_model(const ModelGraph& g, const std::string& path);

// Topological validation + shape/scale inference. Throws FormatError on
// cycles, UnsupportedLayerError on unknown ops, ShapeError on bad dims.
void infer_shapes(ModelGraph& g, int default_scale_bits);

std::array<uint8_t, 32> model_digest(const ModelGraph& g);

// Fixed-point reference evaluator (the semantic ground truth for rewrites,
// lowering, and witness generation).
std::map<std::string, ScaledTensor> evaluate_graph(
    const ModelGraph& g, const std::map<std::string, ScaledTensor>& inputs, int scale_bits);

struct RewriteRule {
    std::string name;
    // applies the rule once; returns true if the graph changed
    std::function<bool(ModelGraph&)> apply_once;
};

std::vector<RewriteRule> default_rules();
// Greedy application to fixpoint; iteration cap 10*|nodes|.
ModelGraph apply_rules(const ModelGraph& g, const std::vector<RewriteRule>& rules);

}  // namespace zkt
