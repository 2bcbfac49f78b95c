#pragma once

#include "blocks.hpp"
#include "graph.hpp"

namespace zkt {

// Reference into a DAG edge: one committed row, or the whole edge.
struct EdgeRef {
    static constexpr size_t WHOLE = ~(size_t)0;
    int edge = -1;
    size_t row = WHOLE;
};

enum class EdgeClass : uint8_t {
    Witness,   // committed with blinding
    Weight,    // committed with blinding; commitment published with the model
    Const,     // public values; verifier recomputes commitments
    Bcast,     // single private value broadcast as a constant polynomial
    Derived,   // rows are sums of other rows (free under homomorphism)
    Output,    // committed without blinding; values revealed in io
};

struct DagEdge {
    std::string name;        // tensor provenance
    EdgeClass cls = EdgeClass::Witness;
    size_t rows = 1;
    size_t len = 1;   // logical row length
    size_t plen = 1;  // padded (power-of-two) commitment domain
    int scale_bits = 0;
    int64_t lo = 0, hi = 0;  // value bounds from range analysis
    std::vector<int64_t> const_data;                  // Const and Weight edges
    std::vector<std::vector<EdgeRef>> derivation;     // Derived edges: per row, summands
    // witness recipes for edges the node list does not produce directly
    char rec_role = 0;  // 'q'/'r' (division), 'i' (argmax index)
    int rec_a = -1, rec_b = -1, rec_prod = -1;
};

struct DagNode {
    BlockKind kind = BlockKind::Add;
    std::string layer;  // originating graph node
    std::vector<EdgeRef> ins;
    std::vector<EdgeRef> outs;
    // parameters (used per kind)
    size_t n = 0;            // row domain size
    Fr cconst = Fr::zero();  // MulConst constant
    int table = -1;          // lookup plan index (Cq / Cq2)
    int matrix = -1;         // fixed-matrix plan index (CqLin)
    std::vector<size_t> p0, p1;  // Permute maps
    // CopyConstraint
    size_t cc_m = 0, cc_n = 0;
    std::vector<size_t> cc_sigma;
    std::vector<int64_t> cc_pads;
    bool cc_sigma_from_output = false;  // ArgMax selection: sigma = [claimed index]
};

struct TableSpec {
    bool pair = true;
    QuantFn fn = QuantFn::Identity;
    int param = 0;
    int64_t lo = 0, hi = 0;  // inclusive input range
    int scale_bits = 0;
    size_t size = 0;  // power-of-two table size

    std::string key() const;
    // materialized columns
    std::vector<Fr> in_column() const;
    std::vector<Fr> out_column() const;
};

struct MatrixSpec {
    std::vector<std::vector<int64_t>> rows;  // [O][I], field-encoded at commit time
    std::string key() const;
};

struct LookupTablePlan {
    std::vector<TableSpec> tables;
    std::vector<MatrixSpec> matrices;
    int intern_table(const TableSpec& t);
    int intern_matrix(MatrixSpec m);
};

struct BlockDag {
    std::vector<DagEdge> edges;
    std::vector<DagNode> nodes;
    LookupTablePlan plan;
    std::vector<int> input_edges;   // graph inputs in order
    std::vector<int> output_edges;  // graph outputs in order
    int scale_bits = 6;
    size_t max_table_bits = 16;

    int add_edge(DagEdge e) {
        edges.push_back(std::move(e));
        return (int)edges.size() - 1;
    }

    std::string to_json() const;  // debug/inspect format
};

// Lower an optimized model graph into a block DAG with a table plan.
BlockDag lower(const ModelGraph& g, int scale_bits);

// Scale/range discipline: every multiply output is rescaled before any table
// lookup; declared edge scales are consistent along every path.
void lint_scales(const BlockDag& dag);

}  // namespace zkt
