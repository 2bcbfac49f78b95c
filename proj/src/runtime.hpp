#pragma once

#include "accumulate.hpp"
#include "polyiop.hpp"
#include "transpile.hpp"

namespace zkt {

struct RowWitness {
    std::vector<int64_t> values;  // logical length (unpadded)
    Poly poly;                    // blinded where applicable
    G1 com;
};

struct EdgeWitness {
    bool ready = false;
    std::vector<RowWitness> rows;
};

struct WitnessStore {
    std::vector<EdgeWitness> edges;
    SharedRandomness rand;

    const RowWitness& row(const EdgeRef& r) const {
        return edges[(size_t)r.edge].rows[r.row == EdgeRef::WHOLE ? 0 : r.row];
    }
};

// Evaluates the DAG in fixed point, commits every row, and derives the shared
// MatMul/Permute randomness from the transcript of all commitments.
WitnessStore generate_witness(const BlockDag& dag, const Srs& srs,
                              const std::vector<ScaledTensor>& inputs, u64 seed);

// Preprocessing caches shared by prover and verifier (table and matrix
// commitments are deterministic given the SRS).
struct ProverContext {
    const Srs* srs = nullptr;
    std::map<int, CqTable> set_tables;
    std::map<int, CqPairTable> pair_tables;
    std::map<int, CqLinMatrix> matrices;

    const CqTable& set_table(const BlockDag& dag, int id);
    const CqPairTable& pair_table(const BlockDag& dag, int id);
    const CqLinMatrix& matrix(const BlockDag& dag, int id);
};

struct StandaloneProof {
    enum Type : uint8_t { BOOLEAN, MAXPROOF, COPY } type = BOOLEAN;
    size_t node = 0;
    IopProof boolean;
    MaxProofBundle max;
    CopyProof copy;
};

struct FoldGroup {
    std::string key;
    BlockKind kind = BlockKind::Add;
    std::vector<size_t> node_indices;  // dag nodes contributing, in order
    FoldTree tree;
};

struct ProofBundle {
    std::array<uint8_t, 32> model_hash{};
    std::array<uint8_t, 32> srs_hash{};
    uint32_t scale_bits = 0;
    u64 seed = 0;
    // per-edge commitments for Witness/Weight/Bcast/Output edges
    std::map<uint32_t, std::vector<G1>> edge_coms;
    std::vector<FoldGroup> groups;  // sorted by key
    std::vector<StandaloneProof> standalone;
    std::vector<std::vector<int64_t>> outputs;  // revealed output edge values (per row)
};

ProofBundle prove_model(const BlockDag& dag, const WitnessStore& store, ProverContext& ctx,
                        const std::array<uint8_t, 32>& model_hash, size_t workers, u64 seed);

struct VerifierReport {
    bool overall = false;
    std::vector<std::pair<std::string, bool>> components;  // name -> pass
    std::string first_failure;
    double seconds = 0;

    void add(const std::string& name, bool ok) {
        components.emplace_back(name, ok);
        if (!ok && first_failure.empty()) first_failure = name;
    }
};

VerifierReport verify_model(const BlockDag& dag, const ProofBundle& bundle, ProverContext& ctx,
                            const std::array<uint8_t, 32>& model_hash);

std::vector<uint8_t> serialize_bundle(const ProofBundle& b);
ProofBundle deserialize_bundle(std::span<const uint8_t> bytes);

// structure for a dag node's fold group (params + tables resolved)
BlockStructure node_structure(const BlockDag& dag, const DagNode& n, ProverContext& ctx,
                              const SharedRandomness& rand);

}  // namespace zkt
