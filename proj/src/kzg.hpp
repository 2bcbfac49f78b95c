#pragma once

#include <optional>
#include <string>

#include "pairing.hpp"
#include "poly.hpp"

namespace zkt {

// Structured reference string: powers of a trapdoor in both source groups.
// Test-mode setup keeps the trapdoor so simulator-style tests can use it.
struct Srs {
    std::vector<G1> g1;  // [tau^i]_1, i in [0, d]
    std::vector<G2> g2;  // [tau^i]_2, i in [0, d]
    G1 h;                // auxiliary G1 point for additive blinding
    std::optional<Fr> test_trapdoor;

    size_t max_degree() const { return g1.empty() ? 0 : g1.size() - 1; }

    static Srs setup(std::span<const uint8_t> seed, size_t degree, bool keep_trapdoor = true);
    static Srs setup_str(const std::string& seed, size_t degree, bool keep_trapdoor = true);

    std::vector<uint8_t> serialize() const;
    static Srs deserialize(std::span<const uint8_t> bytes);
    void save(const std::string& path) const;
    static Srs load(const std::string& path);

    std::array<uint8_t, 32> digest() const;

    // pairing spot-check of power consistency
    bool spot_check(size_t samples = 4) const;
};

G1 kzg_commit(const Srs& srs, const Poly& f);
// additive hiding variant: point + blinder * H
G1 kzg_commit_blinded(const Srs& srs, const Poly& f, const Fr& blinder);
G2 kzg_commit_g2(const Srs& srs, const Poly& f);

struct OpeningProof {
    G1 witness;  // [q(tau)]_1
    Fr point;
    Fr value;
};

OpeningProof kzg_open(const Srs& srs, const Poly& f, const Fr& x);
bool kzg_verify(const Srs& srs, const G1& com, const OpeningProof& pf);

// h(X) = sum gamma^i (f_i(X) - f_i(x)) / (X - x); single witness for many polys.
G1 kzg_batch_open(const Srs& srs, std::span<const Poly> fs, const Fr& x, const Fr& gamma);
bool kzg_batch_verify(const Srs& srs, std::span<const G1> coms, std::span<const Fr> values,
                      const Fr& x, const Fr& gamma, const G1& witness);

}  // namespace zkt
