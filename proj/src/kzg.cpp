#include "kzg.hpp"

#include <openssl/sha.h>

#include <fstream>

#include "serial.hpp"

namespace zkt {

namespace {

Fr hash_to_fr(std::span<const uint8_t> seed, const char* tag) {
    std::vector<uint8_t> buf(seed.begin(), seed.end());
    buf.insert(buf.end(), tag, tag + std::strlen(tag));
    uint8_t wide[64];
    buf.push_back(0);
    SHA256(buf.data(), buf.size(), wide);
    buf.back() = 1;
    SHA256(buf.data(), buf.size(), wide + 32);
    return Fr::from_bytes_wide(wide);
}

G1 hash_to_g1(std::span<const uint8_t> seed, const char* tag) {
    std::vector<uint8_t> buf(seed.begin(), seed.end());
    buf.insert(buf.end(), tag, tag + std::strlen(tag));
    buf.push_back(0);
    for (uint8_t ctr = 0;; ++ctr) {
        buf.back() = ctr;
        uint8_t h[32];
        SHA256(buf.data(), buf.size(), h);
        Limbs raw;
        std::memcpy(raw.data(), h, 32);
        Fp x = Fp::from_limbs(raw);
        auto y = fp_sqrt(x.sqr().mul(x).add(G1Curve::b()));
        if (y) return G1::from_affine(x, *y);
    }
}

constexpr size_t MAX_SRS_DEGREE = 1u << 22;

}  // namespace

Srs Srs::setup(std::span<const uint8_t> seed, size_t degree, bool keep_trapdoor) {
    if (degree < 1) throw ConfigError("srs degree must be >= 1");
    if (degree > MAX_SRS_DEGREE) throw ConfigError("srs degree exceeds memory budget");
    Fr tau = hash_to_fr(seed, "zkt-srs-tau");
    Srs srs;
    srs.g1.resize(degree + 1);
    srs.g2.resize(degree + 1);
    G1 g = G1::generator();
    G2 h2 = G2::generator();
    Fr power = Fr::one();
    for (size_t i = 0; i <= degree; ++i) {
        srs.g1[i] = g.scalar_mul(power);
        srs.g2[i] = h2.scalar_mul(power);
        power = power.mul(tau);
    }
    srs.h = hash_to_g1(seed, "zkt-srs-h");
    if (keep_trapdoor) srs.test_trapdoor = tau;
    return srs;
}

Srs Srs::setup_str(const std::string& seed, size_t degree, bool keep_trapdoor) {
    return setup(std::span<const uint8_t>((const uint8_t*)seed.data(), seed.size()), degree,
                 keep_trapdoor);
}

std::vector<uint8_t> Srs::serialize() const {
    ByteWriter w;
    w.tag("ZKTSRS01");
    w.u64v(max_degree());
    w.u64v(g1.size());
    for (const auto& p : g1) w.g1(p);
    w.u64v(g2.size());
    for (const auto& p : g2) w.g2(p);
    w.g1(h);
    // production serialization never contains the trapdoor
    w.u8(0);
    return std::move(w.buf);
}

Srs Srs::deserialize(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_tag("ZKTSRS01");
    u64 degree = r.u64v();
    if (degree > MAX_SRS_DEGREE) throw FormatError("srs degree exceeds memory budget");
    Srs srs;
    u64 n1 = r.u64v();
    if (n1 != degree + 1) throw FormatError("srs g1 count mismatch");
    srs.g1.reserve(n1);
    for (u64 i = 0; i < n1; ++i) srs.g1.push_back(r.g1());
    u64 n2 = r.u64v();
    if (n2 != degree + 1) throw FormatError("srs g2 count mismatch");
    srs.g2.reserve(n2);
    for (u64 i = 0; i < n2; ++i) srs.g2.push_back(r.g2());
    srs.h = r.g1();
    if (r.u8() != 0) throw FormatError("unexpected trapdoor flag in srs file");
    return srs;
}

void Srs::save(const std::string& path) const {
    auto bytes = serialize();
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp);
        f.write((const char*)bytes.data(), (long)bytes.size());
        if (!f) throw IoError("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("rename failed for " + path);
}

Srs Srs::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::array<uint8_t, 32> Srs::digest() const {
    auto bytes = serialize();
    std::array<uint8_t, 32> out;
    SHA256(bytes.data(), bytes.size(), out.data());
    return out;
}

bool Srs::spot_check(size_t samples) const {
    size_t d = max_degree();
    // e([tau^i]_1, [tau^j]_2) == e([tau^{i+j}]_1, [1]_2)
    u64 state = 0x5eedu;
    auto next = [&state] {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return state;
    };
    for (size_t s = 0; s < samples; ++s) {
        size_t i = next() % (d / 2 + 1);
        size_t j = next() % (d / 2 + 1);
        Gt lhs = pairing(g1[i], g2[j]);
        Gt rhs = pairing(g1[i + j], g2[0]);
        if (!(lhs == rhs)) return false;
    }
    return true;
}

G1 kzg_commit(const Srs& srs, const Poly& f) {
    if (f.is_zero()) return G1::identity();
    if ((size_t)f.degree() > srs.max_degree())
        throw ConfigError("polynomial degree exceeds srs bound");
    return msm(std::span<const G1>(srs.g1.data(), f.c.size()),
               std::span<const Fr>(f.c.data(), f.c.size()));
}

G1 kzg_commit_blinded(const Srs& srs, const Poly& f, const Fr& blinder) {
    return kzg_commit(srs, f).add(srs.h.scalar_mul(blinder));
}

G2 kzg_commit_g2(const Srs& srs, const Poly& f) {
    if (f.is_zero()) return G2::identity();
    if ((size_t)f.degree() > srs.max_degree())
        throw ConfigError("polynomial degree exceeds srs bound");
    return msm_g2(std::span<const G2>(srs.g2.data(), f.c.size()),
                  std::span<const Fr>(f.c.data(), f.c.size()));
}

OpeningProof kzg_open(const Srs& srs, const Poly& f, const Fr& x) {
    Fr y = f.eval(x);
    Poly q = quotient_linear(f, x, y);
    return {kzg_commit(srs, q), x, y};
}

bool kzg_verify(const Srs& srs, const G1& com, const OpeningProof& pf) {
    // e(pi, [tau - x]_2) == e(com - [y]_1, [1]_2)
    G2 tau_minus_x = srs.g2[1].sub(G2::generator().scalar_mul(pf.point));
    G1 com_minus_y = com.sub(G1::generator().scalar_mul(pf.value));
    // product form: e(pi, [tau-x]) * e(-(com-y), [1]) == 1
    std::array<G1, 2> ps{pf.witness, com_minus_y.neg()};
    std::array<G2, 2> qs{tau_minus_x, srs.g2[0]};
    return multi_pairing(ps, qs).is_one();
}

G1 kzg_batch_open(const Srs& srs, std::span<const Poly> fs, const Fr& x, const Fr& gamma) {
    Poly h = Poly::zero();
    Fr g = Fr::one();
    for (const auto& f : fs) {
        h = h.add(f.sub(Poly::constant(f.eval(x))).scale(g));
        g = g.mul(gamma);
    }
    Poly q = quotient_linear(h, x, Fr::zero());
    return kzg_commit(srs, q);
}

bool kzg_batch_verify(const Srs& srs, std::span<const G1> coms, std::span<const Fr> values,
                      const Fr& x, const Fr& gamma, const G1& witness) {
    if (coms.size() != values.size()) return false;
    G1 agg = G1::identity();
    Fr g = Fr::one();
    for (size_t i = 0; i < coms.size(); ++i) {
        agg = agg.add(coms[i].sub(G1::generator().scalar_mul(values[i])).scalar_mul(g));
        g = g.mul(gamma);
    }
    G2 tau_minus_x = srs.g2[1].sub(G2::generator().scalar_mul(x));
    std::array<G1, 2> ps{witness, agg.neg()};
    std::array<G2, 2> qs{tau_minus_x, srs.g2[0]};
    return multi_pairing(ps, qs).is_one();
}

}  // namespace zkt
