#include "transcript.hpp"

#include <openssl/sha.h>

namespace zkt {

namespace {
void sha256(const std::vector<uint8_t>& data, uint8_t out[32]) {
    SHA256(data.data(), data.size(), out);
}
}  // namespace

Transcript::Transcript(std::string_view domain_tag) {
    absorb_bytes("domain", (const uint8_t*)domain_tag.data(), domain_tag.size());
}

void Transcript::absorb_bytes(std::string_view label, const uint8_t* data, size_t len) {
    std::vector<uint8_t> buf;
    buf.reserve(32 + 8 + label.size() + 8 + len);
    buf.insert(buf.end(), state_.begin(), state_.end());
    u64 ll = label.size();
    buf.insert(buf.end(), (uint8_t*)&ll, (uint8_t*)&ll + 8);
    buf.insert(buf.end(), label.begin(), label.end());
    u64 dl = len;
    buf.insert(buf.end(), (uint8_t*)&dl, (uint8_t*)&dl + 8);
    buf.insert(buf.end(), data, data + len);
    sha256(buf, state_.data());
}

void Transcript::absorb_u64(std::string_view label, u64 v) {
    absorb_bytes(label, (const uint8_t*)&v, 8);
}

void Transcript::absorb_fr(std::string_view label, const Fr& v) {
    uint8_t b[32];
    v.to_bytes(b);
    absorb_bytes(label, b, 32);
}

void Transcript::absorb_g1(std::string_view label, const G1& p) {
    uint8_t b[G1_BYTES];
    g1_write(p, b);
    absorb_bytes(label, b, G1_BYTES);
}

void Transcript::absorb_g2(std::string_view label, const G2& p) {
    uint8_t b[G2_BYTES];
    g2_write(p, b);
    absorb_bytes(label, b, G2_BYTES);
}

Fr Transcript::challenge(std::string_view label) {
    absorb_bytes("chal", (const uint8_t*)label.data(), label.size());
    uint8_t wide[64];
    std::vector<uint8_t> buf(state_.begin(), state_.end());
    buf.push_back(0);
    sha256(buf, wide);
    buf.back() = 1;
    sha256(buf, wide + 32);
    // fold the draw back into the state so successive challenges differ
    absorb_bytes("drawn", wide, 64);
    return Fr::from_bytes_wide(wide);
}

}  // namespace zkt
