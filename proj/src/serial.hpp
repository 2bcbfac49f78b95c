#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curve.hpp"
#include "errors.hpp"
#include "ext_field.hpp"

namespace zkt {

struct ByteWriter {
    std::vector<uint8_t> buf;

    void bytes(const uint8_t* p, size_t n) { buf.insert(buf.end(), p, p + n); }
    void u8(uint8_t v) { buf.push_back(v); }
    void u32(uint32_t v) { bytes((uint8_t*)&v, 4); }
    void u64v(u64 v) { bytes((uint8_t*)&v, 8); }
    void tag(const char* t4) { bytes((const uint8_t*)t4, std::strlen(t4)); }
    void fr(const Fr& v) {
        uint8_t b[32];
        v.to_bytes(b);
        bytes(b, 32);
    }
    void fp(const Fp& v) {
        uint8_t b[32];
        v.to_bytes(b);
        bytes(b, 32);
    }
    void g1(const G1& p) {
        uint8_t b[G1_BYTES];
        g1_write(p, b);
        bytes(b, G1_BYTES);
    }
    void g2(const G2& p) {
        uint8_t b[G2_BYTES];
        g2_write(p, b);
        bytes(b, G2_BYTES);
    }
    void gt(const Gt& g) {
        const Fp2* cs[6] = {&g.v.c0.c0, &g.v.c0.c1, &g.v.c0.c2,
                            &g.v.c1.c0, &g.v.c1.c1, &g.v.c1.c2};
        for (auto* c : cs) {
            fp(c->c0);
            fp(c->c1);
        }
    }
    void str(const std::string& s) {
        u64v(s.size());
        bytes((const uint8_t*)s.data(), s.size());
    }
};

struct ByteReader {
    std::span<const uint8_t> data;
    size_t pos = 0;

    explicit ByteReader(std::span<const uint8_t> d) : data(d) {}

    void need(size_t n) const {
        if (pos + n > data.size()) throw FormatError("truncated input");
    }
    const uint8_t* take(size_t n) {
        need(n);
        const uint8_t* p = data.data() + pos;
        pos += n;
        return p;
    }
    uint8_t u8() { return *take(1); }
    uint32_t u32() {
        uint32_t v;
        std::memcpy(&v, take(4), 4);
        return v;
    }
    u64 u64v() {
        u64 v;
        std::memcpy(&v, take(8), 8);
        return v;
    }
    void expect_tag(const char* t) {
        size_t n = std::strlen(t);
        const uint8_t* p = take(n);
        if (std::memcmp(p, t, n) != 0) throw FormatError(std::string("bad magic, expected ") + t);
    }
    Fr fr() { return Fr::from_bytes(take(32)); }
    Fp fp() { return Fp::from_bytes(take(32)); }
    G1 g1() {
        auto p = g1_read(take(G1_BYTES));
        if (!p) throw FormatError("invalid G1 point");
        return *p;
    }
    G2 g2() {
        auto p = g2_read(take(G2_BYTES));
        if (!p) throw FormatError("invalid G2 point");
        return *p;
    }
    Gt gt() {
        Gt g;
        Fp2* cs[6] = {&g.v.c0.c0, &g.v.c0.c1, &g.v.c0.c2, &g.v.c1.c0, &g.v.c1.c1, &g.v.c1.c2};
        for (auto* c : cs) {
            c->c0 = fp();
            c->c1 = fp();
        }
        return g;
    }
    std::string str() {
        u64 n = u64v();
        if (n > data.size() - pos) throw FormatError("truncated string");
        const uint8_t* p = take(n);
        return std::string((const char*)p, n);
    }
    bool done() const { return pos == data.size(); }
};

}  // namespace zkt
