#pragma once

#include <cstdint>

#include "field.hpp"

// Deterministic test randomness.
struct TestRng {
    uint64_t s;
    explicit TestRng(uint64_t seed = 42) : s(seed) {}
    uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    zkt::Fr fr() {
        zkt::Limbs l{next(), next(), next(), next()};
        return zkt::Fr::from_limbs(l);
    }
    zkt::Fp fp() {
        zkt::Limbs l{next(), next(), next(), next()};
        return zkt::Fp::from_limbs(l);
    }
};
