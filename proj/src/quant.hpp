#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"

namespace zkt {

// Fixed-point scalar semantics shared by the lookup-table builder, the
// witness generator, and the reference evaluator. Values are integers
// v ~ round(real * 2^scale); negatives use the field complement when encoded.

inline int64_t quant_round(double x) {
    // half away from zero
    return (int64_t)(x >= 0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

inline int64_t quant_encode(double real, int scale_bits) {
    return quant_round(real * (double)(1ll << scale_bits));
}

inline double quant_decode(int64_t v, int scale_bits) {
    return (double)v / (double)(1ll << scale_bits);
}

// Directed rescale: x -> round(x / 2^k), half away from zero.
inline int64_t quant_rescale(int64_t v, int k) {
    if (k == 0) return v;
    int64_t bias = 1ll << (k - 1);
    if (v >= 0) return (v + bias) >> k;
    return -((-v + bias) >> k);
}

enum class QuantFn : uint8_t {
    Identity,
    Rescale,     // param = shift bits
    Relu,
    ReluRescale, // relu then rescale by param bits
    Gelu,        // fused tanh-approximation at the edge scale
    Tanh,
    Sigmoid,
    Exp,
    Cube,        // x^3 with rescale back to input scale
};

inline const char* quant_fn_name(QuantFn f) {
    switch (f) {
        case QuantFn::Identity: return "identity";
        case QuantFn::Rescale: return "rescale";
        case QuantFn::Relu: return "relu";
        case QuantFn::ReluRescale: return "relu_rescale";
        case QuantFn::Gelu: return "gelu";
        case QuantFn::Tanh: return "tanh";
        case QuantFn::Sigmoid: return "sigmoid";
        case QuantFn::Exp: return "exp";
        case QuantFn::Cube: return "cube";
    }
    return "?";
}

// Apply fn to a fixed-point input at scale s (param as documented per fn).
inline int64_t quant_apply(QuantFn fn, int64_t v, int scale_bits, int param = 0) {
    double x = quant_decode(v, scale_bits);
    switch (fn) {
        case QuantFn::Identity: return v;
        case QuantFn::Rescale: return quant_rescale(v, param);
        case QuantFn::Relu: return v > 0 ? v : 0;
        case QuantFn::ReluRescale: {
            int64_t r = quant_rescale(v, param);
            return r > 0 ? r : 0;
        }
        case QuantFn::Gelu: {
            double t = 0.5 * x * (1.0 + std::tanh(0.7978845608028654 * (x + 0.044715 * x * x * x)));
            return quant_encode(t, scale_bits);
        }
        case QuantFn::Tanh: return quant_encode(std::tanh(x), scale_bits);
        case QuantFn::Sigmoid: return quant_encode(1.0 / (1.0 + std::exp(-x)), scale_bits);
        case QuantFn::Exp: return quant_encode(std::exp(x), scale_bits);
        case QuantFn::Cube: {
            // x^3 carries scale 3s; bring back to s
            __int128 c = (__int128)v * v;
            c = c * v;
            int k = 2 * scale_bits;
            __int128 bias = (__int128)1 << (k - 1);
            __int128 r = c >= 0 ? (c + bias) >> k : -((-c + bias) >> k);
            return (int64_t)r;
        }
    }
    throw ConfigError("unknown quant fn");
}

inline Fr field_encode(int64_t v) { return Fr::from_i64((long long)v); }

inline int64_t field_decode(const Fr& f) {
    Limbs c = f.canonical();
    if (!f.is_negative()) {
        if (c[1] || c[2] || c[3] || c[0] > (u64)INT64_MAX)
            throw QuantOverflowError("field value out of int64 range");
        return (int64_t)c[0];
    }
    Limbs neg = f.neg().canonical();
    if (neg[1] || neg[2] || neg[3] || neg[0] > (u64)INT64_MAX)
        throw QuantOverflowError("field value out of int64 range");
    return -(int64_t)neg[0];
}

// Fixed-point tensor: leading dims flattened to rows, last axis is the
// polynomial dimension (padded to a power of two when committed).
struct ScaledTensor {
    std::vector<size_t> shape;
    int scale_bits = 0;
    std::vector<int64_t> data;  // row-major

    size_t rank() const { return shape.size(); }
    size_t numel() const {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        return n;
    }
    size_t rows() const {
        size_t n = 1;
        for (size_t i = 0; i + 1 < shape.size(); ++i) n *= shape[i];
        return shape.empty() ? 1 : n;
    }
    size_t row_len() const { return shape.empty() ? 1 : shape.back(); }

    int64_t& at(size_t flat) { return data[flat]; }
    int64_t at(size_t flat) const { return data[flat]; }
};

inline size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace zkt
