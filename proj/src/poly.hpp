#pragma once

#include "errors.hpp"
#include "field.hpp"

namespace zkt {

// Radix-2 multiplicative subgroup of Fr.
struct EvaluationDomain {
    size_t n = 1;
    int log_n = 0;
    Fr omega = Fr::one();
    Fr omega_inv = Fr::one();
    Fr n_inv = Fr::one();

    static EvaluationDomain radix2(size_t n);

    std::vector<Fr> elements() const;
    // X^n - 1 at x
    Fr vanishing_at(const Fr& x) const {
        return x.pow({(u64)n, 0, 0, 0}).sub(Fr::one());
    }
};

void fft_in_place(std::vector<Fr>& a, const EvaluationDomain& d, bool invert);

// Coefficient-form univariate polynomial, low-to-high, trailing zeros trimmed.
struct Poly {
    std::vector<Fr> c;

    Poly() = default;
    explicit Poly(std::vector<Fr> coeffs) : c(std::move(coeffs)) { trim(); }
    static Poly zero() { return Poly{}; }
    static Poly constant(const Fr& v) { return Poly{{v}}; }

    void trim() {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
    }
    bool is_zero() const { return c.empty(); }
    // degree of zero polynomial treated as -1
    long degree() const { return (long)c.size() - 1; }
    Fr coeff(size_t i) const { return i < c.size() ? c[i] : Fr::zero(); }

    Fr eval(const Fr& x) const {
        Fr acc = Fr::zero();
        for (size_t i = c.size(); i-- > 0;) acc = acc.mul(x).add(c[i]);
        return acc;
    }

    Poly add(const Poly& o) const;
    Poly sub(const Poly& o) const;
    Poly scale(const Fr& s) const;
    Poly mul(const Poly& o) const;
    // multiply by X^k
    Poly shift(size_t k) const;

    bool operator==(const Poly& o) const { return c == o.c; }
};

// f(omega^i) = evals[i]; inverse of evaluation on the domain.
Poly interpolate(const std::vector<Fr>& evals, const EvaluationDomain& d);
std::vector<Fr> evaluate_on_domain(const Poly& f, const EvaluationDomain& d);

// Exact division by X^n - 1; throws WitnessError when the remainder is nonzero.
Poly quotient_by_vanishing(const Poly& numerator, const EvaluationDomain& d);

// q = (f - y) / (X - x); throws WitnessError unless f(x) = y.
Poly quotient_linear(const Poly& f, const Fr& x, const Fr& y);

}  // namespace zkt
