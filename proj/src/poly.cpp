#include "poly.hpp"

namespace zkt {

namespace {
// 5 is a multiplicative generator of Fr; (r-1) = 2^28 * q.
constexpr int TWO_ADICITY = 28;

Fr two_adic_root(int log_n) {
    // 5^((r-1)/2^28) then square down to the requested order
    Limbs q = FrParams::MOD;
    q[0] -= 1;
    for (int i = 0; i < TWO_ADICITY; ++i) {
        u64 carry = 0;
        for (int j = 3; j >= 0; --j) {
            u64 cur = q[j];
            q[j] = (cur >> 1) | (carry << 63);
            carry = cur & 1;
        }
    }
    Fr root = Fr::from_u64(5).pow(q);
    for (int i = 0; i < TWO_ADICITY - log_n; ++i) root = root.sqr();
    return root;
}
}  // namespace

EvaluationDomain EvaluationDomain::radix2(size_t n) {
    if (n == 0 || (n & (n - 1)) != 0) throw ConfigError("domain size must be a power of two");
    int log_n = 0;
    while (((size_t)1 << log_n) < n) ++log_n;
    if (log_n > TWO_ADICITY) throw ConfigError("domain size exceeds field two-adicity");
    EvaluationDomain d;
    d.n = n;
    d.log_n = log_n;
    d.omega = two_adic_root(log_n);
    d.omega_inv = d.omega.inverse();
    d.n_inv = Fr::from_u64(n).inverse();
    return d;
}

std::vector<Fr> EvaluationDomain::elements() const {
    std::vector<Fr> out(n);
    Fr cur = Fr::one();
    for (size_t i = 0; i < n; ++i) {
        out[i] = cur;
        cur = cur.mul(omega);
    }
    return out;
}

void fft_in_place(std::vector<Fr>& a, const EvaluationDomain& d, bool invert) {
    size_t n = d.n;
    if (a.size() != n) throw ShapeError("fft size mismatch");
    // bit reversal
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        Fr wn = invert ? d.omega_inv : d.omega;
        for (size_t k = len; k < n; k <<= 1) wn = wn.sqr();
        for (size_t i = 0; i < n; i += len) {
            Fr w = Fr::one();
            for (size_t j = 0; j < len / 2; ++j) {
                Fr u = a[i + j];
                Fr v = a[i + j + len / 2].mul(w);
                a[i + j] = u.add(v);
                a[i + j + len / 2] = u.sub(v);
                w = w.mul(wn);
            }
        }
    }
    if (invert) {
        for (auto& x : a) x = x.mul(d.n_inv);
    }
}

Poly Poly::add(const Poly& o) const {
    std::vector<Fr> out(std::max(c.size(), o.c.size()), Fr::zero());
    for (size_t i = 0; i < c.size(); ++i) out[i] = c[i];
    for (size_t i = 0; i < o.c.size(); ++i) out[i] = out[i].add(o.c[i]);
    return Poly{std::move(out)};
}

Poly Poly::sub(const Poly& o) const {
    std::vector<Fr> out(std::max(c.size(), o.c.size()), Fr::zero());
    for (size_t i = 0; i < c.size(); ++i) out[i] = c[i];
    for (size_t i = 0; i < o.c.size(); ++i) out[i] = out[i].sub(o.c[i]);
    return Poly{std::move(out)};
}

Poly Poly::scale(const Fr& s) const {
    std::vector<Fr> out(c);
    for (auto& x : out) x = x.mul(s);
    return Poly{std::move(out)};
}

Poly Poly::mul(const Poly& o) const {
    if (is_zero() || o.is_zero()) return zero();
    size_t out_len = c.size() + o.c.size() - 1;
    if (out_len < 64) {
        std::vector<Fr> out(out_len, Fr::zero());
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = 0; j < o.c.size(); ++j) out[i + j] = out[i + j].add(c[i].mul(o.c[j]));
        return Poly{std::move(out)};
    }
    size_t n = 1;
    while (n < out_len) n <<= 1;
    EvaluationDomain d = EvaluationDomain::radix2(n);
    std::vector<Fr> fa(n, Fr::zero()), fb(n, Fr::zero());
    std::copy(c.begin(), c.end(), fa.begin());
    std::copy(o.c.begin(), o.c.end(), fb.begin());
    fft_in_place(fa, d, false);
    fft_in_place(fb, d, false);
    for (size_t i = 0; i < n; ++i) fa[i] = fa[i].mul(fb[i]);
    fft_in_place(fa, d, true);
    fa.resize(out_len);
    return Poly{std::move(fa)};
}

Poly Poly::shift(size_t k) const {
    if (is_zero()) return zero();
    std::vector<Fr> out(c.size() + k, Fr::zero());
    std::copy(c.begin(), c.end(), out.begin() + (long)k);
    return Poly{std::move(out)};
}

Poly interpolate(const std::vector<Fr>& evals, const EvaluationDomain& d) {
    if (evals.size() != d.n) throw ShapeError("interpolate: length mismatch with domain");
    std::vector<Fr> a(evals);
    fft_in_place(a, d, true);
    return Poly{std::move(a)};
}

std::vector<Fr> evaluate_on_domain(const Poly& f, const EvaluationDomain& d) {
    std::vector<Fr> a(d.n, Fr::zero());
    if (f.c.size() <= d.n) {
        std::copy(f.c.begin(), f.c.end(), a.begin());
    } else {
        // fold coefficients mod X^n - 1
        for (size_t i = 0; i < f.c.size(); ++i) a[i % d.n] = a[i % d.n].add(f.c[i]);
    }
    fft_in_place(a, d, false);
    return a;
}

Poly quotient_by_vanishing(const Poly& numerator, const EvaluationDomain& d) {
    if (numerator.is_zero()) return Poly::zero();
    size_t n = d.n;
    long deg = numerator.degree();
    if (deg < (long)n) throw WitnessError("quotient_by_vanishing: numerator does not vanish on H");
    std::vector<Fr> q((size_t)deg - n + 1, Fr::zero());
    for (long i = deg; i >= (long)n; --i) {
        Fr qi = numerator.coeff((size_t)i);
        size_t qidx = (size_t)i - n;
        if (qidx + n < q.size()) qi = qi.add(q[qidx + n]);
        q[qidx] = qi;
    }
    // remainder must be identically zero
    for (size_t i = 0; i < n; ++i) {
        Fr r = numerator.coeff(i).add(i < q.size() ? q[i] : Fr::zero());
        if (!r.is_zero()) throw WitnessError("quotient_by_vanishing: nonzero remainder");
    }
    return Poly{std::move(q)};
}

Poly quotient_linear(const Poly& f, const Fr& x, const Fr& y) {
    if (!(f.eval(x) == y)) throw WitnessError("quotient_linear: f(x) != y");
    if (f.is_zero()) return Poly::zero();
    // synthetic division of f - y by (X - x)
    std::vector<Fr> c(f.c);
    c[0] = c[0].sub(y);
    std::vector<Fr> q(c.size() > 1 ? c.size() - 1 : 0, Fr::zero());
    Fr carry = Fr::zero();
    for (size_t i = c.size(); i-- > 1;) {
        Fr qi = c[i].add(carry);
        q[i - 1] = qi;
        carry = qi.mul(x);
    }
    return Poly{std::move(q)};
}

}  // namespace zkt
