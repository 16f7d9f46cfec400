#pragma once

// Minimal __float128 complex arithmetic for deep-lower-half-plane sums whose
// true values sit far below double's accumulation noise. Only the operations
// the model evaluators need; conversion back to double happens after the
// cancellation has been resolved.

#include <complex>

namespace vs::quad {

using f128 = __float128;

struct qc {
    f128 re = 0, im = 0;
};

inline qc make(double re, double im) { return {f128(re), f128(im)}; }

inline qc add(qc a, qc b) { return {a.re + b.re, a.im + b.im}; }
inline qc sub(qc a, qc b) { return {a.re - b.re, a.im - b.im}; }
inline qc mul(qc a, qc b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline qc scale(qc a, f128 s) { return {a.re * s, a.im * s}; }

inline qc inv(qc a) {
    f128 d = a.re * a.re + a.im * a.im;
    return {a.re / d, -a.im / d};
}

inline qc div(qc a, qc b) { return mul(a, inv(b)); }

inline std::complex<double> to_double(qc a) {
    return {static_cast<double>(a.re), static_cast<double>(a.im)};
}

// One-sided arithmetic tail sum  sum_{j>=1} (start + j h)^{-m}  by
// Euler-Maclaurin with five correction terms; good to ~1e-24 relative for
// start/h >= 1e3.
inline f128 arithmetic_tail_sum(f128 start, f128 h, int m) {
    const f128 M = start + h; // first tail point
    auto powm = [](f128 x, int k) {
        f128 r = 1;
        for (int i = 0; i < k; ++i) r *= x;
        return r;
    };
    f128 inv_m = 1 / powm(M, m);
    // integral from M to infinity of x^-m dx / h
    f128 integral = M * inv_m / (h * (m - 1));
    f128 fM = inv_m;
    f128 f1 = -m * inv_m / M;                          // f'
    f128 f3 = -f128(m) * (m + 1) * (m + 2) * inv_m / powm(M, 3); // f'''
    f128 f5 = -f128(m) * (m + 1) * (m + 2) * (m + 3) * (m + 4) * inv_m / powm(M, 5);
    return integral + fM / 2 - (h * f1) / 12 + (h * h * h * f3) / 720 -
           (h * h * h * h * h * f5) / 30240;
}

} // namespace vs::quad
