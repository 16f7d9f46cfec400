#pragma once

// Test-only oracles, independent of the library evaluation path.

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

// Brute-force principal-value product prod (1 - z/t) over points supplied in
// |t|-ascending order. No tail correction, no rescaling tricks.
inline std::complex<double> vp_product(const std::vector<double>& points_by_abs,
                                       std::complex<double> z) {
    std::complex<double> acc(1.0, 0.0);
    for (double t : points_by_abs) acc *= 1.0 - z / t;
    return acc;
}

// Same for the node derivative: -(1/t_n) prod_{m != n} (1 - t_n/t_m).
inline double vp_node_deriv(const std::vector<double>& points_by_abs, double tn) {
    double acc = -1.0 / tn;
    for (double t : points_by_abs) {
        if (t == tn) continue;
        acc *= 1.0 - tn / t;
    }
    return acc;
}

// Central finite difference with a relative step.
template <typename F>
double finite_difference(F f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::vector<double> livsic_points_by_abs(int per_side, double c = 1.0) {
    std::vector<double> pts;
    for (int n = 0; n < per_side; ++n) {
        pts.push_back((n + 0.5) / c);
        pts.push_back(-(n + 0.5) / c);
    }
    return pts;
}

inline std::vector<double> squares_points(int count) {
    std::vector<double> pts;
    for (int n = 1; n <= count; ++n) pts.push_back(double(n) * n);
    return pts;
}

} // namespace oracle
