#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "voltspec/errors.hpp"

namespace vs {

struct Rect {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    bool contains(std::complex<double> z) const {
        return z.real() > x0 && z.real() < x1 && z.imag() > y0 && z.imag() < y1;
    }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

struct ContourSample {
    double x = 0, y = 0, re = 0, im = 0, phase = 0;
};

struct WindingOptions {
    double min_abs_fail = 0.0;      // contour_error below this magnitude
    int max_depth = 42;             // per-segment bisection cap
    std::size_t max_samples = 4000000;
    int initial_per_edge = 16;
    std::vector<ContourSample>* collect = nullptr; // record probe points
};

std::string contour_samples_csv(const std::vector<ContourSample>& samples);

struct WindingResult {
    long winding = 0;
    double min_abs = 0.0;
    int refinement_depth = 0;
    std::size_t samples = 0;
    double residual = 0.0; // distance of the phase total from the integer
};

// Winding number of f along the positively oriented rectangle boundary,
// by adaptive argument continuation: any phase step of pi/2 or more forces
// a bisection of the segment.
WindingResult winding_number(const std::function<std::complex<double>(std::complex<double>)>& f,
                             const Rect& rect, const WindingOptions& opt = {});

} // namespace vs
