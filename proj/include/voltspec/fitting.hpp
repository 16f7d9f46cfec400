#pragma once

#include <cstddef>
#include <vector>

namespace vs {

// Least-squares decay law for a positive sequence given as log-values.
// Candidates: log y = a + b log n (power, p = -b) and log y = a + b n^alpha
// (exponential trend); the smaller residual wins.
struct DecayFit {
    enum class Kind { power, exp_decay, exp_growth };

    Kind kind = Kind::power;
    double p = 0.0;        // power exponent (kind == power)
    double coefficient = 0.0; // slope b of the winning design
    double alpha = 1.0;    // n^alpha used by the exponential design
    double intercept = 0.0;
    double rms_residual = 0.0;
    double range = 0.0;    // spread of fitted values over the window
    std::size_t window_lo = 0, window_hi = 0; // 1-based ranks, inclusive

    // Series sum_n y_n converges under the fitted law.
    bool converges() const;
};

// Fit over the last half of the given log-values (1-based ranks attach to
// positions). alphas lists the exponents scanned for the exponential design.
DecayFit fit_decay(const std::vector<double>& log_values,
                   const std::vector<double>& extra_alphas = {});

} // namespace vs
