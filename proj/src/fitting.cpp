#include "voltspec/fitting.hpp"

#include <algorithm>
#include <cmath>

#include "voltspec/errors.hpp"

namespace vs {

namespace {

struct Line {
    double slope = 0.0, intercept = 0.0, rms = 0.0, range = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Line l;
    l.slope = sxx > 0 ? sxy / sxx : 0.0;
    l.intercept = my - l.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (l.intercept + l.slope * x[i]);
        ss += r * r;
    }
    l.rms = std::sqrt(ss / n);
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    l.range = std::fabs(l.slope) * (*hi - *lo);
    return l;
}

} // namespace

bool DecayFit::converges() const {
    if (kind == Kind::exp_decay) return true;
    if (kind == Kind::exp_growth) return false;
    return p > 1.0;
}

DecayFit fit_decay(const std::vector<double>& log_values,
                   const std::vector<double>& extra_alphas) {
    const std::size_t n = log_values.size();
    if (n < 16) throw insufficiency_error("fit_decay needs at least 16 terms");
    const std::size_t lo = n / 2; // last half, 0-based start
    std::vector<double> y(log_values.begin() + lo, log_values.end());
    const std::size_t m = y.size();

    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = std::log(double(lo + i + 1));
    Line power = least_squares(x, y);

    std::vector<double> alphas = {0.25, 0.5, 0.75, 1.0};
    for (double a : extra_alphas)
        if (a > 0.0 && a <= 1.0) alphas.push_back(a);

    Line best_exp;
    double best_alpha = 1.0;
    bool have_exp = false;
    for (double a : alphas) {
        for (std::size_t i = 0; i < m; ++i) x[i] = std::pow(double(lo + i + 1), a);
        Line l = least_squares(x, y);
        if (!have_exp || l.rms < best_exp.rms) {
            best_exp = l;
            best_alpha = a;
            have_exp = true;
        }
    }

    DecayFit fit;
    fit.window_lo = lo + 1;
    fit.window_hi = n;
    // prefer the exponential design only when it is both better and decisive:
    // at least a few e-folds of predicted change across the window.
    const bool exp_wins = best_exp.rms < power.rms && best_exp.range >= 3.0;
    if (exp_wins) {
        fit.kind = best_exp.slope < 0 ? DecayFit::Kind::exp_decay : DecayFit::Kind::exp_growth;
        fit.coefficient = best_exp.slope;
        fit.alpha = best_alpha;
        fit.intercept = best_exp.intercept;
        fit.rms_residual = best_exp.rms;
        fit.range = best_exp.range;
    } else {
        fit.kind = DecayFit::Kind::power;
        fit.p = -power.slope;
        fit.coefficient = power.slope;
        fit.intercept = power.intercept;
        fit.rms_residual = power.rms;
        fit.range = power.range;
    }
    return fit;
}

} // namespace vs
