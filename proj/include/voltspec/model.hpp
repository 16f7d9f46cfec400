#pragma once

#include <memory>
#include <string>
#include <vector>

#include "voltspec/perturbation.hpp"
#include "voltspec/product.hpp"
#include "voltspec/winding.hpp"

namespace vs {

struct ModelOptions {
    double delta_rho = 0.0;       // real constant of the Herglotz sum behind Theta
    double radius_fraction = 0.5; // rectangles must stay inside this times max|t|
    double clearance_factor = 1e-3;
    double contour_min_abs = 1e-10;
};

struct WindingReport {
    Rect rect;
    long winding = 0;
    long poles_inside = 0;
    long zeros = 0;
    double min_abs_on_contour = 0.0;
    int refinement_depth = 0;
    std::size_t samples = 0;

    std::string to_json(int indent = -1) const;
};

struct LivsicReport {
    WindingReport winding;
    double slope = 0.0;          // linear coefficient of log|g(iy)| in y
    double slope_residual = 0.0; // rms of the linear fit
};

// Coupled evaluators for the model functions rho, beta, Theta, phi, E over a
// perturbation datum. Pure and immutable; evaluations are independent.
class ModelEvaluator {
public:
    ModelEvaluator(std::shared_ptr<const PerturbationData> data, GeneratingFunction g,
                   ModelOptions options = {});
    ModelEvaluator(const PerturbationData& data, GeneratingFunction g, ModelOptions options = {});

    const PerturbationData& data() const { return *data_; }
    const GeneratingFunction& generating() const { return g_; }
    const ModelOptions& options() const { return options_; }

    cplx rho(cplx z) const;   // delta_rho + sum w_n ((t-z)^-1 - t^-1), w = |b|^2 mu
    cplx beta(cplx z) const;  // delta + sum c_n ((t-z)^-1 - t^-1)
    cplx theta(cplx z) const; // (i - rho)/(i + rho)
    cplx phi(cplx z) const;   // beta (1 + Theta)/2
    cplx phi_tilde(cplx z) const;
    cplx E(cplx z) const; // 2A/(1 + Theta)
    cplx A(cplx z) const;
    cplx B(cplx z) const; // (E* - E)/(2i)

    // Clark mass at a node: lim eps->0 of eps Im rho(t + i eps), extrapolated
    // over the ladder {1e-2, 1e-3, 1e-4}.
    double clark_mass(std::size_t pos) const;

    // Zeros of beta inside the rectangle by the argument principle; the node
    // poles inside are counted from the data. Contour probes are recorded
    // when a collector is supplied.
    WindingReport count_zeros(const Rect& rect,
                              std::vector<ContourSample>* samples = nullptr) const;

    // Dissipative-pattern evaluator g = -A + i(B - delta_rho A); requires
    // a = i b and delta = -1.
    cplx livsic_g(cplx z) const;
    LivsicReport livsic_report(const Rect& rect, double y_lo = 2.0, double y_hi = 20.0) const;

private:
    void require_livsic_pattern() const;
    cplx herglotz_sum(const std::vector<double>& w, cplx z) const;
    cplx coefficient_sum(const std::vector<cplx>& w, cplx z) const;
    void check_proximity(cplx z) const;
    // (rho - delta_rho + i) resolved in extended precision for the lower
    // half-plane, with analytic completion of the arithmetic tail.
    cplx psi_plus_i(cplx z) const;

    std::shared_ptr<const PerturbationData> data_;
    GeneratingFunction g_;
    ModelOptions options_;
    std::vector<double> w_; // |b_n|^2 mu_n
};

} // namespace vs
