#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "voltspec/krein.hpp"
#include "voltspec/product.hpp"
#include "voltspec/spectrum.hpp"

namespace vs {

enum class MassPolicy { unit, abs_c };

struct SmoothSpec {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double gamma = 2.0; // weight exponent of the convergence hypothesis
    bool rescale = false;
};

// Summary of the smooth-synthesis bookkeeping. Weighted sums refer to the
// construction vectors before any rescaling; divergence ratios to the final
// (rescaled) vectors.
struct SmoothDiag {
    double weighted_a_total = 0.0, weighted_a_last_quarter = 0.0;
    double weighted_b_total = 0.0, weighted_b_last_quarter = 0.0;
    double divergence_ratio_a = 0.0, divergence_ratio_b = 0.0;
    int rescale_exponent = 0;
};

// Data (mu, a, b, delta) of a rank-one perturbation over a spectrum. Arrays
// align with the spectrum's ascending point order. Immutable once built.
struct PerturbationData {
    std::shared_ptr<const Spectrum> spectrum;
    std::vector<double> mu;
    std::vector<cplx> a, b;
    double delta = 1.0; // the constant entering beta

    std::vector<cplx> c; // a_n conj(b_n) mu_n, cached

    bool synthesized = false;
    bool forced = false;
    MassPolicy masses = MassPolicy::unit;
    std::optional<SmoothSpec> smooth;
    std::optional<SmoothDiag> smooth_diag;
    std::string note;

    std::size_t size() const { return mu.size(); }

    std::string to_json(int indent = -1) const;
    static PerturbationData from_json(const std::string& text);
};

// Annihilating data per the convergent pole expansion of 1/A: c_n = -1/A'(t_n)
// under g's truncation policy, delta = 1/A(0) = 1. Refuses when the spectrum
// is not Removable unless force is set.
PerturbationData synthesize(const Spectrum& s, const GeneratingFunction& g,
                            MassPolicy masses = MassPolicy::unit, bool force = false);

// Weighted variant: vectors gain |t|^{±(2-2a1-gamma)/2} factors; optional
// parity rescaling pushes them out of l^2(mu) while keeping the weighted sums
// finite. Requires alpha1 + alpha2 <= 2 - gamma.
PerturbationData synthesize_smooth(const Spectrum& s, const GeneratingFunction& g,
                                   const SmoothSpec& spec, bool force = false);

// Verbatim data; validated against the |c_n|/t_n^2 summability proxy.
PerturbationData arbitrary_data(const Spectrum& s, std::vector<double> mu,
                                std::vector<cplx> a, std::vector<cplx> b, double delta);

// Verbatim data from coefficients c_n (unit masses, a_n = |c|^{1/2} pattern).
PerturbationData arbitrary_from_c(const Spectrum& s, const std::vector<cplx>& c, double delta);

// Dissipative pattern: a = i b, |b|^2 mu = 1/pi, delta = -1.
PerturbationData livsic_data(const Spectrum& s);

} // namespace vs
