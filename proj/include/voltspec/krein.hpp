#pragma once

#include <string>
#include <vector>

#include "voltspec/fitting.hpp"
#include "voltspec/product.hpp"
#include "voltspec/spectrum.hpp"

namespace vs {

enum class Verdict { Removable, Nonremovable, Inconclusive };

std::string to_string(Verdict v);

// One row of the convergence series: k_n = 1 / (t_n^2 |A'(t_n)|).
// Values are carried in log scale so steep families cannot overflow;
// k and partial_sum saturate where doubles cannot represent them.
struct KreinTerm {
    std::size_t rank = 0; // 1-based, sorted by |t|
    double t = 0.0;
    double log_abs_deriv = 0.0;
    int deriv_sign = 1;
    double log_k = 0.0;
    double k = 0.0;
    double partial_sum = 0.0;
};

enum class VerdictMethod { series_fit, asymptotic_predictor, closed_form, degenerate };

struct RemovabilityReport {
    Verdict verdict = Verdict::Inconclusive;
    double confidence = 0.0;
    VerdictMethod method = VerdictMethod::series_fit;
    DecayFit fit;
    double q = 1.0; // 1/A(0) under the product normalization
    std::size_t terms_used = 0;
    std::size_t terms_total = 0;
    double min_relative_gap = 0.0;
    std::string note;

    std::string to_json(int indent = -1) const;
};

struct LpForecast {
    double rho_minus = 0.0, rho_plus = 0.0;
    double density_minus = 0.0, density_plus = 0.0;
    double u_minus = 0.0, u_plus = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

// Series terms for the leading `limit` nodes in |t| order (0 = all).
// Node derivatives near the materialization edge are truncation-dominated,
// so verdicts fit on an interior slice; see verdict().
std::vector<KreinTerm> krein_terms(const Spectrum& s, const GeneratingFunction& g,
                                   std::size_t limit = 0);

std::string krein_terms_csv(const std::vector<KreinTerm>& terms);

// Decide removability from the fitted decay of k_n. Requires >= 64 terms.
RemovabilityReport verdict(const Spectrum& s, const GeneratingFunction& g);
RemovabilityReport verdict(const Spectrum& s);

// Levin-Pfluger asymptotic predictor. One-sided cases pass density 0 for the
// empty side (its rho is then ignored).
LpForecast lp_forecast(double rho_minus, double rho_plus, double density_minus,
                       double density_plus);

// Verdict for the spectrum after finitely many insertions/removals.
RemovabilityReport finite_edit(const Spectrum& s, const std::vector<double>& add,
                               const std::vector<double>& remove,
                               ProductPolicy policy = {});

} // namespace vs
