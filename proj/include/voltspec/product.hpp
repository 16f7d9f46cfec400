#pragma once

#include <complex>
#include <memory>
#include <optional>

#include "voltspec/spectrum.hpp"

namespace vs {

using cplx = std::complex<double>;

// Truncation policy for principal-value products.
//
// tail_order meanings (S_k denotes the tail sum of t^{-k} beyond the
// materialized range, estimated from the tail descriptor):
//   0 : no correction
//   1 : multiply by exp(-z S1 - z^2/2 S2)
//   2 : extend through exp(-z^3/3 S3 - z^4/4 S4)
// For symmetric tails the odd sums vanish, so order 1 is the z^2 correction
// and order 2 the z^4 one.
struct ProductPolicy {
    int tail_order = 1;
    double proximity = 1e-12; // node-proximity threshold, relative to max(1,|t|)
};

// Tail sums S_1..S_4 derived from a Tail descriptor at a given cutoff.
struct TailSums {
    double s[5] = {0, 0, 0, 0, 0}; // s[k] = S_k, s[0] unused
    static TailSums from_tail(const Tail& tail, double largest_abs, std::size_t n_materialized);
};

struct EvalDiag {
    std::size_t terms_used = 0;
    int tail_order = 0;
    double est_rel_error = 0.0; // first neglected tail term at this z
};

struct EvalResult {
    cplx value;
    EvalDiag diag;
};

struct LogAbsResult {
    double value;
    EvalDiag diag;
};

// Node derivative in log form; deriv = sign * exp(log_abs).
struct NodeDeriv {
    double log_abs;
    int sign;
    double value() const;
};

// Evaluator for the generating function A(z) = v.p. prod (1 - z/t_n),
// normalized A(0) = 1. Immutable; eval is pure.
class GeneratingFunction {
public:
    enum class Strategy { numeric_product, closed_form };

    // Closed forms, available when the family admits one.
    enum class ClosedForm {
        squares_from_one,     // sin(pi sqrt z)/(pi sqrt z)
        livsic,               // cos(pi c z)
        integers,             // sin(pi z)/(pi z), optional (1 - z/t0) factor
        shifted_progression   // Gamma(a)^2 / (Gamma(a+z) Gamma(a-z))
    };

    static GeneratingFunction numeric(std::shared_ptr<const Spectrum> s,
                                      ProductPolicy policy = {});
    static GeneratingFunction numeric(const Spectrum& s, ProductPolicy policy = {});

    // Picks the closed form from the spectrum's family; throws parameter_error
    // when none is known.
    static GeneratingFunction closed(std::shared_ptr<const Spectrum> s,
                                     ProductPolicy policy = {});
    static GeneratingFunction closed(const Spectrum& s, ProductPolicy policy = {});

    const Spectrum& spectrum() const { return *spectrum_; }
    std::shared_ptr<const Spectrum> spectrum_ptr() const { return spectrum_; }
    const ProductPolicy& policy() const { return policy_; }
    Strategy strategy() const { return strategy_; }
    const TailSums& tail_sums() const { return sums_; }

    // A(z). Throws overflow_error when the value exceeds double range.
    cplx eval(cplx z) const;
    EvalResult eval_ex(cplx z) const;

    // log |A(z)|. Throws proximity_error within the node threshold.
    double log_abs_eval(cplx z) const;
    LogAbsResult log_abs_eval_ex(cplx z) const;

    // A'(t_n) at the node with the given position in ascending-t order.
    // Computed as -(1/t_n) prod_{m != n} (1 - t_n/t_m) times the tail factor.
    double deriv_at_node(std::size_t pos) const;
    NodeDeriv log_deriv_at_node(std::size_t pos) const;

private:
    GeneratingFunction(std::shared_ptr<const Spectrum> s, Strategy strat, ProductPolicy pol);

    cplx eval_closed(cplx z) const;
    double closed_deriv(std::size_t pos) const;

    std::shared_ptr<const Spectrum> spectrum_;
    Strategy strategy_;
    std::optional<ClosedForm> closed_form_;
    ProductPolicy policy_;
    TailSums sums_;
};

// Complex log-Gamma (Lanczos); used by the shifted-progression closed form.
cplx log_gamma(cplx z);

} // namespace vs
