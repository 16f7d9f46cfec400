#pragma once

#include <string>
#include <vector>

#include "voltspec/product.hpp"
#include "voltspec/spectrum.hpp"

namespace vs {

// Inductive reweighting of E = A eta: at each step one weight nu'_k and one
// threshold tau_k are chosen so that 1/((x+i)E_k) keeps a uniform L2 bound
// while 1/E_k accumulates mass on every ring J_k \ J_{k-1}.
struct NuStarOptions {
    double r0 = 0.0;
    int max_steps = 6;      // thresholds grow at least geometrically
    double norm_tol = 1e-6; // relative tolerance on the norm equalities
};

enum class NuStarRegion { beyond, ring, window };

struct NuStarStep {
    int k = 0;
    std::size_t node_pos = 0; // position of t_{n_k} in the spectrum
    double t_nk = 0.0;
    double nu_before = 0.0;
    double nu_prime = 0.0;
    double tau = 0.0;
    double norm_beyond = 0.0;     // ||1/((x+i)E_{k-1})|| over R \ J_{k-1}
    double norm_ring = 0.0;       // ||1/((x+i)E_k)|| over J_k \ J_{k-1}
    double norm_ring_inv_e = 0.0; // ||1/E_k|| over the same ring
    double norm_full = 0.0;       // ||1/((x+i)E_k)|| over R (window + tail estimate)
    bool shrunk = false;          // the bisection branch ran
    bool tau_saturated = false;   // ring mass already exceeded the target at the floor
    double eta_dev_sup = 0.0;     // sup_{J_k} |eta_k - eta_{k-1}|
};

class NuStarRun {
public:
    // nu0 aligns with the spectrum's ascending point order.
    NuStarRun(const Spectrum& s, const GeneratingFunction& g, std::vector<double> nu0,
              NuStarOptions options = {});

    // One inductive step; throws range_error when the materialized spectrum
    // is exhausted.
    void step();

    int steps_done() const { return int(steps_.size()); }
    double tau(int k) const; // tau_0 is the initial threshold
    const std::vector<NuStarStep>& steps() const { return steps_; }
    const std::vector<double>& weights() const { return nu_; }
    double base_norm() const { return base_norm_; } // ||1/((x+i)E_0)|| at start

    // eta_k(x) with the current weights (k = steps_done()); real x only.
    double eta_imag_part(double x) const; // r0 + sum nu ((t-x)^-1 - t^-1)
    // |E_k(x)|^2 through the generating function
    double abs_e_squared(double x) const;

    // L2 norm of 1/((x+i)E_k) (weighted = true) or 1/E_k over the region.
    double norm(NuStarRegion region, bool weighted = true) const;

    // uniform bound of property (ii): prod_{j<=k} (1+2^-j)^2 (1 + ||E_0 norm||^2)
    double uniform_bound() const;

    std::string log_json(int indent = -1) const;

private:
    double integrand(double x, bool weighted) const;
    double integral_over(double lo, double hi, bool weighted) const;
    double ring_mass(double lo, double hi, bool weighted) const;
    double tail_mass_estimate(bool weighted) const;
    double beyond_norm(double tau) const;

    std::shared_ptr<const Spectrum> s_;
    GeneratingFunction g_;
    std::vector<double> nu_;  // current weights
    std::vector<double> nu0_; // base weights
    NuStarOptions opt_;
    std::vector<double> taus_; // taus_[0] = tau_0
    std::vector<NuStarStep> steps_;
    double base_norm_ = 0.0;
    mutable double tail2_ = -1.0; // cached far-tail mass estimate
};

} // namespace vs
