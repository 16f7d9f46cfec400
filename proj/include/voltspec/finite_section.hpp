#pragma once

#include <memory>
#include <string>
#include <vector>

#include "voltspec/perturbation.hpp"

namespace vs {

// N x N section of the bounded rank-one-perturbed inverse:
//   K = diag(1/t_n) + u v*,  u_n = -delta^-1 a_n sqrt(mu_n)/t_n,
//                            v_n = b_n sqrt(mu_n)/t_n
// over the N nodes of smallest |t|.
struct FiniteSection {
    std::shared_ptr<const PerturbationData> data;
    int n = 0;
    std::vector<double> diag;     // s_i = 1/t_i
    std::vector<cplx> u, v;
    std::vector<cplx> c;          // coefficients of the section nodes
    double delta = 1.0;

    cplx entry(int i, int j) const {
        cplx e = u[i] * std::conj(v[j]);
        if (i == j) e += diag[i];
        return e;
    }
    cplx trace() const;
};

FiniteSection build(const PerturbationData& p, int n);

// Dense nonsymmetric eigensolve (QR iteration); n <= 512. Sorted by modulus
// descending, ties by (Re, Im) descending.
std::vector<cplx> eigenvalues_dense(const FiniteSection& f);

struct SecularResult {
    std::vector<cplx> eigenvalues;          // same ordering as the dense path
    std::vector<int> at_diagonal;           // positions that landed on some s_i
    int subdivision_boxes = 0;
};

// Eigenvalues as roots of the section's secular function, located by
// argument-principle subdivision plus Newton polish.
SecularResult eigenvalues_secular(const FiniteSection& f);

struct CollapseRow {
    int n = 0;
    double spectral_radius = 0.0;
    long zeros_in_window = 0;
};

// Spectral radii of growing sections; zeros_in_window counts eigenvalue
// reciprocals inside the square display window [-w, w]^2. For annihilating
// data the window empties as n grows; persistent entries flag survivors.
std::vector<CollapseRow> collapse_profile(const PerturbationData& p,
                                          const std::vector<int>& ns,
                                          double window_half_width = 30.0);

std::string collapse_csv(const std::vector<CollapseRow>& rows);

} // namespace vs
