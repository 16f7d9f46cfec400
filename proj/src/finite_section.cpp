#include "voltspec/finite_section.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "voltspec/winding.hpp"

namespace vs {

namespace {

bool eig_less(const cplx& a, const cplx& b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

} // namespace

cplx FiniteSection::trace() const {
    cplx t(0.0, 0.0);
    for (int i = 0; i < n; ++i) t += entry(i, i);
    return t;
}

FiniteSection build(const PerturbationData& p, int n) {
    if (p.delta == 0.0)
        throw parameter_error("finite section: the bounded-inverse formula needs delta != 0");
    if (n <= 0 || std::size_t(n) > p.size())
        throw parameter_error("finite section: n must lie in [1, materialized count]");
    const Spectrum& s = *p.spectrum;
    FiniteSection f;
    f.data = std::make_shared<PerturbationData>(p);
    f.n = n;
    f.delta = p.delta;
    f.diag.resize(n);
    f.u.resize(n);
    f.v.resize(n);
    f.c.resize(n);
    for (int i = 0; i < n; ++i) {
        std::size_t pos = s.abs_order()[i];
        double t = s.point(pos);
        double rmu = std::sqrt(p.mu[pos]);
        f.diag[i] = 1.0 / t;
        f.u[i] = -(1.0 / p.delta) * p.a[pos] * rmu / t;
        f.v[i] = p.b[pos] * rmu / t;
        f.c[i] = p.c[pos];
    }
    return f;
}

std::vector<cplx> eigenvalues_dense(const FiniteSection& f) {
    if (f.n > 512) throw parameter_error("dense eigensolve capped at n = 512");
    Eigen::MatrixXcd m(f.n, f.n);
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) m(i, j) = f.entry(i, j);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        char head[256];
        std::snprintf(head, sizeof head, "K[0][0]=(%g,%g) K[0][1]=(%g,%g)",
                      m(0, 0).real(), m(0, 0).imag(),
                      f.n > 1 ? m(0, 1).real() : 0.0, f.n > 1 ? m(0, 1).imag() : 0.0);
        throw numeric_error(std::string("dense eigensolver failed to converge; ") + head);
    }
    std::vector<cplx> eigs(solver.eigenvalues().data(), solver.eigenvalues().data() + f.n);
    std::sort(eigs.begin(), eigs.end(), eig_less);
    return eigs;
}

namespace {

// Secular function in eigenvalue coordinates: roots of
//   chi(lambda) = delta prod (lambda - s_i) + sum c_i s_i^2 prod_{m != i} (lambda - s_m)
// equal the section's eigenvalues (chi is proportional to the characteristic
// polynomial). Only the phase is needed for winding counts.
struct SecularFn {
    const FiniteSection& f;

    double phase(cplx lam) const {
        cplx h(f.delta, 0.0);
        double extra = 0.0;
        for (int i = 0; i < f.n; ++i) {
            cplx d = lam - f.diag[i];
            // fold the pole into the product when too close for H
            h += f.c[i] * f.diag[i] * f.diag[i] / d;
            extra += std::arg(d);
        }
        return std::arg(h) + extra;
    }

    // value of chi scaled by 2^-e; usable for Newton steps
    cplx h_value(cplx lam) const {
        cplx h(f.delta, 0.0);
        for (int i = 0; i < f.n; ++i)
            h += f.c[i] * f.diag[i] * f.diag[i] / (lam - f.diag[i]);
        return h;
    }
    cplx h_deriv(cplx lam) const {
        cplx d(0.0, 0.0);
        for (int i = 0; i < f.n; ++i) {
            cplx q = lam - f.diag[i];
            d -= f.c[i] * f.diag[i] * f.diag[i] / (q * q);
        }
        return d;
    }

    double nearest_diag(cplx lam) const {
        double best = HUGE_VAL;
        for (int i = 0; i < f.n; ++i) best = std::min(best, std::abs(lam - f.diag[i]));
        return best;
    }
};

// upper bound on |d arg chi / ds| along any unit direction:
// |chi'/chi| <= |H'/H| + sum 1/|lambda - s_i|
double phase_speed_bound(const SecularFn& fn, cplx lam) {
    const FiniteSection& f = fn.f;
    cplx h(f.delta, 0.0), hp(0.0, 0.0);
    double poles = 0.0;
    for (int i = 0; i < f.n; ++i) {
        cplx q = lam - f.diag[i];
        double aq = std::abs(q);
        if (aq == 0.0) return HUGE_VAL;
        cplx w = f.c[i] * f.diag[i] * f.diag[i] / q;
        h += w;
        hp -= w / q;
        poles += 1.0 / aq;
    }
    double ah = std::abs(h);
    if (ah == 0.0) return HUGE_VAL;
    return std::abs(hp) / ah + poles;
}

struct SecularWalker {
    const SecularFn& fn;
    double total = 0.0;
    std::size_t samples = 0;
    int depth_cap = 52;

    double probe(cplx z) {
        if (++samples > 6000000) throw resolution_error("secular: sample budget exceeded");
        return fn.phase(z);
    }

    void segment(cplx za, double pa, cplx zb, double pb, int depth) {
        double len = std::abs(zb - za);
        cplx zm = 0.5 * (za + zb);
        // the speed bound makes fast smooth rotation near pole clusters
        // impossible to alias past
        double bound = std::max({phase_speed_bound(fn, za), phase_speed_bound(fn, zm),
                                 phase_speed_bound(fn, zb)});
        double step = std::remainder(pb - pa, 2.0 * M_PI);
        if (len * bound < 1.2 && std::fabs(step) < M_PI / 2.0) {
            total += step;
            return;
        }
        if (depth >= depth_cap)
            throw resolution_error("secular: refinement cap exceeded");
        double pm = probe(zm);
        segment(za, pa, zm, pm, depth + 1);
        segment(zm, pm, zb, pb, depth + 1);
    }
};

long box_count(const SecularFn& fn, const Rect& r, int* boxes, int initial) {
    ++*boxes;
    const cplx corners[5] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1},
                             {r.x0, r.y0}};
    SecularWalker walk{fn};
    for (int e = 0; e < 4; ++e) {
        const int n = std::max(2, initial);
        std::vector<cplx> zs(n + 1);
        std::vector<double> ps(n + 1);
        for (int i = 0; i <= n; ++i) {
            double t = double(i) / n;
            zs[i] = corners[e] + t * (corners[e + 1] - corners[e]);
            ps[i] = walk.probe(zs[i]);
        }
        for (int i = 0; i < n; ++i) walk.segment(zs[i], ps[i], zs[i + 1], ps[i + 1], 0);
    }
    double turns = walk.total / (2.0 * M_PI);
    long w = std::lround(turns);
    if (std::fabs(turns - double(w)) > 0.25)
        throw resolution_error("secular: phase total is not integral");
    if (w < 0) throw resolution_error("secular: negative count (aliased contour)");
    return w;
}

// Split-line positions tried, as fractions of the box size. Eigenvalues of
// the sections cluster near the real axis and near the origin; when a split
// line lands inside a cluster its counts come out inconsistent and the next,
// more eccentric, pair is tried -- the subdivision then zooms toward the
// cluster without cutting through it.
constexpr double kSplitFractions[][2] = {
    {0.513, 0.479}, {0.4661, 0.5339}, {0.5421, 0.4843}, {0.25, 0.7319},
    {0.7319, 0.25}, {0.375, 0.6628},  {0.6628, 0.375},  {0.125, 0.8721},
    {0.8721, 0.125}, {0.0625, 0.9412}, {0.9412, 0.0625}, {0.0313, 0.9719},
};

// One complete subdivision pass at a fixed base sampling; phase tracking can
// alias a pair of close zeros across a coarse step, so the caller validates
// the result globally and restarts finer if needed.
std::vector<cplx> secular_pass(const FiniteSection& f, const SecularFn& fn, double radius,
                               int base, int* boxes) {
    const int ladder[3] = {base, base * 4, base * 16};

    struct Task {
        Rect box;
        long count;
    };
    std::vector<Task> stack;
    for (const auto& fr : kSplitFractions) {
        double off = fr[0] - 0.5;
        Rect root{-radius * (1.0 + 0.2 * off), radius * (1.0 + 0.4 * off),
                  -radius * (1.0 - 0.26 * off), radius * (1.0 + 0.58 * off)};
        try {
            if (box_count(fn, root, boxes, base) == f.n) {
                stack.push_back({root, long(f.n)});
                break;
            }
        } catch (const error&) {
            continue;
        }
    }
    if (stack.empty())
        throw resolution_error("secular: no outer box caught all " + std::to_string(f.n) +
                               " eigenvalues");

    const double isolate_tol = 1e-13 * radius;
    std::vector<cplx> roots;

    // Newton endgame from the box center; the result counts only if it stays
    // inside the certified box (which holds exactly one eigenvalue).
    auto newton_in_box = [&](const Rect& b, cplx* lam_out) {
        cplx center(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
        double size = std::max(b.width(), b.height());
        int near = 0;
        double dist = HUGE_VAL;
        for (int i = 0; i < f.n; ++i) {
            double d = std::abs(center - cplx(f.diag[i], 0.0));
            if (d < dist) {
                dist = d;
                near = i;
            }
        }
        cplx lam = center;
        if (dist > 4.0 * size) {
            for (int it = 0; it < 80; ++it) {
                cplx step = fn.h_value(lam) / fn.h_deriv(lam);
                lam -= step;
                if (std::abs(step) < 1e-16 * std::max(1e-300, std::abs(lam))) break;
            }
        } else {
            // smooth local form near the diagonal entry s = diag[near]:
            //   chi_near(l) = (l - s) h_near(l) + c s^2,
            //   h_near(l) = delta + sum_{k != near} c_k s_k^2 / (l - s_k)
            const double s = f.diag[near];
            const cplx cs2 = f.c[near] * s * s;
            auto h_near = [&](cplx l, cplx* dh) {
                cplx h(f.delta, 0.0), d(0.0, 0.0);
                for (int k = 0; k < f.n; ++k) {
                    if (k == near) continue;
                    cplx q = l - f.diag[k];
                    h += f.c[k] * f.diag[k] * f.diag[k] / q;
                    d -= f.c[k] * f.diag[k] * f.diag[k] / (q * q);
                }
                *dh = d;
                return h;
            };
            for (int it = 0; it < 80; ++it) {
                cplx dh;
                cplx h = h_near(lam, &dh);
                cplx val = (lam - s) * h + cs2;
                cplx der = h + (lam - s) * dh;
                cplx step = val / der;
                lam -= step;
                if (std::abs(step) < 1e-16 * std::max(1e-300, std::abs(lam))) break;
            }
        }
        *lam_out = lam;
        return b.contains(lam);
    };

    while (!stack.empty()) {
        Task task = stack.back();
        stack.pop_back();
        if (task.count == 0) continue;
        Rect b = task.box;
        double size = std::max(b.width(), b.height());
        if (task.count == 1) {
            cplx lam;
            if (newton_in_box(b, &lam)) {
                roots.push_back(lam);
                continue;
            }
            if (size < isolate_tol) {
                roots.push_back(cplx(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)));
                continue;
            }
        } else if (size < isolate_tol) {
            cplx center(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
            for (long k = 0; k < task.count; ++k) roots.push_back(center);
            continue;
        }
        // children tile the parent exactly so counts stay consistent
        bool split_done = false;
        for (int initial : ladder) {
            for (const auto& fr : kSplitFractions) {
                double mx = b.x0 + b.width() * fr[0];
                double my = b.y0 + b.height() * fr[1];
                Rect quads[4] = {{b.x0, mx, b.y0, my},
                                 {mx, b.x1, b.y0, my},
                                 {b.x0, mx, my, b.y1},
                                 {mx, b.x1, my, b.y1}};
                long counts[4];
                long seen = 0;
                bool ok = true;
                for (int qi = 0; qi < 4 && ok; ++qi) {
                    try {
                        counts[qi] = box_count(fn, quads[qi], boxes, initial);
                    } catch (const error&) {
                        ok = false;
                        break;
                    }
                    seen += counts[qi];
                }
                if (!ok || seen != task.count) continue;
                for (int qi = 0; qi < 4; ++qi)
                    if (counts[qi] > 0) stack.push_back({quads[qi], counts[qi]});
                split_done = true;
                break;
            }
            if (split_done) break;
        }
        if (!split_done)
            throw resolution_error("secular: could not split the box [" +
                                   std::to_string(b.x0) + "," + std::to_string(b.x1) + "]x[" +
                                   std::to_string(b.y0) + "," + std::to_string(b.y1) +
                                   "] holding " + std::to_string(task.count) + " eigenvalues");
    }

    if (long(roots.size()) != f.n)
        throw resolution_error("secular: resolved " + std::to_string(roots.size()) + " of " +
                               std::to_string(f.n) + " eigenvalues");
    return roots;
}

} // namespace

SecularResult eigenvalues_secular(const FiniteSection& f) {
    SecularFn fn{f};
    SecularResult out;

    // all eigenvalues lie within the Frobenius bound
    double fro = 0.0;
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) fro += std::norm(f.entry(i, j));
    double radius = 1.05 * std::sqrt(fro) + 1e-8;

    const cplx trace = f.trace();
    std::vector<cplx> roots;
    std::string last_failure;
    for (int base : {8, 32, 128}) {
        try {
            roots = secular_pass(f, fn, radius, base, &out.subdivision_boxes);
        } catch (const error& e) {
            last_failure = e.what();
            continue;
        }
        cplx sum(0.0, 0.0);
        double scale = std::abs(trace) + 1.0;
        for (const cplx& r : roots) {
            sum += r;
            scale += std::abs(r);
        }
        if (std::abs(sum - trace) < 1e-8 * scale) break; // validated
        last_failure = "eigenvalue sum disagrees with the trace";
        roots.clear();
    }
    if (roots.empty())
        throw resolution_error("secular: " +
                               (last_failure.empty() ? std::string("no pass succeeded")
                                                     : last_failure));

    std::sort(roots.begin(), roots.end(), eig_less);
    out.eigenvalues = roots;
    SecularFn fchk{f};
    for (std::size_t k = 0; k < roots.size(); ++k)
        if (fchk.nearest_diag(roots[k]) < 1e-12 * std::max(1.0, std::abs(roots[k])))
            out.at_diagonal.push_back(int(k));
    return out;
}

std::vector<CollapseRow> collapse_profile(const PerturbationData& p,
                                          const std::vector<int>& ns,
                                          double window_half_width) {
    for (std::size_t k = 1; k < ns.size(); ++k)
        if (ns[k] <= ns[k - 1]) throw parameter_error("collapse profile: sizes must increase");
    const double window = window_half_width;
    std::vector<CollapseRow> rows;
    for (int n : ns) {
        FiniteSection f = build(p, n);
        auto eigs = eigenvalues_dense(f);
        CollapseRow row;
        row.n = n;
        row.spectral_radius = eigs.empty() ? 0.0 : std::abs(eigs.front());
        for (const cplx& lam : eigs) {
            if (std::abs(lam) == 0.0) continue;
            cplx z = 1.0 / lam;
            if (std::fabs(z.real()) <= window && std::fabs(z.imag()) <= window)
                ++row.zeros_in_window;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string collapse_csv(const std::vector<CollapseRow>& rows) {
    std::string out = "N,spectral_radius,n_zeros_in_window\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%ld\n", r.n, r.spectral_radius,
                      r.zeros_in_window);
        out += buf;
    }
    return out;
}

} // namespace vs
