#include "voltspec/nustar.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace vs {

using nlohmann::json;

namespace {

// 12-point Gauss-Legendre on [-1, 1]; even count keeps panel centers (where
// the nodes sit) out of the abscissa set.
constexpr double kGlX[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                            0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
constexpr double kGlW[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                            0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

template <typename F>
double gl12(const F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 6; ++i)
        sum += kGlW[i] * (f(c - h * kGlX[i]) + f(c + h * kGlX[i]));
    return h * sum;
}

template <typename F>
double adaptive(const F& f, double a, double b, double tol, int depth) {
    double whole = gl12(f, a, b);
    double m = 0.5 * (a + b);
    double halves = gl12(f, a, m) + gl12(f, m, b);
    if (depth <= 0 || std::fabs(halves - whole) <= tol * (std::fabs(halves) + 1e-300))
        return halves;
    return adaptive(f, a, m, 0.7 * tol, depth - 1) + adaptive(f, m, b, 0.7 * tol, depth - 1);
}

} // namespace

NuStarRun::NuStarRun(const Spectrum& s, const GeneratingFunction& g, std::vector<double> nu0,
                     NuStarOptions options)
    : s_(g.spectrum_ptr()), g_(g), nu_(std::move(nu0)), opt_(options) {
    if (s.points() != s_->points())
        throw parameter_error("nu-star: generating function is over a different spectrum");
    if (nu_.size() != s_->size())
        throw parameter_error("nu-star: one base weight per node required");
    bool any = false;
    double proxy = 0.0;
    for (std::size_t i = 0; i < nu_.size(); ++i) {
        if (nu_[i] < 0.0) throw parameter_error("nu-star: weights must be nonnegative");
        if (nu_[i] > 0.0) any = true;
        proxy += nu_[i] / (s_->point(i) * s_->point(i));
    }
    if (!any) throw parameter_error("nu-star: all weights vanish, eta is constant");
    if (!std::isfinite(proxy)) throw validity_error("nu-star: sum nu/t^2 proxy unbounded");
    nu0_ = nu_;

    // tau_0 from the proof's opening move: any tau > max(4, 2 t_first)
    double t_first = HUGE_VAL;
    for (double t : s_->points())
        if (t > 0.0) t_first = std::min(t_first, t);
    if (!std::isfinite(t_first)) {
        // mirror the construction onto the negative axis
        for (double t : s_->points()) t_first = std::min(t_first, -t);
        if (!std::isfinite(t_first) || t_first <= 0.0)
            throw parameter_error("nu-star: spectrum has no usable arm");
    }
    taus_.push_back(std::max(4.0, 2.0 * t_first));

    base_norm_ = norm(NuStarRegion::window);
    if (!std::isfinite(base_norm_))
        throw validity_error("nu-star: 1/((x+i)E_0) is not square integrable over the window");
}

double NuStarRun::tau(int k) const {
    if (k < 0 || std::size_t(k) >= taus_.size()) throw range_error("nu-star: no such tau");
    return taus_[k];
}

double NuStarRun::eta_imag_part(double x) const {
    double sum = opt_.r0;
    const auto& pts = s_->points();
    const auto& order = s_->abs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        double t = pts[*it];
        sum += nu_[*it] * (1.0 / (t - x) - 1.0 / t);
    }
    return sum;
}

double NuStarRun::abs_e_squared(double x) const {
    double la = g_.log_abs_eval(cplx(x, 0.0));
    double sy = eta_imag_part(x);
    return std::exp(2.0 * la) * (1.0 + sy * sy);
}

double NuStarRun::integrand(double x, bool weighted) const {
    // single pass: log|A| product and the Herglotz sum share the node loop
    const auto& pts = s_->points();
    const auto& order = s_->abs_order();
    double acc = 1.0, log_a = 0.0, sy = opt_.r0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        double t = pts[*it];
        acc *= std::fabs(1.0 - x / t);
        if (acc > 1e120 || acc < 1e-120) {
            log_a += std::log(acc);
            acc = 1.0;
        }
        sy += nu_[*it] * (1.0 / (t - x) - 1.0 / t);
    }
    log_a += std::log(acc);
    const TailSums& sums = g_.tail_sums();
    log_a -= x * sums.s[1] + x * x * sums.s[2] / 2.0;
    double l = -2.0 * log_a - std::log1p(sy * sy);
    if (weighted) l -= std::log1p(x * x);
    return l < -700.0 ? 0.0 : std::exp(l);
}

double NuStarRun::integral_over(double lo, double hi, bool weighted) const {
    if (!(lo < hi)) return 0.0;
    auto f = [&](double x) { return integrand(x, weighted); };
    // Panels split at internode midpoints. |E| dips where the Herglotz sum
    // crosses zero, an O(1)-wide feature near each midpoint, so wide panels
    // get explicit cuts around it; node-free stretches split geometrically.
    const auto& pts = s_->points();
    std::vector<double> raw;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double t = pts[i];
        double gl = i > 0 ? t - pts[i - 1] : HUGE_VAL;
        double gr = i + 1 < pts.size() ? pts[i + 1] - t : HUGE_VAL;
        double g = std::min(gl, gr);
        if (!std::isfinite(g)) g = std::max(1.0, std::fabs(t));
        // internode midpoints, and around the midpoint the O(1)-wide dip
        // where the Herglotz sum crosses zero
        if (i + 1 < pts.size()) {
            double mid = 0.5 * (t + pts[i + 1]);
            double gap = pts[i + 1] - t;
            raw.push_back(mid);
            if (gap > 12.0) {
                double w = std::min(gap / 4.0, std::max(2.0, gap / 128.0));
                raw.push_back(mid - w);
                raw.push_back(mid + w);
            }
        }
        // geometric bridge down to the node spike, whose width is the weight
        double w0 = std::max(std::min(nu_[i], g / 8.0), std::fabs(t) * 1e-13 + 1e-300);
        for (double w = w0; w < g / 4.0; w *= 4.0) {
            raw.push_back(t - w);
            raw.push_back(t + w);
        }
    }
    std::sort(raw.begin(), raw.end());
    std::vector<double> cuts;
    cuts.push_back(lo);
    for (double c : raw)
        if (c > cuts.back() && c < hi) cuts.push_back(c);
    cuts.push_back(hi);

    // expand long node-free panels geometrically
    std::vector<double> panels;
    panels.push_back(cuts[0]);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        double x = a;
        while (b - x > 8.0 * (std::fabs(x) + 1.0)) {
            x = x + (std::fabs(x) + 1.0) * 2.0;
            panels.push_back(x);
        }
        panels.push_back(b);
    }

    // coarse masses first, then refine the panels that carry the total
    const std::size_t n = panels.size() - 1;
    std::vector<double> mass(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mass[i] = gl12(f, panels[i], panels[i + 1]);
        total += mass[i];
    }
    double refined = total;
    for (std::size_t i = 0; i < n; ++i) {
        if (mass[i] > 1e-5 * total) {
            double better = adaptive(f, panels[i], panels[i + 1], 1e-6, 14);
            refined += better - mass[i];
        }
    }
    return refined;
}

double NuStarRun::ring_mass(double lo, double hi, bool weighted) const {
    // both arms of J_hi \ J_lo
    return integral_over(lo, hi, weighted) + integral_over(-hi, -lo, weighted);
}

double NuStarRun::tail_mass_estimate(bool weighted) const {
    // continue the fitted per-node mass law beyond the materialized edge
    const auto& pts = s_->points();
    const auto& order = s_->abs_order();
    const std::size_t n = s_->size();
    if (n < 24) return 0.0;
    const int fit_count = 12;
    std::vector<double> lx, lm;
    for (int j = 0; j < fit_count; ++j) {
        std::size_t rank = n - 1 - std::size_t(j) * 2;
        std::size_t pos = order[rank];
        double t = pts[pos];
        double a = t > 0 ? (pos > 0 ? 0.5 * (t + pts[pos - 1]) : t - 0.5)
                         : (pos > 0 ? 0.5 * (t + pts[pos - 1]) : t - 0.5);
        double b = pos + 1 < n ? 0.5 * (t + pts[pos + 1]) : t + 0.5 * (t - a);
        double mass = integral_over(std::min(a, b), std::max(a, b), weighted);
        if (mass <= 0.0) return 0.0;
        lx.push_back(std::log(double(rank + 1)));
        lm.push_back(std::log(mass));
    }
    double mx = 0, my = 0;
    for (int j = 0; j < fit_count; ++j) {
        mx += lx[j];
        my += lm[j];
    }
    mx /= fit_count;
    my /= fit_count;
    double sxx = 0, sxy = 0;
    for (int j = 0; j < fit_count; ++j) {
        sxx += (lx[j] - mx) * (lx[j] - mx);
        sxy += (lx[j] - mx) * (lm[j] - my);
    }
    double q = -(sxy / sxx);
    if (q <= 1.05) return HUGE_VAL; // per-node masses not summable
    double m_last = std::exp(my + (sxy / sxx) * (std::log(double(n)) - mx));
    return m_last * double(n) / (q - 1.0);
}

double NuStarRun::beyond_norm(double tau) const {
    double edge = s_->max_abs() * 1.25;
    if (tail2_ < 0.0) tail2_ = tail_mass_estimate(true);
    double mass = ring_mass(tau, edge, true) + tail2_;
    return std::sqrt(mass);
}

double NuStarRun::norm(NuStarRegion region, bool weighted) const {
    const double tau_prev = taus_.size() >= 2 ? taus_[taus_.size() - 2] : 0.0;
    const double tau_cur = taus_.back();
    switch (region) {
    case NuStarRegion::beyond:
        if (!weighted) throw parameter_error("nu-star: beyond-norm is tracked weighted only");
        return beyond_norm(tau_cur);
    case NuStarRegion::ring:
        // at k = 0 the ring convention is all of J_0
        return std::sqrt(ring_mass(tau_prev, tau_cur, weighted));
    case NuStarRegion::window: {
        double edge = s_->max_abs() * 1.25;
        double mass = ring_mass(0.0, edge, weighted);
        if (weighted) {
            if (tail2_ < 0.0) tail2_ = tail_mass_estimate(true);
            mass += tail2_;
        }
        return std::sqrt(mass);
    }
    }
    return 0.0;
}

double NuStarRun::uniform_bound() const {
    double prod = 1.0;
    for (int j = 1; j <= int(steps_.size()); ++j) {
        double f = 1.0 + std::pow(2.0, -j);
        prod *= f * f;
    }
    return prod * (1.0 + base_norm_ * base_norm_);
}

void NuStarRun::step() {
    const int k = int(steps_.size()) + 1;
    if (k > opt_.max_steps) throw range_error("nu-star: step cap reached");
    const double tau_prev = taus_.back();
    const auto& pts = s_->points();
    const auto& order = s_->abs_order();

    // greedy node choice: smallest |t| beyond 2 tau with the mass inequality
    const double mass_cap = std::pow(2.0, -k - 1) / tau_prev;
    std::size_t pick = s_->size();
    for (std::size_t rank = 0; rank < s_->size(); ++rank) {
        std::size_t pos = order[rank];
        double t = pts[pos];
        if (t <= 2.0 * tau_prev) continue; // positive arm, beyond the threshold
        if (nu_[pos] <= 0.0) continue;
        if (nu_[pos] / (t * t) <= mass_cap) {
            pick = pos;
            break;
        }
    }
    if (pick == s_->size()) {
        // mirror onto the negative arm if the positive one is exhausted
        for (std::size_t rank = 0; rank < s_->size(); ++rank) {
            std::size_t pos = order[rank];
            double t = pts[pos];
            if (-t <= 2.0 * tau_prev) continue;
            if (nu_[pos] <= 0.0) continue;
            if (nu_[pos] / (t * t) <= mass_cap) {
                pick = pos;
                break;
            }
        }
    }
    if (pick == s_->size())
        throw range_error("nu-star: materialized spectrum exhausted beyond tau = " +
                          std::to_string(tau_prev));

    NuStarStep st;
    st.k = k;
    st.node_pos = pick;
    st.t_nk = pts[pick];
    st.nu_before = nu_[pick];

    // case split on the mass left outside J_{k-1}
    st.norm_beyond = beyond_norm(tau_prev);
    const double case_threshold = 2.0 / tau_prev;
    if (st.norm_beyond >= case_threshold) {
        st.nu_prime = st.nu_before; // keep E_k = E_{k-1}
    } else {
        // shrink nu' until the norm climbs to the threshold exactly
        st.shrunk = true;
        double lo = 0.0, hi = st.nu_before; // norm decreases in nu'
        double lo_v = HUGE_VAL;
        for (int it = 0; it < 80; ++it) {
            double mid = lo > 0.0 ? 0.5 * (lo + hi) : hi * std::pow(2.0, -it - 1);
            nu_[pick] = mid;
            double v = beyond_norm(tau_prev);
            if (std::fabs(v - case_threshold) <= opt_.norm_tol * case_threshold) {
                hi = mid;
                break;
            }
            if (v > case_threshold) {
                lo = mid;
                lo_v = v;
            } else {
                hi = mid;
            }
            if (lo > 0.0 && (hi - lo) <= 1e-12 * hi) break;
        }
        (void)lo_v;
        st.nu_prime = hi;
        nu_[pick] = st.nu_prime;
        st.norm_beyond = beyond_norm(tau_prev); // value achieved with E_k
    }
    nu_[pick] = st.nu_prime;

    // threshold: accumulate ring mass outward until it reaches tau_prev^-2;
    // the floor tau > max(t_nk, 2 tau_prev) may already exceed the target
    const double target = 1.0 / (tau_prev * tau_prev);
    const double floor_tau =
        std::max(std::fabs(st.t_nk) * (1.0 + 1e-9), 2.0 * tau_prev * (1.0 + 1e-9));
    double acc = ring_mass(tau_prev, floor_tau, true);
    if (acc >= target) {
        st.tau = floor_tau;
        st.tau_saturated = true;
    } else {
        // march outward node panel by node panel
        double lo = floor_tau;
        double hi = lo;
        bool found = false;
        auto next_cut = [&](double x) {
            auto it = std::upper_bound(pts.begin(), pts.end(), x);
            if (it == pts.end() || it + 1 == pts.end()) return x * 2.0;
            return std::max(x * 1.0009, 0.5 * (*it + *(it + 1)));
        };
        while (hi < s_->max_abs() * 1.2) {
            double nxt = next_cut(hi);
            double dm = ring_mass(hi, nxt, true);
            if (acc + dm >= target) {
                // refine the crossing inside (hi, nxt)
                double a = hi, b = nxt;
                for (int it2 = 0; it2 < 60; ++it2) {
                    double mid = 0.5 * (a + b);
                    double part = ring_mass(hi, mid, true);
                    if (acc + part >= target)
                        b = mid;
                    else
                        a = mid;
                    if ((b - a) <= opt_.norm_tol * b) break;
                }
                st.tau = b;
                found = true;
                break;
            }
            acc += dm;
            hi = nxt;
        }
        if (!found)
            throw range_error("nu-star: materialization exhausted before the threshold equality");
        acc = ring_mass(tau_prev, st.tau, true);
    }

    taus_.push_back(st.tau);
    st.norm_ring = std::sqrt(ring_mass(tau_prev, st.tau, true));
    st.norm_ring_inv_e = std::sqrt(ring_mass(tau_prev, st.tau, false));
    st.norm_full = norm(NuStarRegion::window);

    // sup over J_{k-1} of |eta_k - eta_{k-1}|, exact at the ends
    double dv = st.nu_before - st.nu_prime;
    st.eta_dev_sup = dv * tau_prev / ((std::fabs(st.t_nk) - tau_prev) * std::fabs(st.t_nk));

    steps_.push_back(st);
}

std::string NuStarRun::log_json(int indent) const {
    json j;
    j["tau0"] = taus_.front();
    j["r0"] = opt_.r0;
    j["base_norm"] = base_norm_;
    json arr = json::array();
    for (const auto& st : steps_) {
        json e;
        e["k"] = st.k;
        e["node_pos"] = st.node_pos;
        e["t_nk"] = st.t_nk;
        e["nu_before"] = st.nu_before;
        e["nu_prime"] = st.nu_prime;
        e["tau"] = st.tau;
        e["norms"] = {{"beyond", st.norm_beyond},
                      {"ring", st.norm_ring},
                      {"ring_inv_E", st.norm_ring_inv_e},
                      {"full", st.norm_full}};
        e["shrunk"] = st.shrunk;
        e["tau_saturated"] = st.tau_saturated;
        e["eta_dev_sup"] = st.eta_dev_sup;
        double tp = taus_[st.k - 1];
        e["checks"] = {{"tau_doubles", st.tau > 2.0 * tp},
                       {"mass_inequality",
                        st.nu_before / (st.t_nk * st.t_nk) <= std::pow(2.0, -st.k - 1) / tp},
                       {"eta_dev_within", st.eta_dev_sup <= std::pow(2.0, -st.k)},
                       {"growth", st.norm_ring_inv_e >= 0.45}};
        arr.push_back(e);
    }
    j["steps"] = arr;
    j["uniform_bound"] = uniform_bound();
    return indent >= 0 ? j.dump(indent) : j.dump();
}

} // namespace vs
