#include "voltspec/model.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "quad_complex.hpp"

namespace vs {

using nlohmann::json;

ModelEvaluator::ModelEvaluator(std::shared_ptr<const PerturbationData> data,
                               GeneratingFunction g, ModelOptions options)
    : data_(std::move(data)), g_(std::move(g)), options_(options) {
    if (!data_) throw parameter_error("model: null perturbation data");
    const Spectrum& s = *data_->spectrum;
    if (data_->size() != s.size())
        throw parameter_error("model: data arrays do not match the spectrum");
    if (g_.spectrum().size() != s.size() || g_.spectrum().points() != s.points())
        throw parameter_error("model: generating function built over a different spectrum");
    w_.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        w_[i] = std::norm(data_->b[i]) * data_->mu[i];
}

ModelEvaluator::ModelEvaluator(const PerturbationData& data, GeneratingFunction g,
                               ModelOptions options)
    : ModelEvaluator(std::make_shared<PerturbationData>(data), std::move(g), options) {}

void ModelEvaluator::check_proximity(cplx z) const {
    const auto& pts = data_->spectrum->points();
    auto it = std::lower_bound(pts.begin(), pts.end(), z.real());
    for (auto probe : {it, it == pts.begin() ? it : std::prev(it)}) {
        if (probe == pts.end()) continue;
        double t = *probe;
        if (std::abs(z - t) < 1e-12 * std::max(1.0, std::fabs(t)))
            throw proximity_error("model evaluation too close to the node t = " +
                                  std::to_string(t));
    }
}

cplx ModelEvaluator::herglotz_sum(const std::vector<double>& w, cplx z) const {
    const Spectrum& s = *data_->spectrum;
    cplx sum(0.0, 0.0);
    // small |t| last: their terms dominate
    const auto& order = s.abs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        double t = s.point(*it);
        sum += w[*it] * (1.0 / (t - z) - 1.0 / t);
    }
    return sum;
}

cplx ModelEvaluator::coefficient_sum(const std::vector<cplx>& w, cplx z) const {
    const Spectrum& s = *data_->spectrum;
    cplx sum(0.0, 0.0);
    const auto& order = s.abs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        double t = s.point(*it);
        sum += w[*it] * (1.0 / (t - z) - 1.0 / t);
    }
    return sum;
}

cplx ModelEvaluator::rho(cplx z) const {
    check_proximity(z);
    return options_.delta_rho + herglotz_sum(w_, z);
}

cplx ModelEvaluator::beta(cplx z) const {
    check_proximity(z);
    return data_->delta + coefficient_sum(data_->c, z);
}

cplx ModelEvaluator::theta(cplx z) const {
    const cplx i(0.0, 1.0);
    cplx r = rho(z);
    return (i - r) / (i + r);
}

cplx ModelEvaluator::phi(cplx z) const { return beta(z) * (1.0 + theta(z)) / 2.0; }

cplx ModelEvaluator::phi_tilde(cplx z) const {
    return theta(z) * std::conj(phi(std::conj(z)));
}

cplx ModelEvaluator::A(cplx z) const { return g_.eval(z); }

cplx ModelEvaluator::E(cplx z) const {
    cplx th = theta(z);
    cplx denom = 1.0 + th;
    if (std::abs(denom) < 1e-14)
        throw conditioning_error("E: 1 + Theta vanished away from the nodes");
    return 2.0 * A(z) / denom;
}

cplx ModelEvaluator::B(cplx z) const {
    cplx e = E(z);
    cplx estar = std::conj(E(std::conj(z)));
    return (estar - e) / cplx(0.0, 2.0);
}

double ModelEvaluator::clark_mass(std::size_t pos) const {
    const Spectrum& s = *data_->spectrum;
    if (pos >= s.size()) throw range_error("clark_mass: node index beyond range");
    double t = s.point(pos);
    const double ladder[3] = {1e-2, 1e-3, 1e-4};
    double f[3];
    for (int k = 0; k < 3; ++k)
        f[k] = ladder[k] * rho(cplx(t, ladder[k])).imag();
    // f(eps) = w + C eps^2: Richardson over the two smallest rungs
    double e1 = ladder[1], e2 = ladder[2];
    double extrap = (f[2] * e1 * e1 - f[1] * e2 * e2) / (e1 * e1 - e2 * e2);
    double d12 = std::fabs(f[1] - f[0]);
    double d23 = std::fabs(f[2] - f[1]);
    if (d23 > 0.5 * d12 + 1e-12 * std::fabs(f[2]))
        throw extrapolation_error("clark_mass: ladder is not settling at t = " +
                                  std::to_string(t));
    return extrap;
}

WindingReport ModelEvaluator::count_zeros(const Rect& rect,
                                          std::vector<ContourSample>* samples) const {
    const Spectrum& s = *data_->spectrum;
    const double radius = options_.radius_fraction * s.max_abs();
    if (std::max({std::fabs(rect.x0), std::fabs(rect.x1), std::fabs(rect.y0),
                  std::fabs(rect.y1)}) > radius)
        throw parameter_error("count_zeros: rectangle exceeds the materialization radius " +
                              std::to_string(radius));

    // contour must clear every node by a fraction of the local gap
    const auto& pts = s.points();
    if (rect.y0 < 0.0 && rect.y1 > 0.0) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double t = pts[i];
            double gap = HUGE_VAL;
            if (i > 0) gap = std::min(gap, t - pts[i - 1]);
            if (i + 1 < pts.size()) gap = std::min(gap, pts[i + 1] - t);
            if (!std::isfinite(gap)) gap = std::max(1.0, std::fabs(t));
            double clearance = std::min(std::fabs(t - rect.x0), std::fabs(t - rect.x1));
            if (t > rect.x0 && t < rect.x1)
                clearance = std::min({clearance, rect.y1, -rect.y0});
            if (clearance < options_.clearance_factor * gap)
                throw contour_error("count_zeros: contour passes within " +
                                    std::to_string(clearance) + " of the node t = " +
                                    std::to_string(t));
        }
    }

    WindingOptions wopt;
    wopt.min_abs_fail = options_.contour_min_abs;
    wopt.collect = samples;
    WindingResult wr = winding_number([this](cplx z) { return beta(z); }, rect, wopt);

    WindingReport rep;
    rep.rect = rect;
    rep.winding = wr.winding;
    rep.min_abs_on_contour = wr.min_abs;
    rep.refinement_depth = wr.refinement_depth;
    rep.samples = wr.samples;
    if (rect.y0 < 0.0 && rect.y1 > 0.0)
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (pts[i] > rect.x0 && pts[i] < rect.x1 && std::abs(data_->c[i]) > 0.0)
                ++rep.poles_inside;
    rep.zeros = rep.winding + rep.poles_inside;
    if (rep.zeros < 0)
        throw numeric_error("count_zeros: negative zero count (winding " +
                            std::to_string(rep.winding) + ", poles " +
                            std::to_string(rep.poles_inside) + ")");
    return rep;
}

void ModelEvaluator::require_livsic_pattern() const {
    if (data_->delta != -1.0)
        throw pattern_error("livsic evaluator requires delta = -1");
    const cplx i(0.0, 1.0);
    for (std::size_t k = 0; k < data_->size(); ++k) {
        if (std::abs(data_->a[k] - i * data_->b[k]) >
            1e-12 * std::max(1.0, std::abs(data_->b[k])))
            throw pattern_error("livsic evaluator requires a = i b");
    }
}

cplx ModelEvaluator::psi_plus_i(cplx z) const {
    const Spectrum& s = *data_->spectrum;
    namespace q = vs::quad;
    const Tail& tail = s.tail();
    const bool completed = tail.kind == Tail::Kind::arithmetic && !w_.empty();

    // The dissipative pattern pins the mass to spacing/pi exactly; the doubles
    // in the data quantize it, which by itself plants a band of spurious model
    // zeros near Im z = -6. Snap to the intended mass when the data is within
    // quantization distance of it.
    q::f128 pi_q = q::f128(M_PI) + q::f128(1.2246467991473532e-16);
    q::f128 w_q = q::f128(w_.empty() ? 0.0 : w_[s.abs_order().back()]);
    if (completed) {
        q::f128 intended = q::f128(tail.spacing) / pi_q;
        q::f128 dev = w_q - intended;
        if (dev < 0) dev = -dev;
        if (dev < 1e-12 * w_q) {
            bool all_equal = true;
            for (double wv : w_)
                if (std::fabs(wv - w_[0]) > 1e-12 * std::fabs(w_[0])) all_equal = false;
            if (all_equal) w_q = intended;
        }
    }

    // symmetric constant-weight arithmetic tail completion:
    //   sum over |t| > T of w [(t-z)^-1 - t^-1] = 2 w z sum_{tau > T} (tau^2 - z^2)^-1
    //                                           = 2 w z sum_{k >= 0} z^{2k} S_{2k+2}
    q::qc zq = q::make(z.real(), z.imag());
    q::qc completion = q::make(0.0, 0.0);
    if (completed) {
        q::f128 T = q::f128(s.max_abs());
        q::f128 h = q::f128(tail.spacing);
        q::qc z2 = q::mul(zq, zq);
        q::qc zpow = q::make(1.0, 0.0);
        q::qc tail_sum = q::make(0.0, 0.0);
        for (int k = 0; k < 10; ++k) {
            q::f128 sm = q::arithmetic_tail_sum(T, h, 2 * k + 2);
            tail_sum = q::add(tail_sum, q::scale(zpow, sm));
            zpow = q::mul(zpow, z2);
        }
        completion = q::scale(q::mul(zq, tail_sum), 2 * w_q);
    }

    if (z.imag() > -0.5) {
        // away from the deep lower half-plane double precision is plenty
        const auto& order = s.abs_order();
        cplx sum(0.0, 1.0);
        const double wd = static_cast<double>(w_q);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            double t = s.point(*it);
            sum += wd * (1.0 / (t - z) - 1.0 / t);
        }
        return sum + q::to_double(completion);
    }

    // materialized part in quadruple precision, largest |t| first: below the
    // axis the true value decays like exp(-2 pi |y|) and everything cancels
    q::qc acc = q::add(q::make(0.0, 1.0), completion);
    const auto& order = s.abs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        double t = s.point(*it);
        q::qc tq = q::make(t, 0.0);
        q::qc term = q::sub(q::inv(q::sub(tq, zq)), q::inv(tq));
        acc = q::add(acc, q::scale(term, w_q));
    }
    return q::to_double(acc);
}

cplx ModelEvaluator::livsic_g(cplx z) const {
    require_livsic_pattern();
    // g = -A + i(B - delta_rho A) = A * i * (rho - delta_rho + i)
    cplx psi = psi_plus_i(z) - cplx(options_.delta_rho, 0.0);
    return A(z) * cplx(0.0, 1.0) * psi;
}

LivsicReport ModelEvaluator::livsic_report(const Rect& rect, double y_lo, double y_hi) const {
    require_livsic_pattern();
    LivsicReport rep;

    WindingOptions wopt;
    wopt.min_abs_fail = 0.0; // |g| legitimately reaches exp(-pi |y|) scales
    WindingResult wr = winding_number(
        [this](cplx z) {
            cplx psi = psi_plus_i(z) - cplx(options_.delta_rho, 0.0);
            return A(z) * cplx(0.0, 1.0) * psi;
        },
        rect, wopt);
    rep.winding.rect = rect;
    rep.winding.winding = wr.winding;
    rep.winding.zeros = wr.winding; // g is entire: no poles to add back
    rep.winding.min_abs_on_contour = wr.min_abs;
    rep.winding.refinement_depth = wr.refinement_depth;
    rep.winding.samples = wr.samples;

    // linearity of log|g(iy)|
    const int n = 32;
    std::vector<double> xs(n), ys(n);
    for (int k = 0; k < n; ++k) {
        double y = y_lo + (y_hi - y_lo) * k / (n - 1);
        xs[k] = y;
        ys[k] = std::log(std::abs(livsic_g(cplx(0.0, y))));
    }
    double mx = 0, my = 0;
    for (int k = 0; k < n; ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    rep.slope = sxy / sxx;
    double ss = 0;
    for (int k = 0; k < n; ++k) {
        double r = ys[k] - (my + rep.slope * (xs[k] - mx));
        ss += r * r;
    }
    rep.slope_residual = std::sqrt(ss / n);
    return rep;
}

std::string WindingReport::to_json(int indent) const {
    json j;
    j["rect"] = {rect.x0, rect.x1, rect.y0, rect.y1};
    j["winding"] = winding;
    j["poles_inside"] = poles_inside;
    j["zeros"] = zeros;
    j["min_abs_on_contour"] = min_abs_on_contour;
    j["refinement_depth"] = refinement_depth;
    j["samples"] = samples;
    return indent >= 0 ? j.dump(indent) : j.dump();
}

} // namespace vs
