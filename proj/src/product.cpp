#include "voltspec/product.hpp"

#include <algorithm>
#include <cmath>

namespace vs {

namespace {

constexpr double kLogDoubleMax = 709.0;

// log(sin w), any branch (callers either exponentiate or take the real part).
cplx log_sin(cplx w) {
    const cplx i(0.0, 1.0);
    if (w.imag() > 20.0)
        return -i * w + std::log(cplx(0.0, 0.5)) + std::log(1.0 - std::exp(2.0 * i * w));
    if (w.imag() < -20.0)
        return i * w - std::log(cplx(0.0, 2.0)) + std::log(1.0 - std::exp(-2.0 * i * w));
    return std::log(std::sin(w));
}

cplx log_cos(cplx w) {
    const cplx i(0.0, 1.0);
    if (w.imag() > 20.0) return -i * w - std::log(2.0) + std::log(1.0 + std::exp(2.0 * i * w));
    if (w.imag() < -20.0) return i * w - std::log(2.0) + std::log(1.0 + std::exp(-2.0 * i * w));
    return std::log(std::cos(w));
}

cplx exp_checked(cplx log_value) {
    if (log_value.real() > kLogDoubleMax)
        throw overflow_error("product value exceeds double range; use log_abs_eval");
    return std::exp(log_value);
}

int sign_of(double x) { return x < 0.0 ? -1 : 1; }

} // namespace

cplx log_gamma(cplx z) {
    // Lanczos, g = 7, n = 9
    static const double coef[9] = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // reflection
        return std::log(cplx(M_PI, 0.0)) - log_sin(M_PI * z) - log_gamma(1.0 - z);
    }
    z -= 1.0;
    cplx x = coef[0];
    for (int k = 1; k < 9; ++k) x += coef[k] / (z + double(k));
    cplx t = z + 7.5;
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(x);
}

TailSums TailSums::from_tail(const Tail& tail, double largest_abs, std::size_t n_materialized) {
    TailSums out;
    const double T = largest_abs;
    switch (tail.kind) {
    case Tail::Kind::none:
        break;
    case Tail::Kind::power: {
        // per-side points t_j ~ (j/D)^{1/rho}; midpoint integral in index space
        const double N = double(n_materialized);
        for (int k = 1; k <= 4; ++k) {
            double e = double(k) / tail.rho;
            if (e <= 1.0)
                throw parameter_error("tail too heavy: S_" + std::to_string(k) +
                                      " diverges for this one-sided power law");
            double mag = std::pow(tail.density, e) * std::pow(N + 0.5, 1.0 - e) / (e - 1.0);
            out.s[k] = (tail.side > 0 || k % 2 == 0) ? mag : -mag;
        }
        break;
    }
    case Tail::Kind::paired_power: {
        const double N = double(n_materialized) / 2.0; // per side
        for (int k = 1; k <= 4; ++k) {
            double total = 0.0;
            for (int side = 0; side < 2; ++side) {
                double rho = side ? tail.rho_plus : tail.rho_minus;
                double D = side ? tail.density_plus : tail.density_minus;
                double e = double(k) / rho;
                double mag;
                if (e > 1.0)
                    mag = std::pow(D, e) * std::pow(N + 0.5, 1.0 - e) / (e - 1.0);
                else if (k % 2 == 1 && tail.symmetric())
                    mag = 0.0; // cancels against the mirror side anyway
                else
                    throw parameter_error("tail too heavy: paired power S_" +
                                          std::to_string(k) + " diverges");
                total += (side || k % 2 == 0) ? mag : -mag;
            }
            out.s[k] = tail.symmetric() && k % 2 == 1 ? 0.0 : total;
        }
        break;
    }
    case Tail::Kind::arithmetic: {
        // symmetric continuation |t| = T + j h, both signs
        const double h = tail.spacing;
        for (int k = 2; k <= 4; k += 2)
            out.s[k] = 2.0 * std::pow(T + 0.5 * h, 1.0 - k) / (h * (k - 1.0));
        break;
    }
    }
    return out;
}

GeneratingFunction::GeneratingFunction(std::shared_ptr<const Spectrum> s, Strategy strat,
                                       ProductPolicy pol)
    : spectrum_(std::move(s)), strategy_(strat), policy_(pol) {
    if (!spectrum_ || spectrum_->size() == 0)
        throw parameter_error("generating function needs a nonempty spectrum");
    if (policy_.tail_order < 0 || policy_.tail_order > 2)
        throw parameter_error("tail_order must be 0, 1 or 2");
    sums_ = TailSums::from_tail(spectrum_->tail(), spectrum_->max_abs(), spectrum_->size());
}

GeneratingFunction GeneratingFunction::numeric(std::shared_ptr<const Spectrum> s,
                                               ProductPolicy policy) {
    return GeneratingFunction(std::move(s), Strategy::numeric_product, policy);
}

GeneratingFunction GeneratingFunction::numeric(const Spectrum& s, ProductPolicy policy) {
    return numeric(std::make_shared<Spectrum>(s), policy);
}

GeneratingFunction GeneratingFunction::closed(std::shared_ptr<const Spectrum> s,
                                              ProductPolicy policy) {
    GeneratingFunction g(std::move(s), Strategy::closed_form, policy);
    const auto& fam = g.spectrum_->family();
    if (!fam) throw parameter_error("closed form requires a family-generated spectrum");
    switch (fam->family) {
    case FamilySpec::Family::squares:
        if (fam->n0 != 1) throw parameter_error("squares closed form requires n0 = 1");
        g.closed_form_ = ClosedForm::squares_from_one;
        break;
    case FamilySpec::Family::livsic:
        g.closed_form_ = ClosedForm::livsic;
        break;
    case FamilySpec::Family::integers_punctured:
        g.closed_form_ = ClosedForm::integers;
        break;
    case FamilySpec::Family::two_sided_power:
        if (fam->gamma != 1.0)
            throw parameter_error("two_sided_power closed form requires gamma = 1");
        g.closed_form_ = ClosedForm::integers;
        break;
    case FamilySpec::Family::shifted_progression:
        g.closed_form_ = ClosedForm::shifted_progression;
        break;
    default:
        throw parameter_error("no closed form for this family");
    }
    return g;
}

GeneratingFunction GeneratingFunction::closed(const Spectrum& s, ProductPolicy policy) {
    return closed(std::make_shared<Spectrum>(s), policy);
}

namespace {

// tail-correction exponent: -(z S1 + z^2 S2/2 + z^3 S3/3 + z^4 S4/4) up to order
cplx tail_log_correction(const TailSums& sums, int order, cplx z) {
    if (order <= 0) return {0.0, 0.0};
    cplx w = -(z * sums.s[1] + z * z * (sums.s[2] / 2.0));
    if (order >= 2) {
        cplx z2 = z * z;
        w -= z2 * z * (sums.s[3] / 3.0) + z2 * z2 * (sums.s[4] / 4.0);
    }
    return w;
}

double tail_error_estimate(const TailSums& sums, int order, cplx z) {
    double az = std::abs(z);
    if (order == 0) return az * std::fabs(sums.s[1]) + az * az * sums.s[2] / 2.0;
    if (order == 1)
        return std::pow(az, 3) * std::fabs(sums.s[3]) / 3.0 + std::pow(az, 4) * sums.s[4] / 4.0;
    // first neglected term ~ z^5 S5 / 5; estimate S5 by geometric extension
    double s5 = sums.s[3] > 0.0 ? sums.s[4] * (sums.s[4] / sums.s[3]) : 0.0;
    return std::pow(az, 5) * s5 / 5.0;
}

} // namespace

cplx GeneratingFunction::eval_closed(cplx z) const {
    const auto& fam = *spectrum_->family();
    switch (*closed_form_) {
    case ClosedForm::squares_from_one: {
        cplx w = std::sqrt(z);
        if (std::abs(w) < 1e-8) {
            cplx pw2 = (M_PI * M_PI) * z;
            return 1.0 - pw2 / 6.0 + pw2 * pw2 / 120.0;
        }
        return exp_checked(log_sin(M_PI * w) - std::log(M_PI * w));
    }
    case ClosedForm::livsic:
        return exp_checked(log_cos(M_PI * fam.c * z));
    case ClosedForm::integers: {
        cplx base;
        if (std::abs(z) < 1e-8) {
            cplx pz2 = (M_PI * M_PI) * z * z;
            base = 1.0 - pz2 / 6.0;
        } else {
            base = exp_checked(log_sin(M_PI * z) - std::log(M_PI * z));
        }
        bool has_t0 = fam.family == FamilySpec::Family::integers_punctured
                          ? fam.t0.has_value()
                          : fam.include_t0;
        if (has_t0) base *= 1.0 - z / fam.t0.value_or(0.5);
        return base;
    }
    case ClosedForm::shifted_progression: {
        double a = fam.a;
        cplx l = 2.0 * std::lgamma(a) - log_gamma(a + z) - log_gamma(a - z);
        return exp_checked(l);
    }
    }
    return {0.0, 0.0};
}

EvalResult GeneratingFunction::eval_ex(cplx z) const {
    EvalResult r;
    r.diag.terms_used = spectrum_->size();
    r.diag.tail_order = policy_.tail_order;
    if (strategy_ == Strategy::closed_form) {
        r.value = eval_closed(z);
        r.diag.est_rel_error = 0.0;
        return r;
    }
    const auto& pts = spectrum_->points();
    cplx acc(1.0, 0.0);
    double log_scale = 0.0;
    for (std::size_t idx : spectrum_->abs_order()) {
        acc *= 1.0 - z / pts[idx];
        double m = std::abs(acc);
        if (m > 1e120 || (m > 0.0 && m < 1e-120)) {
            log_scale += std::log(m);
            acc /= m;
        }
    }
    cplx w = tail_log_correction(sums_, policy_.tail_order, z);
    r.diag.est_rel_error = tail_error_estimate(sums_, policy_.tail_order, z);
    double m = std::abs(acc);
    if (m == 0.0) {
        r.value = {0.0, 0.0};
        return r;
    }
    double total_log = log_scale + std::log(m) + w.real();
    if (total_log > kLogDoubleMax)
        throw overflow_error("product value exceeds double range; use log_abs_eval");
    r.value = std::polar(std::exp(total_log), std::arg(acc) + w.imag());
    return r;
}

cplx GeneratingFunction::eval(cplx z) const { return eval_ex(z).value; }

LogAbsResult GeneratingFunction::log_abs_eval_ex(cplx z) const {
    LogAbsResult r;
    r.diag.terms_used = spectrum_->size();
    r.diag.tail_order = policy_.tail_order;
    const auto& pts = spectrum_->points();
    // proximity guard
    for (double t : pts) {
        if (std::abs(z - t) < policy_.proximity * std::max(1.0, std::fabs(t)))
            throw proximity_error("log_abs_eval: z within proximity threshold of a node");
    }
    if (strategy_ == Strategy::closed_form) {
        const auto& fam = *spectrum_->family();
        switch (*closed_form_) {
        case ClosedForm::squares_from_one: {
            cplx w = std::sqrt(z);
            r.value = (log_sin(M_PI * w) - std::log(M_PI * w)).real();
            return r;
        }
        case ClosedForm::livsic:
            r.value = log_cos(M_PI * fam.c * z).real();
            return r;
        case ClosedForm::integers: {
            double v = (log_sin(M_PI * z) - std::log(M_PI * z)).real();
            bool has_t0 = fam.family == FamilySpec::Family::integers_punctured
                              ? fam.t0.has_value()
                              : fam.include_t0;
            if (has_t0) v += std::log(std::abs(1.0 - z / fam.t0.value_or(0.5)));
            r.value = v;
            return r;
        }
        case ClosedForm::shifted_progression: {
            double a = fam.a;
            r.value = (2.0 * std::lgamma(a) - log_gamma(a + z) - log_gamma(a - z)).real();
            return r;
        }
        }
    }
    double sum = 0.0;
    double acc = 1.0; // batches |factors| to cut down on log calls
    bool complex_z = z.imag() != 0.0;
    if (complex_z) {
        cplx cacc(1.0, 0.0);
        for (std::size_t idx : spectrum_->abs_order()) {
            cacc *= 1.0 - z / pts[idx];
            double m = std::abs(cacc);
            if (m > 1e120 || m < 1e-120) {
                sum += std::log(m);
                cacc /= m;
            }
        }
        sum += std::log(std::abs(cacc));
    } else {
        double x = z.real();
        for (std::size_t idx : spectrum_->abs_order()) {
            acc *= std::fabs(1.0 - x / pts[idx]);
            if (acc > 1e120 || acc < 1e-120) {
                sum += std::log(acc);
                acc = 1.0;
            }
        }
        sum += std::log(acc);
    }
    cplx w = tail_log_correction(sums_, policy_.tail_order, z);
    r.value = sum + w.real();
    r.diag.est_rel_error = tail_error_estimate(sums_, policy_.tail_order, z);
    return r;
}

double GeneratingFunction::log_abs_eval(cplx z) const { return log_abs_eval_ex(z).value; }

double GeneratingFunction::closed_deriv(std::size_t pos) const {
    const auto& fam = *spectrum_->family();
    double t = spectrum_->point(pos);
    switch (*closed_form_) {
    case ClosedForm::squares_from_one: {
        long n = std::lround(std::sqrt(t));
        return (n % 2 == 0 ? 1.0 : -1.0) / (2.0 * t);
    }
    case ClosedForm::livsic: {
        long n = std::lround(fam.c * t - 0.5);
        return -M_PI * fam.c * ((n % 2 + 2) % 2 == 0 ? 1.0 : -1.0);
    }
    case ClosedForm::integers: {
        bool has_t0 = fam.family == FamilySpec::Family::integers_punctured
                          ? fam.t0.has_value()
                          : fam.include_t0;
        double t0 = fam.t0.value_or(0.5);
        long n = std::lround(t);
        if (has_t0 && std::fabs(t - t0) < 0.25 && t != std::floor(t)) {
            // the inserted point
            return -std::sin(M_PI * t0) / (M_PI * t0 * t0);
        }
        double base = ((n % 2 + 2) % 2 == 0 ? 1.0 : -1.0) / double(n);
        if (has_t0) base *= 1.0 - t / t0;
        return base;
    }
    case ClosedForm::shifted_progression: {
        double a = fam.a;
        long k = std::lround(std::fabs(t) - a);
        double mag = std::exp(2.0 * std::lgamma(a) + std::lgamma(double(k) + 1.0) -
                              std::lgamma(double(k) + 2.0 * a));
        double sign = (k % 2 == 0 ? -1.0 : 1.0); // (-1)^(k+1)
        return t > 0 ? sign * mag : -sign * mag; // A even => A' odd
    }
    }
    return 0.0;
}

NodeDeriv GeneratingFunction::log_deriv_at_node(std::size_t pos) const {
    if (pos >= spectrum_->size()) throw range_error("deriv_at_node: index beyond range");
    if (strategy_ == Strategy::closed_form) {
        double v = closed_deriv(pos);
        return {std::log(std::fabs(v)), sign_of(v)};
    }
    const auto& pts = spectrum_->points();
    const double tn = pts[pos];
    double log_abs = -std::log(std::fabs(tn));
    int sign = -sign_of(tn);
    double acc = 1.0;
    const double collide = 1e-14 * std::max(1.0, std::fabs(tn));
    for (std::size_t idx : spectrum_->abs_order()) {
        if (idx == pos) continue;
        double tm = pts[idx];
        double diff = tm - tn;
        if (std::fabs(diff) < collide)
            throw degeneracy_error("node collision: spectrum is effectively multiple at t = " +
                                   std::to_string(tn));
        acc *= diff / tm;
        double m = std::fabs(acc);
        if (m > 1e120 || m < 1e-120) {
            log_abs += std::log(m);
            sign *= sign_of(acc);
            acc = 1.0;
        }
    }
    log_abs += std::log(std::fabs(acc));
    sign *= sign_of(acc);
    cplx w = tail_log_correction(sums_, policy_.tail_order, cplx(tn, 0.0));
    log_abs += w.real();
    return {log_abs, sign};
}

double NodeDeriv::value() const {
    if (log_abs > kLogDoubleMax) return sign > 0 ? HUGE_VAL : -HUGE_VAL;
    if (log_abs < -kLogDoubleMax) return 0.0;
    return sign * std::exp(log_abs);
}

double GeneratingFunction::deriv_at_node(std::size_t pos) const {
    return log_deriv_at_node(pos).value();
}

} // namespace vs
