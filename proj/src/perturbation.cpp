#include "voltspec/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace vs {

using nlohmann::json;

namespace {

std::vector<cplx> derive_c(const std::vector<cplx>& a, const std::vector<cplx>& b,
                           const std::vector<double>& mu) {
    std::vector<cplx> c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * std::conj(b[i]) * mu[i];
    return c;
}

// Summability proxy for |c_n| / t_n^2; finite data always passes.
void check_c_proxy(const Spectrum& s, const std::vector<cplx>& c) {
    std::vector<double> logs;
    for (std::size_t rank = 0; rank < s.size(); ++rank) {
        std::size_t pos = s.abs_order()[rank];
        double mag = std::abs(c[pos]);
        if (mag == 0.0) continue;
        double t = s.point(pos);
        logs.push_back(std::log(mag) - 2.0 * std::log(std::fabs(t)));
    }
    if (logs.size() < 64) return;
    DecayFit fit = fit_decay(logs);
    if (!fit.converges())
        throw validity_error("sum |c_n|/t_n^2 proxy unbounded (fitted " +
                             std::string(fit.kind == DecayFit::Kind::power ? "power p = " +
                                         std::to_string(fit.p)
                                                                           : "exponential growth") +
                             ")");
}

void fill_vectors(PerturbationData& p, MassPolicy masses) {
    const std::size_t n = p.c.size();
    p.mu.assign(n, 1.0);
    p.a.assign(n, {0.0, 0.0});
    p.b.assign(n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        double mag = std::abs(p.c[i]);
        if (masses == MassPolicy::abs_c) p.mu[i] = std::max(mag, 1e-300);
        if (mag == 0.0) continue;
        double root = std::sqrt(mag);
        double rmu = std::sqrt(p.mu[i]);
        p.a[i] = root / rmu;
        p.b[i] = std::conj(p.c[i]) / (root * rmu);
    }
    p.masses = masses;
}

} // namespace

PerturbationData synthesize(const Spectrum& s, const GeneratingFunction& g, MassPolicy masses,
                            bool force) {
    RemovabilityReport rep = verdict(s);
    if (rep.verdict != Verdict::Removable && !force)
        throw validity_error("synthesize: spectrum verdict is " + to_string(rep.verdict) +
                             " (" + rep.to_json() + "); pass force to override");

    PerturbationData p;
    p.spectrum = g.spectrum_ptr();
    p.delta = 1.0; // q = 1/A(0) under the product normalization
    p.c.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        NodeDeriv d = g.log_deriv_at_node(i);
        // c = -1/A'(t): log-backed so steep derivatives underflow to 0 cleanly
        double mag = d.log_abs < -709.0 ? HUGE_VAL : std::exp(-d.log_abs);
        if (!std::isfinite(mag)) mag = HUGE_VAL;
        if (d.log_abs > 709.0) mag = 0.0;
        p.c[i] = cplx(-d.sign * mag, 0.0);
    }
    fill_vectors(p, masses);
    p.synthesized = true;
    p.forced = force && rep.verdict != Verdict::Removable;
    if (p.forced) p.note = "forced synthesis on a " + to_string(rep.verdict) + " spectrum";
    return p;
}

PerturbationData synthesize_smooth(const Spectrum& s, const GeneratingFunction& g,
                                   const SmoothSpec& spec, bool force) {
    if (!(spec.gamma > 0.0 && spec.gamma < 2.0))
        throw parameter_error("smooth synthesis: gamma must lie in (0,2)");
    if (spec.alpha1 < 0.0 || spec.alpha1 >= 1.0 || spec.alpha2 < 0.0 || spec.alpha2 >= 1.0)
        throw parameter_error("smooth synthesis: alpha must lie in [0,1)");
    if (spec.alpha1 + spec.alpha2 > 2.0 - spec.gamma + 1e-12)
        throw parameter_error("smooth synthesis: alpha1 + alpha2 must not exceed 2 - gamma");

    // hypothesis: sum 1/(|t|^gamma |A'(t)|) converges (fitted on the interior)
    std::size_t interior = std::max<std::size_t>(std::min<std::size_t>(s.size(), 64), s.size() / 6);
    std::vector<double> logs;
    std::vector<NodeDeriv> derivs(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) derivs[i] = g.log_deriv_at_node(i);
    for (std::size_t rank = 0; rank < interior; ++rank) {
        std::size_t pos = s.abs_order()[rank];
        logs.push_back(-spec.gamma * std::log(std::fabs(s.point(pos))) - derivs[pos].log_abs);
    }
    if (logs.size() >= 64 && !force) {
        DecayFit fit = fit_decay(logs);
        if (!fit.converges())
            throw validity_error(
                "smooth synthesis: sum 1/(|t|^gamma |A'|) fails the fitted convergence test");
    }

    PerturbationData p;
    p.spectrum = g.spectrum_ptr();
    p.delta = 1.0;
    p.c.resize(s.size());
    p.mu.assign(s.size(), 1.0);
    p.a.assign(s.size(), {0.0, 0.0});
    p.b.assign(s.size(), {0.0, 0.0});
    const double ea = (2.0 - 2.0 * spec.alpha1 - spec.gamma) / 2.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double log_mag = -derivs[i].log_abs; // |c| = 1/|A'|
        double t_abs = std::fabs(s.point(i));
        p.c[i] = cplx(-derivs[i].sign * (log_mag > 709.0 ? HUGE_VAL : std::exp(log_mag)), 0.0);
        double la = 0.5 * log_mag + ea * std::log(t_abs);
        double a_mag = la > 709.0 ? HUGE_VAL : std::exp(la);
        double lb = 0.5 * log_mag - ea * std::log(t_abs);
        double b_mag = lb > 709.0 ? HUGE_VAL : std::exp(lb);
        p.a[i] = a_mag;
        // phase of c rides on b so that a conj(b) mu = c
        p.b[i] = (a_mag == 0.0 ? cplx(0.0, 0.0)
                               : std::conj(p.c[i]) / cplx(a_mag, 0.0));
        if (std::abs(p.c[i]) == 0.0) {
            p.a[i] = 0.0;
            p.b[i] = 0.0;
        } else if (b_mag == 0.0) {
            p.b[i] = 0.0;
        }
    }

    SmoothDiag diag;
    auto weighted_sums = [&](double alpha, const std::vector<cplx>& v, double& total,
                             double& last_quarter) {
        total = 0.0;
        std::vector<double> partial;
        partial.reserve(s.size());
        for (std::size_t rank = 0; rank < s.size(); ++rank) {
            std::size_t pos = s.abs_order()[rank];
            double t_abs = std::fabs(s.point(pos));
            double term = std::norm(v[pos]) * std::pow(t_abs, 2.0 * alpha - 2.0) * p.mu[pos];
            total += term;
            partial.push_back(total);
        }
        double at_three_quarters = partial[partial.size() * 3 / 4];
        last_quarter = total - at_three_quarters;
    };
    weighted_sums(spec.alpha1, p.a, diag.weighted_a_total, diag.weighted_a_last_quarter);
    weighted_sums(spec.alpha2, p.b, diag.weighted_b_total, diag.weighted_b_last_quarter);

    if (spec.rescale) {
        auto ratio_with = [&](int sexp) {
            // unweighted partial-sum ratio S_N / S_{N/2} for the a side
            double total = 0.0, half = 0.0;
            for (std::size_t rank = 0; rank < s.size(); ++rank) {
                std::size_t pos = s.abs_order()[rank];
                double pr = rank % 2 == 0 ? std::max(1.0, std::pow(double(rank + 1), sexp))
                                          : std::min(1.0, std::pow(double(rank + 1), -sexp));
                double term = pr * pr * std::norm(p.a[pos]) * p.mu[pos];
                total += term;
                if (rank < s.size() / 2) half = total;
            }
            return half > 0.0 ? total / half : 0.0;
        };
        int chosen = -1;
        for (int sexp = 0; sexp <= 8; ++sexp) {
            if (ratio_with(sexp) > 10.0) {
                chosen = sexp;
                break;
            }
        }
        if (chosen < 0) throw numeric_error("rescaling: divergence proxy never triggered");
        diag.rescale_exponent = chosen;
        for (std::size_t rank = 0; rank < s.size(); ++rank) {
            std::size_t pos = s.abs_order()[rank];
            double pr = rank % 2 == 0 ? std::max(1.0, std::pow(double(rank + 1), chosen))
                                      : std::min(1.0, std::pow(double(rank + 1), -chosen));
            p.a[pos] *= pr;
            p.b[pos] /= pr;
        }
        auto ratio_of = [&](const std::vector<cplx>& v) {
            double total = 0.0, half = 0.0;
            for (std::size_t rank = 0; rank < s.size(); ++rank) {
                std::size_t pos = s.abs_order()[rank];
                total += std::norm(v[pos]) * p.mu[pos];
                if (rank < s.size() / 2) half = total;
            }
            return half > 0.0 ? total / half : 0.0;
        };
        diag.divergence_ratio_a = ratio_of(p.a);
        diag.divergence_ratio_b = ratio_of(p.b);
    }

    p.synthesized = true;
    p.smooth = spec;
    p.smooth_diag = diag;
    return p;
}

PerturbationData arbitrary_data(const Spectrum& s, std::vector<double> mu, std::vector<cplx> a,
                                std::vector<cplx> b, double delta) {
    if (mu.size() != s.size() || a.size() != s.size() || b.size() != s.size())
        throw parameter_error("arbitrary_data: one (mu, a, b) triple per node required");
    for (double m : mu)
        if (!(m > 0.0)) throw parameter_error("arbitrary_data: masses must be positive");
    PerturbationData p;
    p.spectrum = std::make_shared<Spectrum>(s);
    p.mu = std::move(mu);
    p.a = std::move(a);
    p.b = std::move(b);
    p.delta = delta;
    p.c = derive_c(p.a, p.b, p.mu);
    check_c_proxy(s, p.c);
    p.note = "non-synthesized data";
    return p;
}

PerturbationData arbitrary_from_c(const Spectrum& s, const std::vector<cplx>& c, double delta) {
    if (c.size() != s.size()) throw parameter_error("arbitrary_from_c: one c per node required");
    check_c_proxy(s, c);
    PerturbationData p;
    p.spectrum = std::make_shared<Spectrum>(s);
    p.c = c;
    p.delta = delta;
    fill_vectors(p, MassPolicy::unit);
    p.note = "non-synthesized data";
    return p;
}

PerturbationData livsic_data(const Spectrum& s) {
    const double root = 1.0 / std::sqrt(M_PI);
    PerturbationData p;
    p.spectrum = std::make_shared<Spectrum>(s);
    p.mu.assign(s.size(), 1.0);
    p.a.assign(s.size(), cplx(0.0, root));
    p.b.assign(s.size(), cplx(root, 0.0));
    p.delta = -1.0;
    p.c = derive_c(p.a, p.b, p.mu);
    p.note = "dissipative pattern a = ib";
    return p;
}

std::string PerturbationData::to_json(int indent) const {
    json j;
    j["spectrum"] = json::parse(spectrum->to_json());
    j["mu"] = mu;
    json ja = json::array(), jb = json::array();
    for (const auto& v : a) ja.push_back({v.real(), v.imag()});
    for (const auto& v : b) jb.push_back({v.real(), v.imag()});
    j["a"] = ja;
    j["b"] = jb;
    j["delta"] = delta;
    json flags;
    flags["synthesized"] = synthesized;
    flags["forced"] = forced;
    flags["masses"] = masses == MassPolicy::unit ? "unit" : "abs_c";
    if (smooth) {
        flags["smooth"] = {{"alpha1", smooth->alpha1},
                           {"alpha2", smooth->alpha2},
                           {"gamma", smooth->gamma},
                           {"rescale", smooth->rescale}};
        if (smooth_diag) flags["rescale_exponent"] = smooth_diag->rescale_exponent;
    }
    if (!note.empty()) flags["note"] = note;
    j["flags"] = flags;
    return indent >= 0 ? j.dump(indent) : j.dump();
}

PerturbationData PerturbationData::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw parameter_error(std::string("perturbation JSON parse failure: ") + e.what());
    }
    Spectrum s = Spectrum::from_json(j.at("spectrum").dump());
    std::vector<double> mu = j.at("mu").get<std::vector<double>>();
    auto read_vec = [&](const char* key) {
        std::vector<cplx> out;
        for (const auto& e : j.at(key)) out.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
        return out;
    };
    PerturbationData p = arbitrary_data(s, std::move(mu), read_vec("a"), read_vec("b"),
                                        j.at("delta").get<double>());
    const json flags = j.value("flags", json::object());
    p.synthesized = flags.value("synthesized", false);
    p.forced = flags.value("forced", false);
    p.masses = flags.value("masses", "unit") == std::string("abs_c") ? MassPolicy::abs_c
                                                                     : MassPolicy::unit;
    if (p.synthesized) p.note.clear();
    return p;
}

} // namespace vs
