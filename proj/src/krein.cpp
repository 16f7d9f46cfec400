#include "voltspec/krein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace vs {

using nlohmann::json;

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Removable: return "Removable";
    case Verdict::Nonremovable: return "Nonremovable";
    case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

namespace {

const char* method_name(VerdictMethod m) {
    switch (m) {
    case VerdictMethod::series_fit: return "series_fit";
    case VerdictMethod::asymptotic_predictor: return "asymptotic_predictor";
    case VerdictMethod::closed_form: return "closed_form";
    case VerdictMethod::degenerate: return "degenerate";
    }
    return "series_fit";
}

constexpr double kPBand = 0.15;        // exponent margin around the critical p = 1
constexpr double kCriticalSlack = 0.02; // clean fits at p <= 1 + this are divergent
constexpr double kCleanRms = 0.05;
constexpr double kDegenerateGap = 1e-6;

std::vector<double> tail_alphas(const Tail& tail) {
    switch (tail.kind) {
    case Tail::Kind::power: return {tail.rho};
    case Tail::Kind::paired_power: return {tail.rho_minus, tail.rho_plus};
    default: return {};
    }
}

double fit_confidence(const DecayFit& fit, double decisiveness) {
    double r_norm = fit.rms_residual / std::max(fit.range, 1.0);
    double quality = 1.0 / (1.0 + 10.0 * r_norm);
    return std::min(0.999, quality * decisiveness);
}

} // namespace

std::vector<KreinTerm> krein_terms(const Spectrum& s, const GeneratingFunction& g,
                                   std::size_t limit) {
    const std::size_t n = limit == 0 ? s.size() : std::min(limit, s.size());
    std::vector<KreinTerm> terms;
    terms.reserve(n);
    double partial = 0.0;
    for (std::size_t rank = 0; rank < n; ++rank) {
        std::size_t pos = s.abs_order()[rank];
        NodeDeriv d = g.log_deriv_at_node(pos);
        KreinTerm term;
        term.rank = rank + 1;
        term.t = s.point(pos);
        term.log_abs_deriv = d.log_abs;
        term.deriv_sign = d.sign;
        term.log_k = -2.0 * std::log(std::fabs(term.t)) - d.log_abs;
        term.k = term.log_k > 709.0 ? HUGE_VAL : std::exp(term.log_k);
        partial += term.k;
        term.partial_sum = partial;
        terms.push_back(term);
    }
    return terms;
}

std::string krein_terms_csv(const std::vector<KreinTerm>& terms) {
    std::string out = "n,t_n,A_prime,k_n,partial_sum\n";
    char buf[160];
    for (const auto& t : terms) {
        double a_prime = NodeDeriv{t.log_abs_deriv, t.deriv_sign}.value();
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g\n", t.rank, t.t, a_prime,
                      t.k, t.partial_sum);
        out += buf;
    }
    return out;
}

RemovabilityReport verdict(const Spectrum& s, const GeneratingFunction& g) {
    RemovabilityReport rep;
    rep.terms_total = s.size();
    rep.min_relative_gap = s.min_relative_gap();

    if (rep.min_relative_gap < kDegenerateGap) {
        rep.verdict = Verdict::Nonremovable;
        rep.method = VerdictMethod::degenerate;
        rep.confidence = 1.0;
        rep.note = "near-multiple nodes: min relative gap below 1e-6";
        return rep;
    }
    if (s.size() < 64) throw insufficiency_error("verdict requires at least 64 terms");

    // Node derivatives in the outer ~5/6 of the materialized range are
    // truncation-dominated; fit on the interior slice only.
    std::size_t interior = std::max<std::size_t>(64, s.size() / 6);
    interior = std::min(interior, s.size());

    // Fitting needs true-A' asymptotics: rebuild with full tail corrections
    // if the caller's numeric policy is weaker.
    const GeneratingFunction* gp = &g;
    std::optional<GeneratingFunction> upgraded;
    if (g.strategy() == GeneratingFunction::Strategy::numeric_product &&
        g.policy().tail_order < 2) {
        ProductPolicy pol = g.policy();
        pol.tail_order = 2;
        upgraded.emplace(GeneratingFunction::numeric(g.spectrum_ptr(), pol));
        gp = &*upgraded;
    }

    std::vector<KreinTerm> terms;
    try {
        terms = krein_terms(s, *gp, interior);
    } catch (const degeneracy_error& e) {
        rep.verdict = Verdict::Nonremovable;
        rep.method = VerdictMethod::degenerate;
        rep.confidence = 1.0;
        rep.note = std::string("degenerate node: ") + e.what();
        return rep;
    }
    rep.terms_used = terms.size();

    std::vector<double> logs;
    logs.reserve(terms.size());
    for (const auto& t : terms) logs.push_back(t.log_k);
    rep.fit = fit_decay(logs, tail_alphas(s.tail()));

    const DecayFit& fit = rep.fit;
    switch (fit.kind) {
    case DecayFit::Kind::exp_decay:
        rep.verdict = Verdict::Removable;
        rep.confidence = fit_confidence(fit, std::min(1.0, fit.range / 5.0));
        break;
    case DecayFit::Kind::exp_growth:
        rep.verdict = Verdict::Nonremovable;
        rep.confidence = fit_confidence(fit, std::min(1.0, fit.range / 5.0));
        break;
    case DecayFit::Kind::power:
        if (fit.p > 1.0 + kPBand) {
            rep.verdict = Verdict::Removable;
            rep.confidence = fit_confidence(fit, std::min(1.0, (fit.p - 1.0) / kPBand));
        } else if (fit.p < 1.0 - kPBand) {
            rep.verdict = Verdict::Nonremovable;
            rep.confidence = fit_confidence(fit, std::min(1.0, (1.0 - fit.p) / kPBand));
        } else if (fit.p <= 1.0 + kCriticalSlack && fit.rms_residual < kCleanRms) {
            // clean power law at or below the critical exponent diverges
            rep.verdict = Verdict::Nonremovable;
            rep.confidence = fit_confidence(fit, 0.95);
            rep.note = "clean fit at the critical exponent";
        } else {
            rep.verdict = Verdict::Inconclusive;
            rep.confidence = std::min(0.85, fit_confidence(fit, std::fabs(fit.p - 1.0) / kPBand));
            rep.note = "exponent within the undecidable band";
        }
        break;
    }
    if (rep.verdict != Verdict::Inconclusive && rep.confidence < 0.9) {
        rep.note = "decisive fit lacked confidence >= 0.9; downgraded";
        rep.verdict = Verdict::Inconclusive;
    }
    return rep;
}

RemovabilityReport verdict(const Spectrum& s) {
    ProductPolicy pol;
    pol.tail_order = 2;
    return verdict(s, GeneratingFunction::numeric(s, pol));
}

LpForecast lp_forecast(double rho_minus, double rho_plus, double density_minus,
                       double density_plus) {
    if (density_minus < 0.0 || density_plus < 0.0)
        throw parameter_error("densities must be nonnegative");
    if (density_minus == 0.0 && density_plus == 0.0)
        throw parameter_error("at least one side must carry density");
    for (auto [rho, d] : {std::pair{rho_minus, density_minus}, std::pair{rho_plus, density_plus}})
        if (d > 0.0 && !(rho > 0.0 && rho < 1.0))
            throw parameter_error("rho must lie in (0,1) where density is positive");

    auto cot_term = [](double rho, double d) { return d > 0.0 ? d / std::tan(M_PI * rho) : 0.0; };
    auto sin_term = [](double rho, double d) { return d > 0.0 ? d / std::sin(M_PI * rho) : 0.0; };

    LpForecast f;
    f.rho_minus = rho_minus;
    f.rho_plus = rho_plus;
    f.density_minus = density_minus;
    f.density_plus = density_plus;
    f.u_minus = cot_term(rho_minus, density_minus) + sin_term(rho_plus, density_plus);
    f.u_plus = cot_term(rho_plus, density_plus) + sin_term(rho_minus, density_minus);
    if (f.u_minus > 0.0 && f.u_plus > 0.0)
        f.verdict = Verdict::Removable;
    else if (f.u_minus < 0.0 || f.u_plus < 0.0)
        f.verdict = Verdict::Nonremovable;
    else
        f.verdict = Verdict::Inconclusive;
    return f;
}

RemovabilityReport finite_edit(const Spectrum& s, const std::vector<double>& add,
                               const std::vector<double>& remove, ProductPolicy policy) {
    std::vector<double> pts = s.points();
    for (double r : remove) {
        auto it = std::find_if(pts.begin(), pts.end(), [&](double t) {
            return std::fabs(t - r) <= 1e-9 * std::max(1.0, std::fabs(r));
        });
        if (it == pts.end())
            throw membership_error("finite_edit: removal of non-member " + std::to_string(r));
        pts.erase(it);
    }
    for (double a : add) pts.push_back(a);
    Spectrum edited = Spectrum::from_points(std::move(pts), s.tail(), s.label() + " (edited)");
    policy.tail_order = std::max(policy.tail_order, 2);
    return verdict(edited, GeneratingFunction::numeric(edited, policy));
}

std::string RemovabilityReport::to_json(int indent) const {
    json j;
    j["verdict"] = vs::to_string(verdict);
    j["confidence"] = confidence;
    j["method"] = method_name(method);
    j["q"] = q;
    j["terms_used"] = terms_used;
    j["terms_total"] = terms_total;
    j["min_relative_gap"] = min_relative_gap;
    if (!note.empty()) j["note"] = note;
    if (method == VerdictMethod::series_fit) {
        json f;
        switch (fit.kind) {
        case DecayFit::Kind::power:
            f["kind"] = "power";
            f["p"] = fit.p;
            break;
        case DecayFit::Kind::exp_decay:
            f["kind"] = "exp_decay";
            f["coefficient"] = fit.coefficient;
            f["alpha"] = fit.alpha;
            break;
        case DecayFit::Kind::exp_growth:
            f["kind"] = "exp_growth";
            f["coefficient"] = fit.coefficient;
            f["alpha"] = fit.alpha;
            break;
        }
        f["rms_residual"] = fit.rms_residual;
        f["window"] = {fit.window_lo, fit.window_hi};
        j["fit"] = f;
    }
    return indent >= 0 ? j.dump(indent) : j.dump();
}

} // namespace vs
