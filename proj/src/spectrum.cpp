#include "voltspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace vs {

using nlohmann::json;

Tail Tail::power_tail(int side, double rho, double density) {
    if (rho <= 0.0) throw parameter_error("tail rho must be positive");
    if (density <= 0.0) throw parameter_error("tail density must be positive");
    Tail t;
    t.kind = Kind::power;
    t.side = side >= 0 ? +1 : -1;
    t.rho = rho;
    t.density = density;
    return t;
}

Tail Tail::paired_power_tail(double rho_m, double d_m, double rho_p, double d_p) {
    if (rho_m <= 0.0 || rho_p <= 0.0) throw parameter_error("tail rho must be positive");
    if (d_m <= 0.0 || d_p <= 0.0) throw parameter_error("tail density must be positive");
    Tail t;
    t.kind = Kind::paired_power;
    t.rho_minus = rho_m;
    t.density_minus = d_m;
    t.rho_plus = rho_p;
    t.density_plus = d_p;
    return t;
}

Tail Tail::arithmetic_tail(double spacing, double offset) {
    if (spacing <= 0.0) throw parameter_error("tail spacing must be positive");
    Tail t;
    t.kind = Kind::arithmetic;
    t.spacing = spacing;
    t.offset = offset;
    return t;
}

bool Tail::symmetric() const {
    switch (kind) {
    case Kind::none: return true;
    case Kind::power: return false;
    case Kind::arithmetic: return true;
    case Kind::paired_power:
        return rho_minus == rho_plus && density_minus == density_plus;
    }
    return false;
}

FamilySpec FamilySpec::two_sided_power(double gamma, int count, bool include_t0, double t0) {
    FamilySpec s;
    s.family = Family::two_sided_power;
    s.gamma = gamma;
    s.count = count;
    s.include_t0 = include_t0;
    s.t0 = t0;
    return s;
}

FamilySpec FamilySpec::one_sided_power(double gamma, int count) {
    FamilySpec s;
    s.family = Family::one_sided_power;
    s.gamma = gamma;
    s.count = count;
    return s;
}

FamilySpec FamilySpec::squares(int n0, int count) {
    FamilySpec s;
    s.family = Family::squares;
    s.n0 = n0;
    s.count = count;
    return s;
}

FamilySpec FamilySpec::shifted_progression(double a, int count) {
    FamilySpec s;
    s.family = Family::shifted_progression;
    s.a = a;
    s.count = count;
    return s;
}

FamilySpec FamilySpec::livsic(double c, int count) {
    FamilySpec s;
    s.family = Family::livsic;
    s.c = c;
    s.count = count;
    return s;
}

FamilySpec FamilySpec::integers_punctured(int count, std::optional<double> t0) {
    FamilySpec s;
    s.family = Family::integers_punctured;
    s.count = count;
    s.t0 = t0;
    return s;
}

FamilySpec FamilySpec::near_pairs(int count, double ratio) {
    FamilySpec s;
    s.family = Family::near_pairs;
    s.count = count;
    s.pair_ratio = ratio;
    return s;
}

FamilySpec FamilySpec::custom(std::vector<double> points) {
    FamilySpec s;
    s.family = Family::custom;
    s.points = std::move(points);
    s.count = static_cast<int>(s.points.size());
    return s;
}

namespace {

void validate_points(const std::vector<double>& pts) {
    for (double t : pts) {
        if (t == 0.0) throw parameter_error("spectrum must not contain 0");
        if (!std::isfinite(t)) throw parameter_error("spectrum points must be finite");
    }
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i - 1] < pts[i]))
            throw parameter_error("spectrum points must be strictly increasing and distinct");
}

std::vector<std::size_t> build_abs_order(const std::vector<double>& pts) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double fa = std::fabs(pts[a]), fb = std::fabs(pts[b]);
        if (fa != fb) return fa < fb;
        return pts[a] < pts[b];
    });
    return order;
}

std::string family_name(FamilySpec::Family f) {
    switch (f) {
    case FamilySpec::Family::two_sided_power: return "two_sided_power";
    case FamilySpec::Family::one_sided_power: return "one_sided_power";
    case FamilySpec::Family::squares: return "squares";
    case FamilySpec::Family::shifted_progression: return "shifted_progression";
    case FamilySpec::Family::livsic: return "livsic";
    case FamilySpec::Family::integers_punctured: return "integers_punctured";
    case FamilySpec::Family::near_pairs: return "near_pairs";
    case FamilySpec::Family::custom: return "custom";
    }
    return "custom";
}

json tail_to_json(const Tail& t) {
    switch (t.kind) {
    case Tail::Kind::none:
        return json{{"kind", "none"}};
    case Tail::Kind::power:
        return json{{"kind", "power"}, {"side", t.side}, {"rho", t.rho}, {"density", t.density}};
    case Tail::Kind::paired_power:
        return json{{"kind", "paired_power"},
                    {"rho_minus", t.rho_minus},
                    {"D_minus", t.density_minus},
                    {"rho_plus", t.rho_plus},
                    {"D_plus", t.density_plus}};
    case Tail::Kind::arithmetic:
        return json{{"kind", "arithmetic"}, {"spacing", t.spacing}, {"offset", t.offset}};
    }
    return json{{"kind", "none"}};
}

Tail tail_from_json(const json& j) {
    const std::string kind = j.value("kind", "none");
    if (kind == "none") return Tail::none();
    if (kind == "power")
        return Tail::power_tail(j.at("side").get<int>(), j.at("rho").get<double>(),
                                j.at("density").get<double>());
    if (kind == "paired_power")
        return Tail::paired_power_tail(j.at("rho_minus").get<double>(), j.at("D_minus").get<double>(),
                                       j.at("rho_plus").get<double>(), j.at("D_plus").get<double>());
    if (kind == "arithmetic")
        return Tail::arithmetic_tail(j.at("spacing").get<double>(), j.at("offset").get<double>());
    throw parameter_error("unknown tail kind: " + kind);
}

} // namespace

Spectrum Spectrum::from_points(std::vector<double> points, Tail tail, std::string label) {
    std::sort(points.begin(), points.end());
    validate_points(points);
    Spectrum s;
    s.points_ = std::move(points);
    s.abs_order_ = build_abs_order(s.points_);
    s.tail_ = tail;
    s.label_ = std::move(label);
    return s;
}

double Spectrum::max_abs() const {
    if (points_.empty()) return 0.0;
    return std::max(std::fabs(points_.front()), std::fabs(points_.back()));
}

int Spectrum::counting_function(double r) const {
    if (!(r > 0.0)) throw parameter_error("counting_function requires r > 0");
    if (r > max_abs()) throw range_error("counting_function: r beyond materialized range");
    int count = 0;
    for (double t : points_)
        if (t >= 0.0 && t <= r) ++count;
    return count;
}

std::vector<double> Spectrum::reciprocal_view() const {
    std::vector<double> s;
    s.reserve(points_.size());
    for (double t : points_) s.push_back(1.0 / t);
    return s;
}

double Spectrum::min_relative_gap() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points_.size(); ++i) {
        double gap = points_[i] - points_[i - 1];
        double scale = std::max(1.0, std::fabs(points_[i]));
        best = std::min(best, gap / scale);
    }
    return best;
}

bool Spectrum::is_symmetric() const {
    // sorted ascending: mirror position of i is size-1-i
    const std::size_t n = points_.size();
    for (std::size_t i = 0; i < n; ++i)
        if (points_[i] != -points_[n - 1 - i]) return false;
    return true;
}

std::string Spectrum::to_json(int indent) const {
    json j;
    if (family_ && family_->family != FamilySpec::Family::custom) {
        j["family"] = family_name(family_->family);
        json params;
        switch (family_->family) {
        case FamilySpec::Family::two_sided_power:
            params["gamma"] = family_->gamma;
            params["include_t0"] = family_->include_t0;
            if (family_->t0) params["t0"] = *family_->t0;
            break;
        case FamilySpec::Family::one_sided_power:
            params["gamma"] = family_->gamma;
            break;
        case FamilySpec::Family::squares:
            params["n0"] = family_->n0;
            break;
        case FamilySpec::Family::shifted_progression:
            params["a"] = family_->a;
            break;
        case FamilySpec::Family::livsic:
            params["c"] = family_->c;
            break;
        case FamilySpec::Family::integers_punctured:
            if (family_->t0) params["t0"] = *family_->t0;
            break;
        case FamilySpec::Family::near_pairs:
            params["ratio"] = family_->pair_ratio;
            break;
        default:
            break;
        }
        j["params"] = params;
    }
    j["count"] = family_ ? family_->count : static_cast<int>(points_.size());
    j["points"] = points_;
    j["tail"] = tail_to_json(tail_);
    j["label"] = label_;
    return indent >= 0 ? j.dump(indent) : j.dump();
}

Spectrum Spectrum::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw parameter_error(std::string("spectrum JSON parse failure: ") + e.what());
    }
    if (!j.contains("points")) throw parameter_error("spectrum JSON lacks \"points\"");
    std::vector<double> pts = j.at("points").get<std::vector<double>>();
    Tail tail = j.contains("tail") ? tail_from_json(j.at("tail")) : Tail::none();
    std::string label = j.value("label", std::string{});
    Spectrum s = Spectrum::from_points(std::move(pts), tail, std::move(label));
    if (j.contains("family")) {
        const std::string fam = j.at("family").get<std::string>();
        const json params = j.value("params", json::object());
        const int count = j.value("count", static_cast<int>(s.size()));
        if (fam == "two_sided_power")
            s.family_ = FamilySpec::two_sided_power(params.value("gamma", 1.0), count,
                                                    params.value("include_t0", true),
                                                    params.value("t0", 0.5));
        else if (fam == "one_sided_power")
            s.family_ = FamilySpec::one_sided_power(params.value("gamma", 1.0), count);
        else if (fam == "squares")
            s.family_ = FamilySpec::squares(params.value("n0", 1), count);
        else if (fam == "shifted_progression")
            s.family_ = FamilySpec::shifted_progression(params.value("a", 0.5), count);
        else if (fam == "livsic")
            s.family_ = FamilySpec::livsic(params.value("c", 1.0), count);
        else if (fam == "integers_punctured") {
            std::optional<double> t0;
            if (params.contains("t0")) t0 = params.at("t0").get<double>();
            s.family_ = FamilySpec::integers_punctured(count, t0);
        } else if (fam == "near_pairs")
            s.family_ = FamilySpec::near_pairs(count, params.value("ratio", 0.5));
    }
    return s;
}

Spectrum generate(const FamilySpec& spec) {
    std::vector<double> pts;
    Tail tail = Tail::none();
    std::ostringstream label;
    const int N = spec.count;
    if (N <= 0 && spec.family != FamilySpec::Family::custom)
        throw parameter_error("count must be positive");

    switch (spec.family) {
    case FamilySpec::Family::two_sided_power: {
        if (!(spec.gamma > 0.0)) throw parameter_error("gamma must be positive");
        for (int n = 1; n <= N; ++n) {
            double t = std::pow(double(n), spec.gamma);
            pts.push_back(t);
            pts.push_back(-t);
        }
        if (spec.include_t0) {
            double t0 = spec.t0.value_or(0.5);
            if (t0 == 0.0) throw parameter_error("t0 must be nonzero");
            pts.push_back(t0);
        }
        double rho = 1.0 / spec.gamma;
        tail = Tail::paired_power_tail(rho, 1.0, rho, 1.0);
        label << "two_sided_power(gamma=" << spec.gamma << ")";
        break;
    }
    case FamilySpec::Family::one_sided_power: {
        if (!(spec.gamma > 0.0)) throw parameter_error("gamma must be positive");
        for (int n = 1; n <= N; ++n) pts.push_back(std::pow(double(n), spec.gamma));
        tail = Tail::power_tail(+1, 1.0 / spec.gamma, 1.0);
        label << "one_sided_power(gamma=" << spec.gamma << ")";
        break;
    }
    case FamilySpec::Family::squares: {
        if (spec.n0 < 1) throw parameter_error("n0 must be >= 1");
        for (int n = spec.n0; n < spec.n0 + N; ++n) pts.push_back(double(n) * n);
        tail = Tail::power_tail(+1, 0.5, 1.0);
        label << "squares(n0=" << spec.n0 << ")";
        break;
    }
    case FamilySpec::Family::shifted_progression: {
        if (!(spec.a > 0.0)) throw parameter_error("a must be positive");
        for (int k = 0; k < N; ++k) {
            pts.push_back(spec.a + k);
            pts.push_back(-(spec.a + k));
        }
        tail = Tail::arithmetic_tail(1.0, spec.a);
        label << "shifted_progression(a=" << spec.a << ")";
        break;
    }
    case FamilySpec::Family::livsic: {
        if (spec.c == 0.0) throw parameter_error("c must be nonzero");
        for (int n = -N; n < N; ++n) pts.push_back((n + 0.5) / spec.c);
        tail = Tail::arithmetic_tail(1.0 / std::fabs(spec.c), 0.5 / std::fabs(spec.c));
        label << "livsic(c=" << spec.c << ")";
        break;
    }
    case FamilySpec::Family::integers_punctured: {
        for (int n = 1; n <= N; ++n) {
            pts.push_back(double(n));
            pts.push_back(-double(n));
        }
        if (spec.t0) {
            if (*spec.t0 == 0.0) throw parameter_error("t0 must be nonzero");
            pts.push_back(*spec.t0);
        }
        tail = Tail::arithmetic_tail(1.0, 0.0);
        label << "integers_punctured" << (spec.t0 ? "(+t0)" : "");
        break;
    }
    case FamilySpec::Family::near_pairs: {
        if (!(spec.pair_ratio > 0.0 && spec.pair_ratio < 1.0))
            throw parameter_error("pair_ratio must lie in (0,1)");
        for (int n = 1; n <= N; ++n) {
            for (double base : {double(n), -double(n)}) {
                pts.push_back(base);
                double gap = std::pow(spec.pair_ratio, n);
                // only materialize pair points double precision can represent
                if (base + gap > base) pts.push_back(base + gap);
            }
        }
        // beyond the materialized range each integer carries a merged pair
        tail = Tail::arithmetic_tail(0.5, 0.0);
        label << "near_pairs(q=" << spec.pair_ratio << ")";
        break;
    }
    case FamilySpec::Family::custom: {
        pts = spec.points;
        label << "custom";
        break;
    }
    }

    Spectrum s = Spectrum::from_points(std::move(pts), tail, label.str());
    s.family_ = spec;
    return s;
}

Spectrum make_near_pairs(const Spectrum& base, const std::vector<double>& gaps) {
    if (gaps.size() != base.size())
        throw parameter_error("near pairs: one gap per base point required");
    std::vector<double> pts;
    pts.reserve(2 * base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (!(gaps[i] > 0.0)) throw parameter_error("near pairs: gaps must be positive");
        double t = base.point(i);
        pts.push_back(t);
        if (t + gaps[i] > t) pts.push_back(t + gaps[i]);
    }
    return Spectrum::from_points(std::move(pts), base.tail(),
                                 base.label() + " + near pairs");
}

} // namespace vs
