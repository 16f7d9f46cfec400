#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voltspec/errors.hpp"

namespace vs {

// Describes |t_n| beyond the materialized range.
struct Tail {
    enum class Kind { none, power, paired_power, arithmetic };

    Kind kind = Kind::none;

    // power: one-sided counting law n(r) ~ density * r^rho on `side` (+1 / -1).
    int side = +1;
    double rho = 0.0;
    double density = 0.0;

    // paired_power: independent laws on each side.
    double rho_minus = 0.0, density_minus = 0.0;
    double rho_plus = 0.0, density_plus = 0.0;

    // arithmetic: |t| continues as offset + spacing * j, symmetric about 0.
    double spacing = 0.0;
    double offset = 0.0;

    static Tail none() { return Tail{}; }
    static Tail power_tail(int side, double rho, double density);
    static Tail paired_power_tail(double rho_m, double d_m, double rho_p, double d_p);
    static Tail arithmetic_tail(double spacing, double offset);

    // A tail is symmetric when the unmaterialized parts contribute equal mass
    // at +t and -t (odd tail sums vanish).
    bool symmetric() const;
};

// Parametric spectrum families.
struct FamilySpec {
    enum class Family {
        two_sided_power,
        one_sided_power,
        squares,
        shifted_progression,
        livsic,
        integers_punctured,
        near_pairs,
        custom
    };

    Family family = Family::custom;
    int count = 5000; // materialized points per side

    double gamma = 1.0;           // power families
    int n0 = 1;                   // squares start index
    double a = 0.5;               // shifted progression offset
    double c = 1.0;               // livsic scale
    std::optional<double> t0;     // extra point (integers_punctured; two_sided_power)
    bool include_t0 = true;       // two_sided_power regularizing point toggle
    double pair_ratio = 0.5;      // near_pairs gap law delta_n = pair_ratio^|n|
    std::vector<double> points;   // custom

    static FamilySpec two_sided_power(double gamma, int count, bool include_t0 = true,
                                      double t0 = 0.5);
    static FamilySpec one_sided_power(double gamma, int count);
    static FamilySpec squares(int n0, int count);
    static FamilySpec shifted_progression(double a, int count);
    static FamilySpec livsic(double c, int count);
    static FamilySpec integers_punctured(int count, std::optional<double> t0 = std::nullopt);
    static FamilySpec near_pairs(int count, double ratio = 0.5);
    static FamilySpec custom(std::vector<double> points);
};

// Immutable, sorted, nonzero, pairwise distinct real spectrum with a tail
// descriptor. Safe for unrestricted concurrent reads.
class Spectrum {
public:
    static Spectrum from_points(std::vector<double> points, Tail tail = Tail::none(),
                                std::string label = {});

    std::size_t size() const { return points_.size(); }
    double point(std::size_t i) const { return points_.at(i); }
    const std::vector<double>& points() const { return points_; }
    const Tail& tail() const { return tail_; }
    const std::string& label() const { return label_; }

    // Positions sorted by (|t|, t); this is the v.p. multiplication order.
    const std::vector<std::size_t>& abs_order() const { return abs_order_; }
    double max_abs() const;

    // #{ t_n in [0, r] } over materialized points. r must not exceed max|t_n|.
    int counting_function(double r) const;

    // s_n = 1/t_n in the same (ascending-t) order.
    std::vector<double> reciprocal_view() const;

    // min over consecutive points of gap / max(1, |t|).
    double min_relative_gap() const;

    // Exact multiset symmetry t <-> -t.
    bool is_symmetric() const;

    std::string to_json(int indent = -1) const;
    static Spectrum from_json(const std::string& text);

    // Provenance of generated spectra; nullopt for hand-built ones.
    const std::optional<FamilySpec>& family() const { return family_; }

private:
    Spectrum() = default;

    std::vector<double> points_;
    std::vector<std::size_t> abs_order_;
    Tail tail_;
    std::string label_;
    std::optional<FamilySpec> family_;

    friend Spectrum generate(const FamilySpec& spec);
};

// Materialize a family. Deterministic: equal specs give identical spectra.
Spectrum generate(const FamilySpec& spec);

// Near-pair spectrum over an explicit base with explicit gaps.
Spectrum make_near_pairs(const Spectrum& base, const std::vector<double>& gaps);

} // namespace vs
