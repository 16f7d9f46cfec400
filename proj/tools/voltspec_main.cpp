// voltspec: command-line front end for spectrum generation, removability
// diagnosis, perturbation synthesis, model/finite-section verification,
// parameter sweeps and the nu-star construction.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "voltspec/finite_section.hpp"
#include "voltspec/krein.hpp"
#include "voltspec/model.hpp"
#include "voltspec/nustar.hpp"
#include "voltspec/perturbation.hpp"

using namespace vs;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitInconclusive = 3;

bool g_no_meta = false;

void attach_meta(json& j) {
    if (g_no_meta) return;
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["meta"] = {{"tool", "voltspec"}, {"generated", buf}};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw parameter_error("cannot open output file " + path);
    out << content;
    if (!out) throw parameter_error("write failure on " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parameter_error("cannot open input file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string json_with_meta(const std::string& body) {
    json j = json::parse(body);
    attach_meta(j);
    return j.dump(2) + "\n";
}

int threads_cap() {
    if (const char* env = std::getenv("VS_NUM_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

struct SweepRange {
    double lo = 0, hi = 0, step = 0;
};

SweepRange parse_range(const std::string& text) {
    SweepRange r;
    char c1, c2;
    std::istringstream ss(text);
    if (!(ss >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':')
        throw parameter_error("range must be lo:hi:step");
    if (!(r.step > 0.0) || !(r.lo < r.hi)) throw parameter_error("range needs lo < hi, step > 0");
    return r;
}

Spectrum load_spectrum(const std::string& path) { return Spectrum::from_json(read_file(path)); }

GeneratingFunction make_gf(const Spectrum& s, int tail_order, bool closed) {
    ProductPolicy pol;
    pol.tail_order = tail_order;
    auto sp = std::make_shared<Spectrum>(s);
    return closed ? GeneratingFunction::closed(sp, pol) : GeneratingFunction::numeric(sp, pol);
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
    std::string family = "squares";
    double gamma = 2.0, a = 0.5, c = 1.0, ratio = 0.5, t0 = 0.5;
    int n0 = 1, count = 5000;
    bool no_t0 = false;
    bool with_t0 = false;
    std::string custom, label, out;
};

int cmd_spectrum(const SpectrumArgs& args) {
    Spectrum s = [&] {
        if (!args.custom.empty()) {
            std::vector<double> pts;
            std::istringstream ss(args.custom);
            std::string tok;
            while (std::getline(ss, tok, ',')) pts.push_back(std::stod(tok));
            return generate(FamilySpec::custom(pts));
        }
        if (args.family == "two_sided_power")
            return generate(FamilySpec::two_sided_power(args.gamma, args.count, !args.no_t0,
                                                        args.t0));
        if (args.family == "one_sided_power")
            return generate(FamilySpec::one_sided_power(args.gamma, args.count));
        if (args.family == "squares") return generate(FamilySpec::squares(args.n0, args.count));
        if (args.family == "shifted_progression")
            return generate(FamilySpec::shifted_progression(args.a, args.count));
        if (args.family == "livsic") return generate(FamilySpec::livsic(args.c, args.count));
        if (args.family == "integers_punctured")
            return generate(FamilySpec::integers_punctured(
                args.count, args.with_t0 ? std::optional<double>(args.t0) : std::nullopt));
        if (args.family == "near_pairs")
            return generate(FamilySpec::near_pairs(args.count, args.ratio));
        throw parameter_error("unknown family " + args.family);
    }();
    std::string body = s.to_json();
    if (args.out.empty())
        std::cout << json_with_meta(body);
    else
        write_file(args.out, json_with_meta(body));
    return kExitOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
    std::string spectrum, out_report, out_terms;
    int tail_order = 2;
    bool strict = false;
};

int cmd_diagnose(const DiagnoseArgs& args) {
    Spectrum s = load_spectrum(args.spectrum);
    auto g = make_gf(s, args.tail_order, false);
    RemovabilityReport rep = verdict(s, g);
    if (!args.out_terms.empty() && rep.method != VerdictMethod::degenerate) {
        std::size_t interior = std::max<std::size_t>(std::min<std::size_t>(s.size(), 64),
                                                     s.size() / 6);
        write_file(args.out_terms, krein_terms_csv(krein_terms(s, g, interior)));
    }
    std::string body = rep.to_json();
    if (args.out_report.empty())
        std::cout << json_with_meta(body);
    else
        write_file(args.out_report, json_with_meta(body));
    std::cerr << "verdict: " << to_string(rep.verdict) << " (confidence "
              << rep.confidence << ")\n";
    if (rep.verdict == Verdict::Inconclusive && args.strict) return kExitInconclusive;
    return kExitOk;
}

// -------------------------------------------------------------- synthesize

struct SynthesizeArgs {
    std::string spectrum, out;
    std::string masses = "unit";
    std::vector<double> smooth; // alpha1 alpha2 gamma
    bool rescale = false, force = false, closed = false;
    int tail_order = 0;
};

int cmd_synthesize(const SynthesizeArgs& args) {
    Spectrum s = load_spectrum(args.spectrum);
    auto g = make_gf(s, args.tail_order, args.closed);
    PerturbationData p = [&] {
        if (!args.smooth.empty()) {
            if (args.smooth.size() != 3)
                throw parameter_error("--smooth needs alpha1 alpha2 gamma");
            SmoothSpec spec{args.smooth[0], args.smooth[1], args.smooth[2], args.rescale};
            return synthesize_smooth(s, g, spec, args.force);
        }
        MassPolicy mp = args.masses == "abs_c" ? MassPolicy::abs_c : MassPolicy::unit;
        return synthesize(s, g, mp, args.force);
    }();
    std::string body = p.to_json();
    if (args.out.empty())
        std::cout << json_with_meta(body);
    else
        write_file(args.out, json_with_meta(body));
    return kExitOk;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
    std::string pert, mode = "both", rect = "auto";
    int n = 200;
    double window = 30.0;
    int tail_order = 0;
    std::string out_report, out_collapse, out_contour;
};

Rect parse_rect(const std::string& text, const Spectrum& s) {
    if (text == "auto") {
        double r = 0.5 * s.max_abs();
        // snap the vertical edges to internode midpoints
        const auto& pts = s.points();
        auto snap = [&](double x) {
            auto it = std::lower_bound(pts.begin(), pts.end(), x);
            if (it == pts.end() || it == pts.begin()) return x;
            return 0.5 * (*it + *std::prev(it));
        };
        return Rect{snap(-r), snap(r), -r, r};
    }
    SweepRange dummy;
    (void)dummy;
    std::vector<double> v;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != 4) throw parameter_error("--rect needs auto or x0,x1,y0,y1");
    return Rect{v[0], v[1], v[2], v[3]};
}

int cmd_verify(const VerifyArgs& args) {
    PerturbationData p = PerturbationData::from_json(read_file(args.pert));
    json out;
    if (args.mode == "winding" || args.mode == "both") {
        auto g = make_gf(*p.spectrum, args.tail_order, false);
        ModelEvaluator m(p, g);
        Rect rect = parse_rect(args.rect, *p.spectrum);
        std::vector<ContourSample> samples;
        WindingReport rep =
            m.count_zeros(rect, args.out_contour.empty() ? nullptr : &samples);
        if (!args.out_contour.empty())
            write_file(args.out_contour, contour_samples_csv(samples));
        out["winding"] = json::parse(rep.to_json());
        std::cerr << "zeros in window: " << rep.zeros << "\n";
    }
    if (args.mode == "finsec" || args.mode == "both") {
        std::vector<int> ns;
        for (int n = 25; n <= args.n; n *= 2) ns.push_back(n);
        if (ns.empty() || ns.back() != args.n) ns.push_back(args.n);
        auto rows = collapse_profile(p, ns, args.window);
        std::string csv = collapse_csv(rows);
        if (!args.out_collapse.empty()) write_file(args.out_collapse, csv);
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"N", r.n},
                           {"spectral_radius", r.spectral_radius},
                           {"n_zeros_in_window", r.zeros_in_window}});
        out["collapse"] = arr;
        std::cerr << "spectral radius at N=" << rows.back().n << ": "
                  << rows.back().spectral_radius << "\n";
    }
    std::string body = out.dump();
    if (args.out_report.empty())
        std::cout << json_with_meta(body);
    else
        write_file(args.out_report, json_with_meta(body));
    return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
    std::string family = "one_sided_power";
    std::string gamma_range, a_range;
    int count = 5000;
    std::string out;
    bool strict = false;
};

int cmd_sweep(const SweepArgs& args) {
    const bool use_gamma = !args.gamma_range.empty();
    if (use_gamma == !args.a_range.empty())
        throw parameter_error("sweep needs exactly one of --gamma or --a as lo:hi:step");
    SweepRange range = parse_range(use_gamma ? args.gamma_range : args.a_range);

    std::vector<double> params;
    for (double v = range.lo; v <= range.hi + 1e-12; v += range.step) params.push_back(v);

    struct Row {
        double param;
        Verdict verdict = Verdict::Inconclusive;
        double confidence = 0.0;
        double u_minus = NAN, u_plus = NAN;
        std::string error;
    };
    std::vector<Row> rows(params.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= params.size()) return;
            Row& row = rows[i];
            row.param = params[i];
            try {
                FamilySpec spec = [&] {
                    if (args.family == "one_sided_power")
                        return FamilySpec::one_sided_power(row.param, args.count);
                    if (args.family == "two_sided_power")
                        return FamilySpec::two_sided_power(row.param, args.count);
                    if (args.family == "shifted_progression")
                        return FamilySpec::shifted_progression(row.param, args.count);
                    if (args.family == "squares")
                        return FamilySpec::squares(int(row.param), args.count);
                    throw parameter_error("sweep family must be a one-parameter family");
                }();
                RemovabilityReport rep = verdict(generate(spec));
                row.verdict = rep.verdict;
                row.confidence = rep.confidence;
                if (args.family == "one_sided_power" && row.param > 1.0) {
                    auto f = lp_forecast(0.0, 1.0 / row.param, 0.0, 1.0);
                    row.u_minus = f.u_minus;
                    row.u_plus = f.u_plus;
                } else if (args.family == "two_sided_power" && row.param > 1.0) {
                    auto f = lp_forecast(1.0 / row.param, 1.0 / row.param, 1.0, 1.0);
                    row.u_minus = f.u_minus;
                    row.u_plus = f.u_plus;
                }
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    int nthreads = std::min<int>(threads_cap(), int(params.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::string csv = "param,verdict,confidence,u_minus,u_plus\n";
    char buf[160];
    bool any_inconclusive = false;
    for (const auto& row : rows) {
        if (!row.error.empty()) throw numeric_error("sweep failed at param " +
                                                    std::to_string(row.param) + ": " + row.error);
        std::snprintf(buf, sizeof buf, "%.12g,%s,%.4f,%.12g,%.12g\n", row.param,
                      to_string(row.verdict).c_str(), row.confidence, row.u_minus, row.u_plus);
        csv += buf;
        any_inconclusive |= row.verdict == Verdict::Inconclusive;
    }
    if (args.out.empty())
        std::cout << csv;
    else
        write_file(args.out, csv);
    if (any_inconclusive && args.strict) return kExitInconclusive;
    return kExitOk;
}

// ------------------------------------------------------------------ nustar

struct NuStarArgs {
    std::string spectrum, out;
    int steps = 4;
    double r0 = 0.0;
    int tail_order = 2;
    bool closed = false;
};

int cmd_nustar(const NuStarArgs& args) {
    Spectrum s = load_spectrum(args.spectrum);
    auto g = make_gf(s, args.tail_order, args.closed);
    // base weights |c_n| = 1/|A'(t_n)| from the annihilating expansion
    std::vector<double> nu0(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        NodeDeriv d = g.log_deriv_at_node(i);
        nu0[i] = d.log_abs < -700.0 ? HUGE_VAL : std::exp(-d.log_abs);
    }
    NuStarOptions opt;
    opt.r0 = args.r0;
    opt.max_steps = args.steps;
    NuStarRun run(s, g, nu0, opt);
    for (int k = 0; k < args.steps; ++k) run.step();
    std::string body = run.log_json();
    if (args.out.empty())
        std::cout << json_with_meta(body);
    else
        write_file(args.out, json_with_meta(body));
    return kExitOk;
}

// ------------------------------------------------------------------ config

std::vector<std::string> apply_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
    }
    if (config_path.empty()) return args;
    json cfg = json::parse(read_file(config_path));
    // config supplies values only for flags not given explicitly
    auto given = [&](const std::string& key) {
        for (const auto& a : args)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> merged;
    std::size_t insert_at = args.empty() ? 0 : 1;
    merged.insert(merged.end(), args.begin(), args.begin() + insert_at);
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (given(it.key())) continue;
        std::string v;
        if (it.value().is_string())
            v = it.value().get<std::string>();
        else
            v = it.value().dump();
        if (it.value().is_boolean()) {
            if (it.value().get<bool>()) merged.push_back("--" + it.key());
        } else {
            merged.push_back("--" + it.key() + "=" + v);
        }
    }
    merged.insert(merged.end(), args.begin() + insert_at, args.end());
    return merged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral removability toolkit"};
    app.require_subcommand(1);
    app.add_flag("--no-meta", g_no_meta, "suppress the metadata field in JSON outputs");

    SpectrumArgs sa;
    auto* sp = app.add_subcommand("spectrum", "generate a spectrum file");
    sp->add_option("--family", sa.family,
                   "two_sided_power|one_sided_power|squares|shifted_progression|livsic|"
                   "integers_punctured|near_pairs");
    sp->add_option("--gamma", sa.gamma, "power exponent");
    sp->add_option("--a", sa.a, "progression offset");
    sp->add_option("--c", sa.c, "livsic scale");
    sp->add_option("--n0", sa.n0, "squares start index");
    sp->add_option("--t0", sa.t0, "extra point value");
    sp->add_flag("--no-t0", sa.no_t0, "drop the two-sided regularizing point");
    sp->add_flag("--with-t0", sa.with_t0, "insert t0 into integers_punctured");
    sp->add_option("--ratio", sa.ratio, "near-pair gap ratio");
    sp->add_option("--count", sa.count, "materialized points per side");
    sp->add_option("--custom", sa.custom, "comma-separated custom points");
    sp->add_option("--label", sa.label, "label");
    sp->add_option("--out", sa.out, "output path (stdout if absent)");

    DiagnoseArgs da;
    auto* dg = app.add_subcommand("diagnose", "removability verdict for a spectrum file");
    dg->add_option("--spectrum", da.spectrum, "spectrum JSON")->required();
    dg->add_option("--out-report", da.out_report, "verdict JSON path");
    dg->add_option("--out-terms", da.out_terms, "term table CSV path");
    dg->add_option("--tail-order", da.tail_order, "tail correction order");
    dg->add_flag("--strict", da.strict, "exit 3 on Inconclusive");

    SynthesizeArgs ya;
    auto* sy = app.add_subcommand("synthesize", "annihilating perturbation data");
    sy->add_option("--spectrum", ya.spectrum, "spectrum JSON")->required();
    sy->add_option("--masses", ya.masses, "unit|abs_c");
    sy->add_option("--smooth", ya.smooth, "alpha1 alpha2 gamma")->expected(3);
    sy->add_flag("--rescale", ya.rescale, "apply the parity rescaling");
    sy->add_flag("--force", ya.force, "synthesize even when not Removable");
    sy->add_flag("--closed", ya.closed, "use the family closed form");
    sy->add_option("--tail-order", ya.tail_order, "tail correction order");
    sy->add_option("--out", ya.out, "output path");

    VerifyArgs va;
    auto* vf = app.add_subcommand("verify", "winding and finite-section checks");
    vf->add_option("--pert", va.pert, "perturbation JSON")->required();
    vf->add_option("--mode", va.mode, "winding|finsec|both");
    vf->add_option("--N", va.n, "largest section size");
    vf->add_option("--rect", va.rect, "auto or x0,x1,y0,y1");
    vf->add_option("--window", va.window, "collapse display half-width");
    vf->add_option("--tail-order", va.tail_order, "tail correction order");
    vf->add_option("--out-report", va.out_report, "report JSON path");
    vf->add_option("--out-collapse", va.out_collapse, "collapse CSV path");
    vf->add_option("--out-contour", va.out_contour, "contour sample CSV path");

    SweepArgs wa;
    auto* sw = app.add_subcommand("sweep", "verdicts across a parameter grid");
    sw->add_option("--family", wa.family, "family to sweep");
    sw->add_option("--gamma", wa.gamma_range, "lo:hi:step");
    sw->add_option("--a", wa.a_range, "lo:hi:step");
    sw->add_option("--count", wa.count, "materialized points per side");
    sw->add_option("--out", wa.out, "CSV path");
    sw->add_flag("--strict", wa.strict, "exit 3 when any point is Inconclusive");

    NuStarArgs na;
    auto* ns = app.add_subcommand("nustar", "inductive reweighting run");
    ns->add_option("--spectrum", na.spectrum, "spectrum JSON")->required();
    ns->add_option("--steps", na.steps, "number of steps");
    ns->add_option("--r0", na.r0, "constant of the Herglotz sum");
    ns->add_option("--tail-order", na.tail_order, "tail correction order");
    ns->add_flag("--closed", na.closed, "use the family closed form");
    ns->add_option("--out", na.out, "state log JSON path");

    std::vector<std::string> tokens;
    try {
        tokens = apply_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        std::vector<const char*> cargv;
        cargv.push_back(argv[0]);
        for (const auto& t : tokens) cargv.push_back(t.c_str());
        app.parse(int(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sp->parsed()) return cmd_spectrum(sa);
        if (dg->parsed()) return cmd_diagnose(da);
        if (sy->parsed()) return cmd_synthesize(ya);
        if (vf->parsed()) return cmd_verify(va);
        if (sw->parsed()) return cmd_sweep(wa);
        if (ns->parsed()) return cmd_nustar(na);
    } catch (const parameter_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const range_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const membership_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
