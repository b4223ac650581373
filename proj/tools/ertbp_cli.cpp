// ertbp: command-line front end. Every run writes its outputs and a manifest.json
// into the output directory (--out, default ertbp_out).
//
//   ertbp <command> [options] [--out DIR] [--format csv|json]
//   ertbp --config run.json [<command>] [options]
//
// Exit status: 0 success, 2 accuracy or numerical failure (including a failed
// audit or verification), 3 invalid input, 4 I/O error.

#include <CLI11.hpp>

#include <boost/version.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <ertbp/diffusion.hpp>
#include <ertbp/errors.hpp>
#include <ertbp/kepler.hpp>
#include <ertbp/melnikov/asymptotic.hpp>
#include <ertbp/melnikov/bounds.hpp>
#include <ertbp/melnikov/contour.hpp>
#include <ertbp/melnikov/direct.hpp>
#include <ertbp/melnikov/harmonics.hpp>
#include <ertbp/scattering.hpp>
#include <ertbp/version.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ertbp;
using scattering::Sign;

namespace {

constexpr int kAccuracy = 2, kDomain = 3, kIo = 4;

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

// two CSV fields
std::string num(const ScaledReal& v) { return num(v.mantissa()) + "," + num(v.log_factor()); }

json to_j(const ScaledReal& v) { return {{"mantissa", v.mantissa()}, {"log_factor", v.log_factor()}}; }

// A plain double when it fits, mantissa*exp(log_factor) otherwise.
std::string show(const ScaledReal& v) {
    const double la = v.log_abs();
    if (v.is_zero() || (la > -700 && la < 700)) return num(v.to_double());
    return num(v.mantissa()) + "*exp(" + num(v.log_factor()) + ")";
}

std::pair<double, double> parse_range(const std::string& s, const std::string& what) {
    const auto c = s.find(':');
    double a = 0, b = 0;
    try {
        std::size_t ua = 0, ub = 0;
        if (c == std::string::npos) throw std::invalid_argument("");
        const std::string sa = s.substr(0, c), sb = s.substr(c + 1);
        a = std::stod(sa, &ua);
        b = std::stod(sb, &ub);
        if (ua != sa.size() || ub != sb.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw DomainError(what + ": expected lo:hi, got '" + s + "'");
    }
    if (!(a < b)) throw DomainError(what + ": need lo < hi");
    return {a, b};
}

class Run {
public:
    std::string command;
    std::string out_dir = "ertbp_out";
    std::string format = "csv";
    json params = json::object();
    json tolerances = json::object();
    json summary = json::object();
    std::vector<std::string> outputs;

    bool csv() const { return format == "csv"; }

    void emit(const std::string& name, const std::function<void(std::ostream&)>& body) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream f(path);
        if (!f) throw IoError("cannot open " + path.string() + " for writing");
        body(f);
        f.flush();
        if (!f) throw IoError("write to " + path.string() + " failed");
        outputs.push_back(name);
    }
    void emit_json(const std::string& name, const json& j) {
        emit(name, [&](std::ostream& os) { os << j.dump(1) << '\n'; });
    }

    json manifest(int status, const std::string& error) const {
        const char* cache = std::getenv("ERTBP_CACHE_DIR");
        json m;
        m["schema"] = "ertbp-manifest/1";
        m["command"] = command;
        m["params"] = params;
        m["output_dir"] = out_dir;
        m["format"] = format;
        m["versions"] = {{"ertbp", ertbp::version},
                         {"compiler", compiler()},
                         {"cplusplus", static_cast<long>(__cplusplus)},
                         {"boost", BOOST_LIB_VERSION},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                         {"cli11", CLI11_VERSION}};
        m["tolerances"] = tolerances;
        m["environment"] = {{"ERTBP_CACHE_DIR", cache && *cache ? json(cache) : json(nullptr)}};
        m["outputs"] = outputs;
        m["summary"] = summary;
        m["exit_status"] = status;
        if (!error.empty()) m["error"] = error;
        return m;
    }

private:
    static std::string compiler() {
#if defined(__clang__)
        return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
        return std::string("gcc ") + __VERSION__;
#else
        return "unknown";
#endif
    }
};

melnikov::SeriesOptions series_options(int l_max) {
    melnikov::SeriesOptions o;
    o.l_max = l_max;
    return o;
}

void record_series(Run& run, const melnikov::SeriesOptions& o) {
    run.tolerances["series_l_max"] = o.l_max;
    run.tolerances["series_tol"] = o.tol;
    run.tolerances["contour_rel_tol"] = o.contour.rel_tol;
}

void print_warnings(const melnikov::HarmonicTable& t) {
    for (const auto& w : t.warnings()) std::cerr << "warning: G=" << t.meta().G << ": " << w << '\n';
}

// ---------------------------------------------------------------------------
// levelsets grid and gnuplot scripts

void write_levelsets(Run& run, const scattering::TableProvider& prov, double Ga, double Gb, int alpha_nodes, int G_nodes) {
    if (alpha_nodes < 2 || G_nodes < 2) throw DomainError("levelsets: need at least 2 nodes in each direction");
    const double two_pi = 2.0 * std::numbers::pi;
    std::size_t positive = 0, negative = 0;
    run.emit("levelsets.csv", [&](std::ostream& os) {
        os << "alpha,G,Lplus_mantissa,Lplus_log_factor,Lminus_mantissa,Lminus_log_factor,bracket_mantissa,"
              "bracket_log_factor,d\n";
        for (int j = 0; j < G_nodes; ++j) {
            const double G = j + 1 == G_nodes ? Gb : Ga + (Gb - Ga) * j / (G_nodes - 1);
            const auto t = prov.table(G), dt = prov.derivative(G);
            // one block per G, blank-line separated, as gnuplot expects for grid data
            if (j > 0) os << '\n';
            for (int i = 0; i < alpha_nodes; ++i) {
                const double alpha = two_pi * i / (alpha_nodes - 1);
                const auto cp = scattering::critical_points(alpha, t);
                const auto P = scattering::reduced_at(cp.s_plus, alpha, t, dt);
                const auto M = scattering::reduced_at(cp.s_minus, alpha, t, dt);
                const auto ap = scattering::amplitude_phase(alpha, t);
                const ScaledReal br = scattering::bracket(P, M);
                (br.sign() > 0 ? positive : negative) += br.is_zero() ? 0 : 1;
                os << num(alpha) << ',' << num(G) << ',' << num(P.value()) << ',' << num(M.value()) << ',' << num(br) << ','
                   << num(scattering::d_function(alpha, G, prov.eccentricity(), ap.B, ap.p)) << '\n';
            }
        }
    });
    run.summary["levelsets"] = {{"G_range", {Ga, Gb}},
                                {"alpha_nodes", alpha_nodes},
                                {"G_nodes", G_nodes},
                                {"bracket_positive", positive},
                                {"bracket_negative", negative}};
}

// Contours are extracted to comma-separated tables first so each family keeps its
// own colour.
std::string contour_block() {
    return "set datafile separator ','\n"
           "set view map\n"
           "unset surface\n"
           "set contour base\n"
           "set cntrparam levels auto 16\n"
           "set table 'levelsets_plus.tab' separator comma\n"
           "splot 'levelsets.csv' skip 1 using 1:2:($3*exp($4)) with lines\n"
           "unset table\n"
           "set table 'levelsets_minus.tab' separator comma\n"
           "splot 'levelsets.csv' skip 1 using 1:2:($5*exp($6)) with lines\n"
           "unset table\n"
           "set cntrparam levels discrete 0\n"
           "set table 'levelsets_d0.tab' separator comma\n"
           "splot 'levelsets.csv' skip 1 using 1:2:9 with lines\n"
           "unset table\n"
           "unset contour\n";
}

void write_levelsets_script(Run& run, double Ga, double Gb) {
    run.emit("levelsets.gp", [&](std::ostream& os) {
        os << "# Level sets of L*_+ (blue) and L*_- (red), and d = 0 (green).\n"
              "# Run from this directory: gnuplot levelsets.gp\n"
           << contour_block()
           << "set terminal svg size 900,700\n"
              "set output 'levelsets.svg'\n"
              "set xlabel 'alpha'\n"
              "set ylabel 'G'\n"
              "set xrange [0:2*pi]\n"
              "set yrange ["
           << num(Ga) << ':' << num(Gb)
           << "]\n"
              "plot 'levelsets_plus.tab' with lines lc rgb 'blue' title 'L*_+', \\\n"
              "     'levelsets_minus.tab' with lines lc rgb 'red' title 'L*_-', \\\n"
              "     'levelsets_d0.tab' with lines lc rgb 'forest-green' lw 2 title 'd = 0'\n";
    });
}

void write_itinerary_script(Run& run, double Ga, double Gb, bool overlay) {
    run.emit("itinerary.gp", [&](std::ostream& os) {
        os << "# Itinerary legs on level curves of L*_+ (blue) and L*_- (red); switches as points.\n"
              "# Run from this directory: gnuplot itinerary.gp\n";
        if (overlay) os << contour_block();
        os << "set terminal svg size 900,700\n"
              "set output 'itinerary.svg'\n"
              "set datafile separator ','\n"
              "set xlabel 'alpha'\n"
              "set ylabel 'G'\n"
              "wrap(a) = a - 2*pi*floor(a/(2*pi))\n"
              "set xrange [0:2*pi]\n"
              "set yrange ["
           << num(Ga) << ':' << num(Gb) << "]\n";
        os << "plot ";
        if (overlay)
            os << "'levelsets_plus.tab' using 1:2 with lines lc rgb '#9999ff' title 'L*_+ levels', \\\n"
                  "     'levelsets_minus.tab' using 1:2 with lines lc rgb '#ff9999' title 'L*_- levels', \\\n     ";
        // alpha grows without bound along the legs, so points are plotted modulo 2 pi
        os << "'itinerary.csv' skip 1 using (wrap($3)):(strcol(2) eq '+' ? $4 : NaN) with points pt 7 ps 0.3 lc rgb 'blue' title '+ legs', \\\n"
              "     'itinerary.csv' skip 1 using (wrap($3)):(strcol(2) eq '-' ? $4 : NaN) with points pt 7 ps 0.3 lc rgb 'red' title '- legs', \\\n"
              "     'switches.csv' skip 1 using (wrap($1)):2 with points pt 6 ps 0.8 lc rgb 'forest-green' title 'switches'\n";
    });
}

// ---------------------------------------------------------------------------

struct Command {
    CLI::App* app = nullptr;
    std::function<int(Run&)> run;
};

void add_common(CLI::App* sub, Run& run) {
    sub->add_option("--out", run.out_dir, "output directory");
    sub->add_option("--format", run.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

Command add_coeffs(CLI::App& app, Run& run) {
    struct P {
        int q = 0, n = 0, m = 0;
        double e = 0, tol = 1e-14;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("coeffs", "Fourier coefficient c_q^{n,m}(e) of (r/a)^n e^{imf} in the mean anomaly");
    sub->add_option("--q", p->q)->required();
    sub->add_option("--n", p->n)->required();
    sub->add_option("--m", p->m)->required();
    sub->add_option("--e", p->e, "eccentricity")->required();
    sub->add_option("--tol", p->tol, "quadrature tolerance");
    add_common(sub, run);
    return {sub, [p](Run& r) {
                const double c = kepler::fourier_c(p->q, p->n, p->m, p->e, p->tol);
                const double b = kepler::bound_c(p->q, p->n, p->m, p->e);
                r.tolerances["coefficient_tol"] = p->tol;
                std::cout << num(c) << '\n';
                if (r.csv())
                    r.emit("coeffs.csv", [&](std::ostream& os) {
                        os << "q,n,m,e,value,bound\n"
                           << p->q << ',' << p->n << ',' << p->m << ',' << num(p->e) << ',' << num(c) << ',' << num(b) << '\n';
                    });
                else
                    r.emit_json("coeffs.json", {{"q", p->q}, {"n", p->n}, {"m", p->m}, {"e", p->e}, {"value", c}, {"bound", b}});
                r.summary["value"] = c;
                return 0;
            }};
}

Command add_nintegral(CLI::App& app, Run& run) {
    struct P {
        int q = 0, m = 0, n = 0;
        double G = 0, epsilon = 0;
        bool asymptotic = false;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("nintegral", "N(q,m,n) = integral of e^{iq(tau+tau^3/3)G^3/2} / ((tau-i)^2m (tau+i)^2n)");
    sub->add_option("--q", p->q)->required();
    sub->add_option("--m", p->m)->required();
    sub->add_option("--n", p->n)->required();
    sub->add_option("--G", p->G, "angular momentum")->required();
    sub->add_option("--epsilon", p->epsilon, "arc radius of the contour; 0 picks it from (q, m, n, G)");
    sub->add_flag("--asymptotic", p->asymptotic, "also evaluate the large-G form and its error bound (q >= 1)");
    add_common(sub, run);
    return {sub, [p](Run& r) {
                melnikov::ContourSpec spec;
                spec.epsilon = p->epsilon;
                const auto res = melnikov::N_eval_detailed(p->q, p->m, p->n, p->G, spec);
                const double radius = p->q == 0 ? 0.0 : spec.eps_for(p->G, p->q, p->m, p->n);
                r.tolerances["contour_rel_tol"] = spec.rel_tol;
                std::optional<melnikov::NAsymptotic> asym;
                if (p->asymptotic) asym = melnikov::N_asymptotic_detailed(p->q, p->m, p->n, p->G);
                std::cout << show(res.value) << '\n';
                if (r.csv()) {
                    r.emit("nintegral.csv", [&](std::ostream& os) {
                        os << "q,m,n,G,mantissa,log_factor,err_rel,imag_rel,radius";
                        if (asym) os << ",asymptotic_mantissa,asymptotic_log_factor,asymptotic_bound_mantissa,asymptotic_bound_log_factor";
                        os << '\n'
                           << p->q << ',' << p->m << ',' << p->n << ',' << num(p->G) << ',' << num(res.value) << ','
                           << num(res.err_rel) << ',' << num(res.imag_rel) << ',' << num(radius);
                        if (asym) os << ',' << num(asym->value) << ',' << num(asym->error_bound);
                        os << '\n';
                    });
                } else {
                    json j = {{"q", p->q}, {"m", p->m}, {"n", p->n}, {"G", p->G}, {"value", to_j(res.value)},
                              {"err_rel", res.err_rel}, {"imag_rel", res.imag_rel}, {"radius", radius}};
                    if (asym) j["asymptotic"] = {{"value", to_j(asym->value)}, {"error_bound", to_j(asym->error_bound)}};
                    r.emit_json("nintegral.json", j);
                }
                r.summary["value"] = to_j(res.value);
                return 0;
            }};
}

Command add_melnikov(CLI::App& app, Run& run) {
    struct P {
        double alpha = 0, G = 0, s = 0, e = 0, tol = 1e-10;
        std::string method = "direct";
        int q_max = 6, k_max = 12, l_max = 40;
        bool d_alpha = false;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("melnikov", "Melnikov potential L(alpha, G, s) by quadrature or from the harmonic series");
    sub->add_option("--alpha", p->alpha)->required();
    sub->add_option("--G", p->G)->required();
    sub->add_option("--s", p->s)->required();
    sub->add_option("--e", p->e)->required();
    sub->add_option("--method", p->method, "direct or series")->check(CLI::IsMember({"direct", "series"}));
    sub->add_option("--tol", p->tol, "absolute quadrature tolerance (direct)");
    sub->add_option("--q-max", p->q_max, "series rows (series)");
    sub->add_option("--k-max", p->k_max, "series columns (series)");
    sub->add_option("--l-max", p->l_max, "terms of each L_{q,k} sum (series)");
    sub->add_flag("--d-alpha", p->d_alpha, "evaluate dL/dalpha instead of L");
    add_common(sub, run);
    return {sub, [p](Run& r) {
                const char* quantity = p->d_alpha ? "dL/dalpha" : "L";
                std::string head = "alpha,G,s,e,method,quantity,mantissa,log_factor";
                ScaledReal value;
                json extra = json::object();
                if (p->method == "direct") {
                    melnikov::DirectOptions o;
                    o.tol = p->tol;
                    o.d_alpha = p->d_alpha;
                    r.tolerances["direct_tol"] = o.tol;
                    const auto res = melnikov::melnikov_direct_detailed(p->alpha, p->G, p->s, p->e, o);
                    value = ScaledReal(res.value);
                    extra["error"] = res.error;
                } else {
                    const auto opt = series_options(p->l_max);
                    record_series(r, opt);
                    const auto t = melnikov::cached_table(p->G, p->e, p->q_max, p->k_max, opt, melnikov::default_cache_dir());
                    print_warnings(t);
                    const auto v = melnikov::series_eval(t, p->alpha, p->s);
                    value = p->d_alpha ? v.d_alpha : v.value;
                    extra["warnings"] = t.warnings().size();
                }
                std::cout << show(value) << '\n';
                if (r.csv())
                    r.emit("melnikov.csv", [&](std::ostream& os) {
                        os << head << (extra.contains("error") ? ",error" : "") << '\n'
                           << num(p->alpha) << ',' << num(p->G) << ',' << num(p->s) << ',' << num(p->e) << ',' << p->method << ','
                           << quantity << ',' << num(value);
                        if (extra.contains("error")) os << ',' << num(extra["error"].get<double>());
                        os << '\n';
                    });
                else {
                    json j = {{"alpha", p->alpha}, {"G", p->G}, {"s", p->s}, {"e", p->e}, {"method", p->method},
                              {"quantity", quantity}, {"value", to_j(value)}};
                    j.update(extra);
                    r.emit_json("melnikov.json", j);
                }
                r.summary["value"] = to_j(value);
                return 0;
            }};
}

Command add_harmonics(CLI::App& app, Run& run) {
    struct P {
        double G = 0, e = 0;
        int q_max = 2, k_max = 6, l_max = 40;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("harmonics", "table of L_{q,k}, L = sum L_{q,k} e^{i(qs + k alpha)}");
    sub->add_option("--G", p->G)->required();
    sub->add_option("--e", p->e)->required();
    sub->add_option("--q-max", p->q_max);
    sub->add_option("--k-max", p->k_max);
    sub->add_option("--l-max", p->l_max, "terms of each L_{q,k} sum");
    add_common(sub, run);
    return {sub, [p](Run& r) {
                const auto opt = series_options(p->l_max);
                record_series(r, opt);
                const auto t = melnikov::cached_table(p->G, p->e, p->q_max, p->k_max, opt, melnikov::default_cache_dir());
                print_warnings(t);
                if (r.csv())
                    r.emit("harmonics.csv", [&](std::ostream& os) {
                        os << "q,k,mantissa,log_factor\n";
                        for (const auto& [key, v] : t.entries()) os << key.first << ',' << key.second << ',' << num(v) << '\n';
                    });
                else
                    r.emit_json("harmonics.json", t.to_json());
                r.summary["entries"] = t.entries().size();
                r.summary["warnings"] = t.warnings();
                std::cout << t.entries().size() << " harmonics written\n";
                return 0;
            }};
}

struct ProviderOptions {
    int nodes = 16, q_max = 2, k_max = 6, l_max = 40;

    void add(CLI::App* sub) {
        sub->add_option("--cheb-nodes", nodes, "Chebyshev nodes in G for the table interpolant");
        sub->add_option("--q-max", q_max);
        sub->add_option("--k-max", k_max);
        sub->add_option("--l-max", l_max);
    }
    scattering::ChebyshevProvider build(Run& r, double e, double Ga, double Gb) const {
        const auto opt = series_options(l_max);
        record_series(r, opt);
        r.tolerances["chebyshev_nodes"] = nodes;
        const auto dir = melnikov::default_cache_dir();
        return scattering::ChebyshevProvider(e, Ga, Gb, nodes, [&](double G) {
            auto t = melnikov::cached_table(G, e, q_max, k_max, opt, dir);
            print_warnings(t);
            return t;
        });
    }
};

Command add_levelsets(CLI::App& app, Run& run) {
    struct P {
        std::string G_range;
        double e = 0;
        int alpha_nodes = 73, G_nodes = 61;
        ProviderOptions prov;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("levelsets", "grid of L*_+, L*_-, their bracket and d over (alpha, G), with a gnuplot script");
    sub->add_option("--G-range", p->G_range, "lo:hi")->required();
    sub->add_option("--e", p->e)->required();
    sub->add_option("--alpha-nodes", p->alpha_nodes, "grid points over [0, 2 pi]");
    sub->add_option("--G-nodes", p->G_nodes);
    p->prov.add(sub);
    add_common(sub, run);
    return {sub, [p](Run& r) {
                const auto [Ga, Gb] = parse_range(p->G_range, "--G-range");
                const auto prov = p->prov.build(r, p->e, Ga, Gb);
                write_levelsets(r, prov, Ga, Gb, p->alpha_nodes, p->G_nodes);
                write_levelsets_script(r, Ga, Gb);
                std::cout << "levelsets.csv and levelsets.gp written to " << r.out_dir << '\n';
                return 0;
            }};
}

Command add_itinerary(CLI::App& app, Run& run) {
    struct P {
        double start = 0, e = 0, verify_tol = 1e-6;
        std::vector<double> targets;
        std::string region;
        std::optional<double> mu;
        bool with_levelsets = false;
        diffusion::PlannerConfig cfg;
        ProviderOptions prov;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("itinerary", "plan a pseudo-orbit through target values of G and verify it");
    sub->add_option("--start", p->start)->required();
    sub->add_option("--targets", p->targets)->required()->delimiter(',');
    sub->add_option("--e", p->e)->required();
    sub->add_option("--region", p->region, "lo:hi; default 32:1/(8e)");
    sub->add_option("--mu", p->mu, "mass ratio checked against mu*");
    sub->add_option("--verify-tol", p->verify_tol, "relative level drift accepted by verification");
    sub->add_option("--alpha0", p->cfg.alpha0, "starting angle");
    sub->add_option("--step", p->cfg.step, "continuation arc length per step");
    sub->add_option("--hysteresis", p->cfg.hysteresis, "relative advantage required to switch map");
    sub->add_option("--angle-margin", p->cfg.angle_margin, "distance of switches from alpha = 0, pi");
    sub->add_option("--d-margin", p->cfg.d_margin, "distance of switches from d = 0");
    sub->add_flag("--allow-outside-theorem", p->cfg.allow_outside_theorem, "permit regions below G = 32");
    sub->add_flag("--with-levelsets", p->with_levelsets, "also write the level-set grid and overlay it in the plot");
    p->prov.add(sub);
    add_common(sub, run);
    return {sub, [p](Run& r) {
                diffusion::Region region = diffusion::Region::for_eccentricity(p->e);
                if (!p->region.empty()) {
                    const auto [a, b] = parse_range(p->region, "--region");
                    region = diffusion::Region{a, b, p->e};
                }
                if (!(region.G_max < 1e6)) throw DomainError("itinerary: region needs a finite upper end (e = 0?)");
                r.tolerances["verify_tol"] = p->verify_tol;
                r.tolerances["trace_tol"] = p->cfg.tracing.tol;
                const auto prov = p->prov.build(r, p->e, region.G_min, region.G_max);
                const auto it = diffusion::plan_itinerary(p->start, p->targets, region, prov, p->cfg);
                const auto rep = diffusion::verify_itinerary(it, prov, region, p->verify_tol, p->mu, p->cfg);
                json report = {{"pass", rep.pass},
                               {"max_drift", rep.max_drift},
                               {"worst_leg", rep.worst_leg},
                               {"region_violation", rep.region_violation},
                               {"mu_below_threshold", rep.mu_below_threshold},
                               {"failures", rep.failures}};
                r.emit("itinerary.csv", [&](std::ostream& os) { diffusion::write_csv(os, it); });
                r.emit("switches.csv", [&](std::ostream& os) {
                    os << "alpha,G,from,to,margin_mantissa,margin_log_factor,d\n";
                    for (const auto& s : it.switches)
                        os << num(s.alpha) << ',' << num(s.G) << ',' << scattering::sign_name(s.from) << ','
                           << scattering::sign_name(s.to) << ',' << num(s.margin) << ',' << num(s.d_value) << '\n';
                });
                if (!r.csv()) {
                    json j = diffusion::to_json(it);
                    j["verification"] = report;
                    r.emit_json("itinerary.json", j);
                }
                if (p->with_levelsets) write_levelsets(r, prov, region.G_min, region.G_max, 73, 61);
                write_itinerary_script(r, region.G_min, region.G_max, p->with_levelsets);
                r.summary["legs"] = it.legs.size();
                r.summary["switches"] = it.switches.size();
                r.summary["verification"] = report;
                std::cout << it.legs.size() << " legs, " << it.switches.size() << " switches, verification "
                          << (rep.pass ? "passed" : "FAILED") << " (max drift " << num(rep.max_drift) << ")\n";
                for (const auto& f : rep.failures) std::cerr << "verification: " << f << '\n';
                return rep.pass ? 0 : kAccuracy;
            }};
}

Command add_ode_verify(CLI::App& app, Run& run) {
    struct P {
        double alpha = 1.0, G = 1.7, s = 0.0, e = 0.05;
        std::vector<double> mus{1e-4, 1e-5};
        diffusion::ExperimentConfig cfg;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("ode-verify", "change of G across one excursion by the full ODE against dL/dalpha");
    sub->add_option("--alpha", p->alpha);
    sub->add_option("--G", p->G);
    sub->add_option("--s", p->s);
    sub->add_option("--e", p->e);
    sub->add_option("--mu", p->mus, "decreasing mass ratios")->delimiter(',');
    sub->add_option("--x-cut", p->cfg.x_cut, "integrate until x drops below this");
    sub->add_option("--rtol", p->cfg.rtol);
    sub->add_option("--atol", p->cfg.atol);
    sub->add_option("--reference-tol", p->cfg.reference_tol, "quadrature tolerance of dL/dalpha");
    add_common(sub, run);
    return {sub, [p](Run& r) {
                r.tolerances["rtol"] = p->cfg.rtol;
                r.tolerances["atol"] = p->cfg.atol;
                r.tolerances["reference_tol"] = p->cfg.reference_tol;
                r.tolerances["settle_tol"] = p->cfg.settle_tol;
                r.tolerances["x_cut"] = p->cfg.x_cut;
                const auto res = diffusion::melnikov_ode_experiment(p->alpha, p->G, p->s, p->e, p->mus, p->cfg);
                if (r.csv())
                    r.emit("ode_verify.csv", [&](std::ostream& os) {
                        os << "mu,dG,dG_over_mu,dL_dalpha,residual,forward_limit,forward_exponent,backward_limit,"
                              "backward_exponent\n";
                        for (const auto& row : res.rows)
                            os << num(row.mu) << ',' << num(row.dG) << ',' << num(row.dG_over_mu) << ',' << num(res.dL_dalpha)
                               << ',' << num(row.residual) << ',' << num(row.forward.limit) << ',' << num(row.forward.exponent)
                               << ',' << num(row.backward.limit) << ',' << num(row.backward.exponent) << '\n';
                    });
                else
                    r.emit_json("ode_verify.json", diffusion::to_json(res));
                r.summary["dL_dalpha"] = res.dL_dalpha;
                r.summary["residual_ratios"] = res.residual_ratios;
                r.summary["order"] = res.order;
                std::cout << "dL/dalpha = " << num(res.dL_dalpha) << '\n';
                for (const auto& row : res.rows)
                    std::cout << "mu = " << num(row.mu) << "  dG/mu = " << num(row.dG_over_mu) << "  residual = " << num(row.residual)
                              << '\n';
                return 0;
            }};
}

Command add_bounds_audit(CLI::App& app, Run& run) {
    struct P {
        std::vector<double> Gs{32.0, 64.0};
        double e = 1.0 / 512;
        int q_max = 2, k_max = 4, mn_max = 4, l_max = 40;
    };
    auto p = std::make_shared<P>();
    auto* sub = app.add_subcommand("bounds-audit", "check computed harmonics and N integrals against their explicit bounds");
    sub->add_option("--G", p->Gs, "angular momenta")->delimiter(',');
    sub->add_option("--e", p->e);
    sub->add_option("--q-max", p->q_max, "audit rows q = 1..q-max");
    sub->add_option("--k-max", p->k_max, "audit |k| <= k-max");
    sub->add_option("--mn-max", p->mn_max, "audit N(q,m,n) for m, n <= mn-max");
    sub->add_option("--l-max", p->l_max);
    add_common(sub, run);
    return {sub, [p](Run& r) {
                struct Row {
                    std::string kind;
                    double G;
                    int q;
                    std::optional<int> k, m, n;
                    ScaledReal value, bound;
                    bool holds;
                };
                std::vector<Row> rows;
                const auto opt = series_options(p->l_max);
                record_series(r, opt);
                for (double G : p->Gs) {
                    // rows beyond q-max feed the tail estimate
                    const auto t = melnikov::cached_table(G, p->e, std::max(p->q_max, 3), p->k_max + 2, opt,
                                                          melnikov::default_cache_dir());
                    print_warnings(t);
                    for (int q = 1; q <= p->q_max; ++q)
                        for (int k = -p->k_max; k <= p->k_max; ++k) {
                            const ScaledReal v = t.at(q, k).abs(), b = melnikov::bound_B(q, k, G, p->e);
                            rows.push_back({"L", G, q, k, {}, {}, v, b, v <= b});
                        }
                    for (int q = 1; q <= p->q_max; ++q)
                        for (int m = 0; m <= p->mn_max; ++m)
                            for (int n = 0; n <= p->mn_max; ++n) {
                                if (m + n == 0) continue;
                                const ScaledReal v = melnikov::N_eval(q, m, n, G).abs(), b = melnikov::bound_N(q, m, n, G);
                                rows.push_back({"N", G, q, {}, m, n, v, b, v <= b});
                            }
                    const ScaledReal tail = melnikov::table_tail(t), tb = melnikov::bound_tail(G);
                    rows.push_back({"tail", G, 2, {}, {}, {}, tail, tb, tail <= tb});
                    // relative deviation of the exact harmonics from the leading terms
                    const auto fh = melnikov::four_harmonics(G, p->e);
                    if (fh.in_regime) {
                        auto env = [&](int q, int k, const ScaledReal& lead, double E) {
                            if (lead.is_zero()) return;
                            const double dev = std::fabs((t.at(q, k) / lead).to_double() - 1.0);
                            rows.push_back({"envelope", G, q, k, {}, {}, ScaledReal(dev), ScaledReal(E), dev <= E});
                        };
                        env(0, 0, fh.L00, fh.E00);
                        env(0, 1, fh.L01, fh.E01);
                        env(1, -1, fh.L1m1, fh.E1m1);
                        env(1, -2, fh.L1m2, fh.E1m2);
                    }
                }
                std::size_t violations = 0;
                for (const auto& row : rows) violations += row.holds ? 0 : 1;
                auto opt_str = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
                if (r.csv())
                    r.emit("bounds_audit.csv", [&](std::ostream& os) {
                        os << "kind,G,q,k,m,n,value_mantissa,value_log_factor,bound_mantissa,bound_log_factor,holds\n";
                        for (const auto& row : rows)
                            os << row.kind << ',' << num(row.G) << ',' << row.q << ',' << opt_str(row.k) << ',' << opt_str(row.m)
                               << ',' << opt_str(row.n) << ',' << num(row.value) << ',' << num(row.bound) << ','
                               << (row.holds ? 1 : 0) << '\n';
                    });
                else {
                    json j = json::array();
                    for (const auto& row : rows) {
                        json e = {{"kind", row.kind}, {"G", row.G}, {"q", row.q}, {"value", to_j(row.value)},
                                  {"bound", to_j(row.bound)}, {"holds", row.holds}};
                        if (row.k) e["k"] = *row.k;
                        if (row.m) e["m"] = *row.m;
                        if (row.n) e["n"] = *row.n;
                        j.push_back(e);
                    }
                    r.emit_json("bounds_audit.json", j);
                }
                r.summary["checks"] = rows.size();
                r.summary["violations"] = violations;
                std::cout << rows.size() << " checks, " << violations << " violations\n";
                return violations == 0 ? 0 : kAccuracy;
            }};
}

// ---------------------------------------------------------------------------
// JSON run configuration: {"command": ..., "params": {...}, "output_dir": ..., "format": ...}.
// Command-line flags take precedence over params.

struct ConfigFile {
    std::optional<std::string> command;
    std::vector<std::pair<std::string, json>> params;  // option name without dashes, value
};

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw DomainError("config " + path + ": " + ex.what());
    }
    if (!j.is_object()) throw DomainError("config: top level must be an object");
    ConfigFile c;
    for (const auto& [key, v] : j.items()) {
        if (key == "command") {
            if (!v.is_string()) throw DomainError("config: command must be a string");
            c.command = v.get<std::string>();
        } else if (key == "params") {
            if (!v.is_object()) throw DomainError("config: params must be an object");
            for (const auto& [pk, pv] : v.items()) c.params.emplace_back(pk, pv);
        } else if (key == "output_dir") {
            c.params.emplace_back("out", v);
        } else if (key == "format") {
            c.params.emplace_back("format", v);
        } else {
            throw DomainError("config: unknown key '" + key + "'");
        }
    }
    return c;
}

std::string scalar_token(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return num(v.get<double>());
    throw DomainError("config: value of '" + key + "' must be a number or string");
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

// Record every option of the subcommand as given or defaulted.
json collect_params(const CLI::App* sub) {
    json p = json::object();
    for (const CLI::Option* o : sub->get_options()) {
        const std::string name = o->get_single_name();
        if (name == "help" || name == "out" || name == "format") continue;
        if (o->get_expected_max() == 0) {
            p[name] = o->count() > 0;
        } else if (o->count() > 0) {
            const auto& res = o->results();
            if (o->get_expected_max() > 1 || res.size() > 1)
                p[name] = res;
            else
                p[name] = res.front();
        } else {
            const std::string d = o->get_default_str();
            p[name] = d.empty() ? json(nullptr) : json(d);
        }
    }
    return p;
}

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::io:
            return kIo;
        case ErrorKind::domain:
        case ErrorKind::range:
        case ErrorKind::singularity:
        case ErrorKind::degenerate_amplitude:
            return kDomain;
        default:
            return kAccuracy;
    }
}

}  // namespace

int main(int argc, char** argv) {
    Run run;
    CLI::App app{"Melnikov potential, scattering maps and diffusion itineraries for the elliptic restricted three-body problem"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ertbp::version);
    app.option_defaults()->always_capture_default();
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration");

    std::vector<Command> commands{add_coeffs(app, run),    add_nintegral(app, run), add_melnikov(app, run),
                                  add_harmonics(app, run), add_levelsets(app, run), add_itinerary(app, run),
                                  add_ode_verify(app, run), add_bounds_audit(app, run)};

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // The config is merged into the argument list before parsing, so it goes
        // through the same validation as flags.
        std::string cfg;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) {
                cfg = args[i + 1];
                args.erase(args.begin() + i, args.begin() + i + 2);
                break;
            }
            if (args[i].rfind("--config=", 0) == 0) {
                cfg = args[i].substr(9);
                args.erase(args.begin() + i);
                break;
            }
        }
        if (!cfg.empty()) {
            const ConfigFile c = load_config(cfg);
            const CLI::App* sub = nullptr;
            for (const auto& cmd : commands)
                if (std::find(args.begin(), args.end(), cmd.app->get_name()) != args.end()) sub = cmd.app;
            if (c.command) {
                const CLI::App* named = nullptr;
                for (const auto& cmd : commands)
                    if (cmd.app->get_name() == *c.command) named = cmd.app;
                if (!named) throw DomainError("config: unknown command '" + *c.command + "'");
                if (sub && sub != named) throw DomainError("config command '" + *c.command + "' conflicts with the command line");
                if (!sub) args.insert(args.begin(), *c.command);
                sub = named;
            }
            if (!sub) throw DomainError("config: no command given");
            for (const auto& [key, v] : c.params) {
                const std::string flag = "--" + key;
                const CLI::Option* opt = sub->get_option_no_throw(flag);
                if (!opt) throw DomainError("config: unknown key '" + key + "' for " + sub->get_name());
                if (given(args, flag)) continue;
                if (opt->get_expected_max() == 0) {
                    if (!v.is_boolean()) throw DomainError("config: '" + key + "' must be true or false");
                    if (v.get<bool>()) args.push_back(flag);
                } else if (v.is_array()) {
                    std::string joined;
                    for (const auto& x : v) joined += (joined.empty() ? "" : ",") + scalar_token(x, key);
                    args.push_back(flag);
                    args.push_back(joined);
                } else {
                    args.push_back(flag);
                    args.push_back(scalar_token(v, key));
                }
            }
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kDomain;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    }

    int status = 0;
    std::string message;
    for (const auto& cmd : commands) {
        if (!cmd.app->parsed()) continue;
        run.command = cmd.app->get_name();
        run.params = collect_params(cmd.app);
        try {
            status = cmd.run(run);
        } catch (const Error& e) {
            status = exit_code(e);
            message = e.what();
        } catch (const std::exception& e) {
            status = kAccuracy;
            message = e.what();
        }
    }
    if (!message.empty()) std::cerr << "error: " << message << '\n';
    try {
        // written last so it lists every output
        const json m = run.manifest(status, message);
        std::error_code ec;
        fs::create_directories(run.out_dir, ec);
        std::ofstream f(fs::path(run.out_dir) / "manifest.json");
        if (!f) throw IoError("cannot write manifest in " + run.out_dir);
        f << m.dump(1) << '\n';
        f.flush();
        if (!f) throw IoError("cannot write manifest in " + run.out_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return status == 0 ? kIo : status;
    }
    return status;
}
