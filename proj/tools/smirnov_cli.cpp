// Command-line front end: spectra, monodromy, fields, contours, action.
// Deterministic, file-based outputs (JSON / CSV / SVG); every artifact
// embeds the resolved configuration.
//
// Exit codes: 0 success, 2 validation error, 3 numerical non-convergence.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "smirnov/io.hpp"

namespace fs = std::filesystem;
using namespace smirnov;

namespace {

struct RunConfig {
    double a = 0.5;
    double lambda = 0.0;
    bool has_lambda = false;
    std::string problem;  // p1 | p2 | p3
    int k = 0;
    bool has_problem_k = false;
    int k_range = 2;
    int nx = 400, ny = 400;
    std::vector<double> bbox{-0.8, -1.2, 1.8, 1.2};  // x0 y0 x1 y1
    std::vector<double> eps;
    double tol = 1e-10;
    double delta = 5e-3;
    bool polyakov = false;
    std::string out = ".";
};

json config_json(const RunConfig& c, const std::string& command) {
    json j{{"command", command}, {"a", c.a},       {"k_range", c.k_range},
           {"grid", {c.nx, c.ny}}, {"bbox", c.bbox}, {"tol", c.tol},
           {"out", c.out}};
    if (c.has_lambda) j["lambda"] = c.lambda;
    if (c.has_problem_k) {
        j["problem"] = c.problem;
        j["k"] = c.k;
    }
    if (!c.eps.empty()) j["eps"] = c.eps;
    if (c.polyakov) {
        j["polyakov"] = true;
        j["delta"] = c.delta;
    }
    return j;
}

ProblemKind parse_problem(const std::string& s) {
    if (s == "p1") return ProblemKind::P1;
    if (s == "p2") return ProblemKind::P2;
    if (s == "p3") return ProblemKind::P3;
    throw CLI::ValidationError("--problem must be one of p1, p2, p3");
}

// Accessory parameter from either --lambda or --problem/--k.
double resolve_lambda(const RunConfig& c) {
    if (c.has_lambda == c.has_problem_k)
        throw CLI::ValidationError(
            "exactly one of --lambda or --problem/--k must be given");
    if (c.has_lambda) return c.lambda;
    const ProblemKind kind = parse_problem(c.problem);
    if (kind != ProblemKind::P3 && c.k == 0)
        throw CLI::ValidationError("--k 0 exists only for p3");
    const auto eigs = solve_spectrum({kind, c.a}, std::abs(c.k));
    for (const auto& e : eigs)
        if (e.k == c.k) return e.lambda;
    throw non_convergence_error("requested eigenvalue index not found");
}

GridSpec grid_spec(const RunConfig& c) {
    GridSpec g;
    g.x0 = c.bbox[0];
    g.y0 = c.bbox[1];
    g.x1 = c.bbox[2];
    g.y1 = c.bbox[3];
    g.nx = c.nx;
    g.ny = c.ny;
    if (!(g.x0 < g.x1 && g.y0 < g.y1))
        throw CLI::ValidationError("--bbox must satisfy x0 < x1, y0 < y1");
    return g;
}

void cmd_spectrum(const RunConfig& c) {
    const SpectrumSet s = solve_all(c.a, c.k_range);
    std::vector<Eigenvalue> all;
    for (const auto* v : {&s.p1, &s.p2, &s.p3})
        all.insert(all.end(), v->begin(), v->end());
    json j = to_json(s);
    j["interlacing"] = to_json(verify_interlacing(all));
    j["config"] = config_json(c, "spectrum");
    write_json(j, (fs::path(c.out) / "spectrum.json").string());
}

void cmd_monodromy(const RunConfig& c) {
    const double lambda = resolve_lambda(c);
    const SmirnovEquation eq(c.a, lambda);
    const MonodromyRep rep = monodromy_rep(eq);
    json j = to_json(rep);
    const double defect = realness_defect(rep);
    if (defect <= 1e-6) {
        const Conjugation conj = conjugate_to_real(rep);
        j["conjugator"] = to_json(conj.q);
        j["conjugation_residual"] = conj.residual_imag;
        json real;
        const char* names[4] = {"m0", "ma", "m1", "minf"};
        for (int i = 0; i < 4; ++i) real[names[i]] = to_json(conj.rep_real.m[i]);
        j["matrices_real"] = real;
    } else {
        j["conjugator"] = nullptr;
    }
    j["config"] = config_json(c, "monodromy");
    write_json(j, (fs::path(c.out) / "monodromy.json").string());
}

void cmd_field(const RunConfig& c) {
    const double lambda = resolve_lambda(c);
    const LiouvilleField fld = make_field(SmirnovEquation(c.a, lambda));
    const FieldGrid g = chi_field(fld, grid_spec(c));
    const json cfg = config_json(c, "field");
    write_field_csv(g, (fs::path(c.out) / "field.csv").string(), cfg);
    double chi_min = 1e300, chi_max = -1e300;
    for (size_t k = 0; k < g.chi.size(); ++k) {
        if (g.mask[k]) continue;
        chi_min = std::min(chi_min, g.chi[k]);
        chi_max = std::max(chi_max, g.chi[k]);
    }
    write_json(json{{"config", cfg},
                    {"a", c.a},
                    {"lambda", lambda},
                    {"chi_min", chi_min},
                    {"chi_max", chi_max},
                    {"closure_defect", g.closure_defect},
                    {"realness_defect", fld.realness}},
               (fs::path(c.out) / "field.json").string());
}

void cmd_contours(const RunConfig& c) {
    const double lambda = resolve_lambda(c);
    const LiouvilleField fld = make_field(SmirnovEquation(c.a, lambda));
    const GridSpec spec = grid_spec(c);
    const auto contours = extract_contours(fld, spec);
    const SpectrumSet s = solve_all(c.a, std::max(c.k_range, std::abs(c.k)));
    const Classification cl = classify_solution(fld.eq, s, contours);
    const json cfg = config_json(c, "contours");
    write_contours_svg(contours, c.a, spec, (fs::path(c.out) / "contours.svg").string(),
                       cfg);
    json j{{"config", cfg},
           {"a", c.a},
           {"lambda", lambda},
           {"count", contours.size()},
           {"classification", to_json(cl)}};
    json arr = json::array();
    for (const auto& ct : contours) {
        json sep = json::array();
        const char* names[4] = {"0", "a", "1", "inf"};
        for (int i = 0; i < 4; ++i)
            if (ct.separates[i]) sep.push_back(names[i]);
        arr.push_back(json{{"vertices", ct.points.size()},
                           {"diameter", ct.diameter()},
                           {"separates", sep}});
    }
    j["contours"] = arr;
    write_json(j, (fs::path(c.out) / "contours.json").string());
}

void cmd_action(const RunConfig& c) {
    ActionQuadratureSpec spec;
    if (!c.eps.empty()) spec.eps_schedule = c.eps;
    json j;
    j["config"] = config_json(c, "action");
    if (c.polyakov) {
        const PolyakovReport rep = polyakov_check(c.a, c.delta, spec);
        j.update(to_json(rep));
    } else {
        const double l0 = lambda0_of(c.a);
        j.update(to_json(liouville_action(c.a, l0, spec)));
    }
    write_json(j, (fs::path(c.out) / "action.json").string());
}

void cmd_report(const RunConfig& c) {
    const SpectrumSet s = solve_all(c.a, c.k_range);
    std::vector<Eigenvalue> all;
    for (const auto* v : {&s.p1, &s.p2, &s.p3})
        all.insert(all.end(), v->begin(), v->end());
    json j = to_json(s);
    j["interlacing"] = to_json(verify_interlacing(all));
    json points = json::array();
    for (const auto& e : all) {
        json pt = to_json(e);
        const SmirnovEquation eq(c.a, e.lambda);
        const MonodromyRep rep = monodromy_rep(eq);
        pt["monodromy"] = json{{"trace_defect", rep.trace_defect()},
                               {"det_defect", rep.det_defect()},
                               {"product_defect", rep.product_defect()},
                               {"realness_defect", realness_defect(rep)}};
        const LiouvilleField fld = make_field(eq);
        GridSpec gs = grid_spec(c);
        const auto contours = extract_contours(fld, gs);
        pt["classification"] = to_json(classify_solution(eq, s, contours));
        points.push_back(pt);
    }
    j["points"] = points;
    j["config"] = config_json(c, "report");
    write_json(j, (fs::path(c.out) / "report.json").string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuchsian spectra, monodromy and singular Liouville fields on "
                 "the four-punctured sphere"};
    app.require_subcommand(1);

    RunConfig c;

    // Optional JSON config file; explicit flags override its values.
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "cannot open config file " << config_path << "\n";
            return 2;
        }
        try {
            json j = json::parse(in);
            if (j.contains("a")) c.a = j["a"];
            if (j.contains("lambda")) {
                c.lambda = j["lambda"];
                c.has_lambda = true;
            }
            if (j.contains("problem")) c.problem = j["problem"];
            if (j.contains("k")) c.k = j["k"];
            if (j.contains("problem") && j.contains("k")) c.has_problem_k = true;
            if (j.contains("k_range")) c.k_range = j["k_range"];
            if (j.contains("grid")) {
                c.nx = j["grid"][0];
                c.ny = j["grid"][1];
            }
            if (j.contains("bbox")) c.bbox = j["bbox"].get<std::vector<double>>();
            if (j.contains("eps")) c.eps = j["eps"].get<std::vector<double>>();
            if (j.contains("tol")) c.tol = j["tol"];
            if (j.contains("delta")) c.delta = j["delta"];
            if (j.contains("polyakov")) c.polyakov = j["polyakov"];
            if (j.contains("out")) c.out = j["out"];
        } catch (const json::exception& e) {
            std::cerr << "bad config file: " << e.what() << "\n";
            return 2;
        }
    }

    std::string cfgdummy;
    app.add_option("--config", cfgdummy, "JSON config file (flags override)");

    auto add_common = [&](CLI::App* sub, bool with_point, bool with_grid) {
        sub->add_option("--config", cfgdummy, "JSON config file (flags override)");
        sub->add_option("--a", c.a, "modulus of the fourth puncture, in (0,1)");
        sub->add_option("--tol", c.tol, "root/transport tolerance");
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--k-range", c.k_range, "spectral index window |k| <= k-range");
        if (with_point) {
            auto* lam = sub->add_option("--lambda", c.lambda, "accessory parameter");
            auto* pr = sub->add_option("--problem", c.problem, "p1 | p2 | p3");
            auto* kk = sub->add_option("--k", c.k, "eigenvalue index");
            lam->excludes(pr);
            lam->excludes(kk);
            sub->callback([&c, lam, pr, kk]() {
                if (lam->count()) c.has_lambda = true;
                if (pr->count() || kk->count()) c.has_problem_k = true;
            });
        }
        if (with_grid) {
            sub->add_option("--grid", [&c](const CLI::results_t& res) {
                if (res.size() != 2) return false;
                c.nx = std::stoi(res[0]);
                c.ny = std::stoi(res[1]);
                return true;
            }, "grid samples NX NY")->expected(2);
            sub->add_option("--bbox", c.bbox, "bounding box X0 Y0 X1 Y1")->expected(4);
        }
    };

    auto* sc_spectrum = app.add_subcommand("spectrum", "eigenvalue tables + interlacing");
    add_common(sc_spectrum, false, false);
    auto* sc_monodromy = app.add_subcommand("monodromy", "monodromy matrices + realness");
    add_common(sc_monodromy, true, false);
    auto* sc_field = app.add_subcommand("field", "chi/phi field grid (CSV)");
    add_common(sc_field, true, true);
    auto* sc_contours = app.add_subcommand("contours", "singular contours (SVG + JSON)");
    add_common(sc_contours, true, true);
    auto* sc_action = app.add_subcommand("action", "regularized action / Polyakov check");
    add_common(sc_action, false, false);
    sc_action->add_option("--eps", c.eps, "epsilon schedule")->delimiter(',');
    sc_action->add_option("--delta", c.delta, "central-difference step in a");
    sc_action->add_flag("--polyakov", c.polyakov, "also run the antiderivative check");
    auto* sc_report = app.add_subcommand("report", "full pipeline summary");
    add_common(sc_report, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!(c.a > 0.0 && c.a < 1.0))
            throw CLI::ValidationError("--a must lie in (0,1)");
        fs::create_directories(c.out);
        if (sc_spectrum->parsed()) cmd_spectrum(c);
        if (sc_monodromy->parsed()) cmd_monodromy(c);
        if (sc_field->parsed()) cmd_field(c);
        if (sc_contours->parsed()) cmd_contours(c);
        if (sc_action->parsed()) cmd_action(c);
        if (sc_report->parsed()) cmd_report(c);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const non_convergence_error& e) {
        json diag{{"error", "non-convergence"}, {"detail", e.what()}};
        std::cerr << diag.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
