// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 is the slow one; --skip-slow / --only-slow split it
// off for scheduling. --cli PATH is needed by the determinism criterion.

#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "smirnov/contours.hpp"
#include "smirnov/io.hpp"

namespace fs = std::filesystem;
using namespace smirnov;

namespace {

int failures = 0;

void report(int num, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %2d [%s]: %s%s%s\n", num, name, pass ? "PASS" : "FAIL",
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void run(int num, const char* name, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
        auto [ok, detail] = fn();
        report(num, name, ok, detail);
    } catch (const std::exception& e) {
        report(num, name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

// ---- criterion bodies -----------------------------------------------------

std::pair<bool, std::string> accessory_constraints() {
    std::mt19937 rng(20260808);
    std::uniform_real_distribution<double> ua(0.1, 0.9), ul(-10.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double a = ua(rng), lam = ul(rng);
        const auto rep = validate_constraints(PuncturedSphere::four_point(a),
                                              accessory_from_lambda(a, lam), 1e-13);
        worst = std::max({worst, rep.sum_defect, rep.moment_defect});
    }
    double worst_far = 0.0;
    std::uniform_real_distribution<double> ul3(-3.0, 3.0);
    for (double a : {0.3, 0.5, 0.7}) {
        for (int i = 0; i < 10; ++i) {
            const auto acc = accessory_from_lambda(a, ul3(rng));
            const cplx z = 1e6 * std::polar(1.0, 0.2 + 0.05 * i);
            worst_far = std::max(
                worst_far,
                std::abs(z * z * coefficient_r(z, PuncturedSphere::four_point(a), acc) -
                         0.5));
        }
    }
    const bool ok = worst <= 1e-13 && worst_far <= 1e-5;
    return {ok, fmt("constraint defect %.2e (<=1e-13), far-field defect %.2e (<=1e-5)",
                    worst, worst_far)};
}

std::pair<bool, std::string> spectral_anchor(const SpectrumSet& s) {
    const double d0 = std::abs(s.lam(0) + 0.5);
    double dm = 0.0;
    for (int k : {1, 2}) dm = std::max(dm, std::abs(s.mu(-k) + 1.0 + s.mu(k)));
    const bool ok = d0 <= 1e-6 && dm <= 1e-8;
    return {ok, fmt("|lambda_0 + 1/2| = %.2e (<=1e-6), mirror defect %.2e (<=1e-8)",
                    d0, dm)};
}

std::pair<bool, std::string> interlacing() {
    bool ok = true;
    std::ostringstream detail;
    for (double a : {0.3, 0.5, 0.7}) {
        const SpectrumSet s = solve_all(a, 2);
        std::vector<Eigenvalue> all;
        for (const auto* v : {&s.p1, &s.p2, &s.p3})
            all.insert(all.end(), v->begin(), v->end());
        const auto rep = verify_interlacing(all);
        const bool chain = rep.ok && rep.chain.size() == 9;
        const bool edges = s.mu(1) > -a && s.mu(-1) < -a;
        ok = ok && chain && edges;
        detail << "a=" << a << (chain && edges ? " ok " : " VIOLATED ");
    }
    return {ok, detail.str()};
}

std::pair<bool, std::string> monodromy_certificates(const SpectrumSet& s) {
    std::vector<double> points;
    for (const auto* v : {&s.p1, &s.p2, &s.p3})
        for (const auto& e : *v) points.push_back(e.lambda);
    double worst_det = 0.0, worst_tr = 0.0, worst_prod = 0.0, worst_real = 0.0;
    for (double lam : points) {
        const MonodromyRep rep = monodromy_rep(SmirnovEquation(0.5, lam));
        worst_det = std::max(worst_det, rep.det_defect());
        worst_tr = std::max(worst_tr, rep.trace_defect());
        worst_prod = std::max(worst_prod, rep.product_defect());
        worst_real = std::max(worst_real, realness_defect(rep));
    }
    const double mid = 0.5 * (s.lam(0) + s.mu(1));
    const double gap_defect = realness_defect(monodromy_rep(SmirnovEquation(0.5, mid)));
    const bool ok = worst_det <= 1e-10 && worst_tr <= 1e-8 && worst_prod <= 1e-8 &&
                    worst_real <= 1e-6 && gap_defect > 1e-3;
    return {ok, fmt("det %.1e (1e-10), |tr|-2 %.1e (1e-8), product %.1e (1e-8), "
                    "realness %.1e (1e-6), between-points defect %.2f (>1e-3)",
                    worst_det, worst_tr, worst_prod, worst_real, gap_defect)};
}

std::pair<bool, std::string> field_residuals(const SpectrumSet& s) {
    bool ok = true;
    std::ostringstream detail;
    for (double lam : {s.lam(0), s.mu(1)}) {
        const LiouvilleField fld = make_field(SmirnovEquation(0.5, lam));
        GridSpec coarse;
        coarse.nx = coarse.ny = 150;
        GridSpec fine;
        fine.nx = fine.ny = 299;
        const auto rc = residuals(fld, chi_field(fld, coarse));
        const auto rf = residuals(fld, chi_field(fld, fine));
        const double rate_phi = rc.liouville / rf.liouville;
        const double rate_chi = rc.chi_pde / rf.chi_pde;
        const bool pass = rf.chi_ode <= 1e-10 && rate_phi > 2.5 && rate_phi < 6.5 &&
                          rate_chi > 2.5 && rate_chi < 6.5;
        ok = ok && pass;
        detail << fmt("lambda=%.3f: ode %.1e, rates %.2f/%.2f; ", lam, rf.chi_ode,
                      rate_phi, rate_chi);
    }
    return {ok, detail.str() + "(ode<=1e-10, rates~4)"};
}

std::pair<bool, std::string> contour_counts(const SpectrumSet& s) {
    struct Case {
        const char* name;
        double lambda;
        int count;
        std::array<bool, 4> sep;
    };
    const std::array<bool, 4> a1 = {false, true, true, false};
    const std::array<bool, 4> za = {true, true, false, false};
    const std::array<bool, 4> none = {false, false, false, false};
    bool ok = true;
    std::ostringstream detail;
    for (const Case c :
         {Case{"lambda_0", s.lam(0), 0, none}, Case{"lambda_1", s.lam(1), 2, a1},
          Case{"lambda_-1", s.lam(-1), 2, za}, Case{"mu_1", s.mu(1), 1, a1},
          Case{"mu_-1", s.mu(-1), 1, za}}) {
        const LiouvilleField fld = make_field(SmirnovEquation(0.5, c.lambda));
        GridSpec spec;
        spec.nx = spec.ny = 320;
        const auto contours = extract_contours(fld, spec);
        bool pass = static_cast<int>(contours.size()) == c.count;
        ChiEvaluator ev(fld);
        for (const auto& ct : contours) {
            pass = pass && ct.separates == c.sep;
            const ContourPoint cp =
                refine_contour_point(ev, ct.points[ct.points.size() / 2]);
            const double d = 0.01 * ct.diameter();
            pass = pass && ev.chi(cp.z0 + d * cp.normal) *
                                   ev.chi(cp.z0 - d * cp.normal) <
                               0.0;
        }
        ok = ok && pass;
        detail << c.name << ":" << contours.size() << (pass ? " ok; " : " BAD; ");
    }
    return {ok, detail.str()};
}

std::pair<bool, std::string> schwarz_blowup(const SpectrumSet& s) {
    // synthetic half-plane: S(z) = z reproduces the Poincare density exactly
    ContourPoint line;
    line.z0 = cplx(0.2, 0.0);
    line.normal = cplx(0.0, 1.0);
    line.schwarz_d = 1.0;
    bool ok = true;
    for (double d : {0.1, 0.01}) {
        const cplx m = schwarz_model(line, line.z0 + cplx(0.0, d));
        ok = ok && std::abs(m.real() * d * d - 1.0) < 1e-12;
    }
    // synthetic circle: matches the disk density to first order in delta
    const cplx z0 = std::polar(1.0, 1.1);
    ContourPoint circ;
    circ.z0 = z0;
    circ.schwarz_d = std::conj(cplx(0, 1) * z0) / (cplx(0, 1) * z0);
    for (double d : {1e-2, 3e-3, 1e-3}) {
        const cplx z = (1.0 - d) * z0;
        const double model = schwarz_model(circ, z).real();
        const double disk = 4.0 / sqr(1.0 - std::norm(z));
        ok = ok && std::abs(disk / model - 1.0) <= 1.1 * d;
    }
    // computed mu_1 contour: ratio -> 1 within 5 delta
    const LiouvilleField fld = make_field(SmirnovEquation(0.5, s.mu(1)));
    GridSpec spec;
    spec.nx = spec.ny = 320;
    const auto contours = extract_contours(fld, spec);
    if (contours.size() != 1) return {false, "mu_1 contour extraction failed"};
    const SchwarzReport rep = schwarz_singularity_check(fld, contours[0]);
    ok = ok && rep.ok;
    return {ok, fmt("synthetic cases ok=%d, field max |ratio-1|/delta = %.2f (<=5)",
                    int(ok), rep.max_ratio_error)};
}

std::pair<bool, std::string> puncture_decay(const SpectrumSet& s) {
    // As stated: defects at r = 1e-2 .. 1e-4 must decrease AND end <= 0.1.
    // The decrease holds; the 0.1 bound does not: the true field's defect is
    // -2 log(1 - mu/|log r|) with cusp widths mu = -log 4, -log 2, -log 8 at
    // a = 1/2, i.e. |d(1e-4)| in {0.145, 0.280, 0.407}. The measured values
    // match that model; the detail records both.
    const LiouvilleField fld = make_field(SmirnovEquation(0.5, s.lam(0)));
    ChiEvaluator ev(fld);
    bool ok = true;
    std::ostringstream detail;
    for (auto pt : {SingularPoint::Zero, SingularPoint::A, SingularPoint::One,
                    SingularPoint::Infinity}) {
        const auto rep = puncture_asymptotics(fld, pt, {1e-2, 1e-3, 1e-4});
        const double mu = puncture_series(fld, pt, ev).cusp_log_width();
        const double model = -2.0 * std::log(1.0 - mu / std::abs(std::log(1e-4)));
        const bool pass = rep.defect_decreasing && std::abs(rep.final_defect) <= 0.1;
        ok = ok && pass;
        detail << to_string(pt)
               << fmt(": d=%.3f (cusp model %.3f, mu=%.3f)%s; ", rep.final_defect,
                      model, mu, pass ? "" : " exceeds 0.1");
    }
    return {ok, detail.str() + "decay verified, 0.1 end bound unattainable at r=1e-4"};
}

std::pair<bool, std::string> polyakov_antiderivative() {
    ActionQuadratureSpec spec;  // production defaults
    const PolyakovReport at_half = polyakov_check(0.5, 5e-3, spec);
    const bool half_ok = std::abs(at_half.lhs) <= 1e-2 && std::abs(at_half.rhs) <= 1e-2;
    const PolyakovReport at_03 = polyakov_check(0.3, 5e-3, spec);
    const bool rel_ok = at_03.rel_err <= 0.02;
    return {half_ok && rel_ok,
            fmt("a=0.5: |lhs|=%.1e (<=1e-2); a=0.3: lhs=%.4f rhs=%.4f rel=%.3f%% "
                "(<=2%%)",
                std::abs(at_half.lhs), at_03.lhs, at_03.rhs, 100.0 * at_03.rel_err)};
}

std::pair<bool, std::string> cli_determinism(const std::string& cli) {
    if (cli.empty()) return {false, "no --cli path provided"};
    const fs::path base = fs::temp_directory_path() / "smirnov_accept";
    fs::remove_all(base);
    auto run_cli = [&](const std::string& args, const fs::path& out) {
        fs::create_directories(out);
        const std::string cmd = cli + " " + args + " --out " + out.string() +
                                " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    auto read = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    struct Job {
        std::string args;
        std::vector<std::string> artifacts;
    };
    const std::vector<Job> jobs = {
        {"spectrum --a 0.5 --k-range 2", {"spectrum.json"}},
        {"contours --a 0.5 --problem p1 --k 1 --grid 220 220", {"contours.json", "contours.svg"}},
        {"field --a 0.5 --problem p3 --k 0 --grid 96 96", {"field.csv", "field.json"}}};
    for (size_t j = 0; j < jobs.size(); ++j) {
        // identical invocations, including --out, so the embedded configs match
        const fs::path dir = base / ("job_" + std::to_string(j));
        if (!run_cli(jobs[j].args, dir)) return {false, "CLI run failed: " + jobs[j].args};
        std::map<std::string, std::string> first;
        for (const auto& art : jobs[j].artifacts) first[art] = read(dir / art);
        fs::remove_all(dir);
        if (!run_cli(jobs[j].args, dir)) return {false, "CLI rerun failed: " + jobs[j].args};
        for (const auto& art : jobs[j].artifacts) {
            const std::string b2 = read(dir / art);
            if (first[art].empty() || first[art] != b2)
                return {false, "artifact differs across runs: " + art};
        }
    }
    return {true, "3 commands x 2 runs byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    bool skip_slow = false, only_slow = false;
    int only = 0;
    std::vector<int> skips;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) cli = argv[++i];
        if (arg == "--skip-slow") skip_slow = true;
        if (arg == "--only-slow") only_slow = true;
        if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
        if (arg == "--skip" && i + 1 < argc) skips.push_back(std::atoi(argv[++i]));
    }
    auto wanted = [&](int num, bool slow) {
        if (only) return num == only;
        if (std::find(skips.begin(), skips.end(), num) != skips.end()) return false;
        if (only_slow) return slow;
        if (skip_slow && slow) return false;
        return true;
    };

    SpectrumSet s;
    for (int num : {1, 2, 3, 4, 5, 6, 7, 8, 10})
        if (wanted(num, false) && s.p3.empty()) s = solve_all(0.5, 2);

    if (wanted(1, false)) run(1, "accessory constraints", accessory_constraints);
    if (wanted(2, false)) run(2, "spectral anchor", [&] { return spectral_anchor(s); });
    if (wanted(3, false)) run(3, "interlacing", interlacing);
    if (wanted(4, false)) run(4, "monodromy", [&] { return monodromy_certificates(s); });
    if (wanted(5, false)) run(5, "field residuals", [&] { return field_residuals(s); });
    if (wanted(6, false)) run(6, "contour counts", [&] { return contour_counts(s); });
    if (wanted(7, false)) run(7, "schwarz blow-up", [&] { return schwarz_blowup(s); });
    if (wanted(8, false)) run(8, "puncture asymptotics", [&] { return puncture_decay(s); });
    if (wanted(9, true)) run(9, "polyakov antiderivative", polyakov_antiderivative);
    if (wanted(10, false)) run(10, "cli determinism", [&] { return cli_determinism(cli); });

    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
