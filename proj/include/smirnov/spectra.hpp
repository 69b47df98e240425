#pragma once
// The three spectral problems of the self-adjoint form on (0,1):
//
//   P1: a solution regular at 0 and at a          (eigenvalues mu_k, k >= 1)
//   P2: a solution regular at a and at 1          (eigenvalues mu_{-k})
//   P3: a solution regular at 0 whose real continuation through a is
//       regular at 1                              (eigenvalues lambda_k, k in Z)
//
// Shooting: series evaluation inside the basis disks, adaptive integration
// between them. The eigencondition is the vanishing of a p-Wronskian (P1,
// P2) or of the log coefficient at 1 after real continuation (P3). The
// spectra interlace:
//   ... < mu_{-2} < lambda_{-1} < mu_{-1} < lambda_0 < mu_1 < lambda_1 < ...

#include <functional>
#include <map>

#include "smirnov/frobenius.hpp"
#include "smirnov/transport.hpp"

namespace smirnov {

enum class ProblemKind { P1, P2, P3 };

inline const char* to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::P1: return "p1";
        case ProblemKind::P2: return "p2";
        default: return "p3";
    }
}

struct SpectralProblem {
    ProblemKind kind = ProblemKind::P1;
    double a = 0.5;
};

struct Eigenvalue {
    ProblemKind problem = ProblemKind::P1;
    int k = 0;
    double lambda = 0.0;
    int osc = 0;          // interior zeros of the shooting solution
    double residual = 0.0;  // |D| at the root
};

namespace detail {

struct ShootingGeometry {
    double z0_edge, za_left, za_right, z1_edge;
    explicit ShootingGeometry(const SmirnovEquation& eq) {
        const double r0 = 0.45 * eq.a;
        const double ra = 0.45 * std::min(eq.a, 1.0 - eq.a);
        const double r1 = 0.45 * (1.0 - eq.a);
        z0_edge = 0.9 * r0;
        za_left = eq.a - 0.9 * ra;
        za_right = eq.a + 0.9 * ra;
        z1_edge = 1.0 - 0.9 * r1;
    }
};

inline ValueDeriv transport_real(const SmirnovEquation& eq, double from, double to,
                                 const ValueDeriv& f, double tol = 1e-12) {
    if (from == to) return f;
    Path seg{{cplx(from), cplx(to)}};
    return continue_solution_y(eq, seg, f, tol);
}

inline double assert_real(cplx v, const char* where) {
    if (std::abs(v.imag()) > 1e-8 * (1.0 + std::abs(v)))
        throw non_convergence_error(std::string(where) + ": lost realness");
    return v.real();
}

// P1 determinant: pW(y1 at 0 transported, y1 at a).
inline double det_p1(const SmirnovEquation& eq) {
    const ShootingGeometry g(eq);
    const auto b0 = local_basis(eq, SingularPoint::Zero);
    const auto ba = local_basis(eq, SingularPoint::A);
    ValueDeriv f = b0.eval(g.z0_edge, 0).y1;
    f = transport_real(eq, g.z0_edge, g.za_left, f);
    const ValueDeriv ga = ba.eval(g.za_left, -1).y1;
    return assert_real(p_wronskian(eq, f, ga, g.za_left), "det_p1");
}

inline double det_p2(const SmirnovEquation& eq) {
    const ShootingGeometry g(eq);
    const auto ba = local_basis(eq, SingularPoint::A);
    const auto b1 = local_basis(eq, SingularPoint::One);
    ValueDeriv f = ba.eval(g.za_right, 0).y1;
    f = transport_real(eq, g.za_right, g.z1_edge, f);
    const ValueDeriv g1 = b1.eval(g.z1_edge, -1).y1;
    return assert_real(p_wronskian(eq, f, g1, g.z1_edge), "det_p2");
}

// P3 determinant: log coefficient at 1 of the real continuation of y1 at 0.
inline double det_p3(const SmirnovEquation& eq) {
    const ShootingGeometry g(eq);
    const auto b0 = local_basis(eq, SingularPoint::Zero);
    const auto ba = local_basis(eq, SingularPoint::A);
    const auto b1 = local_basis(eq, SingularPoint::One);
    ValueDeriv f = b0.eval(g.z0_edge, 0).y1;
    f = transport_real(eq, g.z0_edge, g.za_left, f);
    auto [al, be] = connection_coefficients(eq, ba, f, g.za_left, -1);
    SolutionRepr left{ba, al, be, -1};
    const SolutionRepr right = real_continuation(left);
    ValueDeriv fr = evaluate(right, g.za_right);
    fr = transport_real(eq, g.za_right, g.z1_edge, fr);
    auto [al1, be1] = connection_coefficients(eq, b1, fr, g.z1_edge, -1);
    (void)al1;
    return assert_real(be1, "det_p3");
}

// Shooting-solution samples on the problem's interval(s), used for zero
// counting. Sampling keeps a small margin at the endpoints and at a.
inline void sample_solution(const SpectralProblem& pr, double lambda,
                            std::vector<double>& zs, std::vector<double>& fs,
                            int npts = 1200) {
    const SmirnovEquation eq(pr.a, lambda);
    const ShootingGeometry g(eq);
    const auto b0 = local_basis(eq, SingularPoint::Zero);
    const auto ba = local_basis(eq, SingularPoint::A);
    const auto b1 = local_basis(eq, SingularPoint::One);
    zs.clear();
    fs.clear();

    auto sample_range = [&](double lo, double hi, int n, auto&& eval) {
        for (int i = 0; i <= n; ++i) {
            const double z = lo + (hi - lo) * i / n;
            zs.push_back(z);
            fs.push_back(eval(z));
        }
    };

    const double eps0 = 0.01 * eq.a;
    const double epsa = 0.002 * std::min(eq.a, 1.0 - eq.a);
    const double eps1 = 0.01 * (1.0 - eq.a);

    if (pr.kind == ProblemKind::P1 || pr.kind == ProblemKind::P3) {
        // from 0 to a
        sample_range(eps0, g.z0_edge, npts / 4, [&](double z) {
            return assert_real(b0.eval(z, 0).y1.y, "sample");
        });
        ValueDeriv f = b0.eval(g.z0_edge, 0).y1;
        const int nmid = npts / 2;
        for (int i = 1; i <= nmid; ++i) {
            const double z = g.z0_edge + (g.za_left - g.z0_edge) * i / nmid;
            f = transport_real(eq, g.z0_edge + (g.za_left - g.z0_edge) * (i - 1) / nmid,
                               z, f);
            zs.push_back(z);
            fs.push_back(assert_real(f.y, "sample"));
        }
        auto [al, be] = connection_coefficients(eq, ba, f, g.za_left, -1);
        SolutionRepr left{ba, al, be, -1};
        sample_range(g.za_left, eq.a - epsa, npts / 4, [&](double z) {
            return assert_real(evaluate(left, z).y, "sample");
        });
        if (pr.kind == ProblemKind::P3) {
            const SolutionRepr right = real_continuation(left);
            sample_range(eq.a + epsa, g.za_right, npts / 4, [&](double z) {
                return assert_real(evaluate(right, z).y, "sample");
            });
            ValueDeriv fr = evaluate(right, g.za_right);
            for (int i = 1; i <= nmid; ++i) {
                const double z =
                    g.za_right + (g.z1_edge - g.za_right) * i / nmid;
                fr = transport_real(
                    eq, g.za_right + (g.z1_edge - g.za_right) * (i - 1) / nmid, z, fr);
                zs.push_back(z);
                fs.push_back(assert_real(fr.y, "sample"));
            }
            auto [al1, be1] = connection_coefficients(eq, b1, fr, g.z1_edge, -1);
            SolutionRepr at1{b1, al1, be1, -1};
            sample_range(g.z1_edge, 1.0 - eps1, npts / 4, [&](double z) {
                return assert_real(evaluate(at1, z).y, "sample");
            });
        }
    } else {
        // P2: from a to 1
        sample_range(eq.a + epsa, g.za_right, npts / 4, [&](double z) {
            return assert_real(ba.eval(z, 0).y1.y, "sample");
        });
        ValueDeriv f = ba.eval(g.za_right, 0).y1;
        const int nmid = npts / 2;
        for (int i = 1; i <= nmid; ++i) {
            const double z = g.za_right + (g.z1_edge - g.za_right) * i / nmid;
            f = transport_real(eq, g.za_right + (g.z1_edge - g.za_right) * (i - 1) / nmid,
                               z, f);
            zs.push_back(z);
            fs.push_back(assert_real(f.y, "sample"));
        }
        auto [al1, be1] = connection_coefficients(eq, b1, f, g.z1_edge, -1);
        SolutionRepr at1{b1, al1, be1, -1};
        sample_range(g.z1_edge, 1.0 - eps1, npts / 4, [&](double z) {
            return assert_real(evaluate(at1, z).y, "sample");
        });
    }
}

inline int count_sign_changes(const std::vector<double>& fs) {
    double scale = 0.0;
    for (double f : fs) scale = std::max(scale, std::abs(f));
    int count = 0;
    int last_sign = 0;
    for (double f : fs) {
        if (std::abs(f) < 1e-9 * scale) continue;  // grazing zero
        const int s = f > 0 ? 1 : -1;
        if (last_sign != 0 && s != last_sign) ++count;
        last_sign = s;
    }
    return count;
}

struct RootRefinement {
    double lambda;
    double residual;
};

// Bisection to 1e-6 then bracket-safeguarded secant to |dl| <= 1e-10.
inline RootRefinement refine_root(const std::function<double(double)>& D, double lo,
                                  double hi, double flo, double fhi) {
    for (int i = 0; i < 30 && hi - lo > 1e-6; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = D(mid);
        if (fm == 0.0) return {mid, 0.0};
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    double x0 = lo, f0 = flo, x1 = hi, f1 = fhi;
    for (int i = 0; i < 30; ++i) {
        if (f1 == f0) break;
        double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if (!(x2 > lo && x2 < hi)) x2 = 0.5 * (lo + hi);  // fall back to bisection
        const double f2 = D(x2);
        if ((f2 > 0) == (flo > 0)) {
            lo = x2;
            flo = f2;
        } else {
            hi = x2;
            fhi = f2;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if (std::abs(x1 - x0) <= 1e-10 * (1.0 + std::abs(x1))) break;
    }
    return {x1, std::abs(f1)};
}

// All sign-change roots of D on [lo, hi] with the given scan step.
inline std::vector<RootRefinement> scan_roots(const std::function<double(double)>& D,
                                              double lo, double hi, double step) {
    std::vector<RootRefinement> roots;
    double zprev = lo;
    double fprev = D(lo);
    while (zprev < hi) {
        const double z = std::min(zprev + step, hi);
        const double f = D(z);
        if (fprev == 0.0)
            roots.push_back({zprev, 0.0});
        else if ((f > 0) != (fprev > 0))
            roots.push_back(refine_root(D, zprev, z, fprev, f));
        zprev = z;
        fprev = f;
        if (z >= hi) break;
    }
    return roots;
}

}  // namespace detail

inline double shooting_determinant(const SpectralProblem& pr, double lambda) {
    const SmirnovEquation eq(pr.a, lambda);
    switch (pr.kind) {
        case ProblemKind::P1: return detail::det_p1(eq);
        case ProblemKind::P2: return detail::det_p2(eq);
        default: return detail::det_p3(eq);
    }
}

// Interior zero count of the shooting solution at (or near) lambda.
inline int oscillation_index(const SpectralProblem& pr, double lambda) {
    std::vector<double> zs, fs;
    detail::sample_solution(pr, lambda, zs, fs);
    return detail::count_sign_changes(fs);
}

// Spectrum of one problem for |k| <= k_max. P1 yields mu_1..mu_{k_max}
// (indexed by oscillation count), P2 yields mu_{-1}..mu_{-k_max}, and P3
// yields lambda_{-k_max}..lambda_{k_max} indexed by position in the mu
// chain. The scan window expands geometrically until the requested indices
// are captured.
inline std::vector<Eigenvalue> solve_spectrum(const SpectralProblem& pr, int k_max) {
    if (k_max < 0) throw std::invalid_argument("solve_spectrum: k_max >= 0 required");
    auto D = [&](double l) { return shooting_determinant(pr, l); };
    const double step = 0.05;
    std::vector<Eigenvalue> out;

    if (pr.kind == ProblemKind::P1 || pr.kind == ProblemKind::P2) {
        if (k_max == 0) return out;
        const bool up = pr.kind == ProblemKind::P1;
        double span = 10.0;
        for (int attempt = 0;; ++attempt) {
            const double lo = up ? -pr.a - 0.5 : -pr.a - span;
            const double hi = up ? -pr.a + span : -pr.a + 0.5;
            auto roots = detail::scan_roots(D, lo, hi, step);
            if (static_cast<int>(roots.size()) >= k_max) {
                if (up)
                    std::sort(roots.begin(), roots.end(),
                              [](auto& x, auto& y) { return x.lambda < y.lambda; });
                else
                    std::sort(roots.begin(), roots.end(),
                              [](auto& x, auto& y) { return x.lambda > y.lambda; });
                for (int i = 0; i < k_max; ++i) {
                    Eigenvalue ev;
                    ev.problem = pr.kind;
                    ev.lambda = roots[i].lambda;
                    ev.residual = roots[i].residual;
                    ev.osc = oscillation_index(pr, ev.lambda);
                    ev.k = up ? ev.osc + 1 : -(ev.osc + 1);
                    out.push_back(ev);
                }
                std::sort(out.begin(), out.end(),
                          [](auto& x, auto& y) { return x.lambda < y.lambda; });
                return out;
            }
            if (attempt >= 5)
                throw non_convergence_error("solve_spectrum: bracket not found");
            span *= 2.0;
        }
    }

    // P3: index against the mu chain.
    SpectralProblem p1{ProblemKind::P1, pr.a}, p2{ProblemKind::P2, pr.a};
    const auto mu_pos = solve_spectrum(p1, k_max + 1);
    const auto mu_neg = solve_spectrum(p2, k_max + 1);
    std::map<int, double> mu;
    for (const auto& e : mu_pos) mu[e.k] = e.lambda;
    for (const auto& e : mu_neg) mu[e.k] = e.lambda;
    const double lo = mu.at(-(k_max + 1));
    const double hi = mu.at(k_max + 1);
    auto roots = detail::scan_roots(D, lo, hi, step);
    for (const auto& r : roots) {
        // Position in the chain: lambda_j lies in (mu_j, mu_{j+1}) with
        // mu_0 interpreted as the gap (mu_{-1}, mu_1) holding lambda_0.
        int k = 0;
        bool placed = false;
        for (int j = 1; j <= k_max; ++j) {
            if (r.lambda > mu.at(j) && (mu.count(j + 1) == 0 || r.lambda < mu.at(j + 1))) {
                k = j;
                placed = true;
                break;
            }
            if (r.lambda < mu.at(-j) &&
                (mu.count(-j - 1) == 0 || r.lambda > mu.at(-j - 1))) {
                k = -j;
                placed = true;
                break;
            }
        }
        if (!placed && r.lambda > mu.at(-1) && r.lambda < mu.at(1)) {
            k = 0;
            placed = true;
        }
        if (!placed) continue;  // beyond the requested window
        Eigenvalue ev;
        ev.problem = ProblemKind::P3;
        ev.k = k;
        ev.lambda = r.lambda;
        ev.residual = r.residual;
        ev.osc = oscillation_index(pr, r.lambda);
        out.push_back(ev);
    }
    std::sort(out.begin(), out.end(), [](auto& x, auto& y) { return x.lambda < y.lambda; });
    return out;
}

// Convenience bundle: all three spectra over a common index window.
struct SpectrumSet {
    double a = 0.5;
    std::vector<Eigenvalue> p1, p2, p3;

    double mu(int k) const {
        const auto& v = k > 0 ? p1 : p2;
        for (const auto& e : v)
            if (e.k == k) return e.lambda;
        throw std::out_of_range("SpectrumSet::mu: index not computed");
    }
    double lam(int k) const {
        for (const auto& e : p3)
            if (e.k == k) return e.lambda;
        throw std::out_of_range("SpectrumSet::lam: index not computed");
    }
};

inline SpectrumSet solve_all(double a, int k_max) {
    SpectrumSet s;
    s.a = a;
    s.p1 = solve_spectrum({ProblemKind::P1, a}, k_max);
    s.p2 = solve_spectrum({ProblemKind::P2, a}, k_max);
    s.p3 = solve_spectrum({ProblemKind::P3, a}, k_max);
    return s;
}

struct InterlacingReport {
    bool ok = true;
    std::vector<std::string> violations;
    std::vector<std::pair<std::string, double>> chain;  // label, value
};

// Strict chain ... mu_{-2} < lambda_{-1} < mu_{-1} < lambda_0 < mu_1 <
// lambda_1 < mu_2 ... over whatever indices are present.
inline InterlacingReport verify_interlacing(const std::vector<Eigenvalue>& eigs) {
    // Chain position: lambda_k -> 2k, mu_k -> 2k - sign(k).
    std::map<int, std::pair<std::string, double>> chain;
    for (const auto& e : eigs) {
        int pos;
        std::string label;
        if (e.problem == ProblemKind::P3) {
            pos = 2 * e.k;
            label = "lambda_" + std::to_string(e.k);
        } else {
            pos = 2 * e.k - (e.k > 0 ? 1 : -1);
            label = "mu_" + std::to_string(e.k);
        }
        chain[pos] = {label, e.lambda};
    }
    InterlacingReport rep;
    const std::pair<std::string, double>* prev = nullptr;
    for (const auto& [pos, item] : chain) {
        rep.chain.push_back(item);
        if (prev && !(prev->second < item.second)) {
            rep.ok = false;
            rep.violations.push_back(prev->first + " >= " + item.first);
        }
        prev = &chain.at(pos);
    }
    return rep;
}

}  // namespace smirnov
