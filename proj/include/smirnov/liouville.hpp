#pragma once
// Liouville fields of real-monodromy equations. With a Wronskian-normalized
// solution pair (v1, v2) whose monodromy is real,
//
//     chi = Im(v1 * conj(v2)) = e^{-phi/2},   e^{phi} = 1/chi^2,
//
// is real and single-valued on the punctured sphere (up to one global sign,
// fixed positive at the base point). The Fuchsian field (lambda = lambda_0)
// has chi > 0 everywhere; at the other spectral points chi changes sign on
// the singular contours chi = 0.

#include "smirnov/frobenius.hpp"
#include "smirnov/monodromy.hpp"

namespace smirnov {

// Equation + real-conjugated, sign-fixed initial basis at the base point.
struct LiouvilleField {
    SmirnovEquation eq;
    cplx base{0.0, 1.0};
    Mat2 basis_init;  // (v1,v2) = (u1,u2) * basis_init at base; det = 1
    MonodromyRep rep;
    Conjugation conj;
    double realness = 0.0;
};

inline double chi_of(const PairState& st) {
    return std::imag(st.f.y * std::conj(st.g.y));
}

inline cplx chi_z_of(const PairState& st) {
    const cplx w = st.f.dy * std::conj(st.g.y) - std::conj(st.f.y) * st.g.dy;
    return w / cplx(0.0, 2.0);
}

inline LiouvilleField make_field(const SmirnovEquation& eq, cplx base = cplx(0.0, 1.0),
                                 double defect_tol = 1e-6) {
    LiouvilleField f;
    f.eq = eq;
    f.base = base;
    f.rep = monodromy_rep(eq, base);
    f.realness = realness_defect(f.rep);
    f.conj = conjugate_to_real(f.rep, defect_tol);
    Mat2 C = f.conj.q.inverse();
    // chi at the base from the initial data; flip the global sign if needed.
    const double chi0 = std::imag(C.a * std::conj(C.b));
    if (std::abs(chi0) < 1e-12)
        throw non_convergence_error("make_field: base point sits on a contour");
    if (chi0 < 0.0) {
        const cplx mi(0.0, -1.0), pi_(0.0, 1.0);
        C = Mat2{C.a * mi, C.b * pi_, C.c * mi, C.d * pi_};
    }
    f.basis_init = C;
    return f;
}

// Arbitrary-point evaluation of the transported pair. Keeps a cursor so
// that nearby successive queries continue incrementally; far queries are
// re-routed from the base point along puncture-safe polylines.
class ChiEvaluator {
  public:
    explicit ChiEvaluator(const LiouvilleField& f, double tol = 1e-12)
        : fld_(&f), tol_(tol) {}

    PairState state_at(cplx z) {
        const double dz = fld_->eq.min_puncture_distance(z);
        if (dz < 1e-8) throw pole_error("ChiEvaluator: query at a puncture");
        if (have_) {
            const double hop = std::abs(z - cursor_);
            const double dc = fld_->eq.min_puncture_distance(cursor_);
            if (hop <= 0.5 * std::min(dz, dc)) {
                if (hop > 0.0) {
                    Path seg{{cursor_, z}};
                    state_ = transport_pair_u(fld_->eq, seg, state_, tol_);
                    cursor_ = z;
                }
                return state_;
            }
        }
        Path path = route_from_base(z);
        PairState st{{fld_->basis_init.a, fld_->basis_init.c},
                     {fld_->basis_init.b, fld_->basis_init.d}};
        state_ = transport_pair_u(fld_->eq, path, st, tol_);
        cursor_ = z;
        have_ = true;
        return state_;
    }

    double chi(cplx z) { return chi_of(state_at(z)); }
    cplx chi_z(cplx z) { return chi_z_of(state_at(z)); }

    const LiouvilleField& field() const { return *fld_; }

  private:
    Path route_from_base(cplx z) const {
        const cplx base = fld_->base;
        Path p;
        p.waypoints.push_back(base);
        if (z.imag() >= 0.0) {
            const double Y = std::max(0.35, z.imag());
            p.waypoints.push_back(cplx(z.real(), Y));
        } else {
            p.waypoints.push_back(cplx(-0.5, 0.35));
            p.waypoints.push_back(cplx(-0.5, -0.35));
            p.waypoints.push_back(cplx(z.real(), std::min(-0.35, z.imag())));
        }
        if (std::abs(p.waypoints.back() - z) > 0.0) p.waypoints.push_back(z);
        return p;
    }

    const LiouvilleField* fld_;
    double tol_;
    cplx cursor_{0.0, 0.0};
    PairState state_;
    bool have_ = false;
};

struct GridSpec {
    double x0 = -0.8, y0 = -1.2, x1 = 1.8, y1 = 1.2;
    int nx = 400, ny = 400;
    double mask_cells = 2.0;  // puncture mask radius in grid steps
};

struct FieldGrid {
    GridSpec spec;
    double a = 0.5, lambda = 0.0;
    std::vector<double> chi;
    std::vector<cplx> chi_z;
    std::vector<uint8_t> mask;  // 1 = excluded (puncture disk)
    double closure_defect = 0.0;

    int idx(int i, int j) const { return j * spec.nx + i; }
    double hx() const { return (spec.x1 - spec.x0) / (spec.nx - 1); }
    double hy() const { return (spec.y1 - spec.y0) / (spec.ny - 1); }
    double x(int i) const { return spec.x0 + i * hx(); }
    double y(int j) const { return spec.y0 + j * hy(); }
    cplx z(int i, int j) const { return {x(i), y(j)}; }
    double mask_radius() const { return spec.mask_cells * std::max(hx(), hy()); }
    double phi(int k) const { return -2.0 * std::log(std::abs(chi[k])); }
    double chi_max() const {
        double m = 0.0;
        for (size_t k = 0; k < chi.size(); ++k)
            if (!mask[k]) m = std::max(m, std::abs(chi[k]));
        return m;
    }
};

namespace detail {

// Row advance with a vertical detour when the straight segment would pass
// a puncture inside the blocked radius.
inline PairState advance_row(const SmirnovEquation& eq, const PairState& st,
                             double x1, double x2, double y, double blocked,
                             double tol) {
    Path p;
    bool need_detour = false;
    for (double zp : eq.finite_punctures())
        if (segment_distance(cplx(x1, y), cplx(x2, y), cplx(zp)) < blocked)
            need_detour = true;
    if (!need_detour) {
        p.waypoints = {cplx(x1, y), cplx(x2, y)};
    } else {
        const double s = y >= 0.0 ? 1.0 : -1.0;
        const double H = s * std::max(2.5 * blocked, 2.0 * std::abs(y));
        p.waypoints = {cplx(x1, y), cplx(x1, H), cplx(x2, H), cplx(x2, y)};
    }
    return transport_pair_u(eq, p, st, tol);
}

}  // namespace detail

// Sample chi and its analytic z-derivative on a rectangular grid by
// row-major continuation. chi is path-independent for a real-monodromy
// basis, so detours around the masked puncture disks are harmless; the
// closure defect compares an independently continued right-edge column
// against the row sweep.
inline FieldGrid chi_field(const LiouvilleField& fld, const GridSpec& spec,
                           double tol = 1e-12) {
    if (spec.nx < 16 || spec.ny < 16)
        throw std::invalid_argument("chi_field: grid too small");
    FieldGrid g;
    g.spec = spec;
    g.a = fld.eq.a;
    g.lambda = fld.eq.lambda;
    const int nx = spec.nx, ny = spec.ny;
    g.chi.assign(size_t(nx) * ny, 0.0);
    g.chi_z.assign(size_t(nx) * ny, cplx(0.0));
    g.mask.assign(size_t(nx) * ny, 0);

    const double mr = g.mask_radius();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (fld.eq.min_puncture_distance(g.z(i, j)) < mr) g.mask[g.idx(i, j)] = 1;

    // Anchor column: the x-column with the best clearance from punctures.
    int ic = 0;
    double best = -1.0;
    for (int i = 0; i < nx; ++i) {
        double c = std::numeric_limits<double>::max();
        for (double zp : fld.eq.finite_punctures()) c = std::min(c, std::abs(g.x(i) - zp));
        if (c > best) {
            best = c;
            ic = i;
        }
    }
    if (best < 3.0 * mr)
        throw std::invalid_argument("chi_field: no puncture-free anchor column");

    const PairState init{{fld.basis_init.a, fld.basis_init.c},
                         {fld.basis_init.b, fld.basis_init.d}};

    // Anchor states down the column from a high entry point.
    std::vector<PairState> anchors(ny);
    {
        const double xa = g.x(ic);
        const double H = std::max(1.4, g.y(ny - 1) + 0.2);
        Path entry{{fld.base, cplx(xa, H), cplx(xa, g.y(ny - 1))}};
        anchors[ny - 1] = transport_pair_u(fld.eq, entry, init, tol);
        for (int j = ny - 2; j >= 0; --j) {
            Path seg{{cplx(xa, g.y(j + 1)), cplx(xa, g.y(j))}};
            anchors[j] = transport_pair_u(fld.eq, seg, anchors[j + 1], tol);
        }
    }

    auto store = [&](int i, int j, const PairState& st) {
        const int k = g.idx(i, j);
        g.chi[k] = chi_of(st);
        g.chi_z[k] = chi_z_of(st);
    };

    for (int j = 0; j < ny; ++j) {
        const double yy = g.y(j);
        store(ic, j, anchors[j]);
        // rightward, then leftward from the anchor
        for (int dir : {+1, -1}) {
            PairState cur = anchors[j];
            double xcur = g.x(ic);
            for (int i = ic + dir; i >= 0 && i < nx; i += dir) {
                if (g.mask[g.idx(i, j)]) continue;  // advance later in one hop
                cur = detail::advance_row(fld.eq, cur, xcur, g.x(i), yy, mr, tol);
                xcur = g.x(i);
                store(i, j, cur);
            }
        }
    }

    // Closure diagnostic along the right edge.
    {
        double c = std::numeric_limits<double>::max();
        for (double zp : fld.eq.finite_punctures())
            c = std::min(c, std::abs(g.x(nx - 1) - zp));
        if (c > 3.0 * mr) {
            const double xa = g.x(nx - 1);
            const double H = std::max(1.4, g.y(ny - 1) + 0.2);
            Path entry{{fld.base, cplx(xa, H), cplx(xa, g.y(ny - 1))}};
            PairState st = transport_pair_u(fld.eq, entry, init, tol);
            const double scale = std::max(1e-30, std::abs(chi_of(st)));
            double defect = std::abs(chi_of(st) - g.chi[g.idx(nx - 1, ny - 1)]) / scale;
            int jprev = ny - 1;
            for (int j = ny - 2; j >= 0; j -= 8) {
                Path seg{{cplx(xa, g.y(jprev)), cplx(xa, g.y(j))}};
                st = transport_pair_u(fld.eq, seg, st, tol);
                jprev = j;
                const double ref = g.chi[g.idx(nx - 1, j)];
                const double sc = std::max({1e-30, std::abs(ref), std::abs(chi_of(st))});
                defect = std::max(defect, std::abs(chi_of(st) - ref) / sc);
            }
            g.closure_defect = defect;
            if (defect > 1e-4)
                throw non_convergence_error(
                    "chi_field: branch inconsistency, closure defect " +
                    std::to_string(defect));
        }
    }
    return g;
}

struct ResidualReport {
    double liouville = 0.0;  // max |phi_zzbar - e^phi/2| (finite differences)
    double chi_pde = 0.0;    // max |-chi chi_zzbar + |chi_z|^2 - 1/4|
    double chi_ode = 0.0;    // max |chi_zz + r chi / 2| (analytic derivatives)
    int points_checked = 0;
};

// Finite-difference residuals on the grid plus the analytic second-
// derivative check at sampled points (Cauchy integral of the transported
// first derivative around small circles, independent of the equation at
// the sample point).
inline ResidualReport residuals(const LiouvilleField& fld, const FieldGrid& g,
                                double exclusion = 0.05, int ode_samples = 6) {
    ResidualReport rep;
    const int nx = g.spec.nx, ny = g.spec.ny;
    const double hx = g.hx(), hy = g.hy();
    const double floor = 0.03 * g.chi_max();

    for (int j = 1; j + 1 < ny; ++j) {
        for (int i = 1; i + 1 < nx; ++i) {
            const int kC = g.idx(i, j), kE = g.idx(i + 1, j), kW = g.idx(i - 1, j),
                      kN = g.idx(i, j + 1), kS = g.idx(i, j - 1);
            if (g.mask[kC] || g.mask[kE] || g.mask[kW] || g.mask[kN] || g.mask[kS])
                continue;
            if (fld.eq.min_puncture_distance(g.z(i, j)) < exclusion) continue;
            // chi-PDE residual: valid across contours.
            const double lap_chi = (g.chi[kE] - 2.0 * g.chi[kC] + g.chi[kW]) / (hx * hx) +
                                   (g.chi[kN] - 2.0 * g.chi[kC] + g.chi[kS]) / (hy * hy);
            const double res_chi = -g.chi[kC] * 0.25 * lap_chi +
                                   std::norm(g.chi_z[kC]) - 0.25;
            rep.chi_pde = std::max(rep.chi_pde, std::abs(res_chi));
            // phi residual only where the stencil stays off the zero set.
            const double c = g.chi[kC];
            if (std::abs(c) < floor) continue;
            const bool same_sign = (g.chi[kE] > 0) == (c > 0) &&
                                   (g.chi[kW] > 0) == (c > 0) &&
                                   (g.chi[kN] > 0) == (c > 0) &&
                                   (g.chi[kS] > 0) == (c > 0);
            if (!same_sign) continue;
            const double lap_phi = (g.phi(kE) - 2.0 * g.phi(kC) + g.phi(kW)) / (hx * hx) +
                                   (g.phi(kN) - 2.0 * g.phi(kC) + g.phi(kS)) / (hy * hy);
            const double res_phi = 0.25 * lap_phi - 0.5 / (c * c);
            rep.liouville = std::max(rep.liouville, std::abs(res_phi));
        }
    }

    // Analytic chi_zz via Cauchy differentiation of the transported pair.
    ChiEvaluator ev(fld);
    std::vector<cplx> samples;
    for (int j = 0; j < ny && static_cast<int>(samples.size()) < ode_samples; j += ny / 7) {
        for (int i = 0; i < nx && static_cast<int>(samples.size()) < ode_samples;
             i += nx / 7) {
            const cplx z = g.z(i, j);
            if (!g.mask[g.idx(i, j)] && fld.eq.min_puncture_distance(z) > 0.15)
                samples.push_back(z);
        }
    }
    for (const cplx z : samples) {
        const PairState st = ev.state_at(z);
        const double rho = 0.08;
        cplx d2f = 0.0, d2g = 0.0;
        const int M = 16;
        for (int k = 0; k < M; ++k) {
            const double th = 2.0 * pi * k / M;
            const PairState s2 = ev.state_at(z + rho * std::polar(1.0, th));
            d2f += s2.f.dy * std::polar(1.0, -th);
            d2g += s2.g.dy * std::polar(1.0, -th);
        }
        d2f /= (M * rho);
        d2g /= (M * rho);
        const cplx chi_zz =
            (d2f * std::conj(st.g.y) - std::conj(st.f.y) * d2g) / cplx(0.0, 2.0);
        const cplx res = chi_zz + 0.5 * fld.eq.r(z) * chi_of(st);
        rep.chi_ode = std::max(rep.chi_ode, std::abs(res));
        ++rep.points_checked;
    }
    return rep;
}

struct AsymptoticsReport {
    SingularPoint puncture;
    std::vector<double> radii;
    std::vector<double> phi_defect;  // phi + 2 log r + 2 log|log r|
    std::vector<double> chi_ratio;   // chi / (r |log r|)
    bool defect_decreasing = false;
    double final_defect = 0.0;
};

// Connection of the field basis to the local series at one puncture; used
// for evaluation at radii far below the grid scale.
struct PunctureSeries {
    LocalBasis basis;
    cplx alpha1, beta1, alpha2, beta2;  // (v1, v2) as y-solutions

    // chi = |p| Im(Y1 conj(Y2)); the sqrt(p) branch cancels in the product.
    double chi(const SmirnovEquation& eq, cplx z) const {
        const auto Y1 = eval1(z), Y2 = eval2(z);
        return std::abs(eq.p(z)) * std::imag(Y1.y * std::conj(Y2.y));
    }
    cplx chi_z(const SmirnovEquation& eq, cplx z) const {
        const auto Y1 = eval1(z), Y2 = eval2(z);
        const double ap = std::abs(eq.p(z));
        const double c = ap * std::imag(Y1.y * std::conj(Y2.y));
        const cplx w = Y1.dy * std::conj(Y2.y) - std::conj(Y1.y) * Y2.dy;
        return eq.dp(z) / (2.0 * eq.p(z)) * c + ap * w / cplx(0.0, 2.0);
    }
    ValueDeriv eval1(cplx z) const {
        const auto v = basis.eval(z, 0);
        return alpha1 * v.y1 + beta1 * v.y2;
    }
    ValueDeriv eval2(cplx z) const {
        const auto v = basis.eval(z, 0);
        return alpha2 * v.y1 + beta2 * v.y2;
    }

    // Local coefficients of Im(Y1 conj(Y2)) = A + B log r + C log^2 r + ...
    // At real monodromy C vanishes and chi = |p'| |B| r (L - mu) near the
    // puncture with the cusp width log mu = A/B; |p' B| = 1 exactly.
    double cusp_log_width() const {
        const double A = std::imag(alpha1 * std::conj(alpha2));
        const double B = std::imag(alpha1 * std::conj(beta2) + beta1 * std::conj(alpha2));
        const double C = std::imag(beta1 * std::conj(beta2));
        if (std::abs(C) > 1e-6 * (std::abs(A) + std::abs(B)))
            throw non_convergence_error("cusp_log_width: log^2 coefficient survives");
        return A / B;
    }
};

inline PunctureSeries puncture_series(const LiouvilleField& fld, SingularPoint pt,
                                      ChiEvaluator& ev) {
    PunctureSeries ps;
    ps.basis = local_basis(fld.eq, pt);
    cplx anchor;
    if (pt == SingularPoint::Infinity)
        anchor = cplx(0.0, 1.0 / (0.5 * ps.basis.radius));
    else
        anchor = cplx(ps.basis.center, 0.5 * ps.basis.radius);
    const PairState st = ev.state_at(anchor);
    const ValueDeriv Y1 = y_from_u(fld.eq, st.f, anchor);
    const ValueDeriv Y2 = y_from_u(fld.eq, st.g, anchor);
    std::tie(ps.alpha1, ps.beta1) =
        connection_coefficients(fld.eq, ps.basis, Y1, anchor, 0);
    std::tie(ps.alpha2, ps.beta2) =
        connection_coefficients(fld.eq, ps.basis, Y2, anchor, 0);
    return ps;
}

// Defect of the puncture asymptotics along a ray. For the finite punctures
// r is the distance |z - z_i|; for infinity r = 1/|z|.
inline AsymptoticsReport puncture_asymptotics(const LiouvilleField& fld,
                                              SingularPoint pt,
                                              std::vector<double> radii = {1e-2, 1e-3,
                                                                           1e-4},
                                              double angle = 0.5 * pi) {
    AsymptoticsReport rep;
    rep.puncture = pt;
    rep.radii = radii;
    ChiEvaluator ev(fld);
    const PunctureSeries ps = puncture_series(fld, pt, ev);
    for (double r : radii) {
        cplx z;
        double rr = r;
        if (pt == SingularPoint::Infinity)
            z = std::polar(1.0 / r, angle);
        else
            z = cplx(ps.basis.center) + std::polar(r, angle);
        const double chi = std::abs(ps.chi(fld.eq, z));
        const double L = std::abs(std::log(rr));
        const double ratio = chi / ((pt == SingularPoint::Infinity ? 1.0 / rr : rr) * L);
        rep.chi_ratio.push_back(ratio);
        rep.phi_defect.push_back(-2.0 * std::log(ratio));
    }
    rep.defect_decreasing = true;
    for (size_t i = 1; i < rep.phi_defect.size(); ++i)
        if (std::abs(rep.phi_defect[i]) >= std::abs(rep.phi_defect[i - 1]))
            rep.defect_decreasing = false;
    rep.final_defect = rep.phi_defect.empty() ? 0.0 : rep.phi_defect.back();
    return rep;
}

}  // namespace smirnov
