#include "doctest.h"

#include "helpers.hpp"

using namespace smirnov;
using testing_fixtures::field_half;
using testing_fixtures::spectra_half;

TEST_CASE("residual formulas on the Poincare half-plane field") {
    // chi = Im z solves the chi-form exactly; check the discrete residual
    // formulas on synthetic data.
    const double h = 0.01;
    auto chi = [](cplx z) { return z.imag(); };
    const cplx z0(0.3, 1.7);
    const double lap = (chi(z0 + h) + chi(z0 - h) + chi(z0 + cplx(0, h)) +
                        chi(z0 - cplx(0, h)) - 4.0 * chi(z0)) /
                       (h * h);
    const cplx chi_z(0.0, -0.5);  // d/dz (z - conj z)/(2i)
    const double res_chi = -chi(z0) * 0.25 * lap + std::norm(chi_z) - 0.25;
    CHECK(std::abs(res_chi) < 1e-10);  // FD of a linear function: roundoff only

    auto phi = [&](cplx z) { return -2.0 * std::log(std::abs(chi(z))); };
    const double lap_phi = (phi(z0 + h) + phi(z0 - h) + phi(z0 + cplx(0, h)) +
                            phi(z0 - cplx(0, h)) - 4.0 * phi(z0)) /
                           (h * h);
    const double res_phi = 0.25 * lap_phi - 0.5 / (chi(z0) * chi(z0));
    CHECK(std::abs(res_phi) < 1e-4);  // O(h^2) of the analytic identity
}

TEST_CASE("chi is invariant under real unimodular basis changes") {
    const auto& fld = field_half(spectra_half().lam(1));
    LiouvilleField modified = fld;
    const Mat2 A{2.0, 1.0, 3.0, 2.0};  // real, det 1
    modified.basis_init = fld.basis_init * A;
    ChiEvaluator e1(fld), e2(modified);
    for (const cplx z : {cplx(0.2, 0.4), cplx(-0.3, -0.5), cplx(1.4, 0.2),
                         cplx(0.5, 1.5), cplx(0.7, -1.0)}) {
        const double c1 = e1.chi(z), c2 = e2.chi(z);
        CHECK(std::abs(c1 - c2) <= 1e-12 * (1.0 + std::abs(c1)));
    }
}

TEST_CASE("Fuchsian field is smooth and positive") {
    const auto& fld = field_half(spectra_half().lam(0));
    GridSpec spec;
    spec.nx = spec.ny = 150;
    const FieldGrid g = chi_field(fld, spec);
    double mn = 1e300;
    for (size_t k = 0; k < g.chi.size(); ++k)
        if (!g.mask[k]) mn = std::min(mn, g.chi[k]);
    CHECK(mn > 0.0);
    CHECK(g.closure_defect < 1e-6);
    CHECK(extract_contours(g, 0.5).empty());
}

TEST_CASE("finite-difference residuals shrink at second order") {
    const auto& fld = field_half(spectra_half().lam(0));
    GridSpec coarse;
    coarse.nx = coarse.ny = 150;
    GridSpec fine;
    fine.nx = fine.ny = 299;  // halves the step on the same bbox
    const auto rc = residuals(fld, chi_field(fld, coarse));
    const auto rf = residuals(fld, chi_field(fld, fine));
    CHECK(rc.liouville / rf.liouville == doctest::Approx(4.0).epsilon(0.6));
    CHECK(rc.chi_pde / rf.chi_pde == doctest::Approx(4.0).epsilon(0.6));
    CHECK(rf.chi_ode <= 1e-10);
    CHECK(rf.points_checked >= 4);
}

TEST_CASE("black-hole fields: contours, signs, classification") {
    const auto& s = spectra_half();

    struct Case {
        double lambda;
        int expected;
        std::array<bool, 4> sep;
    };
    const std::array<bool, 4> a1 = {false, true, true, false};  // {a, 1}
    const std::array<bool, 4> za = {true, true, false, false};  // {0, a}
    for (const Case c : {Case{s.mu(1), 1, a1}, Case{s.mu(-1), 1, za},
                         Case{s.lam(1), 2, a1}, Case{s.lam(-1), 2, za}}) {
        const auto& fld = field_half(c.lambda);
        GridSpec spec;  // default bbox; auto-expansion handles the rest
        spec.nx = spec.ny = 320;
        const auto contours = extract_contours(fld, spec);
        REQUIRE(static_cast<int>(contours.size()) == c.expected);
        ChiEvaluator ev(fld);
        for (const auto& ct : contours) {
            CHECK(ct.separates == c.sep);
            CHECK(ct.is_simple());
            CHECK(std::abs(ct.points.front() - ct.points.back()) == 0.0);
            // sign flip across the contour; unit gradient on it
            const ContourPoint cp = refine_contour_point(ev, ct.points[ct.points.size() / 3]);
            CHECK(cp.grad_norm == doctest::Approx(1.0).epsilon(1e-6));
            const double d = 0.01 * ct.diameter();
            const double plus = ev.chi(cp.z0 + d * cp.normal);
            const double minus = ev.chi(cp.z0 - d * cp.normal);
            CHECK(plus * minus < 0.0);
        }
        const Classification cl = classify_solution(fld.eq, s, contours);
        CHECK(cl.contours_match);
        CHECK(cl.observed_contours == c.expected);
    }

    // chi attains both signs at lambda_1
    {
        const auto& fld = field_half(s.lam(1));
        GridSpec spec;
        spec.nx = spec.ny = 200;
        const FieldGrid g = chi_field(fld, spec);
        double mn = 1e300, mx = -1e300;
        for (size_t k = 0; k < g.chi.size(); ++k)
            if (!g.mask[k]) {
                mn = std::min(mn, g.chi[k]);
                mx = std::max(mx, g.chi[k]);
            }
        CHECK(mn < 0.0);
        CHECK(mx > 0.0);
    }
}

TEST_CASE("classification labels") {
    const auto& s = spectra_half();
    {
        const Classification cl =
            classify_solution(SmirnovEquation(0.5, s.lam(0)), s, {});
        CHECK(cl.type == SolutionType::FuchsianUniformizing);
        CHECK(cl.expected_contours == 0);
        CHECK(cl.label == "fuchsian-uniformizing");
    }
    // contour count contradicting the index is a numerical fault
    CHECK_THROWS_AS(classify_solution(SmirnovEquation(0.5, s.mu(1)), s, {}),
                    non_convergence_error);
    // lambda off the spectrum is a usage error
    CHECK_THROWS_AS(classify_solution(SmirnovEquation(0.5, 0.123), s, {}),
                    std::invalid_argument);
}

TEST_CASE("Schwarz model reproduces the classical densities") {
    // straight-line contour: S(z) = z, model = Poincare density of C \ R
    {
        ContourPoint cp;
        cp.z0 = cplx(0.3, 0.0);
        cp.normal = cplx(0.0, 1.0);
        cp.schwarz_d = 1.0;  // conj(T)/T for T = 1
        for (double d : {0.3, 0.05, 0.01}) {
            const cplx z = cp.z0 + cplx(0.0, d);
            const cplx m = schwarz_model(cp, z);
            CHECK(m.real() == doctest::Approx(1.0 / (d * d)).epsilon(1e-12));
            CHECK(std::abs(m.imag()) < 1e-12 / (d * d));
        }
    }
    // unit circle: S(z) = 1/z, model matches the disk density to first order
    {
        const cplx z0 = std::polar(1.0, 0.8);
        ContourPoint cp;
        cp.z0 = z0;
        const cplx T = cplx(0.0, 1.0) * z0;  // tangent
        cp.schwarz_d = std::conj(T) / T;
        cp.normal = -z0;  // inward
        for (double d : {1e-2, 3e-3, 1e-3}) {
            const cplx z = (1.0 - d) * z0;
            const double model = schwarz_model(cp, z).real();
            const double poincare = 4.0 / sqr(1.0 - std::norm(z));
            CHECK(std::abs(poincare / model - 1.0) <= 1.1 * d);
        }
    }
}

TEST_CASE("Schwarz blow-up law on a computed contour") {
    const auto& s = spectra_half();
    const auto& fld = field_half(s.mu(1));
    GridSpec spec;
    spec.nx = spec.ny = 320;
    const auto contours = extract_contours(fld, spec);
    REQUIRE(contours.size() == 1);
    const SchwarzReport rep = schwarz_singularity_check(fld, contours[0]);
    CHECK(rep.ok);
    CHECK(rep.max_ratio_error < 5.0);
    CHECK(rep.probes.size() >= 12);
}

TEST_CASE("puncture asymptotics of the Fuchsian field") {
    // The defect d(r) = phi + 2 log r + 2 log|log r| of the true field is
    // -2 log(1 - mu / |log r|) + O(r): it decays like 1/|log r| with the
    // cusp width mu. At a = 1/2 the widths are -log 4, -log 2, -log 8.
    const auto& fld = field_half(spectra_half().lam(0));
    ChiEvaluator ev(fld);
    const double logs[4] = {-std::log(4.0), -std::log(2.0), -std::log(4.0),
                            -std::log(8.0)};
    int i = 0;
    for (auto pt : {SingularPoint::Zero, SingularPoint::A, SingularPoint::One,
                    SingularPoint::Infinity}) {
        const double mu = puncture_series(fld, pt, ev).cusp_log_width();
        CHECK(mu == doctest::Approx(logs[i]).epsilon(1e-8));
        const auto rep = puncture_asymptotics(fld, pt, {1e-2, 1e-3, 1e-4, 1e-8});
        CHECK(rep.defect_decreasing);
        // defect matches the cusp-width model at every sampled radius
        for (size_t k = 0; k < rep.radii.size(); ++k) {
            const double L = std::abs(std::log(rep.radii[k]));
            const double model = -2.0 * std::log(1.0 - mu / L);
            CHECK(rep.phi_defect[k] == doctest::Approx(model).epsilon(2e-3));
        }
        // multiplicative version: chi / (r |log r|) -> 1 monotonically
        CHECK(std::abs(rep.chi_ratio.back() - 1.0) <
              std::abs(rep.chi_ratio.front() - 1.0));
        CHECK(rep.chi_ratio.back() == doctest::Approx(1.0).epsilon(0.15));
        ++i;
    }
}

TEST_CASE("cusp width data certifies the unit asymptotic coefficient") {
    const auto& fld = field_half(spectra_half().lam(0));
    ChiEvaluator ev(fld);
    const double dp[4] = {0.5, 0.25, 0.5, 1.0};  // |p'| at 0, a, 1; 1 at infinity
    int i = 0;
    for (auto pt : {SingularPoint::Zero, SingularPoint::A, SingularPoint::One,
                    SingularPoint::Infinity}) {
        const PunctureSeries ps = puncture_series(fld, pt, ev);
        const double B = std::imag(ps.alpha1 * std::conj(ps.beta2) +
                                   ps.beta1 * std::conj(ps.alpha2));
        CHECK(dp[i] * std::abs(B) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::isfinite(ps.cusp_log_width()));
        ++i;
    }
}

TEST_CASE("series route and transport route agree off the punctures") {
    const auto& fld = field_half(spectra_half().lam(0));
    ChiEvaluator ev(fld);
    const PunctureSeries ps = puncture_series(fld, SingularPoint::A, ev);
    const cplx z = cplx(0.5, 0.08);
    const double c_series = ps.chi(fld.eq, z);
    const double c_transport = ev.chi(z);
    CHECK(c_series == doctest::Approx(c_transport).epsilon(1e-9));
    const cplx dz_series = ps.chi_z(fld.eq, z);
    const cplx dz_transport = ev.chi_z(z);
    CHECK(std::abs(dz_series - dz_transport) < 1e-8 * (1.0 + std::abs(dz_transport)));
}

TEST_CASE("higher index contour counts (2|k| and 2|k|-1)") {
    // The innermost |k| = 2 contours pass within ~0.08 of the punctures and
    // the outermost reach |z| ~ 12, so this needs both a large box and a
    // step small enough that the puncture masks do not clip the contours.
    const auto& s = spectra_half();
    GridSpec spec;
    spec.x0 = -17.0;
    spec.x1 = 18.0;
    spec.y0 = -14.0;
    spec.y1 = 14.0;
    spec.nx = 2200;
    spec.ny = 1760;
    spec.mask_cells = 0.45;  // the lambda_2 inner contour passes at ~0.036
    {
        const auto& fld = field_half(s.mu(2));
        CHECK(extract_contours(fld, spec).size() == 3);
    }
    {
        const auto& fld = field_half(s.lam(2));
        CHECK(extract_contours(fld, spec).size() == 4);
    }
}
