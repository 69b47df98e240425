#pragma once
// Genus-0 Fuchsian equation on the punctured sphere:
//
//     u'' + (1/2) r(z) u = 0,
//     r(z) = sum_i [ 1/(2 (z - z_i)^2) + c_i / (z - z_i) ],
//
// with the accessory coefficients c_i constrained by
//     sum c_i = 0   and   sum z_i c_i = 1 - n/2.
//
// The four-puncture case {0, a, 1, inf} with 0 < a < 1 admits the
// one-parameter family c(lambda) below and the self-adjoint normal form
//     (p y')' + (z + lambda) y = 0,   p(z) = z (z - a)(z - 1),
// related to the u-equation by u = sqrt(p) * y.

#include <algorithm>
#include <random>

#include "smirnov/core.hpp"

namespace smirnov {

// Finite punctures z_1,...,z_{n-1}; the n-th puncture is infinity.
struct PuncturedSphere {
    std::vector<cplx> punctures;

    int n() const { return static_cast<int>(punctures.size()) + 1; }

    static PuncturedSphere four_point(double a) {
        if (!(a > 0.0 && a < 1.0))
            throw std::domain_error("four_point: modulus a must lie in (0,1)");
        return PuncturedSphere{{cplx(0.0), cplx(a), cplx(1.0)}};
    }

    void validate() const {
        const int m = static_cast<int>(punctures.size());
        if (m < 2) throw std::domain_error("PuncturedSphere: need n >= 3");
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                if (std::abs(punctures[i] - punctures[j]) < 1e-14)
                    throw std::domain_error("PuncturedSphere: coincident punctures");
    }
};

// Accessory coefficients paired with the finite punctures.
struct AccessoryVector {
    std::vector<cplx> c;
};

struct ConstraintReport {
    double sum_defect = 0.0;     // | sum c_i |
    double moment_defect = 0.0;  // | sum z_i c_i - (1 - n/2) |
    bool ok = false;
};

// Closed forms for the four-puncture family:
//   c_1 = 1 + (1+2L)/a,  c_2 = (1+2L)/(a(a-1)),  c_3 = -(a+2L)/(a-1).
inline AccessoryVector accessory_from_lambda(double a, double lambda) {
    if (!(a > 0.0 && a < 1.0))
        throw std::domain_error("accessory_from_lambda: a must lie in (0,1)");
    const double s = 1.0 + 2.0 * lambda;
    AccessoryVector v;
    v.c = {cplx(1.0 + s / a),
           cplx(s / (a * (a - 1.0))),
           cplx(-(a + 2.0 * lambda) / (a - 1.0))};
    return v;
}

inline ConstraintReport validate_constraints(const PuncturedSphere& s,
                                             const AccessoryVector& acc,
                                             double tol = 1e-10) {
    if (s.punctures.size() != acc.c.size())
        throw std::invalid_argument("validate_constraints: length mismatch");
    cplx sum = 0.0, moment = 0.0;
    for (size_t i = 0; i < acc.c.size(); ++i) {
        sum += acc.c[i];
        moment += s.punctures[i] * acc.c[i];
    }
    ConstraintReport rep;
    rep.sum_defect = std::abs(sum);
    rep.moment_defect = std::abs(moment - (1.0 - 0.5 * s.n()));
    rep.ok = rep.sum_defect <= tol && rep.moment_defect <= tol;
    return rep;
}

// The rational coefficient of u'' + (1/2) r u = 0.
inline cplx coefficient_r(cplx z, const PuncturedSphere& s, const AccessoryVector& acc) {
    if (s.punctures.size() != acc.c.size())
        throw std::invalid_argument("coefficient_r: length mismatch");
    cplx r = 0.0;
    for (size_t i = 0; i < acc.c.size(); ++i) {
        const cplx t = z - s.punctures[i];
        if (std::abs(t) < 1e-13 * std::max(1.0, std::abs(z)))
            throw pole_error("coefficient_r: z at a puncture");
        r += 0.5 / (t * t) + acc.c[i] / t;
    }
    return r;
}

// Four real punctures {0, a, 1, inf} with real accessory parameter lambda.
struct SmirnovEquation {
    double a = 0.5;
    double lambda = 0.0;

    SmirnovEquation() = default;
    SmirnovEquation(double a_, double lambda_) : a(a_), lambda(lambda_) {
        if (!(a > 0.0 && a < 1.0))
            throw std::domain_error("SmirnovEquation: a must lie in (0,1)");
    }

    // p(z) = z(z-a)(z-1) = z^3 - (1+a) z^2 + a z
    cplx p(cplx z) const { return z * (z - a) * (z - 1.0); }
    cplx dp(cplx z) const { return 3.0 * z * z - 2.0 * (1.0 + a) * z + a; }
    cplx d2p(cplx z) const { return 6.0 * z - 2.0 * (1.0 + a); }

    PuncturedSphere sphere() const { return PuncturedSphere::four_point(a); }
    AccessoryVector accessory() const { return accessory_from_lambda(a, lambda); }

    cplx r(cplx z) const {
        // Inlined coefficient sum; hot path for transport.
        const double s = 1.0 + 2.0 * lambda;
        const cplx t0 = z, t1 = z - a, t2 = z - 1.0;
        const double scale = std::max(1.0, std::abs(z));
        if (std::abs(t0) < 1e-13 * scale || std::abs(t1) < 1e-13 * scale ||
            std::abs(t2) < 1e-13 * scale)
            throw pole_error("SmirnovEquation::r: z at a puncture");
        const double c1 = 1.0 + s / a;
        const double c2 = s / (a * (a - 1.0));
        const double c3 = -(a + 2.0 * lambda) / (a - 1.0);
        return 0.5 / (t0 * t0) + c1 / t0 + 0.5 / (t1 * t1) + c2 / t1 +
               0.5 / (t2 * t2) + c3 / t2;
    }

    std::array<double, 3> finite_punctures() const { return {0.0, a, 1.0}; }

    double min_puncture_distance(cplx z) const {
        return std::min({std::abs(z), std::abs(z - a), std::abs(z - 1.0)});
    }

    // Branch of sqrt(p) with cuts along [0,a] and [1,inf):
    //   sqrt_p = -i * sqrt(z) * sqrt(a-z) * sqrt(z-1)   (principal factors).
    // On the top side of (0,a) this is the positive root of p > 0.
    cplx sqrt_p(cplx z) const {
        return cplx(0.0, -1.0) * std::sqrt(z) * std::sqrt(cplx(a) - z) *
               std::sqrt(z - cplx(1.0));
    }
};

// u = sqrt(p) y maps solutions of (p y')' + (z+lambda) y = 0 to solutions of
// u'' + (1/2) r u = 0 and back. Evaluation must stay off the sqrt_p cuts.
inline ValueDeriv u_from_y(const SmirnovEquation& eq, const ValueDeriv& y, cplx z) {
    const cplx s = eq.sqrt_p(z);
    if (std::abs(s) < 1e-150) throw branch_error("u_from_y: sqrt(p) vanishes at z");
    const cplx h = eq.dp(z) / (2.0 * eq.p(z));  // s'/s
    return {s * y.y, s * (y.dy + h * y.y)};
}

inline ValueDeriv y_from_u(const SmirnovEquation& eq, const ValueDeriv& u, cplx z) {
    const cplx s = eq.sqrt_p(z);
    if (std::abs(s) < 1e-150) throw branch_error("y_from_u: sqrt(p) vanishes at z");
    const cplx h = eq.dp(z) / (2.0 * eq.p(z));
    return {u.y / s, (u.dy - h * u.y) / s};
}

}  // namespace smirnov
