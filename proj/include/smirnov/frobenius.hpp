#pragma once
// Local solution bases of the self-adjoint equation
//
//     (p y')' + (z + lambda) y = 0,   p(z) = z (z - a)(z - 1),
//
// at the four singular points {0, a, 1, inf}. Every point has equal
// indicial exponents (0 doubled at the finite points, 1 doubled at
// infinity in w = 1/z), so the basis is
//
//     y1 = 1 + sum a_k t^k           (finite; t = z - z_i)
//     y2 = y1 * log(t) + ytilde,     ytilde = sum_{k>=1} b_k t^k
//
// and at infinity, with w = 1/z,
//
//     y1 = w + sum_{k>=2} A_k w^k
//     y2 = y1 * log(w) + ytilde,     ytilde = sum_{k>=2} B_k w^k.
//
// The log branch is tracked as an integer offset: the log term evaluates
// as Log(t) + i*pi*offset with Log the principal branch. Offset -1 at the
// point a reproduces log(a - z) for real z < a; offset 0 gives log(z - a).

#include "smirnov/equation.hpp"

namespace smirnov {

enum class SingularPoint { Zero = 0, A = 1, One = 2, Infinity = 3 };

inline const char* to_string(SingularPoint p) {
    switch (p) {
        case SingularPoint::Zero: return "0";
        case SingularPoint::A: return "a";
        case SingularPoint::One: return "1";
        default: return "inf";
    }
}

struct LocalBasis {
    SingularPoint point = SingularPoint::Zero;
    double a = 0.5;
    double lambda = 0.0;
    int order = 0;               // highest stored power
    double radius = 0.0;         // trusted evaluation radius (|t| or |w|)
    double center = 0.0;         // z_i for the finite points
    std::vector<double> holo;    // y1 coefficients, index = power
    std::vector<double> tilde;   // ytilde coefficients, index = power

    bool at_infinity() const { return point == SingularPoint::Infinity; }

    // Conserved p-weighted Wronskian of (y1, y2); exact by construction.
    double basis_wronskian() const {
        if (at_infinity()) return -1.0;
        // p'(z_i)
        const double z = center;
        return 3.0 * z * z - 2.0 * (1.0 + a) * z + a;
    }

    // Local coordinate of z: t = z - z_i, or w = 1/z at infinity.
    cplx local(cplx z) const { return at_infinity() ? 1.0 / z : z - center; }

    struct Values {
        ValueDeriv y1, y2;  // z-derivatives in both charts
    };

    // Evaluate (y1, y2) and their z-derivatives; log term = Log + i*pi*offset.
    Values eval(cplx z, int log_offset) const {
        const cplx t = local(z);
        if (std::abs(t) > radius)
            throw std::domain_error("LocalBasis::eval: outside basis disk");
        if (std::abs(t) == 0.0)
            throw pole_error("LocalBasis::eval: at the singular point");

        // Horner for value and local derivative of both series.
        auto series = [&](const std::vector<double>& c) {
            cplx v = 0.0, dv = 0.0;
            for (int k = order; k >= 0; --k) {
                dv = dv * t + v;
                v = v * t + (k < static_cast<int>(c.size()) ? c[k] : 0.0);
            }
            return std::pair<cplx, cplx>(v, dv);
        };
        auto [y1, dy1] = series(holo);
        auto [yt, dyt] = series(tilde);
        const cplx L = std::log(t) + cplx(0.0, pi * log_offset);
        const cplx y2 = y1 * L + yt;
        const cplx dy2 = dy1 * L + y1 / t + dyt;

        Values out;
        if (!at_infinity()) {
            out.y1 = {y1, dy1};
            out.y2 = {y2, dy2};
        } else {
            const cplx f = -t * t;  // dw/dz = -w^2
            out.y1 = {y1, f * dy1};
            out.y2 = {y2, f * dy2};
        }
        return out;
    }
};

namespace detail {

// Tail estimate: largest contribution of the top coefficients at |t| = R.
inline double series_tail(const LocalBasis& b, double R) {
    double tail = 0.0;
    const int n = b.order;
    for (int k = std::max(1, n - 3); k <= n; ++k) {
        const double ak = k < static_cast<int>(b.holo.size()) ? std::abs(b.holo[k]) : 0.0;
        const double bk = k < static_cast<int>(b.tilde.size()) ? std::abs(b.tilde[k]) : 0.0;
        tail = std::max(tail, (ak + bk) * std::pow(R, k));
    }
    return tail;
}

inline void fill_finite(LocalBasis& b, int order) {
    const double p1 = b.basis_wronskian();                    // p'(z_i)
    const double p2 = 3.0 * b.center - (1.0 + b.a);           // p''(z_i)/2
    const double q0 = b.center + b.lambda;
    auto& A = b.holo;
    auto& B = b.tilde;
    A.assign(order + 1, 0.0);
    B.assign(order + 1, 0.0);
    A[0] = 1.0;
    B[0] = 0.0;
    for (int m = 0; m < order; ++m) {
        const double am = A[m];
        const double am1 = m >= 1 ? A[m - 1] : 0.0;
        A[m + 1] = -((p2 * m * (m + 1) + q0) * am + double(m) * m * am1) /
                   (p1 * double(m + 1) * (m + 1));
        const double g = 2.0 * p1 * (m + 1) * A[m + 1] + p2 * (2 * m + 1) * am +
                         2.0 * m * am1;
        const double bm = B[m];
        const double bm1 = m >= 1 ? B[m - 1] : 0.0;
        B[m + 1] = -(g + (p2 * m * (m + 1) + q0) * bm + double(m) * m * bm1) /
                   (p1 * double(m + 1) * (m + 1));
        if (!std::isfinite(A[m + 1]) || !std::isfinite(B[m + 1]))
            throw non_convergence_error("local_basis: coefficient overflow");
    }
    b.order = order;
}

inline void fill_infinity(LocalBasis& b, int order) {
    const double a = b.a;
    const double lam = b.lambda;
    auto& A = b.holo;
    auto& B = b.tilde;
    A.assign(order + 1, 0.0);
    B.assign(order + 1, 0.0);
    if (order >= 1) A[1] = 1.0;
    for (int m = 2; m <= order; ++m) {
        const double k1 = lam - (1.0 + a) * (m - 1) * (m - 2);
        const double k2 = a * double(m - 2) * (m - 2);
        A[m] = -(k1 * A[m - 1] + k2 * A[m - 2]) / (double(m - 1) * (m - 1));
        const double G = 2.0 * (m - 1) * A[m] - (1.0 + a) * (2 * m - 3) * A[m - 1] +
                         2.0 * a * (m - 2) * A[m - 2];
        B[m] = -(G + k1 * B[m - 1] + k2 * B[m - 2]) / (double(m - 1) * (m - 1));
        if (!std::isfinite(A[m]) || !std::isfinite(B[m]))
            throw non_convergence_error("local_basis: coefficient overflow");
    }
    b.order = order;
}

}  // namespace detail

// Construct the local basis. order = 0 selects the adaptive default:
// start at 24 terms and double until the tail at the evaluation radius
// drops below 1e-14.
inline LocalBasis local_basis(const SmirnovEquation& eq, SingularPoint pt,
                              int order = 0) {
    LocalBasis b;
    b.point = pt;
    b.a = eq.a;
    b.lambda = eq.lambda;
    switch (pt) {
        case SingularPoint::Zero:
            b.center = 0.0;
            b.radius = 0.45 * eq.a;
            break;
        case SingularPoint::A:
            b.center = eq.a;
            b.radius = 0.45 * std::min(eq.a, 1.0 - eq.a);
            break;
        case SingularPoint::One:
            b.center = 1.0;
            b.radius = 0.45 * (1.0 - eq.a);
            break;
        case SingularPoint::Infinity:
            b.center = 0.0;
            b.radius = 0.45;  // nearest singularity of the w-chart is w = 1
            break;
    }
    const bool adaptive = order <= 0;
    int n = adaptive ? 24 : order;
    if (!adaptive && n < 8)
        throw std::invalid_argument("local_basis: order must be >= 8");
    for (;;) {
        if (pt == SingularPoint::Infinity)
            detail::fill_infinity(b, n);
        else
            detail::fill_finite(b, n);
        if (!adaptive || detail::series_tail(b, b.radius) < 1e-14 || n >= 1536)
            break;
        n *= 2;
    }
    return b;
}

// A solution written in a local basis: alpha*y1 + beta*y2 with a fixed log
// branch offset.
struct SolutionRepr {
    LocalBasis basis;
    cplx alpha{1.0};
    cplx beta{0.0};
    int log_offset = 0;
};

inline ValueDeriv evaluate(const SolutionRepr& r, cplx z) {
    const auto v = r.basis.eval(z, r.log_offset);
    return r.alpha * v.y1 + r.beta * v.y2;
}

// Smirnov's real continuation through the singular point: a solution with
// real (alpha, beta) written with log(z_i - z) for z < z_i (offset -1)
// keeps its coefficients and switches to log(z - z_i) (offset 0).
inline SolutionRepr real_continuation(const SolutionRepr& left) {
    if (left.basis.at_infinity())
        throw std::invalid_argument("real_continuation: finite points only");
    if (left.log_offset != -1)
        throw branch_error("real_continuation: expected left log convention (offset -1)");
    const double sc = std::max({1.0, std::abs(left.alpha), std::abs(left.beta)});
    if (std::abs(left.alpha.imag()) > 1e-11 * sc || std::abs(left.beta.imag()) > 1e-11 * sc)
        throw branch_error("real_continuation: coefficients must be real");
    SolutionRepr right = left;
    right.alpha = left.alpha.real();
    right.beta = left.beta.real();
    right.log_offset = 0;
    return right;
}

// Conserved p-weighted Wronskian p(z) (f g' - f' g); z-independent for any
// two solutions of the same equation.
inline cplx p_wronskian(const SmirnovEquation& eq, const ValueDeriv& f,
                        const ValueDeriv& g, cplx z) {
    return eq.p(z) * (f.y * g.dy - f.dy * g.y);
}

// Express f (given by value and z-derivative at z inside the basis disk) in
// the local basis: f = alpha y1 + beta y2. The denominator is the basis
// Wronskian, exactly p'(z_i) (finite) or -1 (infinity).
inline std::pair<cplx, cplx> connection_coefficients(const SmirnovEquation& eq,
                                                     const LocalBasis& basis,
                                                     const ValueDeriv& f, cplx z,
                                                     int log_offset) {
    const auto v = basis.eval(z, log_offset);
    const double wb = basis.basis_wronskian();
    const cplx alpha = p_wronskian(eq, f, v.y2, z) / wb;
    const cplx beta = -p_wronskian(eq, f, v.y1, z) / wb;
    return {alpha, beta};
}

}  // namespace smirnov
