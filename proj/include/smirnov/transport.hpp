#pragma once
// Analytic continuation of solutions along polyline paths in the complex
// plane. Both forms of the equation are supported:
//
//   u-system:  u'' = -(1/2) r(z) u          (single-valued rational r)
//   y-system:  y'' = -(p' y' + (z+L) y)/p   (self-adjoint normal form)
//
// Transport uses an embedded Dormand-Prince 5(4) pair with adaptive step
// control along each straight segment. The scalar type is a template
// parameter: monodromy loops run in extended precision because the
// intermediate solution growth at large |lambda| otherwise floors the
// achievable accuracy of the group relations.

#include "smirnov/equation.hpp"

#if defined(__GNUC__) && defined(__x86_64__)
#include <quadmath.h>
#define SMIRNOV_HAVE_FLOAT128 1
#endif

namespace smirnov {

// Piecewise-linear continuation path.
struct Path {
    std::vector<cplx> waypoints;

    double length() const {
        double L = 0.0;
        for (size_t i = 1; i < waypoints.size(); ++i)
            L += std::abs(waypoints[i] - waypoints[i - 1]);
        return L;
    }

    // Minimum distance from the polyline to any puncture of eq.
    double clearance(const SmirnovEquation& eq) const {
        double c = std::numeric_limits<double>::max();
        for (size_t i = 1; i < waypoints.size(); ++i)
            for (double zp : eq.finite_punctures())
                c = std::min(c, segment_distance(waypoints[i - 1], waypoints[i], cplx(zp)));
        return c;
    }
};

// Two transported solutions (a fundamental pair).
struct PairState {
    ValueDeriv f, g;

    cplx wronskian_u() const { return f.y * g.dy - f.dy * g.y; }
};

namespace detail {

template <class R, int N>
using State = std::array<std::complex<R>, N>;

// Scalar helpers usable for double, long double and __float128.
inline double rsqrt_scalar(double x) { return std::sqrt(x); }
inline long double rsqrt_scalar(long double x) { return std::sqrt(x); }
inline double rpow(double x, double e) { return std::pow(x, e); }
inline long double rpow(long double x, long double e) { return std::pow(x, e); }
#ifdef SMIRNOV_HAVE_FLOAT128
inline __float128 rsqrt_scalar(__float128 x) { return sqrtq(x); }
inline __float128 rpow(__float128 x, __float128 e) { return powq(x, e); }
#endif

template <class R>
inline R rabs(const std::complex<R>& c) {
    return rsqrt_scalar(c.real() * c.real() + c.imag() * c.imag());
}

// One adaptive DP5(4) sweep over the straight segment [z0, z1].
template <class R, int N, class Rhs>
State<R, N> dopri_segment(Rhs&& rhs, std::complex<R> z0, std::complex<R> z1,
                          State<R, N> y, R tol) {
    using C = std::complex<R>;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const C dir = z1 - z0;
    const R seg = rabs(dir);
    if (seg == R(0)) return y;

    auto F = [&](R s, const State<R, N>& v) {
        State<R, N> k = rhs(z0 + s * dir, v);
        for (int i = 0; i < N; ++i) k[i] *= dir;
        return k;
    };

    R s = 0.0;
    R h = 0.1;
    State<R, N> k1 = F(s, y);
    int steps = 0;
    while (s < R(1)) {
        if (s + h > R(1)) h = R(1) - s;
        State<R, N> y2 = y;
        for (int i = 0; i < N; ++i) y2[i] += h * R(a21) * k1[i];
        const State<R, N> k2 = F(s + R(c2) * h, y2);
        State<R, N> y3 = y;
        for (int i = 0; i < N; ++i) y3[i] += h * (R(a31) * k1[i] + R(a32) * k2[i]);
        const State<R, N> k3 = F(s + R(c3) * h, y3);
        State<R, N> y4 = y;
        for (int i = 0; i < N; ++i)
            y4[i] += h * (R(a41) * k1[i] + R(a42) * k2[i] + R(a43) * k3[i]);
        const State<R, N> k4 = F(s + R(c4) * h, y4);
        State<R, N> y5 = y;
        for (int i = 0; i < N; ++i)
            y5[i] += h * (R(a51) * k1[i] + R(a52) * k2[i] + R(a53) * k3[i] +
                          R(a54) * k4[i]);
        const State<R, N> k5 = F(s + R(c5) * h, y5);
        State<R, N> y6 = y;
        for (int i = 0; i < N; ++i)
            y6[i] += h * (R(a61) * k1[i] + R(a62) * k2[i] + R(a63) * k3[i] +
                          R(a64) * k4[i] + R(a65) * k5[i]);
        const State<R, N> k6 = F(s + h, y6);
        State<R, N> y7 = y;
        for (int i = 0; i < N; ++i)
            y7[i] += h * (R(b1) * k1[i] + R(b3) * k3[i] + R(b4) * k4[i] +
                          R(b5) * k5[i] + R(b6) * k6[i]);
        const State<R, N> k7 = F(s + h, y7);

        R err = 0.0;
        for (int i = 0; i < N; ++i) {
            const C e = h * (R(e1) * k1[i] + R(e3) * k3[i] + R(e4) * k4[i] +
                             R(e5) * k5[i] + R(e6) * k6[i] + R(e7) * k7[i]);
            const R sc = tol * (R(1) + std::max(rabs(y[i]), rabs(y7[i])));
            err = std::max(err, rabs(e) / sc);
        }
        if (err <= R(1)) {
            s += h;
            y = y7;
            k1 = k7;  // FSAL
        }
        R fac = R(0.9) * rpow(std::max(err, R(1e-10)), R(-0.2));
        h *= std::clamp(fac, R(0.2), R(5.0));
        if (h < R(1e-13))
            throw non_convergence_error(
                "dopri_segment: step collapse near z = " +
                std::to_string(double((z0 + s * dir).real())) + " + " +
                std::to_string(double((z0 + s * dir).imag())) + "i");
        if (++steps > 2000000)
            throw non_convergence_error("dopri_segment: step budget exhausted");
    }
    return y;
}

template <class R>
struct USystem {
    R a, lambda;
    State<R, 4> operator()(std::complex<R> z, const State<R, 4>& v) const {
        using C = std::complex<R>;
        const R s = R(1) + R(2) * lambda;
        const C t0 = z, t1 = z - a, t2 = z - R(1);
        const R c1 = R(1) + s / a;
        const R c2 = s / (a * (a - R(1)));
        const R c3 = -(a + R(2) * lambda) / (a - R(1));
        const C r = R(0.5) / (t0 * t0) + c1 / t0 + R(0.5) / (t1 * t1) + c2 / t1 +
                    R(0.5) / (t2 * t2) + c3 / t2;
        const C q = -R(0.5) * r;
        return {v[1], q * v[0], v[3], q * v[2]};
    }
};

template <class R>
struct YSystem {
    R a, lambda;
    State<R, 4> operator()(std::complex<R> z, const State<R, 4>& v) const {
        using C = std::complex<R>;
        const C p = z * (z - a) * (z - R(1));
        const C dp = R(3) * z * z - R(2) * (R(1) + a) * z + a;
        const C q = z + lambda;
        return {v[1], -(dp * v[1] + q * v[0]) / p, v[3], -(dp * v[3] + q * v[2]) / p};
    }
};

template <class R, class Sys>
State<R, 4> transport_state(const SmirnovEquation& eq, const Path& path,
                            State<R, 4> v, R tol) {
    if (path.waypoints.size() < 2) return v;
    if (path.clearance(eq) <= 0.0)
        throw std::invalid_argument("transport: path touches a puncture");
    Sys sys{R(eq.a), R(eq.lambda)};
    for (size_t i = 1; i < path.waypoints.size(); ++i)
        v = dopri_segment<R, 4>(
            sys, std::complex<R>(path.waypoints[i - 1].real(), path.waypoints[i - 1].imag()),
            std::complex<R>(path.waypoints[i].real(), path.waypoints[i].imag()), v, tol);
    return v;
}

template <class R, class Sys>
PairState transport(const SmirnovEquation& eq, const Path& path, const PairState& st,
                    double tol) {
    State<R, 4> v{std::complex<R>(st.f.y.real(), st.f.y.imag()),
                  std::complex<R>(st.f.dy.real(), st.f.dy.imag()),
                  std::complex<R>(st.g.y.real(), st.g.y.imag()),
                  std::complex<R>(st.g.dy.real(), st.g.dy.imag())};
    v = transport_state<R, Sys>(eq, path, v, R(tol));
    auto dn = [](std::complex<R> c) { return cplx(double(c.real()), double(c.imag())); };
    return {{dn(v[0]), dn(v[1])}, {dn(v[2]), dn(v[3])}};
}

}  // namespace detail

inline PairState transport_pair_u(const SmirnovEquation& eq, const Path& path,
                                  const PairState& st, double tol = 1e-12) {
    return detail::transport<double, detail::USystem<double>>(eq, path, st, tol);
}

inline PairState transport_pair_y(const SmirnovEquation& eq, const Path& path,
                                  const PairState& st, double tol = 1e-12) {
    return detail::transport<double, detail::YSystem<double>>(eq, path, st, tol);
}

// Transport of a single solution of u'' + (1/2) r u = 0 along a path.
inline ValueDeriv continue_solution(const SmirnovEquation& eq, const Path& path,
                                    const ValueDeriv& init, double tol = 1e-12) {
    PairState st{init, {0.0, 0.0}};
    return transport_pair_u(eq, path, st, tol).f;
}

// Same for the self-adjoint form; used by the shooting solver.
inline ValueDeriv continue_solution_y(const SmirnovEquation& eq, const Path& path,
                                      const ValueDeriv& init, double tol = 1e-12) {
    PairState st{init, {0.0, 0.0}};
    return transport_pair_y(eq, path, st, tol).f;
}

// Counterclockwise polygonal loop around center, based at the topmost point.
inline Path circle_loop(cplx center, double radius, int segments = 32) {
    Path p;
    p.waypoints.reserve(segments + 1);
    for (int k = 0; k <= segments; ++k) {
        const double th = pi / 2 + 2.0 * pi * k / segments;
        p.waypoints.push_back(center + radius * std::polar(1.0, th));
    }
    return p;
}

}  // namespace smirnov
