#pragma once
// Shared scalar types, 2x2 complex matrices and small numeric helpers.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace smirnov {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// An iterative scheme failed to reach its target tolerance.
struct non_convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation point collided with a singular point of the equation.
struct pole_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A branch convention was violated (sqrt/log cut hit, complex data where
// real was required).
struct branch_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Row-major 2x2 complex matrix, [[a, b], [c, d]].
struct Mat2 {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static Mat2 identity() { return {}; }

    cplx det() const { return a * d - b * c; }
    cplx trace() const { return a + d; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator-() const { return {-a, -b, -c, -d}; }

    // Inverse assuming det is not tiny; exact adjugate over det.
    Mat2 inverse() const {
        const cplx dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    Mat2 scaled(cplx s) const { return {s * a, s * b, s * c, s * d}; }

    double max_abs() const {
        return std::max(std::max(std::abs(a), std::abs(b)),
                        std::max(std::abs(c), std::abs(d)));
    }
    double max_imag() const {
        return std::max(std::max(std::abs(a.imag()), std::abs(b.imag())),
                        std::max(std::abs(c.imag()), std::abs(d.imag())));
    }
    double dist(const Mat2& o) const {
        return std::max(std::max(std::abs(a - o.a), std::abs(b - o.b)),
                        std::max(std::abs(c - o.c), std::abs(d - o.d)));
    }
};

// Value and z-derivative of a scalar solution at a point.
struct ValueDeriv {
    cplx y{0.0};
    cplx dy{0.0};
};

inline ValueDeriv operator*(cplx s, const ValueDeriv& v) { return {s * v.y, s * v.dy}; }
inline ValueDeriv operator+(const ValueDeriv& u, const ValueDeriv& v) {
    return {u.y + v.y, u.dy + v.dy};
}

// C^3 smoothstep on [0,1]: 0 -> 1 with three vanishing derivatives at both
// ends. Used for partition-of-unity quadrature weights.
inline double smoothstep_c3(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double t2 = t * t;
    return t2 * t2 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t2 * t);
}

inline double sqr(double x) { return x * x; }

// Distance from point q to segment [s0, s1] in the complex plane.
inline double segment_distance(cplx s0, cplx s1, cplx q) {
    const cplx d = s1 - s0;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(q - s0);
    double t = ((q - s0).real() * d.real() + (q - s0).imag() * d.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(q - (s0 + t * d));
}

}  // namespace smirnov
