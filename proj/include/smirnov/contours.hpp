#pragma once
// Singular contours of black-hole-type Liouville fields: the zero level set
// of chi, extracted by marching squares, chained into closed loops and
// tagged by the punctures they separate from infinity. The local blow-up
// law along a contour is checked against the Schwarz-function model
//
//     e^phi = -4 S'(z0) / (conj(z) - conj(z0) - S'(z0)(z - z0))^2 (1 + O(|z-z0|)),
//
// with S'(z0) = conj(T)/T for the unit tangent T. On the zero set the
// chi-equation forces |grad chi| = 1, so S' is available analytically as
// -chi_z / conj(chi_z).

#include <cstdint>

#include "smirnov/liouville.hpp"
#include "smirnov/spectra.hpp"

namespace smirnov {

struct Contour {
    std::vector<cplx> points;    // closed: first == last
    std::vector<cplx> tangents;  // unit tangents per vertex
    std::array<bool, 4> separates{false, false, false, false};  // 0, a, 1, inf

    double diameter() const {
        double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
        for (const cplx& p : points) {
            lo_x = std::min(lo_x, p.real());
            hi_x = std::max(hi_x, p.real());
            lo_y = std::min(lo_y, p.imag());
            hi_y = std::max(hi_y, p.imag());
        }
        return std::hypot(hi_x - lo_x, hi_y - lo_y);
    }

    bool encloses(cplx q) const {
        // even-odd ray crossing
        bool inside = false;
        for (size_t i = 1; i < points.size(); ++i) {
            const cplx p0 = points[i - 1], p1 = points[i];
            if ((p0.imag() > q.imag()) == (p1.imag() > q.imag())) continue;
            const double t = (q.imag() - p0.imag()) / (p1.imag() - p0.imag());
            if (p0.real() + t * (p1.real() - p0.real()) > q.real()) inside = !inside;
        }
        return inside;
    }

    bool is_simple() const {
        // pairwise segment intersection at sampling resolution
        auto seg_int = [](cplx a, cplx b, cplx c, cplx d) {
            auto cross = [](cplx u, cplx v) {
                return u.real() * v.imag() - u.imag() * v.real();
            };
            const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
            const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
            return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
        };
        const size_t n = points.size() - 1;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;  // closing adjacency
                if (seg_int(points[i], points[i + 1], points[j], points[j + 1]))
                    return false;
            }
        return true;
    }
};

namespace detail {

struct Segment {
    int64_t e0, e1;  // edge ids
    cplx p0, p1;
};

inline int64_t edge_id(int i, int j, int nx, bool vertical) {
    return (int64_t(j) * nx + i) * 2 + (vertical ? 1 : 0);
}

// Extract line segments from one marching-squares pass.
inline std::vector<Segment> marching_segments(const FieldGrid& g) {
    std::vector<Segment> segs;
    const int nx = g.spec.nx, ny = g.spec.ny;
    auto val = [&](int i, int j) { return g.chi[g.idx(i, j)]; };
    auto masked = [&](int i, int j) { return g.mask[g.idx(i, j)] != 0; };
    auto interp = [&](int i0, int j0, int i1, int j1) {
        const double v0 = val(i0, j0), v1 = val(i1, j1);
        const double t = v0 / (v0 - v1);
        return g.z(i0, j0) + t * (g.z(i1, j1) - g.z(i0, j0));
    };

    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            if (masked(i, j) || masked(i + 1, j) || masked(i, j + 1) ||
                masked(i + 1, j + 1))
                continue;
            const bool s0 = val(i, j) > 0, s1 = val(i + 1, j) > 0,
                       s2 = val(i + 1, j + 1) > 0, s3 = val(i, j + 1) > 0;
            const int code = (s0 ? 1 : 0) | (s1 ? 2 : 0) | (s2 ? 4 : 0) | (s3 ? 8 : 0);
            if (code == 0 || code == 15) continue;
            const int64_t bottom = edge_id(i, j, nx, false);
            const int64_t top = edge_id(i, j + 1, nx, false);
            const int64_t left = edge_id(i, j, nx, true);
            const int64_t right = edge_id(i + 1, j, nx, true);
            const cplx pb = s0 != s1 ? interp(i, j, i + 1, j) : cplx();
            const cplx pt = s3 != s2 ? interp(i, j + 1, i + 1, j + 1) : cplx();
            const cplx pl = s0 != s3 ? interp(i, j, i, j + 1) : cplx();
            const cplx pr = s1 != s2 ? interp(i + 1, j, i + 1, j + 1) : cplx();
            auto add = [&](int64_t a, cplx pa, int64_t b, cplx pb2) {
                segs.push_back({a, b, pa, pb2});
            };
            switch (code) {
                case 1: case 14: add(left, pl, bottom, pb); break;
                case 2: case 13: add(bottom, pb, right, pr); break;
                case 3: case 12: add(left, pl, right, pr); break;
                case 4: case 11: add(right, pr, top, pt); break;
                case 6: case 9:  add(bottom, pb, top, pt); break;
                case 7: case 8:  add(left, pl, top, pt); break;
                case 5: case 10: {
                    // saddle: resolve by the center sign
                    const double mid = 0.25 * (val(i, j) + val(i + 1, j) +
                                               val(i + 1, j + 1) + val(i, j + 1));
                    const bool m = mid > 0;
                    if ((code == 5) == m) {
                        add(left, pl, bottom, pb);
                        add(right, pr, top, pt);
                    } else {
                        add(left, pl, top, pt);
                        add(bottom, pb, right, pr);
                    }
                    break;
                }
                default: break;
            }
        }
    }
    return segs;
}

}  // namespace detail

struct ContourExtraction {
    std::vector<Contour> contours;
    int open_chains = 0;  // nonzero means the bbox clipped a contour
};

// Chain marching-squares segments into closed loops and tag each loop with
// the punctures it encloses. Loops are sorted by their leftmost point for
// deterministic output.
inline ContourExtraction extract_contours_once(const FieldGrid& g, double a) {
    ContourExtraction out;
    auto segs = detail::marching_segments(g);
    // adjacency: edge id -> segment indices
    std::map<int64_t, std::vector<int>> by_edge;
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        by_edge[segs[s].e0].push_back(s);
        by_edge[segs[s].e1].push_back(s);
    }
    std::vector<char> used(segs.size(), 0);
    for (int s0 = 0; s0 < static_cast<int>(segs.size()); ++s0) {
        if (used[s0]) continue;
        std::vector<cplx> pts;
        int cur = s0;
        int64_t enter = segs[s0].e0;
        pts.push_back(segs[s0].p0);
        bool closed = false;
        for (;;) {
            used[cur] = 1;
            const int64_t exit = segs[cur].e0 == enter ? segs[cur].e1 : segs[cur].e0;
            pts.push_back(segs[cur].e0 == enter ? segs[cur].p1 : segs[cur].p0);
            // find the partner segment sharing 'exit'
            int nxt = -1;
            for (int cand : by_edge[exit])
                if (!used[cand]) nxt = cand;
            if (nxt < 0) {
                closed = exit == segs[s0].e0;
                break;
            }
            cur = nxt;
            enter = exit;
        }
        if (!closed || pts.size() < 8) {
            if (!closed) ++out.open_chains;
            continue;
        }
        Contour c;
        c.points = std::move(pts);
        c.points.back() = c.points.front();  // exact closure
        const size_t n = c.points.size() - 1;
        c.tangents.resize(c.points.size());
        for (size_t i = 0; i < n; ++i) {
            const cplx prev = c.points[(i + n - 1) % n];
            const cplx next = c.points[(i + 1) % n];
            const cplx t = next - prev;
            c.tangents[i] = t / std::abs(t);
        }
        c.tangents[n] = c.tangents[0];
        c.separates[0] = c.encloses(cplx(0.0));
        c.separates[1] = c.encloses(cplx(a));
        c.separates[2] = c.encloses(cplx(1.0));
        c.separates[3] = false;  // infinity is never enclosed
        out.contours.push_back(std::move(c));
    }
    std::sort(out.contours.begin(), out.contours.end(), [](const Contour& u, const Contour& v) {
        auto key = [](const Contour& c) {
            double mx = 1e300, my = 1e300;
            for (const cplx& p : c.points) {
                mx = std::min(mx, p.real());
                my = std::min(my, p.imag());
            }
            return std::pair<double, double>(mx, my);
        };
        return key(u) < key(v);
    });
    return out;
}

// Zero-level contours of the field; the bbox grows geometrically (and the
// grid refines) while a contour leaves it. The outermost contour of index
// k sits at a scale that grows quickly with |k|.
inline std::vector<Contour> extract_contours(const LiouvilleField& fld, GridSpec spec,
                                             int max_attempts = 7) {
    for (int attempt = 0;; ++attempt) {
        const FieldGrid g = chi_field(fld, spec);
        ContourExtraction ex = extract_contours_once(g, fld.eq.a);
        if (ex.open_chains == 0) return ex.contours;
        if (attempt + 1 >= max_attempts)
            throw non_convergence_error("extract_contours: contour leaves the bbox");
        const double cx = 0.5 * (spec.x0 + spec.x1), cy = 0.5 * (spec.y0 + spec.y1);
        const double sx = 0.75 * (spec.x1 - spec.x0), sy = 0.75 * (spec.y1 - spec.y0);
        spec.x0 = cx - sx;
        spec.x1 = cx + sx;
        spec.y0 = cy - sy;
        spec.y1 = cy + sy;
        spec.nx = std::min(1200, static_cast<int>(spec.nx * 1.3));
        spec.ny = std::min(1200, static_cast<int>(spec.ny * 1.3));
    }
}

inline std::vector<Contour> extract_contours(const FieldGrid& g, double a) {
    ContourExtraction ex = extract_contours_once(g, a);
    if (ex.open_chains > 0)
        throw non_convergence_error("extract_contours: contour leaves the bbox");
    return ex.contours;
}

// Newton-refined point on the zero set near an approximate contour vertex,
// moved along the chi gradient. Returns the refined point; the unit normal
// and S' derive from chi_z there.
struct ContourPoint {
    cplx z0;
    cplx normal;       // conj(chi_z)/|chi_z|
    cplx schwarz_d;    // S'(z0) = -chi_z/conj(chi_z)
    double grad_norm;  // |grad chi| = 2|chi_z|, should be 1 on the contour
};

inline ContourPoint refine_contour_point(ChiEvaluator& ev, cplx z_approx,
                                         int iterations = 6) {
    cplx z = z_approx;
    for (int it = 0; it < iterations; ++it) {
        const PairState st = ev.state_at(z);
        const double c = chi_of(st);
        const cplx cz = chi_z_of(st);
        const double gn = 2.0 * std::abs(cz);
        if (gn < 1e-8) throw non_convergence_error("refine_contour_point: flat gradient");
        const cplx n = std::conj(cz) / std::abs(cz);
        z -= n * (c / gn);
        if (std::abs(c) / gn < 1e-13) break;
    }
    const PairState st = ev.state_at(z);
    const cplx cz = chi_z_of(st);
    ContourPoint cp;
    cp.z0 = z;
    cp.normal = std::conj(cz) / std::abs(cz);
    cp.schwarz_d = -cz / std::conj(cz);
    cp.grad_norm = 2.0 * std::abs(cz);
    return cp;
}

// Right side of the blow-up law at z near the contour point.
inline cplx schwarz_model(const ContourPoint& cp, cplx z) {
    const cplx den = std::conj(z) - std::conj(cp.z0) - cp.schwarz_d * (z - cp.z0);
    return -4.0 * cp.schwarz_d / (den * den);
}

struct SchwarzProbe {
    double delta_rel;  // normal offset relative to the contour diameter
    double ratio;      // e^phi / model
};

struct SchwarzReport {
    std::vector<SchwarzProbe> probes;
    double max_ratio_error = 0.0;  // max |ratio - 1| / delta_rel
    bool ok = true;                // every |ratio - 1| <= 5 delta_rel
};

// Verify e^phi / model -> 1 along the normal at sample points of a contour.
inline SchwarzReport schwarz_singularity_check(
    const LiouvilleField& fld, const Contour& contour,
    std::vector<double> deltas_rel = {1e-2, 3e-3, 1e-3}, int n_samples = 4) {
    SchwarzReport rep;
    ChiEvaluator ev(fld);
    const double diam = contour.diameter();
    const size_t n = contour.points.size() - 1;
    for (int s = 0; s < n_samples; ++s) {
        const size_t i = (s * n) / n_samples;
        const ContourPoint cp = refine_contour_point(ev, contour.points[i]);
        for (double dr : deltas_rel) {
            for (double side : {+1.0, -1.0}) {
                const double delta = dr * diam;
                const cplx z = cp.z0 + side * delta * cp.normal;
                const double chi = ev.chi(z);
                const double ephi = 1.0 / (chi * chi);
                const cplx model = schwarz_model(cp, z);
                if (!(model.real() > 0.0) ||
                    std::abs(model.imag()) > 1e-6 * std::abs(model))
                    throw non_convergence_error("schwarz check: model not positive");
                const double ratio = ephi / model.real();
                rep.probes.push_back({dr, ratio});
                rep.max_ratio_error =
                    std::max(rep.max_ratio_error, std::abs(ratio - 1.0) / dr);
                if (std::abs(ratio - 1.0) > 5.0 * dr) rep.ok = false;
            }
        }
    }
    return rep;
}

enum class SolutionType { FuchsianUniformizing, FuchsianType, SchottkyType };

struct Classification {
    SolutionType type = SolutionType::FuchsianUniformizing;
    int k = 0;
    int expected_contours = 0;
    int observed_contours = 0;
    bool contours_match = false;
    std::array<bool, 4> expected_separation{false, false, false, false};
    std::string label;
};

// Match lambda against the computed spectra and cross-check the contour
// count: 2|k| for lambda_k (k != 0), 2|k| - 1 for mu_k. Contours enclose
// {0, a} for positive index and {a, 1} for negative.
inline Classification classify_solution(const SmirnovEquation& eq,
                                        const SpectrumSet& spectra,
                                        const std::vector<Contour>& contours,
                                        double match_tol = 1e-6) {
    Classification cl;
    const double L = eq.lambda;
    bool found = false;
    for (const auto& e : spectra.p3) {
        if (std::abs(e.lambda - L) <= match_tol * (1.0 + std::abs(L))) {
            cl.type = e.k == 0 ? SolutionType::FuchsianUniformizing
                               : SolutionType::FuchsianType;
            cl.k = e.k;
            cl.expected_contours = 2 * std::abs(e.k);
            found = true;
            break;
        }
    }
    if (!found) {
        for (const auto& es : {spectra.p1, spectra.p2}) {
            for (const auto& e : es) {
                if (std::abs(e.lambda - L) <= match_tol * (1.0 + std::abs(L))) {
                    cl.type = SolutionType::SchottkyType;
                    cl.k = e.k;
                    cl.expected_contours = 2 * std::abs(e.k) - 1;
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
    }
    if (!found)
        throw std::invalid_argument("classify_solution: lambda is not a computed spectral point");

    cl.observed_contours = static_cast<int>(contours.size());
    cl.contours_match = cl.observed_contours == cl.expected_contours;
    // Contours of positive index cross the real axis inside (0, a) and
    // beyond 1, so they separate {a, 1} from {0, inf}; negative index is
    // the mirror image.
    if (cl.k > 0)
        cl.expected_separation = {false, true, true, false};
    else if (cl.k < 0)
        cl.expected_separation = {true, true, false, false};
    for (const auto& c : contours)
        if (c.separates != cl.expected_separation) cl.contours_match = false;

    switch (cl.type) {
        case SolutionType::FuchsianUniformizing: cl.label = "fuchsian-uniformizing"; break;
        case SolutionType::FuchsianType:
            cl.label = "fuchsian-type k=" + std::to_string(cl.k);
            break;
        default: cl.label = "schottky-type k=" + std::to_string(cl.k); break;
    }
    if (!cl.contours_match)
        throw non_convergence_error("classify_solution: contour count " +
                                    std::to_string(cl.observed_contours) +
                                    " contradicts index " + std::to_string(cl.k));
    return cl;
}

}  // namespace smirnov
