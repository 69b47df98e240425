#pragma once
// Serialization of results: JSON records, CSV field grids, schematic SVG
// contour plots. Output is deterministic: ordered keys, fixed float
// formatting, no timestamps.

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "smirnov/action.hpp"

namespace smirnov {

using json = nlohmann::json;

inline json to_json(const Eigenvalue& e) {
    return json{{"problem", to_string(e.problem)},
                {"k", e.k},
                {"lambda", e.lambda},
                {"osc", e.osc},
                {"residual", e.residual}};
}

inline json to_json(const std::vector<Eigenvalue>& eigs) {
    json arr = json::array();
    for (const auto& e : eigs) arr.push_back(to_json(e));
    return arr;
}

inline json to_json(const SpectrumSet& s) {
    json all = json::array();
    for (const auto* v : {&s.p2, &s.p3, &s.p1})
        for (const auto& e : *v) all.push_back(to_json(e));
    std::sort(all.begin(), all.end(),
              [](const json& x, const json& y) { return x["lambda"] < y["lambda"]; });
    return json{{"a", s.a}, {"eigenvalues", all}};
}

inline json to_json(const InterlacingReport& rep) {
    json chain = json::array();
    for (const auto& [label, value] : rep.chain)
        chain.push_back(json{{"label", label}, {"value", value}});
    return json{{"ok", rep.ok}, {"chain", chain}, {"violations", rep.violations}};
}

inline json to_json(const Mat2& m) {
    auto pair = [](cplx v) { return json::array({v.real(), v.imag()}); };
    return json::array({pair(m.a), pair(m.b), pair(m.c), pair(m.d)});
}

inline json to_json(const MonodromyRep& rep) {
    json m;
    const char* names[4] = {"m0", "ma", "m1", "minf"};
    json traces;
    for (int i = 0; i < 4; ++i) {
        m[names[i]] = to_json(rep.m[i]);
        traces[names[i]] = json::array(
            {rep.m[i].trace().real(), rep.m[i].trace().imag()});
    }
    return json{{"a", rep.a},
                {"lambda", rep.lambda},
                {"base_point", json::array({rep.base.real(), rep.base.imag()})},
                {"matrices", m},
                {"traces", traces},
                {"det_defect", rep.det_defect()},
                {"trace_defect", rep.trace_defect()},
                {"product_defect", rep.product_defect()},
                {"realness_defect", realness_defect(rep)}};
}

inline json to_json(const Classification& cl) {
    json sep = json::array();
    const char* names[4] = {"0", "a", "1", "inf"};
    for (int i = 0; i < 4; ++i)
        if (cl.expected_separation[i]) sep.push_back(names[i]);
    return json{{"label", cl.label},
                {"k", cl.k},
                {"expected_contours", cl.expected_contours},
                {"observed_contours", cl.observed_contours},
                {"contours_match", cl.contours_match},
                {"separated_punctures", sep}};
}

inline json to_json(const ActionEstimate& est) {
    return json{{"a", est.a},
                {"lambda0", est.lambda0},
                {"S", est.value},
                {"eps_schedule", est.eps_schedule},
                {"values", est.values},
                {"values_corrected", est.values_corrected},
                {"cusp_widths", est.cusp_widths},
                {"extrapolation_error", est.extrapolation_error},
                {"stabilizing", est.stabilizing}};
}

inline json to_json(const PolyakovReport& rep) {
    return json{{"a", rep.a},          {"delta", rep.delta},
                {"dS_da", rep.dS_da},  {"lhs", rep.lhs},
                {"rhs", rep.rhs},      {"abs_err", rep.abs_err},
                {"rel_err", rep.rel_err},
                {"S_plus", to_json(rep.s_plus)}, {"S_minus", to_json(rep.s_minus)}};
}

// CSV export of a field grid: header x,y,chi,phi; masked nodes skipped;
// the resolved config rides along as a trailing comment line.
inline void write_field_csv(const FieldGrid& g, const std::string& path,
                            const json& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,y,chi,phi\n";
    char buf[160];
    for (int j = 0; j < g.spec.ny; ++j) {
        for (int i = 0; i < g.spec.nx; ++i) {
            const int k = g.idx(i, j);
            if (g.mask[k]) continue;
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.12g,%.12g\n", g.x(i),
                          g.y(j), g.chi[k], g.phi(k));
            out << buf;
        }
    }
    out << "# config " << config.dump() << "\n";
}

// Schematic SVG: contour polylines and puncture markers.
inline void write_contours_svg(const std::vector<Contour>& contours, double a,
                               const GridSpec& spec, const std::string& path,
                               const json& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    char buf[128];
    const double w = spec.x1 - spec.x0, h = spec.y1 - spec.y0;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ";
    std::snprintf(buf, sizeof(buf), "viewBox=\"%.5f %.5f %.5f %.5f\">\n", spec.x0,
                  -spec.y1, w, h);
    out << buf;
    out << "<desc>" << config.dump() << "</desc>\n";
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.5f\" y=\"%.5f\" width=\"%.5f\" height=\"%.5f\" "
                  "fill=\"white\"/>\n",
                  spec.x0, -spec.y1, w, h);
    out << buf;
    for (const auto& c : contours) {
        out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\""
            << 0.003 * std::max(w, h) << "\" points=\"";
        for (const cplx& p : c.points) {
            std::snprintf(buf, sizeof(buf), "%.5f,%.5f ", p.real(), -p.imag());
            out << buf;
        }
        out << "\"/>\n";
    }
    for (double zp : {0.0, a, 1.0}) {
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.5f\" cy=\"0\" r=\"%.5f\" fill=\"red\"/>\n", zp,
                      0.006 * std::max(w, h));
        out << buf;
    }
    out << "</svg>\n";
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace smirnov
