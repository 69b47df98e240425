#pragma once
// Shared fixtures for the test binaries: expensive objects computed once.

#include "smirnov/action.hpp"
#include "smirnov/contours.hpp"
#include "smirnov/io.hpp"

namespace testing_fixtures {

inline const smirnov::SpectrumSet& spectra_half() {
    static const smirnov::SpectrumSet s = smirnov::solve_all(0.5, 2);
    return s;
}

inline const smirnov::LiouvilleField& field_half(double lambda) {
    static std::map<double, smirnov::LiouvilleField> cache;
    auto it = cache.find(lambda);
    if (it == cache.end())
        it = cache.emplace(lambda,
                           smirnov::make_field(smirnov::SmirnovEquation(0.5, lambda)))
                 .first;
    return it->second;
}

}  // namespace testing_fixtures
