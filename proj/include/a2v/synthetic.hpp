#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "a2v/ndcore.hpp"
#include "a2v/window.hpp"

namespace a2v {

struct SinusoidSuite {
    std::size_t per_class = 20;
    std::size_t steps = 32;
    std::uint64_t seed = 0;
    double phase_spread = 2.0 * std::numbers::pi;  // phase ~ U(0, phase_spread)
};

inline constexpr std::array<std::string_view, 3> kSinusoidClasses{"fast", "medium", "slow"};

// Noiseless single-channel sinusoids in three frequency classes (1, 2 and 4
// cycles per window) with a uniformly random phase. Windows are interleaved
// by class so any prefix is roughly balanced.
inline std::vector<SensorWindow> make_sinusoid_windows(const SinusoidSuite& suite) {
    constexpr std::array<double, 3> cycles{4.0, 2.0, 1.0};
    Rng rng(suite.seed);
    std::vector<SensorWindow> out;
    out.reserve(3 * suite.per_class);
    for (std::size_t i = 0; i < suite.per_class; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double phase = rng.uniform(0.0, suite.phase_spread);
            SensorWindow w;
            w.id = out.size();
            w.label = std::string(kSinusoidClasses[c]);
            w.source = Source::synthetic;
            w.data = Matrix(suite.steps, 1);
            for (std::size_t t = 0; t < suite.steps; ++t)
                w.data(t, 0) = std::sin(2.0 * std::numbers::pi * cycles[c] * static_cast<double>(t) /
                                            static_cast<double>(suite.steps) +
                                        phase);
            out.push_back(std::move(w));
        }
    }
    return out;
}

}  // namespace a2v
