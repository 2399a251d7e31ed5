#pragma once

#include <random>

#include "wpl/field.hpp"

namespace testutil {

inline wpl::Field white_noise(const wpl::GridSpec& g, unsigned seed, wpl::Domain d = wpl::Domain::space) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    wpl::Field f(g, d);
    for (auto& v : f.values) v = wpl::cplx(nd(rng), nd(rng));
    return f;
}

// white noise restricted to 2^{k-1} <= |xi| <= 2^{k+1}
inline wpl::Field annulus_noise(const wpl::GridSpec& g, int k, unsigned seed) {
    wpl::Field F = white_noise(g, seed, wpl::Domain::frequency);
    double lo = std::ldexp(1.0, k - 1), hi = std::ldexp(1.0, k + 1);
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        double r = wpl::norm(g.frequency(i), g.n);
        if (r < lo || r > hi) F.values[i] = 0;
    }
    return F;
}

}  // namespace testutil
