#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "swarm.hpp"

namespace plume {

/// Group polarity |sum p_i| / N, in [0, 1]; 1 iff all headings coincide.
inline double polarity(const std::vector<Agent>& agents) {
    if (agents.empty()) throw std::invalid_argument("polarity: undefined for N = 0");
    Vec2 s{0.0, 0.0};
    for (const auto& a : agents) s += a.heading;
    return s.norm() / static_cast<double>(agents.size());
}

/// Mean nearest-neighbour distance (1/N) sum_i min_j |r_j - r_i|, with
/// periodic wrap.
inline double mean_nnd(const std::vector<Agent>& agents) {
    const std::size_t n = agents.size();
    if (n < 2) throw std::invalid_argument("mean_nnd: requires N >= 2");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = wrap_delta(agents[i].pos, agents[j].pos).norm();
            if (d < best) best = d;
        }
        sum += best;
    }
    return sum / static_cast<double>(n);
}

}  // namespace plume
