#pragma once

// Exact Independent Cascade by enumeration of all 2^E live-edge worlds.
// Independent of the engine: no messages, no RNG, just reachability.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace opcascade::verify {

struct IcEdge {
    std::size_t from = 0;  // sender
    std::size_t to = 0;    // receiver
    double p = 0.0;
};

// P(node is active at the end) for a cascade started from `seeds`.
inline std::vector<double> ic_activation_exact(std::size_t n, const std::vector<IcEdge>& edges,
                                               const std::vector<std::size_t>& seeds) {
    if (edges.size() > 24) throw std::invalid_argument("ic_activation_exact: too many edges to enumerate");
    std::vector<double> prob(n, 0.0);
    const std::uint64_t worlds = std::uint64_t{1} << edges.size();
    std::vector<char> active(n);
    std::vector<std::size_t> frontier;
    for (std::uint64_t mask = 0; mask < worlds; ++mask) {
        double w = 1.0;
        for (std::size_t e = 0; e < edges.size(); ++e) w *= (mask >> e) & 1 ? edges[e].p : 1.0 - edges[e].p;
        if (w == 0.0) continue;
        std::fill(active.begin(), active.end(), 0);
        frontier.assign(seeds.begin(), seeds.end());
        for (std::size_t s : seeds) active[s] = 1;
        while (!frontier.empty()) {
            const std::size_t u = frontier.back();
            frontier.pop_back();
            for (std::size_t e = 0; e < edges.size(); ++e) {
                if (((mask >> e) & 1) && edges[e].from == u && !active[edges[e].to]) {
                    active[edges[e].to] = 1;
                    frontier.push_back(edges[e].to);
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i]) prob[i] += w;
        }
    }
    return prob;
}

}  // namespace opcascade::verify
