#pragma once

// Platform graphs, edgewise activation matrices and the spectral
// reproduction coefficient R = rho(A ⊙ P).
//
// Indices follow the receiver/sender convention throughout: entry (i, u) of
// an adjacency or activation matrix refers to the edge u -> i, i.e. agent i
// can receive from agent u.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "opcascade/error.hpp"
#include "opcascade/platform.hpp"
#include "opcascade/state_core.hpp"

namespace opcascade {

struct AgentProfile {
    std::string agent_id;
    std::string platform;
    std::uint64_t followers = 0;
    double influence = 0.0;  // calibrated to [0,1], see calibrated_influence
    AgentParams params;
    std::string persona_seed;

    bool operator==(const AgentProfile&) const = default;
};

// log(1 + followers) / log(1 + max_followers), clamped to [0,1].
inline double calibrated_influence(std::uint64_t followers, std::uint64_t max_followers) noexcept {
    if (max_followers == 0) return 0.0;
    const double v = std::log1p(static_cast<double>(followers)) /
                     std::log1p(static_cast<double>(max_followers));
    return std::clamp(v, 0.0, 1.0);
}

inline void calibrate_influence(std::span<AgentProfile> profiles) noexcept {
    std::uint64_t fmax = 0;
    for (const auto& p : profiles) fmax = std::max(fmax, p.followers);
    for (auto& p : profiles) p.influence = calibrated_influence(p.followers, fmax);
}

struct Edge {
    std::size_t receiver = 0;
    std::size_t sender = 0;

    auto operator<=>(const Edge&) const = default;
};

// Directed, unweighted graph of one platform over the scenario's n agents.
class PlatformNetwork {
public:
    PlatformNetwork() = default;

    // Duplicate edges are merged; self-loops and out-of-range indices throw.
    PlatformNetwork(std::string platform_id, std::size_t n, std::vector<Edge> edges)
        : platform_id_(std::move(platform_id)), n_(n), edges_(std::move(edges)) {
        for (const Edge& e : edges_) {
            if (e.receiver >= n_ || e.sender >= n_) {
                throw ConfigError("edge (" + std::to_string(e.receiver) + ", " + std::to_string(e.sender) +
                                  ") out of range for n = " + std::to_string(n_));
            }
            if (e.receiver == e.sender) {
                throw ConfigError("self-loop on agent " + std::to_string(e.receiver));
            }
        }
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

        receivers_of_.assign(n_, {});
        senders_of_.assign(n_, {});
        for (const Edge& e : edges_) {
            receivers_of_[e.sender].push_back(e.receiver);
            senders_of_[e.receiver].push_back(e.sender);
        }
    }

    const std::string& platform_id() const noexcept { return platform_id_; }
    std::size_t size() const noexcept { return n_; }
    std::span<const Edge> edges() const noexcept { return edges_; }

    // Agents that receive what `sender` posts on this platform.
    std::span<const std::size_t> receivers_of(std::size_t sender) const { return receivers_of_.at(sender); }
    std::span<const std::size_t> senders_of(std::size_t receiver) const { return senders_of_.at(receiver); }
    std::size_t in_degree(std::size_t i) const { return senders_of_.at(i).size(); }
    std::size_t out_degree(std::size_t u) const { return receivers_of_.at(u).size(); }

    bool has_edge(std::size_t receiver, std::size_t sender) const {
        return std::binary_search(edges_.begin(), edges_.end(), Edge{receiver, sender});
    }

    bool operator==(const PlatformNetwork& o) const {
        return platform_id_ == o.platform_id_ && n_ == o.n_ && edges_ == o.edges_;
    }

private:
    std::string platform_id_;
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> receivers_of_;
    std::vector<std::vector<std::size_t>> senders_of_;
};

// One "receiver sender" pair per line.
inline void write_edge_list(std::ostream& out, const PlatformNetwork& net) {
    for (const Edge& e : net.edges()) out << e.receiver << ' ' << e.sender << '\n';
}

inline PlatformNetwork read_edge_list(std::istream& in, std::string platform_id, std::size_t n) {
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        long long r = -1;
        long long s = -1;
        std::string rest;
        if (!(ls >> r >> s) || (ls >> rest) || r < 0 || s < 0) {
            throw ParseError("expected 'receiver sender' non-negative integer pair", lineno, 1);
        }
        edges.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(s)});
    }
    return PlatformNetwork(std::move(platform_id), n, std::move(edges));
}

// Row-major square matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t n_ = 0;
    Vector data_;
};

struct SparseEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

struct SparseMatrix {
    std::size_t n = 0;
    std::vector<SparseEntry> entries;
};

struct ActivationMatrix {
    DenseMatrix entries;
    std::string message_id;
    Round round = 0;
};

struct SpectralOptions {
    double tol = 1e-8;
    std::size_t max_iter = 10000;
};

struct SpectralEstimate {
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

namespace detail {

// Power iteration for the Perron root of an irreducible nonnegative matrix M, run on the
// shifted matrix B = M + s I with s the mean row sum of M. For nonnegative M,
// rho(B) = rho(M) + s and B has no other eigenvalue of modulus rho(B), so
// periodic (e.g. bipartite or cyclic) graphs converge instead of oscillating.
//
// Stopping: with x > 0 the Collatz-Wielandt ratios (Bx)_i / x_i bracket
// rho(B); stop once the bracket is narrower than tol. A stalled Rayleigh
// quotient (three successive changes below tol) is accepted as a fallback.
template <class Multiply>
SpectralEstimate perron_root(std::size_t n, std::span<const double> row_sums, Multiply&& multiply,
                             const SpectralOptions& opts) {
    if (!(opts.tol > 0.0) || opts.max_iter == 0) throw ConfigError("spectral options: tol > 0 and max_iter > 0 required");
    double total = 0.0;
    for (double r : row_sums) total += r;
    if (n == 0 || total == 0.0) return {0.0, true, 0};
    const double shift = total / static_cast<double>(n);

    Vector x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    Vector y(n);
    double previous = std::numeric_limits<double>::quiet_NaN();
    double mu = 0.0;
    int stalled = 0;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        std::fill(y.begin(), y.end(), 0.0);
        multiply(std::span<const double>(x), std::span<double>(y));
        for (std::size_t i = 0; i < n; ++i) y[i] += shift * x[i];

        mu = dot(x, y);  // Rayleigh quotient, x has unit norm

        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        bool positive = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(x[i] > std::numeric_limits<double>::min())) {
                positive = false;
                break;
            }
            const double ratio = y[i] / x[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        if (positive && hi - lo <= opts.tol) {
            return {std::max(0.0, 0.5 * (lo + hi) - shift), true, it};
        }
        if (std::abs(mu - previous) <= opts.tol) {
            if (++stalled >= 3) return {std::max(0.0, mu - shift), true, it};
        } else {
            stalled = 0;
        }
        previous = mu;

        const double norm = norm2(y);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    }
    return {std::max(0.0, mu - shift), false, opts.max_iter};
}

inline void require_nonnegative(double v) {
    if (!std::isfinite(v)) throw PreconditionError("spectral_radius: non-finite entry");
    if (v < 0.0) throw PreconditionError("spectral_radius: negative entry");
}

// Strongly connected components of the pattern graph i -> j for entries (i, j).
// Iterative Tarjan; returns the component id of every node.
inline std::vector<std::size_t> strong_components(std::size_t n, std::span<const SparseEntry> entries,
                                                  std::size_t& count) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : entries) adj[e.row].push_back(e.col);
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, none), low(n, 0), comp(n, none), stack;
    std::vector<bool> on_stack(n, false);
    std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next child)
    std::size_t counter = 0;
    count = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != none) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, child] = call.back();
            if (child < adj[v].size()) {
                const std::size_t w = adj[v][child++];
                if (index[w] == none) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::size_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                std::size_t w = none;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = count;
                } while (w != done);
                ++count;
            }
        }
    }
    return comp;
}

// rho of a nonnegative matrix is the max over its irreducible diagonal blocks.
// Splitting first matters: on a reducible matrix (a DAG of followers, say) the
// shifted iteration meets a Jordan block and converges only like 1/k.
inline SpectralEstimate spectral_radius_entries(std::size_t n, std::span<const SparseEntry> entries,
                                                const SpectralOptions& opts) {
    if (!(opts.tol > 0.0) || opts.max_iter == 0) throw ConfigError("spectral options: tol > 0 and max_iter > 0 required");
    for (const auto& e : entries) {
        if (e.row >= n || e.col >= n) throw ConfigError("sparse entry out of range");
        require_nonnegative(e.value);
    }
    std::vector<SparseEntry> nonzero;
    for (const auto& e : entries) {
        if (e.value > 0.0) nonzero.push_back(e);
    }
    std::size_t count = 0;
    const auto comp = strong_components(n, nonzero, count);
    std::vector<std::vector<std::size_t>> members(count);
    std::vector<std::size_t> local(n);
    for (std::size_t i = 0; i < n; ++i) {
        local[i] = members[comp[i]].size();
        members[comp[i]].push_back(i);
    }
    std::vector<std::vector<SparseEntry>> blocks(count);
    for (const auto& e : nonzero) {
        if (comp[e.row] == comp[e.col]) blocks[comp[e.row]].push_back({local[e.row], local[e.col], e.value});
    }

    SpectralEstimate out{0.0, true, 0};
    for (std::size_t c = 0; c < count; ++c) {
        const auto& block = blocks[c];
        if (block.empty()) continue;  // single node without a self-loop
        const std::size_t m = members[c].size();
        if (m == 1) {
            out.value = std::max(out.value, block.front().value);
            continue;
        }
        Vector row_sums(m, 0.0);
        for (const auto& e : block) row_sums[e.row] += e.value;
        const SpectralEstimate est = perron_root(
            m, row_sums,
            [&block](std::span<const double> x, std::span<double> y) {
                for (const auto& e : block) y[e.row] += e.value * x[e.col];
            },
            opts);
        out.value = std::max(out.value, est.value);
        out.converged = out.converged && est.converged;
        out.iterations += est.iterations;
    }
    return out;
}

}  // namespace detail

inline SpectralEstimate spectral_radius(const DenseMatrix& m, const SpectralOptions& opts = {}) {
    const std::size_t n = m.size();
    std::vector<SparseEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            detail::require_nonnegative(m(i, j));
            if (m(i, j) != 0.0) entries.push_back({i, j, m(i, j)});
        }
    }
    return detail::spectral_radius_entries(n, entries, opts);
}

inline SpectralEstimate spectral_radius(const SparseMatrix& m, const SpectralOptions& opts = {}) {
    return detail::spectral_radius_entries(m.n, m.entries, opts);
}

// Entry (i,u) = activation probability of receiver i for `msg` sent by u, on
// every edge of `net`; zero elsewhere. Recall for receiver i uses its memory
// strictly before round `now`. The context only depends on the receiver, so it
// is computed once per receiver rather than once per edge.
inline ActivationMatrix build_activation_matrix(const PlatformNetwork& net,
                                                std::span<const AgentProfile> profiles,
                                                std::span<const AgentState> states, const Message& msg,
                                                const PlatformParams& platform, Round now) {
    const std::size_t n = net.size();
    if (profiles.size() != n || states.size() != n) {
        throw ConfigError("activation matrix: network has " + std::to_string(n) + " agents but " +
                          std::to_string(profiles.size()) + " profiles and " +
                          std::to_string(states.size()) + " states were given");
    }
    ActivationMatrix act{DenseMatrix(n), msg.id, now};
    for (std::size_t i = 0; i < n; ++i) {
        const auto senders = net.senders_of(i);
        if (senders.empty()) continue;
        const AgentState& state = states[i];
        const Vector context =
            retrieve_context(state.memory.before(now), msg.content_embedding, now, profiles[i].params);
        for (std::size_t u : senders) {
            act.entries(i, u) = activation_probability(state, context, msg, profiles[u].influence, platform,
                                                       profiles[i].params);
        }
    }
    return act;
}

inline ActivationMatrix build_activation_matrix(const PlatformNetwork& net,
                                                std::span<const AgentProfile> profiles,
                                                std::span<const AgentState> states, const Message& msg,
                                                const PlatformParams& platform) {
    return build_activation_matrix(net, profiles, states, msg, platform, msg.round);
}

// rho(A ⊙ P); entries of P outside the support of A are ignored.
inline SpectralEstimate reproduction_coefficient(const PlatformNetwork& net, const ActivationMatrix& act,
                                                 const SpectralOptions& opts = {}) {
    if (act.entries.size() != net.size()) {
        throw ConfigError("activation matrix is " + std::to_string(act.entries.size()) +
                          "x" + std::to_string(act.entries.size()) + ", network has " +
                          std::to_string(net.size()) + " agents");
    }
    SparseMatrix masked{net.size(), {}};
    masked.entries.reserve(net.edges().size());
    for (const Edge& e : net.edges()) {
        const double v = act.entries(e.receiver, e.sender);
        if (v != 0.0) masked.entries.push_back({e.receiver, e.sender, v});
    }
    return spectral_radius(masked, opts);
}

inline bool is_supercritical(double reproduction) {
    if (!(reproduction >= 0.0)) throw PreconditionError("reproduction coefficient must be >= 0");
    return reproduction > 1.0;
}

struct StrategyVerdict {
    bool accepted = false;
    double delta = 0.0;
    double r_before = 0.0;
    double r_after = 0.0;
};

// Accept when the strategy leaves the cascade subcritical (R_after < 1).
inline StrategyVerdict strategy_acceptance(double r_before, double r_after) {
    if (!(r_before >= 0.0) || !(r_after >= 0.0)) {
        throw PreconditionError("strategy_acceptance: coefficients must be >= 0");
    }
    return {r_after < 1.0, r_after - r_before, r_before, r_after};
}

}  // namespace opcascade
