#pragma once

// Fidelity metrics: reading stances off agents, opinion trajectories,
// Pearson correlation (process fidelity) and base-2 Jensen-Shannon divergence
// of final stance distributions (outcome fidelity), plus seed aggregation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <tuple>
#include <vector>

#include "opcascade/engine.hpp"
#include "opcascade/error.hpp"
#include "opcascade/vector_ops.hpp"

namespace opcascade {

enum class Stance { oppose = 0, neutral = 1, support = 2 };

inline constexpr std::array<const char*, 3> kDefaultStanceLabels = {"oppose", "neutral", "support"};

struct StanceThresholds {
    double lo = -0.2;
    double hi = 0.2;

    void validate() const {
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
            throw ConfigError("stance thresholds require finite lo <= hi");
        }
    }

    bool operator==(const StanceThresholds&) const = default;
};

inline Stance stance_of_score(double s, const StanceThresholds& t) noexcept {
    if (s < t.lo) return Stance::oppose;
    if (s > t.hi) return Stance::support;
    return Stance::neutral;
}

inline Stance stance_of_agent(std::span<const double> persona, std::span<const double> topic,
                              const StanceThresholds& t = {}) {
    t.validate();
    return stance_of_score(dot(persona, topic), t);
}

inline Stance stance_of_agent(const AgentState& state, std::span<const double> topic,
                              const StanceThresholds& t = {}) {
    return stance_of_agent(state.persona, topic, t);
}

struct TrajectoryPoint {
    Round round = 0;
    double value = 0.0;

    bool operator==(const TrajectoryPoint&) const = default;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;

    void validate() const {
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (!std::isfinite(points[k].value)) throw ConfigError("trajectory value is not finite");
            if (k > 0 && points[k].round <= points[k - 1].round) {
                throw ConfigError("trajectory rounds must be strictly increasing");
            }
        }
    }

    bool operator==(const Trajectory&) const = default;
};

struct StanceDistribution {
    std::vector<std::string> labels;
    std::vector<double> probabilities;

    void validate() const {
        if (labels.size() != probabilities.size()) throw ConfigError("stance distribution: label/probability count mismatch");
        double total = 0.0;
        for (double p : probabilities) {
            if (!(p >= 0.0)) throw ConfigError("stance distribution: negative or NaN probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ConfigError("stance distribution must sum to 1");
    }

    bool operator==(const StanceDistribution&) const = default;
};

inline std::vector<std::string> default_stance_labels() {
    return {kDefaultStanceLabels.begin(), kDefaultStanceLabels.end()};
}

inline void require_topic(std::span<const double> topic) {
    if (std::abs(norm2(topic) - 1.0) > 1e-9) throw PreconditionError("topic embedding must have unit norm");
}

// Mean persona-topic alignment per snapshot (the continuous opinion index).
inline Trajectory simulated_trajectory(std::span<const PopulationSnapshot> snapshots, std::span<const double> topic) {
    require_topic(topic);
    if (snapshots.size() < 2) throw PreconditionError("a trajectory needs at least 2 rounds");
    Trajectory out;
    for (const auto& snap : snapshots) {
        if (snap.personas.empty()) throw PreconditionError("trajectory over zero agents");
        double sum = 0.0;
        for (const auto& z : snap.personas) sum += dot(z, topic);
        out.points.push_back({snap.round, sum / static_cast<double>(snap.personas.size())});
    }
    return out;
}

inline StanceDistribution stance_distribution(const PopulationSnapshot& snap, std::span<const double> topic,
                                              const StanceThresholds& t = {},
                                              std::vector<std::string> labels = default_stance_labels()) {
    require_topic(topic);
    t.validate();
    if (snap.personas.empty()) throw PreconditionError("stance distribution over zero agents");
    if (labels.size() != 3) throw ConfigError("stance labels must name exactly 3 categories");
    std::vector<double> counts(3, 0.0);
    for (const auto& z : snap.personas) counts[static_cast<std::size_t>(stance_of_score(dot(z, topic), t))] += 1.0;
    for (double& c : counts) c /= static_cast<double>(snap.personas.size());
    return {std::move(labels), std::move(counts)};
}

// Share of agents in the oppose category per snapshot.
inline Trajectory negative_share_trajectory(std::span<const PopulationSnapshot> snapshots,
                                            std::span<const double> topic, const StanceThresholds& t = {}) {
    Trajectory out;
    for (const auto& snap : snapshots) out.points.push_back({snap.round, stance_distribution(snap, topic, t).probabilities[0]});
    return out;
}

// Sample Pearson correlation over the rounds both series share.
inline double pearson_r(const Trajectory& a, const Trajectory& b) {
    a.validate();
    b.validate();
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t j = 0;
    for (const auto& pa : a.points) {
        while (j < b.points.size() && b.points[j].round < pa.round) ++j;
        if (j < b.points.size() && b.points[j].round == pa.round) {
            xs.push_back(pa.value);
            ys.push_back(b.points[j].value);
        }
    }
    if (xs.size() < 2) throw PreconditionError("pearson_r needs at least 2 common rounds");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double dx = xs[k] - mx;
        const double dy = ys[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("pearson_r undefined: a series has zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Jensen-Shannon divergence with log base 2, in [0,1]; 0 log 0 = 0.
inline double jsd(const StanceDistribution& p, const StanceDistribution& q) {
    if (p.labels != q.labels) throw ConfigError("jsd: stance label sets differ");
    p.validate();
    q.validate();
    auto half_kl = [](double a, double m) { return a > 0.0 ? 0.5 * a * std::log2(a / m) : 0.0; };
    double out = 0.0;
    for (std::size_t k = 0; k < p.probabilities.size(); ++k) {
        const double a = p.probabilities[k];
        const double b = q.probabilities[k];
        const double m = 0.5 * (a + b);
        out += half_kl(a, m) + half_kl(b, m);
    }
    return std::clamp(out, 0.0, 1.0);
}

struct SeedFidelity {
    std::uint64_t seed = 0;
    std::optional<double> pearson_r;
    std::optional<double> jsd;

    bool operator==(const SeedFidelity&) const = default;
};

struct RoundDistribution {
    Round round = 0;
    std::vector<double> probabilities;

    bool operator==(const RoundDistribution&) const = default;
};

struct ReproductionSeries {
    std::string message_id;
    std::string platform;
    std::vector<TrajectoryPoint> values;

    bool operator==(const ReproductionSeries&) const = default;
};

struct MessageVolume {
    std::string cascade_id;
    std::size_t engagements = 0;
    std::size_t posts = 0;

    bool operator==(const MessageVolume&) const = default;
};

struct FidelityReport {
    std::string scenario;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> stance_labels = default_stance_labels();
    std::vector<RoundDistribution> distributions;
    Trajectory trajectory;       // opinion index
    Trajectory negative_share;
    std::string correlated_series = "opinion_index";
    bool has_ground_truth = false;
    std::optional<double> pearson_r;
    std::optional<std::string> pearson_note;
    std::optional<double> jsd;
    std::vector<SeedFidelity> per_seed;
    std::vector<ReproductionSeries> reproduction;
    std::vector<MessageVolume> volumes;
    std::string reproduction_scope = "full platform graph";

    bool operator==(const FidelityReport&) const = default;
};

struct GroundTruthView {
    Trajectory trajectory;
    StanceDistribution final_stances;
    std::string series = "opinion_index";
};

// Report for a single run.
inline FidelityReport build_report(const std::string& scenario, std::uint64_t seed, const RunResult& run,
                                   std::span<const double> topic, const StanceThresholds& thresholds = {},
                                   const std::optional<GroundTruthView>& truth = std::nullopt,
                                   std::vector<std::string> labels = default_stance_labels()) {
    FidelityReport rep;
    rep.scenario = scenario;
    rep.seeds = {seed};
    rep.stance_labels = labels;
    for (const auto& snap : run.snapshots) {
        rep.distributions.push_back({snap.round, stance_distribution(snap, topic, thresholds, labels).probabilities});
    }
    if (run.snapshots.size() >= 2) {
        rep.trajectory = simulated_trajectory(run.snapshots, topic);
    } else {
        for (const auto& snap : run.snapshots) {
            double s = 0.0;
            for (const auto& z : snap.personas) s += dot(z, topic);
            rep.trajectory.points.push_back({snap.round, s / static_cast<double>(snap.personas.size())});
        }
    }
    rep.negative_share = negative_share_trajectory(run.snapshots, topic, thresholds);

    std::map<std::pair<std::string, std::string>, std::size_t> series_index;
    std::map<std::string, std::size_t> volume_index;
    for (const auto& trace : run.traces) {
        for (const auto& r : trace.reproduction) {
            auto key = std::make_pair(r.message_id, r.platform);
            auto [it, fresh] = series_index.emplace(key, rep.reproduction.size());
            if (fresh) rep.reproduction.push_back({r.message_id, r.platform, {}});
            rep.reproduction[it->second].values.push_back({trace.round, r.value});
        }
        for (const auto& e : trace.engagements) {
            if (!e.engaged) continue;
            auto [it, fresh] = volume_index.emplace(e.cascade_id, rep.volumes.size());
            if (fresh) rep.volumes.push_back({e.cascade_id, 0, 0});
            ++rep.volumes[it->second].engagements;
        }
        for (const auto& p : trace.posts) {
            auto [it, fresh] = volume_index.emplace(p.cascade_id, rep.volumes.size());
            if (fresh) rep.volumes.push_back({p.cascade_id, 0, 0});
            ++rep.volumes[it->second].posts;
        }
    }

    SeedFidelity fid{seed, std::nullopt, std::nullopt};
    if (truth) {
        rep.has_ground_truth = true;
        rep.correlated_series = truth->series;
        const Trajectory& simulated = truth->series == "negative_share" ? rep.negative_share : rep.trajectory;
        try {
            fid.pearson_r = pearson_r(truth->trajectory, simulated);
        } catch (const UndefinedCorrelation& e) {
            rep.pearson_note = e.what();
        } catch (const PreconditionError& e) {
            rep.pearson_note = e.what();
        }
        if (!rep.distributions.empty() && !truth->final_stances.probabilities.empty()) {
            StanceDistribution final_sim{labels, rep.distributions.back().probabilities};
            fid.jsd = jsd(truth->final_stances, final_sim);
        }
    }
    rep.pearson_r = fid.pearson_r;
    rep.jsd = fid.jsd;
    rep.per_seed = {fid};
    return rep;
}

namespace detail {

inline std::optional<double> mean_of(const std::vector<std::optional<double>>& xs) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& x : xs) {
        if (x) {
            sum += *x;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

}  // namespace detail

// Arithmetic mean over seeds. Reports are put in a canonical order first so
// the result does not depend on the order they were passed in.
inline FidelityReport aggregate_seeds(std::span<const FidelityReport> reports) {
    if (reports.empty()) throw PreconditionError("aggregate_seeds needs at least one report");
    std::vector<const FidelityReport*> sorted;
    for (const auto& r : reports) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const FidelityReport* a, const FidelityReport* b) {
        if (a->seeds != b->seeds) return a->seeds < b->seeds;
        auto key = [](const FidelityReport* r) {
            return std::make_tuple(r->pearson_r.value_or(-2.0), r->jsd.value_or(-1.0));
        };
        return key(a) < key(b);
    });

    const FidelityReport& first = *sorted.front();
    auto mismatch = [](const std::string& what) { throw ConfigError("aggregate_seeds: reports differ in " + what); };
    for (const auto* r : sorted) {
        if (r->stance_labels != first.stance_labels) mismatch("stance labels");
        if (r->distributions.size() != first.distributions.size()) mismatch("round count");
        if (r->trajectory.points.size() != first.trajectory.points.size()) mismatch("trajectory length");
        if (r->has_ground_truth != first.has_ground_truth) mismatch("ground-truth presence");
        if (r->reproduction.size() != first.reproduction.size()) mismatch("tracked messages");
        for (std::size_t k = 0; k < r->distributions.size(); ++k) {
            if (r->distributions[k].round != first.distributions[k].round) mismatch("round indices");
        }
        for (std::size_t k = 0; k < r->reproduction.size(); ++k) {
            if (r->reproduction[k].message_id != first.reproduction[k].message_id ||
                r->reproduction[k].platform != first.reproduction[k].platform ||
                r->reproduction[k].values.size() != first.reproduction[k].values.size()) {
                mismatch("reproduction series");
            }
        }
    }
    if (sorted.size() == 1) return first;

    const double count = static_cast<double>(sorted.size());
    FidelityReport out;
    out.scenario = first.scenario;
    out.stance_labels = first.stance_labels;
    out.has_ground_truth = first.has_ground_truth;
    out.correlated_series = first.correlated_series;
    out.reproduction_scope = first.reproduction_scope;

    std::vector<std::optional<double>> rs;
    std::vector<std::optional<double>> js;
    for (const auto* r : sorted) {
        for (auto s : r->seeds) out.seeds.push_back(s);
        for (const auto& f : r->per_seed) {
            out.per_seed.push_back(f);
            rs.push_back(f.pearson_r);
            js.push_back(f.jsd);
        }
    }
    out.pearson_r = detail::mean_of(rs);
    out.jsd = detail::mean_of(js);
    if (out.has_ground_truth && !out.pearson_r) out.pearson_note = "undefined for every seed";

    out.distributions = first.distributions;
    for (std::size_t k = 0; k < out.distributions.size(); ++k) {
        auto& probs = out.distributions[k].probabilities;
        std::fill(probs.begin(), probs.end(), 0.0);
        for (const auto* r : sorted) {
            for (std::size_t c = 0; c < probs.size(); ++c) probs[c] += r->distributions[k].probabilities[c];
        }
        double total = 0.0;
        for (double& p : probs) total += (p /= count);
        if (total > 0.0) {
            for (double& p : probs) p /= total;
        }
    }
    auto mean_series = [&](auto member) {
        Trajectory t = first.*member;
        for (std::size_t k = 0; k < t.points.size(); ++k) {
            double s = 0.0;
            for (const auto* r : sorted) s += (r->*member).points[k].value;
            t.points[k].value = s / count;
        }
        return t;
    };
    out.trajectory = mean_series(&FidelityReport::trajectory);
    out.negative_share = mean_series(&FidelityReport::negative_share);

    out.reproduction = first.reproduction;
    for (std::size_t k = 0; k < out.reproduction.size(); ++k) {
        for (std::size_t j = 0; j < out.reproduction[k].values.size(); ++j) {
            double s = 0.0;
            for (const auto* r : sorted) s += r->reproduction[k].values[j].value;
            out.reproduction[k].values[j].value = s / count;
        }
    }

    std::map<std::string, MessageVolume> volumes;
    for (const auto* r : sorted) {
        for (const auto& v : r->volumes) {
            auto& acc = volumes[v.cascade_id];
            acc.cascade_id = v.cascade_id;
            acc.engagements += v.engagements;
            acc.posts += v.posts;
        }
    }
    for (auto& [id, v] : volumes) out.volumes.push_back(v);
    return out;
}

}  // namespace opcascade
