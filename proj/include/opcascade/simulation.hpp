#pragma once

// Scenario -> World. Everything random here is keyed by the run seed, so one
// (scenario, seed, provider) triple always builds the same world.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opcascade/engine.hpp"
#include "opcascade/metrics.hpp"
#include "opcascade/providers.hpp"
#include "opcascade/rng.hpp"
#include "opcascade/scenario.hpp"

namespace opcascade {

struct Simulation {
    World world;
    Vector topic;  // unit norm
};

// Topic direction: explicit embedding, else the embedded topic text, else the
// embedded description (or name).
inline Vector resolve_topic(const Scenario& s, TextProvider& provider) {
    if (s.topic_embedding) return normalized(*s.topic_embedding);
    if (s.topic_text) return provider.embed(*s.topic_text);
    return provider.embed(s.description.empty() ? s.name : s.description);
}

// Initial persona: a random direction orthogonal to the topic (stance 0), then
// pulled toward the prior direction by `mix`.
inline Vector initial_persona(std::uint64_t seed, std::size_t agent, std::span<const double> topic,
                              const std::optional<Vector>& prior, double mix) {
    Rng rng = Rng::derive(seed, StreamTag::persona_init, {agent});
    const std::size_t d = topic.size();
    Vector u(d);
    for (int attempt = 0;; ++attempt) {
        for (double& x : u) x = rng.normal();
        const double c = dot(u, topic);
        for (std::size_t k = 0; k < d; ++k) u[k] -= c * topic[k];
        if (norm2(u) > 1e-6 || d == 1) break;
        if (attempt > 64) throw NumericalError("persona initialization failed to leave the topic axis");
    }
    if (d == 1) u = {1.0};  // no orthogonal complement; the only unit directions are +-topic
    normalize_in_place(u);
    if (prior && mix > 0.0) {
        const Vector p = normalized(*prior);
        for (std::size_t k = 0; k < d; ++k) u[k] = (1.0 - mix) * u[k] + mix * p[k];
        normalize_in_place(u);
    }
    return u;
}

inline std::optional<GroundTruthView> ground_truth_view(const Scenario& s) {
    if (!s.ground_truth) return std::nullopt;
    const GroundTruth& gt = *s.ground_truth;
    return GroundTruthView{Trajectory{gt.trajectory}, StanceDistribution{gt.stance_labels, gt.final_stances}, gt.series};
}

inline Simulation build_simulation(const Scenario& s, std::uint64_t seed, std::shared_ptr<TextProvider> provider,
                                   EngineOptions options = {}) {
    if (!provider) throw ConfigError("build_simulation: a provider is required");
    if (auto issues = validate_scenario(s); !issues.empty()) throw ValidationError(std::move(issues));
    SimulationConfig cfg = s.config;
    cfg.seed = seed;
    const std::size_t n = cfg.num_agents;
    if (provider->dims().embedding != cfg.embedding_dim || provider->dims().emotion != cfg.emotion_dim) {
        throw ConfigError("provider dimensions do not match config.embedding_dim / config.emotion_dim");
    }

    std::vector<AgentSpec> specs = s.persona_library ? sample_personas(*s.persona_library, n, seed) : s.agents;
    std::vector<AgentProfile> profiles;
    profiles.reserve(n);
    for (const auto& a : specs) profiles.push_back(a.profile);
    calibrate_influence(profiles);

    Vector topic = resolve_topic(s, *provider);

    std::vector<AgentState> states;
    states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const AgentSpec& a = specs[i];
        AgentState st{a.persona ? normalized(*a.persona) : initial_persona(seed, i, topic, a.prior_direction, a.prior_mix),
                      a.affect ? *a.affect : Vector(cfg.emotion_dim, 0.0), EpisodicMemory(cfg.memory_capacity)};
        states.push_back(std::move(st));
    }

    std::vector<PlatformNetwork> networks;
    for (const auto& net : s.networks) {
        if (net.edges) networks.emplace_back(net.platform, n, *net.edges);
        else networks.push_back(generate_network(net.platform, *net.generator, n, seed));
    }

    options.post_content = s.post_content;
    for (const auto& w : s.dormancy) {
        auto it = std::find_if(profiles.begin(), profiles.end(), [&](const AgentProfile& p) { return p.agent_id == w.agent; });
        if (it == profiles.end()) throw ConfigError("dormancy: unknown agent id '" + w.agent + "'");
        options.dormancy.push_back({static_cast<std::size_t>(it - profiles.begin()), w.from, w.to});
    }
    World world(cfg, std::move(profiles), std::move(states), std::move(networks), provider, options);

    for (const auto& ev : s.timeline) {
        Injection inj;
        Message& m = inj.message;
        m.id = ev.id;
        m.cascade_id = ev.id;
        m.author = ev.author;
        m.platform = ev.platform;
        m.round = ev.round;
        m.text = ev.text;
        m.content_embedding = ev.embedding ? normalized(*ev.embedding) : provider->embed(*ev.text);
        m.emotion = ev.emotion ? *ev.emotion : provider->emote(*ev.text);
        inj.kind = ev.kind;
        if (ev.author == kOrganization) {
            inj.sender_influence = ev.author_influence.value_or(cfg.organization_influence);
        } else {
            auto idx = world.agent_index(ev.author);
            if (!idx) throw ConfigError("timeline event '" + ev.id + "': unknown author '" + ev.author + "'");
            inj.sender = *idx;
            inj.sender_influence = ev.author_influence.value_or(world.profiles()[*idx].influence);
        }
        inj.targets = ev.all_targets ? Targets::everyone() : Targets::only(world.resolve_agents(ev.targets));
        world.schedule(std::move(inj));
    }
    return {std::move(world), std::move(topic)};
}

struct ScenarioRun {
    RunResult run;
    FidelityReport report;
    Vector topic;
};

inline ScenarioRun run_scenario(const Scenario& s, std::uint64_t seed, std::shared_ptr<TextProvider> provider,
                                EngineOptions options = {}) {
    Simulation sim = build_simulation(s, seed, std::move(provider), std::move(options));
    RunResult run = run_rounds(sim.world, s.config.rounds);
    const auto labels = s.ground_truth ? s.ground_truth->stance_labels : default_stance_labels();
    FidelityReport report = build_report(s.name, seed, run, sim.topic, s.stance_thresholds, ground_truth_view(s), labels);
    return {std::move(run), std::move(report), std::move(sim.topic)};
}

}  // namespace opcascade
