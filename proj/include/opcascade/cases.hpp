#pragma once

// Bundled synthetic cases. All of them are illustrative stand-ins: the ground
// truth series are hand-shaped curves, not observations of any real crisis.

#include <optional>
#include <string>
#include <vector>

#include "opcascade/rng.hpp"
#include "opcascade/scenario.hpp"

namespace opcascade {

namespace detail {

// Unit vector a*topic + b*noise, noise orthogonal to the topic.
inline Vector topic_mix(const Vector& topic, double a, double b, Rng& rng) {
    Vector noise(topic.size());
    for (double& x : noise) x = rng.normal();
    const double c = dot(noise, topic);
    for (std::size_t k = 0; k < noise.size(); ++k) noise[k] -= c * topic[k];
    normalize_in_place(noise);
    Vector out(topic.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * topic[k] + b * noise[k];
    return normalized(out);
}

// anger anticipation disgust fear joy sadness surprise trust
inline Vector emotion8(double anger, double antic, double disgust, double fear, double joy, double sad,
                       double surprise, double trust) {
    return {anger, antic, disgust, fear, joy, sad, surprise, trust};
}

}  // namespace detail

// 100 agents, 10 rounds, two platforms, vector-level (no text model needed).
inline Scenario flagship_case() {
    Scenario s;
    s.name = "flagship-synthetic";
    s.description =
        "SYNTHETIC illustrative case: a consumer brand faces a product-defect crisis, "
        "apologizes on day 4 and announces compensation on day 7. Ground truth is a hand-shaped curve.";
    SimulationConfig& c = s.config;
    c.seed = 1;
    c.num_agents = 100;
    c.rounds = 10;
    c.embedding_dim = 64;
    c.emotion_dim = 8;
    c.post_probability = 0.5;
    c.memory_capacity = 64;
    c.platforms = {PlatformParams{"microblog", 1.2, 0.8, 0.6, 1.0, -1.0},
                   PlatformParams{"forum", 1.0, 1.0, 0.8, 0.5, -1.5}};

    Rng rng(0x5eed'f1a6'0001ULL);
    Vector topic(c.embedding_dim);
    for (double& x : topic) x = rng.normal();
    normalize_in_place(topic);
    s.topic_embedding = topic;

    Vector neg(topic.size()), pos = topic;
    for (std::size_t k = 0; k < topic.size(); ++k) neg[k] = -topic[k];
    PersonaLibrary lib;
    Stratum critics{"critics", 0.35, {{"age", "18-34"}, {"attitude", "skeptical"}}, "microblog", 5.5, 1.6, {},
                    neg, 0.15};
    Stratum loyalists{"loyalists", 0.25, {{"age", "35-54"}, {"attitude", "brand-loyal"}}, "forum", 4.5, 1.2, {},
                      pos, 0.15};
    Stratum bystanders{"bystanders", 0.40, {{"age", "mixed"}, {"attitude", "undecided"}}, "microblog", 4.0, 1.4, {},
                       std::nullopt, 0.0};
    lib.strata = {critics, loyalists, bystanders};
    s.persona_library = lib;

    s.networks = {NetworkSpec{"microblog", std::nullopt, NetworkGenerator{NetworkGenerator::Kind::preferential_attachment, 0.0, 3}},
                  NetworkSpec{"forum", std::nullopt, NetworkGenerator{NetworkGenerator::Kind::erdos_renyi, 0.04, 1}}};

    auto event = [&](std::string id, Round round, EventKind kind, std::string platform, std::string text, double a,
                     double b, Vector emotion) {
        TimelineEvent ev;
        ev.id = std::move(id);
        ev.round = round;
        ev.kind = kind;
        ev.platform = std::move(platform);
        ev.text = std::move(text);
        ev.embedding = detail::topic_mix(topic, a, b, rng);
        ev.emotion = std::move(emotion);
        return ev;
    };
    s.timeline = {
        event("defect-report", 1, EventKind::event, "microblog",
              "Viral video shows the blender jar shattering; users report injuries.", -0.85, 0.53,
              detail::emotion8(0.7, 0.2, 0.5, 0.6, -0.5, 0.3, 0.6, -0.6)),
        event("forum-thread", 2, EventKind::event, "forum",
              "Long forum thread collects dozens of similar defect reports.", -0.7, 0.71,
              detail::emotion8(0.5, 0.3, 0.4, 0.5, -0.4, 0.3, 0.2, -0.5)),
        event("apology", 4, EventKind::strategy, "microblog",
              "We are sorry. We take full responsibility and are pausing sales while we investigate.", 0.75, 0.66,
              detail::emotion8(-0.3, 0.4, -0.2, -0.2, 0.2, 0.3, 0.0, 0.7)),
        event("compensation", 7, EventKind::strategy, "microblog",
              "Every affected customer gets a full refund and a redesigned jar, shipped free.", 0.8, 0.6,
              detail::emotion8(-0.4, 0.4, -0.2, -0.3, 0.6, 0.0, 0.1, 0.6)),
    };

    GroundTruth gt;
    gt.trajectory = {{1, -0.04}, {2, -0.10}, {3, -0.14}, {4, -0.13}, {5, -0.10},
                     {6, -0.08}, {7, -0.05}, {8, -0.02}, {9, -0.01}, {10, 0.00}};
    gt.final_stances = {0.30, 0.50, 0.20};
    s.ground_truth = gt;
    return s;
}

// Text-level case: every vector comes from the text provider.
inline Scenario recall_case() {
    Scenario s;
    s.name = "recall-text";
    s.description = "SYNTHETIC illustrative case: a food brand recalls contaminated formula.";
    SimulationConfig& c = s.config;
    c.num_agents = 30;
    c.rounds = 6;
    c.post_probability = 0.4;
    c.platforms = {PlatformParams{"microblog", 1.0, 1.0, 0.5, 1.0, -1.0}};
    s.topic_text = "trust in the brand safety of the formula";
    PersonaLibrary lib;
    lib.strata = {Stratum{"parents", 0.6, {{"role", "parent"}}, "microblog", 4.0, 1.0, {}, std::nullopt, 0.0},
                  Stratum{"reporters", 0.4, {{"role", "journalist"}}, "microblog", 6.0, 1.0, {}, std::nullopt, 0.0}};
    s.persona_library = lib;
    s.networks = {NetworkSpec{"microblog", std::nullopt, NetworkGenerator{NetworkGenerator::Kind::preferential_attachment, 0.0, 2}}};
    TimelineEvent e1;
    e1.id = "recall-notice";
    e1.round = 1;
    e1.platform = "microblog";
    e1.text = "Recall: contaminated formula batches are unsafe, parents worried and angry";
    TimelineEvent e2;
    e2.id = "safety-update";
    e2.round = 3;
    e2.kind = EventKind::strategy;
    e2.platform = "microblog";
    e2.text = "We apologize. Refund for every family, independent safety investigation, transparent updates";
    s.timeline = {e1, e2};
    s.post_content = PostContent::embed_generated_text;
    return s;
}

// Two agents on one platform; agent 1 follows agent 0.
inline Scenario minimal_case() {
    Scenario s;
    s.name = "minimal";
    s.description = "Two-agent smoke case.";
    SimulationConfig& c = s.config;
    c.num_agents = 2;
    c.rounds = 2;
    c.embedding_dim = 4;
    c.emotion_dim = 2;
    c.post_probability = 1.0;
    c.platforms = {PlatformParams{"main", 1.0, 1.0, 1.0, 1.0, 0.0}};
    s.topic_embedding = Vector{1.0, 0.0, 0.0, 0.0};
    AgentSpec a;
    a.profile.agent_id = "alice";
    a.profile.platform = "main";
    a.profile.followers = 100;
    a.persona = Vector{0.0, 1.0, 0.0, 0.0};
    AgentSpec b = a;
    b.profile.agent_id = "bob";
    b.profile.followers = 10;
    b.persona = Vector{0.0, 0.0, 1.0, 0.0};
    s.agents = {a, b};
    s.networks = {NetworkSpec{"main", std::vector<Edge>{{1, 0}}, std::nullopt}};
    TimelineEvent ev;
    ev.id = "announcement";
    ev.round = 1;
    ev.platform = "main";
    ev.embedding = Vector{0.6, 0.8, 0.0, 0.0};
    ev.emotion = Vector{0.5, -0.5};
    ev.all_targets = false;
    ev.targets = {"alice"};
    s.timeline = {ev};
    return s;
}

inline std::vector<std::string> builtin_case_names() { return {"flagship", "recall", "minimal"}; }

inline std::optional<Scenario> builtin_case(const std::string& name) {
    if (name == "flagship") return flagship_case();
    if (name == "recall") return recall_case();
    if (name == "minimal") return minimal_case();
    return std::nullopt;
}

}  // namespace opcascade
