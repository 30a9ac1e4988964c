#include <gtest/gtest.h>

#include "opcascade/cases.hpp"
#include "opcascade/engine.hpp"
#include "opcascade/simulation.hpp"
#include "opcascade/trace_io.hpp"
#include "opcascade/verify/acceptance.hpp"
#include "opcascade/verify/ic_oracle.hpp"
#include "test_util.hpp"

using namespace opcascade;

namespace {

struct TwoNode {
    std::shared_ptr<TextProvider> provider = std::make_shared<DeterministicLocalProvider>(ProviderDims{2, 1});

    // Agent 1 follows agent 0; logit is +20 on the edge when forced.
    World make(bool forced, std::uint64_t seed = 3, EngineOptions opts = {}) const {
        SimulationConfig cfg;
        cfg.seed = seed;
        cfg.num_agents = 2;
        cfg.rounds = 3;
        cfg.embedding_dim = 2;
        cfg.emotion_dim = 1;
        cfg.post_probability = 1.0;
        cfg.platforms = {PlatformParams{"p", 0.0, 0.0, 0.0, 0.0, forced ? 20.0 : -20.0}};
        std::vector<AgentProfile> profiles(2);
        profiles[0].agent_id = "u";
        profiles[1].agent_id = "v";
        for (auto& p : profiles) {
            p.platform = "p";
            p.followers = 5;
            p.params.alpha = 1.0;
            p.params.gamma = 0.1;
            p.params.eta = 0.9;
        }
        calibrate_influence(profiles);
        std::vector<AgentState> states{{{0.0, 1.0}, {0.0}, EpisodicMemory(8)}, {{1.0, 0.0}, {1.0}, EpisodicMemory(8)}};
        return World(cfg, profiles, states, {PlatformNetwork("p", 2, {{1, 0}})}, provider, opts);
    }
};

Injection seed_msg(std::size_t sender, std::vector<std::size_t> targets, Round round = 1, std::string id = "m") {
    Injection inj;
    inj.message = testutil::make_message(id, {0.0, 1.0}, {1.0}, round);
    inj.sender = sender;
    inj.targets = Targets::only(std::move(targets));
    return inj;
}

}  // namespace

TEST(Engine, EmptyRoundChangesOnlyTheCounter) {
    World w = TwoNode{}.make(true);
    const auto before = w.snapshot();
    const RoundTrace t = w.step_round(1);
    EXPECT_EQ(t.evaluated_edges, 0u);
    EXPECT_TRUE(t.engagements.empty());
    EXPECT_EQ(w.completed_rounds(), 1u);
    EXPECT_EQ(w.snapshot().personas, before.personas);
}

TEST(Engine, ForcedEngagementMovesPersonaPerDualUpdate) {
    World w = TwoNode{}.make(true);
    w.schedule(seed_msg(0, {1}));
    const RoundTrace t = w.step_round(1);
    ASSERT_EQ(t.engagements.size(), 1u);
    EXPECT_TRUE(t.engagements[0].engaged);
    EXPECT_GT(t.engagements[0].probability, 1.0 - 1e-6);
    // Same numbers as the hand-computed dual update.
    EXPECT_NEAR(w.states()[1].persona[0], 0.9973384305357951, 1e-12);
    EXPECT_NEAR(w.states()[1].persona[1], 0.07291128154405782, 1e-12);
    EXPECT_NEAR(w.states()[1].affect[0], 0.9, 1e-12);
    EXPECT_EQ(w.states()[1].memory.size(), 1u);
}

TEST(Engine, SuppressedEdgeNeverFires) {
    World w = TwoNode{}.make(false);
    w.schedule(seed_msg(0, {1}));
    const RoundTrace t = w.step_round(1);
    ASSERT_EQ(t.engagements.size(), 1u);
    EXPECT_FALSE(t.engagements[0].engaged);
    EXPECT_EQ(w.states()[1].persona, (Vector{1.0, 0.0}));
}

TEST(Engine, PostsArriveNextRoundAndCascadeEngagesOnce) {
    World w = TwoNode{}.make(true);
    Injection inj = seed_msg(0, {0, 1});
    inj.sender.reset();
    w.schedule(inj);
    RoundTrace t1 = w.step_round(1);
    EXPECT_EQ(t1.engaged_count(), 2u);
    ASSERT_EQ(t1.posts.size(), 2u);
    for (const auto& p : t1.posts) EXPECT_EQ(p.cascade_id, "m");
    // u's repost reaches v, who already engaged with this cascade.
    RoundTrace t2 = w.step_round(2);
    EXPECT_EQ(t2.skipped_engaged, 1u);
    EXPECT_EQ(t2.evaluated_edges, 0u);
}

TEST(Engine, SenderDoesNotReengageItsOwnCascade) {
    TwoNode tn;
    SimulationConfig cfg;
    World w = tn.make(true);
    w.schedule(seed_msg(0, {0}));  // u sends to itself
    const RoundTrace t = w.step_round(1);
    EXPECT_EQ(t.evaluated_edges, 0u);
    EXPECT_EQ(t.skipped_engaged, 1u);
}

TEST(Engine, InjectToEmptySetOnlyRegisters) {
    World w = TwoNode{}.make(true);
    w.inject_message(seed_msg(0, {}));
    EXPECT_EQ(w.tracked().size(), 1u);
    EXPECT_EQ(w.inbox_size(0) + w.inbox_size(1), 0u);
    EXPECT_EQ(w.step_round(1).evaluated_edges, 0u);
}

TEST(Engine, OrganizationStatementReachesEveryone) {
    World w = TwoNode{}.make(true);
    Injection inj;
    inj.message = testutil::make_message("statement", {0.0, 1.0}, {0.5}, 1);
    inj.sender_influence = 1.0;
    w.inject_message(inj);
    EXPECT_EQ(w.inbox_size(0), 1u);
    EXPECT_EQ(w.inbox_size(1), 1u);
}

TEST(Engine, DuplicateDeliveriesCoalesce) {
    World w = TwoNode{}.make(true);
    Injection a = seed_msg(0, {1, 1, 1});
    a.sender.reset();
    w.inject_message(a);
    w.inject_message(seed_msg(0, {1}, 1, "other"));
    const RoundTrace t = w.step_round(1);
    EXPECT_EQ(t.inbox_items, 4u);
    EXPECT_EQ(t.coalesced_items, 2u);
    EXPECT_EQ(t.evaluated_edges, 2u);
}

TEST(Engine, OverflowCapDropsExcess) {
    TwoNode tn;
    SimulationConfig cfg;
    World base = tn.make(true);
    cfg = base.config();
    cfg.max_messages_per_agent_per_round = 2;
    std::vector<AgentProfile> profiles(base.profiles().begin(), base.profiles().end());
    std::vector<AgentState> states(base.states().begin(), base.states().end());
    World w(cfg, profiles, states, {PlatformNetwork("p", 2, {{1, 0}})}, tn.provider);
    for (int k = 0; k < 5; ++k) w.inject_message(seed_msg(0, {1}, 1, "m" + std::to_string(k)));
    const RoundTrace t = w.step_round(1);
    EXPECT_EQ(t.dropped_overflow, 3u);
    EXPECT_EQ(t.evaluated_edges, 2u);
    EXPECT_FALSE(t.notes.empty());
}

TEST(Engine, DormantAgentsDropTheirInbox) {
    EngineOptions opts;
    opts.dormancy = {{1, 1, 1}};
    World w = TwoNode{}.make(true, 3, opts);
    w.schedule(seed_msg(0, {1}));
    const RoundTrace t = w.step_round(1);
    EXPECT_EQ(t.dropped_dormant, 1u);
    EXPECT_EQ(t.evaluated_edges, 0u);
}

TEST(Engine, RoundsMustBeSequential) {
    World w = TwoNode{}.make(true);
    EXPECT_THROW(w.step_round(2), PreconditionError);
    w.step_round(1);
    EXPECT_THROW(w.schedule(seed_msg(0, {1}, 1)), PreconditionError);
    EXPECT_THROW(w.inject_message(seed_msg(0, {1}, 5)), PreconditionError);
}

TEST(Engine, UnknownPlatformOrTargetRejected) {
    World w = TwoNode{}.make(true);
    Injection inj = seed_msg(0, {7});
    EXPECT_THROW(w.inject_message(inj), ConfigError);
    inj = seed_msg(0, {1});
    inj.message.platform = "nowhere";
    EXPECT_THROW(w.inject_message(inj), ConfigError);
}

TEST(Engine, SameSeedSameDigests) {
    auto run = [](std::uint64_t seed) {
        Scenario s = flagship_case();
        return run_scenario(s, seed, std::make_shared<DeterministicLocalProvider>(ProviderDims{64, 8})).run;
    };
    const RunResult a = run(4), b = run(4), c = run(5);
    ASSERT_EQ(a.traces.size(), 10u);
    for (std::size_t k = 0; k < a.traces.size(); ++k) EXPECT_EQ(a.traces[k].rng_digest, b.traces[k].rng_digest);
    EXPECT_EQ(a.traces, b.traces);
    EXPECT_NE(a.traces.front().rng_digest, c.traces.front().rng_digest);
}

TEST(Engine, ZeroRoundScenarioHasNoTraces) {
    Scenario s = minimal_case();
    s.config.rounds = 0;
    s.timeline.clear();
    const auto r = run_scenario(s, 1, std::make_shared<DeterministicLocalProvider>(ProviderDims{4, 2}));
    EXPECT_TRUE(r.run.traces.empty());
    EXPECT_EQ(r.run.snapshots.size(), 1u);
}

TEST(Engine, ReproductionTrackedPerMessageAndPlatform) {
    Scenario s = flagship_case();
    const auto r = run_scenario(s, 1, std::make_shared<DeterministicLocalProvider>(ProviderDims{64, 8}));
    // Round 1 tracks the one injected event on both platforms.
    ASSERT_EQ(r.run.traces[0].reproduction.size(), 2u);
    for (const auto& rec : r.run.traces[0].reproduction) {
        EXPECT_EQ(rec.message_id, "defect-report");
        EXPECT_TRUE(rec.converged);
        EXPECT_EQ(rec.supercritical, rec.value > 1.0);
    }
    EXPECT_EQ(r.run.traces.back().reproduction.size(), 8u);
}

TEST(Engine, TraceJsonRoundTrip) {
    Scenario s = flagship_case();
    const auto r = run_scenario(s, 2, std::make_shared<DeterministicLocalProvider>(ProviderDims{64, 8}));
    for (const auto& t : r.run.traces) {
        const auto j = trace_to_json(t);
        EXPECT_EQ(trace_from_json(nlohmann::json::parse(j.dump())), t);
    }
}

TEST(Engine, EmbedGeneratedTextMode) {
    Scenario s = recall_case();
    const ProviderDims dims{s.config.embedding_dim, s.config.emotion_dim};
    const auto r = run_scenario(s, 1, std::make_shared<DeterministicLocalProvider>(dims));
    std::size_t posts = 0;
    for (const auto& t : r.run.traces) posts += t.posts.size();
    EXPECT_GT(posts, 0u);
    for (const auto& snap : r.run.snapshots)
        for (const auto& z : snap.personas) EXPECT_NEAR(norm2(z), 1.0, 1e-9);
}

// Small-graph IC check: a fixed 5-node graph against exhaustive enumeration.
TEST(Engine, IcReductionFiveNodeGraph) {
    const std::vector<Edge> edges{{1, 0}, {2, 0}, {3, 1}, {3, 2}, {4, 3}, {2, 1}, {0, 4}};
    std::vector<verify::IcEdge> ic;
    for (const auto& e : edges) ic.push_back({e.sender, e.receiver, 0.4});
    const auto exact = verify::ic_activation_exact(5, ic, {0});
    // Frozen independently.
    const std::vector<double> frozen{1.0, 0.4, 0.496, 0.31744, 0.126976};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(exact[i], frozen[i], 1e-12);

    auto provider = std::make_shared<verify::FixedTextProvider>(ProviderDims{2, 1});
    const std::size_t runs = 20000;
    std::vector<double> freq(5, 0.0);
    for (std::size_t run = 0; run < runs; ++run) {
        World w = verify::detail::ic_world(5, edges, 0.4, 1000 + run, provider);
        verify::detail::seed_cascade(w, 0);
        std::vector<char> active(5, 0);
        active[0] = 1;
        while (!verify::detail::quiet(w)) {
            for (const auto& e : w.step_round(w.next_round()).engagements) active[e.agent] |= e.engaged;
        }
        for (std::size_t i = 0; i < 5; ++i) freq[i] += active[i] / static_cast<double>(runs);
    }
    // 20k runs: 4 standard errors is under 0.015 for every node.
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(freq[i], exact[i], 0.015) << "node " << i;
}

TEST(Simulation, InitialPersonaIsNeutralWithoutPrior) {
    const Vector topic{1.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 20; ++i) {
        const Vector z = initial_persona(9, i, topic, std::nullopt, 0.0);
        EXPECT_NEAR(norm2(z), 1.0, 1e-12);
        EXPECT_NEAR(dot(z, topic), 0.0, 1e-12);
    }
    const Vector toward = initial_persona(9, 0, topic, Vector{-1.0, 0.0, 0.0, 0.0}, 0.5);
    EXPECT_LT(dot(toward, topic), -0.5);
}

TEST(Simulation, RejectsProviderDimensionMismatch) {
    EXPECT_THROW(build_simulation(minimal_case(), 1, std::make_shared<DeterministicLocalProvider>(ProviderDims{8, 2})),
                 ConfigError);
}

TEST(Simulation, MinimalCaseCascade) {
    const auto r = run_scenario(minimal_case(), 1, std::make_shared<DeterministicLocalProvider>(ProviderDims{4, 2}));
    ASSERT_EQ(r.run.traces.size(), 2u);
    // Round 1: only alice is targeted.
    ASSERT_EQ(r.run.traces[0].engagements.size(), 1u);
    EXPECT_EQ(r.run.traces[0].engagements[0].agent, 0u);
}
