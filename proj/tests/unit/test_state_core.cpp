#include <cmath>

#include <gtest/gtest.h>

#include "opcascade/state_core.hpp"
#include "test_util.hpp"

using namespace opcascade;

namespace {

MemoryRecord rec(Vector v, Round r) { return MemoryRecord{v, Vector{0.0}, v, r}; }

}  // namespace

TEST(Recall, SingleRecordReturnsItsVector) {
    AgentParams p;
    const Vector v{0.3, -0.4, 0.5};
    std::vector<MemoryRecord> mem{rec(v, 4)};
    const Vector c = retrieve_context(mem, Vector{1.0, 0.0, 0.0}, 5, p);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_DOUBLE_EQ(c[k], v[k]);
}

TEST(Recall, RecencyHalvingGivesTwoThirdsOneThird) {
    AgentParams p;
    p.delta = 0.5;
    const Vector v{0.6, 0.8};
    std::vector<MemoryRecord> mem{rec(v, 3), rec(v, 4)};  // now-2, now-1
    const Vector w = retrieval_weights(mem, Vector{1.0, 0.0}, 5, p);
    EXPECT_NEAR(w[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(w[1], 2.0 / 3.0, 1e-15);
}

TEST(Recall, EmptyMemoryGivesZeroContext) {
    const Vector c = retrieve_context({}, Vector{1.0, 0.0, 0.0}, 1, AgentParams{});
    EXPECT_EQ(c, (Vector{0.0, 0.0, 0.0}));
}

TEST(Recall, ZeroBetaIsPureRecency) {
    AgentParams p;
    p.beta = 0.0;
    p.delta = 0.8;
    std::vector<MemoryRecord> mem{rec({1.0, 0.0}, 1), rec({0.0, 1.0}, 2), rec({-1.0, 0.0}, 3)};
    const Vector w = retrieval_weights(mem, Vector{1.0, 0.0}, 4, p);
    const double z = 0.8 * 0.8 * 0.8 + 0.8 * 0.8 + 0.8;
    EXPECT_NEAR(w[0], 0.8 * 0.8 * 0.8 / z, 1e-15);
    EXPECT_NEAR(w[1], 0.8 * 0.8 / z, 1e-15);
    EXPECT_NEAR(w[2], 0.8 / z, 1e-15);
}

TEST(Recall, LargeBetaDoesNotOverflow) {
    AgentParams p;
    p.beta = 5000.0;
    std::vector<MemoryRecord> mem{rec({1.0, 0.0}, 1), rec({0.0, 1.0}, 1)};
    const Vector w = retrieval_weights(mem, Vector{1.0, 0.0}, 2, p);
    EXPECT_TRUE(std::isfinite(w[0]));
    EXPECT_NEAR(w[0] + w[1], 1.0, 1e-12);
    EXPECT_GT(w[0], 0.999);
}

TEST(Recall, OnlyRecordsBeforeNowAreVisible) {
    EpisodicMemory mem(8);
    mem.push(rec({1.0, 0.0}, 1));
    mem.push(rec({0.0, 1.0}, 2));
    mem.push(rec({0.0, 1.0}, 2));
    EXPECT_EQ(mem.before(1).size(), 0u);
    EXPECT_EQ(mem.before(2).size(), 1u);
    EXPECT_EQ(mem.before(3).size(), 3u);
}

TEST(DualUpdate, HandComputedVectorCase) {
    AgentParams p;
    p.alpha = 1.0;
    p.gamma = 0.1;
    p.eta = 0.9;
    const DualStep s = dual_step(Vector{1.0, 0.0}, Vector{1.0}, Vector{0.0, 1.0}, Vector{1.0}, p);
    // Frozen from an independent scalar evaluation.
    EXPECT_NEAR(s.gate, 0.7310585786300049, 1e-15);
    EXPECT_NEAR(s.affect[0], 0.9, 1e-15);
    EXPECT_NEAR(s.persona[0], 0.9973384305357951, 1e-12);
    EXPECT_NEAR(s.persona[1], 0.07291128154405782, 1e-12);
}

TEST(DualUpdate, ParallelContentLeavesPersona) {
    AgentParams p;
    const Vector z{0.6, 0.8, 0.0};
    const DualStep s = dual_step(z, Vector{0.2}, Vector{1.2, 1.6, 0.0}, Vector{0.5}, p);
    for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(s.persona[k], z[k], 1e-15);
}

TEST(DualUpdate, ZeroGammaIsPureDecay) {
    AgentParams p;
    p.gamma = 0.0;
    p.eta = 0.7;
    const Vector z{0.0, 1.0};
    const DualStep s = dual_step(z, Vector{0.5, -1.0}, Vector{1.0, 0.0}, Vector{1.0, 1.0}, p);
    EXPECT_EQ(s.persona, z);
    EXPECT_NEAR(s.affect[0], 0.35, 1e-15);
    EXPECT_NEAR(s.affect[1], -0.7, 1e-15);
}

TEST(DualUpdate, DimensionMismatchThrows) {
    EXPECT_THROW(dual_step(Vector{1.0, 0.0}, Vector{0.0}, Vector{1.0, 0.0, 0.0}, Vector{0.0}, AgentParams{}), ConfigError);
    EXPECT_THROW(dual_step(Vector{1.0, 0.0}, Vector{0.0}, Vector{1.0, 0.0}, Vector{0.0, 0.0}, AgentParams{}), ConfigError);
}

TEST(DualUpdate, AffectStaysBoundedOverLongRuns) {
    AgentParams p;
    p.gamma = 0.5;
    p.eta = 0.5;
    Vector z{1.0, 0.0}, r{1.0, -1.0};
    for (int k = 0; k < 1000; ++k) {
        const DualStep s = dual_step(z, r, Vector{0.0, 1.0}, Vector{1.0, -1.0}, p);
        z = s.persona;
        r = s.affect;
        for (double a : r) ASSERT_LE(std::abs(a), 1.0);
        ASSERT_NEAR(norm2(z), 1.0, 1e-12);
    }
}

TEST(Tangent, Projector) {
    const Vector z{0.0, 0.6, 0.8};
    for (double x : project_tangent(z, z)) EXPECT_NEAR(x, 0.0, 1e-15);
    const Vector orth{1.0, 0.0, 0.0};
    EXPECT_EQ(project_tangent(orth, z), orth);
    const Vector v{0.3, -1.1, 2.5};
    const Vector once = project_tangent(v, z);
    const Vector twice = project_tangent(once, z);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(once[k], twice[k], 1e-12);
}

TEST(Activation, AllZeroWeightsWithBiasEqualThetaIsHalf) {
    AgentParams p;
    p.theta = 0.7;
    PlatformParams pl{"p", 0.0, 0.0, 0.0, 0.0, 0.7};
    AgentState st{{1.0, 0.0}, {0.3}, EpisodicMemory(4)};
    const auto m = testutil::make_message("m", {0.0, 1.0}, {1.0});
    EXPECT_DOUBLE_EQ(activation_probability(st, Vector{0.0, 0.0}, m, 0.4, pl, p), 0.5);
}

TEST(Activation, AlignmentOnlyLogistic) {
    AgentParams p;
    PlatformParams pl{"p", 1.0, 0.0, 0.0, 0.0, 0.0};
    AgentState st{{1.0, 0.0}, {0.0}, EpisodicMemory(4)};
    const auto m = testutil::make_message("m", {0.5, std::sqrt(0.75)}, {0.0});
    EXPECT_NEAR(activation_probability(st, Vector{0.0, 0.0}, m, 0.0, pl, p), 0.6224593312018546, 1e-12);
}

TEST(Activation, IcConfigurationIgnoresStateAndContent) {
    AgentParams p;
    p.theta = 0.2;
    PlatformParams pl{"p", 0.0, 0.0, 0.0, 1.5, -0.3};
    AgentState a{{1.0, 0.0}, {1.0}, EpisodicMemory(4)};
    AgentState b{{0.0, -1.0}, {-0.5}, EpisodicMemory(4)};
    const auto m1 = testutil::make_message("a", {1.0, 0.0}, {1.0});
    const auto m2 = testutil::make_message("b", {0.0, 1.0}, {-1.0});
    const double pa = activation_probability(a, Vector{0.3, 0.1}, m1, 0.6, pl, p);
    const double pb = activation_probability(b, Vector{-0.9, 0.0}, m2, 0.6, pl, p);
    EXPECT_EQ(pa, pb);
}

TEST(Activation, LogisticSaturatesWithoutOverflow) {
    EXPECT_EQ(logistic(-1000.0), 0.0);
    EXPECT_EQ(logistic(1000.0), 1.0);
    EXPECT_NEAR(logistic(20.0), 1.0 - 2.061153618190204e-9, 1e-15);
}

TEST(Memory, AppendAndEvict) {
    AgentState st{{1.0, 0.0}, {0.0}, EpisodicMemory(2)};
    st = record_memory(std::move(st), testutil::make_message("a", {1.0, 0.0}, {0.0}, 1));
    EXPECT_EQ(st.memory.size(), 1u);
    st = record_memory(std::move(st), testutil::make_message("b", {0.0, 1.0}, {0.0}, 1));
    st = record_memory(std::move(st), testutil::make_message("c", {-1.0, 0.0}, {0.0}, 2));
    ASSERT_EQ(st.memory.size(), 2u);
    EXPECT_EQ(st.memory.records()[0].content_embedding, (Vector{0.0, 1.0}));
    EXPECT_EQ(st.memory.records()[1].content_embedding, (Vector{-1.0, 0.0}));
}

TEST(Memory, SameRoundKeepsInsertionOrder) {
    EpisodicMemory mem(4);
    mem.push(rec({1.0, 0.0}, 3));
    mem.push(rec({0.0, 1.0}, 3));
    EXPECT_EQ(mem.records()[0].memory_vector, (Vector{1.0, 0.0}));
    EXPECT_EQ(mem.records()[1].memory_vector, (Vector{0.0, 1.0}));
}

TEST(Memory, RejectsOutOfOrderAndZeroCapacity) {
    EpisodicMemory mem(4);
    mem.push(rec({1.0, 0.0}, 3));
    EXPECT_THROW(mem.push(rec({1.0, 0.0}, 2)), PreconditionError);
    EXPECT_THROW(EpisodicMemory(0), ConfigError);
}

TEST(Params, ValidateRejectsOutOfRange) {
    AgentParams p;
    p.delta = 1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = AgentParams{};
    p.eta = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = AgentParams{};
    p.gamma = -0.1;
    EXPECT_THROW(p.validate(), ConfigError);
    EXPECT_NO_THROW(AgentParams{}.validate());
}
