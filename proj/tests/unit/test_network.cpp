#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "opcascade/network.hpp"
#include "opcascade/rng.hpp"
#include "opcascade/verify/dense_oracle.hpp"
#include "test_util.hpp"

using namespace opcascade;

namespace {

DenseMatrix complete(std::size_t n, double p) {
    DenseMatrix m(n, p);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
    return m;
}

std::vector<AgentProfile> profiles(std::size_t n) {
    std::vector<AgentProfile> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].agent_id = "a" + std::to_string(i);
        out[i].platform = "p";
        out[i].followers = 10;
    }
    calibrate_influence(out);
    return out;
}

std::vector<AgentState> states(std::size_t n) {
    std::vector<AgentState> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({{1.0, 0.0}, {0.0}, EpisodicMemory(4)});
    return out;
}

}  // namespace

TEST(Spectral, ClosedForms) {
    EXPECT_EQ(spectral_radius(DenseMatrix(5)).value, 0.0);
    DenseMatrix cyc(2);
    cyc(0, 1) = cyc(1, 0) = 0.5;
    EXPECT_NEAR(spectral_radius(cyc).value, 0.5, 1e-9);
    EXPECT_NEAR(spectral_radius(complete(3, 0.6)).value, 1.2, 1e-9);
    EXPECT_NEAR(spectral_radius(complete(20, 1.5 / 19)).value, 1.5, 1e-9);
}

TEST(Spectral, NilpotentAndTriangularAreExact) {
    DenseMatrix chain(4);
    chain(1, 0) = chain(2, 1) = chain(3, 2) = 0.9;  // strictly lower triangular
    const auto e = spectral_radius(chain);
    EXPECT_EQ(e.value, 0.0);
    EXPECT_TRUE(e.converged);
    DenseMatrix tri(3);
    tri(0, 0) = 0.2;
    tri(1, 1) = 0.7;
    tri(2, 2) = 0.4;
    tri(2, 0) = 5.0;
    EXPECT_NEAR(spectral_radius(tri).value, 0.7, 1e-12);
}

TEST(Spectral, PeriodicBlockConverges) {
    // Directed 3-cycle: eigenvalues are the cube roots of p^3, all of modulus p.
    DenseMatrix c(3);
    c(1, 0) = c(2, 1) = c(0, 2) = 0.8;
    const auto e = spectral_radius(c);
    EXPECT_TRUE(e.converged);
    EXPECT_NEAR(e.value, 0.8, 1e-9);
}

TEST(Spectral, MatchesEigenOracleOnRandomMatrices) {
    Rng rng(99);
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(15));
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (rng.uniform01() < 0.3) m(i, j) = rng.uniform(0.0, 2.0);
            }
        }
        EXPECT_NEAR(spectral_radius(m).value, verify::spectral_radius_dense_oracle(m), 1e-6) << "matrix " << k;
    }
}

TEST(Spectral, SparseAndDenseAgree) {
    DenseMatrix d(4);
    SparseMatrix s{4, {}};
    const std::vector<SparseEntry> es{{0, 1, 0.3}, {1, 2, 0.9}, {2, 0, 0.4}, {3, 3, 0.2}, {2, 3, 1.0}};
    for (const auto& e : es) {
        d(e.row, e.col) = e.value;
        s.entries.push_back(e);
    }
    EXPECT_NEAR(spectral_radius(d).value, spectral_radius(s).value, 1e-12);
}

TEST(Spectral, RejectsNegativeAndNonFinite) {
    DenseMatrix m(2);
    m(0, 1) = -0.1;
    EXPECT_THROW(spectral_radius(m), PreconditionError);
    m(0, 1) = std::nan("");
    EXPECT_THROW(spectral_radius(m), PreconditionError);
}

TEST(Network, EdgeQueriesAndDuplicatesMerge) {
    PlatformNetwork net("p", 3, {{1, 0}, {2, 0}, {2, 1}});
    EXPECT_EQ(net.in_degree(2), 2u);
    EXPECT_EQ(net.out_degree(0), 2u);
    EXPECT_TRUE(net.has_edge(1, 0));
    EXPECT_FALSE(net.has_edge(0, 1));
    EXPECT_THROW(PlatformNetwork("p", 2, {{0, 0}}), ConfigError);
    EXPECT_THROW(PlatformNetwork("p", 2, {{0, 5}}), ConfigError);
    EXPECT_EQ(PlatformNetwork("p", 2, {{0, 1}, {0, 1}}).edges().size(), 1u);
}

TEST(Network, EdgeListRoundTrip) {
    PlatformNetwork net("p", 4, {{1, 0}, {3, 2}, {0, 3}});
    std::ostringstream out;
    write_edge_list(out, net);
    std::istringstream in(out.str());
    const PlatformNetwork back = read_edge_list(in, "p", 4);
    EXPECT_TRUE(std::ranges::equal(back.edges(), net.edges()));
}

TEST(Influence, LogCalibration) {
    EXPECT_DOUBLE_EQ(calibrated_influence(0, 100), 0.0);
    EXPECT_DOUBLE_EQ(calibrated_influence(100, 100), 1.0);
    EXPECT_NEAR(calibrated_influence(9, 99), std::log(10.0) / std::log(100.0), 1e-15);
    EXPECT_DOUBLE_EQ(calibrated_influence(0, 0), 0.0);
}

TEST(Activation, EmptyGraphIsZeroMatrix) {
    PlatformNetwork net("p", 3, {});
    const auto m = testutil::make_message("m", {1.0, 0.0}, {0.0});
    const auto act = build_activation_matrix(net, profiles(3), states(3), m, PlatformParams{"p"});
    for (double v : act.entries.data()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(reproduction_coefficient(net, act).value, 0.0);
}

TEST(Activation, SingleEdgeHalf) {
    PlatformNetwork net("p", 2, {{1, 0}});
    auto ps = profiles(2);
    const auto m = testutil::make_message("m", {1.0, 0.0}, {0.0});
    const auto act = build_activation_matrix(net, ps, states(2), m, PlatformParams{"p", 0, 0, 0, 0, 0});
    EXPECT_EQ(act.entries(1, 0), 0.5);
    EXPECT_EQ(act.entries(0, 1), 0.0);
    EXPECT_EQ(act.entries(0, 0), 0.0);
    EXPECT_EQ(act.entries(1, 1), 0.0);
}

TEST(Activation, IcConfigurationIsUniform) {
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t s = 0; s < 4; ++s)
            if (r != s) edges.push_back({r, s});
    PlatformNetwork net("p", 4, edges);
    auto st = states(4);
    st[2].persona = {0.0, 1.0};
    st[3].affect = {0.9};
    const auto m = testutil::make_message("m", {0.6, 0.8}, {1.0});
    const auto act = build_activation_matrix(net, profiles(4), st, m, PlatformParams{"p", 0, 0, 0, 1.0, -0.5});
    const double v = act.entries(1, 0);
    for (const auto& e : edges) EXPECT_EQ(act.entries(e.receiver, e.sender), v);
}

TEST(Reproduction, CompleteGraphAndMasking) {
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t s = 0; s < 3; ++s)
            if (r != s) edges.push_back({r, s});
    PlatformNetwork net("p", 3, edges);
    ActivationMatrix act{complete(3, 0.6), "m", 1};
    EXPECT_NEAR(reproduction_coefficient(net, act).value, 1.2, 1e-9);

    // Entries off the adjacency support do not matter.
    PlatformNetwork sparse("p", 3, {{1, 0}, {0, 1}});
    ActivationMatrix a1{DenseMatrix(3), "m", 1}, a2{DenseMatrix(3, 0.9), "m", 1};
    a1.entries(1, 0) = a1.entries(0, 1) = 0.9;
    EXPECT_EQ(reproduction_coefficient(sparse, a1).value, reproduction_coefficient(sparse, a2).value);
}

TEST(Criticality, StrictThreshold) {
    EXPECT_FALSE(is_supercritical(1.0));
    EXPECT_TRUE(is_supercritical(1.2));
    EXPECT_FALSE(is_supercritical(0.0));
    EXPECT_THROW(is_supercritical(-0.1), PreconditionError);
}

TEST(Criticality, StrategyAcceptance) {
    auto v = strategy_acceptance(1.4, 0.8);
    EXPECT_TRUE(v.accepted);
    EXPECT_NEAR(v.delta, -0.6, 1e-15);
    v = strategy_acceptance(0.9, 0.95);
    EXPECT_TRUE(v.accepted);
    EXPECT_NEAR(v.delta, 0.05, 1e-15);
    EXPECT_FALSE(strategy_acceptance(1.4, 1.1).accepted);
    EXPECT_FALSE(strategy_acceptance(0.5, 1.0).accepted);
}
