#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "opcascade/cases.hpp"
#include "opcascade/scenario.hpp"
#include "opcascade/rng.hpp"
#include "test_util.hpp"

using namespace opcascade;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "name": "one",
  "config": {"num_agents": 1, "rounds": 2, "embedding_dim": 4, "emotion_dim": 2,
             "platforms": [{"id": "main"}]},
  "topic": {"embedding": [1, 0, 0, 0]},
  "agents": [{"id": "solo", "platform": "main", "followers": 3}],
  "networks": [{"platform": "main", "edges": []}],
  "timeline": []
})";

bool has_issue(const ValidationError& e, const std::string& path) {
    return std::any_of(e.issues().begin(), e.issues().end(), [&](const Issue& i) { return i.path == path; });
}

std::vector<Issue> issues_of(const std::string& doc) {
    try {
        parse_scenario(doc);
    } catch (const ValidationError& e) {
        return e.issues();
    }
    return {};
}

}  // namespace

TEST(Scenario, MinimalDocumentLoads) {
    const Scenario s = parse_scenario(kMinimal);
    EXPECT_EQ(s.name, "one");
    EXPECT_EQ(s.agents.size(), 1u);
    EXPECT_EQ(s.agents[0].profile.agent_id, "solo");
    EXPECT_TRUE(s.timeline.empty());
}

TEST(Scenario, LoadFromFile) {
    testutil::TempDir dir;
    std::ofstream(dir / "s.json") << kMinimal;
    EXPECT_EQ(load_scenario(dir / "s.json").name, "one");
    EXPECT_THROW(load_scenario(dir / "missing.json"), ConfigError);
}

TEST(Scenario, FinalStancesMustSumToOne) {
    Scenario s = flagship_case();
    s.ground_truth->final_stances = {0.3, 0.4, 0.2};
    const auto issues = validate_scenario(s);
    ASSERT_FALSE(issues.empty());
    EXPECT_EQ(issues[0].path, "ground_truth.final_stances");
}

TEST(Scenario, UnknownTimelinePlatform) {
    Scenario s = minimal_case();
    s.timeline[0].platform = "elsewhere";
    const auto issues = validate_scenario(s);
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_EQ(issues[0].path, "timeline[0].platform");
}

TEST(Scenario, ReportsEveryViolation) {
    Scenario s = minimal_case();
    s.timeline[0].platform = "elsewhere";
    s.timeline[0].round = 0;
    s.config.post_probability = 2.0;
    s.agents[1].profile.agent_id = "alice";
    try {
        parse_scenario(scenario_to_json(s).dump());
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_GE(e.issues().size(), 4u);
        EXPECT_TRUE(has_issue(e, "timeline[0].platform"));
        EXPECT_TRUE(has_issue(e, "timeline[0].round"));
        EXPECT_TRUE(has_issue(e, "config.post_probability"));
    }
}

TEST(Scenario, ParseErrorCarriesLineAndColumn) {
    try {
        parse_scenario("{\n  \"name\": \"x\",\n  oops\n}");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_GE(e.column(), 3u);
    }
}

TEST(Scenario, WrongTypesAreValidationErrorsWithPaths) {
    std::string doc = kMinimal;
    doc.replace(doc.find("\"rounds\": 2"), 11, "\"rounds\": \"two\"");
    const auto issues = issues_of(doc);
    ASSERT_FALSE(issues.empty());
    EXPECT_EQ(issues[0].path, "config.rounds");
}

TEST(Scenario, RoundTripThroughJson) {
    for (const auto& name : builtin_case_names()) {
        const Scenario s = *builtin_case(name);
        const Scenario back = parse_scenario(scenario_to_json(s).dump());
        EXPECT_EQ(back, s) << name;
    }
}

namespace {
bool json_near(const nlohmann::json& a, const nlohmann::json& b, double tol) {
    if (a.is_number() && b.is_number()) return std::abs(a.get<double>() - b.get<double>()) <= tol;
    if (a.type() != b.type() || a.size() != b.size()) return false;
    if (a.is_array()) {
        for (std::size_t k = 0; k < a.size(); ++k)
            if (!json_near(a[k], b[k], tol)) return false;
        return true;
    }
    if (a.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!b.contains(it.key()) || !json_near(it.value(), b[it.key()], tol)) return false;
        return true;
    }
    return a == b;
}
}  // namespace

TEST(Scenario, RoundTripThroughSidecar) {
    testutil::TempDir dir;
    const Scenario s = flagship_case();
    save_scenario(s, dir / "f.json", true);
    EXPECT_TRUE(std::filesystem::exists(dir / "f.vec"));
    EXPECT_LT(std::filesystem::file_size(dir / "f.json"), 20000u);
    // The sidecar stores float32, so values come back rounded.
    const Scenario back = load_scenario(dir / "f.json");
    EXPECT_TRUE(json_near(scenario_to_json(back), scenario_to_json(s), 1e-6));
    save_scenario(back, dir / "g.json", true);
    EXPECT_EQ(load_scenario(dir / "g.json"), back);
}

TEST(Scenario, SidecarOutOfRangeIsAValidationError) {
    testutil::TempDir dir;
    save_scenario(flagship_case(), dir / "f.json", true);
    std::filesystem::resize_file(dir / "f.vec", 64);
    EXPECT_THROW(load_scenario(dir / "f.json"), ValidationError);
}

// Random byte edits must end in a clean error or a valid scenario, never a crash.
TEST(Scenario, MutationFuzz) {
    const std::string base = scenario_to_json(minimal_case()).dump(1);
    Rng rng(7);
    const std::string alphabet = "{}[]\":,0123456789.-eE truefalsn\\\x01\xff";
    std::size_t parsed = 0, rejected = 0;
    for (int k = 0; k < 1000; ++k) {
        std::string doc = base;
        const int edits = 1 + static_cast<int>(rng.below(4));
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = static_cast<std::size_t>(rng.below(doc.size()));
            switch (rng.below(3)) {
                case 0: doc[pos] = alphabet[rng.below(alphabet.size())]; break;
                case 1: doc.erase(pos, 1 + rng.below(8)); break;
                default: doc.insert(pos, 1, alphabet[rng.below(alphabet.size())]); break;
            }
        }
        try {
            const Scenario s = parse_scenario(doc);
            EXPECT_TRUE(validate_scenario(s).empty());
            ++parsed;
        } catch (const ParseError&) {
            ++rejected;
        } catch (const ValidationError& e) {
            EXPECT_FALSE(e.issues().empty());
            ++rejected;
        }
    }
    EXPECT_EQ(parsed + rejected, 1000u);
}

TEST(Scenario, OversizedDimensionsRejected) {
    std::string doc = kMinimal;
    doc.replace(doc.find("\"embedding_dim\": 4"), 18, "\"embedding_dim\": 100000000000");
    EXPECT_FALSE(issues_of(doc).empty());
}

TEST(Personas, SingleAgentComesFromHeaviestStratum) {
    PersonaLibrary lib;
    lib.strata = {Stratum{"small", 0.2, {}, "p"}, Stratum{"big", 0.8, {}, "p"}};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto out = sample_personas(lib, 1, seed);
        ASSERT_EQ(out.size(), 1u);
        EXPECT_EQ(out[0].profile.agent_id, "big-0");
    }
}

TEST(Personas, TiesAreBrokenBySeed) {
    PersonaLibrary lib;
    lib.strata = {Stratum{"a", 0.5, {}, "p"}, Stratum{"b", 0.5, {}, "p"}};
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 32; ++seed) seen.insert(sample_personas(lib, 1, seed)[0].profile.agent_id);
    EXPECT_EQ(seen.size(), 2u);
    EXPECT_EQ(sample_personas(lib, 1, 5)[0].profile.agent_id, sample_personas(lib, 1, 5)[0].profile.agent_id);
}

TEST(Personas, LargestRemainderSplit) {
    PersonaLibrary lib;
    lib.strata = {Stratum{"a", 0.5, {}, "p"}, Stratum{"b", 0.5, {}, "p"}};
    const auto out = sample_personas(lib, 100, 3);
    EXPECT_EQ(std::count_if(out.begin(), out.end(), [](const AgentSpec& a) { return a.profile.agent_id[0] == 'a'; }), 50);
    lib.strata = {Stratum{"a", 1, {}, "p"}, Stratum{"b", 1, {}, "p"}, Stratum{"c", 1, {}, "p"}};
    const auto three = sample_personas(lib, 10, 3);
    std::map<char, int> counts;
    for (const auto& a : three) ++counts[a.profile.agent_id[0]];
    for (const auto& [k, v] : counts) EXPECT_TRUE(v == 3 || v == 4);
    EXPECT_EQ(three.size(), 10u);
}

TEST(Personas, SameSeedSameSequence) {
    const Scenario flagship = flagship_case();
    const auto& lib = *flagship.persona_library;
    EXPECT_EQ(sample_personas(lib, 100, 11), sample_personas(lib, 100, 11));
    EXPECT_NE(sample_personas(lib, 100, 11), sample_personas(lib, 100, 12));
}

TEST(Generators, ErdosRenyiExtremes) {
    NetworkGenerator g{NetworkGenerator::Kind::erdos_renyi, 0.0, 1};
    EXPECT_TRUE(generate_network("p", g, 10, 1).edges().empty());
    g.p = 1.0;
    EXPECT_EQ(generate_network("p", g, 4, 1).edges().size(), 12u);
}

TEST(Generators, PreferentialAttachmentIsHeavyTailed) {
    NetworkGenerator g{NetworkGenerator::Kind::preferential_attachment, 0.0, 2};
    int holds = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const PlatformNetwork net = generate_network("p", g, 100, seed);
        std::vector<std::size_t> deg(100);
        for (std::size_t i = 0; i < 100; ++i) deg[i] = net.in_degree(i);
        std::vector<std::size_t> sorted = deg;
        std::sort(sorted.begin(), sorted.end());
        const double median = 0.5 * static_cast<double>(sorted[49] + sorted[50]);
        holds += static_cast<double>(sorted.back()) >= 5.0 * median;
    }
    EXPECT_EQ(holds, 20);
}

TEST(Generators, Deterministic) {
    NetworkGenerator g{NetworkGenerator::Kind::preferential_attachment, 0.0, 3};
    EXPECT_TRUE(std::ranges::equal(generate_network("p", g, 50, 4).edges(), generate_network("p", g, 50, 4).edges()));
    EXPECT_THROW(generate_network("p", NetworkGenerator{NetworkGenerator::Kind::preferential_attachment, 0.0, 5}, 5, 1),
                 ConfigError);
}

TEST(GroundTruthCsv, ImportsAndRejects) {
    std::istringstream ok("round,value\r\n1,0.5\n2,-0.25\n\n3,0\n");
    const auto pts = import_trajectory_csv(ok);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[1].round, 2u);
    EXPECT_EQ(pts[1].value, -0.25);
    std::istringstream bad_header("r,v\n1,2\n");
    EXPECT_THROW(import_trajectory_csv(bad_header), ParseError);
    std::istringstream bad_row("round,value\n1,abc\n");
    try {
        import_trajectory_csv(bad_row);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream backwards("round,value\n2,1\n1,1\n");
    EXPECT_THROW(import_trajectory_csv(backwards), ParseError);
}
