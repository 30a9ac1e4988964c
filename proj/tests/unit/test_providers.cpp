#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "opcascade/providers.hpp"
#include "opcascade/rng.hpp"
#include "test_util.hpp"

using namespace opcascade;

namespace {

std::string random_sentence(Rng& rng) {
    std::string s;
    const std::size_t words = 3 + static_cast<std::size_t>(rng.below(10));
    for (std::size_t w = 0; w < words; ++w) {
        if (w) s += ' ';
        const std::size_t len = 3 + static_cast<std::size_t>(rng.below(6));
        for (std::size_t c = 0; c < len; ++c) s += static_cast<char>('a' + rng.below(26));
    }
    return s;
}

// Local stand-in for an embedding/emotion/generation service.
class MockService {
public:
    explicit MockService(std::size_t d, std::size_t k) {
        server_.Post("/api/embed", [this, d](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            if (fail_first_.exchange(false)) {
                res.status = 503;
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            nlohmann::json v = nlohmann::json::array();
            const std::string text = body["text"];
            for (std::size_t i = 0; i < d; ++i) v.push_back(i == text.size() % d ? 1.0 : 0.1);
            res.set_content(nlohmann::json{{"vector", v}}.dump(), "application/json");
        });
        server_.Post("/api/emote", [this, k](const httplib::Request&, httplib::Response& res) {
            ++hits;
            nlohmann::json v = nlohmann::json::array();
            for (std::size_t i = 0; i < k + wrong_dims; ++i) v.push_back(3.0);  // out of range on purpose
            res.set_content(nlohmann::json{{"vector", v}}.dump(), "application/json");
        });
        server_.Post("/api/generate", [this](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.set_content(nlohmann::json{{"text", generate_text}}.dump(), "application/json");
        });
        server_.Post("/api/bad", [this](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 400;
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockService() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }
    void fail_next() { fail_first_ = true; }

    std::atomic<int> hits{0};
    std::size_t wrong_dims = 0;
    std::string generate_text = "a generated reply";

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<bool> fail_first_{false};
};

ProviderSpec http_spec(const std::string& url) {
    ProviderSpec spec = ProviderSpec::parse(url);
    spec.timeout = std::chrono::milliseconds(2000);
    return spec;
}

}  // namespace

TEST(LocalProvider, EmbedIsDeterministicAndUnitNorm) {
    DeterministicLocalProvider p({256, 8});
    const Vector a = p.embed("The brand apologized for the defect");
    EXPECT_EQ(a, p.embed("The brand apologized for the defect"));
    EXPECT_NEAR(norm2(a), 1.0, 1e-12);
    Rng rng(17);
    for (int k = 0; k < 200; ++k) EXPECT_NEAR(norm2(p.embed(random_sentence(rng))), 1.0, 1e-9);
}

TEST(LocalProvider, SeedChangesTheHashing) {
    DeterministicLocalProvider a({64, 8}, 1), b({64, 8}, 2);
    EXPECT_NE(a.embed("same words here"), b.embed("same words here"));
}

TEST(LocalProvider, UnrelatedStringsAreNearlyOrthogonal) {
    DeterministicLocalProvider p({256, 8});
    Rng rng(2024);
    std::size_t below = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double c = dot(p.embed(random_sentence(rng)), p.embed(random_sentence(rng)));
        worst = std::max(worst, std::abs(c));
        below += std::abs(c) < 0.5;
    }
    EXPECT_GE(below, 990u) << "max |cos| " << worst;
}

TEST(LocalProvider, EmoteLexicon) {
    DeterministicLocalProvider p({16, 8});
    EXPECT_EQ(p.emote("xqzzy blorp"), Vector(8, 0.0));
    const Vector e = p.emote("Outrage!");
    EXPECT_GT(e[0], 0.5);
    EXPECT_EQ(e, p.emote("Outrage!"));
    std::string many;
    for (int k = 0; k < 100; ++k) many += "furious outrage ";
    for (double x : p.emote(many)) {
        EXPECT_LE(x, 1.0);
        EXPECT_GE(x, -1.0);
    }
}

TEST(LocalProvider, EmptyInputIsAPreconditionError) {
    DeterministicLocalProvider p({16, 8});
    EXPECT_THROW(p.embed(""), PreconditionError);
    EXPECT_THROW(p.embed("!!! ..."), ProviderError);  // no tokens at all
}

TEST(LocalProvider, CancellingTokensStillEmbed) {
    DeterministicLocalProvider p({64, 8});
    EXPECT_NEAR(norm2(p.embed("We apologize.")), 1.0, 1e-12);
    // Every two-word text built from a small vocabulary embeds, cancellations included.
    const std::vector<std::string> words{"we", "apologize", "refund", "sorry", "data", "bank", "leak", "fix",
                                         "customers", "trust", "statement", "review", "delay", "error"};
    for (const auto& a : words)
        for (const auto& b : words) EXPECT_NEAR(norm2(p.embed(a + " " + b)), 1.0, 1e-12) << a << " " << b;
}

TEST(LocalProvider, GeneratePostIsDeterministicAndEmbeddable) {
    DeterministicLocalProvider p({32, 8});
    AgentProfile author;
    author.agent_id = "a";
    author.persona_seed = "skeptic";
    AgentState st{p.embed("some persona"), Vector(8, 0.0), EpisodicMemory(4)};
    st.affect[0] = 0.7;
    const Message m = testutil::make_message("m", p.embed("apology issued"), Vector(8, 0.0));
    const std::string a = p.generate_post(author, summarize_state(st, m), m);
    EXPECT_EQ(a, p.generate_post(author, summarize_state(st, m), m));
    EXPECT_FALSE(a.empty());
    EXPECT_NEAR(norm2(p.embed(a)), 1.0, 1e-12);
    for (double x : p.emote(a)) EXPECT_LE(std::abs(x), 1.0);
}

TEST(ProviderSpec, Parse) {
    EXPECT_EQ(ProviderSpec::parse("local").kind, ProviderKind::deterministic_local);
    EXPECT_EQ(ProviderSpec::parse("local:42").seed, 42u);
    const auto h = ProviderSpec::parse("http://host:9/x");
    EXPECT_EQ(h.kind, ProviderKind::external_http);
    EXPECT_THROW(ProviderSpec::parse("local:abc"), ConfigError);
    EXPECT_THROW(ProviderSpec::parse("ftp://x"), ConfigError);
}

TEST(HttpProvider, EmbedNormalizesAndEmoteClamps) {
    MockService mock(8, 3);
    ExternalHttpProvider p(http_spec(mock.url()), {8, 3});
    EXPECT_NEAR(norm2(p.embed("hello")), 1.0, 1e-12);
    for (double x : p.emote("hello")) EXPECT_EQ(x, 1.0);
}

TEST(HttpProvider, WrongDimensionIsAProviderError) {
    MockService mock(8, 3);
    mock.wrong_dims = 1;
    ExternalHttpProvider p(http_spec(mock.url()), {8, 3});
    EXPECT_THROW(p.emote("hello"), ProviderError);
    ExternalHttpProvider q(http_spec(mock.url()), {4, 3});
    EXPECT_THROW(q.embed("hello"), ProviderError);
}

TEST(HttpProvider, EmptyGenerationIsAProviderError) {
    MockService mock(8, 3);
    mock.generate_text = "";
    ExternalHttpProvider p(http_spec(mock.url()), {8, 3});
    AgentState st{Vector{1, 0, 0, 0, 0, 0, 0, 0}, Vector(3, 0.0), EpisodicMemory(2)};
    const Message m = testutil::make_message("m", Vector{1, 0, 0, 0, 0, 0, 0, 0}, Vector(3, 0.0));
    EXPECT_THROW(p.generate_post(AgentProfile{}, summarize_state(st, m), m), ProviderError);
}

TEST(HttpProvider, RetriesServerErrorsButNotClientErrors) {
    MockService mock(8, 3);
    mock.fail_next();
    ExternalHttpProvider p(http_spec(mock.url()), {8, 3});
    EXPECT_NO_THROW(p.embed("retry me"));
    EXPECT_EQ(p.call_count(), 2u);

    ExternalHttpProvider bad(http_spec(mock.url() + "/bad"), {8, 3});
    EXPECT_THROW(bad.embed("x"), ProviderError);
    EXPECT_EQ(bad.call_count(), 1u);
}

TEST(HttpProvider, UnreachableEndpointFailsAfterRetryBudget) {
    ProviderSpec spec = http_spec("http://127.0.0.1:1/api");
    spec.retry_budget = 1;
    ExternalHttpProvider p(spec, {8, 3});
    EXPECT_THROW(p.embed("x"), ProviderError);
    EXPECT_EQ(p.call_count(), 2u);
}

TEST(HttpProvider, CacheMakesRerunsOffline) {
    testutil::TempDir dir;
    MockService mock(8, 3);
    ProviderSpec spec = http_spec(mock.url());
    spec.cache_path = dir / "cache.jsonl";
    Vector first;
    {
        ExternalHttpProvider p(spec, {8, 3});
        first = p.embed("cached text");
        p.embed("cached text");
        EXPECT_EQ(p.call_count(), 1u);
    }
    const int hits = mock.hits.load();
    ExternalHttpProvider again(spec, {8, 3});
    EXPECT_EQ(again.embed("cached text"), first);
    EXPECT_EQ(again.call_count(), 0u);
    EXPECT_EQ(mock.hits.load(), hits);
}

TEST(HttpProvider, MissingEndpointIsAConfigError) {
    ProviderSpec spec;
    spec.kind = ProviderKind::external_http;
    EXPECT_THROW(make_provider(spec, {8, 3}), ConfigError);
}
