#pragma once

// Text -> embedding, text -> emotion and post generation.
//
// The core never talks to a language model directly. A TextProvider either
// runs locally and deterministically (feature hashing + lexicon + templates)
// or forwards to an external JSON-over-HTTP service:
//
//   POST {endpoint}/embed     {"text": "..."}  ->  {"vector": [..]}
//   POST {endpoint}/emote     {"text": "..."}  ->  {"vector": [..]}
//   POST {endpoint}/generate  {"text": "..."}  ->  {"text": "..."}
//
// Every public call validates dimensions and ranges so a misbehaving backend
// fails loudly with ProviderError instead of corrupting agent state.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "opcascade/error.hpp"
#include "opcascade/lexicon.hpp"
#include "opcascade/network.hpp"
#include "opcascade/rng.hpp"
#include "opcascade/state_core.hpp"
#include "opcascade/vector_ops.hpp"

namespace opcascade {

enum class ProviderKind { deterministic_local, external_http };

struct ProviderSpec {
    ProviderKind kind = ProviderKind::deterministic_local;
    std::optional<std::string> endpoint;
    std::chrono::milliseconds timeout{5000};
    unsigned retry_budget = 2;
    std::optional<std::filesystem::path> cache_path;
    std::uint64_t seed = 0;  // hashing seed of the local embedder

    void validate() const {
        if (kind == ProviderKind::external_http && (!endpoint || endpoint->empty())) {
            throw ConfigError("external_http provider requires an endpoint");
        }
        if (timeout.count() <= 0) throw ConfigError("provider timeout must be positive");
    }

    // "local", "local:SEED", or an http(s) URL. Cache path is set separately.
    static ProviderSpec parse(std::string_view text) {
        ProviderSpec spec;
        if (text.empty() || text == "local") return spec;
        if (text.rfind("local:", 0) == 0) {
            const std::string digits(text.substr(6));
            if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
                throw ConfigError("provider: expected local:<seed>, got '" + std::string(text) + "'");
            }
            spec.seed = std::stoull(digits);
            return spec;
        }
        if (text.rfind("http://", 0) == 0 || text.rfind("https://", 0) == 0) {
            spec.kind = ProviderKind::external_http;
            spec.endpoint = std::string(text);
            return spec;
        }
        throw ConfigError("provider: expected 'local', 'local:<seed>' or an http URL, got '" +
                          std::string(text) + "'");
    }
};

// What the post generator may know about the author when writing.
struct StateSummary {
    double stance_score = 0.0;  // <persona, message content>
    std::string stance;         // "oppose" | "neutral" | "support"
    std::size_t emotion_argmax = 0;
    double emotion_peak = 0.0;
};

inline std::string stance_bucket(double score, double lo = -0.2, double hi = 0.2) {
    if (score < lo) return "oppose";
    if (score > hi) return "support";
    return "neutral";
}

inline StateSummary summarize_state(const AgentState& state, const Message& msg) {
    StateSummary s;
    if (state.persona.size() == msg.content_embedding.size()) {
        s.stance_score = dot(state.persona, msg.content_embedding);
    }
    s.stance = stance_bucket(s.stance_score);
    for (std::size_t k = 0; k < state.affect.size(); ++k) {
        if (state.affect[k] > s.emotion_peak) {
            s.emotion_peak = state.affect[k];
            s.emotion_argmax = k;
        }
    }
    return s;
}

struct ProviderDims {
    std::size_t embedding = kDefaultEmbeddingDim;
    std::size_t emotion = kDefaultEmotionDim;
};

class TextProvider {
public:
    explicit TextProvider(ProviderDims dims) : dims_(dims) {}
    virtual ~TextProvider() = default;
    TextProvider(const TextProvider&) = delete;
    TextProvider& operator=(const TextProvider&) = delete;

    ProviderDims dims() const noexcept { return dims_; }

    // Unit-norm embedding of dimension dims().embedding.
    Vector embed(std::string_view text) {
        require_text(text);
        Vector v = do_embed(text);
        if (v.size() != dims_.embedding) {
            throw ProviderError("embed returned dimension " + std::to_string(v.size()) + ", expected " +
                                std::to_string(dims_.embedding));
        }
        if (!all_finite(v)) throw ProviderError("embed returned non-finite values");
        const double n = norm2(v);
        if (n < 1e-12) throw ProviderError("embed produced a zero vector");
        for (double& x : v) x /= n;
        return v;
    }

    // Emotion vector of dimension dims().emotion in [-1,1].
    Vector emote(std::string_view text) {
        require_text(text);
        Vector v = do_emote(text);
        if (v.size() != dims_.emotion) {
            throw ProviderError("emote returned dimension " + std::to_string(v.size()) + ", expected " +
                                std::to_string(dims_.emotion));
        }
        if (!all_finite(v)) throw ProviderError("emote returned non-finite values");
        for (double& x : v) x = std::clamp(x, -1.0, 1.0);
        return v;
    }

    std::string generate_post(const AgentProfile& author, const StateSummary& summary, const Message& msg) {
        std::string text = do_generate_post(author, summary, msg);
        if (text.empty()) throw ProviderError("generate_post returned an empty string");
        return text;
    }

    virtual std::string name() const = 0;

protected:
    virtual Vector do_embed(std::string_view text) = 0;
    virtual Vector do_emote(std::string_view text) = 0;
    virtual std::string do_generate_post(const AgentProfile& author, const StateSummary& summary,
                                         const Message& msg) = 0;

private:
    static void require_text(std::string_view text) {
        if (text.empty()) throw PreconditionError("provider input text must be non-empty");
    }

    ProviderDims dims_;
};

// Lowercased tokens split on ASCII non-alphanumerics. Bytes >= 0x80 count as
// word characters so UTF-8 words stay whole.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        const bool word = (c >= 0x80) || std::isalnum(c);
        if (word) {
            current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

class DeterministicLocalProvider final : public TextProvider {
public:
    explicit DeterministicLocalProvider(ProviderDims dims = {}, std::uint64_t seed = 0)
        : TextProvider(dims), seed_(seed) {}

    std::string name() const override { return "deterministic_local"; }

protected:
    // Signed feature hashing: each token adds +-1 to one of d buckets. When the
    // contributions cancel exactly, the tokens are rehashed with the next salt.
    Vector do_embed(std::string_view text) override {
        const auto tokens = tokenize(text);
        Vector v(dims().embedding, 0.0);
        for (std::uint64_t salt = 0; !tokens.empty() && salt < 64; ++salt) {
            std::fill(v.begin(), v.end(), 0.0);
            for (const auto& tok : tokens) {
                const std::uint64_t h = detail::mix64(detail::fnv1a(tok) ^ detail::mix64(seed_) ^ (salt ? detail::mix64(salt) : 0));
                const std::size_t bucket = static_cast<std::size_t>(h % v.size());
                v[bucket] += (h >> 63) ? -1.0 : 1.0;
            }
            if (norm2(v) >= 1e-12) return v;
        }
        throw ProviderError("feature hashing produced a zero vector for '" + std::string(text.substr(0, 40)) + "'");
    }

    // Mean of the lexicon vectors of matched tokens. Lexicon dimensions are
    // folded modulo K when K != 8.
    Vector do_emote(std::string_view text) override {
        Vector v(dims().emotion, 0.0);
        std::size_t hits = 0;
        for (const auto& tok : tokenize(text)) {
            for (const auto& entry : kLexicon) {
                if (entry.word == tok) {
                    for (std::size_t k = 0; k < kLexiconDims; ++k) v[k % v.size()] += entry.emotion[k];
                    ++hits;
                    break;
                }
            }
        }
        if (hits > 0) {
            for (double& x : v) x /= static_cast<double>(hits);
        }
        return v;
    }

    std::string do_generate_post(const AgentProfile& author, const StateSummary& summary,
                                 const Message& msg) override {
        static constexpr std::string_view kOpeners[] = {
            "Honestly,", "Hot take:", "Reading this again:", "Not sure what to think, but",
        };
        const std::string_view feeling =
            summary.emotion_peak > 0.0 && summary.emotion_argmax < kEmotionNames.size()
                ? kEmotionNames[summary.emotion_argmax]
                : std::string_view("calm");
        const std::uint64_t pick = detail::fnv1a(author.persona_seed) ^ detail::fnv1a(summary.stance);
        std::string out(kOpeners[pick % std::size(kOpeners)]);
        if (summary.stance == "support") {
            out += " I back this.";
        } else if (summary.stance == "oppose") {
            out += " I can't accept this.";
        } else {
            out += " still making up my mind.";
        }
        out += " Feeling ";
        out += feeling;
        out += '.';
        if (!author.persona_seed.empty()) {
            out += " (";
            out += author.persona_seed;
            out += ')';
        }
        if (msg.text && !msg.text->empty()) {
            out += " RE: ";
            out += msg.text->substr(0, 80);
        }
        return out;
    }

private:
    std::uint64_t seed_;
};

// Client for an external embedding/LLM service with an append-only cache
// file keyed by (kind, endpoint, text). Safe for concurrent callers: cache
// reads share a lock, cache writes and file appends are serialized.
class ExternalHttpProvider final : public TextProvider {
public:
    ExternalHttpProvider(ProviderSpec spec, ProviderDims dims) : TextProvider(dims), spec_(std::move(spec)) {
        spec_.validate();
        split_endpoint(*spec_.endpoint);
        if (spec_.cache_path) load_cache();
    }

    std::string name() const override { return "external_http"; }

    // Number of HTTP requests actually issued (cache hits excluded).
    std::size_t call_count() const noexcept { return calls_.load(); }

protected:
    Vector do_embed(std::string_view text) override { return vector_call("embed", text); }
    Vector do_emote(std::string_view text) override { return vector_call("emote", text); }

    std::string do_generate_post(const AgentProfile& author, const StateSummary& summary,
                                 const Message& msg) override {
        std::string prompt = "persona: " + author.persona_seed + "\nstance: " + summary.stance +
                             "\nfeeling: " +
                             std::string(kEmotionNames[summary.emotion_argmax % kEmotionNames.size()]) +
                             "\nreply to: " + msg.text.value_or("(no text)");
        const nlohmann::json reply = cached_call("generate", prompt);
        if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
            throw ProviderError("generate: response lacks a string 'text' field");
        }
        return reply["text"].get<std::string>();
    }

private:
    Vector vector_call(const std::string& kind, std::string_view text) {
        const nlohmann::json reply = cached_call(kind, text);
        if (!reply.is_object() || !reply.contains("vector") || !reply["vector"].is_array()) {
            throw ProviderError(kind + ": response lacks a 'vector' array");
        }
        Vector v;
        for (const auto& x : reply["vector"]) {
            if (!x.is_number()) throw ProviderError(kind + ": non-numeric vector component");
            v.push_back(x.get<double>());
        }
        return v;
    }

    std::string cache_key(const std::string& kind, std::string_view text) const {
        std::string key = kind;
        key += '\x1f';
        key += *spec_.endpoint;
        key += '\x1f';
        key += text;
        return key;
    }

    nlohmann::json cached_call(const std::string& kind, std::string_view text) {
        const std::string key = cache_key(kind, text);
        {
            std::shared_lock lock(cache_mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        nlohmann::json reply = post(kind, text);
        std::unique_lock lock(cache_mutex_);
        auto [it, inserted] = cache_.emplace(key, reply);
        if (inserted && spec_.cache_path) append_cache(kind, text, reply);
        return it->second;
    }

    nlohmann::json post(const std::string& kind, std::string_view text) {
        httplib::Client client(base_);
        const auto secs = spec_.timeout.count() / 1000;
        const auto usecs = (spec_.timeout.count() % 1000) * 1000;
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        const std::string body = nlohmann::json{{"text", std::string(text)}}.dump();
        std::string last_error = "no attempt made";
        for (unsigned attempt = 0; attempt <= spec_.retry_budget; ++attempt) {
            ++calls_;
            auto res = client.Post(path_prefix_ + "/" + kind, body, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 400) {
                last_error = "HTTP " + std::to_string(res->status);
                if (res->status < 500) break;  // client errors are not retried
                continue;
            }
            auto parsed = nlohmann::json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) throw ProviderError(kind + ": response is not valid JSON");
            return parsed;
        }
        throw ProviderError(kind + " via " + *spec_.endpoint + " failed: " + last_error);
    }

    void split_endpoint(const std::string& url) {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        base_ = url.substr(0, path_start);
        path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }

    void load_cache() {
        std::ifstream in(*spec_.cache_path);
        std::string line;
        while (std::getline(in, line)) {
            auto rec = nlohmann::json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.is_object() || !rec.contains("kind") || !rec.contains("text") ||
                !rec.contains("endpoint") || !rec.contains("value")) {
                continue;  // a torn final line from an interrupted append
            }
            if (rec["endpoint"] != *spec_.endpoint) continue;
            cache_.emplace(cache_key(rec["kind"].get<std::string>(), rec["text"].get<std::string>()),
                           rec["value"]);
        }
    }

    void append_cache(const std::string& kind, std::string_view text, const nlohmann::json& value) {
        char digest[17];
        std::snprintf(digest, sizeof digest, "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a(cache_key(kind, text))));
        nlohmann::json rec{{"digest", digest},
                           {"kind", kind},
                           {"endpoint", *spec_.endpoint},
                           {"text", std::string(text)},
                           {"value", value}};
        std::ofstream out(*spec_.cache_path, std::ios::app);
        out << rec.dump() << '\n';
        if (!out) throw ProviderError("cannot append to provider cache " + spec_.cache_path->string());
    }

    ProviderSpec spec_;
    std::string base_;
    std::string path_prefix_;
    std::atomic<std::size_t> calls_{0};
    std::shared_mutex cache_mutex_;
    std::unordered_map<std::string, nlohmann::json> cache_;
};

inline std::shared_ptr<TextProvider> make_provider(const ProviderSpec& spec, ProviderDims dims) {
    spec.validate();
    if (spec.kind == ProviderKind::external_http) return std::make_shared<ExternalHttpProvider>(spec, dims);
    return std::make_shared<DeterministicLocalProvider>(dims, spec.seed);
}

}  // namespace opcascade
