#pragma once

// Per-agent cognitive-affective state.
//
// An agent carries a unit-norm semantic persona z (slow beliefs), an affect
// vector r (fast emotions) and a bounded episodic memory of the messages it
// engaged with. Three operations act on that state:
//
//   retrieve_context       attention-weighted, recency-decayed recall
//   dual_update            gated persona step on the sphere + affect relaxation
//   activation_probability logistic engagement policy for one sender->receiver edge

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opcascade/error.hpp"
#include "opcascade/platform.hpp"
#include "opcascade/vector_ops.hpp"

namespace opcascade {

using Round = std::uint64_t;

inline constexpr std::size_t kDefaultMemoryCapacity = 256;
inline constexpr std::size_t kDefaultEmotionDim = 8;
inline constexpr std::size_t kDefaultEmbeddingDim = 256;

struct AgentParams {
    double beta = 4.0;    // semantic selectivity of recall
    double delta = 0.8;   // recency decay per round, in (0,1)
    double eta = 0.7;     // emotional persistence, in (0,1)
    double gamma = 0.1;   // adaptation rate
    double alpha = 2.0;   // affective gate gain
    double theta = 0.0;   // intrinsic activation threshold

    // Throws ConfigError listing every violated bound.
    void validate() const {
        std::string bad;
        auto need = [&bad](bool ok, const char* what) {
            if (!ok) {
                if (!bad.empty()) bad += "; ";
                bad += what;
            }
        };
        need(beta > 0.0 && std::isfinite(beta), "beta must be > 0");
        need(delta > 0.0 && delta < 1.0, "delta must be in (0,1)");
        need(eta > 0.0 && eta < 1.0, "eta must be in (0,1)");
        need(gamma > 0.0 && std::isfinite(gamma), "gamma must be > 0");
        need(alpha > 0.0 && std::isfinite(alpha), "alpha must be > 0");
        need(std::isfinite(theta), "theta must be finite");
        if (!bad.empty()) throw ConfigError("invalid agent parameters: " + bad);
    }

    bool operator==(const AgentParams&) const = default;
};

// `round` is the round in which the message is delivered to (and evaluated
// by) its receivers. Posts created during round t are stamped t + 1.
struct Message {
    std::string id;
    std::string cascade_id;  // id of the injected root message this one descends from
    SharedVector content_embedding;
    SharedVector emotion;
    std::string author;
    std::string platform;
    Round round = 0;
    std::optional<std::string> text;  // display / provenance only

    bool operator==(const Message&) const = default;
};

struct MemoryRecord {
    SharedVector content_embedding;
    SharedVector emotion;
    SharedVector memory_vector;
    Round round = 0;

    bool operator==(const MemoryRecord&) const = default;
};

// Bounded episodic store, oldest record evicted first. Records are kept in
// nondecreasing round order, so the records visible at round t form a prefix.
class EpisodicMemory {
public:
    explicit EpisodicMemory(std::size_t capacity = kDefaultMemoryCapacity) : capacity_(capacity) {
        if (capacity_ == 0) throw ConfigError("memory capacity must be >= 1");
    }

    void push(MemoryRecord record) {
        if (!records_.empty() && record.round < records_.back().round) {
            throw PreconditionError("memory records must be appended in nondecreasing round order");
        }
        if (records_.size() == capacity_) records_.erase(records_.begin());
        records_.push_back(std::move(record));
    }

    // Records with round < now.
    std::span<const MemoryRecord> before(Round now) const noexcept {
        auto it = std::lower_bound(records_.begin(), records_.end(), now,
                                   [](const MemoryRecord& r, Round t) { return r.round < t; });
        return {records_.data(), static_cast<std::size_t>(it - records_.begin())};
    }

    std::span<const MemoryRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t capacity() const noexcept { return capacity_; }

    bool operator==(const EpisodicMemory&) const = default;

private:
    std::size_t capacity_;
    std::vector<MemoryRecord> records_;
};

struct AgentState {
    Vector persona;
    Vector affect;
    EpisodicMemory memory;

    bool operator==(const AgentState&) const = default;
};

inline double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Normalized recall weights over `memory` for `query` at round `now`:
//   w_k ∝ exp(beta <x_k, query>) * delta^(now - round_k)
// Computed in log space so large beta cannot overflow. Empty memory gives an
// empty weight vector.
inline Vector retrieval_weights(std::span<const MemoryRecord> memory, std::span<const double> query,
                                Round now, const AgentParams& params) {
    Vector logw(memory.size());
    if (memory.empty()) return logw;
    if (!(params.delta > 0.0)) throw ConfigError("delta must be > 0 for recall");
    const double log_delta = std::log(params.delta);
    double max_logw = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < memory.size(); ++k) {
        const MemoryRecord& rec = memory[k];
        if (rec.content_embedding.size() != query.size() || rec.memory_vector.size() != query.size()) {
            throw ConfigError("memory record " + std::to_string(k) + " has dimension " +
                              std::to_string(rec.content_embedding.size()) + ", query has " +
                              std::to_string(query.size()));
        }
        if (rec.round >= now) {
            throw PreconditionError("memory record from round " + std::to_string(rec.round) +
                                    " is not strictly before round " + std::to_string(now));
        }
        const double age = static_cast<double>(now - rec.round);
        logw[k] = params.beta * dot(rec.content_embedding, query) + age * log_delta;
        max_logw = std::max(max_logw, logw[k]);
    }
    if (!std::isfinite(max_logw)) throw NumericalError("non-finite recall score");
    double total = 0.0;
    for (double& w : logw) {
        w = std::exp(w - max_logw);
        total += w;
    }
    for (double& w : logw) w /= total;
    return logw;
}

// Context vector c = sum_k w_k m_k. Zero vector for an empty memory.
inline Vector retrieve_context(std::span<const MemoryRecord> memory, std::span<const double> query,
                               Round now, const AgentParams& params) {
    Vector context(query.size(), 0.0);
    const Vector w = retrieval_weights(memory, query, now, params);
    for (std::size_t k = 0; k < memory.size(); ++k) {
        const auto m = memory[k].memory_vector.span();
        for (std::size_t j = 0; j < context.size(); ++j) context[j] += w[k] * m[j];
    }
    return context;
}

// v - <v, z> z
inline Vector project_tangent(std::span<const double> v, std::span<const double> z) {
    const double along = dot(v, z);
    Vector out(v.begin(), v.end());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= along * z[j];
    return out;
}

inline double affective_gate(std::span<const double> affect, std::span<const double> emotion,
                             double alpha) {
    return logistic(alpha * dot(affect, emotion));
}

struct DualStep {
    Vector persona;
    Vector affect;
    double gate = 0.0;
    Vector increment;  // gamma * gate * tangent step, before renormalization
};

// One gated update of (persona, affect) for message content x and emotion q.
// The gate is evaluated once from the pre-update affect and used for both rows.
inline DualStep dual_step(std::span<const double> persona, std::span<const double> affect,
                          std::span<const double> content, std::span<const double> emotion,
                          const AgentParams& params) {
    if (content.size() != persona.size()) {
        throw ConfigError("message embedding dimension " + std::to_string(content.size()) +
                          " != persona dimension " + std::to_string(persona.size()));
    }
    if (emotion.size() != affect.size()) {
        throw ConfigError("message emotion dimension " + std::to_string(emotion.size()) +
                          " != affect dimension " + std::to_string(affect.size()));
    }
    if (std::abs(norm2(persona) - 1.0) > 1e-8) {
        throw PreconditionError("persona must have unit norm");
    }

    DualStep out;
    out.gate = affective_gate(affect, emotion, params.alpha);
    const double step = params.gamma * out.gate;

    const Vector residual = project_tangent(content, persona);
    out.increment = project_tangent(residual, persona);
    for (double& v : out.increment) v *= step;

    out.persona.assign(persona.begin(), persona.end());
    for (std::size_t j = 0; j < out.persona.size(); ++j) out.persona[j] += out.increment[j];
    const double n = norm2(out.persona);
    if (!(n >= 1e-12) || !std::isfinite(n)) {
        throw NumericalError("persona update degenerated (pre-normalization norm " +
                             std::to_string(n) + ")");
    }
    for (double& v : out.persona) v /= n;

    out.affect.resize(affect.size());
    for (std::size_t k = 0; k < affect.size(); ++k) {
        out.affect[k] = params.eta * affect[k] + step * (emotion[k] - affect[k]);
    }
    return out;
}

// Applies dual_step to `state`. Memory is left untouched; see record_memory.
inline AgentState dual_update(AgentState state, const Message& msg, const AgentParams& params) {
    DualStep s = dual_step(state.persona, state.affect, msg.content_embedding, msg.emotion, params);
    state.persona = std::move(s.persona);
    state.affect = std::move(s.affect);
    return state;
}

inline AgentState record_memory(AgentState state, const Message& msg) {
    state.memory.push(MemoryRecord{msg.content_embedding, msg.emotion, msg.content_embedding, msg.round});
    return state;
}

// Logit of the engagement probability for receiver `state` and message `msg`
// sent by a source with calibrated influence `sender_influence`.
inline double activation_logit(const AgentState& state, std::span<const double> context,
                               const Message& msg, double sender_influence,
                               const PlatformParams& platform, const AgentParams& params) {
    const double alignment = dot(state.persona, msg.content_embedding);
    const double resonance = dot(state.affect, msg.emotion);
    const double coherence = dot(context, msg.content_embedding);
    const double logit = platform.w1 * alignment + platform.w2 * resonance + platform.w3 * coherence +
                         platform.w4 * sender_influence + platform.bias - params.theta;
    if (!std::isfinite(logit)) throw NumericalError("non-finite activation logit");
    return logit;
}

inline double activation_probability(const AgentState& state, std::span<const double> context,
                                     const Message& msg, double sender_influence,
                                     const PlatformParams& platform, const AgentParams& params) {
    return logistic(activation_logit(state, context, msg, sender_influence, platform, params));
}

}  // namespace opcascade
