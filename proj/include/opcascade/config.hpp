#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "opcascade/error.hpp"
#include "opcascade/platform.hpp"
#include "opcascade/state_core.hpp"

namespace opcascade {

struct SimulationConfig {
    std::uint64_t seed = 0;
    std::size_t num_agents = 100;
    std::size_t rounds = 10;
    std::size_t embedding_dim = kDefaultEmbeddingDim;
    std::size_t emotion_dim = kDefaultEmotionDim;
    std::size_t max_messages_per_agent_per_round = 64;
    double post_probability = 0.5;
    std::size_t memory_capacity = kDefaultMemoryCapacity;
    std::size_t ticks_per_day = 1;
    double organization_influence = 1.0;
    std::vector<PlatformParams> platforms;

    // Appends "field: problem" strings; empty means valid.
    std::vector<Issue> issues(const std::string& prefix = "config") const {
        std::vector<Issue> out;
        auto need = [&](bool ok, const std::string& field, const std::string& msg) {
            if (!ok) out.push_back({prefix + "." + field, msg});
        };
        need(num_agents >= 1, "num_agents", "must be >= 1");
        need(embedding_dim >= 2, "embedding_dim", "must be >= 2");
        need(emotion_dim >= 1, "emotion_dim", "must be >= 1");
        need(max_messages_per_agent_per_round >= 1, "max_messages_per_agent_per_round", "must be >= 1");
        need(post_probability >= 0.0 && post_probability <= 1.0, "post_probability", "must be in [0,1]");
        need(memory_capacity >= 1, "memory_capacity", "must be >= 1");
        need(ticks_per_day >= 1, "ticks_per_day", "must be >= 1");
        need(organization_influence >= 0.0 && organization_influence <= 1.0, "organization_influence",
             "must be in [0,1]");
        need(!platforms.empty(), "platforms", "at least one platform is required");
        for (std::size_t k = 0; k < platforms.size(); ++k) {
            try {
                platforms[k].validate();
            } catch (const ConfigError& e) {
                out.push_back({prefix + ".platforms[" + std::to_string(k) + "]", e.what()});
            }
            if (platforms[k].platform_id.empty()) {
                out.push_back({prefix + ".platforms[" + std::to_string(k) + "].id", "must be non-empty"});
            }
            for (std::size_t j = 0; j < k; ++j) {
                if (platforms[j].platform_id == platforms[k].platform_id) {
                    out.push_back({prefix + ".platforms[" + std::to_string(k) + "].id",
                                   "duplicate platform id '" + platforms[k].platform_id + "'"});
                }
            }
        }
        return out;
    }

    void validate() const {
        auto found = issues();
        if (!found.empty()) throw ValidationError(std::move(found));
    }

    const PlatformParams* find_platform(const std::string& id) const noexcept {
        for (const auto& p : platforms) {
            if (p.platform_id == id) return &p;
        }
        return nullptr;
    }

    bool operator==(const SimulationConfig&) const = default;
};

}  // namespace opcascade
