#pragma once

// Round-based cascade simulation.
//
// One round = one generation of propagation. In round t every active agent,
// in a seeded random order, evaluates the messages in its inbox: recall a
// context, compute the engagement probability, draw once. An engaged agent
// updates its persona/affect, stores the message in memory and may post; the
// post lands in its followers' inboxes for round t + 1, never earlier.
//
// Randomness: the agent order comes from the (seed, shuffle, t) stream and
// each agent draws from its own (seed, agent, t, i) stream, so reordering one
// agent never changes the numbers another agent sees.
//
// Failure atomicity: a round runs on a copy of the dynamic state and commits
// only on success, so a provider error leaves the world at the round start.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opcascade/config.hpp"
#include "opcascade/error.hpp"
#include "opcascade/network.hpp"
#include "opcascade/providers.hpp"
#include "opcascade/rng.hpp"
#include "opcascade/state_core.hpp"

namespace opcascade {

enum class EventKind { event, strategy };

inline const char* to_string(EventKind k) noexcept { return k == EventKind::event ? "event" : "strategy"; }

struct Targets {
    bool all = true;
    std::vector<std::size_t> agents;  // used when !all

    static Targets everyone() { return {}; }
    static Targets only(std::vector<std::size_t> agents) { return {false, std::move(agents)}; }
};

struct Injection {
    Message message;
    Targets targets;
    double sender_influence = 1.0;
    std::optional<std::size_t> sender;  // agent index when an agent authored the message
    EventKind kind = EventKind::event;
};

// Agent is dormant for rounds in [from, to].
struct DormancyWindow {
    std::size_t agent = 0;
    Round from = 0;
    Round to = 0;

    bool operator==(const DormancyWindow&) const = default;
};

enum class PostContent {
    // Repost keeps the engaged message's embedding and carries the poster's
    // (clamped) affect as its emotion. Text is decoration only.
    reuse_vectors,
    // The generated text is embedded and emoted by the provider.
    embed_generated_text,
};

struct EngineOptions {
    PostContent post_content = PostContent::reuse_vectors;
    bool track_reproduction = true;
    SpectralOptions spectral;
    std::vector<DormancyWindow> dormancy;
};

struct EngagementRecord {
    std::size_t agent = 0;
    std::string message_id;
    std::string cascade_id;
    std::optional<std::size_t> sender;
    double probability = 0.0;
    bool engaged = false;
    std::optional<std::string> post_id;

    bool operator==(const EngagementRecord&) const = default;
};

struct PostRecord {
    std::string message_id;
    std::string cascade_id;
    std::size_t author = 0;
    std::string platform;
    Round posted_round = 0;
    std::string text;
    std::size_t recipients = 0;

    bool operator==(const PostRecord&) const = default;
};

struct ReproductionRecord {
    std::string message_id;
    std::string platform;
    double value = 0.0;
    bool converged = true;
    bool supercritical = false;

    bool operator==(const ReproductionRecord&) const = default;
};

struct RoundTrace {
    Round round = 0;
    std::vector<std::string> injected;  // ids of messages injected at the start of the round
    std::size_t inbox_items = 0;        // raw items waiting at round start
    std::size_t coalesced_items = 0;    // after duplicate merge and overflow cap (active agents)
    std::size_t skipped_engaged = 0;    // cascade already engaged by the receiver
    std::size_t dropped_overflow = 0;
    std::size_t dropped_dormant = 0;
    std::size_t evaluated_edges = 0;    // == engagements.size()
    std::vector<EngagementRecord> engagements;
    std::vector<PostRecord> posts;
    std::vector<ReproductionRecord> reproduction;
    std::vector<std::string> notes;
    std::uint64_t rng_digest = 0;
    std::string rng_algorithm{kRngAlgorithm};

    std::size_t engaged_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(engagements.begin(), engagements.end(), [](const auto& e) { return e.engaged; }));
    }

    bool operator==(const RoundTrace&) const = default;
};

struct PopulationSnapshot {
    Round round = 0;
    std::vector<Vector> personas;
};

struct TrackedMessage {
    std::shared_ptr<const Message> message;
    EventKind kind = EventKind::event;
};

class World {
public:
    World(SimulationConfig config, std::vector<AgentProfile> profiles, std::vector<AgentState> states,
          std::vector<PlatformNetwork> networks, std::shared_ptr<TextProvider> provider,
          EngineOptions options = {})
        : config_(std::move(config)),
          profiles_(std::move(profiles)),
          networks_(std::move(networks)),
          provider_(std::move(provider)),
          options_(std::move(options)) {
        config_.validate();
        const std::size_t n = config_.num_agents;
        if (profiles_.size() != n || states.size() != n) {
            throw ConfigError("world: expected " + std::to_string(n) + " agents, got " +
                              std::to_string(profiles_.size()) + " profiles and " +
                              std::to_string(states.size()) + " states");
        }
        if (!provider_) throw ConfigError("world: a text provider is required");
        for (std::size_t i = 0; i < n; ++i) {
            profiles_[i].params.validate();
            agent_index_.emplace(profiles_[i].agent_id, i);
            const AgentState& s = states[i];
            if (s.persona.size() != config_.embedding_dim || s.affect.size() != config_.emotion_dim) {
                throw ConfigError("agent " + profiles_[i].agent_id + ": state dimensions do not match config");
            }
            if (std::abs(norm2(s.persona) - 1.0) > 1e-9) {
                throw ConfigError("agent " + profiles_[i].agent_id + ": persona must have unit norm");
            }
        }
        if (agent_index_.size() != n) throw ConfigError("world: agent ids must be unique");
        for (const auto& w : options_.dormancy) {
            if (w.agent >= n) throw ConfigError("dormancy window references unknown agent index");
        }
        for (std::size_t k = 0; k < networks_.size(); ++k) {
            const auto& net = networks_[k];
            if (net.size() != n) throw ConfigError("network '" + net.platform_id() + "' has wrong agent count");
            if (!config_.find_platform(net.platform_id())) {
                throw ConfigError("network '" + net.platform_id() + "' has no platform parameters");
            }
            if (!network_index_.emplace(net.platform_id(), k).second) {
                throw ConfigError("duplicate network for platform '" + net.platform_id() + "'");
            }
        }
        for (const auto& p : config_.platforms) {
            if (!network_index_.count(p.platform_id)) {
                network_index_.emplace(p.platform_id, networks_.size());
                networks_.emplace_back(p.platform_id, n, std::vector<Edge>{});
            }
        }
        dyn_.states = std::move(states);
        dyn_.inbox.assign(n, {});
        dyn_.engaged.assign(n, {});
    }

    const SimulationConfig& config() const noexcept { return config_; }
    std::span<const AgentProfile> profiles() const noexcept { return profiles_; }
    std::span<const AgentState> states() const noexcept { return dyn_.states; }
    std::span<const PlatformNetwork> networks() const noexcept { return networks_; }
    std::span<const TrackedMessage> tracked() const noexcept { return dyn_.tracked; }
    Round completed_rounds() const noexcept { return dyn_.completed; }
    Round next_round() const noexcept { return dyn_.completed + 1; }
    TextProvider& provider() const noexcept { return *provider_; }
    const EngineOptions& options() const noexcept { return options_; }

    std::size_t inbox_size(std::size_t agent) const { return dyn_.inbox.at(agent).size(); }

    const PlatformNetwork& network(const std::string& platform) const {
        auto it = network_index_.find(platform);
        if (it == network_index_.end()) throw ConfigError("unknown platform '" + platform + "'");
        return networks_[it->second];
    }

    std::optional<std::size_t> agent_index(const std::string& id) const {
        auto it = agent_index_.find(id);
        if (it == agent_index_.end()) return std::nullopt;
        return it->second;
    }

    // Maps agent ids to indices; throws ConfigError naming every unknown id.
    std::vector<std::size_t> resolve_agents(std::span<const std::string> ids) const {
        std::vector<std::size_t> out;
        std::string unknown;
        for (const auto& id : ids) {
            if (auto i = agent_index(id)) {
                out.push_back(*i);
            } else {
                unknown += (unknown.empty() ? "" : ", ") + id;
            }
        }
        if (!unknown.empty()) throw ConfigError("unknown agent id(s): " + unknown);
        return out;
    }

    bool is_dormant(std::size_t agent, Round t) const noexcept {
        for (const auto& w : options_.dormancy) {
            if (w.agent == agent && t >= w.from && t <= w.to) return true;
        }
        return false;
    }

    // Queue an injection that fires at the start of round `inj.message.round`.
    void schedule(Injection inj) {
        if (inj.message.round <= dyn_.completed) {
            throw PreconditionError("cannot schedule message '" + inj.message.id + "' for past round " +
                                    std::to_string(inj.message.round));
        }
        check_injection(inj);
        schedule_.emplace(inj.message.round, std::move(inj));
    }

    std::vector<Message> scheduled_for(Round t) const {
        std::vector<Message> out;
        auto [lo, hi] = schedule_.equal_range(t);
        for (auto it = lo; it != hi; ++it) out.push_back(it->second.message);
        return out;
    }

    // Enqueue now for evaluation in the next round and start tracking it.
    void inject_message(Injection inj) {
        if (inj.message.round != next_round()) {
            throw PreconditionError("injected message '" + inj.message.id + "' has round " +
                                    std::to_string(inj.message.round) + ", next round is " +
                                    std::to_string(next_round()));
        }
        check_injection(inj);
        apply_injection(dyn_, std::move(inj));
    }

    RoundTrace step_round(Round round_index) {
        if (round_index != next_round()) {
            throw PreconditionError("step_round: expected round " + std::to_string(next_round()) + ", got " +
                                    std::to_string(round_index));
        }
        const Round t = round_index;
        const std::size_t n = config_.num_agents;
        Dynamic next = dyn_;
        RoundTrace trace;
        trace.round = t;

        auto [lo, hi] = schedule_.equal_range(t);
        for (auto it = lo; it != hi; ++it) {
            trace.injected.push_back(it->second.message.id);
            apply_injection(next, it->second);
        }

        std::vector<std::size_t> order;
        order.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            trace.inbox_items += next.inbox[i].size();
            if (is_dormant(i, t)) {
                trace.dropped_dormant += next.inbox[i].size();
                next.inbox[i].clear();
            } else {
                order.push_back(i);
            }
        }
        if (trace.dropped_dormant > 0) {
            trace.notes.push_back(std::to_string(trace.dropped_dormant) + " item(s) dropped for dormant agents");
        }
        Rng order_rng = Rng::derive(config_.seed, StreamTag::shuffle, {t});
        shuffle(std::span<std::size_t>(order), order_rng);
        std::uint64_t digest = order_rng.digest();

        std::vector<std::vector<InboxItem>> upcoming(n);
        for (std::size_t i : order) {
            std::vector<InboxItem> items = coalesce(std::move(next.inbox[i]));
            next.inbox[i].clear();
            if (items.size() > config_.max_messages_per_agent_per_round) {
                const std::size_t excess = items.size() - config_.max_messages_per_agent_per_round;
                trace.dropped_overflow += excess;
                trace.notes.push_back("agent " + profiles_[i].agent_id + ": " + std::to_string(excess) +
                                      " item(s) over the per-round cap dropped");
                items.resize(config_.max_messages_per_agent_per_round);
            }
            trace.coalesced_items += items.size();

            Rng agent_rng = Rng::derive(config_.seed, StreamTag::agent, {t, i});
            std::size_t posts_by_agent = 0;
            for (const InboxItem& item : items) {
                const Message& msg = *item.message;
                if (has_engaged(next, i, msg.cascade_id)) {
                    ++trace.skipped_engaged;
                    continue;
                }
                evaluate(next, trace, upcoming, agent_rng, i, item, t, posts_by_agent);
            }
            digest = detail::mix64(digest ^ agent_rng.digest());
        }
        trace.evaluated_edges = trace.engagements.size();

        next.inbox = std::move(upcoming);
        next.completed = t;
        if (options_.track_reproduction) trace.reproduction = reproduction(next, t + 1);
        trace.rng_digest = digest;
        dyn_ = std::move(next);
        return trace;
    }

    // Reproduction coefficients of `msg` on every platform, for the current state.
    std::vector<ReproductionRecord> reproduction_of(const Message& msg) const {
        std::vector<ReproductionRecord> out;
        for (const auto& p : config_.platforms) out.push_back(reproduction_on(dyn_, msg, p, next_round()));
        return out;
    }

    PopulationSnapshot snapshot() const {
        PopulationSnapshot s{dyn_.completed, {}};
        s.personas.reserve(dyn_.states.size());
        for (const auto& st : dyn_.states) s.personas.push_back(st.persona);
        return s;
    }

private:
    struct InboxItem {
        std::shared_ptr<const Message> message;
        std::optional<std::size_t> sender;
        double sender_influence = 0.0;
    };

    struct Dynamic {
        std::vector<AgentState> states;
        std::vector<std::vector<InboxItem>> inbox;
        std::vector<std::vector<std::string>> engaged;  // sorted cascade ids per agent
        std::vector<TrackedMessage> tracked;
        Round completed = 0;
    };

    void check_injection(const Injection& inj) const {
        const Message& m = inj.message;
        if (m.id.empty()) throw ConfigError("injected message needs an id");
        if (m.content_embedding.size() != config_.embedding_dim) {
            throw ConfigError("message '" + m.id + "': embedding dimension " +
                              std::to_string(m.content_embedding.size()) + " != " +
                              std::to_string(config_.embedding_dim));
        }
        if (m.emotion.size() != config_.emotion_dim) {
            throw ConfigError("message '" + m.id + "': emotion dimension " + std::to_string(m.emotion.size()) +
                              " != " + std::to_string(config_.emotion_dim));
        }
        if (!all_finite(m.content_embedding) || !all_within(m.emotion, -1.0, 1.0)) {
            throw ConfigError("message '" + m.id + "': embedding must be finite and emotion within [-1,1]");
        }
        if (!network_index_.count(m.platform)) throw ConfigError("message '" + m.id + "': unknown platform '" + m.platform + "'");
        if (!(inj.sender_influence >= 0.0 && inj.sender_influence <= 1.0)) {
            throw ConfigError("message '" + m.id + "': sender influence must be in [0,1]");
        }
        if (inj.sender && *inj.sender >= config_.num_agents) throw ConfigError("message '" + m.id + "': unknown sender");
        if (!inj.targets.all) {
            std::string bad;
            for (std::size_t a : inj.targets.agents) {
                if (a >= config_.num_agents) bad += (bad.empty() ? "" : ", ") + std::to_string(a);
            }
            if (!bad.empty()) throw ConfigError("message '" + m.id + "': unknown target agent index(es): " + bad);
        }
    }

    void apply_injection(Dynamic& d, Injection inj) const {
        Message msg = std::move(inj.message);
        if (msg.cascade_id.empty()) msg.cascade_id = msg.id;
        auto shared = std::make_shared<const Message>(std::move(msg));
        d.tracked.push_back({shared, inj.kind});
        if (inj.sender) mark_engaged(d, *inj.sender, shared->cascade_id);
        auto deliver = [&](std::size_t i) { d.inbox[i].push_back({shared, inj.sender, inj.sender_influence}); };
        if (inj.targets.all) {
            for (std::size_t i = 0; i < config_.num_agents; ++i) deliver(i);
        } else {
            for (std::size_t i : inj.targets.agents) deliver(i);
        }
    }

    // Merge duplicate deliveries of the same message, keeping the most
    // influential sender (earliest on ties). First-arrival order is preserved.
    static std::vector<InboxItem> coalesce(std::vector<InboxItem> items) {
        std::vector<InboxItem> out;
        out.reserve(items.size());
        std::unordered_map<std::string_view, std::size_t> seen;
        for (auto& item : items) {
            auto [it, fresh] = seen.emplace(item.message->id, out.size());
            if (fresh) {
                out.push_back(std::move(item));
            } else if (item.sender_influence > out[it->second].sender_influence) {
                out[it->second].sender = item.sender;
                out[it->second].sender_influence = item.sender_influence;
            }
        }
        return out;
    }

    static bool has_engaged(const Dynamic& d, std::size_t agent, const std::string& cascade) {
        const auto& v = d.engaged[agent];
        return std::binary_search(v.begin(), v.end(), cascade);
    }

    static void mark_engaged(Dynamic& d, std::size_t agent, const std::string& cascade) {
        auto& v = d.engaged[agent];
        auto it = std::lower_bound(v.begin(), v.end(), cascade);
        if (it == v.end() || *it != cascade) v.insert(it, cascade);
    }

    void evaluate(Dynamic& d, RoundTrace& trace, std::vector<std::vector<InboxItem>>& upcoming, Rng& rng,
                  std::size_t i, const InboxItem& item, Round t, std::size_t& posts_by_agent) const {
        const Message& msg = *item.message;
        const AgentProfile& profile = profiles_[i];
        const PlatformParams& platform = *config_.find_platform(msg.platform);

        AgentState& state = d.states[i];
        const Vector context = retrieve_context(state.memory.before(t), msg.content_embedding, t, profile.params);
        const double p = activation_probability(state, context, msg, item.sender_influence, platform, profile.params);
        const bool engaged = rng.uniform01() < p;

        EngagementRecord rec{i, msg.id, msg.cascade_id, item.sender, p, engaged, std::nullopt};
        if (engaged) {
            state = record_memory(dual_update(std::move(state), msg, profile.params), msg);
            mark_engaged(d, i, msg.cascade_id);
            if (rng.uniform01() < config_.post_probability) {
                rec.post_id = post(d, trace, upcoming, i, msg, t, posts_by_agent++);
            }
        }
        trace.engagements.push_back(std::move(rec));
    }

    std::string post(Dynamic& d, RoundTrace& trace, std::vector<std::vector<InboxItem>>& upcoming,
                     std::size_t i, const Message& source, Round t, std::size_t serial) const {
        const AgentProfile& profile = profiles_[i];
        const AgentState& state = d.states[i];

        Message out;
        out.id = "post-" + std::to_string(t) + "-" + profile.agent_id + "-" + std::to_string(serial);
        out.cascade_id = source.cascade_id;
        out.author = profile.agent_id;
        out.platform = source.platform;
        out.round = t + 1;
        std::string text = provider_->generate_post(profile, summarize_state(state, source), source);
        if (options_.post_content == PostContent::embed_generated_text) {
            out.content_embedding = provider_->embed(text);
            out.emotion = provider_->emote(text);
        } else {
            Vector emotion = state.affect;
            for (double& x : emotion) x = std::clamp(x, -1.0, 1.0);
            out.content_embedding = source.content_embedding;
            out.emotion = std::move(emotion);
        }
        out.text = text;

        const auto receivers = network(source.platform).receivers_of(i);
        auto shared = std::make_shared<const Message>(std::move(out));
        for (std::size_t r : receivers) upcoming[r].push_back({shared, i, profile.influence});
        trace.posts.push_back({shared->id, shared->cascade_id, i, shared->platform, t, std::move(text),
                               receivers.size()});
        return shared->id;
    }

    ReproductionRecord reproduction_on(const Dynamic& d, const Message& msg, const PlatformParams& platform,
                                       Round now) const {
        const PlatformNetwork& net = network(platform.platform_id);
        const ActivationMatrix act = build_activation_matrix(net, profiles_, d.states, msg, platform, now);
        const SpectralEstimate r = reproduction_coefficient(net, act, options_.spectral);
        return {msg.id, platform.platform_id, r.value, r.converged, is_supercritical(r.value)};
    }

    std::vector<ReproductionRecord> reproduction(const Dynamic& d, Round now) const {
        std::vector<ReproductionRecord> out;
        for (const auto& tracked : d.tracked) {
            for (const auto& p : config_.platforms) out.push_back(reproduction_on(d, *tracked.message, p, now));
        }
        return out;
    }

    SimulationConfig config_;
    std::vector<AgentProfile> profiles_;
    std::vector<PlatformNetwork> networks_;
    std::shared_ptr<TextProvider> provider_;
    EngineOptions options_;
    std::unordered_map<std::string, std::size_t> agent_index_;
    std::unordered_map<std::string, std::size_t> network_index_;
    std::multimap<Round, Injection> schedule_;
    Dynamic dyn_;
};

struct RunResult {
    std::vector<RoundTrace> traces;
    std::vector<PopulationSnapshot> snapshots;  // snapshots[0] is the initial population
};

// Runs the remaining rounds up to `total_rounds`.
inline RunResult run_rounds(World& world, Round total_rounds) {
    RunResult result;
    result.snapshots.push_back(world.snapshot());
    while (world.completed_rounds() < total_rounds) {
        result.traces.push_back(world.step_round(world.next_round()));
        result.snapshots.push_back(world.snapshot());
    }
    return result;
}

}  // namespace opcascade
