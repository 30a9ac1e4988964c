#pragma once

// Scenario documents: one JSON file (schema_version 1, see docs/scenario-schema.md)
// plus an optional sidecar of little-endian float32 values for bulky vectors.
//
// Loading collects every problem before failing: a ValidationError lists all
// issues with their field paths, a ParseError carries line and column.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "opcascade/config.hpp"
#include "opcascade/engine.hpp"
#include "opcascade/error.hpp"
#include "opcascade/metrics.hpp"
#include "opcascade/network.hpp"
#include "opcascade/rng.hpp"

namespace opcascade {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr const char* kOrganization = "organization";

struct ParamRange {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const ParamRange&) const = default;
};

struct ParamRanges {
    ParamRange beta{2.0, 6.0};
    ParamRange delta{0.6, 0.9};
    ParamRange eta{0.5, 0.9};
    ParamRange gamma{0.05, 0.2};
    ParamRange alpha{1.0, 3.0};
    ParamRange theta{-0.5, 0.5};

    bool operator==(const ParamRanges&) const = default;
};

struct Stratum {
    std::string name;
    double weight = 1.0;
    std::map<std::string, std::string> descriptors;
    std::string platform;
    double follower_log_mean = 5.0;   // log-normal follower counts
    double follower_log_sigma = 1.5;
    ParamRanges params;
    std::optional<Vector> prior_direction;
    double prior_mix = 0.0;

    bool operator==(const Stratum&) const = default;
};

struct PersonaLibrary {
    std::vector<Stratum> strata;

    bool operator==(const PersonaLibrary&) const = default;
};

struct AgentSpec {
    AgentProfile profile;
    std::optional<Vector> persona;
    std::optional<Vector> affect;
    std::optional<Vector> prior_direction;
    double prior_mix = 0.0;

    bool operator==(const AgentSpec&) const = default;
};

struct NetworkGenerator {
    enum class Kind { erdos_renyi, preferential_attachment };
    Kind kind = Kind::erdos_renyi;
    double p = 0.0;
    std::size_t m = 1;

    bool operator==(const NetworkGenerator&) const = default;
};

struct NetworkSpec {
    std::string platform;
    std::optional<std::vector<Edge>> edges;
    std::optional<NetworkGenerator> generator;

    bool operator==(const NetworkSpec&) const = default;
};

struct TimelineEvent {
    std::string id;
    Round round = 1;
    EventKind kind = EventKind::event;
    std::string author = kOrganization;
    std::string platform;
    std::optional<std::string> text;
    std::optional<Vector> embedding;
    std::optional<Vector> emotion;
    bool all_targets = true;
    std::vector<std::string> targets;
    std::optional<double> author_influence;

    bool operator==(const TimelineEvent&) const = default;
};

struct GroundTruth {
    std::vector<TrajectoryPoint> trajectory;
    std::vector<double> final_stances;
    std::vector<std::string> stance_labels = default_stance_labels();
    std::string series = "opinion_index";

    bool operator==(const GroundTruth&) const = default;
};

struct DormancySpec {
    std::string agent;
    Round from = 0;
    Round to = 0;

    bool operator==(const DormancySpec&) const = default;
};

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    std::string name;
    std::string description;
    SimulationConfig config;
    std::vector<AgentSpec> agents;
    std::optional<PersonaLibrary> persona_library;
    std::vector<NetworkSpec> networks;
    std::vector<TimelineEvent> timeline;
    std::optional<GroundTruth> ground_truth;
    std::optional<Vector> topic_embedding;
    std::optional<std::string> topic_text;
    std::vector<DormancySpec> dormancy;
    StanceThresholds stance_thresholds;
    PostContent post_content = PostContent::reuse_vectors;

    bool operator==(const Scenario&) const = default;
};

// ---------------------------------------------------------------------------
// Reading

namespace detail {

using nlohmann::json;

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Float32 sidecar: vectors are stored as {"sidecar": {"offset": k, "length": d}},
// offsets counted in floats from the start of the file.
class Sidecar {
public:
    Sidecar() = default;
    explicit Sidecar(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            error_ = "cannot open vector sidecar " + path.string();
            return;
        }
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.size() % 4 != 0) {
            error_ = "vector sidecar size is not a multiple of 4 bytes";
            return;
        }
        floats_.resize(bytes.size() / 4);
        for (std::size_t k = 0; k < floats_.size(); ++k) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * k + b])) << (8 * b);
            floats_[k] = std::bit_cast<float>(bits);
        }
        loaded_ = true;
    }

    bool loaded() const noexcept { return loaded_; }
    const std::string& error() const noexcept { return error_; }

    std::optional<Vector> slice(std::uint64_t offset, std::uint64_t length) const {
        if (!loaded_ || offset > floats_.size() || length > floats_.size() - offset) return std::nullopt;
        return Vector(floats_.begin() + static_cast<std::ptrdiff_t>(offset),
                      floats_.begin() + static_cast<std::ptrdiff_t>(offset + length));
    }

private:
    std::filesystem::path path_;
    std::vector<float> floats_;
    bool loaded_ = false;
    std::string error_;
};

class Reader {
public:
    Reader(std::vector<Issue>& issues, const Sidecar* sidecar) : issues_(issues), sidecar_(sidecar) {}

    void issue(const std::string& path, const std::string& msg) { issues_.push_back({path, msg}); }

    const json* child(const json& obj, const char* key, const std::string& path, bool required) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            if (required) issue(join(path, key), "required field is missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const char* key, const std::string& path, bool required = false) {
        const json* v = child(obj, key, path, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            issue(join(path, key), "expected a number");
            return std::nullopt;
        }
        const double x = v->get<double>();
        if (!std::isfinite(x)) {
            issue(join(path, key), "must be finite");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::uint64_t> count(const json& obj, const char* key, const std::string& path,
                                       bool required = false, std::uint64_t max = std::uint64_t{1} << 40) {
        const json* v = child(obj, key, path, required);
        if (!v) return std::nullopt;
        return as_count(*v, join(path, key), max);
    }

    std::optional<std::uint64_t> as_count(const json& v, const std::string& path,
                                          std::uint64_t max = std::uint64_t{1} << 40) {
        std::optional<std::uint64_t> out;
        if (v.is_number_unsigned()) {
            out = v.get<std::uint64_t>();
        } else if (v.is_number_integer()) {
            if (v.get<std::int64_t>() >= 0) out = static_cast<std::uint64_t>(v.get<std::int64_t>());
        } else if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isfinite(d) && d >= 0.0 && d == std::floor(d) && d <= static_cast<double>(max)) {
                out = static_cast<std::uint64_t>(d);
            }
        }
        if (!out) {
            issue(path, "expected a non-negative integer");
            return std::nullopt;
        }
        if (*out > max) {
            issue(path, "must be <= " + std::to_string(max));
            return std::nullopt;
        }
        return out;
    }

    std::optional<std::string> string(const json& obj, const char* key, const std::string& path, bool required = false) {
        const json* v = child(obj, key, path, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            issue(join(path, key), "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<Vector> vector(const json& obj, const char* key, const std::string& path, bool required = false) {
        const json* v = child(obj, key, path, required);
        if (!v) return std::nullopt;
        return as_vector(*v, join(path, key));
    }

    std::optional<Vector> as_vector(const json& v, const std::string& path) {
        if (v.is_array()) {
            Vector out;
            out.reserve(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (!v[k].is_number() || !std::isfinite(v[k].get<double>())) {
                    issue(path + "[" + std::to_string(k) + "]", "expected a finite number");
                    return std::nullopt;
                }
                out.push_back(v[k].get<double>());
            }
            return out;
        }
        if (v.is_object() && v.contains("sidecar")) {
            const json& ref = v["sidecar"];
            auto off = count(ref, "offset", path + ".sidecar", true);
            auto len = count(ref, "length", path + ".sidecar", true);
            if (!off || !len) return std::nullopt;
            if (!sidecar_ || !sidecar_->loaded()) {
                issue(path, sidecar_ && !sidecar_->error().empty() ? sidecar_->error()
                                                                   : "sidecar reference but no vectors_file");
                return std::nullopt;
            }
            auto out = sidecar_->slice(*off, *len);
            if (!out) issue(path, "sidecar range out of bounds");
            return out;
        }
        issue(path, "expected an array of numbers or a sidecar reference");
        return std::nullopt;
    }

    static std::string join(const std::string& path, const char* key) {
        return path.empty() ? std::string(key) : path + "." + key;
    }

private:
    std::vector<Issue>& issues_;
    const Sidecar* sidecar_;
};

inline std::optional<std::size_t> agent_ref(Reader& rd, const json& v, const std::string& path,
                                            const std::map<std::string, std::size_t>& ids) {
    if (v.is_string()) {
        auto it = ids.find(v.get<std::string>());
        if (it == ids.end()) {
            rd.issue(path, "unknown agent id '" + v.get<std::string>() + "'");
            return std::nullopt;
        }
        return it->second;
    }
    auto c = rd.as_count(v, path);
    if (!c) return std::nullopt;
    return static_cast<std::size_t>(*c);
}

inline void read_params(Reader& rd, const json& obj, const std::string& path, AgentParams& p) {
    if (auto x = rd.number(obj, "beta", path)) p.beta = *x;
    if (auto x = rd.number(obj, "delta", path)) p.delta = *x;
    if (auto x = rd.number(obj, "eta", path)) p.eta = *x;
    if (auto x = rd.number(obj, "gamma", path)) p.gamma = *x;
    if (auto x = rd.number(obj, "alpha", path)) p.alpha = *x;
    if (auto x = rd.number(obj, "theta", path)) p.theta = *x;
}

inline void read_range(Reader& rd, const json& obj, const char* key, const std::string& path, ParamRange& r) {
    const json* v = rd.child(obj, key, path, false);
    if (!v) return;
    const std::string p = Reader::join(path, key);
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        rd.issue(p, "expected [lo, hi]");
        return;
    }
    r = {(*v)[0].get<double>(), (*v)[1].get<double>()};
}

}  // namespace detail

// Every invariant of the contained types, reported together.
inline std::vector<Issue> validate_scenario(const Scenario& s) {
    std::vector<Issue> out = s.config.issues("config");
    auto add = [&out](const std::string& path, const std::string& msg) { out.push_back({path, msg}); };
    const std::size_t d = s.config.embedding_dim;
    const std::size_t k_dim = s.config.emotion_dim;
    const std::size_t n = s.config.num_agents;

    if (s.schema_version != kScenarioSchemaVersion) {
        add("schema_version", "unsupported schema version " + std::to_string(s.schema_version));
    }
    if (s.name.empty()) add("name", "must be non-empty");
    try {
        s.stance_thresholds.validate();
    } catch (const ConfigError& e) {
        add("stance_thresholds", e.what());
    }

    auto has_platform = [&s](const std::string& id) { return s.config.find_platform(id) != nullptr; };
    auto check_params = [&add](const AgentParams& p, const std::string& path) {
        try {
            p.validate();
        } catch (const ConfigError& e) {
            add(path, e.what());
        }
    };

    std::set<std::string> agent_ids;
    if (s.persona_library) {
        if (!s.agents.empty()) add("agents", "explicit agents and persona_library are mutually exclusive");
        const auto& strata = s.persona_library->strata;
        if (strata.empty()) add("persona_library.strata", "must be non-empty");
        double total = 0.0;
        std::set<std::string> names;
        for (std::size_t k = 0; k < strata.size(); ++k) {
            const auto& st = strata[k];
            const std::string path = "persona_library.strata[" + std::to_string(k) + "]";
            if (st.name.empty()) add(path + ".name", "must be non-empty");
            if (!names.insert(st.name).second) add(path + ".name", "duplicate stratum name '" + st.name + "'");
            if (!(st.weight >= 0.0)) add(path + ".weight", "must be >= 0");
            total += st.weight;
            if (!has_platform(st.platform)) add(path + ".platform", "unknown platform '" + st.platform + "'");
            if (!(st.follower_log_sigma >= 0.0)) add(path + ".followers.log_sigma", "must be >= 0");
            if (st.follower_log_mean > 30.0) add(path + ".followers.log_mean", "must be <= 30");
            const ParamRanges& r = st.params;
            const std::pair<const char*, const ParamRange*> ranges[] = {
                {"beta", &r.beta}, {"delta", &r.delta}, {"eta", &r.eta},
                {"gamma", &r.gamma}, {"alpha", &r.alpha}, {"theta", &r.theta}};
            for (auto [name, range] : ranges) {
                if (!(range->lo <= range->hi)) add(path + ".params." + name, "requires lo <= hi");
            }
            AgentParams lo{r.beta.lo, r.delta.lo, r.eta.lo, r.gamma.lo, r.alpha.lo, r.theta.lo};
            AgentParams hi{r.beta.hi, r.delta.hi, r.eta.hi, r.gamma.hi, r.alpha.hi, r.theta.hi};
            check_params(lo, path + ".params(lo)");
            check_params(hi, path + ".params(hi)");
            if (st.prior_direction) {
                if (st.prior_direction->size() != d) add(path + ".prior_direction", "must have dimension " + std::to_string(d));
                else if (norm2(*st.prior_direction) < 1e-12) add(path + ".prior_direction", "must be non-zero");
            }
            if (!(st.prior_mix >= 0.0 && st.prior_mix <= 1.0)) add(path + ".prior_mix", "must be in [0,1]");
        }
        if (!strata.empty() && !(total > 0.0)) add("persona_library.strata", "weights must sum to > 0");
    } else {
        if (s.agents.size() != n) {
            add("agents", "expected " + std::to_string(n) + " agents (config.num_agents), found " +
                              std::to_string(s.agents.size()));
        }
        for (std::size_t i = 0; i < s.agents.size(); ++i) {
            const auto& a = s.agents[i];
            const std::string path = "agents[" + std::to_string(i) + "]";
            if (a.profile.agent_id.empty()) add(path + ".id", "must be non-empty");
            if (a.profile.agent_id == kOrganization) add(path + ".id", "'organization' is reserved");
            if (!agent_ids.insert(a.profile.agent_id).second) add(path + ".id", "duplicate agent id '" + a.profile.agent_id + "'");
            if (!has_platform(a.profile.platform)) add(path + ".platform", "unknown platform '" + a.profile.platform + "'");
            check_params(a.profile.params, path + ".params");
            if (a.persona) {
                if (a.persona->size() != d) add(path + ".persona", "must have dimension " + std::to_string(d));
                else if (std::abs(norm2(*a.persona) - 1.0) > 1e-6) add(path + ".persona", "must have unit norm");
            }
            if (a.affect) {
                if (a.affect->size() != k_dim) add(path + ".affect", "must have dimension " + std::to_string(k_dim));
                else if (!all_within(*a.affect, -1.0, 1.0)) add(path + ".affect", "components must lie in [-1,1]");
            }
            if (a.prior_direction && a.prior_direction->size() != d) add(path + ".prior_direction", "must have dimension " + std::to_string(d));
            if (!(a.prior_mix >= 0.0 && a.prior_mix <= 1.0)) add(path + ".prior_mix", "must be in [0,1]");
        }
    }
    const bool ids_known = !s.persona_library;

    std::set<std::string> net_platforms;
    for (std::size_t k = 0; k < s.networks.size(); ++k) {
        const auto& net = s.networks[k];
        const std::string path = "networks[" + std::to_string(k) + "]";
        if (!has_platform(net.platform)) add(path + ".platform", "unknown platform '" + net.platform + "'");
        if (!net_platforms.insert(net.platform).second) add(path + ".platform", "duplicate network for '" + net.platform + "'");
        if (net.edges.has_value() == net.generator.has_value()) {
            add(path, "exactly one of 'edges' or 'generator' is required");
        }
        if (net.edges) {
            for (std::size_t e = 0; e < net.edges->size(); ++e) {
                const Edge& edge = (*net.edges)[e];
                const std::string ep = path + ".edges[" + std::to_string(e) + "]";
                if (edge.receiver >= n || edge.sender >= n) add(ep, "agent index out of range");
                else if (edge.receiver == edge.sender) add(ep, "self-loop");
            }
        }
        if (net.generator) {
            const auto& g = *net.generator;
            if (g.kind == NetworkGenerator::Kind::erdos_renyi && !(g.p >= 0.0 && g.p <= 1.0)) {
                add(path + ".generator.p", "must be in [0,1]");
            }
            if (g.kind == NetworkGenerator::Kind::preferential_attachment && (g.m < 1 || g.m >= n)) {
                add(path + ".generator.m", "must satisfy 1 <= m < num_agents");
            }
        }
    }

    std::set<std::string> event_ids;
    for (std::size_t k = 0; k < s.timeline.size(); ++k) {
        const auto& ev = s.timeline[k];
        const std::string path = "timeline[" + std::to_string(k) + "]";
        if (ev.id.empty()) add(path + ".id", "must be non-empty");
        if (!event_ids.insert(ev.id).second) add(path + ".id", "duplicate event id '" + ev.id + "'");
        if (ev.round < 1 || ev.round > s.config.rounds) {
            add(path + ".round", "must be in [1, " + std::to_string(s.config.rounds) + "]");
        }
        if (!has_platform(ev.platform)) add(path + ".platform", "unknown platform '" + ev.platform + "'");
        if (!ev.text && !ev.embedding) add(path, "at least one of 'text' or 'embedding' is required");
        if (ev.text && ev.text->empty()) add(path + ".text", "must be non-empty");
        if (ev.embedding && !ev.emotion) add(path + ".emotion", "required when 'embedding' is given");
        if (ev.embedding) {
            if (ev.embedding->size() != d) add(path + ".embedding", "must have dimension " + std::to_string(d));
            else if (norm2(*ev.embedding) < 1e-12) add(path + ".embedding", "must be non-zero");
        }
        if (ev.emotion) {
            if (ev.emotion->size() != k_dim) add(path + ".emotion", "must have dimension " + std::to_string(k_dim));
            else if (!all_within(*ev.emotion, -1.0, 1.0)) add(path + ".emotion", "components must lie in [-1,1]");
        }
        if (ev.author_influence && !(*ev.author_influence >= 0.0 && *ev.author_influence <= 1.0)) {
            add(path + ".author_influence", "must be in [0,1]");
        }
        if (ids_known) {
            if (ev.author != kOrganization && !agent_ids.count(ev.author)) {
                add(path + ".author", "unknown author '" + ev.author + "'");
            }
            for (const auto& t : ev.targets) {
                if (!agent_ids.count(t)) add(path + ".targets", "unknown agent id '" + t + "'");
            }
        }
    }

    if (s.ground_truth) {
        const auto& gt = *s.ground_truth;
        double total = 0.0;
        bool negative = false;
        for (double p : gt.final_stances) {
            total += p;
            negative = negative || !(p >= 0.0);
        }
        if (gt.stance_labels.size() != 3) add("ground_truth.stance_labels", "must name exactly 3 categories");
        // Empty means trajectory-only ground truth; JSD is then undefined.
        if (!gt.final_stances.empty()) {
            if (negative) add("ground_truth.final_stances", "entries must be >= 0");
            if (std::abs(total - 1.0) > 1e-9) add("ground_truth.final_stances", "must sum to 1 (sums to " + std::to_string(total) + ")");
            if (gt.final_stances.size() != gt.stance_labels.size()) add("ground_truth.final_stances", "must have one entry per stance label");
        }
        for (std::size_t k = 1; k < gt.trajectory.size(); ++k) {
            if (gt.trajectory[k].round <= gt.trajectory[k - 1].round) {
                add("ground_truth.trajectory[" + std::to_string(k) + "]", "rounds must be strictly increasing");
            }
        }
        if (gt.series != "opinion_index" && gt.series != "negative_share") {
            add("ground_truth.series", "must be 'opinion_index' or 'negative_share'");
        }
    }
    if (s.topic_embedding) {
        if (s.topic_embedding->size() != d) add("topic.embedding", "must have dimension " + std::to_string(d));
        else if (norm2(*s.topic_embedding) < 1e-12) add("topic.embedding", "must be non-zero");
    }
    if (s.topic_text && s.topic_text->empty()) add("topic.text", "must be non-empty");
    for (std::size_t k = 0; k < s.dormancy.size(); ++k) {
        const auto& w = s.dormancy[k];
        const std::string path = "dormancy[" + std::to_string(k) + "]";
        if (w.from > w.to) add(path, "requires from <= to");
        if (ids_known && !agent_ids.count(w.agent)) add(path + ".agent", "unknown agent id '" + w.agent + "'");
    }
    return out;
}

// Parses and validates. `base_dir` resolves a relative vectors_file.
inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {}) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(e.what(), line, col);
    }
    if (!doc.is_object()) throw ParseError("top-level value must be an object", 1, 1);

    std::vector<Issue> issues;
    std::optional<detail::Sidecar> sidecar;
    if (auto it = doc.find("vectors_file"); it != doc.end() && it->is_string()) {
        std::filesystem::path p = it->get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        sidecar.emplace(p);
    }
    detail::Reader rd(issues, sidecar ? &*sidecar : nullptr);
    Scenario s;

    if (auto v = rd.count(doc, "schema_version", "", true, 1000)) s.schema_version = static_cast<int>(*v);
    if (auto v = rd.string(doc, "name", "", true)) s.name = *v;
    if (auto v = rd.string(doc, "description", "")) s.description = *v;

    // config
    if (const json* c = rd.child(doc, "config", "", true)) {
        SimulationConfig& cfg = s.config;
        if (!c->is_object()) rd.issue("config", "expected an object");
        if (auto v = rd.count(*c, "seed", "config", false, std::numeric_limits<std::uint64_t>::max())) cfg.seed = *v;
        if (auto v = rd.count(*c, "num_agents", "config", false, 1'000'000)) cfg.num_agents = *v;
        if (auto v = rd.count(*c, "rounds", "config", false, 1'000'000)) cfg.rounds = *v;
        if (auto v = rd.count(*c, "embedding_dim", "config", false, 1 << 16)) cfg.embedding_dim = *v;
        if (auto v = rd.count(*c, "emotion_dim", "config", false, 1 << 10)) cfg.emotion_dim = *v;
        if (auto v = rd.count(*c, "max_messages_per_agent_per_round", "config", false, 1'000'000)) {
            cfg.max_messages_per_agent_per_round = *v;
        }
        if (auto v = rd.number(*c, "post_probability", "config")) cfg.post_probability = *v;
        if (auto v = rd.count(*c, "memory_capacity", "config", false, 1'000'000)) cfg.memory_capacity = *v;
        if (auto v = rd.count(*c, "ticks_per_day", "config", false, 1'000)) cfg.ticks_per_day = *v;
        if (auto v = rd.number(*c, "organization_influence", "config")) cfg.organization_influence = *v;
        if (auto v = rd.string(*c, "post_content", "config")) {
            if (*v == "reuse_vectors") s.post_content = PostContent::reuse_vectors;
            else if (*v == "embed_generated_text") s.post_content = PostContent::embed_generated_text;
            else rd.issue("config.post_content", "must be 'reuse_vectors' or 'embed_generated_text'");
        }
        if (const json* ps = rd.child(*c, "platforms", "config", true)) {
            if (!ps->is_array()) rd.issue("config.platforms", "expected an array");
            else {
                for (std::size_t k = 0; k < ps->size(); ++k) {
                    const json& pj = (*ps)[k];
                    const std::string path = "config.platforms[" + std::to_string(k) + "]";
                    PlatformParams p;
                    if (auto v = rd.string(pj, "id", path, true)) p.platform_id = *v;
                    if (auto v = rd.number(pj, "w1", path)) p.w1 = *v;
                    if (auto v = rd.number(pj, "w2", path)) p.w2 = *v;
                    if (auto v = rd.number(pj, "w3", path)) p.w3 = *v;
                    if (auto v = rd.number(pj, "w4", path)) p.w4 = *v;
                    if (auto v = rd.number(pj, "bias", path)) p.bias = *v;
                    cfg.platforms.push_back(std::move(p));
                }
            }
        }
    }

    if (const json* st = rd.child(doc, "stance_thresholds", "", false)) {
        if (auto v = rd.number(*st, "lo", "stance_thresholds")) s.stance_thresholds.lo = *v;
        if (auto v = rd.number(*st, "hi", "stance_thresholds")) s.stance_thresholds.hi = *v;
    }

    // topic
    if (const json* t = rd.child(doc, "topic", "", false)) {
        if (!t->is_object()) rd.issue("topic", "expected an object");
        s.topic_text = rd.string(*t, "text", "topic");
        s.topic_embedding = rd.vector(*t, "embedding", "topic");
    }

    // agents
    std::map<std::string, std::size_t> id_index;
    if (const json* as = rd.child(doc, "agents", "", false)) {
        if (!as->is_array()) rd.issue("agents", "expected an array");
        else {
            for (std::size_t i = 0; i < as->size(); ++i) {
                const json& aj = (*as)[i];
                const std::string path = "agents[" + std::to_string(i) + "]";
                if (!aj.is_object()) {
                    rd.issue(path, "expected an object");
                    continue;
                }
                AgentSpec a;
                if (auto v = rd.string(aj, "id", path, true)) a.profile.agent_id = *v;
                if (auto v = rd.string(aj, "platform", path, true)) a.profile.platform = *v;
                if (auto v = rd.count(aj, "followers", path, false, std::uint64_t{1} << 53)) a.profile.followers = *v;
                if (auto v = rd.string(aj, "persona_seed", path)) a.profile.persona_seed = *v;
                if (const json* pj = rd.child(aj, "params", path, false)) detail::read_params(rd, *pj, path + ".params", a.profile.params);
                a.persona = rd.vector(aj, "persona", path);
                a.affect = rd.vector(aj, "affect", path);
                a.prior_direction = rd.vector(aj, "prior_direction", path);
                if (auto v = rd.number(aj, "prior_mix", path)) a.prior_mix = *v;
                id_index.emplace(a.profile.agent_id, i);
                s.agents.push_back(std::move(a));
            }
        }
    }

    if (const json* lib = rd.child(doc, "persona_library", "", false)) {
        PersonaLibrary library;
        if (const json* strata = rd.child(*lib, "strata", "persona_library", true)) {
            if (!strata->is_array()) rd.issue("persona_library.strata", "expected an array");
            else {
                for (std::size_t k = 0; k < strata->size(); ++k) {
                    const json& sj = (*strata)[k];
                    const std::string path = "persona_library.strata[" + std::to_string(k) + "]";
                    Stratum st;
                    if (auto v = rd.string(sj, "name", path, true)) st.name = *v;
                    if (auto v = rd.number(sj, "weight", path, true)) st.weight = *v;
                    if (auto v = rd.string(sj, "platform", path, true)) st.platform = *v;
                    if (const json* dj = rd.child(sj, "descriptors", path, false)) {
                        if (!dj->is_object()) rd.issue(path + ".descriptors", "expected an object of strings");
                        else {
                            for (auto it = dj->begin(); it != dj->end(); ++it) {
                                if (it.value().is_string()) st.descriptors[it.key()] = it.value().get<std::string>();
                                else rd.issue(path + ".descriptors." + it.key(), "expected a string");
                            }
                        }
                    }
                    if (const json* fj = rd.child(sj, "followers", path, false)) {
                        if (auto v = rd.number(*fj, "log_mean", path + ".followers")) st.follower_log_mean = *v;
                        if (auto v = rd.number(*fj, "log_sigma", path + ".followers")) st.follower_log_sigma = *v;
                    }
                    if (const json* pj = rd.child(sj, "params", path, false)) {
                        const std::string pp = path + ".params";
                        detail::read_range(rd, *pj, "beta", pp, st.params.beta);
                        detail::read_range(rd, *pj, "delta", pp, st.params.delta);
                        detail::read_range(rd, *pj, "eta", pp, st.params.eta);
                        detail::read_range(rd, *pj, "gamma", pp, st.params.gamma);
                        detail::read_range(rd, *pj, "alpha", pp, st.params.alpha);
                        detail::read_range(rd, *pj, "theta", pp, st.params.theta);
                    }
                    st.prior_direction = rd.vector(sj, "prior_direction", path);
                    if (auto v = rd.number(sj, "prior_mix", path)) st.prior_mix = *v;
                    library.strata.push_back(std::move(st));
                }
            }
        }
        s.persona_library = std::move(library);
    }

    // networks
    if (const json* ns = rd.child(doc, "networks", "", false)) {
        if (!ns->is_array()) rd.issue("networks", "expected an array");
        else {
            for (std::size_t k = 0; k < ns->size(); ++k) {
                const json& nj = (*ns)[k];
                const std::string path = "networks[" + std::to_string(k) + "]";
                NetworkSpec net;
                if (auto v = rd.string(nj, "platform", path, true)) net.platform = *v;
                if (const json* ej = rd.child(nj, "edges", path, false)) {
                    std::vector<Edge> edges;
                    if (!ej->is_array()) rd.issue(path + ".edges", "expected an array of [receiver, sender] pairs");
                    else {
                        for (std::size_t e = 0; e < ej->size(); ++e) {
                            const json& pair = (*ej)[e];
                            const std::string ep = path + ".edges[" + std::to_string(e) + "]";
                            if (!pair.is_array() || pair.size() != 2) {
                                rd.issue(ep, "expected [receiver, sender]");
                                continue;
                            }
                            auto r = detail::agent_ref(rd, pair[0], ep + "[0]", id_index);
                            auto snd = detail::agent_ref(rd, pair[1], ep + "[1]", id_index);
                            if (r && snd) edges.push_back({*r, *snd});
                        }
                    }
                    net.edges = std::move(edges);
                }
                if (const json* gj = rd.child(nj, "generator", path, false)) {
                    NetworkGenerator g;
                    const std::string gp = path + ".generator";
                    auto kind = rd.string(*gj, "kind", gp, true);
                    if (kind == "erdos_renyi") {
                        g.kind = NetworkGenerator::Kind::erdos_renyi;
                        if (auto v = rd.number(*gj, "p", gp, true)) g.p = *v;
                    } else if (kind == "preferential_attachment") {
                        g.kind = NetworkGenerator::Kind::preferential_attachment;
                        if (auto v = rd.count(*gj, "m", gp, true, 1'000'000)) g.m = *v;
                    } else if (kind) {
                        rd.issue(gp + ".kind", "must be 'erdos_renyi' or 'preferential_attachment'");
                    }
                    net.generator = g;
                }
                s.networks.push_back(std::move(net));
            }
        }
    }

    // timeline
    if (const json* ts = rd.child(doc, "timeline", "", false)) {
        if (!ts->is_array()) rd.issue("timeline", "expected an array");
        else {
            for (std::size_t k = 0; k < ts->size(); ++k) {
                const json& ej = (*ts)[k];
                const std::string path = "timeline[" + std::to_string(k) + "]";
                TimelineEvent ev;
                ev.id = rd.string(ej, "id", path).value_or("evt-" + std::to_string(k + 1));
                auto round = rd.count(ej, "round", path, false, 1'000'000);
                auto day = rd.count(ej, "day", path, false, 1'000'000);
                if (round && day) rd.issue(path, "give either 'round' or 'day', not both");
                if (round) ev.round = *round;
                else if (day) ev.round = (*day == 0 ? 0 : (*day - 1) * s.config.ticks_per_day + 1);
                else rd.issue(path + ".round", "required field is missing");
                if (auto v = rd.string(ej, "kind", path)) {
                    if (*v == "event") ev.kind = EventKind::event;
                    else if (*v == "strategy") ev.kind = EventKind::strategy;
                    else rd.issue(path + ".kind", "must be 'event' or 'strategy'");
                }
                if (auto v = rd.string(ej, "author", path)) ev.author = *v;
                if (auto v = rd.string(ej, "platform", path, true)) ev.platform = *v;
                ev.text = rd.string(ej, "text", path);
                ev.embedding = rd.vector(ej, "embedding", path);
                ev.emotion = rd.vector(ej, "emotion", path);
                ev.author_influence = rd.number(ej, "author_influence", path);
                if (const json* tj = rd.child(ej, "targets", path, false)) {
                    if (tj->is_string() && tj->get<std::string>() == "all") {
                        ev.all_targets = true;
                    } else if (tj->is_array()) {
                        ev.all_targets = false;
                        for (std::size_t t = 0; t < tj->size(); ++t) {
                            if ((*tj)[t].is_string()) ev.targets.push_back((*tj)[t].get<std::string>());
                            else rd.issue(path + ".targets[" + std::to_string(t) + "]", "expected an agent id");
                        }
                    } else {
                        rd.issue(path + ".targets", "expected \"all\" or an array of agent ids");
                    }
                }
                s.timeline.push_back(std::move(ev));
            }
        }
    }

    if (const json* gj = rd.child(doc, "ground_truth", "", false)) {
        GroundTruth gt;
        if (const json* tj = rd.child(*gj, "trajectory", "ground_truth", false)) {
            if (!tj->is_array()) rd.issue("ground_truth.trajectory", "expected an array of [round, value]");
            else {
                for (std::size_t k = 0; k < tj->size(); ++k) {
                    const json& pt = (*tj)[k];
                    const std::string path = "ground_truth.trajectory[" + std::to_string(k) + "]";
                    if (!pt.is_array() || pt.size() != 2 || !pt[1].is_number() || !std::isfinite(pt[1].get<double>())) {
                        rd.issue(path, "expected [round, finite value]");
                        continue;
                    }
                    if (auto r = rd.as_count(pt[0], path + "[0]", 1'000'000)) gt.trajectory.push_back({*r, pt[1].get<double>()});
                }
            }
        }
        if (auto v = rd.vector(*gj, "final_stances", "ground_truth", false)) gt.final_stances = *v;
        if (const json* lj = rd.child(*gj, "stance_labels", "ground_truth", false)) {
            gt.stance_labels.clear();
            if (!lj->is_array()) rd.issue("ground_truth.stance_labels", "expected an array of strings");
            else {
                for (const auto& l : *lj) {
                    if (l.is_string()) gt.stance_labels.push_back(l.get<std::string>());
                    else rd.issue("ground_truth.stance_labels", "expected an array of strings");
                }
            }
        }
        if (auto v = rd.string(*gj, "series", "ground_truth")) gt.series = *v;
        s.ground_truth = std::move(gt);
    }

    if (const json* dj = rd.child(doc, "dormancy", "", false)) {
        if (!dj->is_array()) rd.issue("dormancy", "expected an array");
        else {
            for (std::size_t k = 0; k < dj->size(); ++k) {
                const std::string path = "dormancy[" + std::to_string(k) + "]";
                DormancySpec w;
                if (auto v = rd.string((*dj)[k], "agent", path, true)) w.agent = *v;
                if (auto v = rd.count((*dj)[k], "from", path, true, 1'000'000)) w.from = *v;
                if (auto v = rd.count((*dj)[k], "to", path, true, 1'000'000)) w.to = *v;
                s.dormancy.push_back(std::move(w));
            }
        }
    }

    for (auto& issue : validate_scenario(s)) issues.push_back(std::move(issue));
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Writing

namespace detail {

class SidecarWriter {
public:
    nlohmann::json put(const Vector& v) {
        nlohmann::json ref{{"sidecar", {{"offset", floats_.size()}, {"length", v.size()}}}};
        for (double x : v) floats_.push_back(static_cast<float>(x));
        return ref;
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        for (float f : floats_) {
            const auto bits = std::bit_cast<std::uint32_t>(f);
            const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                                   static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
            out.write(bytes, 4);
        }
        if (!out) throw ConfigError("cannot write vector sidecar " + path.string());
    }

    bool empty() const noexcept { return floats_.empty(); }

private:
    std::vector<float> floats_;
};

}  // namespace detail

// Serializes `s`. With a sidecar writer, vectors longer than `min_sidecar_len`
// are externalized; note float32 storage rounds them.
inline nlohmann::json scenario_to_json(const Scenario& s, detail::SidecarWriter* sidecar = nullptr,
                                       std::size_t min_sidecar_len = 16) {
    using nlohmann::json;
    auto vec = [&](const Vector& v) -> json {
        if (sidecar && v.size() >= min_sidecar_len) return sidecar->put(v);
        return v;
    };
    json doc;
    doc["schema_version"] = s.schema_version;
    doc["name"] = s.name;
    doc["description"] = s.description;
    const auto& c = s.config;
    json cfg{{"seed", c.seed},
             {"num_agents", c.num_agents},
             {"rounds", c.rounds},
             {"embedding_dim", c.embedding_dim},
             {"emotion_dim", c.emotion_dim},
             {"max_messages_per_agent_per_round", c.max_messages_per_agent_per_round},
             {"post_probability", c.post_probability},
             {"memory_capacity", c.memory_capacity},
             {"ticks_per_day", c.ticks_per_day},
             {"organization_influence", c.organization_influence},
             {"post_content", s.post_content == PostContent::reuse_vectors ? "reuse_vectors" : "embed_generated_text"}};
    json platforms = json::array();
    for (const auto& p : c.platforms) {
        platforms.push_back({{"id", p.platform_id}, {"w1", p.w1}, {"w2", p.w2}, {"w3", p.w3}, {"w4", p.w4}, {"bias", p.bias}});
    }
    cfg["platforms"] = platforms;
    doc["config"] = cfg;
    doc["stance_thresholds"] = {{"lo", s.stance_thresholds.lo}, {"hi", s.stance_thresholds.hi}};
    if (s.topic_text || s.topic_embedding) {
        json t = json::object();
        if (s.topic_text) t["text"] = *s.topic_text;
        if (s.topic_embedding) t["embedding"] = vec(*s.topic_embedding);
        doc["topic"] = t;
    }
    auto params_json = [](const AgentParams& p) {
        return json{{"beta", p.beta}, {"delta", p.delta}, {"eta", p.eta}, {"gamma", p.gamma}, {"alpha", p.alpha}, {"theta", p.theta}};
    };
    if (!s.agents.empty()) {
        json agents = json::array();
        for (const auto& a : s.agents) {
            json aj{{"id", a.profile.agent_id},
                    {"platform", a.profile.platform},
                    {"followers", a.profile.followers},
                    {"persona_seed", a.profile.persona_seed},
                    {"params", params_json(a.profile.params)},
                    {"prior_mix", a.prior_mix}};
            if (a.persona) aj["persona"] = vec(*a.persona);
            if (a.affect) aj["affect"] = vec(*a.affect);
            if (a.prior_direction) aj["prior_direction"] = vec(*a.prior_direction);
            agents.push_back(aj);
        }
        doc["agents"] = agents;
    }
    if (s.persona_library) {
        json strata = json::array();
        for (const auto& st : s.persona_library->strata) {
            auto range = [](const ParamRange& r) { return json::array({r.lo, r.hi}); };
            json sj{{"name", st.name},
                    {"weight", st.weight},
                    {"platform", st.platform},
                    {"descriptors", st.descriptors},
                    {"followers", {{"log_mean", st.follower_log_mean}, {"log_sigma", st.follower_log_sigma}}},
                    {"params",
                     {{"beta", range(st.params.beta)},
                      {"delta", range(st.params.delta)},
                      {"eta", range(st.params.eta)},
                      {"gamma", range(st.params.gamma)},
                      {"alpha", range(st.params.alpha)},
                      {"theta", range(st.params.theta)}}},
                    {"prior_mix", st.prior_mix}};
            if (st.prior_direction) sj["prior_direction"] = vec(*st.prior_direction);
            strata.push_back(sj);
        }
        doc["persona_library"] = {{"strata", strata}};
    }
    json networks = json::array();
    for (const auto& net : s.networks) {
        json nj{{"platform", net.platform}};
        if (net.edges) {
            json edges = json::array();
            for (const auto& e : *net.edges) edges.push_back(json::array({e.receiver, e.sender}));
            nj["edges"] = edges;
        }
        if (net.generator) {
            if (net.generator->kind == NetworkGenerator::Kind::erdos_renyi) {
                nj["generator"] = {{"kind", "erdos_renyi"}, {"p", net.generator->p}};
            } else {
                nj["generator"] = {{"kind", "preferential_attachment"}, {"m", net.generator->m}};
            }
        }
        networks.push_back(nj);
    }
    doc["networks"] = networks;
    json timeline = json::array();
    for (const auto& ev : s.timeline) {
        json ej{{"id", ev.id}, {"round", ev.round}, {"kind", to_string(ev.kind)}, {"author", ev.author}, {"platform", ev.platform}};
        if (ev.text) ej["text"] = *ev.text;
        if (ev.embedding) ej["embedding"] = vec(*ev.embedding);
        if (ev.emotion) ej["emotion"] = *ev.emotion;
        if (ev.author_influence) ej["author_influence"] = *ev.author_influence;
        if (ev.all_targets) ej["targets"] = "all";
        else ej["targets"] = ev.targets;
        timeline.push_back(ej);
    }
    doc["timeline"] = timeline;
    if (s.ground_truth) {
        json traj = json::array();
        for (const auto& p : s.ground_truth->trajectory) traj.push_back(json::array({p.round, p.value}));
        doc["ground_truth"] = {{"trajectory", traj},
                               {"final_stances", s.ground_truth->final_stances},
                               {"stance_labels", s.ground_truth->stance_labels},
                               {"series", s.ground_truth->series}};
    }
    if (!s.dormancy.empty()) {
        json dj = json::array();
        for (const auto& w : s.dormancy) dj.push_back({{"agent", w.agent}, {"from", w.from}, {"to", w.to}});
        doc["dormancy"] = dj;
    }
    return doc;
}

// Writes `s` to `path`; with `externalize_vectors`, bulky vectors go to
// `<stem>.vec` next to it.
inline void save_scenario(const Scenario& s, const std::filesystem::path& path, bool externalize_vectors = false) {
    detail::SidecarWriter sidecar;
    nlohmann::json doc = scenario_to_json(s, externalize_vectors ? &sidecar : nullptr);
    if (externalize_vectors && !sidecar.empty()) {
        std::filesystem::path vec_path = path;
        vec_path.replace_extension(".vec");
        sidecar.write(vec_path);
        doc["vectors_file"] = vec_path.filename().string();
    }
    std::ofstream out(path, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw ConfigError("cannot write scenario file " + path.string());
}

// ---------------------------------------------------------------------------
// Personas and networks

// Stratified sampling with largest-remainder allocation of n over the strata
// weights; ties in the remainders are broken by a seeded random order.
inline std::vector<AgentSpec> sample_personas(const PersonaLibrary& library, std::size_t n, std::uint64_t seed) {
    if (library.strata.empty()) throw ConfigError("persona library is empty");
    if (n == 0) throw ConfigError("sample_personas: n must be >= 1");
    double total = 0.0;
    for (const auto& st : library.strata) {
        if (!(st.weight >= 0.0)) throw ConfigError("stratum '" + st.name + "': weight must be >= 0");
        total += st.weight;
    }
    if (!(total > 0.0)) throw ConfigError("persona library weights must sum to > 0");

    const std::size_t k = library.strata.size();
    Rng rng = Rng::derive(seed, StreamTag::sampling);
    std::vector<std::uint64_t> tiebreak(k);
    for (auto& t : tiebreak) t = rng.next_u64();

    std::vector<std::size_t> counts(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < k; ++s) {
        const double quota = static_cast<double>(n) * library.strata[s].weight / total;
        counts[s] = static_cast<std::size_t>(std::floor(quota));
        remainder[s] = quota - std::floor(quota);
        assigned += counts[s];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
        return tiebreak[a] < tiebreak[b];
    });
    for (std::size_t j = 0; assigned < n; j = (j + 1) % k) {
        ++counts[order[j]];
        ++assigned;
    }

    std::vector<AgentSpec> out;
    out.reserve(n);
    for (std::size_t s = 0; s < k; ++s) {
        const Stratum& st = library.strata[s];
        std::string seed_text = st.name;
        for (const auto& [key, value] : st.descriptors) seed_text += "; " + key + "=" + value;
        for (std::size_t c = 0; c < counts[s]; ++c) {
            AgentSpec a;
            a.profile.agent_id = st.name + "-" + std::to_string(c);
            a.profile.platform = st.platform;
            const double logf = st.follower_log_mean + st.follower_log_sigma * rng.normal();
            a.profile.followers = static_cast<std::uint64_t>(std::llround(std::exp(std::min(logf, 40.0))));
            const ParamRanges& r = st.params;
            a.profile.params = {rng.uniform(r.beta.lo, r.beta.hi),   rng.uniform(r.delta.lo, r.delta.hi),
                                rng.uniform(r.eta.lo, r.eta.hi),     rng.uniform(r.gamma.lo, r.gamma.hi),
                                rng.uniform(r.alpha.lo, r.alpha.hi), rng.uniform(r.theta.lo, r.theta.hi)};
            a.profile.persona_seed = seed_text;
            a.prior_direction = st.prior_direction;
            a.prior_mix = st.prior_mix;
            out.push_back(std::move(a));
        }
    }
    return out;
}

inline PlatformNetwork generate_network(const std::string& platform, const NetworkGenerator& spec, std::size_t n,
                                        std::uint64_t seed) {
    Rng rng = Rng::derive(seed, StreamTag::network, {detail::fnv1a(platform)});
    std::vector<Edge> edges;
    if (spec.kind == NetworkGenerator::Kind::erdos_renyi) {
        if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ConfigError("erdos_renyi: p must be in [0,1]");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && rng.uniform01() < spec.p) edges.push_back({i, j});
            }
        }
        return PlatformNetwork(platform, n, std::move(edges));
    }

    // Barabasi-Albert growth with mutual (follow-back) edges: each new node
    // links to m distinct existing nodes chosen proportionally to degree.
    const std::size_t m = spec.m;
    if (m < 1 || m >= n) throw ConfigError("preferential_attachment: requires 1 <= m < n");
    std::vector<std::size_t> endpoints;  // node repeated once per incident link
    for (std::size_t a = 0; a <= m; ++a) {
        for (std::size_t b = a + 1; b <= m; ++b) {
            edges.push_back({a, b});
            edges.push_back({b, a});
            endpoints.push_back(a);
            endpoints.push_back(b);
        }
    }
    for (std::size_t t = m + 1; t < n; ++t) {
        std::vector<std::size_t> chosen;
        while (chosen.size() < m) {
            const std::size_t v = endpoints[static_cast<std::size_t>(rng.below(endpoints.size()))];
            if (std::find(chosen.begin(), chosen.end(), v) == chosen.end()) chosen.push_back(v);
        }
        for (std::size_t v : chosen) {
            edges.push_back({t, v});
            edges.push_back({v, t});
            endpoints.push_back(t);
            endpoints.push_back(v);
        }
    }
    return PlatformNetwork(platform, n, std::move(edges));
}

// "round,value" CSV (header required) -> trajectory points.
inline std::vector<TrajectoryPoint> import_trajectory_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError("empty CSV", 1, 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line != "round,value") throw ParseError("expected header 'round,value'", 1, 1);
    std::vector<TrajectoryPoint> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected 'round,value'", lineno, 1);
        try {
            std::size_t used = 0;
            const std::string rs = line.substr(0, comma);
            const long long r = std::stoll(rs, &used);
            if (used != rs.size() || r < 0) throw std::invalid_argument("round");
            const std::string vs = line.substr(comma + 1);
            const double v = std::stod(vs, &used);
            if (used != vs.size() || !std::isfinite(v)) throw std::invalid_argument("value");
            if (!out.empty() && static_cast<Round>(r) <= out.back().round) {
                throw ParseError("rounds must be strictly increasing", lineno, 1);
            }
            out.push_back({static_cast<Round>(r), v});
        } catch (const std::logic_error&) {
            throw ParseError("malformed row '" + line + "'", lineno, 1);
        }
    }
    return out;
}

}  // namespace opcascade
